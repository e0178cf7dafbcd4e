//! JSON document formats for structures, CPSs, prefixes and maps.
//!
//! Rationals are always strings `"num/den"`. Events are written as `{a,b}`
//! (labels in canonical order) and product points as `(x,y)`. Output is
//! canonical: points and events follow declaration order and zero masses are
//! omitted, so equal values serialize to identical bytes.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::cps::{cylinder_base, cylinder_family, Cps, Measure};
use crate::error::{Error, Result};
use crate::hierarchy::{HierarchyPrefix, LevelCps};
use crate::rational::Rational;
use crate::space::{ConditioningFamily, Event, FiniteSpace, PointMap, Space};
use crate::structure::{Frame, Player, TypeStructure};
use crate::analysis::TypeMap;

pub const FORMAT_VERSION: &str = "1";

type Masses = IndexMap<String, String>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureDoc {
    format_version: String,
    states: Vec<String>,
    players: Vec<PlayerDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlayerDoc {
    name: String,
    events: Vec<Vec<String>>,
    types: Vec<String>,
    beliefs: IndexMap<String, IndexMap<String, Masses>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameDoc {
    states: Vec<String>,
    players: Vec<FramePlayerDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FramePlayerDoc {
    name: String,
    events: Vec<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VersionedFrameDoc {
    format_version: String,
    #[serde(flatten)]
    frame: FrameDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PrefixDoc {
    format_version: String,
    frame: FrameDoc,
    prefix: PrefixNode,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PrefixNode {
    player: String,
    order: usize,
    levels: Vec<IndexMap<String, Vec<AtomDoc>>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomDoc {
    state: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    belief: Option<Box<PrefixNode>>,
    mass: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CpsDoc {
    format_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    space: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    factors: Option<[Vec<String>; 2]>,
    events: Vec<Vec<String>>,
    conditionals: IndexMap<String, Masses>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointMapDoc {
    format_version: String,
    domain: Vec<String>,
    #[serde(default)]
    codomain: Option<Vec<String>>,
    map: IndexMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TypeMapDoc {
    format_version: String,
    maps: IndexMap<String, IndexMap<String, String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignalsDoc {
    format_version: String,
    states: Vec<String>,
    signals: IndexMap<String, IndexMap<String, String>>,
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        Error::Format(format!(
            "line {}, column {}: {}",
            e.line(),
            e.column(),
            e
        ))
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents always serialize");
    s.push('\n');
    s
}

fn check_version(v: &str) -> Result<()> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(Error::Format(format!(
            "unsupported format_version `{v}` (expected `{FORMAT_VERSION}`)"
        )))
    }
}

fn parse_event_key(key: &str, space: &FiniteSpace) -> Result<Event> {
    let inner = key
        .trim()
        .strip_prefix('{')
        .and_then(|k| k.strip_suffix('}'))
        .ok_or_else(|| Error::Format(format!("event `{key}` must be written as {{a,b,...}}")))?;
    let labels: Vec<&str> = inner.split(',').map(str::trim).filter(|l| !l.is_empty()).collect();
    Event::from_labels(space, &labels)
}

fn parse_pair_key(key: &str, x: &FiniteSpace, y: &FiniteSpace) -> Result<(usize, usize)> {
    let (a, b) = key
        .trim()
        .strip_prefix('(')
        .and_then(|k| k.strip_suffix(')'))
        .and_then(|k| k.split_once(','))
        .ok_or_else(|| Error::Format(format!("point `{key}` must be written as (x,y)")))?;
    Ok((x.index_of(a.trim())?, y.index_of(b.trim())?))
}

fn parse_family(space: &Space, events: &[Vec<String>]) -> Result<ConditioningFamily> {
    ConditioningFamily::from_labels(space, events)
}

fn family_labels(family: &ConditioningFamily) -> Vec<Vec<String>> {
    let space = family.space();
    family
        .events()
        .iter()
        .map(|e| e.points().iter().map(|p| space.label(*p).to_string()).collect())
        .collect()
}

fn parse_rational(s: &str) -> Result<Rational> {
    Ok(s.parse::<Rational>()?)
}

/// Fills one dense conditional per family event from `event → masses`.
fn parse_conditionals(
    family: &ConditioningFamily,
    base_space: &FiniteSpace,
    n: usize,
    entries: &IndexMap<String, Masses>,
    point: impl Fn(&str) -> Result<usize>,
    what: &str,
) -> Result<Vec<Measure>> {
    let mut out: Vec<Option<Vec<Rational>>> = vec![None; family.len()];
    for (key, masses) in entries {
        let event = parse_event_key(key, base_space)?;
        let i = family
            .position(&event)
            .ok_or_else(|| Error::Format(format!("{what}: `{key}` is not a declared event")))?;
        if out[i].is_some() {
            return Err(Error::Format(format!("{what}: event `{key}` given twice")));
        }
        let mut dense = vec![Rational::zero(); n];
        for (pt, mass) in masses {
            let idx = point(pt)?;
            if !dense[idx].is_zero() {
                return Err(Error::Format(format!("{what}: point `{pt}` given twice")));
            }
            dense[idx] = parse_rational(mass)?;
        }
        out[i] = Some(dense);
    }
    out.into_iter()
        .enumerate()
        .map(|(i, m)| {
            m.map(Measure::new).ok_or_else(|| {
                Error::Format(format!(
                    "{what}: no conditional for event {}",
                    family.events()[i].display(base_space)
                ))
            })
        })
        .collect()
}

fn masses_doc(m: &Measure, space: &FiniteSpace) -> Masses {
    m.support()
        .map(|x| (space.label(x).to_string(), m.mass(x).to_string()))
        .collect()
}

pub fn parse_structure(text: &str) -> Result<TypeStructure> {
    let doc: StructureDoc = from_json(text)?;
    check_version(&doc.format_version)?;
    let [first, second]: [PlayerDoc; 2] = doc.players.try_into().map_err(|p: Vec<PlayerDoc>| {
        Error::Format(format!("expected exactly two players, found {}", p.len()))
    })?;
    let states = FiniteSpace::new(doc.states)?;
    let players = [first, second];
    let families = [
        parse_family(&states, &players[0].events)?,
        parse_family(&states, &players[1].events)?,
    ];
    let [f0, f1] = families;
    let frame = Frame::new(states.clone(), f0, f1)?;
    let types = [
        FiniteSpace::new(players[0].types.clone())?,
        FiniteSpace::new(players[1].types.clone())?,
    ];
    let mut beliefs: [Vec<Cps>; 2] = [Vec::new(), Vec::new()];
    for p in Player::BOTH {
        let (i, j) = (p.index(), p.other().index());
        let doc = &players[i];
        for key in doc.beliefs.keys() {
            types[i].index_of(key)?;
        }
        let family = cylinder_family(frame.family(p), &types[j]);
        let product = family.space().clone();
        for t in types[i].labels() {
            let entries = doc.beliefs.get(t).ok_or_else(|| {
                Error::Format(format!("player {}: no belief for type `{t}`", doc.name))
            })?;
            let what = format!("player {}, type {t}", doc.name);
            let conditionals = parse_conditionals(
                frame.family(p),
                &states,
                product.len(),
                entries,
                |pt| {
                    let (s, u) = parse_pair_key(pt, &states, &types[j])?;
                    Ok(product.pair(s, u))
                },
                &what,
            )?;
            beliefs[i].push(Cps::candidate(family.clone(), conditionals)?);
        }
    }
    let names = [players[0].name.clone(), players[1].name.clone()];
    TypeStructure::new(frame, names, types, beliefs)
}

pub fn serialize_structure(ts: &TypeStructure) -> String {
    let states = ts.states();
    let players = Player::BOTH
        .iter()
        .map(|&p| {
            let family = ts.frame().family(p);
            let space = ts.belief_space(p);
            let beliefs = ts
                .types(p)
                .labels()
                .iter()
                .zip(ts.beliefs(p))
                .map(|(t, b)| {
                    let per_event = family
                        .events()
                        .iter()
                        .zip(b.conditionals())
                        .map(|(e, m)| (e.display(states), masses_doc(m, space)))
                        .collect();
                    (t.clone(), per_event)
                })
                .collect();
            PlayerDoc {
                name: ts.name(p).to_string(),
                events: family_labels(family),
                types: ts.types(p).labels().to_vec(),
                beliefs,
            }
        })
        .collect();
    to_json(&StructureDoc {
        format_version: FORMAT_VERSION.into(),
        states: states.labels().to_vec(),
        players,
    })
}

fn frame_doc(frame: &Frame, names: &[String; 2]) -> FrameDoc {
    FrameDoc {
        states: frame.states().labels().to_vec(),
        players: Player::BOTH
            .iter()
            .map(|&p| FramePlayerDoc {
                name: names[p.index()].clone(),
                events: family_labels(frame.family(p)),
            })
            .collect(),
    }
}

fn parse_frame_doc(doc: FrameDoc) -> Result<(Frame, [String; 2])> {
    let [a, b]: [FramePlayerDoc; 2] = doc.players.try_into().map_err(|p: Vec<FramePlayerDoc>| {
        Error::Format(format!("expected exactly two players, found {}", p.len()))
    })?;
    if a.name == b.name {
        return Err(Error::DuplicateLabel(a.name));
    }
    let states = FiniteSpace::new(doc.states)?;
    let frame = Frame::new(
        states.clone(),
        parse_family(&states, &a.events)?,
        parse_family(&states, &b.events)?,
    )?;
    Ok((frame, [a.name, b.name]))
}

/// A frame on its own: states plus named conditioning families.
pub fn serialize_frame(frame: &Frame, names: &[String; 2]) -> String {
    to_json(&VersionedFrameDoc {
        format_version: FORMAT_VERSION.into(),
        frame: frame_doc(frame, names),
    })
}

pub fn parse_frame(text: &str) -> Result<(Frame, [String; 2])> {
    let doc: VersionedFrameDoc = from_json(text)?;
    check_version(&doc.format_version)?;
    parse_frame_doc(doc.frame)
}

fn prefix_node(p: &HierarchyPrefix, frame: &Frame, names: &[String; 2]) -> PrefixNode {
    let states = frame.states();
    let family = frame.family(p.player());
    let levels = p
        .levels()
        .map(|level| {
            family
                .events()
                .iter()
                .zip(level.conditionals())
                .map(|(e, atoms)| {
                    let atoms = atoms
                        .iter()
                        .map(|((s, q), m)| AtomDoc {
                            state: states.label(*s).to_string(),
                            belief: (q.order() > 0).then(|| Box::new(prefix_node(q, frame, names))),
                            mass: m.to_string(),
                        })
                        .collect();
                    (e.display(states), atoms)
                })
                .collect()
        })
        .collect();
    PrefixNode {
        player: names[p.player().index()].clone(),
        order: p.order(),
        levels,
    }
}

fn parse_prefix_node(node: &PrefixNode, frame: &Frame, names: &[String; 2]) -> Result<HierarchyPrefix> {
    let player = Player::BOTH
        .into_iter()
        .find(|p| names[p.index()] == node.player)
        .ok_or_else(|| Error::UnknownLabel(node.player.clone()))?;
    if node.order != node.levels.len() {
        return Err(Error::MalformedPrefix(format!(
            "declared order {} but {} levels",
            node.order,
            node.levels.len()
        )));
    }
    let states = frame.states();
    let family = frame.family(player);
    let mut levels = Vec::with_capacity(node.levels.len());
    for (k, level) in node.levels.iter().enumerate() {
        let mut conditionals = vec![None; family.len()];
        for (key, atoms) in level {
            let event = parse_event_key(key, states)?;
            let e = family
                .position(&event)
                .ok_or_else(|| Error::Format(format!("`{key}` is not a declared event")))?;
            let parsed = atoms
                .iter()
                .map(|a| {
                    let s = states.index_of(&a.state)?;
                    let q = match (&a.belief, k) {
                        (None, 0) => HierarchyPrefix::empty(player.other()),
                        (Some(b), k) if k > 0 => {
                            let q = parse_prefix_node(b, frame, names)?;
                            if q.player() != player.other() || q.order() != k {
                                return Err(Error::MalformedPrefix(format!(
                                    "level {} support point must carry an order-{k} prefix of the co-player",
                                    k + 1
                                )));
                            }
                            q
                        }
                        _ => {
                            return Err(Error::MalformedPrefix(format!(
                                "level {} support point {} a nested belief",
                                k + 1,
                                if k == 0 { "must not carry" } else { "needs" }
                            )))
                        }
                    };
                    Ok(((s, q), parse_rational(&a.mass)?))
                })
                .collect::<Result<Vec<_>>>()?;
            if conditionals[e].replace(parsed).is_some() {
                return Err(Error::Format(format!("event `{key}` given twice")));
            }
        }
        let conditionals = conditionals
            .into_iter()
            .enumerate()
            .map(|(e, c)| {
                c.ok_or_else(|| {
                    Error::Format(format!(
                        "level {}: no conditional for {}",
                        k + 1,
                        family.events()[e].display(states)
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        levels.push(LevelCps::from_atoms(conditionals));
    }
    Ok(HierarchyPrefix::from_levels(player, levels))
}

/// A self-contained prefix document carrying its frame.
pub fn serialize_prefix(p: &HierarchyPrefix, frame: &Frame, names: &[String; 2]) -> String {
    to_json(&PrefixDoc {
        format_version: FORMAT_VERSION.into(),
        frame: frame_doc(frame, names),
        prefix: prefix_node(p, frame, names),
    })
}

pub fn parse_prefix(text: &str) -> Result<(Frame, [String; 2], HierarchyPrefix)> {
    let doc: PrefixDoc = from_json(text)?;
    check_version(&doc.format_version)?;
    let (frame, names) = parse_frame_doc(doc.frame)?;
    let p = parse_prefix_node(&doc.prefix, &frame, &names)?;
    Ok((frame, names, p))
}

/// JSON value of a prefix, for embedding in reports.
pub fn prefix_value(p: &HierarchyPrefix, frame: &Frame, names: &[String; 2]) -> serde_json::Value {
    serde_json::to_value(prefix_node(p, frame, names)).expect("prefix serializes")
}

fn cps_doc(cps: &Cps) -> CpsDoc {
    let space = cps.space();
    if let (Some((x, y)), Ok(base)) = (space.factors(), cylinder_base(cps.family())) {
        let conditionals = base
            .events()
            .iter()
            .zip(cps.conditionals())
            .map(|(e, m)| (e.display(x), masses_doc(m, space)))
            .collect();
        return CpsDoc {
            format_version: FORMAT_VERSION.into(),
            space: None,
            factors: Some([x.labels().to_vec(), y.labels().to_vec()]),
            events: family_labels(&base),
            conditionals,
        };
    }
    let conditionals = cps
        .family()
        .events()
        .iter()
        .zip(cps.conditionals())
        .map(|(e, m)| (e.display(space), masses_doc(m, space)))
        .collect();
    CpsDoc {
        format_version: FORMAT_VERSION.into(),
        space: Some(space.labels().to_vec()),
        factors: None,
        events: family_labels(cps.family()),
        conditionals,
    }
}

/// CPS document. On a product space with a cylinder family the events are
/// written as base events over the first factor.
pub fn serialize_cps(cps: &Cps) -> String {
    to_json(&cps_doc(cps))
}

pub fn cps_value(cps: &Cps) -> serde_json::Value {
    serde_json::to_value(cps_doc(cps)).expect("cps serializes")
}

/// Reads a CPS document; only the shape is checked, see [`Cps::validate`].
pub fn parse_cps(text: &str) -> Result<Cps> {
    let doc: CpsDoc = from_json(text)?;
    parse_cps_doc(doc)
}

pub fn cps_from_value(value: serde_json::Value) -> Result<Cps> {
    let doc: CpsDoc = serde_json::from_value(value).map_err(|e| Error::Format(e.to_string()))?;
    parse_cps_doc(doc)
}

fn parse_cps_doc(doc: CpsDoc) -> Result<Cps> {
    check_version(&doc.format_version)?;
    match (doc.space, doc.factors) {
        (Some(labels), None) => {
            let space = FiniteSpace::new(labels)?;
            let family = parse_family(&space, &doc.events)?;
            let conditionals = parse_conditionals(
                &family,
                &space,
                space.len(),
                &doc.conditionals,
                |pt| space.index_of(pt),
                "cps",
            )?;
            Cps::candidate(family, conditionals)
        }
        (None, Some([xs, ys])) => {
            let x = FiniteSpace::new(xs)?;
            let y = FiniteSpace::new(ys)?;
            let base = parse_family(&x, &doc.events)?;
            let family = cylinder_family(&base, &y);
            let product = family.space().clone();
            let conditionals = parse_conditionals(
                &base,
                &x,
                product.len(),
                &doc.conditionals,
                |pt| {
                    let (a, b) = parse_pair_key(pt, &x, &y)?;
                    Ok(product.pair(a, b))
                },
                "cps",
            )?;
            Cps::candidate(family, conditionals)
        }
        _ => Err(Error::Format(
            "a CPS document needs exactly one of `space` or `factors`".into(),
        )),
    }
}

/// Reads `{ "domain": [...], "map": { y: z } }` into a map onto `codomain`.
pub fn parse_point_map(text: &str, codomain: &Space) -> Result<PointMap> {
    let doc: PointMapDoc = from_json(text)?;
    check_version(&doc.format_version)?;
    if let Some(c) = &doc.codomain {
        if c.as_slice() != codomain.labels() {
            return Err(Error::SpaceMismatch(
                "declared codomain differs from the expected space".into(),
            ));
        }
    }
    let domain = FiniteSpace::new(doc.domain)?;
    for key in doc.map.keys() {
        domain.index_of(key)?;
    }
    let image = domain
        .labels()
        .iter()
        .map(|y| {
            let z = doc
                .map
                .get(y)
                .ok_or_else(|| Error::PartialMap(format!("no image for `{y}`")))?;
            codomain.index_of(z)
        })
        .collect::<Result<Vec<_>>>()?;
    PointMap::new(&domain, codomain, image)
}

/// Reads `{ "maps": { player: { star_type: base_type } } }`.
pub fn parse_type_map(text: &str, star: &TypeStructure, base: &TypeStructure) -> Result<TypeMap> {
    let doc: TypeMapDoc = from_json(text)?;
    check_version(&doc.format_version)?;
    for name in doc.maps.keys() {
        if star.player_named(name).is_none() {
            return Err(Error::UnknownLabel(name.clone()));
        }
    }
    let images = Player::BOTH.map(|p| -> Result<Vec<usize>> {
        let name = star.name(p);
        let map = doc
            .maps
            .get(name)
            .ok_or_else(|| Error::PartialMap(format!("no type map for player {name}")))?;
        for key in map.keys() {
            star.types(p).index_of(key)?;
        }
        star.types(p)
            .labels()
            .iter()
            .map(|t| {
                let img = map
                    .get(t)
                    .ok_or_else(|| Error::PartialMap(format!("player {name}: no image for `{t}`")))?;
                base.types(p).index_of(img)
            })
            .collect()
    });
    let [a, b] = images;
    TypeMap::new(star, base, [a?, b?])
}

/// Conditioning events as the nonempty preimages of a signal function, in
/// order of first appearance along the state order.
pub fn derive_conditioning_from_signals(
    states: &Space,
    signal: &[String],
) -> Result<ConditioningFamily> {
    if signal.len() != states.len() {
        return Err(Error::PartialMap(format!(
            "{} signals for {} states",
            signal.len(),
            states.len()
        )));
    }
    let mut groups: IndexMap<&str, Vec<usize>> = IndexMap::new();
    for (s, v) in signal.iter().enumerate() {
        groups.entry(v.as_str()).or_default().push(s);
    }
    let events = groups.into_values().map(Event::new).collect();
    ConditioningFamily::new(states, events)
}

/// Reads a signals document and derives both players' families.
pub fn parse_signals(text: &str) -> Result<(Frame, [String; 2])> {
    let doc: SignalsDoc = from_json(text)?;
    check_version(&doc.format_version)?;
    let states = FiniteSpace::new(doc.states)?;
    if doc.signals.len() != 2 {
        return Err(Error::Format(format!(
            "expected signals for exactly two players, found {}",
            doc.signals.len()
        )));
    }
    let mut names = Vec::new();
    let mut families = Vec::new();
    for (name, map) in &doc.signals {
        for key in map.keys() {
            states.index_of(key)?;
        }
        let signal = states
            .labels()
            .iter()
            .map(|s| {
                map.get(s)
                    .cloned()
                    .ok_or_else(|| Error::PartialMap(format!("player {name}: no signal at `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        names.push(name.clone());
        families.push(derive_conditioning_from_signals(&states, &signal)?);
    }
    let second = families.pop().unwrap();
    let first = families.pop().unwrap();
    let frame = Frame::new(states, first, second)?;
    Ok((frame, [names[0].clone(), names[1].clone()]))
}
