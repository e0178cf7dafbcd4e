//! Whole-structure analyses built on partition refinement.
//!
//! Round `n + 1` groups two types of player `i` when their beliefs, pushed
//! through the round-`n` blocks of the co-player, coincide. Round-`n` blocks
//! are exactly the classes of equal order-`n` hierarchy prefixes, and the
//! first round that changes nothing is a fixpoint for all later orders.

use serde::Serialize;

use crate::cps::{conditional_of_measure, cylinder, Cps, Measure, ValidationReport};
use crate::error::{Error, Result};
use crate::hierarchy::{pushforward_under_partition, Partition};
use crate::rational::Rational;
use crate::space::{FiniteSpace, PointMap};
use crate::structure::{Player, TypeStructure};

pub fn validate_structure(ts: &TypeStructure) -> ValidationReport {
    ts.validate()
}

/// Rounds `P_0, …, P_fix` of the refinement; `P_n = P_fix` for `n ≥ fix`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refinement {
    rounds: Vec<[Partition; 2]>,
}

impl Refinement {
    /// First `n` with `P_{n+1} = P_n` for both players.
    pub fn fixpoint(&self) -> usize {
        self.rounds.len() - 1
    }

    /// Number of refinement rounds computed, counting the one that detected
    /// stability.
    pub fn rounds_run(&self) -> usize {
        self.rounds.len()
    }

    pub fn at(&self, n: usize) -> &[Partition; 2] {
        &self.rounds[n.min(self.fixpoint())]
    }

    pub fn partition(&self, n: usize, player: Player) -> &Partition {
        &self.at(n)[player.index()]
    }

    pub fn final_partitions(&self) -> &[Partition; 2] {
        self.rounds.last().expect("at least P_0")
    }
}

fn refine_round(ts: &TypeStructure, prev: &[Partition; 2]) -> Result<[Partition; 2]> {
    let mut out = prev.clone();
    for p in Player::BOTH {
        let j = p.other().index();
        let ids: Vec<usize> = (0..prev[j].block_count()).collect();
        let signatures = ts
            .beliefs(p)
            .iter()
            .map(|b| pushforward_under_partition(b, &prev[j], &ids))
            .collect::<Result<Vec<_>>>()?;
        out[p.index()] = Partition::from_keys(&signatures);
    }
    Ok(out)
}

fn refine_to(ts: &TypeStructure, limit: Option<usize>) -> Result<Refinement> {
    ts.ensure_valid()?;
    let mut rounds = vec![Player::BOTH.map(|p| Partition::trivial(ts.type_count(p)))];
    loop {
        if limit.is_some_and(|l| rounds.len() > l) {
            break;
        }
        let next = refine_round(ts, rounds.last().unwrap())?;
        if &next == rounds.last().unwrap() {
            break;
        }
        rounds.push(next);
    }
    Ok(Refinement { rounds })
}

/// Refines until both players' partitions are stable.
///
/// Every non-final round splits at least one block, so the fixpoint index is
/// at most `|T_1| + |T_2|`.
pub fn refine(ts: &TypeStructure) -> Result<Refinement> {
    refine_to(ts, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Depth {
    Order(usize),
    Fixpoint,
}

impl Depth {
    fn limit(self) -> Result<Option<usize>> {
        match self {
            Depth::Order(0) => Err(Error::ZeroDepth),
            Depth::Order(n) => Ok(Some(n)),
            Depth::Fixpoint => Ok(None),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Redundancy {
    NonRedundant,
    Redundant {
        player: Player,
        first: usize,
        second: usize,
    },
}

/// Non-redundant iff the fixpoint partitions are discrete for both players.
pub fn is_non_redundant(ts: &TypeStructure) -> Result<Redundancy> {
    let refinement = refine(ts)?;
    for p in Player::BOTH {
        let part = &refinement.final_partitions()[p.index()];
        if let Some(block) = part.members().into_iter().find(|m| m.len() > 1) {
            return Ok(Redundancy::Redundant {
                player: p,
                first: block[0],
                second: block[1],
            });
        }
    }
    Ok(Redundancy::NonRedundant)
}

/// `star` and `base` side by side: player `i`'s types are `T_i^base`
/// followed by `T_i^star`, and every belief is extended by zero mass on the
/// other structure's types.
pub struct DisjointUnion {
    pub structure: TypeStructure,
    offsets: [usize; 2],
}

impl DisjointUnion {
    pub fn new(base: &TypeStructure, star: &TypeStructure) -> Result<Self> {
        base.frame().ensure_same(star.frame())?;
        let offsets = Player::BOTH.map(|p| base.type_count(p));
        let types = Player::BOTH.map(|p| {
            let labels = base
                .types(p)
                .labels()
                .iter()
                .map(|l| format!("base:{l}"))
                .chain(star.types(p).labels().iter().map(|l| format!("star:{l}")));
            FiniteSpace::new(labels).expect("prefixed labels are distinct")
        });
        let states = base.states();
        let mut beliefs: [Vec<Cps>; 2] = [Vec::new(), Vec::new()];
        for p in Player::BOTH {
            let j = p.other().index();
            let target = FiniteSpace::product(states, &types[j]);
            let family = crate::cps::cylinder_family(base.frame().family(p), &types[j]);
            for (src, offset) in [(base, 0), (star, offsets[j])] {
                let src_space = src.belief_space(p);
                let embed = PointMap::from_fn(src_space, &target, |x| {
                    let (s, t) = src_space.unpair(x);
                    target.pair(s, offset + t)
                })?;
                for b in src.beliefs(p) {
                    let conditionals = b.conditionals().iter().map(|m| m.pushforward(&embed)).collect();
                    beliefs[p.index()].push(Cps::candidate(family.clone(), conditionals)?);
                }
            }
        }
        let structure = TypeStructure::new(
            base.frame().clone(),
            base.names().clone(),
            types,
            beliefs,
        )?;
        Ok(DisjointUnion { structure, offsets })
    }

    pub fn base_index(&self, _player: Player, t: usize) -> usize {
        t
    }

    pub fn star_index(&self, player: Player, t: usize) -> usize {
        self.offsets[player.index()] + t
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inclusion {
    Included,
    /// `star_type` of `player` shares no block with any base type.
    NotIncluded { player: Player, star_type: usize },
}

/// Whether every hierarchy generated by `star` (up to `depth`) is also
/// generated by `base`.
pub fn hierarchies_included(
    star: &TypeStructure,
    base: &TypeStructure,
    depth: Depth,
) -> Result<Inclusion> {
    let limit = depth.limit()?;
    let union = DisjointUnion::new(base, star)?;
    let refinement = refine_to(&union.structure, limit)?;
    let parts = refinement.at(limit.unwrap_or(usize::MAX));
    for p in Player::BOTH {
        let part = &parts[p.index()];
        let base_blocks: std::collections::BTreeSet<usize> =
            (0..base.type_count(p)).map(|t| part.block(t)).collect();
        for t in 0..star.type_count(p) {
            if !base_blocks.contains(&part.block(union.star_index(p, t))) {
                return Ok(Inclusion::NotIncluded { player: p, star_type: t });
            }
        }
    }
    Ok(Inclusion::Included)
}

/// A type map from one structure into another, one image per type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeMap {
    images: [Vec<usize>; 2],
}

impl TypeMap {
    pub fn new(star: &TypeStructure, base: &TypeStructure, images: [Vec<usize>; 2]) -> Result<Self> {
        for p in Player::BOTH {
            let imgs = &images[p.index()];
            if imgs.len() != star.type_count(p) {
                return Err(Error::PartialMap(format!(
                    "player {} has {} types but {} images",
                    star.name(p),
                    star.type_count(p),
                    imgs.len()
                )));
            }
            if let Some(&t) = imgs.iter().find(|t| **t >= base.type_count(p)) {
                return Err(Error::PointOutOfRange(t));
            }
        }
        Ok(TypeMap { images })
    }

    pub fn identity(ts: &TypeStructure) -> Self {
        TypeMap {
            images: Player::BOTH.map(|p| (0..ts.type_count(p)).collect()),
        }
    }

    pub fn apply(&self, player: Player, t: usize) -> usize {
        self.images[player.index()][t]
    }

    pub fn images(&self, player: Player) -> &[usize] {
        &self.images[player.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MorphismWitness {
    pub player: String,
    #[serde(rename = "type")]
    pub type_label: String,
    pub event: String,
    pub point: String,
    #[serde(serialize_with = "ser_rational")]
    pub expected: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub found: Rational,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MorphismCheck {
    Holds,
    Fails(Box<MorphismWitness>),
}

/// Checks `β_i(φ_i(t)) = L̄_(Id_S, φ_j)(β_i^*(t))` for every player, type,
/// conditioning cylinder and point of `S × T_j`.
pub fn check_type_morphism(
    star: &TypeStructure,
    base: &TypeStructure,
    phi: &TypeMap,
) -> Result<MorphismCheck> {
    base.frame().ensure_same(star.frame())?;
    star.ensure_valid()?;
    base.ensure_valid()?;
    for p in Player::BOTH {
        let j = p.other();
        let phi_j = PointMap::new(star.types(j), base.types(j), phi.images(j).to_vec())?;
        let push = PointMap::lift_second(star.states(), &phi_j);
        let target = base.belief_space(p);
        let events = base.frame().family(p).events();
        for t in 0..star.type_count(p) {
            let image = base.belief(p, phi.apply(p, t));
            let pushed = star.belief(p, t);
            for (e, event) in events.iter().enumerate() {
                let lhs = image.conditional(e);
                let rhs = pushed.conditional(e).pushforward(&push);
                if let Some(x) = target.points().find(|x| lhs.mass(*x) != rhs.mass(*x)) {
                    return Ok(MorphismCheck::Fails(Box::new(MorphismWitness {
                        player: star.name(p).to_string(),
                        type_label: star.types(p).label(t).to_string(),
                        event: cylinder(target, event).display(target),
                        point: target.label(x).to_string(),
                        expected: lhs.mass(x).clone(),
                        found: rhs.mass(x).clone(),
                    })));
                }
            }
        }
    }
    Ok(MorphismCheck::Holds)
}

/// `t` and `φ(t)` must generate the same hierarchy up to `depth` for every
/// starred type. Returns the first offending `(player, star type)`.
pub fn check_hierarchy_morphism(
    star: &TypeStructure,
    base: &TypeStructure,
    phi: &TypeMap,
    depth: Depth,
) -> Result<Option<(Player, usize)>> {
    let limit = depth.limit()?;
    let union = DisjointUnion::new(base, star)?;
    let refinement = refine_to(&union.structure, limit)?;
    let parts = refinement.at(limit.unwrap_or(usize::MAX));
    for p in Player::BOTH {
        let part = &parts[p.index()];
        for t in 0..star.type_count(p) {
            let mapped = union.base_index(p, phi.apply(p, t));
            if !part.same_block(union.star_index(p, t), mapped) {
                return Ok(Some((p, t)));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlayerCompleteness {
    /// Every cylinder is a single point, so there is exactly one CPS.
    SingletonCodomain,
    /// A valid CPS outside the image of the belief map.
    Incomplete { witness: Cps },
}

impl PlayerCompleteness {
    pub fn is_complete(&self) -> bool {
        matches!(self, PlayerCompleteness::SingletonCodomain)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletenessReport {
    pub players: [PlayerCompleteness; 2],
}

impl CompletenessReport {
    pub fn is_complete(&self) -> bool {
        self.players.iter().all(PlayerCompleteness::is_complete)
    }
}

/// Decides whether each belief map is onto its CPS codomain.
///
/// When some cylinder has two or more points the codomain is infinite; the
/// report then exhibits one of `|T_i| + 1` distinct CPSs obtained by
/// conditioning measures that weight a designated point `y*` by `k` and
/// every other point by `1`. Since `μ_k({y*}|B*) = k / (k + |B*| − 1)` is
/// injective in `k`, one of them misses the image.
pub fn completeness_report(ts: &TypeStructure) -> Result<CompletenessReport> {
    ts.ensure_valid()?;
    let players = Player::BOTH.map(|p| player_completeness(ts, p));
    Ok(CompletenessReport { players })
}

fn player_completeness(ts: &TypeStructure, p: Player) -> PlayerCompleteness {
    let family = ts.cylinder_family(p);
    let space = family.space();
    let largest = family
        .events()
        .iter()
        .fold(&family.events()[0], |best, e| if e.len() > best.len() { e } else { best });
    if largest.len() == 1 {
        return PlayerCompleteness::SingletonCodomain;
    }
    let designated = largest.points()[0];
    let images = ts.beliefs(p);
    for k in 1..=(images.len() as i64 + 1) {
        let weights: Vec<Rational> = space
            .points()
            .map(|x| Rational::from(if x == designated { k } else { 1 }))
            .collect();
        let total: Rational = weights.iter().sum();
        let p_k = Measure::new(weights.into_iter().map(|w| w / &total).collect());
        let candidate = conditional_of_measure(&p_k, family).expect("full support");
        if !images.contains(&candidate) {
            return PlayerCompleteness::Incomplete { witness: candidate };
        }
    }
    unreachable!("|T_i| + 1 distinct CPSs cannot all be images of |T_i| types")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cps::cylinder_family;
    use crate::space::ConditioningFamily;
    use crate::structure::Frame;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn single_type(states: &[&str]) -> TypeStructure {
        let s = FiniteSpace::new(states.iter().copied()).unwrap();
        let fam = ConditioningFamily::trivial(&s);
        let frame = Frame::new(s.clone(), fam.clone(), fam.clone()).unwrap();
        let ta = FiniteSpace::new(["ta"]).unwrap();
        let tb = FiniteSpace::new(["tb"]).unwrap();
        let ca = cylinder_family(&fam, &tb);
        let cb = cylinder_family(&fam, &ta);
        TypeStructure::new(
            frame,
            ["a".into(), "b".into()],
            [ta, tb],
            [vec![Cps::dirac(ca, 0).unwrap()], vec![Cps::dirac(cb, 0).unwrap()]],
        )
        .unwrap()
    }

    #[test]
    fn single_types_are_fixed_immediately() {
        let ts = single_type(&["s"]);
        let refinement = refine(&ts).unwrap();
        assert_eq!(refinement.fixpoint(), 0);
        assert_eq!(refinement.rounds_run(), 1);
        assert_eq!(is_non_redundant(&ts).unwrap(), Redundancy::NonRedundant);
        let report = completeness_report(&ts).unwrap();
        assert!(report.is_complete());
    }

    #[test]
    fn incomplete_with_distinct_witness() {
        let ts = single_type(&["s1", "s2"]);
        let report = completeness_report(&ts).unwrap();
        assert!(!report.is_complete());
        let PlayerCompleteness::Incomplete { witness } = &report.players[0] else {
            panic!("expected a witness");
        };
        assert!(witness.validate().is_valid());
        assert_eq!(witness.conditional(0).masses(), &[r(1, 2), r(1, 2)]);
    }

    #[test]
    fn frame_mismatch_is_rejected() {
        let a = single_type(&["s"]);
        let b = single_type(&["s1", "s2"]);
        assert!(matches!(
            hierarchies_included(&a, &b, Depth::Fixpoint),
            Err(Error::FrameMismatch(_))
        ));
        assert_eq!(
            hierarchies_included(&a, &a, Depth::Order(0)).unwrap_err(),
            Error::ZeroDepth
        );
    }

    #[test]
    fn partial_type_map_rejected() {
        let a = single_type(&["s"]);
        assert!(matches!(
            TypeMap::new(&a, &a, [vec![], vec![0]]),
            Err(Error::PartialMap(_))
        ));
        assert!(matches!(
            TypeMap::new(&a, &a, [vec![1], vec![0]]),
            Err(Error::PointOutOfRange(1))
        ));
    }
}
