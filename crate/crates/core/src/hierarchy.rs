//! Finitely supported hierarchies of conditional beliefs.
//!
//! A prefix of order `n` for player `i` is a tower `μ¹, …, μⁿ`. Level `k`
//! is a CPS over pairs `(s, q)` where `s ∈ S` and `q` is an order `k − 1`
//! prefix of the co-player, conditioned on the cylinders `B × ·` for
//! `B ∈ ℬ_i`. The order-0 prefix is the empty tower, so level 1 is simply a
//! CPS over `S` with support points `(s, ∅)`.
//!
//! Levels are shared behind [`Arc`]s: the prefixes produced by [`unfold`]
//! form a DAG, and equality checks short-circuit on pointer identity.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::cps::{chain_rule_failures, Cps, SparseView, ValidationReport, Violation, ViolationKind};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::structure::{Frame, Player, TypeStructure};

/// Per conditioning event, the nonzero atoms `((s, q), mass)` in
/// ascending point order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LevelCps<Q> {
    conditionals: Vec<Vec<((usize, Q), Rational)>>,
}

pub type Level = LevelCps<HierarchyPrefix>;

impl<Q: Ord> LevelCps<Q> {
    /// Sorts atoms, merges repeated points and drops zero masses.
    pub fn from_atoms(conditionals: Vec<Vec<((usize, Q), Rational)>>) -> Self {
        let conditionals = conditionals
            .into_iter()
            .map(|atoms| {
                let mut merged: BTreeMap<(usize, Q), Rational> = BTreeMap::new();
                for (p, m) in atoms {
                    *merged.entry(p).or_default() += m;
                }
                merged.into_iter().filter(|(_, m)| !m.is_zero()).collect()
            })
            .collect();
        LevelCps { conditionals }
    }

    pub fn conditionals(&self) -> &[Vec<((usize, Q), Rational)>] {
        &self.conditionals
    }

    pub fn given(&self, event: usize) -> &[((usize, Q), Rational)] {
        &self.conditionals[event]
    }

    pub fn event_count(&self) -> usize {
        self.conditionals.len()
    }
}

/// A coherent tower of conditional beliefs of one player, up to some order.
#[derive(Clone)]
pub struct HierarchyPrefix {
    player: Player,
    levels: Vec<Arc<Level>>,
}

fn cmp_levels(a: &[Arc<Level>], b: &[Arc<Level>]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if Arc::ptr_eq(x, y) {
            continue;
        }
        match x.as_ref().cmp(y.as_ref()) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

impl Ord for HierarchyPrefix {
    fn cmp(&self, other: &Self) -> Ordering {
        self.player
            .cmp(&other.player)
            .then_with(|| cmp_levels(&self.levels, &other.levels))
    }
}

impl PartialOrd for HierarchyPrefix {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for HierarchyPrefix {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HierarchyPrefix {}

impl std::hash::Hash for HierarchyPrefix {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.player.hash(state);
        self.levels.len().hash(state);
        // First-order beliefs are cheap and discriminate well enough.
        if let Some(first) = self.levels.first() {
            for atoms in &first.conditionals {
                for ((s, _), m) in atoms {
                    s.hash(state);
                    m.hash(state);
                }
            }
        }
    }
}

impl fmt::Debug for HierarchyPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HierarchyPrefix({:?}, order {})", self.player, self.order())
    }
}

impl HierarchyPrefix {
    /// The order-0 prefix of `player`.
    pub fn empty(player: Player) -> Self {
        HierarchyPrefix {
            player,
            levels: Vec::new(),
        }
    }

    /// Assembles a prefix without checking it; see [`check_prefix_coherence`].
    pub fn from_levels(player: Player, levels: Vec<Level>) -> Self {
        HierarchyPrefix {
            player,
            levels: levels.into_iter().map(Arc::new).collect(),
        }
    }

    pub fn player(&self) -> Player {
        self.player
    }

    pub fn order(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, k: usize) -> &Level {
        &self.levels[k - 1]
    }

    pub fn levels(&self) -> impl Iterator<Item = &Level> {
        self.levels.iter().map(Arc::as_ref)
    }

    pub fn top(&self) -> Option<&Level> {
        self.levels.last().map(Arc::as_ref)
    }

    pub fn with_level(&self, level: Level) -> Self {
        let mut levels = self.levels.clone();
        levels.push(Arc::new(level));
        HierarchyPrefix {
            player: self.player,
            levels,
        }
    }

    pub(crate) fn truncated(&self, m: usize) -> Self {
        HierarchyPrefix {
            player: self.player,
            levels: self.levels[..m].to_vec(),
        }
    }

    /// Short human-readable form showing the order and first-order beliefs.
    pub fn summary(&self, frame: &Frame) -> String {
        let Some(first) = self.levels.first() else {
            return "∅".to_string();
        };
        let fam = frame.family(self.player);
        let states = frame.states();
        let parts: Vec<String> = fam
            .events()
            .iter()
            .zip(&first.conditionals)
            .map(|(e, atoms)| {
                let masses: Vec<String> = atoms
                    .iter()
                    .map(|((s, _), m)| format!("{}:{m}", states.label(*s)))
                    .collect();
                format!("{}→({})", e.display(states), masses.join(","))
            })
            .collect();
        format!("⟨order {}; {}⟩", self.order(), parts.join(" "))
    }
}

/// Renders a level-`k` support point for reports.
pub(crate) fn describe_point(frame: &Frame, state: usize, q: &HierarchyPrefix) -> String {
    let s = frame.states().label(state);
    if q.order() == 0 {
        s.to_string()
    } else {
        format!("({s},{})", q.summary(frame))
    }
}

/// A partition of a type set into dense, canonically numbered blocks.
///
/// Blocks are numbered by the first member in canonical type order, so two
/// partitions group the same types iff they are equal as values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    block_of: Vec<usize>,
    blocks: usize,
}

impl Partition {
    pub fn trivial(n: usize) -> Self {
        Partition {
            block_of: vec![0; n],
            blocks: usize::from(n > 0),
        }
    }

    pub fn discrete(n: usize) -> Self {
        Partition {
            block_of: (0..n).collect(),
            blocks: n,
        }
    }

    /// Groups positions with equal keys.
    pub fn from_keys<K: Ord>(keys: &[K]) -> Self {
        let mut ids: BTreeMap<&K, usize> = BTreeMap::new();
        let block_of = keys
            .iter()
            .map(|k| {
                let next = ids.len();
                *ids.entry(k).or_insert(next)
            })
            .collect();
        Partition {
            block_of,
            blocks: ids.len(),
        }
    }

    pub fn block(&self, t: usize) -> usize {
        self.block_of[t]
    }

    pub fn block_of(&self) -> &[usize] {
        &self.block_of
    }

    pub fn block_count(&self) -> usize {
        self.blocks
    }

    pub fn len(&self) -> usize {
        self.block_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block_of.is_empty()
    }

    pub fn same_block(&self, a: usize, b: usize) -> bool {
        self.block_of[a] == self.block_of[b]
    }

    pub fn is_discrete(&self) -> bool {
        self.blocks == self.block_of.len()
    }

    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.blocks];
        for (t, b) in self.block_of.iter().enumerate() {
            out[*b].push(t);
        }
        out
    }
}

/// Pushes a belief over `S × T_j` through `(s, t) ↦ (s, reps[part(t)])`.
///
/// The result keeps one conditional per cylinder event, in family order.
pub fn pushforward_under_partition<Q: Ord + Clone>(
    mu: &Cps,
    part: &Partition,
    reps: &[Q],
) -> Result<LevelCps<Q>> {
    let space = mu.space();
    let (_, types) = space.factors().ok_or(Error::NotCylinder)?;
    if types.len() != part.len() {
        return Err(Error::SpaceMismatch(format!(
            "partition covers {} types but the belief ranges over {}",
            part.len(),
            types.len()
        )));
    }
    if reps.len() < part.block_count() {
        return Err(Error::MissingRepresentative(reps.len()));
    }
    let mut conditionals = Vec::with_capacity(mu.family().len());
    for m in mu.conditionals() {
        let mut acc: BTreeMap<(usize, &Q), Rational> = BTreeMap::new();
        for p in m.support() {
            let (s, t) = space.unpair(p);
            let block = part.block(t);
            let q = &reps[block];
            *acc.entry((s, q)).or_default() += m.mass(p);
        }
        conditionals.push(
            acc.into_iter()
                .map(|((s, q), m)| ((s, q.clone()), m))
                .collect(),
        );
    }
    Ok(LevelCps { conditionals })
}

/// Order-`n` hierarchy prefixes of every type of both players, indexed by
/// [`Player::index`] and then by type.
///
/// Level `k + 1` is built from the quotient of `T_j` by order-`k` prefix
/// equality, so each distinct prefix is computed once and shared.
pub fn unfold(ts: &TypeStructure, n: usize) -> Result<[Vec<HierarchyPrefix>; 2]> {
    if n == 0 {
        return Err(Error::ZeroDepth);
    }
    ts.ensure_valid()?;
    let mut parts = Player::BOTH.map(|p| Partition::trivial(ts.type_count(p)));
    let mut reps = Player::BOTH.map(|p| vec![HierarchyPrefix::empty(p)]);
    let mut prefixes = Player::BOTH.map(|p| vec![HierarchyPrefix::empty(p); ts.type_count(p)]);
    for _ in 0..n {
        let mut next_parts = parts.clone();
        let mut next_reps = reps.clone();
        let mut next_prefixes = prefixes.clone();
        for p in Player::BOTH {
            let (i, j) = (p.index(), p.other().index());
            let extended = ts
                .beliefs(p)
                .iter()
                .zip(&prefixes[i])
                .map(|(b, prev)| {
                    pushforward_under_partition(b, &parts[j], &reps[j]).map(|l| prev.with_level(l))
                })
                .collect::<Result<Vec<_>>>()?;
            let part = Partition::from_keys(&extended);
            let block_reps: Vec<HierarchyPrefix> = part
                .members()
                .iter()
                .map(|m| extended[m[0]].clone())
                .collect();
            next_prefixes[i] = (0..extended.len())
                .map(|t| block_reps[part.block(t)].clone())
                .collect();
            next_parts[i] = part;
            next_reps[i] = block_reps;
        }
        parts = next_parts;
        reps = next_reps;
        prefixes = next_prefixes;
    }
    Ok(prefixes)
}

/// Drops levels above `m`.
///
/// Support points of level `k` are already order `k − 1` prefixes, so the
/// retained levels need no further projection.
pub fn truncate(p: &HierarchyPrefix, m: usize) -> Result<HierarchyPrefix> {
    if m == 0 || m > p.order() {
        return Err(Error::OrderOutOfRange {
            requested: m,
            order: p.order(),
        });
    }
    Ok(p.truncated(m))
}

/// Checks that every level is a CPS over the cylinder family and that each
/// level marginalizes exactly onto the one below it. Nested co-player
/// prefixes are checked as well.
///
/// Structural problems (wrong nesting order, unsorted or zero atoms) are
/// errors rather than violations.
pub fn check_prefix_coherence(p: &HierarchyPrefix, frame: &Frame) -> Result<ValidationReport> {
    let mut report = ValidationReport::valid();
    let mut visited = HashSet::new();
    check_rec(p, frame, "", &mut report, &mut visited)?;
    Ok(report)
}

fn check_rec(
    p: &HierarchyPrefix,
    frame: &Frame,
    location: &str,
    report: &mut ValidationReport,
    visited: &mut HashSet<*const Level>,
) -> Result<()> {
    let Some(last) = p.levels.last() else {
        return Ok(());
    };
    if !visited.insert(Arc::as_ptr(last)) {
        return Ok(());
    }
    let states = frame.states();
    let fam = frame.family(p.player);
    let events = fam.events();
    let mut push = |kind| {
        report.violations.push(Violation {
            location: location.to_string(),
            kind,
        })
    };
    let mut nested: BTreeMap<&HierarchyPrefix, String> = BTreeMap::new();
    for (k, level) in p.levels.iter().enumerate() {
        if level.conditionals.len() != fam.len() {
            return Err(Error::MalformedPrefix(format!(
                "level {} has {} conditionals for {} events",
                k + 1,
                level.conditionals.len(),
                fam.len()
            )));
        }
        for (e, atoms) in events.iter().zip(&level.conditionals) {
            for w in atoms.windows(2) {
                if w[0].0 >= w[1].0 {
                    return Err(Error::MalformedPrefix(format!(
                        "level {} support is not in canonical order",
                        k + 1
                    )));
                }
            }
            let mut total = Rational::zero();
            for ((s, q), m) in atoms {
                if *s >= states.len() {
                    return Err(Error::PointOutOfRange(*s));
                }
                if q.player != p.player.other() || q.order() != k {
                    return Err(Error::MalformedPrefix(format!(
                        "level {} support point carries an order-{} prefix of the wrong player or order",
                        k + 1,
                        q.order()
                    )));
                }
                if m.is_zero() {
                    return Err(Error::MalformedPrefix(format!(
                        "level {} stores a zero atom",
                        k + 1
                    )));
                }
                let point = describe_point(frame, *s, q);
                if m.is_negative() {
                    push(ViolationKind::NegativeMass {
                        event: e.display(states),
                        point,
                        mass: m.clone(),
                    });
                } else if !e.contains(*s) {
                    push(ViolationKind::MassOutsideEvent {
                        event: e.display(states),
                        point,
                        mass: m.clone(),
                    });
                }
                total += m;
                if q.order() > 0 {
                    nested
                        .entry(q)
                        .or_insert_with(|| format!("level {} point {}", k + 1, describe_point(frame, *s, q)));
                }
            }
            if !total.is_one() {
                push(ViolationKind::NotNormalized {
                    event: e.display(states),
                    total,
                });
            }
        }
        let view = SparseView {
            atoms: level.conditionals.iter().map(Vec::as_slice).collect(),
        };
        for ((s, q), b, c, lhs, rhs) in
            chain_rule_failures(&view, &fam.inclusions(), |b, (s, _)| events[b].contains(*s))
        {
            push(ViolationKind::ChainRule {
                point: describe_point(frame, *s, q),
                inner: events[b].display(states),
                outer: events[c].display(states),
                lhs,
                rhs,
            });
        }
    }
    for k in 1..p.levels.len() {
        let lower = &p.levels[k - 1];
        let upper = &p.levels[k];
        for (e, (want, got)) in lower.conditionals.iter().zip(&upper.conditionals).enumerate() {
            let mut pushed: BTreeMap<(usize, HierarchyPrefix), Rational> = BTreeMap::new();
            for ((s, q), m) in got {
                *pushed.entry((*s, q.truncated(k - 1))).or_default() += m;
            }
            if let Some((point, expected, found)) = first_mismatch(want, &pushed) {
                push(ViolationKind::Incoherent {
                    level: k,
                    event: events[e].display(states),
                    point: describe_point(frame, point.0, &point.1),
                    expected,
                    found,
                });
            }
        }
    }
    for (q, loc) in nested {
        let loc = if location.is_empty() {
            loc
        } else {
            format!("{location}, {loc}")
        };
        check_rec(q, frame, &loc, report, visited)?;
    }
    Ok(())
}

fn first_mismatch(
    want: &[((usize, HierarchyPrefix), Rational)],
    got: &BTreeMap<(usize, HierarchyPrefix), Rational>,
) -> Option<((usize, HierarchyPrefix), Rational, Rational)> {
    let want_map: BTreeMap<&(usize, HierarchyPrefix), &Rational> =
        want.iter().map(|(p, m)| (p, m)).collect();
    let mut keys: Vec<&(usize, HierarchyPrefix)> = want_map.keys().copied().collect();
    keys.extend(got.keys());
    keys.sort();
    keys.dedup();
    let zero = Rational::zero();
    keys.into_iter().find_map(|k| {
        let a = want_map.get(k).copied().unwrap_or(&zero);
        let b = got.get(k).filter(|m| !m.is_zero()).unwrap_or(&zero);
        (a != b).then(|| (k.clone(), a.clone(), b.clone()))
    })
}
