//! Coherent extension of hierarchy prefixes and lifting of CPSs through
//! surjections.

use std::collections::BTreeMap;

use crate::cps::{conditional_of_measure, cylinder_base, cylinder_family, pushforward_cps, Cps, Measure};
use crate::error::{Error, Result};
use crate::hierarchy::{check_prefix_coherence, HierarchyPrefix, Level, LevelCps};
use crate::space::{ConditioningFamily, PointMap, Space};
use crate::structure::{Frame, Player};

/// The conditional system of the uniform measure on `space`.
pub fn canonical_base_cps(family: &ConditioningFamily) -> Cps {
    conditional_of_measure(&Measure::uniform(family.space()), family)
        .expect("uniform measure has full support")
}

/// First-order prefix of `player` given by [`canonical_base_cps`].
fn seed(player: Player, frame: &Frame) -> HierarchyPrefix {
    let base = canonical_base_cps(frame.family(player));
    let empty = HierarchyPrefix::empty(player.other());
    let level = LevelCps::from_atoms(
        base.conditionals()
            .iter()
            .map(|m| m.support().map(|s| ((s, empty.clone()), m.mass(s).clone())).collect())
            .collect(),
    );
    HierarchyPrefix::empty(player).with_level(level)
}

struct Extender<'a> {
    frame: &'a Frame,
    memo: BTreeMap<HierarchyPrefix, HierarchyPrefix>,
}

impl Extender<'_> {
    /// `ψ`-extension: the order-0 prefix goes to the seed, and an order-`n`
    /// prefix gains the image of its top level under `(s, q) ↦ (s, ext(q))`.
    fn extend(&mut self, p: &HierarchyPrefix) -> HierarchyPrefix {
        if let Some(done) = self.memo.get(p) {
            return done.clone();
        }
        let out = match p.top() {
            None => seed(p.player(), self.frame),
            Some(top) => {
                let conditionals: Vec<Vec<_>> = top
                    .conditionals()
                    .iter()
                    .map(|atoms| {
                        atoms
                            .iter()
                            .map(|((s, q), m)| ((*s, self.extend(q)), m.clone()))
                            .collect()
                    })
                    .collect();
                let level: Level = LevelCps::from_atoms(conditionals);
                p.with_level(level)
            }
        };
        self.memo.insert(p.clone(), out.clone());
        out
    }
}

/// Extends a coherent prefix of order `n` to order `n + 1`.
///
/// The new level is the image of level `n` under `ψ_i^n`, with `ψ_i^1(s) =
/// (s, seed_j)` and `ψ_i^{n+1}(s, q) = (s, ψ-extension of q)`. Its marginal
/// on the previous domain is level `n` again.
pub fn coherent_extend(p: &HierarchyPrefix, frame: &Frame) -> Result<HierarchyPrefix> {
    if p.order() == 0 {
        return Err(Error::OrderOutOfRange {
            requested: 0,
            order: 0,
        });
    }
    let report = check_prefix_coherence(p, frame)?;
    if !report.is_valid() {
        return Err(Error::IncoherentPrefix(report));
    }
    let mut ext = Extender {
        frame,
        memo: BTreeMap::new(),
    };
    Ok(ext.extend(p))
}

/// The section `g` of a surjection `f` picking the first preimage of each
/// point in canonical order, so that `f(g(z)) = z`.
pub fn right_inverse(f: &PointMap) -> Result<PointMap> {
    let mut first: Vec<Option<usize>> = vec![None; f.codomain().len()];
    for y in f.domain().points() {
        first[f.apply(y)].get_or_insert(y);
    }
    let image = first
        .into_iter()
        .enumerate()
        .map(|(z, y)| y.ok_or_else(|| Error::NotSurjective(f.codomain().label(z).to_string())))
        .collect::<Result<Vec<_>>>()?;
    PointMap::new(f.codomain(), f.domain(), image)
}

/// Lifts `ν` on `X × Z` to some `μ` on `X × Y` whose image under
/// `(Id_X, f1)` is `ν`, for a surjection `f1: Y → Z`.
///
/// `μ` is the image of `ν` under `(Id_X, g)` with `g` the canonical right
/// inverse of `f1`. The round trip is checked before returning.
pub fn lift_cps(nu: &Cps, f1: &PointMap) -> Result<Cps> {
    let report = nu.validate();
    if !report.is_valid() {
        return Err(Error::InvalidCps(report));
    }
    let base = cylinder_base(nu.family())?;
    let (x, z) = nu.space().factors().ok_or(Error::NotCylinder)?;
    if z != f1.codomain() {
        return Err(Error::SpaceMismatch(
            "surjection codomain differs from the second factor".into(),
        ));
    }
    let x: Space = x.clone();
    let g = right_inverse(f1)?;
    let up = PointMap::lift_second(&x, &g);
    let family = cylinder_family(&base, f1.domain());
    let mu = pushforward_cps(nu, &up, &family)?;
    let down = PointMap::lift_second(&x, f1);
    let back = pushforward_cps(&mu, &down, nu.family())?;
    assert_eq!(&back, nu, "lifted CPS does not push forward to its source");
    Ok(mu)
}
