//! Conditional probability systems on finite spaces.
//!
//! A CPS assigns to every conditioning event `B` a probability measure
//! `μ(·|B)` concentrated on `B`, subject to the chain rule
//! `μ(A|B)·μ(B|C) = μ(A|C)` whenever `A ⊆ B ⊆ C` with `B, C` conditioning
//! events. By finite additivity it suffices to check the chain rule for
//! singletons `A = {x}`, `x ∈ B`, which is what [`validate_cps`] does.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::space::{ConditioningFamily, Event, FiniteSpace, PointMap, Space};

/// A mass assignment over every point of a finite space.
///
/// Probability measures are the assignments with nonnegative masses summing
/// to one; anything read from outside the library is checked by
/// [`validate_cps`] before it is trusted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Measure(Vec<Rational>);

impl Measure {
    pub fn new(masses: Vec<Rational>) -> Self {
        Measure(masses)
    }

    pub fn zero(len: usize) -> Self {
        Measure(vec![Rational::zero(); len])
    }

    pub fn dirac(space: &FiniteSpace, point: usize) -> Self {
        let mut m = Measure::zero(space.len());
        m.0[point] = Rational::one();
        m
    }

    pub fn uniform(space: &FiniteSpace) -> Self {
        let n = space.len() as i64;
        Measure(vec![Rational::new(1, n); space.len()])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mass(&self, point: usize) -> &Rational {
        &self.0[point]
    }

    pub fn masses(&self) -> &[Rational] {
        &self.0
    }

    pub fn mass_of(&self, event: &Event) -> Rational {
        event.points().iter().map(|p| &self.0[*p]).sum()
    }

    pub fn total(&self) -> Rational {
        self.0.iter().sum()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.is_zero())
            .map(|(i, _)| i)
    }

    pub fn pushforward(&self, f: &PointMap) -> Measure {
        let mut out = Measure::zero(f.codomain().len());
        for (x, m) in self.0.iter().enumerate() {
            if !m.is_zero() {
                out.0[f.apply(x)] += m;
            }
        }
        out
    }

    /// `p(· ∩ B) / p(B)`; `None` when `p(B) = 0`.
    pub fn condition_on(&self, event: &Event) -> Option<Measure> {
        let denom = self.mass_of(event);
        if denom.is_zero() {
            return None;
        }
        let masses = (0..self.len())
            .map(|x| {
                if event.contains(x) {
                    &self.0[x] / &denom
                } else {
                    Rational::zero()
                }
            })
            .collect();
        Some(Measure(masses))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    NegativeMass {
        event: String,
        point: String,
        #[serde(serialize_with = "ser_rational")]
        mass: Rational,
    },
    NotNormalized {
        event: String,
        #[serde(serialize_with = "ser_rational")]
        total: Rational,
    },
    MassOutsideEvent {
        event: String,
        point: String,
        #[serde(serialize_with = "ser_rational")]
        mass: Rational,
    },
    /// `μ({point}|inner)·μ(inner|outer) ≠ μ({point}|outer)`.
    ChainRule {
        point: String,
        inner: String,
        outer: String,
        #[serde(serialize_with = "ser_rational")]
        lhs: Rational,
        #[serde(serialize_with = "ser_rational")]
        rhs: Rational,
    },
    /// The marginal of level `level + 1` disagrees with level `level`.
    Incoherent {
        level: usize,
        event: String,
        point: String,
        #[serde(serialize_with = "ser_rational")]
        expected: Rational,
        #[serde(serialize_with = "ser_rational")]
        found: Rational,
    },
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Where the offending CPS lives, e.g. `player a, type t1`; empty for a
    /// standalone CPS.
    pub location: String,
    #[serde(flatten)]
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.location.is_empty() {
            write!(f, "{}: ", self.location)?;
        }
        match &self.kind {
            ViolationKind::NegativeMass { event, point, mass } => {
                write!(f, "negative mass {mass} at {point} given {event}")
            }
            ViolationKind::NotNormalized { event, total } => {
                write!(f, "conditional given {event} has total mass {total}")
            }
            ViolationKind::MassOutsideEvent { event, point, mass } => {
                write!(f, "conditional given {event} puts mass {mass} on {point} outside the event")
            }
            ViolationKind::ChainRule {
                point,
                inner,
                outer,
                lhs,
                rhs,
            } => write!(
                f,
                "chain rule fails at ({point}, {inner}, {outer}): {lhs} != {rhs}"
            ),
            ViolationKind::Incoherent {
                level,
                event,
                point,
                expected,
                found,
            } => write!(
                f,
                "level {} does not marginalize to level {level} given {event} at {point}: expected {expected}, found {found}",
                level + 1
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn valid() -> Self {
        Self::default()
    }

    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }

    pub(crate) fn locate(mut self, location: &str) -> Self {
        for v in &mut self.violations {
            v.location = if v.location.is_empty() {
                location.to_string()
            } else {
                format!("{location}, {}", v.location)
            };
        }
        self
    }
}

/// Sparse form shared by finite CPSs and hierarchy levels: per event, the
/// nonzero atoms sorted by point.
pub(crate) struct SparseView<'a, P> {
    pub atoms: Vec<&'a [(P, Rational)]>,
}

fn lookup<'a, P: Ord>(atoms: &'a [(P, Rational)], p: &P) -> Option<&'a Rational> {
    atoms
        .binary_search_by(|(q, _)| q.cmp(p))
        .ok()
        .map(|i| &atoms[i].1)
}

/// Singleton chain-rule check over `(inner, outer)` inclusion pairs. Reports
/// the first failing point per pair as `(point, inner, outer, lhs, rhs)`.
pub(crate) fn chain_rule_failures<'a, P: Ord>(
    view: &SparseView<'a, P>,
    inclusions: &[(usize, usize)],
    in_event: impl Fn(usize, &P) -> bool,
) -> Vec<(&'a P, usize, usize, Rational, Rational)> {
    let mut out = Vec::new();
    for &(b, c) in inclusions {
        if b == c {
            continue;
        }
        let given_b = view.atoms[b];
        let given_c = view.atoms[c];
        let b_given_c: Rational = given_c
            .iter()
            .filter(|(p, _)| in_event(b, p))
            .map(|(_, m)| m)
            .sum();
        // Points of B carrying mass under either conditional, in canonical order.
        let mut candidates: Vec<&'a P> = given_b
            .iter()
            .chain(given_c.iter())
            .map(|(p, _)| p)
            .filter(|p| in_event(b, p))
            .collect();
        candidates.sort();
        candidates.dedup();
        for p in candidates {
            let lhs = lookup(given_b, p).cloned().unwrap_or_default() * &b_given_c;
            let rhs = lookup(given_c, p).cloned().unwrap_or_default();
            if lhs != rhs {
                out.push((p, b, c, lhs, rhs));
                break;
            }
        }
    }
    out
}

/// An array of measures indexed by the events of a conditioning family.
///
/// Values produced by library operations, and values built with
/// [`Cps::new`], satisfy both CPS conditions. [`Cps::candidate`] only checks
/// shape; such values must pass [`Cps::validate`] before analyses trust them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cps {
    family: ConditioningFamily,
    conditionals: Vec<Measure>,
}

impl Cps {
    pub fn candidate(family: ConditioningFamily, conditionals: Vec<Measure>) -> Result<Self> {
        if conditionals.len() != family.len() {
            return Err(Error::KeyMismatch(format!(
                "{} conditionals for {} events",
                conditionals.len(),
                family.len()
            )));
        }
        let n = family.space().len();
        if let Some(m) = conditionals.iter().find(|m| m.len() != n) {
            return Err(Error::WrongSpace {
                expected: n,
                found: m.len(),
            });
        }
        Ok(Cps {
            family,
            conditionals,
        })
    }

    pub fn new(family: ConditioningFamily, conditionals: Vec<Measure>) -> Result<Self> {
        let cps = Self::candidate(family, conditionals)?;
        let report = cps.validate();
        if report.is_valid() {
            Ok(cps)
        } else {
            Err(Error::InvalidCps(report))
        }
    }

    /// `μ(·|B) = δ_x` for every event; `x` must belong to every event.
    pub fn dirac(family: ConditioningFamily, point: usize) -> Result<Self> {
        let m = Measure::dirac(family.space(), point);
        let n = family.len();
        Self::new(family, vec![m; n])
    }

    pub fn space(&self) -> &Space {
        self.family.space()
    }

    pub fn family(&self) -> &ConditioningFamily {
        &self.family
    }

    pub fn conditionals(&self) -> &[Measure] {
        &self.conditionals
    }

    pub fn conditional(&self, event: usize) -> &Measure {
        &self.conditionals[event]
    }

    /// `μ(·|B)` for an event given by value.
    pub fn given(&self, event: &Event) -> Option<&Measure> {
        self.family.position(event).map(|i| &self.conditionals[i])
    }

    pub fn validate(&self) -> ValidationReport {
        let space = self.space();
        let events = self.family.events();
        let mut report = ValidationReport::valid();
        let mut push = |kind| {
            report.violations.push(Violation {
                location: String::new(),
                kind,
            })
        };
        for (e, m) in events.iter().zip(&self.conditionals) {
            for (x, mass) in m.masses().iter().enumerate() {
                if mass.is_negative() {
                    push(ViolationKind::NegativeMass {
                        event: e.display(space),
                        point: space.label(x).to_string(),
                        mass: mass.clone(),
                    });
                } else if !mass.is_zero() && !e.contains(x) {
                    push(ViolationKind::MassOutsideEvent {
                        event: e.display(space),
                        point: space.label(x).to_string(),
                        mass: mass.clone(),
                    });
                }
            }
            let total = m.total();
            if !total.is_one() {
                push(ViolationKind::NotNormalized {
                    event: e.display(space),
                    total,
                });
            }
        }
        let sparse: Vec<Vec<(usize, Rational)>> = self
            .conditionals
            .iter()
            .map(|m| m.support().map(|x| (x, m.mass(x).clone())).collect())
            .collect();
        let view = SparseView {
            atoms: sparse.iter().map(Vec::as_slice).collect(),
        };
        let failures =
            chain_rule_failures(&view, &self.family.inclusions(), |b, x| events[b].contains(*x));
        for (x, b, c, lhs, rhs) in failures {
            push(ViolationKind::ChainRule {
                point: space.label(*x).to_string(),
                inner: events[b].display(space),
                outer: events[c].display(space),
                lhs,
                rhs,
            });
        }
        report
    }
}

/// Checks a candidate CPS given as `(event, measure)` pairs.
///
/// The candidate must be keyed by exactly the events of `family`; the order
/// of the pairs does not matter.
pub fn validate_cps(
    space: &Space,
    family: &ConditioningFamily,
    candidate: &[(Event, Measure)],
) -> Result<ValidationReport> {
    if family.space() != space {
        return Err(Error::SpaceMismatch(
            "family is defined over a different space".into(),
        ));
    }
    let mut conditionals: Vec<Option<Measure>> = vec![None; family.len()];
    for (event, m) in candidate {
        let i = family.position(event).ok_or_else(|| {
            Error::KeyMismatch(format!("{} is not in the family", event.display(space)))
        })?;
        if conditionals[i].replace(m.clone()).is_some() {
            return Err(Error::KeyMismatch(format!(
                "{} given twice",
                event.display(space)
            )));
        }
    }
    let conditionals = conditionals
        .into_iter()
        .zip(family.events())
        .map(|(m, e)| {
            m.ok_or_else(|| {
                Error::KeyMismatch(format!("no conditional for {}", e.display(space)))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Cps::candidate(family.clone(), conditionals)?.validate())
}

/// `{ B × Y : B ∈ family }` over `X × Y`.
pub fn cylinder_family(family_on_x: &ConditioningFamily, y: &Space) -> ConditioningFamily {
    let xy = FiniteSpace::product(family_on_x.space(), y);
    let events = family_on_x
        .events()
        .iter()
        .map(|b| cylinder(&xy, b))
        .collect();
    ConditioningFamily::new(&xy, events).expect("cylinders of a valid family are valid")
}

pub(crate) fn cylinder(product: &FiniteSpace, base: &Event) -> Event {
    let ny = product.factors().expect("product space").1.len();
    Event::new(
        base.points()
            .iter()
            .flat_map(|x| (0..ny).map(move |y| x * ny + y)),
    )
}

/// Recovers the base family `ℬ_X` when `family` is `{B × Y}` over `X × Y`.
pub fn cylinder_base(family: &ConditioningFamily) -> Result<ConditioningFamily> {
    let product = family.space();
    let (x, _) = product.factors().ok_or(Error::NotCylinder)?;
    let mut bases = Vec::with_capacity(family.len());
    for e in family.events() {
        let base = Event::new(e.points().iter().map(|p| product.unpair(*p).0));
        if cylinder(product, &base) != *e {
            return Err(Error::NotCylinder);
        }
        bases.push(base);
    }
    ConditioningFamily::new(x, bases)
}

/// Image conditional law of `mu` under `f`: `ν(E|C) = μ(f⁻¹(E) | f⁻¹(C))`.
///
/// Requires `{ f⁻¹(C) : C ∈ family_y }` to equal `mu`'s family as a set.
pub fn pushforward_cps(mu: &Cps, f: &PointMap, family_y: &ConditioningFamily) -> Result<Cps> {
    if f.domain() != mu.space() || family_y.space() != f.codomain() {
        return Err(Error::SpaceMismatch(
            "map does not connect the CPS space to the target family".into(),
        ));
    }
    let mut hit = vec![false; mu.family().len()];
    let mut conditionals = Vec::with_capacity(family_y.len());
    for c in family_y.events() {
        let pre = f.preimage(c);
        let i = mu.family().position(&pre).ok_or_else(|| {
            Error::PreimageMismatch(format!(
                "preimage of {} is {}, which is not a conditioning event of the source",
                c.display(family_y.space()),
                pre.display(mu.space())
            ))
        })?;
        hit[i] = true;
        conditionals.push(mu.conditional(i).pushforward(f));
    }
    if let Some(i) = hit.iter().position(|h| !h) {
        return Err(Error::PreimageMismatch(format!(
            "source event {} is not the preimage of any target event",
            mu.family().events()[i].display(mu.space())
        )));
    }
    Ok(Cps {
        family: family_y.clone(),
        conditionals,
    })
}

/// Marginal on `X` of a CPS on `X × Y` with a cylinder family.
pub fn marginal_cps(mu: &Cps) -> Result<Cps> {
    let base = cylinder_base(mu.family())?;
    let proj = PointMap::project_first(mu.space())?;
    pushforward_cps(mu, &proj, &base)
}

/// The CPS `μ(A|B) = p(A ∩ B) / p(B)` of a full-support measure.
pub fn conditional_of_measure(p: &Measure, family: &ConditioningFamily) -> Result<Cps> {
    let space = family.space();
    if p.len() != space.len() {
        return Err(Error::WrongSpace {
            expected: space.len(),
            found: p.len(),
        });
    }
    if let Some(x) = space.points().find(|x| !p.mass(*x).is_positive()) {
        return Err(Error::ZeroMass(space.label(x).to_string()));
    }
    let conditionals = family
        .events()
        .iter()
        .map(|b| p.condition_on(b).expect("full support"))
        .collect();
    Ok(Cps {
        family: family.clone(),
        conditionals,
    })
}
