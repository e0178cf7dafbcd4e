//! Finite point sets, events, conditioning families and point maps.
//!
//! The declaration order of a [`FiniteSpace`] is its canonical total order.
//! Product spaces are ordered lexicographically, so the point `(x, y)` of
//! `X × Y` sits at index `x * |Y| + y`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type Space = Arc<FiniteSpace>;

#[derive(Clone)]
pub struct FiniteSpace {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    factors: Option<(Space, Space)>,
}

impl PartialEq for FiniteSpace {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}

impl Eq for FiniteSpace {}

impl fmt::Debug for FiniteSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.labels).finish()
    }
}

pub(crate) fn check_label(label: &str) -> Result<()> {
    let bad = label.is_empty()
        || label
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | '{' | '}' | ','));
    if bad {
        Err(Error::InvalidLabel(label.to_string()))
    } else {
        Ok(())
    }
}

impl FiniteSpace {
    pub fn new<I, S>(labels: I) -> Result<Space>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        for l in &labels {
            check_label(l)?;
        }
        Self::build(labels, None)
    }

    fn build(labels: Vec<String>, factors: Option<(Space, Space)>) -> Result<Space> {
        if labels.is_empty() {
            return Err(Error::EmptySpace);
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Arc::new(FiniteSpace {
            labels,
            index,
            factors,
        }))
    }

    /// The product `X × Y` in lexicographic order, with labels `(x,y)`.
    pub fn product(x: &Space, y: &Space) -> Space {
        let labels = x
            .labels
            .iter()
            .flat_map(|a| y.labels.iter().map(move |b| format!("({a},{b})")))
            .collect();
        Self::build(labels, Some((x.clone(), y.clone()))).expect("product of valid spaces")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, point: usize) -> &str {
        &self.labels[point]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn factors(&self) -> Option<(&Space, &Space)> {
        self.factors.as_ref().map(|(a, b)| (a, b))
    }

    /// Index of `(x, y)` in a product space.
    pub fn pair(&self, x: usize, y: usize) -> usize {
        let (_, ys) = self.factors.as_ref().expect("not a product space");
        x * ys.len() + y
    }

    /// Inverse of [`FiniteSpace::pair`].
    pub fn unpair(&self, point: usize) -> (usize, usize) {
        let (_, ys) = self.factors.as_ref().expect("not a product space");
        (point / ys.len(), point % ys.len())
    }

    pub fn points(&self) -> std::ops::Range<usize> {
        0..self.labels.len()
    }
}

/// A subset of a finite space, stored as a sorted list of point indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event(Vec<usize>);

impl Event {
    pub fn new(points: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = points.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Event(v)
    }

    pub fn full(space: &FiniteSpace) -> Self {
        Event(space.points().collect())
    }

    pub fn from_labels<S: AsRef<str>>(space: &FiniteSpace, labels: &[S]) -> Result<Self> {
        labels
            .iter()
            .map(|l| space.index_of(l.as_ref()))
            .collect::<Result<Vec<_>>>()
            .map(Event::new)
    }

    pub fn points(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, point: usize) -> bool {
        self.0.binary_search(&point).is_ok()
    }

    pub fn is_subset(&self, other: &Event) -> bool {
        self.0.iter().all(|p| other.contains(*p))
    }

    /// Canonical text form `{a,b}` using the space's labels.
    pub fn display(&self, space: &FiniteSpace) -> String {
        let labels: Vec<&str> = self.0.iter().map(|p| space.label(*p)).collect();
        format!("{{{}}}", labels.join(","))
    }
}

/// A nonempty, duplicate-free list of nonempty events over one space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditioningFamily {
    space: Space,
    events: Vec<Event>,
}

impl ConditioningFamily {
    pub fn new(space: &Space, events: Vec<Event>) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::EmptyFamily);
        }
        for (i, e) in events.iter().enumerate() {
            if e.is_empty() {
                return Err(Error::EmptyEvent);
            }
            if let Some(&p) = e.points().iter().find(|p| **p >= space.len()) {
                return Err(Error::PointOutOfRange(p));
            }
            if events[..i].contains(e) {
                return Err(Error::DuplicateEvent(e.display(space)));
            }
        }
        Ok(ConditioningFamily {
            space: space.clone(),
            events,
        })
    }

    /// The family `{X}`.
    pub fn trivial(space: &Space) -> Self {
        ConditioningFamily {
            space: space.clone(),
            events: vec![Event::full(space)],
        }
    }

    pub fn from_labels<S: AsRef<str>>(space: &Space, events: &[Vec<S>]) -> Result<Self> {
        let events = events
            .iter()
            .map(|e| Event::from_labels(space, e))
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, events)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn position(&self, event: &Event) -> Option<usize> {
        self.events.iter().position(|e| e == event)
    }

    /// Pairs `(b, c)` of event indices with `events[b] ⊆ events[c]`.
    pub fn inclusions(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (b, eb) in self.events.iter().enumerate() {
            for (c, ec) in self.events.iter().enumerate() {
                if eb.is_subset(ec) {
                    out.push((b, c));
                }
            }
        }
        out
    }

    /// Same events regardless of listing order.
    pub fn same_events(&self, other: &ConditioningFamily) -> bool {
        self.space == other.space
            && self.events.len() == other.events.len()
            && self.events.iter().all(|e| other.events.contains(e))
    }
}

/// A total function between two finite spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointMap {
    domain: Space,
    codomain: Space,
    image: Vec<usize>,
}

impl PointMap {
    pub fn new(domain: &Space, codomain: &Space, image: Vec<usize>) -> Result<Self> {
        if image.len() != domain.len() {
            return Err(Error::PartialMap(format!(
                "{} images for {} domain points",
                image.len(),
                domain.len()
            )));
        }
        if let Some(&p) = image.iter().find(|p| **p >= codomain.len()) {
            return Err(Error::PointOutOfRange(p));
        }
        Ok(PointMap {
            domain: domain.clone(),
            codomain: codomain.clone(),
            image,
        })
    }

    pub fn from_fn(domain: &Space, codomain: &Space, f: impl Fn(usize) -> usize) -> Result<Self> {
        Self::new(domain, codomain, domain.points().map(f).collect())
    }

    pub fn identity(space: &Space) -> Self {
        PointMap {
            domain: space.clone(),
            codomain: space.clone(),
            image: space.points().collect(),
        }
    }

    pub fn domain(&self) -> &Space {
        &self.domain
    }

    pub fn codomain(&self) -> &Space {
        &self.codomain
    }

    pub fn apply(&self, point: usize) -> usize {
        self.image[point]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn preimage(&self, event: &Event) -> Event {
        Event::new(self.domain.points().filter(|x| event.contains(self.image[*x])))
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &PointMap) -> Result<PointMap> {
        if self.codomain != other.domain {
            return Err(Error::SpaceMismatch(
                "composed maps do not share a middle space".into(),
            ));
        }
        Ok(PointMap {
            domain: self.domain.clone(),
            codomain: other.codomain.clone(),
            image: self.image.iter().map(|y| other.image[*y]).collect(),
        })
    }

    /// `(x, y) ↦ (x, f(y))` on `X × dom(f) → X × cod(f)`.
    pub fn lift_second(x: &Space, f: &PointMap) -> PointMap {
        let dom = FiniteSpace::product(x, &f.domain);
        let cod = FiniteSpace::product(x, &f.codomain);
        let image = dom
            .points()
            .map(|p| {
                let (a, b) = dom.unpair(p);
                cod.pair(a, f.image[b])
            })
            .collect();
        PointMap {
            domain: dom,
            codomain: cod,
            image,
        }
    }

    /// Coordinate projection `X × Y → X`.
    pub fn project_first(product: &Space) -> Result<PointMap> {
        let (x, _) = product.factors().ok_or(Error::NotCylinder)?;
        let x = x.clone();
        let image = product.points().map(|p| product.unpair(p).0).collect();
        Ok(PointMap {
            domain: product.clone(),
            codomain: x,
            image,
        })
    }
}
