//! Random generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use condbelief::{
    cylinder_family, unfold, ConditioningFamily, Cps, Event, FiniteSpace, Frame, HierarchyPrefix,
    Measure, Player, PointMap, Rational, Space, TypeStructure,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn space(prefix: &str, n: usize) -> Space {
    FiniteSpace::new((0..n).map(|i| format!("{prefix}{i}"))).unwrap()
}

/// Between one and `max_events` distinct nonempty events.
pub fn random_family(rng: &mut TestRng, space: &Space, max_events: usize) -> ConditioningFamily {
    let n = space.len();
    let want = rng.gen_range(1..=max_events);
    let mut events: Vec<Event> = Vec::new();
    if rng.gen_bool(0.6) {
        events.push(Event::full(space));
    }
    let mut tries = 0;
    while events.len() < want && tries < 50 {
        tries += 1;
        let pts: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if pts.is_empty() {
            continue;
        }
        let e = Event::new(pts);
        if !events.contains(&e) {
            events.push(e);
        }
    }
    ConditioningFamily::new(space, events).unwrap()
}

/// A valid CPS from a random lexicographic sequence of measures with
/// disjoint supports: each conditional is the first measure in the sequence
/// charging the event, conditioned on it. Weights lie in `1..=max_weight`.
pub fn random_cps(rng: &mut TestRng, family: &ConditioningFamily, max_weight: i64) -> Cps {
    let n = family.space().len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut layer = vec![0usize; n];
    let mut current = 0;
    for (k, &x) in order.iter().enumerate() {
        if k > 0 && rng.gen_bool(0.4) {
            current += 1;
        }
        layer[x] = current;
    }
    let weight: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=max_weight)).collect();
    let conditionals = family
        .events()
        .iter()
        .map(|e| {
            let top = e.points().iter().map(|&x| layer[x]).min().unwrap();
            let total: i64 = e.points().iter().filter(|&&x| layer[x] == top).map(|&x| weight[x]).sum();
            Measure::new(
                (0..n)
                    .map(|x| {
                        if e.contains(x) && layer[x] == top {
                            Rational::new(weight[x], total)
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect(),
            )
        })
        .collect();
    Cps::candidate(family.clone(), conditionals).unwrap()
}

/// Perturbs one conditional of `cps`; the result is usually, not always,
/// invalid.
pub fn mutate(rng: &mut TestRng, cps: &Cps) -> Cps {
    let mut conditionals: Vec<Vec<Rational>> =
        cps.conditionals().iter().map(|m| m.masses().to_vec()).collect();
    let e = rng.gen_range(0..conditionals.len());
    let event = &cps.family().events()[e];
    let n = cps.space().len();
    let d = rng.gen_range(2..=12);
    let delta = Rational::new(1, d);
    let m = &mut conditionals[e];
    match rng.gen_range(0..4) {
        // Shift mass between two points of the event: keeps each conditional
        // a probability on its event, so only the chain rule can notice.
        0 if event.len() > 1 => {
            let k = rng.gen_range(0..event.len());
            let a = event.points()[k];
            let b = event.points()[(k + 1 + rng.gen_range(0..event.len() - 1)) % event.len()];
            m[a] = &m[a] + &delta;
            m[b] = &m[b] - &delta;
        }
        0 | 1 => {
            let a = rng.gen_range(0..n);
            m[a] = &m[a] + &delta;
        }
        2 if event.len() < n => {
            let a = event.points()[rng.gen_range(0..event.len())];
            let outside: Vec<usize> = (0..n).filter(|x| !event.contains(*x)).collect();
            let b = outside[rng.gen_range(0..outside.len())];
            m[b] = &m[b] + &delta;
            m[a] = &m[a] - &delta;
        }
        _ => {
            let a = event.points()[rng.gen_range(0..event.len())];
            m[a] = &m[a] - &Rational::one();
        }
    }
    Cps::candidate(
        cps.family().clone(),
        conditionals.into_iter().map(Measure::new).collect(),
    )
    .unwrap()
}

/// Exhaustive validity check: every conditional is a probability measure on
/// its event and `μ(A|B)μ(B|C) = μ(A|C)` for every subset `A ⊆ B` and every
/// pair of events `B ⊆ C`.
pub fn oracle_is_cps(cps: &Cps) -> bool {
    let n = cps.space().len();
    let events = cps.family().events();
    let mass = |e: usize, set: u64| -> Rational {
        (0..n)
            .filter(|x| set >> x & 1 == 1)
            .map(|x| cps.conditional(e).mass(x).clone())
            .sum()
    };
    let mask = |e: &Event| e.points().iter().fold(0u64, |acc, x| acc | 1 << x);
    let everything = (1u64 << n) - 1;
    for (b, eb) in events.iter().enumerate() {
        let m = cps.conditional(b);
        if m.masses().iter().any(Rational::is_negative)
            || !mass(b, everything).is_one()
            || !mass(b, mask(eb)).is_one()
        {
            return false;
        }
    }
    for (b, eb) in events.iter().enumerate() {
        let bm = mask(eb);
        for (c, ec) in events.iter().enumerate() {
            let cm = mask(ec);
            if bm & !cm != 0 {
                continue;
            }
            let mut a = bm;
            loop {
                if mass(b, a) * mass(c, bm) != mass(c, a) {
                    return false;
                }
                if a == 0 {
                    break;
                }
                a = (a - 1) & bm;
            }
        }
    }
    true
}

pub struct StructureShape {
    pub max_states: usize,
    pub max_types: usize,
    pub max_events: usize,
}

pub const SMALL: StructureShape = StructureShape {
    max_states: 4,
    max_types: 4,
    max_events: 3,
};

pub fn random_frame(rng: &mut TestRng, shape: &StructureShape) -> Frame {
    let states = space("s", rng.gen_range(1..=shape.max_states));
    let a = random_family(rng, &states, shape.max_events);
    let b = random_family(rng, &states, shape.max_events);
    Frame::new(states, a, b).unwrap()
}

/// A valid structure. Some types copy an earlier type's belief so that
/// redundancy and nontrivial partitions occur regularly.
pub fn random_structure(rng: &mut TestRng, shape: &StructureShape) -> TypeStructure {
    let frame = random_frame(rng, shape);
    random_structure_on(rng, frame, shape.max_types)
}

pub fn random_structure_on(rng: &mut TestRng, frame: Frame, max_types: usize) -> TypeStructure {
    let types = [
        space("a", rng.gen_range(1..=max_types)),
        space("b", rng.gen_range(1..=max_types)),
    ];
    let beliefs = Player::BOTH.map(|p| {
        let family = cylinder_family(frame.family(p), &types[p.other().index()]);
        let mut out: Vec<Cps> = Vec::new();
        for _ in 0..types[p.index()].len() {
            if !out.is_empty() && rng.gen_bool(0.3) {
                let k = rng.gen_range(0..out.len());
                out.push(out[k].clone());
            } else {
                out.push(random_cps(rng, &family, 2));
            }
        }
        out
    });
    TypeStructure::new(frame, ["a".into(), "b".into()], types, beliefs).unwrap()
}

/// A structure `star` with a type morphism onto `base`: every base type gets
/// one or two copies, and each belief splits the mass of a co-player type
/// across its copies by a fixed kernel.
pub fn blow_up(rng: &mut TestRng, base: &TypeStructure) -> (TypeStructure, [Vec<usize>; 2]) {
    let phi: [Vec<usize>; 2] = Player::BOTH.map(|p| {
        let mut images: Vec<usize> = (0..base.type_count(p))
            .flat_map(|t| std::iter::repeat_n(t, rng.gen_range(1..=2)))
            .collect();
        images.shuffle(rng);
        images
    });
    let types = Player::BOTH.map(|p| {
        FiniteSpace::new((0..phi[p.index()].len()).map(|k| format!("{}{k}*", base.name(p))))
            .unwrap()
    });
    let beliefs = Player::BOTH.map(|p| {
        let j = p.other().index();
        let family = cylinder_family(base.frame().family(p), &types[j]);
        let product = family.space().clone();
        (0..types[p.index()].len())
            .map(|t| {
                let source = base.belief(p, phi[p.index()][t]);
                let source_space = source.space();
                let weights: Vec<i64> = (0..product.len()).map(|_| rng.gen_range(1..=2)).collect();
                let conditionals = source
                    .conditionals()
                    .iter()
                    .map(|m| {
                        Measure::new(
                            (0..product.len())
                                .map(|x| {
                                    let (s, c) = product.unpair(x);
                                    let target = phi[j][c];
                                    let total: i64 = (0..types[j].len())
                                        .filter(|&d| phi[j][d] == target)
                                        .map(|d| weights[product.pair(s, d)])
                                        .sum();
                                    m.mass(source_space.pair(s, target))
                                        * Rational::new(weights[x], total)
                                })
                                .collect(),
                        )
                    })
                    .collect();
                Cps::new(family.clone(), conditionals).unwrap()
            })
            .collect()
    });
    let star = TypeStructure::new(base.frame().clone(), base.names().clone(), types, beliefs).unwrap();
    (star, phi)
}

/// Coherent prefixes of orders `1..=max_order` drawn from unfolding random
/// structures.
pub fn random_prefix(rng: &mut TestRng, max_order: usize) -> (Frame, HierarchyPrefix) {
    let ts = random_structure(rng, &SMALL);
    let n = rng.gen_range(1..=max_order);
    let player = if rng.gen_bool(0.5) { Player::First } else { Player::Second };
    let all = unfold(&ts, n).unwrap();
    let list = &all[player.index()];
    let p = list[rng.gen_range(0..list.len())].clone();
    (ts.frame().clone(), p)
}

/// A surjection from a fresh space of size `m ≥ |codomain|` onto `codomain`.
pub fn random_surjection(rng: &mut TestRng, codomain: &Space, m: usize) -> PointMap {
    let mut image: Vec<usize> = (0..codomain.len()).collect();
    while image.len() < m {
        image.push(rng.gen_range(0..codomain.len()));
    }
    image.shuffle(rng);
    PointMap::new(&space("y", m), codomain, image).unwrap()
}

/// Random strictly positive measure with integer weights `1..=max_weight`.
pub fn random_full_support(rng: &mut TestRng, space: &Space, max_weight: i64) -> Measure {
    let w: Vec<i64> = (0..space.len()).map(|_| rng.gen_range(1..=max_weight)).collect();
    let total: i64 = w.iter().sum();
    Measure::new(w.into_iter().map(|x| Rational::new(x, total)).collect())
}
