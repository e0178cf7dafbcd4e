//! Deterministic inputs for the benchmarks.

use condbelief::{
    conditional_of_measure, cylinder_family, ConditioningFamily, Cps, Event, FiniteSpace, Frame,
    Measure, Player, Rational, TypeStructure,
};

/// A CPS on `n` points over the nested events `{x0}, {x0,x1}, …, X`,
/// obtained by conditioning a measure with weights `1, 2, …, n`.
pub fn nested_cps(n: usize) -> Cps {
    let space = FiniteSpace::new((0..n).map(|i| format!("x{i}"))).unwrap();
    let events = (1..=n).map(|k| Event::new(0..k)).collect();
    let family = ConditioningFamily::new(&space, events).unwrap();
    let total = (n * (n + 1) / 2) as i64;
    let p = Measure::new((1..=n as i64).map(|w| Rational::new(w, total)).collect());
    conditional_of_measure(&p, &family).unwrap()
}

/// `n` types per player over two states where only the last type of `b`
/// behaves differently. Each `a_k` is sure of `b_k` and each `b_k` of
/// `a_{k+1}`, so the difference travels one type per round and refinement
/// needs about `2n` rounds.
pub fn chain_structure(n: usize) -> TypeStructure {
    let states = FiniteSpace::new(["s0", "s1"]).unwrap();
    let family = ConditioningFamily::trivial(&states);
    let frame = Frame::new(states, family.clone(), family).unwrap();
    let types = [
        FiniteSpace::new((0..n).map(|k| format!("a{k}"))).unwrap(),
        FiniteSpace::new((0..n).map(|k| format!("b{k}"))).unwrap(),
    ];
    let beliefs = Player::BOTH.map(|p| {
        let cyl = cylinder_family(frame.family(p), &types[p.other().index()]);
        let space = cyl.space().clone();
        (0..n)
            .map(|k| {
                let point = match p {
                    Player::First => space.pair(0, k),
                    Player::Second if k + 1 < n => space.pair(0, k + 1),
                    Player::Second => space.pair(1, k),
                };
                Cps::dirac(cyl.clone(), point).unwrap()
            })
            .collect()
    });
    TypeStructure::new(frame, ["a".into(), "b".into()], types, beliefs).unwrap()
}
