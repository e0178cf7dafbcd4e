//! Small built-in structures, available by name from the command line.

/// One state, player `a` with two types that both put mass one on `b`'s only
/// type, and `b` certain of the first of them.
pub const REDUNDANT_PAIR: &str = include_str!("../fixtures/redundant_pair.json");

/// One state and a single type per player.
pub const ONE_TYPE: &str = include_str!("../fixtures/one_type.json");

/// Looks up a built-in fixture by name.
pub fn named(name: &str) -> Option<&'static str> {
    match name {
        "friedenberg" | "redundant-pair" => Some(REDUNDANT_PAIR),
        "one-type" => Some(ONE_TYPE),
        _ => None,
    }
}
