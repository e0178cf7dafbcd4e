//! Two-player type structures over a shared frame `(S, ℬ_1, ℬ_2)`.

use std::fmt;

use crate::cps::{cylinder_family, Cps, ValidationReport};
use crate::error::{Error, Result};
use crate::space::{ConditioningFamily, FiniteSpace, Space};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Player {
    First,
    Second,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::First, Player::Second];

    pub fn index(self) -> usize {
        match self {
            Player::First => 0,
            Player::Second => 1,
        }
    }

    pub fn other(self) -> Player {
        match self {
            Player::First => Player::Second,
            Player::Second => Player::First,
        }
    }
}

/// The space of primitive uncertainty and each player's conditioning family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    states: Space,
    families: [ConditioningFamily; 2],
}

impl Frame {
    pub fn new(states: Space, first: ConditioningFamily, second: ConditioningFamily) -> Result<Self> {
        if first.space() != &states || second.space() != &states {
            return Err(Error::SpaceMismatch(
                "conditioning families must be defined over the state space".into(),
            ));
        }
        Ok(Frame {
            states,
            families: [first, second],
        })
    }

    pub fn states(&self) -> &Space {
        &self.states
    }

    pub fn family(&self, player: Player) -> &ConditioningFamily {
        &self.families[player.index()]
    }

    /// `S` is a single point and both families are `{S}`: exactly one
    /// hierarchy exists for each player.
    pub fn has_single_hierarchy(&self) -> bool {
        self.states.len() == 1
    }

    pub(crate) fn ensure_same(&self, other: &Frame) -> Result<()> {
        if self.states != other.states {
            return Err(Error::FrameMismatch("state spaces differ".into()));
        }
        for p in Player::BOTH {
            if self.family(p) != other.family(p) {
                return Err(Error::FrameMismatch(format!(
                    "conditioning families of player {} differ",
                    p.index() + 1
                )));
            }
        }
        Ok(())
    }
}

/// A finite `(S, (ℬ_i))`-based type structure.
///
/// Belief maps are stored as [`Cps`] values over `S × T_j` with the cylinder
/// family generated by `ℬ_i`. Construction only checks shapes; use
/// [`TypeStructure::validate`] to check the CPS conditions.
#[derive(Clone, PartialEq, Eq)]
pub struct TypeStructure {
    frame: Frame,
    names: [String; 2],
    types: [Space; 2],
    cylinders: [ConditioningFamily; 2],
    beliefs: [Vec<Cps>; 2],
}

impl fmt::Debug for TypeStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TypeStructure")
            .field("states", self.frame.states())
            .field("names", &self.names)
            .field("types", &self.types)
            .finish_non_exhaustive()
    }
}

impl TypeStructure {
    pub fn new(
        frame: Frame,
        names: [String; 2],
        types: [Space; 2],
        beliefs: [Vec<Cps>; 2],
    ) -> Result<Self> {
        if names[0] == names[1] {
            return Err(Error::DuplicateLabel(names[0].clone()));
        }
        let cylinders = [
            cylinder_family(frame.family(Player::First), &types[1]),
            cylinder_family(frame.family(Player::Second), &types[0]),
        ];
        for p in Player::BOTH {
            let i = p.index();
            if beliefs[i].len() != types[i].len() {
                return Err(Error::PartialMap(format!(
                    "player {} has {} types but {} beliefs",
                    names[i],
                    types[i].len(),
                    beliefs[i].len()
                )));
            }
            for (t, b) in beliefs[i].iter().enumerate() {
                if b.family() != &cylinders[i] {
                    return Err(Error::SpaceMismatch(format!(
                        "belief of type {} of player {} is not over the cylinder family",
                        types[i].label(t),
                        names[i]
                    )));
                }
            }
        }
        Ok(TypeStructure {
            frame,
            names,
            types,
            cylinders,
            beliefs,
        })
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn states(&self) -> &Space {
        self.frame.states()
    }

    pub fn name(&self, player: Player) -> &str {
        &self.names[player.index()]
    }

    pub fn names(&self) -> &[String; 2] {
        &self.names
    }

    pub fn player_named(&self, name: &str) -> Option<Player> {
        Player::BOTH.into_iter().find(|p| self.name(*p) == name)
    }

    pub fn types(&self, player: Player) -> &Space {
        &self.types[player.index()]
    }

    pub fn type_count(&self, player: Player) -> usize {
        self.types[player.index()].len()
    }

    /// `S × T_j` for player `i`'s beliefs.
    pub fn belief_space(&self, player: Player) -> &Space {
        self.cylinders[player.index()].space()
    }

    pub fn cylinder_family(&self, player: Player) -> &ConditioningFamily {
        &self.cylinders[player.index()]
    }

    pub fn belief(&self, player: Player, t: usize) -> &Cps {
        &self.beliefs[player.index()][t]
    }

    pub fn beliefs(&self, player: Player) -> &[Cps] {
        &self.beliefs[player.index()]
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::valid();
        for p in Player::BOTH {
            for (t, b) in self.beliefs(p).iter().enumerate() {
                let loc = format!("player {}, type {}", self.name(p), self.types(p).label(t));
                report.extend(b.validate().locate(&loc));
            }
        }
        report
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidStructure(report))
        }
    }

    /// Product of the states with the co-player's types, for building beliefs.
    pub fn product_for(&self, player: Player) -> Space {
        FiniteSpace::product(self.states(), self.types(player.other()))
    }
}
