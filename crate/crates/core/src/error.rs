use thiserror::Error;

use crate::cps::ValidationReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("malformed rational `{0}` (expected `num/den`)")]
    Syntax(String),
    #[error("rational `{0}` has a zero denominator")]
    ZeroDenominator(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a finite space needs at least one point")]
    EmptySpace,
    #[error("duplicate point label `{0}`")]
    DuplicateLabel(String),
    #[error("invalid point label `{0}`: labels must be nonempty and must not contain whitespace, parentheses, braces or commas")]
    InvalidLabel(String),
    #[error("unknown point label `{0}`")]
    UnknownLabel(String),
    #[error("point index {0} is out of range")]
    PointOutOfRange(usize),
    #[error("a conditioning family needs at least one event")]
    EmptyFamily,
    #[error("conditioning events must be nonempty")]
    EmptyEvent,
    #[error("duplicate conditioning event {0}")]
    DuplicateEvent(String),
    #[error("conditionals are not keyed by the family: {0}")]
    KeyMismatch(String),
    #[error("measure over the wrong space: expected {expected} points, found {found}")]
    WrongSpace { expected: usize, found: usize },
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("not a valid conditional probability system ({} violation(s))", .0.violations.len())]
    InvalidCps(ValidationReport),
    #[error("preimage family does not match the source family: {0}")]
    PreimageMismatch(String),
    #[error("family is not a cylinder family over a product space")]
    NotCylinder,
    #[error("measure has no mass at point `{0}`")]
    ZeroMass(String),
    #[error("map is not surjective: `{0}` has no preimage")]
    NotSurjective(String),
    #[error("map is not total: {0}")]
    PartialMap(String),
    #[error("order {requested} is out of range for a prefix of order {order}")]
    OrderOutOfRange { requested: usize, order: usize },
    #[error("malformed hierarchy prefix: {0}")]
    MalformedPrefix(String),
    #[error("hierarchy prefix is not coherent")]
    IncoherentPrefix(ValidationReport),
    #[error("no representative for block {0}")]
    MissingRepresentative(usize),
    #[error("invalid type structure ({} violation(s))", .0.violations.len())]
    InvalidStructure(ValidationReport),
    #[error("structures are defined over different frames: {0}")]
    FrameMismatch(String),
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Rational(#[from] ParseRationalError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
