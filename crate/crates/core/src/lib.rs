//! Exact computations on finite conditional type structures.
//!
//! All probabilities are exact [`Rational`]s. The crate validates
//! conditional probability systems ([`cps`]), unfolds types into
//! hierarchies of conditional beliefs ([`hierarchy`]), compares and
//! classifies whole structures by partition refinement ([`analysis`]),
//! constructs coherent extensions and lifts ([`extension`]), and reads and
//! writes the JSON document formats used by the command-line tool ([`io`]).
//!
//! ```
//! use condbelief::{io, analysis};
//!
//! let ts = io::parse_structure(condbelief::fixtures::REDUNDANT_PAIR).unwrap();
//! assert!(analysis::validate_structure(&ts).is_valid());
//! assert!(matches!(
//!     analysis::is_non_redundant(&ts).unwrap(),
//!     analysis::Redundancy::Redundant { .. }
//! ));
//! ```

pub mod analysis;
pub mod cps;
pub mod error;
pub mod extension;
pub mod fixtures;
pub mod hierarchy;
pub mod io;
pub mod rational;
pub mod space;
pub mod structure;

pub use analysis::{
    check_hierarchy_morphism, check_type_morphism, completeness_report, hierarchies_included,
    is_non_redundant, refine, validate_structure, CompletenessReport, Depth, Inclusion,
    MorphismCheck, PlayerCompleteness, Redundancy, Refinement, TypeMap,
};
pub use cps::{
    conditional_of_measure, cylinder_family, marginal_cps, pushforward_cps, validate_cps, Cps,
    Measure, ValidationReport, Violation, ViolationKind,
};
pub use error::{Error, Result};
pub use extension::{canonical_base_cps, coherent_extend, lift_cps, right_inverse};
pub use hierarchy::{
    check_prefix_coherence, pushforward_under_partition, truncate, unfold, HierarchyPrefix, Level,
    LevelCps, Partition,
};
pub use rational::Rational;
pub use space::{ConditioningFamily, Event, FiniteSpace, PointMap, Space};
pub use structure::{Frame, Player, TypeStructure};
