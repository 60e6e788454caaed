//! Finite machinery for coding bit strings through partition systems into
//! members of a positive-measure tree, together with the exact failure test
//! that controls when such coding can break down.
//!
//! Everything here works on finite objects: level schedules, prefix-closed
//! trees with exact dyadic measure, partition systems of finite height and
//! the string naming of those systems. All correctness-bearing comparisons
//! are done in exact rational or integer arithmetic.

pub mod bits;
pub mod cli;
pub mod codec;
pub mod combinatorics;
pub mod error;
pub mod mltest;
pub mod partition;
pub mod ratio;
pub mod schedule;
pub mod tree;

pub use bits::Bits;
pub use codec::{decode, encode, kg_decode, kg_encode, CodecTrace, OracleUse, TraceStep};
pub use error::{Error, Result};
pub use mltest::{
    bound_check_at_node, failure_prob_at_node, find_n0, hypergeom_zero_prob, level_failure_bound, mc_failure_estimate,
    FailureEvent, FailureQuery,
};
pub use partition::{count_systems, name_to_system, sample_uniform, PartitionSystem, Validation};
pub use schedule::{convergence_report, make_schedule, DensityKind, LevelKind, LevelSchedule};
pub use tree::{generate_complement_tree, FiniteTree, TwoExtension};

/// Largest top level a materialized tree or partition-system level may have.
pub const MAX_MATERIALIZED_LEVEL: usize = 26;
