//! Solvers for the mapping problem.
//!
//! - [`superset_filter`] shrinks the target tractography to the streamlines
//!   near the medoid of the target tract.
//! - [`nn_init`] / [`random_init`] build a starting mapping.
//! - [`anneal`] runs simulated annealing with a stochastic-greedy transition.
//! - [`brute_force_mapping`] and [`brute_force_matching`] are exhaustive
//!   oracles for tiny instances.

mod anneal;
mod brute;
mod init;
mod superset;

pub use anneal::{anneal, greedy_remap, AnnealSchedule, AnnealTrace, TraceRecord};
pub use brute::{
    brute_force_mapping, brute_force_mapping_with_budget, brute_force_matching,
    DEFAULT_MAPPING_BUDGET, MAX_MATCHING_SIZE,
};
pub use init::{nn_init, random_init};
pub use superset::{medoid, superset_filter, SuperSetFilter, Superset};
