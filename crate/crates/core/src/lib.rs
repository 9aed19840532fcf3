//! Reformist envy-free matchings in house allocation.
//!
//! The crate covers the instance model, the improvement engine, several exact
//! solvers for shortest reformist sequences, generators for gadget instances
//! and the file formats used by the `reformist` binary.

pub mod engine;
pub mod factory;
pub mod io;
pub mod model;
pub mod solvers;

pub use engine::{compute_reformist, is_reachable, preprocess, verify_sequence, NominationPolicy};
pub use model::{ExchangeStep, Instance, InstanceBuilder, Matching, ReformSequence};
pub use solvers::{solve, solve_auto, Algorithm, SolveOptions, SolveResult};
