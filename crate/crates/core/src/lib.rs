//! Core of the nested cooperative solver for the uniform tool switching
//! problem (ToSP).
//!
//! Everything here is pure computation over `alloc` collections: instance
//! representation and generation, KTNS evaluation, permutation operators,
//! the basic search agents, the recursive cooperative engine and the
//! rank-based statistics used to compare algorithms. File IO, the
//! experiment harness and the command line live in the `deepmemetic` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cooperation;
pub mod evaluator;
pub mod instance;
pub mod metaheuristics;
pub mod operators;
pub mod rng;
pub mod stats;

pub use evaluator::{EvalBudget, JobSequence, Ktns, LoadingPlan};
pub use instance::{Instance, InstanceFamily};
pub use cooperation::{parse_architecture, print_architecture, ArchitectureSpec, Topology};
pub use metaheuristics::{AgentKind, Scored, SearchAgent};
