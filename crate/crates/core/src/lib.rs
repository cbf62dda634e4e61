//! Multiobjective gradient descent with a memory of past directions.
//!
//! The crate provides the steepest-descent subproblem solver, memory-gradient
//! and conjugate-gradient direction rules, Armijo and fixed stepsizes, a
//! driver loop, a registry of test problems, and benchmark metrics.

pub mod bench;
pub mod cli;
pub mod directions;
pub mod error;
pub mod linesearch;
pub mod mo_core;
pub mod problems;
pub mod solver;
pub mod subproblem;

pub use directions::{BaselineKind, GammaRule, MemoryWeights, MmgParams};
pub use error::{Error, Result};
pub use linesearch::{InitMode, LineSearchConfig};
pub use mo_core::{Jacobian, Problem};
pub use problems::{lookup, registry, ScaledProblem, TestProblem};
pub use solver::{solve, Method, SolverConfig, SolverTrace, TerminalStatus};
pub use subproblem::{solve_dual, SubproblemSolution};
