//! Simulation and verification lab for a multi-task peer-agreement reward
//! mechanism with effort-dependent rater accuracy.
//!
//! The mechanism pays each rater for agreeing with a reference rater on a
//! shared task, minus a statistic term formed from both raters' reports on
//! disjoint other tasks, so that agreement achieved without looking at the
//! tasks nets zero. This crate provides:
//!
//! - [`model`]: priors, proficiencies, reporting matrices and their convex
//!   basis decomposition.
//! - [`mechanism`]: assignments, statistic sets, and the exact reward rule.
//! - [`analytic`]: closed-form expected-reward calculators.
//! - [`simulation`]: seeded Monte Carlo sampling plus an exhaustive
//!   enumeration oracle for small instances.
//! - [`equilibrium`]: deviation gains, Nash verification over the basis
//!   strategy set, symmetric grid scans, and low-effort escape checks.
//! - [`assignment`]: the block construction of feasible assignments,
//!   reference-rater selection, and validators.
//! - [`streams`]: counter-based random streams for reproducible,
//!   order-independent sampling.

pub mod analytic;
pub mod assignment;
pub mod equilibrium;
pub mod error;
pub mod mechanism;
pub mod model;
pub mod simulation;
pub mod streams;

pub use error::{Error, Result};
pub use model::{AgentId, TaskId};
