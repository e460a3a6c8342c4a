use thiserror::Error;

use crate::model::{AgentId, TaskId};

/// Errors produced by construction and evaluation across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be a probability in [0,1], got {value}")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("prior ({p_h}, {p_l}) must be strictly inside (0,1) and sum to 1")]
    InvalidPrior { p_h: f64, p_l: f64 },

    #[error("max proficiency {0} must lie in [0.5, 1]")]
    InvalidProficiency(f64),

    #[error("effort cost {0} must be nonnegative")]
    NegativeCost(f64),

    #[error("scaling factor beta {0} must be nonnegative")]
    NegativeBeta(f64),

    #[error("basis weights ({0}, {1}, {2}, {3}) must be nonnegative and sum to 1")]
    InvalidBasisWeights(f64, f64, f64, f64),

    #[error("weights must sum to 1, got {0}")]
    WeightsNotNormalized(f64),

    #[error("grid step {0} must lie in (0, 1]")]
    InvalidGridStep(f64),

    #[error("assignment parameters m={m}, n={n}, d_tasks={d_tasks}, t_raters={t_raters}: {reason}")]
    InvalidBlockParams {
        m: usize,
        n: usize,
        d_tasks: usize,
        t_raters: usize,
        reason: String,
    },

    #[error("permutation of length {got} is not a bijection over {expected} agents")]
    InvalidPermutation { expected: usize, got: usize },

    #[error(
        "full scheme needs every agent pair sharing a task to share exactly one; \
         m={m} < d_tasks^2={d_sq}"
    )]
    FullSchemeTooFewTasks { m: usize, d_sq: usize },

    #[error("no feasible reference rater for agent {agent} on task {task}")]
    NoFeasibleReference { agent: AgentId, task: TaskId },

    #[error(
        "statistic sets for agent {agent} and reference {reference} on task {task} overlap on {shared:?}"
    )]
    StatisticOverlap {
        agent: AgentId,
        reference: AgentId,
        task: TaskId,
        shared: Vec<TaskId>,
    },

    #[error("statistic-set size d={d} must satisfy 1 <= d <= D-1 (D={d_tasks})")]
    InvalidStatSetSize { d: usize, d_tasks: usize },

    #[error("statistic set for agent {agent} on task {task} is invalid: {reason}")]
    InvalidStatSet {
        agent: AgentId,
        task: TaskId,
        reason: String,
    },

    #[error("missing report for agent {agent} on task {task}")]
    MissingReport { agent: AgentId, task: TaskId },

    #[error("report set does not match the assignment support: {0}")]
    ReportDomainMismatch(String),

    #[error("strategy profile does not cover the assignment support: {0}")]
    ProfileMismatch(String),

    #[error("scenario is inconsistent: {0}")]
    InvalidScenario(String),

    #[error("enumeration needs about 2^{required_bits} branches, over the 2^{budget_bits} budget")]
    EnumerationBudget { required_bits: u32, budget_bits: u32 },

    #[error("enumeration requires a fixed assignment; per-trial resampling is not enumerable")]
    EnumerationNeedsFixedAssignment,

    #[error("no closed form applies to this profile: {0}")]
    NoClosedForm(String),

    #[error("deviation is malformed: {0}")]
    InvalidDeviation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
