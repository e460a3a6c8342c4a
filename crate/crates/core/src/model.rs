//! Probabilistic model primitives: the binary ground-truth prior, rater
//! parameters, reporting matrices and their basis decomposition, and the
//! signal/report distributions they induce.
//!
//! Ground truth, observations, and reports are binary; `true` encodes the
//! high outcome (H = 1) and `false` the low outcome (L = 0) throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when validating probability identities at construction.
pub const CONSTRUCTION_EPS: f64 = 1e-12;

/// Index of an agent (rater).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub usize);

/// Index of a task (object being rated).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskId(pub usize);

impl std::fmt::Display for AgentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::fmt::Display for TaskId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Probability that two independent indicators with success probabilities
/// `a` and `b` coincide: `a*b + (1-a)*(1-b)`.
#[inline]
pub(crate) fn agree2(a: f64, b: f64) -> f64 {
    a * b + (1.0 - a) * (1.0 - b)
}

fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && (-CONSTRUCTION_EPS..=1.0 + CONSTRUCTION_EPS).contains(&value) {
        Ok(value.clamp(0.0, 1.0))
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}

/// Common binary ground-truth distribution over {H, L}.
///
/// Degenerate priors are rejected: some uncertainty in the underlying truth
/// is a standing assumption of the mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prior {
    p_h: f64,
    p_l: f64,
}

impl Prior {
    pub fn new(p_h: f64, p_l: f64) -> Result<Self> {
        if !p_h.is_finite()
            || !p_l.is_finite()
            || (p_h + p_l - 1.0).abs() > CONSTRUCTION_EPS
            || p_h <= 0.0
            || p_l <= 0.0
            || p_h >= 1.0
            || p_l >= 1.0
        {
            return Err(Error::InvalidPrior { p_h, p_l });
        }
        Ok(Prior { p_h, p_l })
    }

    /// Convenience constructor from the probability of H alone.
    pub fn from_p_h(p_h: f64) -> Result<Self> {
        Prior::new(p_h, 1.0 - p_h)
    }

    pub fn p_h(&self) -> f64 {
        self.p_h
    }

    pub fn p_l(&self) -> f64 {
        self.p_l
    }
}

/// Per-agent primitives: the accuracy reached under full effort and the cost
/// of exerting that effort. Zero effort costs nothing and observes correctly
/// with probability 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgentParams {
    pub agent_id: AgentId,
    max_proficiency: f64,
    effort_cost: f64,
}

impl AgentParams {
    pub fn new(agent_id: AgentId, max_proficiency: f64, effort_cost: f64) -> Result<Self> {
        if !max_proficiency.is_finite() || !(0.5..=1.0).contains(&max_proficiency) {
            return Err(Error::InvalidProficiency(max_proficiency));
        }
        if !effort_cost.is_finite() || effort_cost < 0.0 {
            return Err(Error::NegativeCost(effort_cost));
        }
        Ok(AgentParams {
            agent_id,
            max_proficiency,
            effort_cost,
        })
    }

    pub fn max_proficiency(&self) -> f64 {
        self.max_proficiency
    }

    pub fn effort_cost(&self) -> f64 {
        self.effort_cost
    }
}

/// Probability that a rater evaluating with accuracy `p` observes H:
/// `p*P[H] + (1-p)*P[L]`.
///
/// The complementary probability of observing L is one minus the result.
pub fn signal_prob(p: f64, prior: &Prior) -> Result<f64> {
    let p = check_probability("proficiency", p)?;
    Ok(p * prior.p_h() + (1.0 - p) * prior.p_l())
}

/// Binary effort level. Full effort reaches the agent's maximum proficiency;
/// zero effort observes no better than a fair coin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Effort {
    Zero,
    Full,
}

/// Stochastic map from an observation to a report, described by
/// `x = Pr[report H | observed H]` and `y = Pr[report L | observed L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportingMatrix {
    x: f64,
    y: f64,
}

impl ReportingMatrix {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let x = check_probability("x", x)?;
        let y = check_probability("y", y)?;
        Ok(ReportingMatrix { x, y })
    }

    /// Identity map: report exactly what was observed.
    pub fn truthful() -> Self {
        ReportingMatrix { x: 1.0, y: 1.0 }
    }

    /// Report the opposite of the observation.
    pub fn inverting() -> Self {
        ReportingMatrix { x: 0.0, y: 0.0 }
    }

    /// Report H regardless of the observation.
    pub fn always_h() -> Self {
        ReportingMatrix { x: 1.0, y: 0.0 }
    }

    /// Report L regardless of the observation.
    pub fn always_l() -> Self {
        ReportingMatrix { x: 0.0, y: 1.0 }
    }

    /// Ignore the observation and report H with probability `r`.
    pub fn coin(r: f64) -> Result<Self> {
        let r = check_probability("r", r)?;
        Ok(ReportingMatrix { x: r, y: 1.0 - r })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// Probability of reporting H given the observation.
    #[inline]
    pub fn report_h_given_obs(&self, observed_h: bool) -> f64 {
        if observed_h {
            self.x
        } else {
            1.0 - self.y
        }
    }
}

/// Convex weights over the four basis reporting maps: truthful, inverting,
/// always-H, always-L. Canonical form keeps at most one of the two constant
/// maps active; other valid combinations are normalized on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasisWeights {
    a_truth: f64,
    a_invert: f64,
    a_always_h: f64,
    a_always_l: f64,
}

impl BasisWeights {
    pub fn new(a_truth: f64, a_invert: f64, a_always_h: f64, a_always_l: f64) -> Result<Self> {
        let ws = [a_truth, a_invert, a_always_h, a_always_l];
        if ws.iter().any(|w| !w.is_finite() || *w < -CONSTRUCTION_EPS) {
            return Err(Error::InvalidBasisWeights(
                a_truth, a_invert, a_always_h, a_always_l,
            ));
        }
        let sum: f64 = ws.iter().sum();
        if (sum - 1.0).abs() > CONSTRUCTION_EPS {
            return Err(Error::InvalidBasisWeights(
                a_truth, a_invert, a_always_h, a_always_l,
            ));
        }
        // Normalize to the canonical case split by a roundtrip through the
        // matrix the weights describe.
        let matrix = ReportingMatrix::new(
            (a_truth + a_always_h).clamp(0.0, 1.0),
            (a_truth + a_always_l).clamp(0.0, 1.0),
        )?;
        Ok(decompose_reporting_matrix(&matrix))
    }

    pub fn a_truth(&self) -> f64 {
        self.a_truth
    }

    pub fn a_invert(&self) -> f64 {
        self.a_invert
    }

    pub fn a_always_h(&self) -> f64 {
        self.a_always_h
    }

    pub fn a_always_l(&self) -> f64 {
        self.a_always_l
    }

    /// Weight difference between the truthful and inverting components.
    /// This single number carries the matrix's whole correlation with the
    /// observation: the constant maps contribute nothing.
    pub fn informative_coefficient(&self) -> f64 {
        self.a_truth - self.a_invert
    }
}

/// Splits a reporting matrix into canonical convex weights over the four
/// basis maps. Total on valid inputs.
pub fn decompose_reporting_matrix(m: &ReportingMatrix) -> BasisWeights {
    let (x, y) = (m.x(), m.y());
    if x >= y {
        BasisWeights {
            a_truth: y,
            a_invert: 1.0 - x,
            a_always_h: x - y,
            a_always_l: 0.0,
        }
    } else {
        BasisWeights {
            a_truth: x,
            a_invert: 1.0 - y,
            a_always_h: 0.0,
            a_always_l: y - x,
        }
    }
}

/// Rebuilds the reporting matrix described by convex basis weights.
pub fn compose_reporting_matrix(w: &BasisWeights) -> ReportingMatrix {
    ReportingMatrix {
        x: (w.a_truth + w.a_always_h).clamp(0.0, 1.0),
        y: (w.a_truth + w.a_always_l).clamp(0.0, 1.0),
    }
}

/// An agent's choice for one task: how hard to look and how to report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaskStrategy {
    pub effort: Effort,
    pub reporting: ReportingMatrix,
}

impl TaskStrategy {
    /// Full effort, truthful reporting.
    pub fn full_truthful() -> Self {
        TaskStrategy {
            effort: Effort::Full,
            reporting: ReportingMatrix::truthful(),
        }
    }

    /// Full effort, inverted reporting.
    pub fn full_inverting() -> Self {
        TaskStrategy {
            effort: Effort::Full,
            reporting: ReportingMatrix::inverting(),
        }
    }

    /// No effort; report H with probability `r` independent of everything.
    pub fn coin(r: f64) -> Result<Self> {
        Ok(TaskStrategy {
            effort: Effort::Zero,
            reporting: ReportingMatrix::coin(r)?,
        })
    }

    /// No effort, always report H.
    pub fn blind_h() -> Self {
        TaskStrategy {
            effort: Effort::Zero,
            reporting: ReportingMatrix::always_h(),
        }
    }

    /// No effort, always report L.
    pub fn blind_l() -> Self {
        TaskStrategy {
            effort: Effort::Zero,
            reporting: ReportingMatrix::always_l(),
        }
    }

    /// Probability the observation matches the truth under this strategy's
    /// effort level.
    #[inline]
    pub fn effective_proficiency(&self, params: &AgentParams) -> f64 {
        match self.effort {
            Effort::Full => params.max_proficiency(),
            Effort::Zero => 0.5,
        }
    }
}

/// Probability that the strategy reports H conditional on the task's ground
/// truth, marginalizing over the observation.
pub fn report_distribution(strategy: &TaskStrategy, params: &AgentParams, truth_h: bool) -> f64 {
    let q = strategy.effective_proficiency(params);
    let p_obs_h = if truth_h { q } else { 1.0 - q };
    strategy.reporting.x() * p_obs_h + (1.0 - strategy.reporting.y()) * (1.0 - p_obs_h)
}
