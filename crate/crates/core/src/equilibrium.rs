//! Deviation gains, Nash verification over the basis strategy set,
//! symmetric-profile grid scans, and low-effort escape checks.
//!
//! Gains can be estimated three ways: `Analytic` (closed forms), `Mc`
//! (common-random-number Monte Carlo), and `Enumerate` (the exhaustive
//! oracle). With a fixed assignment the analytic path evaluates the exact
//! agreement-minus-statistic bilinear form pair by pair. With per-trial
//! assignment resampling it evaluates the expectation over reference
//! randomness instead, where each agent's reference is uniform over the
//! other agents and only the informative weight of each reporting matrix
//! survives.

use serde::Serialize;

use crate::analytic::{mixed_profile_task_value, pair_surplus, trusted_escape_gain, RefMix};
use crate::error::{Error, Result};
use crate::model::{
    agree2, decompose_reporting_matrix, signal_prob, AgentId, Effort, Prior, TaskId, TaskStrategy,
};
use crate::simulation::{
    enumerate_expected_rewards, mc_trial_totals, pairwise_sum, plan_report_h_given_truth,
    plan_report_h_marginal, AgentPlan, EnumerationBudget, RefPolicy, Scenario, StrategyProfile,
};

/// Which part of the agent's plan a candidate replaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeviationScope {
    /// Replace the strategy on every task.
    AllTasks,
    /// Replace the strategy on one task slot (position in the task list).
    Slot(usize),
}

impl std::fmt::Display for DeviationScope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DeviationScope::AllTasks => f.write_str("all_tasks"),
            DeviationScope::Slot(k) => write!(f, "slot_{k}"),
        }
    }
}

/// The strategy a deviation switches to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CandidatePlan {
    Strategy(TaskStrategy),
    Mixture { delta: f64, coin: f64 },
}

impl CandidatePlan {
    pub fn label(&self) -> String {
        match self {
            CandidatePlan::Strategy(s) => {
                let m = s.reporting;
                match (s.effort, m.x(), m.y()) {
                    (Effort::Full, x, y) if x == 1.0 && y == 1.0 => "full_truthful".into(),
                    (Effort::Full, x, y) if x == 0.0 && y == 0.0 => "full_inverting".into(),
                    (Effort::Zero, x, y) if (x + y - 1.0).abs() < 1e-12 => format!("coin({x})"),
                    (e, x, y) => format!(
                        "{}(x={x}, y={y})",
                        if e == Effort::Full { "full" } else { "zero" }
                    ),
                }
            }
            CandidatePlan::Mixture { delta, coin } => format!("mixture(delta={delta}, r={coin})"),
        }
    }
}

/// One unilateral deviation to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub agent: AgentId,
    pub scope: DeviationScope,
    pub candidate: CandidatePlan,
}

/// How a deviation's value is computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    Analytic,
    Mc { trials: u64 },
    Enumerate { budget: EnumerationBudget },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EstimatorKind {
    Analytic,
    Mc,
    Enumerate,
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EstimatorKind::Analytic => "analytic",
            EstimatorKind::Mc => "mc",
            EstimatorKind::Enumerate => "enumerate",
        })
    }
}

/// Valuation of one deviation: baseline vs candidate expected reward
/// (beta-scaled) for the deviating agent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationReport {
    pub agent: AgentId,
    pub scope: DeviationScope,
    pub candidate: String,
    pub baseline_value: f64,
    pub candidate_value: f64,
    pub gain: f64,
    pub estimator: EstimatorKind,
    /// Standard error of the gain (common-random-number differences), for
    /// the Monte Carlo estimator.
    pub stderr: Option<f64>,
    /// gain / stderr, for the Monte Carlo estimator.
    pub significance: Option<f64>,
}

/// How a deviation compares to the baseline at a given tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeviationOutcome {
    Improves,
    Indifferent,
    Worsens,
}

impl DeviationReport {
    /// Threshold below which a gain does not count as an improvement:
    /// the absolute tolerance, widened to `sigmas * stderr` for Monte Carlo.
    pub fn improvement_threshold(&self, tolerance: &NashTolerance) -> f64 {
        match self.stderr {
            Some(se) => tolerance.absolute.max(tolerance.mc_sigmas * se),
            None => tolerance.absolute,
        }
    }

    pub fn classify(&self, tolerance: &NashTolerance) -> DeviationOutcome {
        let threshold = self.improvement_threshold(tolerance);
        if self.gain > threshold {
            DeviationOutcome::Improves
        } else if self.gain >= -threshold {
            DeviationOutcome::Indifferent
        } else {
            DeviationOutcome::Worsens
        }
    }
}

/// Applies a deviation to the scenario's profile.
pub fn profile_with_deviation(scenario: &Scenario, deviation: &Deviation) -> Result<StrategyProfile> {
    let n = scenario.n_agents();
    if deviation.agent.0 >= n {
        return Err(Error::InvalidDeviation(format!(
            "agent {} out of range",
            deviation.agent
        )));
    }
    let d_tasks = scenario.assignment.tasks_of(deviation.agent).len();
    let base = scenario.profile.plan(deviation.agent).clone();
    let plan = match (deviation.scope, deviation.candidate) {
        (DeviationScope::AllTasks, CandidatePlan::Strategy(s)) => AgentPlan::Uniform(s),
        (DeviationScope::AllTasks, CandidatePlan::Mixture { delta, coin }) => {
            if !(0.0..=1.0).contains(&delta) || !(0.0..=1.0).contains(&coin) {
                return Err(Error::InvalidDeviation("mixture parameters out of range".into()));
            }
            AgentPlan::Mixture { delta, coin }
        }
        (DeviationScope::Slot(k), CandidatePlan::Strategy(s)) => {
            if k >= d_tasks {
                return Err(Error::InvalidDeviation(format!(
                    "slot {k} out of range for {d_tasks} tasks"
                )));
            }
            let mut slots = match base {
                AgentPlan::Uniform(u) => vec![u; d_tasks],
                AgentPlan::PerSlot(v) => v,
                AgentPlan::Mixture { .. } => {
                    return Err(Error::InvalidDeviation(
                        "cannot override one slot of a mixture plan".into(),
                    ))
                }
            };
            slots[k] = s;
            AgentPlan::PerSlot(slots)
        }
        (DeviationScope::Slot(_), CandidatePlan::Mixture { .. }) => {
            return Err(Error::InvalidDeviation(
                "mixtures deviate whole-profile, not per slot".into(),
            ))
        }
    };
    Ok(scenario.profile.with_plan(deviation.agent, plan))
}


// ---------------------------------------------------------------------------
// Exact expected rewards under a fixed assignment
// ---------------------------------------------------------------------------

/// Exact expected reward of one scored pair under a fixed assignment:
/// the truth-conditioned agreement expectation minus the product of the two
/// statistic means (independent because the statistic tasks are disjoint),
/// blended with the trusted-reference branch where configured.
fn exact_pair_value(scenario: &Scenario, profile: &StrategyProfile, agent: usize, slot: usize) -> f64 {
    let assignment = &scenario.assignment;
    let prior = &scenario.prior;
    let a = AgentId(agent);
    let task = assignment.tasks_of(a)[slot];

    let own_h = |truth: bool| {
        plan_report_h_given_truth(profile.plan(a), slot, &scenario.agents[agent], truth)
    };
    let marginal = |who: AgentId, s: usize| {
        plan_report_h_marginal(profile.plan(who), s, &scenario.agents[who.0], prior)
    };
    let stat_mean = |who: AgentId, set: &[TaskId]| -> f64 {
        set.iter()
            .map(|&t| marginal(who, assignment.core().slot_of(who, t).unwrap()))
            .sum::<f64>()
            / set.len() as f64
    };

    let reference = assignment.ref_rater(a, task).unwrap();
    let ref_slot = assignment.core().slot_of(reference, task).unwrap();
    let ref_h = |truth: bool| {
        plan_report_h_given_truth(
            profile.plan(reference),
            ref_slot,
            &scenario.agents[reference.0],
            truth,
        )
    };

    let (own_set, ref_set) = assignment.stat_sets(a, task).unwrap();
    let nu_own = stat_mean(a, own_set);
    let nu_ref = stat_mean(reference, ref_set);

    let assigned_a = prior.p_h() * agree2(own_h(true), ref_h(true))
        + prior.p_l() * agree2(own_h(false), ref_h(false));
    let assigned = assigned_a - agree2(nu_own, nu_ref);

    match scenario.trusted {
        None => assigned,
        Some(t) => {
            let t_signal = signal_prob(t.proficiency, prior).unwrap();
            let trusted_a = prior.p_h() * agree2(own_h(true), t.proficiency)
                + prior.p_l() * agree2(own_h(false), 1.0 - t.proficiency);
            let trusted = trusted_a - agree2(nu_own, t_signal);
            t.share * trusted + (1.0 - t.share) * assigned
        }
    }
}

/// Exact expected per-pair rewards (beta-unscaled) under a fixed assignment.
pub fn exact_entry_rewards(scenario: &Scenario) -> Result<Vec<(AgentId, TaskId, f64)>> {
    if scenario.ref_policy != RefPolicy::Fixed {
        return Err(Error::NoClosedForm(
            "per-pair values need a fixed assignment".into(),
        ));
    }
    let mut out = Vec::new();
    for i in 0..scenario.n_agents() {
        let agent = AgentId(i);
        for (slot, &task) in scenario.assignment.tasks_of(agent).iter().enumerate() {
            out.push((
                agent,
                task,
                exact_pair_value(scenario, &scenario.profile, i, slot),
            ));
        }
    }
    Ok(out)
}

fn exact_agent_value(scenario: &Scenario, profile: &StrategyProfile, agent: usize) -> f64 {
    (0..scenario.assignment.tasks_of(AgentId(agent)).len())
        .map(|slot| exact_pair_value(scenario, profile, agent, slot))
        .sum()
}

/// Exact expected total rewards (beta-unscaled) for every agent under a
/// fixed assignment, for arbitrary profiles.
pub fn exact_profile_rewards(scenario: &Scenario) -> Result<Vec<f64>> {
    if scenario.ref_policy != RefPolicy::Fixed {
        return Err(Error::NoClosedForm(
            "exact profile values need a fixed assignment".into(),
        ));
    }
    Ok((0..scenario.n_agents())
        .map(|i| exact_agent_value(scenario, &scenario.profile, i))
        .collect())
}

// ---------------------------------------------------------------------------
// Closed forms under per-trial assignment resampling
// ---------------------------------------------------------------------------

/// Informative weight and effective accuracy of a plan on one slot:
/// the reward any opponent pairing produces is proportional to the weight,
/// through `pair_surplus(accuracy, ...)`.
fn plan_coefficient(plan: &AgentPlan, slot: usize, max_proficiency: f64) -> (f64, f64) {
    match plan {
        AgentPlan::Uniform(s) => strategy_coefficient(s, max_proficiency),
        AgentPlan::PerSlot(v) => strategy_coefficient(&v[slot], max_proficiency),
        AgentPlan::Mixture { delta, .. } => (*delta, max_proficiency),
    }
}

fn strategy_coefficient(s: &TaskStrategy, max_proficiency: f64) -> (f64, f64) {
    let weights = decompose_reporting_matrix(&s.reporting);
    let q = match s.effort {
        Effort::Full => max_proficiency,
        Effort::Zero => 0.5,
    };
    (weights.informative_coefficient(), q)
}

fn plan_is_slot_uniform(plan: &AgentPlan) -> bool {
    !matches!(plan, AgentPlan::PerSlot(_))
}

/// Expected total reward of `agent` under per-trial assignment resampling:
/// each slot's reference is uniform over the other agents, so the slot is
/// worth `c_own * mean_others(c_k * pair_surplus(q_own, q_k))`, blended with
/// the trusted branch. Opponents must be slot-uniform (otherwise which slot
/// of theirs pairs with the agent depends on the drawn assignment, and no
/// simple closed form applies).
fn resampled_agent_value(
    scenario: &Scenario,
    profile: &StrategyProfile,
    agent: usize,
) -> Result<f64> {
    let n = scenario.n_agents();
    if n < 2 {
        return Err(Error::NoClosedForm("need at least two agents".into()));
    }
    for k in 0..n {
        if k != agent && !plan_is_slot_uniform(profile.plan(AgentId(k))) {
            return Err(Error::NoClosedForm(format!(
                "opponent {k} varies by slot; no closed form under resampling"
            )));
        }
    }
    let prior = &scenario.prior;
    let trusted = scenario.trusted;
    let others: Vec<(f64, f64)> = (0..n)
        .filter(|&k| k != agent)
        .map(|k| {
            plan_coefficient(
                profile.plan(AgentId(k)),
                0,
                scenario.agents[k].max_proficiency(),
            )
        })
        .collect();

    let d_tasks = scenario.assignment.tasks_of(AgentId(agent)).len();
    let mut total = 0.0;
    for slot in 0..d_tasks {
        let (c_own, q_own) = plan_coefficient(
            profile.plan(AgentId(agent)),
            slot,
            scenario.agents[agent].max_proficiency(),
        );
        if c_own == 0.0 {
            continue;
        }
        let mut opponents = 0.0;
        for &(c_ref, q_ref) in &others {
            if c_ref != 0.0 {
                opponents += c_ref * pair_surplus(q_own, q_ref, prior)?;
            }
        }
        opponents /= others.len() as f64;
        let slot_value = match trusted {
            None => opponents,
            Some(t) => {
                t.share * pair_surplus(q_own, t.proficiency, prior)?
                    + (1.0 - t.share) * opponents
            }
        };
        total += c_own * slot_value;
    }
    Ok(total)
}

/// Closed-form expected total reward (beta-unscaled) of one agent under the
/// scenario's reference policy.
pub fn analytic_expected_reward(
    scenario: &Scenario,
    profile: &StrategyProfile,
    agent: AgentId,
) -> Result<f64> {
    match scenario.ref_policy {
        RefPolicy::Fixed => Ok(exact_agent_value(scenario, profile, agent.0)),
        RefPolicy::ResamplePerTrial => resampled_agent_value(scenario, profile, agent.0),
    }
}

// ---------------------------------------------------------------------------
// Deviation gains
// ---------------------------------------------------------------------------

fn mc_diff_report(
    scenario: &Scenario,
    deviation: &Deviation,
    trials: u64,
    baseline: &[Vec<f64>],
) -> Result<DeviationReport> {
    let candidate_profile = profile_with_deviation(scenario, deviation)?;
    let candidate_scenario = scenario.with_profile(candidate_profile)?;
    let candidate = mc_trial_totals(&candidate_scenario, trials)?;
    let i = deviation.agent.0;
    let beta = scenario.beta;

    let base_values: Vec<f64> = baseline.iter().map(|row| row[i] * beta).collect();
    let cand_values: Vec<f64> = candidate.iter().map(|row| row[i] * beta).collect();
    let diffs: Vec<f64> = cand_values
        .iter()
        .zip(&base_values)
        .map(|(c, b)| c - b)
        .collect();
    let t = trials as f64;
    let baseline_value = pairwise_sum(&base_values) / t;
    let candidate_value = pairwise_sum(&cand_values) / t;
    let gain = pairwise_sum(&diffs) / t;
    let var: Vec<f64> = diffs.iter().map(|d| (d - gain) * (d - gain)).collect();
    let stderr = if trials > 1 {
        (pairwise_sum(&var) / (t - 1.0) / t).sqrt()
    } else {
        0.0
    };
    let significance = if stderr > 0.0 { gain / stderr } else { 0.0 };
    Ok(DeviationReport {
        agent: deviation.agent,
        scope: deviation.scope,
        candidate: deviation.candidate.label(),
        baseline_value,
        candidate_value,
        gain,
        estimator: EstimatorKind::Mc,
        stderr: Some(stderr),
        significance: Some(significance),
    })
}

/// Values a unilateral deviation with the chosen estimator. Monte Carlo runs
/// baseline and candidate on common random numbers (the shared seed), so the
/// gain's standard error comes from per-trial differences.
pub fn deviation_gain(
    scenario: &Scenario,
    deviation: &Deviation,
    estimator: Estimator,
) -> Result<DeviationReport> {
    match estimator {
        Estimator::Mc { trials } => {
            let baseline = mc_trial_totals(scenario, trials)?;
            mc_diff_report(scenario, deviation, trials, &baseline)
        }
        Estimator::Enumerate { budget } => {
            let candidate_profile = profile_with_deviation(scenario, deviation)?;
            let candidate_scenario = scenario.with_profile(candidate_profile)?;
            let base = enumerate_expected_rewards(scenario, budget)?;
            let cand = enumerate_expected_rewards(&candidate_scenario, budget)?;
            let i = deviation.agent.0;
            let baseline_value = scenario.beta * base[i];
            let candidate_value = scenario.beta * cand[i];
            Ok(DeviationReport {
                agent: deviation.agent,
                scope: deviation.scope,
                candidate: deviation.candidate.label(),
                baseline_value,
                candidate_value,
                gain: candidate_value - baseline_value,
                estimator: EstimatorKind::Enumerate,
                stderr: None,
                significance: None,
            })
        }
        Estimator::Analytic => {
            let candidate_profile = profile_with_deviation(scenario, deviation)?;
            let baseline_value = scenario.beta
                * analytic_expected_reward(scenario, &scenario.profile, deviation.agent)?;
            let candidate_value = scenario.beta
                * analytic_expected_reward(scenario, &candidate_profile, deviation.agent)?;
            Ok(DeviationReport {
                agent: deviation.agent,
                scope: deviation.scope,
                candidate: deviation.candidate.label(),
                baseline_value,
                candidate_value,
                gain: candidate_value - baseline_value,
                estimator: EstimatorKind::Analytic,
                stderr: None,
                significance: None,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Nash verification
// ---------------------------------------------------------------------------

/// Tolerances for calling a profile an equilibrium: exact estimators use the
/// absolute tolerance; Monte Carlo widens it to `mc_sigmas` standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NashTolerance {
    pub absolute: f64,
    pub mc_sigmas: f64,
}

impl Default for NashTolerance {
    fn default() -> Self {
        NashTolerance {
            absolute: 1e-9,
            mc_sigmas: 3.0,
        }
    }
}

/// Verdict over a finite candidate set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumVerdict {
    pub profile: String,
    pub is_nash_over_candidates: bool,
    pub worst_deviation: DeviationReport,
    pub candidate_set: String,
    pub tolerance: NashTolerance,
    /// All evaluated deviations, in candidate order.
    pub reports: Vec<DeviationReport>,
}

/// The default candidate set: full-effort truthful, full-effort inverting,
/// and a grid of coins, each applied whole-profile and per single task slot,
/// for every agent. Reporting strategies are convex combinations of these
/// basis maps and rewards are linear in the reporting matrix, so checking
/// the basis set covers all reporting functions at fixed effort. Agents on
/// mixture plans get whole-profile candidates only (a mixture has no single
/// slot to override).
pub fn basis_candidates(scenario: &Scenario, r_grid_step: f64) -> Result<Vec<Deviation>> {
    if !(r_grid_step > 0.0 && r_grid_step <= 1.0) {
        return Err(Error::InvalidGridStep(r_grid_step));
    }
    let mut strategies = vec![
        TaskStrategy::full_truthful(),
        TaskStrategy::full_inverting(),
    ];
    for r in grid(r_grid_step) {
        strategies.push(TaskStrategy::coin(r)?);
    }
    let mut out = Vec::new();
    for i in 0..scenario.n_agents() {
        let agent = AgentId(i);
        let slots = if matches!(scenario.profile.plan(agent), AgentPlan::Mixture { .. }) {
            0
        } else {
            scenario.assignment.tasks_of(agent).len()
        };
        for s in &strategies {
            out.push(Deviation {
                agent,
                scope: DeviationScope::AllTasks,
                candidate: CandidatePlan::Strategy(*s),
            });
            for k in 0..slots {
                out.push(Deviation {
                    agent,
                    scope: DeviationScope::Slot(k),
                    candidate: CandidatePlan::Strategy(*s),
                });
            }
        }
    }
    Ok(out)
}

fn describe_profile(scenario: &Scenario) -> String {
    let mut kinds: Vec<String> = Vec::new();
    for i in 0..scenario.n_agents() {
        let label = match scenario.profile.plan(AgentId(i)) {
            AgentPlan::Uniform(s) => CandidatePlan::Strategy(*s).label(),
            AgentPlan::PerSlot(_) => "per_slot".into(),
            AgentPlan::Mixture { delta, coin } => {
                CandidatePlan::Mixture {
                    delta: *delta,
                    coin: *coin,
                }
                .label()
            }
        };
        if !kinds.contains(&label) {
            kinds.push(label);
        }
    }
    kinds.join(" | ")
}

/// Evaluates every candidate deviation and reports whether none improves on
/// the profile beyond tolerance. Monte Carlo shares one baseline run across
/// candidates (common random numbers).
pub fn verify_nash(
    scenario: &Scenario,
    candidates: &[Deviation],
    estimator: Estimator,
    tolerance: NashTolerance,
) -> Result<EquilibriumVerdict> {
    if candidates.is_empty() {
        return Err(Error::InvalidDeviation("empty candidate set".into()));
    }
    let mut reports = Vec::with_capacity(candidates.len());
    match estimator {
        Estimator::Mc { trials } => {
            let baseline = mc_trial_totals(scenario, trials)?;
            for deviation in candidates {
                reports.push(mc_diff_report(scenario, deviation, trials, &baseline)?);
            }
        }
        _ => {
            for deviation in candidates {
                reports.push(deviation_gain(scenario, deviation, estimator)?);
            }
        }
    }
    let worst = reports
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.gain.total_cmp(&b.gain))
        .map(|(idx, _)| idx)
        .expect("candidate set is nonempty");
    let is_nash = reports
        .iter()
        .all(|r| r.classify(&tolerance) != DeviationOutcome::Improves);
    Ok(EquilibriumVerdict {
        profile: describe_profile(scenario),
        is_nash_over_candidates: is_nash,
        worst_deviation: reports[worst].clone(),
        candidate_set: format!("{} basis deviations", reports.len()),
        tolerance,
        reports,
    })
}

// ---------------------------------------------------------------------------
// Symmetric grid scan
// ---------------------------------------------------------------------------

/// One symmetric profile in a grid scan with its per-task expected reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanEntry {
    pub effort: Effort,
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

fn grid(step: f64) -> Vec<f64> {
    let mut values = Vec::new();
    let mut k = 0u32;
    loop {
        let v = k as f64 * step;
        if v >= 1.0 - 1e-9 {
            break;
        }
        values.push(v);
        k += 1;
    }
    values.push(1.0);
    values
}

/// Per-task expected reward when every rater plays the same (effort, x, y):
/// the truth-conditioned agreement expectation of two such raters minus the
/// blind product of their identical report marginals.
fn symmetric_task_value(prior: &Prior, proficiency: f64, effort: Effort, x: f64, y: f64) -> f64 {
    let q = match effort {
        Effort::Full => proficiency,
        Effort::Zero => 0.5,
    };
    let pi_h = x * q + (1.0 - y) * (1.0 - q);
    let pi_l = x * (1.0 - q) + (1.0 - y) * q;
    let e_a = prior.p_h() * agree2(pi_h, pi_h) + prior.p_l() * agree2(pi_l, pi_l);
    let marginal = prior.p_h() * pi_h + prior.p_l() * pi_l;
    e_a - agree2(marginal, marginal)
}

/// Scans all symmetric profiles on an (effort, x, y) grid and returns them
/// sorted by per-task expected reward, best first. The maximum always sits
/// at full-effort truthful reporting, tied with full-effort inverting.
pub fn symmetric_grid_scan(prior: &Prior, proficiency: f64, grid_step: f64) -> Result<Vec<ScanEntry>> {
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(Error::InvalidGridStep(grid_step));
    }
    if !(0.5..=1.0).contains(&proficiency) {
        return Err(Error::InvalidProficiency(proficiency));
    }
    let axis = grid(grid_step);
    let mut entries = Vec::with_capacity(axis.len() * axis.len() * 2);
    for effort in [Effort::Full, Effort::Zero] {
        for &x in &axis {
            for &y in &axis {
                entries.push(ScanEntry {
                    effort,
                    x,
                    y,
                    value: symmetric_task_value(prior, proficiency, effort, x, y),
                });
            }
        }
    }
    entries.sort_by(|a, b| {
        b.value
            .total_cmp(&a.value)
            .then_with(|| (b.effort == Effort::Full).cmp(&(a.effort == Effort::Full)))
            .then_with(|| a.x.total_cmp(&b.x))
            .then_with(|| a.y.total_cmp(&b.y))
    });
    Ok(entries)
}

// ---------------------------------------------------------------------------
// Low-effort escape
// ---------------------------------------------------------------------------

fn mixture_parameters(plan: &AgentPlan) -> Result<(f64, f64)> {
    match plan {
        AgentPlan::Mixture { delta, coin } => Ok((*delta, *coin)),
        AgentPlan::Uniform(s) => {
            let w = decompose_reporting_matrix(&s.reporting);
            if s.effort == Effort::Full && w.informative_coefficient() == 1.0 {
                Ok((1.0, 0.5))
            } else if w.informative_coefficient() == 0.0 {
                // A pure coin: report H with probability x regardless.
                Ok((0.0, s.reporting.x()))
            } else {
                Err(Error::NoClosedForm(
                    "profile is not a truthful-vs-coin mixture".into(),
                ))
            }
        }
        AgentPlan::PerSlot(_) => Err(Error::NoClosedForm(
            "per-slot plans have no single mixture weight".into(),
        )),
    }
}

/// Gain from the named agent moving her truthful-mixture weight to 1 (always
/// full-effort truthful), with every plan read as a truthful-vs-coin
/// mixture. Values are expected totals over the agent's tasks, built from
/// the per-task mixture value of each slot's reference distribution plus the
/// trusted-reference term.
pub fn low_effort_escape_check(scenario: &Scenario, agent: AgentId) -> Result<DeviationReport> {
    let n = scenario.n_agents();
    let (own_delta, own_coin) = mixture_parameters(scenario.profile.plan(agent))?;
    let own_p = scenario.agents[agent.0].max_proficiency();
    let prior = &scenario.prior;
    let trusted = scenario.trusted;

    // Reference distribution per slot.
    let slot_refs: Vec<Vec<RefMix>> = match scenario.ref_policy {
        RefPolicy::Fixed => scenario
            .assignment
            .tasks_of(agent)
            .iter()
            .map(|&task| {
                let reference = scenario.assignment.ref_rater(agent, task).unwrap();
                let (eps, _) = mixture_parameters(scenario.profile.plan(reference))?;
                Ok(vec![RefMix {
                    weight: 1.0,
                    truthful_prob: eps,
                    proficiency: scenario.agents[reference.0].max_proficiency(),
                }])
            })
            .collect::<Result<_>>()?,
        RefPolicy::ResamplePerTrial => {
            let mut uniform = Vec::new();
            for k in 0..n {
                if k == agent.0 {
                    continue;
                }
                let (eps, _) = mixture_parameters(scenario.profile.plan(AgentId(k)))?;
                uniform.push(RefMix {
                    weight: 1.0 / (n - 1) as f64,
                    truthful_prob: eps,
                    proficiency: scenario.agents[k].max_proficiency(),
                });
            }
            vec![uniform; scenario.assignment.tasks_of(agent).len()]
        }
    };

    let value_at = |delta: f64| -> Result<f64> {
        let mut total = 0.0;
        for refs in &slot_refs {
            let assigned = mixed_profile_task_value(delta, refs, own_p, prior)?;
            total += match trusted {
                None => assigned,
                Some(t) => {
                    delta * trusted_escape_gain(t.share, t.proficiency, own_p, prior)?
                        + (1.0 - t.share) * assigned
                }
            };
        }
        Ok(total)
    };

    let baseline_value = scenario.beta * value_at(own_delta)?;
    let candidate_value = scenario.beta * value_at(1.0)?;
    Ok(DeviationReport {
        agent,
        scope: DeviationScope::AllTasks,
        candidate: CandidatePlan::Mixture {
            delta: 1.0,
            coin: own_coin,
        }
        .label(),
        baseline_value,
        candidate_value,
        gain: candidate_value - baseline_value,
        estimator: EstimatorKind::Analytic,
        stderr: None,
        significance: None,
    })
}
