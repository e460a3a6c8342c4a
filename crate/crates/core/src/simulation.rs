//! Seeded Monte Carlo sampling under arbitrary strategy profiles, plus an
//! exhaustive expectation oracle for small instances.
//!
//! All randomness flows through counter-based streams keyed by
//! (seed, purpose, trial, agent, task), so results are bit-reproducible and
//! independent of evaluation order. Per-trial rewards are reduced with
//! fixed-order pairwise summation.

use std::borrow::Cow;
use std::collections::HashMap;
use std::ops::Deref;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::assignment::{build_block_assignment, choose_reference_raters, BlockParams};
use crate::error::{Error, Result};
use crate::mechanism::{
    build_statistic_sets, reward_terms, Assignment, ReportSet, Scheme,
};
use crate::model::{
    agree2, report_distribution, signal_prob, AgentId, AgentParams, Prior, TaskId, TaskStrategy,
};
use crate::streams::{Stage, Stream};

/// An agent's plan across her task list.
#[derive(Debug, Clone, PartialEq)]
pub enum AgentPlan {
    /// The same strategy on every task.
    Uniform(TaskStrategy),
    /// One strategy per task slot (position in the agent's task list).
    PerSlot(Vec<TaskStrategy>),
    /// Independently per task: full-effort truthtelling with probability
    /// `delta`, otherwise a coin with H-bias `coin`.
    Mixture { delta: f64, coin: f64 },
}

/// Per-agent plans covering the assignment support.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile {
    plans: Vec<AgentPlan>,
}

impl StrategyProfile {
    pub fn new(plans: Vec<AgentPlan>) -> Self {
        StrategyProfile { plans }
    }

    pub fn uniform(n_agents: usize, strategy: TaskStrategy) -> Self {
        StrategyProfile {
            plans: vec![AgentPlan::Uniform(strategy); n_agents],
        }
    }

    /// Everyone works and reports truthfully.
    pub fn all_truthful(n_agents: usize) -> Self {
        Self::uniform(n_agents, TaskStrategy::full_truthful())
    }

    /// Everyone works and inverts.
    pub fn all_inverting(n_agents: usize) -> Self {
        Self::uniform(n_agents, TaskStrategy::full_inverting())
    }

    /// Everyone reports H blindly.
    pub fn blind_h(n_agents: usize) -> Self {
        Self::uniform(n_agents, TaskStrategy::blind_h())
    }

    /// Everyone reports L blindly.
    pub fn blind_l(n_agents: usize) -> Self {
        Self::uniform(n_agents, TaskStrategy::blind_l())
    }

    /// Everyone tosses the same coin.
    pub fn coin(n_agents: usize, r: f64) -> Result<Self> {
        Ok(Self::uniform(n_agents, TaskStrategy::coin(r)?))
    }

    /// Everyone mixes full-effort truthtelling (probability `delta`) with a
    /// coin of bias `r`, independently per task.
    pub fn mixture(n_agents: usize, delta: f64, r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidProbability {
                name: "delta",
                value: delta,
            });
        }
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidProbability { name: "r", value: r });
        }
        Ok(StrategyProfile {
            plans: vec![AgentPlan::Mixture { delta, coin: r }; n_agents],
        })
    }

    pub fn n_agents(&self) -> usize {
        self.plans.len()
    }

    pub fn plan(&self, agent: AgentId) -> &AgentPlan {
        &self.plans[agent.0]
    }

    pub fn set_plan(&mut self, agent: AgentId, plan: AgentPlan) {
        self.plans[agent.0] = plan;
    }

    /// Copy with one agent's plan replaced.
    pub fn with_plan(&self, agent: AgentId, plan: AgentPlan) -> Self {
        let mut out = self.clone();
        out.set_plan(agent, plan);
        out
    }
}

/// Probability that the plan reports H on the given slot, conditional on the
/// task's truth, marginalizing observation noise and any mixture pick.
pub(crate) fn plan_report_h_given_truth(
    plan: &AgentPlan,
    slot: usize,
    params: &AgentParams,
    truth_h: bool,
) -> f64 {
    match plan {
        AgentPlan::Uniform(s) => report_distribution(s, params, truth_h),
        AgentPlan::PerSlot(slots) => report_distribution(&slots[slot], params, truth_h),
        AgentPlan::Mixture { delta, coin } => {
            let truthful = report_distribution(&TaskStrategy::full_truthful(), params, truth_h);
            delta * truthful + (1.0 - delta) * coin
        }
    }
}

/// Unconditional probability that the plan reports H on the slot.
pub(crate) fn plan_report_h_marginal(
    plan: &AgentPlan,
    slot: usize,
    params: &AgentParams,
    prior: &Prior,
) -> f64 {
    prior.p_h() * plan_report_h_given_truth(plan, slot, params, true)
        + prior.p_l() * plan_report_h_given_truth(plan, slot, params, false)
}

/// Trusted raters: with probability `share`, the reference rater of any
/// (agent, task) pair is replaced by a truthful full-effort rater of
/// accuracy `proficiency` whose statistic reports come from d further
/// independent tasks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrustedRaters {
    pub share: f64,
    pub proficiency: f64,
}

impl TrustedRaters {
    pub fn new(share: f64, proficiency: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&share) {
            return Err(Error::InvalidProbability {
                name: "trusted share",
                value: share,
            });
        }
        if !(0.5..=1.0).contains(&proficiency) {
            return Err(Error::InvalidProficiency(proficiency));
        }
        Ok(TrustedRaters { share, proficiency })
    }
}

/// Whether reference raters (and the whole assignment permutation) are fixed
/// for the scenario or freshly drawn each trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RefPolicy {
    /// One realized assignment for all trials.
    Fixed,
    /// Each trial rebuilds the block assignment and reference choice under a
    /// trial-specific permutation; expectations then range over assignment
    /// randomness, which is what the equilibrium statements quantify over.
    ResamplePerTrial,
}

/// Rebuilt assignments are memoized up to this trial index so that scenarios
/// sharing a seed (common-random-number comparisons) rebuild each trial's
/// assignment once instead of once per candidate.
const RESAMPLE_CACHE_LIMIT: u64 = 8192;

#[derive(Debug, Clone)]
struct ResampleCtx {
    params: BlockParams,
    scheme: Scheme,
    cache: Arc<Mutex<HashMap<u64, Arc<Assignment>>>>,
}

/// The assignment in force for one trial.
pub enum TrialAssignment<'a> {
    Fixed(&'a Assignment),
    Resampled(Arc<Assignment>),
}

impl Deref for TrialAssignment<'_> {
    type Target = Assignment;

    fn deref(&self) -> &Assignment {
        match self {
            TrialAssignment::Fixed(a) => a,
            TrialAssignment::Resampled(a) => a,
        }
    }
}

/// Everything a run needs: model parameters, assignment, profile, scaling,
/// and the master seed.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub prior: Prior,
    pub agents: Vec<AgentParams>,
    pub assignment: Assignment,
    pub profile: StrategyProfile,
    pub beta: f64,
    pub seed: u64,
    pub ref_policy: RefPolicy,
    pub trusted: Option<TrustedRaters>,
    resample: Option<ResampleCtx>,
}

impl Scenario {
    pub fn new(
        prior: Prior,
        agents: Vec<AgentParams>,
        assignment: Assignment,
        profile: StrategyProfile,
        beta: f64,
        seed: u64,
    ) -> Result<Self> {
        Self::with_options(
            prior,
            agents,
            assignment,
            profile,
            beta,
            seed,
            RefPolicy::Fixed,
            None,
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn with_options(
        prior: Prior,
        agents: Vec<AgentParams>,
        assignment: Assignment,
        profile: StrategyProfile,
        beta: f64,
        seed: u64,
        ref_policy: RefPolicy,
        trusted: Option<TrustedRaters>,
    ) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::NegativeBeta(beta));
        }
        if agents.len() != assignment.n_agents() {
            return Err(Error::InvalidScenario(format!(
                "{} agent parameter sets for {} agents",
                agents.len(),
                assignment.n_agents()
            )));
        }
        for (i, a) in agents.iter().enumerate() {
            if a.agent_id != AgentId(i) {
                return Err(Error::InvalidScenario(format!(
                    "agent parameters must be listed in id order; position {i} holds {}",
                    a.agent_id
                )));
            }
        }
        validate_profile_shape(&profile, &assignment)?;
        let resample = match ref_policy {
            RefPolicy::Fixed => None,
            RefPolicy::ResamplePerTrial => {
                let scheme = assignment.scheme().ok_or_else(|| {
                    Error::InvalidScenario(
                        "per-trial resampling needs a named statistic scheme".into(),
                    )
                })?;
                let params = BlockParams::new(
                    assignment.n_tasks(),
                    assignment.n_agents(),
                    assignment.d_tasks(),
                    assignment.t_raters(),
                )
                .map_err(|e| {
                    Error::InvalidScenario(format!("cannot rebuild block assignment: {e}"))
                })?;
                // Prove one rebuild works before committing to the policy.
                rebuild_assignment(params, scheme, 0)?;
                Some(ResampleCtx {
                    params,
                    scheme,
                    cache: Arc::new(Mutex::new(HashMap::new())),
                })
            }
        };
        Ok(Scenario {
            prior,
            agents,
            assignment,
            profile,
            beta,
            seed,
            ref_policy,
            trusted,
            resample,
        })
    }

    /// Copy of the scenario with another profile; shares the seed (and the
    /// per-trial assignment cache) with the original, so the two can be
    /// compared on common random numbers.
    pub fn with_profile(&self, profile: StrategyProfile) -> Result<Scenario> {
        validate_profile_shape(&profile, &self.assignment)?;
        Ok(Scenario {
            profile,
            ..self.clone()
        })
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    /// The assignment in force for a given trial.
    pub fn trial_assignment(&self, trial: u64) -> Result<TrialAssignment<'_>> {
        match &self.resample {
            None => Ok(TrialAssignment::Fixed(&self.assignment)),
            Some(ctx) => {
                if trial < RESAMPLE_CACHE_LIMIT {
                    let mut cache = ctx.cache.lock().expect("cache lock");
                    if let Some(found) = cache.get(&trial) {
                        return Ok(TrialAssignment::Resampled(Arc::clone(found)));
                    }
                    let built = Arc::new(self.rebuild_for(ctx, trial)?);
                    cache.insert(trial, Arc::clone(&built));
                    Ok(TrialAssignment::Resampled(built))
                } else {
                    Ok(TrialAssignment::Resampled(Arc::new(
                        self.rebuild_for(ctx, trial)?,
                    )))
                }
            }
        }
    }

    fn rebuild_for(&self, ctx: &ResampleCtx, trial: u64) -> Result<Assignment> {
        let build_seed = Stream::new(self.seed, Stage::TrialSeed, &[trial]).next_u64();
        rebuild_assignment(ctx.params, ctx.scheme, build_seed)
    }
}

fn validate_profile_shape(profile: &StrategyProfile, assignment: &Assignment) -> Result<()> {
    if profile.n_agents() != assignment.n_agents() {
        return Err(Error::ProfileMismatch(format!(
            "{} plans for {} agents",
            profile.n_agents(),
            assignment.n_agents()
        )));
    }
    for (i, plan) in profile.plans.iter().enumerate() {
        if let AgentPlan::PerSlot(slots) = plan {
            let expected = assignment.tasks_of(AgentId(i)).len();
            if slots.len() != expected {
                return Err(Error::ProfileMismatch(format!(
                    "agent {i} has {} slot strategies for {expected} tasks",
                    slots.len()
                )));
            }
        }
        if let AgentPlan::Mixture { delta, coin } = plan {
            if !(0.0..=1.0).contains(delta) || !(0.0..=1.0).contains(coin) {
                return Err(Error::ProfileMismatch(format!(
                    "agent {i} mixture parameters out of range"
                )));
            }
        }
    }
    Ok(())
}

fn rebuild_assignment(params: BlockParams, scheme: Scheme, seed: u64) -> Result<Assignment> {
    let core = build_block_assignment(params, seed);
    let refs = choose_reference_raters(&core, scheme, seed)?;
    build_statistic_sets(refs, scheme)
}

/// Draws each task's ground truth independently from the prior.
/// Deterministic in (seed, trial_index).
pub fn sample_world(scenario: &Scenario, trial: u64) -> Vec<bool> {
    let mut stream = Stream::new(scenario.seed, Stage::World, &[trial]);
    (0..scenario.assignment.n_tasks())
        .map(|_| stream.bernoulli(scenario.prior.p_h()))
        .collect()
}

fn sample_pair_report(
    scenario: &Scenario,
    trial: u64,
    agent: usize,
    task: TaskId,
    slot: usize,
    truth_h: bool,
) -> (bool, bool) {
    let mut stream = Stream::new(
        scenario.seed,
        Stage::Report,
        &[trial, agent as u64, task.0 as u64],
    );
    let strategy: Cow<'_, TaskStrategy> = match &scenario.profile.plans[agent] {
        AgentPlan::Uniform(s) => Cow::Borrowed(s),
        AgentPlan::PerSlot(slots) => Cow::Borrowed(&slots[slot]),
        AgentPlan::Mixture { delta, coin } => {
            if stream.bernoulli(*delta) {
                Cow::Owned(TaskStrategy::full_truthful())
            } else {
                Cow::Owned(TaskStrategy::coin(*coin).expect("validated at construction"))
            }
        }
    };
    let q = strategy.effective_proficiency(&scenario.agents[agent]);
    let correct = stream.bernoulli(q);
    let observed_h = truth_h == correct;
    let report_h = stream.bernoulli(strategy.reporting.report_h_given_obs(observed_h));
    (observed_h, report_h)
}

/// Samples every rater's report for one trial, given the trial's truths.
/// Mixture plans are resolved independently per task.
pub fn sample_reports(world: &[bool], scenario: &Scenario, trial: u64) -> Result<ReportSet> {
    let assignment = scenario.trial_assignment(trial)?;
    let mut reports = ReportSet::empty(assignment.n_agents(), assignment.n_tasks());
    for i in 0..assignment.n_agents() {
        for (slot, &task) in assignment.tasks_of(AgentId(i)).iter().enumerate() {
            let (_, report_h) = sample_pair_report(scenario, trial, i, task, slot, world[task.0]);
            reports.set(AgentId(i), task, report_h);
        }
    }
    Ok(reports)
}

/// One row of a trial-level dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: u64,
    pub task: TaskId,
    pub truth: u8,
    pub agent: AgentId,
    pub observation: u8,
    pub report: u8,
}

/// Samples one trial and returns its full (task, agent) event log.
pub fn simulate_trial(scenario: &Scenario, trial: u64) -> Result<Vec<TrialRow>> {
    let assignment = scenario.trial_assignment(trial)?;
    let world = sample_world(scenario, trial);
    let mut rows = Vec::new();
    for i in 0..assignment.n_agents() {
        for (slot, &task) in assignment.tasks_of(AgentId(i)).iter().enumerate() {
            let truth_h = world[task.0];
            let (obs, rep) = sample_pair_report(scenario, trial, i, task, slot, truth_h);
            rows.push(TrialRow {
                trial,
                task,
                truth: truth_h as u8,
                agent: AgentId(i),
                observation: obs as u8,
                report: rep as u8,
            });
        }
    }
    rows.sort_by_key(|r| (r.task, r.agent));
    Ok(rows)
}

/// Draws the trusted reference's report on the scored task plus her d
/// statistic reports on fresh independent tasks.
fn sample_trusted_reference(
    scenario: &Scenario,
    trial: u64,
    agent: usize,
    task: TaskId,
    truth_h: bool,
    d: usize,
    proficiency: f64,
) -> (bool, usize) {
    let mut stream = Stream::new(
        scenario.seed,
        Stage::TrustedReports,
        &[trial, agent as u64, task.0 as u64],
    );
    let correct = stream.bernoulli(proficiency);
    let report_on_task = truth_h == correct;
    let mut high = 0;
    for _ in 0..d {
        let vtruth = stream.bernoulli(scenario.prior.p_h());
        let vcorrect = stream.bernoulli(proficiency);
        if vtruth == vcorrect {
            high += 1;
        }
    }
    (report_on_task, high)
}

/// Per-agent reward totals (beta-unscaled) for one trial.
fn trial_totals(scenario: &Scenario, trial: u64) -> Result<Vec<f64>> {
    let assignment = scenario.trial_assignment(trial)?;
    let world = sample_world(scenario, trial);
    let reports = sample_reports(&world, scenario, trial)?;
    let d = assignment.d();
    let n = assignment.n_agents();

    let high_count = |agent: AgentId, set: &[TaskId]| -> usize {
        set.iter()
            .filter(|&&t| reports.get(agent, t) == Some(true))
            .count()
    };

    let mut totals = vec![0.0; n];
    for i in 0..n {
        let agent = AgentId(i);
        for &task in assignment.tasks_of(agent) {
            let own = reports.get(agent, task).expect("sampled on support");
            let own_high = high_count(agent, assignment.stat_set(agent, task).unwrap());

            let trusted_draw = scenario.trusted.and_then(|t| {
                let mut pick = Stream::new(
                    scenario.seed,
                    Stage::TrustedPick,
                    &[trial, i as u64, task.0 as u64],
                );
                pick.bernoulli(t.share).then_some(t)
            });

            let (ref_report, ref_high) = match trusted_draw {
                Some(t) => sample_trusted_reference(
                    scenario,
                    trial,
                    i,
                    task,
                    world[task.0],
                    d,
                    t.proficiency,
                ),
                None => {
                    let reference = assignment.ref_rater(agent, task).expect("validated");
                    let ref_set = assignment
                        .stat_sets(agent, task)
                        .expect("validated")
                        .1;
                    (
                        reports.get(reference, task).expect("sampled on support"),
                        high_count(reference, ref_set),
                    )
                }
            };

            let (_, _, r) = reward_terms(own, ref_report, own_high, ref_high, d);
            totals[i] += r;
        }
    }
    Ok(totals)
}

/// Fixed-order pairwise summation.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Monte Carlo estimate of one mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// Per-agent reward totals for every trial (trial-major matrix). This is
/// the common-random-numbers building block: two scenarios sharing a seed
/// can be differenced trial by trial.
pub fn mc_trial_totals(scenario: &Scenario, trials: u64) -> Result<Vec<Vec<f64>>> {
    if trials == 0 {
        return Err(Error::InvalidScenario("trials must be at least 1".into()));
    }
    (0..trials).map(|t| trial_totals(scenario, t)).collect()
}

/// Summarizes a trial-major matrix into per-agent estimates.
pub fn summarize_trials(per_trial: &[Vec<f64>]) -> Vec<McEstimate> {
    let trials = per_trial.len();
    let n = per_trial.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            let values: Vec<f64> = per_trial.iter().map(|row| row[i]).collect();
            let mean = pairwise_sum(&values) / trials as f64;
            let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
            let stderr = if trials > 1 {
                (pairwise_sum(&sq) / (trials as f64 - 1.0) / trials as f64).sqrt()
            } else {
                0.0
            };
            McEstimate {
                mean,
                stderr,
                trials: trials as u64,
            }
        })
        .collect()
}

/// Monte Carlo estimate of each agent's expected (beta-unscaled) total
/// reward. Deterministic in (scenario, seed, trials).
pub fn mc_expected_rewards(scenario: &Scenario, trials: u64) -> Result<Vec<McEstimate>> {
    Ok(summarize_trials(&mc_trial_totals(scenario, trials)?))
}

/// Branch budget for the exhaustive oracle, as a power of two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EnumerationBudget {
    pub max_bits: u32,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget { max_bits: 24 }
    }
}

/// Conceptual branch count (log2) of the joint outcome space: every task's
/// truth, and per scored pair an observation and a report branch, plus a
/// mixture branch where applicable and the trusted reference's draws.
pub fn enumeration_bits(scenario: &Scenario) -> u32 {
    let assignment = &scenario.assignment;
    let mut bits = assignment.n_tasks() as u64;
    let d = assignment.d() as u64;
    for i in 0..assignment.n_agents() {
        let pair_count = assignment.tasks_of(AgentId(i)).len() as u64;
        let mut per_pair = 2u64;
        if matches!(scenario.profile.plans[i], AgentPlan::Mixture { .. }) {
            per_pair += 1;
        }
        if scenario.trusted.is_some() {
            per_pair += 1 + 2 * d;
        }
        bits += pair_count * per_pair;
    }
    bits.min(u32::MAX as u64) as u32
}

/// Exact per-agent expected total rewards by exhaustive enumeration.
///
/// Ground-truth vectors are enumerated outright; conditional on the truths,
/// reports at distinct (agent, task) pairs are independent, so the
/// observation, report, and mixture branches at each pair collapse into the
/// pair's conditional report probability, and every product in the reward
/// rule factorizes. Refuses instances whose conceptual branch space
/// exceeds the budget, and resampled-assignment scenarios.
pub fn enumerate_expected_rewards(
    scenario: &Scenario,
    budget: EnumerationBudget,
) -> Result<Vec<f64>> {
    if scenario.ref_policy != RefPolicy::Fixed {
        return Err(Error::EnumerationNeedsFixedAssignment);
    }
    let required = enumeration_bits(scenario);
    if required > budget.max_bits {
        return Err(Error::EnumerationBudget {
            required_bits: required,
            budget_bits: budget.max_bits,
        });
    }
    let assignment = &scenario.assignment;
    let m = assignment.n_tasks();
    let n = assignment.n_agents();
    let d = assignment.d();
    let trusted_signal = match scenario.trusted {
        Some(t) => Some((t.share, signal_prob(t.proficiency, &scenario.prior)?)),
        None => None,
    };

    let mut totals = vec![0.0; n];
    // Conditional report-H probability per (agent, slot) for one truth vector.
    let mut cond = vec![vec![0.0f64; assignment.d_tasks()]; n];
    for mask in 0u64..(1u64 << m) {
        let truth = |task: TaskId| mask >> task.0 & 1 == 1;
        let mut prob = 1.0;
        for j in 0..m {
            prob *= if truth(TaskId(j)) {
                scenario.prior.p_h()
            } else {
                scenario.prior.p_l()
            };
        }
        for i in 0..n {
            for (slot, &task) in assignment.tasks_of(AgentId(i)).iter().enumerate() {
                cond[i][slot] = plan_report_h_given_truth(
                    &scenario.profile.plans[i],
                    slot,
                    &scenario.agents[i],
                    truth(task),
                );
            }
        }
        let stat_mean = |agent: usize, set: &[TaskId]| -> f64 {
            set.iter()
                .map(|&t| {
                    let slot = assignment
                        .core()
                        .slot_of(AgentId(agent), t)
                        .expect("statistic sets stay within the agent's tasks");
                    cond[agent][slot]
                })
                .sum::<f64>()
                / d as f64
        };

        for i in 0..n {
            let agent = AgentId(i);
            for (slot, &task) in assignment.tasks_of(agent).iter().enumerate() {
                let own_h = cond[i][slot];
                let own_mean = stat_mean(i, assignment.stat_set(agent, task).unwrap());
                let reference = assignment.ref_rater(agent, task).unwrap();
                let ref_slot = assignment
                    .core()
                    .slot_of(reference, task)
                    .expect("reference rates the task");
                let ref_h = cond[reference.0][ref_slot];
                let ref_mean = stat_mean(
                    reference.0,
                    assignment.stat_sets(agent, task).unwrap().1,
                );
                let assigned_a = agree2(own_h, ref_h);
                let assigned_b = agree2(own_mean, ref_mean);
                let value = match trusted_signal {
                    None => assigned_a - assigned_b,
                    Some((share, t_signal)) => {
                        let t = scenario.trusted.unwrap().proficiency;
                        let t_h = if truth(task) { t } else { 1.0 - t };
                        let trusted_a = agree2(own_h, t_h);
                        let trusted_b = agree2(own_mean, t_signal);
                        share * (trusted_a - trusted_b)
                            + (1.0 - share) * (assigned_a - assigned_b)
                    }
                };
                totals[i] += prob * value;
            }
        }
    }
    Ok(totals)
}
