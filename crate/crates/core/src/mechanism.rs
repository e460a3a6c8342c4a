//! The reward rule and its supporting structures.
//!
//! Each rater i is paid, for each of her tasks j, an agreement score against
//! a reference rater's report on j, minus a statistic term: the product of
//! the two raters' empirical H-frequencies over d disjoint other tasks
//! (and the symmetric L-product). Agreement that would arise from reporting
//! habits alone is subtracted out, so truth-independent strategies net zero.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AgentId, TaskId};

/// Which statistic sets the mechanism uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scheme {
    /// d = 1: each task's statistic term uses the next task in the rater's
    /// list, cyclically, so every task feeds exactly one statistic set.
    Ring,
    /// d = D-1: the statistic term uses all of a rater's other tasks; the
    /// reference rater must share exactly the one scored task.
    Full,
}

impl Scheme {
    pub fn token(self) -> &'static str {
        match self {
            Scheme::Ring => "ring_d1",
            Scheme::Full => "full_dminus1",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

/// Who rates what: the ordered task list of each agent and the rater set of
/// each task. Block indices are carried along when the block builder
/// produced the core.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentCore {
    n_tasks: usize,
    tasks_of: Vec<Vec<TaskId>>,
    agents_of: Vec<Vec<AgentId>>,
    agent_block: Option<Vec<usize>>,
    declared_d: usize,
    declared_t: usize,
}

impl AssignmentCore {
    /// Builds the core from per-agent ordered task lists, requiring uniform
    /// capacities: every agent rates exactly D tasks and every task has
    /// exactly T raters.
    pub fn new(n_tasks: usize, tasks_of: Vec<Vec<TaskId>>) -> Result<Self> {
        let n_agents = tasks_of.len();
        if n_agents == 0 || n_tasks == 0 {
            return Err(Error::InvalidScenario(
                "assignment needs at least one agent and one task".into(),
            ));
        }
        let d = tasks_of[0].len();
        let mut agents_of: Vec<Vec<AgentId>> = vec![Vec::new(); n_tasks];
        for (i, tasks) in tasks_of.iter().enumerate() {
            if tasks.len() != d {
                return Err(Error::InvalidScenario(format!(
                    "agent {i} rates {} tasks, expected {d}",
                    tasks.len()
                )));
            }
            let mut seen = BTreeSet::new();
            for &task in tasks {
                if task.0 >= n_tasks {
                    return Err(Error::InvalidScenario(format!(
                        "agent {i} references unknown task {task}"
                    )));
                }
                if !seen.insert(task) {
                    return Err(Error::InvalidScenario(format!(
                        "agent {i} rates task {task} twice"
                    )));
                }
                agents_of[task.0].push(AgentId(i));
            }
        }
        let t = agents_of[0].len();
        for (j, raters) in agents_of.iter().enumerate() {
            if raters.len() != t {
                return Err(Error::InvalidScenario(format!(
                    "task {j} has {} raters, expected {t}",
                    raters.len()
                )));
            }
        }
        Ok(AssignmentCore {
            n_tasks,
            tasks_of,
            agents_of,
            agent_block: None,
            declared_d: d,
            declared_t: t,
        })
    }

    /// Builds the core without capacity checks, for validator tests on
    /// deliberately broken inputs.
    pub fn from_parts_unchecked(
        n_tasks: usize,
        tasks_of: Vec<Vec<TaskId>>,
        declared_d: usize,
        declared_t: usize,
    ) -> Self {
        let mut agents_of: Vec<Vec<AgentId>> = vec![Vec::new(); n_tasks];
        for (i, tasks) in tasks_of.iter().enumerate() {
            for &task in tasks {
                if task.0 < n_tasks {
                    agents_of[task.0].push(AgentId(i));
                }
            }
        }
        AssignmentCore {
            n_tasks,
            tasks_of,
            agents_of,
            agent_block: None,
            declared_d,
            declared_t,
        }
    }

    pub(crate) fn with_blocks(mut self, blocks: Vec<usize>) -> Self {
        self.agent_block = Some(blocks);
        self
    }

    pub fn n_agents(&self) -> usize {
        self.tasks_of.len()
    }

    pub fn n_tasks(&self) -> usize {
        self.n_tasks
    }

    /// Declared tasks-per-agent capacity D.
    pub fn d_tasks(&self) -> usize {
        self.declared_d
    }

    /// Declared raters-per-task capacity T.
    pub fn t_raters(&self) -> usize {
        self.declared_t
    }

    pub fn tasks_of(&self, agent: AgentId) -> &[TaskId] {
        &self.tasks_of[agent.0]
    }

    pub fn agents_of(&self, task: TaskId) -> &[AgentId] {
        &self.agents_of[task.0]
    }

    /// Block index of the agent under the block construction, if known.
    pub fn agent_block(&self, agent: AgentId) -> Option<usize> {
        self.agent_block.as_ref().map(|b| b[agent.0])
    }

    pub fn slot_of(&self, agent: AgentId, task: TaskId) -> Option<usize> {
        self.tasks_of[agent.0].iter().position(|&t| t == task)
    }
}

/// A core plus a reference rater for every (agent, task) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RefAssignment {
    core: AssignmentCore,
    ref_rater: Vec<Vec<AgentId>>,
}

impl RefAssignment {
    /// Validates that every reference rater also rates the task and is not
    /// the agent herself.
    pub fn new(core: AssignmentCore, ref_rater: Vec<Vec<AgentId>>) -> Result<Self> {
        if ref_rater.len() != core.n_agents() {
            return Err(Error::InvalidScenario(
                "reference table does not cover all agents".into(),
            ));
        }
        for (i, refs) in ref_rater.iter().enumerate() {
            let agent = AgentId(i);
            let tasks = core.tasks_of(agent);
            if refs.len() != tasks.len() {
                return Err(Error::InvalidScenario(format!(
                    "agent {i} has {} reference raters for {} tasks",
                    refs.len(),
                    tasks.len()
                )));
            }
            for (slot, &r) in refs.iter().enumerate() {
                let task = tasks[slot];
                if r == agent || !core.agents_of(task).contains(&r) {
                    return Err(Error::NoFeasibleReference { agent, task });
                }
            }
        }
        Ok(RefAssignment { core, ref_rater })
    }

    pub fn from_parts_unchecked(core: AssignmentCore, ref_rater: Vec<Vec<AgentId>>) -> Self {
        RefAssignment { core, ref_rater }
    }

    pub fn core(&self) -> &AssignmentCore {
        &self.core
    }

    pub fn ref_rater(&self, agent: AgentId, slot: usize) -> AgentId {
        self.ref_rater[agent.0][slot]
    }
}

/// A fully specified mechanism instance: assignment, reference raters, and
/// the statistic sets of every (agent, task) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    core: AssignmentCore,
    ref_rater: Vec<Vec<AgentId>>,
    stat_sets: Vec<Vec<Vec<TaskId>>>,
    /// Slot of task j in the reference rater's own list, per (agent, slot).
    ref_slot: Vec<Vec<usize>>,
    d: usize,
    scheme: Option<Scheme>,
}

/// Fills the statistic sets prescribed by the scheme and validates the
/// non-overlap requirement against each pair's reference rater.
pub fn build_statistic_sets(refs: RefAssignment, scheme: Scheme) -> Result<Assignment> {
    let d_tasks = refs.core.d_tasks();
    let d = match scheme {
        Scheme::Ring => 1,
        Scheme::Full => d_tasks.saturating_sub(1),
    };
    if d == 0 || d > d_tasks.saturating_sub(1) {
        return Err(Error::InvalidStatSetSize { d, d_tasks });
    }
    let mut stat_sets = Vec::with_capacity(refs.core.n_agents());
    for i in 0..refs.core.n_agents() {
        let tasks = refs.core.tasks_of(AgentId(i));
        let per_agent: Vec<Vec<TaskId>> = match scheme {
            Scheme::Ring => (0..tasks.len())
                .map(|slot| vec![tasks[(slot + 1) % tasks.len()]])
                .collect(),
            Scheme::Full => (0..tasks.len())
                .map(|slot| {
                    tasks
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != slot)
                        .map(|(_, &t)| t)
                        .collect()
                })
                .collect(),
        };
        stat_sets.push(per_agent);
    }
    Assignment::assemble(refs, stat_sets, d, Some(scheme))
}

/// Builds an assignment from caller-supplied statistic sets, for d values
/// the named schemes do not cover. Fully validated.
pub fn with_custom_stat_sets(
    refs: RefAssignment,
    stat_sets: Vec<Vec<Vec<TaskId>>>,
    d: usize,
) -> Result<Assignment> {
    Assignment::assemble(refs, stat_sets, d, None)
}

impl Assignment {
    fn assemble(
        refs: RefAssignment,
        stat_sets: Vec<Vec<Vec<TaskId>>>,
        d: usize,
        scheme: Option<Scheme>,
    ) -> Result<Self> {
        let core = refs.core;
        let ref_rater = refs.ref_rater;
        let d_tasks = core.d_tasks();
        if d == 0 || d + 1 > d_tasks {
            return Err(Error::InvalidStatSetSize { d, d_tasks });
        }
        if stat_sets.len() != core.n_agents() {
            return Err(Error::InvalidScenario(
                "statistic sets do not cover all agents".into(),
            ));
        }
        // Subset/size checks per pair.
        for (i, per_agent) in stat_sets.iter().enumerate() {
            let agent = AgentId(i);
            let tasks = core.tasks_of(agent);
            if per_agent.len() != tasks.len() {
                return Err(Error::InvalidScenario(format!(
                    "agent {i} has statistic sets for {} of {} tasks",
                    per_agent.len(),
                    tasks.len()
                )));
            }
            for (slot, set) in per_agent.iter().enumerate() {
                let task = tasks[slot];
                if set.len() != d {
                    return Err(Error::InvalidStatSet {
                        agent,
                        task,
                        reason: format!("has {} tasks, expected d={d}", set.len()),
                    });
                }
                let unique: BTreeSet<_> = set.iter().collect();
                if unique.len() != set.len() {
                    return Err(Error::InvalidStatSet {
                        agent,
                        task,
                        reason: "contains duplicates".into(),
                    });
                }
                for &t in set {
                    if t == task || !tasks.contains(&t) {
                        return Err(Error::InvalidStatSet {
                            agent,
                            task,
                            reason: format!("task {t} is not another task of the agent"),
                        });
                    }
                }
            }
        }
        // Non-overlap against each reference rater's own set, and reference
        // slot precomputation.
        let mut ref_slot = Vec::with_capacity(core.n_agents());
        for i in 0..core.n_agents() {
            let agent = AgentId(i);
            let tasks = core.tasks_of(agent);
            let mut slots = Vec::with_capacity(tasks.len());
            for (slot, &task) in tasks.iter().enumerate() {
                let reference = ref_rater[i][slot];
                let r_slot = core.slot_of(reference, task).ok_or(Error::NoFeasibleReference {
                    agent,
                    task,
                })?;
                let own_set = &stat_sets[i][slot];
                let ref_set = &stat_sets[reference.0][r_slot];
                let shared: Vec<TaskId> = own_set
                    .iter()
                    .filter(|t| ref_set.contains(t))
                    .copied()
                    .collect();
                if !shared.is_empty() {
                    return Err(Error::StatisticOverlap {
                        agent,
                        reference,
                        task,
                        shared,
                    });
                }
                slots.push(r_slot);
            }
            ref_slot.push(slots);
        }
        Ok(Assignment {
            core,
            ref_rater,
            stat_sets,
            ref_slot,
            d,
            scheme,
        })
    }

    /// Assembles without any validation, so validators can be exercised on
    /// deliberately corrupted instances.
    pub fn from_parts_unchecked(
        refs: RefAssignment,
        stat_sets: Vec<Vec<Vec<TaskId>>>,
        d: usize,
        scheme: Option<Scheme>,
    ) -> Self {
        let core = refs.core;
        let ref_rater = refs.ref_rater;
        let mut ref_slot = Vec::with_capacity(core.n_agents());
        for i in 0..core.n_agents() {
            let tasks = core.tasks_of(AgentId(i));
            let slots = tasks
                .iter()
                .enumerate()
                .map(|(slot, &task)| {
                    let reference = ref_rater[i].get(slot).copied().unwrap_or(AgentId(i));
                    core.slot_of(reference, task).unwrap_or(0)
                })
                .collect();
            ref_slot.push(slots);
        }
        Assignment {
            core,
            ref_rater,
            stat_sets,
            ref_slot,
            d,
            scheme,
        }
    }

    pub fn core(&self) -> &AssignmentCore {
        &self.core
    }

    pub fn n_agents(&self) -> usize {
        self.core.n_agents()
    }

    pub fn n_tasks(&self) -> usize {
        self.core.n_tasks()
    }

    pub fn d_tasks(&self) -> usize {
        self.core.d_tasks()
    }

    pub fn t_raters(&self) -> usize {
        self.core.t_raters()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn scheme(&self) -> Option<Scheme> {
        self.scheme
    }

    pub fn tasks_of(&self, agent: AgentId) -> &[TaskId] {
        self.core.tasks_of(agent)
    }

    pub fn agents_of(&self, task: TaskId) -> &[AgentId] {
        self.core.agents_of(task)
    }

    pub fn ref_rater(&self, agent: AgentId, task: TaskId) -> Option<AgentId> {
        let slot = self.core.slot_of(agent, task)?;
        Some(self.ref_rater[agent.0][slot])
    }

    pub(crate) fn ref_rater_at(&self, agent: usize, slot: usize) -> AgentId {
        self.ref_rater[agent][slot]
    }

    pub(crate) fn ref_slot_at(&self, agent: usize, slot: usize) -> usize {
        self.ref_slot[agent][slot]
    }

    /// The agent's own statistic set for the task.
    pub fn stat_set(&self, agent: AgentId, task: TaskId) -> Option<&[TaskId]> {
        let slot = self.core.slot_of(agent, task)?;
        Some(self.stat_sets[agent.0][slot].as_slice())
    }

    pub(crate) fn stat_set_at(&self, agent: usize, slot: usize) -> &[TaskId] {
        &self.stat_sets[agent][slot]
    }

    /// Both statistic sets entering the pair's reward: the agent's own and
    /// her reference rater's, for the given task.
    pub fn stat_sets(&self, agent: AgentId, task: TaskId) -> Option<(&[TaskId], &[TaskId])> {
        let slot = self.core.slot_of(agent, task)?;
        let reference = self.ref_rater[agent.0][slot];
        let r_slot = self.ref_slot[agent.0][slot];
        Some((
            self.stat_sets[agent.0][slot].as_slice(),
            self.stat_sets[reference.0][r_slot].as_slice(),
        ))
    }

    /// Every (agent, task) pair the mechanism scores, in deterministic order.
    pub fn support(&self) -> impl Iterator<Item = (AgentId, TaskId)> + '_ {
        (0..self.n_agents()).flat_map(move |i| {
            self.core
                .tasks_of(AgentId(i))
                .iter()
                .map(move |&t| (AgentId(i), t))
        })
    }
}

/// For each (agent, task): the tasks whose statistic sets consume that
/// report, and their count.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedSets {
    t_of: BTreeMap<(AgentId, TaskId), Vec<TaskId>>,
}

impl InducedSets {
    pub fn t_of(&self, agent: AgentId, task: TaskId) -> Option<&[TaskId]> {
        self.t_of.get(&(agent, task)).map(|v| v.as_slice())
    }

    pub fn d_of(&self, agent: AgentId, task: TaskId) -> Option<usize> {
        self.t_of.get(&(agent, task)).map(|v| v.len())
    }
}

/// Inverts the statistic-set relation: task j' lands in the induced set of
/// (i, j) exactly when j appears in the statistic set of (i, j').
pub fn induced_sets(assignment: &Assignment) -> InducedSets {
    let mut t_of: BTreeMap<(AgentId, TaskId), Vec<TaskId>> = BTreeMap::new();
    for (agent, task) in assignment.support() {
        t_of.entry((agent, task)).or_default();
    }
    for (agent, task) in assignment.support() {
        if let Some(set) = assignment.stat_set(agent, task) {
            for &member in set {
                t_of.entry((agent, member)).or_default().push(task);
            }
        }
    }
    InducedSets { t_of }
}

/// Binary reports over exactly the assignment support.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportSet {
    grid: Vec<Option<bool>>,
    n_tasks: usize,
}

impl ReportSet {
    /// Builds a report set whose domain must equal the assignment support.
    pub fn new(assignment: &Assignment, entries: &[(AgentId, TaskId, bool)]) -> Result<Self> {
        let mut rs = ReportSet::empty(assignment.n_agents(), assignment.n_tasks());
        for &(agent, task, value) in entries {
            if assignment.core.slot_of(agent, task).is_none() {
                return Err(Error::ReportDomainMismatch(format!(
                    "agent {agent} does not rate task {task}"
                )));
            }
            if rs.get(agent, task).is_some() {
                return Err(Error::ReportDomainMismatch(format!(
                    "duplicate report for agent {agent}, task {task}"
                )));
            }
            rs.set(agent, task, value);
        }
        for (agent, task) in assignment.support() {
            if rs.get(agent, task).is_none() {
                return Err(Error::MissingReport { agent, task });
            }
        }
        Ok(rs)
    }

    pub(crate) fn empty(n_agents: usize, n_tasks: usize) -> Self {
        ReportSet {
            grid: vec![None; n_agents * n_tasks],
            n_tasks,
        }
    }

    pub(crate) fn set(&mut self, agent: AgentId, task: TaskId, value: bool) {
        self.grid[agent.0 * self.n_tasks + task.0] = Some(value);
    }

    #[inline]
    pub fn get(&self, agent: AgentId, task: TaskId) -> Option<bool> {
        self.grid[agent.0 * self.n_tasks + task.0]
    }
}

/// Agreement, statistic, and net terms of one scored pair.
///
/// The statistic numerator is kept in integers: with `a` of the agent's `d`
/// statistic reports high and `b` of the reference's, the statistic term is
/// `(a*b + (d-a)*(d-b)) / d^2`, and the net reward's numerator is an exact
/// integer, so blind-agreement profiles cancel to exactly zero.
#[inline]
pub(crate) fn reward_terms(
    own: bool,
    reference: bool,
    own_high: usize,
    ref_high: usize,
    d: usize,
) -> (f64, f64, f64) {
    let d2 = (d * d) as i64;
    let agree = own == reference;
    let num = (own_high * ref_high + (d - own_high) * (d - ref_high)) as i64;
    let a = if agree { 1.0 } else { 0.0 };
    let b = num as f64 / d2 as f64;
    let r = ((if agree { d2 } else { 0 }) - num) as f64 / d2 as f64;
    (a, b, r)
}

/// One scored (agent, task) pair in a reward breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RewardEntry {
    pub agent_id: AgentId,
    pub task_id: TaskId,
    pub ref_rater: AgentId,
    /// The agent's report on the task (1 = H, 0 = L).
    pub own_report: u8,
    /// The reference rater's report on the task.
    pub ref_report: u8,
    /// Agreement term, 0 or 1.
    pub agreement: f64,
    /// Statistic term in [0, 1].
    pub statistic: f64,
    /// Net reward in [-1, 1].
    pub reward: f64,
}

/// Per-pair and per-agent rewards, plus scaled payments.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardBreakdown {
    entries: Vec<RewardEntry>,
    totals: Vec<f64>,
    payments: Vec<f64>,
    tasks_per_agent: Vec<usize>,
    beta: f64,
    shift: PaymentShift,
}

/// How payments are made nonnegative per realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PaymentShift {
    /// Pay beta times the raw total.
    None,
    /// Add 1 to each per-task reward before scaling; since the statistic
    /// term never exceeds 1, the result is nonnegative on every realization.
    PlusOnePerTask,
}

impl RewardBreakdown {
    pub fn entries(&self) -> &[RewardEntry] {
        &self.entries
    }

    /// Net reward total of the agent over her tasks.
    pub fn total(&self, agent: AgentId) -> f64 {
        self.totals[agent.0]
    }

    pub fn totals(&self) -> &[f64] {
        &self.totals
    }

    /// Scaled (and possibly shifted) payment of the agent.
    pub fn payment(&self, agent: AgentId) -> f64 {
        self.payments[agent.0]
    }

    pub fn payments(&self) -> &[f64] {
        &self.payments
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn shift(&self) -> PaymentShift {
        self.shift
    }
}

/// Evaluates the reward rule exactly on one realization of the reports.
pub fn compute_rewards(assignment: &Assignment, reports: &ReportSet) -> Result<RewardBreakdown> {
    let n = assignment.n_agents();
    let d = assignment.d();
    let mut entries = Vec::with_capacity(n * assignment.d_tasks());
    let mut totals = vec![0.0; n];
    let mut tasks_per_agent = vec![0usize; n];

    let high_count = |agent: AgentId, set: &[TaskId]| -> Result<usize> {
        let mut count = 0;
        for &t in set {
            match reports.get(agent, t) {
                Some(true) => count += 1,
                Some(false) => {}
                None => return Err(Error::MissingReport { agent, task: t }),
            }
        }
        Ok(count)
    };

    for i in 0..n {
        let agent = AgentId(i);
        let tasks = assignment.tasks_of(agent);
        tasks_per_agent[i] = tasks.len();
        for (slot, &task) in tasks.iter().enumerate() {
            let reference = assignment.ref_rater_at(i, slot);
            let own = reports
                .get(agent, task)
                .ok_or(Error::MissingReport { agent, task })?;
            let ref_report = reports.get(reference, task).ok_or(Error::MissingReport {
                agent: reference,
                task,
            })?;
            let own_set = assignment.stat_set_at(i, slot);
            let ref_set = assignment.stat_set_at(reference.0, assignment.ref_slot_at(i, slot));
            let own_high = high_count(agent, own_set)?;
            let ref_high = high_count(reference, ref_set)?;
            let (a, b, r) = reward_terms(own, ref_report, own_high, ref_high, d);
            totals[i] += r;
            entries.push(RewardEntry {
                agent_id: agent,
                task_id: task,
                ref_rater: reference,
                own_report: own as u8,
                ref_report: ref_report as u8,
                agreement: a,
                statistic: b,
                reward: r,
            });
        }
    }
    let payments = totals.clone();
    Ok(RewardBreakdown {
        entries,
        totals,
        payments,
        tasks_per_agent,
        beta: 1.0,
        shift: PaymentShift::None,
    })
}

/// Applies the scaling factor and optional nonnegativity shift:
/// `payment(i) = beta * (total(i) + shift)`, with the shift adding 1 per
/// scored task.
pub fn scaled_payment(
    breakdown: &RewardBreakdown,
    beta: f64,
    shift: PaymentShift,
) -> Result<RewardBreakdown> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::NegativeBeta(beta));
    }
    let mut out = breakdown.clone();
    out.beta = beta;
    out.shift = shift;
    for (i, total) in out.totals.iter().enumerate() {
        let shift_amount = match shift {
            PaymentShift::None => 0.0,
            PaymentShift::PlusOnePerTask => out.tasks_per_agent[i] as f64,
        };
        out.payments[i] = beta * (total + shift_amount);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two mutually referencing pairs: agents 0..3, tasks 0..3,
    /// J(0)={0,1}, J(1)={2,3}, J(2)={0,2}, J(3)={1,3}; on each task the
    /// reference is the unique other rater.
    pub(crate) fn pair_fixture(scheme: Scheme) -> Assignment {
        let tasks_of = vec![
            vec![TaskId(0), TaskId(1)],
            vec![TaskId(2), TaskId(3)],
            vec![TaskId(0), TaskId(2)],
            vec![TaskId(1), TaskId(3)],
        ];
        let core = AssignmentCore::new(4, tasks_of).unwrap();
        let refs = vec![
            vec![AgentId(2), AgentId(3)],
            vec![AgentId(2), AgentId(3)],
            vec![AgentId(0), AgentId(1)],
            vec![AgentId(0), AgentId(1)],
        ];
        let refs = RefAssignment::new(core, refs).unwrap();
        build_statistic_sets(refs, scheme).unwrap()
    }

    /// Six agents on nine tasks, three tasks each; every reference shares
    /// exactly one task, so both schemes are feasible (d = 1 or d = 2).
    fn six_agent_fixture(scheme: Scheme) -> Assignment {
        let tasks_of = vec![
            vec![TaskId(0), TaskId(1), TaskId(2)],
            vec![TaskId(3), TaskId(4), TaskId(5)],
            vec![TaskId(0), TaskId(3), TaskId(6)],
            vec![TaskId(1), TaskId(4), TaskId(7)],
            vec![TaskId(2), TaskId(5), TaskId(8)],
            vec![TaskId(6), TaskId(7), TaskId(8)],
        ];
        let core = AssignmentCore::new(9, tasks_of).unwrap();
        let refs = vec![
            vec![AgentId(2), AgentId(3), AgentId(4)],
            vec![AgentId(2), AgentId(3), AgentId(4)],
            vec![AgentId(0), AgentId(1), AgentId(5)],
            vec![AgentId(0), AgentId(1), AgentId(5)],
            vec![AgentId(0), AgentId(1), AgentId(5)],
            vec![AgentId(2), AgentId(3), AgentId(4)],
        ];
        build_statistic_sets(RefAssignment::new(core, refs).unwrap(), scheme).unwrap()
    }

    fn all_reports(assignment: &Assignment, value: bool) -> ReportSet {
        let entries: Vec<_> = assignment
            .support()
            .map(|(a, t)| (a, t, value))
            .collect();
        ReportSet::new(assignment, &entries).unwrap()
    }

    #[test]
    fn ring_statistic_sets_use_next_task() {
        let tasks_of = vec![
            vec![TaskId(0), TaskId(1), TaskId(2)],
            vec![TaskId(3), TaskId(4), TaskId(5)],
            vec![TaskId(0), TaskId(3), TaskId(6)],
            vec![TaskId(1), TaskId(4), TaskId(7)],
            vec![TaskId(2), TaskId(5), TaskId(8)],
            vec![TaskId(6), TaskId(7), TaskId(8)],
        ];
        let core = AssignmentCore::new(9, tasks_of).unwrap();
        let refs = vec![
            vec![AgentId(2), AgentId(3), AgentId(4)],
            vec![AgentId(2), AgentId(3), AgentId(4)],
            vec![AgentId(0), AgentId(1), AgentId(5)],
            vec![AgentId(0), AgentId(1), AgentId(5)],
            vec![AgentId(0), AgentId(1), AgentId(5)],
            vec![AgentId(2), AgentId(3), AgentId(4)],
        ];
        let asg = build_statistic_sets(RefAssignment::new(core, refs).unwrap(), Scheme::Ring)
            .unwrap();
        assert_eq!(asg.d(), 1);
        assert_eq!(asg.stat_set(AgentId(0), TaskId(0)).unwrap(), &[TaskId(1)]);
        assert_eq!(asg.stat_set(AgentId(0), TaskId(1)).unwrap(), &[TaskId(2)]);
        assert_eq!(asg.stat_set(AgentId(0), TaskId(2)).unwrap(), &[TaskId(0)]);

        let induced = induced_sets(&asg);
        assert_eq!(
            induced.t_of(AgentId(0), TaskId(0)).unwrap(),
            &[TaskId(2)]
        );
        assert_eq!(
            induced.t_of(AgentId(0), TaskId(1)).unwrap(),
            &[TaskId(0)]
        );
        assert_eq!(
            induced.t_of(AgentId(0), TaskId(2)).unwrap(),
            &[TaskId(1)]
        );
        for (agent, task) in asg.support() {
            assert_eq!(induced.d_of(agent, task), Some(1));
        }
    }

    #[test]
    fn full_scheme_on_two_tasks_matches_ring() {
        let ring = pair_fixture(Scheme::Ring);
        let full = pair_fixture(Scheme::Full);
        assert_eq!(ring.d(), 1);
        assert_eq!(full.d(), 1);
        for (agent, task) in ring.support() {
            assert_eq!(ring.stat_set(agent, task), full.stat_set(agent, task));
        }
        // d_ij = D - 1 for the full scheme.
        let induced = induced_sets(&full);
        for (agent, task) in full.support() {
            assert_eq!(induced.d_of(agent, task), Some(full.d_tasks() - 1));
        }
    }

    #[test]
    fn induced_counts_double_count_to_d_times_tasks() {
        for scheme in [Scheme::Ring, Scheme::Full] {
            let asg = pair_fixture(scheme);
            let induced = induced_sets(&asg);
            for i in 0..asg.n_agents() {
                let agent = AgentId(i);
                let total: usize = asg
                    .tasks_of(agent)
                    .iter()
                    .map(|&t| induced.d_of(agent, t).unwrap())
                    .sum();
                assert_eq!(total, asg.d() * asg.d_tasks());
            }
        }
    }

    #[test]
    fn overlapping_reference_sets_are_rejected() {
        // Agents 0 and 1 share two tasks; with the full scheme the statistic
        // sets must overlap, which violates the non-overlap requirement.
        let tasks_of = vec![
            vec![TaskId(0), TaskId(1), TaskId(2)],
            vec![TaskId(0), TaskId(1), TaskId(3)],
            vec![TaskId(2), TaskId(3), TaskId(4)],
            vec![TaskId(0), TaskId(4), TaskId(5)],
            vec![TaskId(1), TaskId(2), TaskId(5)],
            vec![TaskId(3), TaskId(4), TaskId(5)],
        ];
        let core = AssignmentCore::new(6, tasks_of).unwrap();
        let refs = vec![
            vec![AgentId(1), AgentId(1), AgentId(2)],
            vec![AgentId(0), AgentId(0), AgentId(2)],
            vec![AgentId(0), AgentId(1), AgentId(3)],
            vec![AgentId(1), AgentId(2), AgentId(4)],
            vec![AgentId(0), AgentId(0), AgentId(3)],
            vec![AgentId(1), AgentId(2), AgentId(3)],
        ];
        let err = build_statistic_sets(RefAssignment::new(core, refs).unwrap(), Scheme::Full)
            .unwrap_err();
        match err {
            Error::StatisticOverlap { agent, reference, .. } => {
                assert_eq!(agent, AgentId(0));
                assert_eq!(reference, AgentId(1));
            }
            other => panic!("expected overlap error, got {other:?}"),
        }
    }

    #[test]
    fn blind_profiles_cancel_exactly() {
        for asg in [
            pair_fixture(Scheme::Ring),
            pair_fixture(Scheme::Full),
            six_agent_fixture(Scheme::Ring),
            six_agent_fixture(Scheme::Full),
        ] {
            for value in [true, false] {
                let reports = all_reports(&asg, value);
                let breakdown = compute_rewards(&asg, &reports).unwrap();
                for entry in breakdown.entries() {
                    assert_eq!(entry.agreement, 1.0);
                    assert_eq!(entry.statistic, 1.0);
                    assert_eq!(entry.reward, 0.0);
                }
            }
        }
    }

    #[test]
    fn hand_evaluated_rewards_with_two_report_statistics() {
        // d = 2: agent 0 and its reference agent 2 both report H on task 0;
        // agent 0's other reports are (H, L), agent 2's are (H, H).
        let asg = six_agent_fixture(Scheme::Full);
        assert_eq!(asg.d(), 2);
        let reports: Vec<_> = asg
            .support()
            .map(|(a, t)| {
                let value = match (a.0, t.0) {
                    (0, 0) => true,
                    (0, 1) => true,
                    (0, 2) => false,
                    (2, _) => true,
                    _ => false,
                };
                (a, t, value)
            })
            .collect();
        let reports = ReportSet::new(&asg, &reports).unwrap();
        let breakdown = compute_rewards(&asg, &reports).unwrap();
        let entry = breakdown
            .entries()
            .iter()
            .find(|e| e.agent_id == AgentId(0) && e.task_id == TaskId(0))
            .unwrap();
        assert_eq!(entry.ref_rater, AgentId(2));
        assert_eq!(entry.agreement, 1.0);
        // Own mean 1/2, reference mean 1: B = 0.5*1 + 0.5*0 = 0.5.
        assert_eq!(entry.statistic, 0.5);
        assert_eq!(entry.reward, 0.5);
    }

    #[test]
    fn reward_terms_hand_examples() {
        // X=1, X'=1, d=2, own statistic reports (1,0), reference's (1,1).
        let (a, b, r) = reward_terms(true, true, 1, 2, 2);
        assert_eq!(a, 1.0);
        assert_eq!(b, 0.5);
        assert_eq!(r, 0.5);
        // X=1, X'=0, both statistic means 1/2.
        let (a, b, r) = reward_terms(true, false, 1, 1, 2);
        assert_eq!(a, 0.0);
        assert_eq!(b, 0.5);
        assert_eq!(r, -0.5);
    }

    #[test]
    fn missing_reports_are_hard_errors() {
        let asg = pair_fixture(Scheme::Ring);
        let mut entries: Vec<_> = asg.support().map(|(a, t)| (a, t, true)).collect();
        entries.pop();
        assert!(matches!(
            ReportSet::new(&asg, &entries),
            Err(Error::MissingReport { .. })
        ));
        // Reports outside the support are rejected too.
        let mut bad = asg.support().map(|(a, t)| (a, t, true)).collect::<Vec<_>>();
        bad.push((AgentId(0), TaskId(3), true));
        assert!(matches!(
            ReportSet::new(&asg, &bad),
            Err(Error::ReportDomainMismatch(_))
        ));
    }

    #[test]
    fn payments_scale_and_shift() {
        let asg = pair_fixture(Scheme::Ring);
        let reports = all_reports(&asg, true);
        let breakdown = compute_rewards(&asg, &reports).unwrap();
        let paid = scaled_payment(&breakdown, 2.0, PaymentShift::None).unwrap();
        for i in 0..asg.n_agents() {
            assert_eq!(paid.payment(AgentId(i)), 0.0);
        }
        let paid = scaled_payment(&breakdown, 1.5, PaymentShift::PlusOnePerTask).unwrap();
        for i in 0..asg.n_agents() {
            // Blind-H profile: zero net reward, plus 1 per task, times beta.
            assert_eq!(paid.payment(AgentId(i)), 1.5 * 2.0);
        }
        assert!(scaled_payment(&breakdown, -0.5, PaymentShift::None).is_err());
    }

    #[test]
    fn worst_case_rewards_meet_the_shift_floor() {
        // Agent 0 disagrees with its reference everywhere while the
        // statistic means sit at opposite corners: reward -1 per task.
        let asg = pair_fixture(Scheme::Ring);
        let entries = vec![
            (AgentId(0), TaskId(0), true),
            (AgentId(0), TaskId(1), false),
            (AgentId(1), TaskId(2), true),
            (AgentId(1), TaskId(3), false),
            (AgentId(2), TaskId(0), false),
            (AgentId(2), TaskId(2), false),
            (AgentId(3), TaskId(1), true),
            (AgentId(3), TaskId(3), true),
        ];
        let reports = ReportSet::new(&asg, &entries).unwrap();
        let breakdown = compute_rewards(&asg, &reports).unwrap();
        // (0, task0): own=1, ref(2)=0 -> A=0; own stats: task1=0; ref stats: task2=0 -> B=1.
        assert_eq!(breakdown.entries()[0].reward, -1.0);
        let paid = scaled_payment(&breakdown, 1.0, PaymentShift::PlusOnePerTask).unwrap();
        for i in 0..4 {
            assert!(paid.payment(AgentId(i)) >= 0.0);
        }
    }

    #[test]
    fn per_entry_bounds_under_random_reports() {
        use crate::streams::{Stage, Stream};
        for scheme in [Scheme::Ring, Scheme::Full] {
            let asg = six_agent_fixture(scheme);
            let mut stream = Stream::new(77, Stage::Fuzz, &[scheme as u64]);
            for _ in 0..500 {
                let entries: Vec<_> = asg
                    .support()
                    .map(|(a, t)| (a, t, stream.bernoulli(0.5)))
                    .collect();
                let reports = ReportSet::new(&asg, &entries).unwrap();
                let breakdown = compute_rewards(&asg, &reports).unwrap();
                for e in breakdown.entries() {
                    assert!(e.agreement == 0.0 || e.agreement == 1.0);
                    assert!((0.0..=1.0).contains(&e.statistic));
                    assert!((-1.0..=1.0).contains(&e.reward));
                    assert_eq!(e.reward, e.agreement - e.statistic);
                }
            }
        }
    }

    #[test]
    fn permutation_equivariance() {
        use crate::streams::{Stage, Stream};
        // Relabel agents and tasks by fixed permutations; rewards must map
        // across entry-for-entry.
        let asg = pair_fixture(Scheme::Ring);
        let agent_map = [2usize, 0, 3, 1];
        let task_map = [1usize, 3, 0, 2];

        let tasks_of_relabeled: Vec<Vec<TaskId>> = {
            let mut out = vec![Vec::new(); 4];
            for i in 0..4 {
                out[agent_map[i]] = asg
                    .tasks_of(AgentId(i))
                    .iter()
                    .map(|t| TaskId(task_map[t.0]))
                    .collect();
            }
            out
        };
        let core = AssignmentCore::new(4, tasks_of_relabeled).unwrap();
        let refs_relabeled: Vec<Vec<AgentId>> = {
            let mut out = vec![Vec::new(); 4];
            for i in 0..4 {
                out[agent_map[i]] = asg
                    .tasks_of(AgentId(i))
                    .iter()
                    .map(|&t| AgentId(agent_map[asg.ref_rater(AgentId(i), t).unwrap().0]))
                    .collect();
            }
            out
        };
        let relabeled =
            build_statistic_sets(RefAssignment::new(core, refs_relabeled).unwrap(), Scheme::Ring)
                .unwrap();

        let mut stream = Stream::new(13, Stage::Fuzz, &[]);
        for _ in 0..200 {
            let entries: Vec<_> = asg
                .support()
                .map(|(a, t)| (a, t, stream.bernoulli(0.5)))
                .collect();
            let reports = ReportSet::new(&asg, &entries).unwrap();
            let mapped: Vec<_> = entries
                .iter()
                .map(|&(a, t, v)| (AgentId(agent_map[a.0]), TaskId(task_map[t.0]), v))
                .collect();
            let mapped_reports = ReportSet::new(&relabeled, &mapped).unwrap();

            let base = compute_rewards(&asg, &reports).unwrap();
            let moved = compute_rewards(&relabeled, &mapped_reports).unwrap();
            for i in 0..4 {
                let a = base.total(AgentId(i));
                let b = moved.total(AgentId(agent_map[i]));
                assert!((a - b).abs() < 1e-15);
            }
        }
    }
}
