//! Block construction of task assignments, reference-rater selection, and
//! feasibility validators.
//!
//! Tasks are split into blocks of D consecutive tasks and agents into T
//! blocks of n/T agents. After a seeded random permutation of agent
//! identities, first-block agents each take one whole task block, and each
//! later block's agents take arithmetic progressions across task blocks.
//! With m >= D^2 a later-block agent's tasks all land in distinct task
//! blocks, so she shares exactly one task with the first-block agent of any
//! of her tasks, which is exactly what the all-but-one statistic scheme
//! needs from a reference rater.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanism::{Assignment, AssignmentCore, RefAssignment, Scheme};
use crate::model::{AgentId, TaskId};
use crate::streams::{Stage, Stream};

/// Size parameters of a block assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockParams {
    /// Number of tasks.
    pub m: usize,
    /// Number of agents.
    pub n: usize,
    /// Tasks per agent.
    pub d_tasks: usize,
    /// Raters per task.
    pub t_raters: usize,
}

impl BlockParams {
    pub fn new(m: usize, n: usize, d_tasks: usize, t_raters: usize) -> Result<Self> {
        let fail = |reason: &str| Error::InvalidBlockParams {
            m,
            n,
            d_tasks,
            t_raters,
            reason: reason.to_string(),
        };
        if m == 0 || n == 0 || d_tasks == 0 || t_raters == 0 {
            return Err(fail("all parameters must be positive"));
        }
        if d_tasks < 2 {
            return Err(fail("agents need at least 2 tasks for a statistic set"));
        }
        if !m.is_multiple_of(d_tasks) {
            return Err(fail("m/D is not integral"));
        }
        if !n.is_multiple_of(t_raters) {
            return Err(fail("n/T is not integral"));
        }
        if m * t_raters != n * d_tasks {
            return Err(fail("total capacities differ: m*T must equal n*D"));
        }
        if t_raters < 2 {
            return Err(fail(
                "each task needs at least 2 raters so references exist",
            ));
        }
        if t_raters > n {
            return Err(fail("T cannot exceed the number of agents"));
        }
        Ok(BlockParams {
            m,
            n,
            d_tasks,
            t_raters,
        })
    }

    /// Agents per agent block (= task blocks).
    pub fn block_width(&self) -> usize {
        self.n / self.t_raters
    }
}

/// The block construction under one agent permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPlan {
    params: BlockParams,
    /// `permutation[position] = agent identity` occupying that position.
    permutation: Vec<usize>,
}

impl BlockPlan {
    /// Plan with a seeded uniform random permutation of agent identities.
    pub fn seeded(params: BlockParams, seed: u64) -> Self {
        BlockPlan {
            params,
            permutation: Stream::permutation(seed, params.n),
        }
    }

    /// Plan with an explicit permutation (`permutation[position] = agent`).
    pub fn with_permutation(params: BlockParams, permutation: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; params.n];
        if permutation.len() != params.n {
            return Err(Error::InvalidPermutation {
                expected: params.n,
                got: permutation.len(),
            });
        }
        for &agent in &permutation {
            if agent >= params.n || seen[agent] {
                return Err(Error::InvalidPermutation {
                    expected: params.n,
                    got: permutation.len(),
                });
            }
            seen[agent] = true;
        }
        Ok(BlockPlan {
            params,
            permutation,
        })
    }

    pub fn params(&self) -> &BlockParams {
        &self.params
    }

    /// Task list of the agent at a raw (pre-permutation) position.
    fn position_tasks(&self, position: usize) -> Vec<TaskId> {
        let width = self.params.block_width();
        let block = position / width;
        let offset = position % width; // i' - 1 in 0-based form
        if block == 0 {
            // One whole task block.
            (0..self.params.d_tasks)
                .map(|k| TaskId(offset * self.params.d_tasks + k))
                .collect()
        } else {
            // Arithmetic progression across task blocks.
            (0..self.params.d_tasks)
                .map(|k| TaskId(offset + k * width))
                .collect()
        }
    }

    /// Builds the who-rates-what core under this plan's permutation.
    pub fn build(&self) -> AssignmentCore {
        let n = self.params.n;
        let mut tasks_of = vec![Vec::new(); n];
        let mut blocks = vec![0usize; n];
        let width = self.params.block_width();
        for position in 0..n {
            let agent = self.permutation[position];
            tasks_of[agent] = self.position_tasks(position);
            blocks[agent] = position / width;
        }
        AssignmentCore::new(self.params.m, tasks_of)
            .expect("block construction always yields uniform capacities")
            .with_blocks(blocks)
    }
}

/// Builds the who-rates-what core for the given sizes under a seeded random
/// permutation of agent identities.
pub fn build_block_assignment(params: BlockParams, seed: u64) -> AssignmentCore {
    BlockPlan::seeded(params, seed).build()
}

fn ring_successor(core: &AssignmentCore, agent: AgentId, task: TaskId) -> Option<TaskId> {
    let tasks = core.tasks_of(agent);
    let slot = tasks.iter().position(|&t| t == task)?;
    Some(tasks[(slot + 1) % tasks.len()])
}

fn shared_tasks(core: &AssignmentCore, a: AgentId, b: AgentId) -> Vec<TaskId> {
    core.tasks_of(a)
        .iter()
        .filter(|t| core.tasks_of(b).contains(t))
        .copied()
        .collect()
}

/// Selects a reference rater for every (agent, task) pair.
///
/// Under the all-but-one scheme on a block-built core, later-block agents
/// get the unique first-block rater of the task, and first-block agents get
/// the task's second-block rater; the single-overlap property holds for both
/// directions once m >= D^2. Under the ring scheme (or on cores without
/// block structure) the choice is uniform at random, seeded, among the
/// raters whose statistic set stays disjoint from the agent's.
pub fn choose_reference_raters(
    core: &AssignmentCore,
    scheme: Scheme,
    seed: u64,
) -> Result<RefAssignment> {
    let has_blocks = core.agent_block(AgentId(0)).is_some();
    if scheme == Scheme::Full {
        let d = core.d_tasks();
        if core.n_tasks() < d * d {
            return Err(Error::FullSchemeTooFewTasks {
                m: core.n_tasks(),
                d_sq: d * d,
            });
        }
    }

    let mut ref_rater = Vec::with_capacity(core.n_agents());
    for i in 0..core.n_agents() {
        let agent = AgentId(i);
        let mut per_agent = Vec::with_capacity(core.tasks_of(agent).len());
        for &task in core.tasks_of(agent) {
            let chosen = if scheme == Scheme::Full && has_blocks {
                let block = core.agent_block(agent).unwrap();
                let pick = if block > 0 {
                    // The unique first-block rater of this task.
                    core.agents_of(task)
                        .iter()
                        .copied()
                        .find(|&r| core.agent_block(r) == Some(0))
                } else {
                    // The task's second-block rater; single overlap holds in
                    // this direction by the same distinct-blocks argument.
                    core.agents_of(task)
                        .iter()
                        .copied()
                        .find(|&r| core.agent_block(r) == Some(1))
                };
                pick.filter(|&r| r != agent && shared_tasks(core, agent, r).len() == 1)
            } else {
                // Uniform seeded choice among feasible raters.
                let feasible: Vec<AgentId> = core
                    .agents_of(task)
                    .iter()
                    .copied()
                    .filter(|&r| r != agent)
                    .filter(|&r| match scheme {
                        Scheme::Full => shared_tasks(core, agent, r).len() == 1,
                        Scheme::Ring => {
                            ring_successor(core, agent, task) != ring_successor(core, r, task)
                        }
                    })
                    .collect();
                if feasible.is_empty() {
                    None
                } else {
                    let mut stream = Stream::new(
                        seed,
                        Stage::ReferenceChoice,
                        &[agent.0 as u64, task.0 as u64],
                    );
                    Some(feasible[stream.below(feasible.len())])
                }
            };
            per_agent.push(chosen.ok_or(Error::NoFeasibleReference { agent, task })?);
        }
        ref_rater.push(per_agent);
    }
    RefAssignment::new(core.clone(), ref_rater)
}

/// One defect found by [`validate_assignment`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    AgentCapacity {
        agent: AgentId,
        got: usize,
        expected: usize,
    },
    TaskCapacity {
        task: TaskId,
        got: usize,
        expected: usize,
    },
    BadReference {
        agent: AgentId,
        task: TaskId,
        reference: AgentId,
        reason: String,
    },
    StatSetSize {
        agent: AgentId,
        task: TaskId,
        got: usize,
        expected: usize,
    },
    StatSetMember {
        agent: AgentId,
        task: TaskId,
        member: TaskId,
        reason: String,
    },
    StatOverlap {
        agent: AgentId,
        task: TaskId,
        reference: AgentId,
        shared: Vec<TaskId>,
    },
    ReferenceOverlapNotSingle {
        agent: AgentId,
        reference: AgentId,
        shared: Vec<TaskId>,
    },
    InducedCountMismatch {
        agent: AgentId,
        task: TaskId,
        got: usize,
        expected: usize,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::AgentCapacity { agent, got, expected } => {
                write!(f, "agent {agent} rates {got} tasks, expected {expected}")
            }
            Violation::TaskCapacity { task, got, expected } => {
                write!(f, "task {task} has {got} raters, expected {expected}")
            }
            Violation::BadReference { agent, task, reference, reason } => {
                write!(f, "reference {reference} for agent {agent} on task {task}: {reason}")
            }
            Violation::StatSetSize { agent, task, got, expected } => {
                write!(f, "statistic set of ({agent}, {task}) has {got} tasks, expected {expected}")
            }
            Violation::StatSetMember { agent, task, member, reason } => {
                write!(f, "statistic set of ({agent}, {task}) contains {member}: {reason}")
            }
            Violation::StatOverlap { agent, task, reference, shared } => {
                write!(
                    f,
                    "statistic sets of agent {agent} and reference {reference} on task {task} share {shared:?}"
                )
            }
            Violation::ReferenceOverlapNotSingle { agent, reference, shared } => {
                write!(
                    f,
                    "agent {agent} and reference {reference} share {shared:?}; the all-but-one scheme needs exactly one shared task"
                )
            }
            Violation::InducedCountMismatch { agent, task, got, expected } => {
                write!(
                    f,
                    "report of ({agent}, {task}) feeds {got} statistic sets, expected {expected}"
                )
            }
        }
    }
}

/// Outcome of validating an assignment against the mechanism's feasibility
/// requirements.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            writeln!(f, "assignment valid")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

/// Checks capacities, reference membership, statistic-set requirements, the
/// single-overlap condition for the all-but-one scheme, and that every task
/// feeds exactly d statistic sets. Reports violations instead of erroring.
pub fn validate_assignment(assignment: &Assignment, scheme: Scheme) -> ValidationReport {
    let mut violations = Vec::new();
    let core = assignment.core();
    let d_tasks = core.d_tasks();
    let t_raters = core.t_raters();
    let expected_d = match scheme {
        Scheme::Ring => 1,
        Scheme::Full => d_tasks.saturating_sub(1),
    };

    for i in 0..core.n_agents() {
        let agent = AgentId(i);
        let got = core.tasks_of(agent).len();
        if got != d_tasks {
            violations.push(Violation::AgentCapacity {
                agent,
                got,
                expected: d_tasks,
            });
        }
    }
    for j in 0..core.n_tasks() {
        let task = TaskId(j);
        let got = core.agents_of(task).len();
        if got != t_raters {
            violations.push(Violation::TaskCapacity {
                task,
                got,
                expected: t_raters,
            });
        }
    }

    for i in 0..core.n_agents() {
        let agent = AgentId(i);
        for &task in core.tasks_of(agent) {
            let reference = match assignment.ref_rater(agent, task) {
                Some(r) => r,
                None => continue,
            };
            if reference == agent {
                violations.push(Violation::BadReference {
                    agent,
                    task,
                    reference,
                    reason: "agent cannot reference herself".into(),
                });
                continue;
            }
            if !core.agents_of(task).contains(&reference) {
                violations.push(Violation::BadReference {
                    agent,
                    task,
                    reference,
                    reason: "reference does not rate the task".into(),
                });
                continue;
            }

            let own_set = match assignment.stat_set(agent, task) {
                Some(s) => s,
                None => continue,
            };
            if own_set.len() != expected_d {
                violations.push(Violation::StatSetSize {
                    agent,
                    task,
                    got: own_set.len(),
                    expected: expected_d,
                });
            }
            for &member in own_set {
                if member == task {
                    violations.push(Violation::StatSetMember {
                        agent,
                        task,
                        member,
                        reason: "contains the scored task itself".into(),
                    });
                } else if !core.tasks_of(agent).contains(&member) {
                    violations.push(Violation::StatSetMember {
                        agent,
                        task,
                        member,
                        reason: "not a task of the agent".into(),
                    });
                }
            }
            if let Some(ref_set) = assignment.stat_set(reference, task) {
                let shared: Vec<TaskId> = own_set
                    .iter()
                    .filter(|t| ref_set.contains(t))
                    .copied()
                    .collect();
                if !shared.is_empty() {
                    violations.push(Violation::StatOverlap {
                        agent,
                        task,
                        reference,
                        shared,
                    });
                }
            }
            if scheme == Scheme::Full {
                let shared = shared_tasks(core, agent, reference);
                if shared.len() != 1 {
                    violations.push(Violation::ReferenceOverlapNotSingle {
                        agent,
                        reference,
                        shared,
                    });
                }
            }
        }
    }

    // Every report must feed exactly d statistic sets of its own agent.
    let induced = crate::mechanism::induced_sets(assignment);
    for (agent, task) in assignment.support() {
        let got = induced.d_of(agent, task).unwrap_or(0);
        if got != assignment.d() {
            violations.push(Violation::InducedCountMismatch {
                agent,
                task,
                got,
                expected: assignment.d(),
            });
        }
    }

    ValidationReport { violations }
}

/// Mean and spread of reference-rater proficiency for one (agent, slot).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlotStat {
    pub agent: AgentId,
    pub slot: usize,
    pub mean: f64,
    pub stderr: f64,
}

/// Result of the reference-symmetry check.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryReport {
    pub cells: Vec<SlotStat>,
    /// (agent, slot) pairs whose mean reference proficiency strays from the
    /// agent's own across-slot mean by more than the sigma threshold.
    pub flagged: Vec<(AgentId, usize)>,
    pub seeds: usize,
    pub sigmas: f64,
}

/// Checks that no task slot systematically receives better or worse
/// reference raters than the agent's other slots: over many builder seeds,
/// each (agent, slot)'s empirical mean reference proficiency is compared to
/// the agent's across-slot mean at `sigmas` standard errors.
pub fn reference_symmetry_check(
    build: impl Fn(u64) -> Result<Assignment>,
    proficiencies: &[f64],
    seeds: &[u64],
    sigmas: f64,
) -> Result<SymmetryReport> {
    if seeds.is_empty() {
        return Err(Error::InvalidScenario(
            "symmetry check needs at least one seed".into(),
        ));
    }
    let first = build(seeds[0])?;
    let n = first.n_agents();
    let d = first.d_tasks();
    if proficiencies.len() != n {
        return Err(Error::InvalidScenario(format!(
            "{} proficiencies supplied for {n} agents",
            proficiencies.len()
        )));
    }
    let mut sum = vec![0.0f64; n * d];
    let mut sum_sq = vec![0.0f64; n * d];
    for &seed in seeds {
        let asg = build(seed)?;
        for i in 0..n {
            let agent = AgentId(i);
            for (slot, &task) in asg.tasks_of(agent).iter().enumerate() {
                let reference = asg
                    .ref_rater(agent, task)
                    .ok_or(Error::NoFeasibleReference { agent, task })?;
                let p = proficiencies[reference.0];
                sum[i * d + slot] += p;
                sum_sq[i * d + slot] += p * p;
            }
        }
    }

    let count = seeds.len() as f64;
    let mut cells = Vec::with_capacity(n * d);
    let mut flagged = Vec::new();
    for i in 0..n {
        let slot_means: Vec<f64> = (0..d).map(|k| sum[i * d + k] / count).collect();
        let agent_mean = slot_means.iter().sum::<f64>() / d as f64;
        for (k, &mean) in slot_means.iter().enumerate() {
            let var = (sum_sq[i * d + k] / count - mean * mean).max(0.0);
            let stderr = (var / count).sqrt();
            cells.push(SlotStat {
                agent: AgentId(i),
                slot: k,
                mean,
                stderr,
            });
            let dev = (mean - agent_mean).abs();
            if dev > sigmas * stderr && dev > 1e-12 {
                flagged.push((AgentId(i), k));
            }
        }
    }
    Ok(SymmetryReport {
        cells,
        flagged,
        seeds: seeds.len(),
        sigmas,
    })
}
