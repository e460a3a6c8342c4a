//! Strict TOML experiment configuration: unknown keys are errors, and every
//! section is validated before any module is invoked.

use serde::Deserialize;

use peerlab_core::assignment::{build_block_assignment, choose_reference_raters, BlockParams};
use peerlab_core::mechanism::{build_statistic_sets, Assignment, PaymentShift, Scheme};
use peerlab_core::model::{
    AgentId, AgentParams, Effort, Prior, ReportingMatrix, TaskStrategy,
};
use peerlab_core::simulation::{
    AgentPlan, EnumerationBudget, RefPolicy, Scenario, StrategyProfile, TrustedRaters,
};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub prior: PriorCfg,
    pub agents: Option<AgentsCfg>,
    pub assignment: Option<AssignmentCfg>,
    pub profile: Option<ProfileCfg>,
    pub mechanism: Option<MechanismCfg>,
    pub run: Option<RunCfg>,
    pub trusted: Option<TrustedCfg>,
    pub equilibrium: Option<EquilibriumCfg>,
    pub analytic: Option<AnalyticCfg>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorCfg {
    pub p_h: f64,
    pub p_l: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentsCfg {
    pub count: Option<usize>,
    pub max_proficiency: Option<f64>,
    pub effort_cost: Option<f64>,
    pub proficiencies: Option<Vec<f64>>,
    pub effort_costs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentCfg {
    pub m: usize,
    pub n: usize,
    pub d_tasks: usize,
    pub t_raters: usize,
    pub scheme: SchemeCfg,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeCfg {
    RingD1,
    FullDminus1,
}

impl From<SchemeCfg> for Scheme {
    fn from(value: SchemeCfg) -> Scheme {
        match value {
            SchemeCfg::RingD1 => Scheme::Ring,
            SchemeCfg::FullDminus1 => Scheme::Full,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileCfg {
    pub preset: PresetCfg,
    pub r: Option<f64>,
    pub delta: Option<f64>,
    pub agents: Option<Vec<ProfileAgentCfg>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetCfg {
    AllTruth,
    AllInvert,
    BlindH,
    BlindL,
    Coin,
    Mixture,
    Table,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileAgentCfg {
    pub agent: usize,
    pub effort: u8,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismCfg {
    pub beta: Option<f64>,
    pub shift: Option<ShiftCfg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftCfg {
    None,
    PlusOnePerTask,
}

impl From<ShiftCfg> for PaymentShift {
    fn from(value: ShiftCfg) -> PaymentShift {
        match value {
            ShiftCfg::None => PaymentShift::None,
            ShiftCfg::PlusOnePerTask => PaymentShift::PlusOnePerTask,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunCfg {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub estimator: Option<EstimatorCfg>,
    pub ref_policy: Option<RefPolicyCfg>,
    pub enumeration_budget_bits: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorCfg {
    Mc,
    Enumerate,
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefPolicyCfg {
    Fixed,
    ResamplePerTrial,
}

impl From<RefPolicyCfg> for RefPolicy {
    fn from(value: RefPolicyCfg) -> RefPolicy {
        match value {
            RefPolicyCfg::Fixed => RefPolicy::Fixed,
            RefPolicyCfg::ResamplePerTrial => RefPolicy::ResamplePerTrial,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrustedCfg {
    pub share: f64,
    pub proficiency: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumCfg {
    pub mode: Option<EquilibriumModeCfg>,
    pub tolerance: Option<f64>,
    pub mc_sigmas: Option<f64>,
    pub r_grid_step: Option<f64>,
    pub scan_step: Option<f64>,
    pub scan_proficiency: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumModeCfg {
    Verify,
    Scan,
    Escape,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticCfg {
    pub p: f64,
    pub q: Option<f64>,
    pub d_tasks: Option<usize>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config parse error: {e}")))
    }

    pub fn prior(&self) -> Result<Prior, CliError> {
        let p_l = self.prior.p_l.unwrap_or(1.0 - self.prior.p_h);
        Prior::new(self.prior.p_h, p_l).map_err(CliError::config)
    }

    pub fn assignment_cfg(&self) -> Result<&AssignmentCfg, CliError> {
        self.assignment
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [assignment] section".into()))
    }

    /// Builds the block assignment, reference raters, and statistic sets.
    /// An explicit [assignment] seed pins the construction; otherwise the
    /// run seed (or its CLI override) is used.
    pub fn build_assignment(&self, seed_override: Option<u64>) -> Result<Assignment, CliError> {
        let cfg = self.assignment_cfg()?;
        let params = BlockParams::new(cfg.m, cfg.n, cfg.d_tasks, cfg.t_raters)
            .map_err(CliError::validation)?;
        let seed = cfg
            .seed
            .or(seed_override)
            .or(self.run.as_ref().and_then(|r| r.seed))
            .unwrap_or(0);
        let scheme: Scheme = cfg.scheme.into();
        let core = build_block_assignment(params, seed);
        let refs = choose_reference_raters(&core, scheme, seed).map_err(CliError::validation)?;
        build_statistic_sets(refs, scheme).map_err(CliError::validation)
    }

    pub fn agent_params(&self, n: usize) -> Result<Vec<AgentParams>, CliError> {
        let cfg = self
            .agents
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [agents] section".into()))?;
        let proficiencies: Vec<f64> = match (&cfg.proficiencies, cfg.max_proficiency) {
            (Some(list), None) => list.clone(),
            (None, Some(p)) => vec![p; cfg.count.unwrap_or(n)],
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "[agents] sets both proficiencies and max_proficiency".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Config(
                    "[agents] needs proficiencies or max_proficiency".into(),
                ))
            }
        };
        if proficiencies.len() != n {
            return Err(CliError::Config(format!(
                "[agents] lists {} raters but the assignment has {n}",
                proficiencies.len()
            )));
        }
        let costs: Vec<f64> = match &cfg.effort_costs {
            Some(list) => {
                if list.len() != n {
                    return Err(CliError::Config(format!(
                        "[agents] lists {} effort costs for {n} raters",
                        list.len()
                    )));
                }
                list.clone()
            }
            None => vec![cfg.effort_cost.unwrap_or(0.0); n],
        };
        proficiencies
            .iter()
            .zip(&costs)
            .enumerate()
            .map(|(i, (&p, &c))| AgentParams::new(AgentId(i), p, c).map_err(CliError::config))
            .collect()
    }

    pub fn profile(&self, n: usize) -> Result<StrategyProfile, CliError> {
        let cfg = self
            .profile
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [profile] section".into()))?;
        let need_r = || {
            cfg.r
                .ok_or_else(|| CliError::Config("profile preset needs r".into()))
        };
        match cfg.preset {
            PresetCfg::AllTruth => Ok(StrategyProfile::all_truthful(n)),
            PresetCfg::AllInvert => Ok(StrategyProfile::all_inverting(n)),
            PresetCfg::BlindH => Ok(StrategyProfile::blind_h(n)),
            PresetCfg::BlindL => Ok(StrategyProfile::blind_l(n)),
            PresetCfg::Coin => StrategyProfile::coin(n, need_r()?).map_err(CliError::config),
            PresetCfg::Mixture => {
                let delta = cfg
                    .delta
                    .ok_or_else(|| CliError::Config("mixture preset needs delta".into()))?;
                StrategyProfile::mixture(n, delta, need_r()?).map_err(CliError::config)
            }
            PresetCfg::Table => {
                let rows = cfg.agents.as_ref().ok_or_else(|| {
                    CliError::Config("table preset needs [[profile.agents]] rows".into())
                })?;
                let mut profile = StrategyProfile::all_truthful(n);
                for row in rows {
                    if row.agent >= n {
                        return Err(CliError::Config(format!(
                            "profile row names agent {} of {n}",
                            row.agent
                        )));
                    }
                    let effort = match row.effort {
                        0 => Effort::Zero,
                        1 => Effort::Full,
                        other => {
                            return Err(CliError::Config(format!(
                                "effort must be 0 or 1, got {other}"
                            )))
                        }
                    };
                    let reporting =
                        ReportingMatrix::new(row.x, row.y).map_err(CliError::config)?;
                    profile.set_plan(
                        AgentId(row.agent),
                        AgentPlan::Uniform(TaskStrategy { effort, reporting }),
                    );
                }
                Ok(profile)
            }
        }
    }

    pub fn beta(&self) -> f64 {
        self.mechanism
            .as_ref()
            .and_then(|m| m.beta)
            .unwrap_or(1.0)
    }

    pub fn shift(&self) -> PaymentShift {
        self.mechanism
            .as_ref()
            .and_then(|m| m.shift)
            .map(PaymentShift::from)
            .unwrap_or(PaymentShift::None)
    }

    pub fn seed(&self, cli_override: Option<u64>) -> u64 {
        cli_override
            .or(self.run.as_ref().and_then(|r| r.seed))
            .unwrap_or(0)
    }

    pub fn trials(&self, cli_override: Option<u64>) -> u64 {
        cli_override
            .or(self.run.as_ref().and_then(|r| r.trials))
            .unwrap_or(10_000)
    }

    pub fn estimator_kind(&self) -> EstimatorCfg {
        self.run
            .as_ref()
            .and_then(|r| r.estimator)
            .unwrap_or(EstimatorCfg::Mc)
    }

    pub fn ref_policy(&self) -> RefPolicy {
        self.run
            .as_ref()
            .and_then(|r| r.ref_policy)
            .map(RefPolicy::from)
            .unwrap_or(RefPolicy::Fixed)
    }

    pub fn enumeration_budget(&self) -> EnumerationBudget {
        match self.run.as_ref().and_then(|r| r.enumeration_budget_bits) {
            Some(max_bits) => EnumerationBudget { max_bits },
            None => EnumerationBudget::default(),
        }
    }

    pub fn trusted(&self) -> Result<Option<TrustedRaters>, CliError> {
        match &self.trusted {
            Some(t) => Ok(Some(
                TrustedRaters::new(t.share, t.proficiency).map_err(CliError::config)?,
            )),
            None => Ok(None),
        }
    }

    /// Assembles the full scenario used by simulate and equilibrium-verify.
    pub fn scenario(
        &self,
        seed_override: Option<u64>,
    ) -> Result<Scenario, CliError> {
        let assignment = self.build_assignment(seed_override)?;
        let n = assignment.n_agents();
        let agents = self.agent_params(n)?;
        let profile = self.profile(n)?;
        let seed = self.seed(seed_override);
        Scenario::with_options(
            self.prior()?,
            agents,
            assignment,
            profile,
            self.beta(),
            seed,
            self.ref_policy(),
            self.trusted()?,
        )
        .map_err(CliError::validation)
    }
}
