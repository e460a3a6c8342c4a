//! Subcommand implementations: each returns tables for the output writer.

use peerlab_core::analytic::{
    expected_reward_homogeneous, pair_surplus, trusted_escape_gain, HomogeneousScenario,
    SymmetricResponse,
};
use peerlab_core::assignment::validate_assignment;
use peerlab_core::equilibrium::{
    analytic_expected_reward, basis_candidates, low_effort_escape_check, symmetric_grid_scan,
    verify_nash, DeviationOutcome, Estimator, NashTolerance,
};
use peerlab_core::mechanism::PaymentShift;
use peerlab_core::model::{signal_prob, AgentId, Effort};
use peerlab_core::simulation::{
    enumerate_expected_rewards, mc_expected_rewards, simulate_trial,
};

use crate::config::{ConfigFile, EquilibriumModeCfg, EstimatorCfg};
use crate::output::{fmt_f64, Table};
use crate::CliError;

pub fn cmd_assign(config: &ConfigFile, seed: Option<u64>) -> Result<Vec<Table>, CliError> {
    let assignment = config.build_assignment(seed)?;
    let scheme = assignment.scheme().expect("built from a named scheme");
    let report = validate_assignment(&assignment, scheme);
    if !report.is_valid() {
        return Err(CliError::Validation(format!(
            "assignment failed validation:\n{report}"
        )));
    }

    let mut table = Table::new(
        "assignment",
        vec![
            "agent",
            "block",
            "task",
            "slot",
            "ref_rater",
            "stat_tasks",
            "d",
            "scheme",
        ],
    );
    for i in 0..assignment.n_agents() {
        let agent = AgentId(i);
        let block = assignment
            .core()
            .agent_block(agent)
            .map_or(String::new(), |b| b.to_string());
        for (slot, &task) in assignment.tasks_of(agent).iter().enumerate() {
            let stat: Vec<String> = assignment
                .stat_set(agent, task)
                .unwrap()
                .iter()
                .map(|t| t.to_string())
                .collect();
            table.push(vec![
                agent.to_string(),
                block.clone(),
                task.to_string(),
                slot.to_string(),
                assignment.ref_rater(agent, task).unwrap().to_string(),
                stat.join(";"),
                assignment.d().to_string(),
                scheme.token().to_string(),
            ]);
        }
    }
    table.comments.push("validation=ok".into());
    Ok(vec![table])
}

pub fn cmd_simulate(
    config: &ConfigFile,
    seed: Option<u64>,
    trials: Option<u64>,
    dump_trials: Option<u64>,
) -> Result<Vec<Table>, CliError> {
    let scenario = config.scenario(seed)?;
    let n = scenario.n_agents();
    let shift = config.shift();
    let beta = scenario.beta;

    let estimates: Vec<(f64, f64, u64)> = match config.estimator_kind() {
        EstimatorCfg::Mc => {
            let trials = config.trials(trials);
            mc_expected_rewards(&scenario, trials)?
                .into_iter()
                .map(|e| (e.mean, e.stderr, e.trials))
                .collect()
        }
        EstimatorCfg::Enumerate => {
            enumerate_expected_rewards(&scenario, config.enumeration_budget())?
                .into_iter()
                .map(|v| (v, 0.0, 0))
                .collect()
        }
        EstimatorCfg::Analytic => (0..n)
            .map(|i| {
                analytic_expected_reward(&scenario, &scenario.profile, AgentId(i))
                    .map(|v| (v, 0.0, 0))
            })
            .collect::<Result<_, _>>()?,
    };

    let mut table = Table::new(
        "rewards",
        vec!["agent", "trials", "mean_R", "stderr", "beta", "payment"],
    );
    for (i, (mean, stderr, trial_count)) in estimates.iter().enumerate() {
        let shift_amount = match shift {
            PaymentShift::None => 0.0,
            PaymentShift::PlusOnePerTask => {
                scenario.assignment.tasks_of(AgentId(i)).len() as f64
            }
        };
        let payment = beta * (mean + shift_amount);
        table.push(vec![
            i.to_string(),
            trial_count.to_string(),
            fmt_f64(*mean),
            fmt_f64(*stderr),
            fmt_f64(beta),
            fmt_f64(payment),
        ]);
    }

    let mut tables = vec![table];
    if let Some(count) = dump_trials {
        let mut dump = Table::new(
            "trials",
            vec!["trial", "task", "truth", "agent", "observation", "report"],
        );
        for trial in 0..count {
            for row in simulate_trial(&scenario, trial)? {
                dump.push(vec![
                    row.trial.to_string(),
                    row.task.to_string(),
                    row.truth.to_string(),
                    row.agent.to_string(),
                    row.observation.to_string(),
                    row.report.to_string(),
                ]);
            }
        }
        tables.push(dump);
    }
    Ok(tables)
}

pub fn cmd_equilibrium(
    config: &ConfigFile,
    seed: Option<u64>,
    trials: Option<u64>,
) -> Result<Vec<Table>, CliError> {
    let eq = config.equilibrium.as_ref();
    let mode = eq
        .and_then(|e| e.mode)
        .unwrap_or(EquilibriumModeCfg::Verify);
    match mode {
        EquilibriumModeCfg::Scan => {
            let prior = config.prior()?;
            let step = eq.and_then(|e| e.scan_step).unwrap_or(0.1);
            let p = eq
                .and_then(|e| e.scan_proficiency)
                .or_else(|| config.agents.as_ref().and_then(|a| a.max_proficiency))
                .ok_or_else(|| {
                    CliError::Config(
                        "grid scan needs [equilibrium].scan_proficiency or a homogeneous [agents].max_proficiency".into(),
                    )
                })?;
            let entries = symmetric_grid_scan(&prior, p, step).map_err(CliError::config)?;
            let mut table = Table::new("scan", vec!["effort", "x", "y", "value"]);
            for e in entries {
                table.push(vec![
                    match e.effort {
                        Effort::Full => "1".into(),
                        Effort::Zero => "0".into(),
                    },
                    fmt_f64(e.x),
                    fmt_f64(e.y),
                    fmt_f64(e.value),
                ]);
            }
            Ok(vec![table])
        }
        EquilibriumModeCfg::Escape => {
            let scenario = config.scenario(seed)?;
            let d = scenario.assignment.d_tasks() as f64;
            let mut table = Table::new(
                "escape",
                vec![
                    "agent",
                    "baseline_value",
                    "candidate_value",
                    "gain",
                    "gain_per_task",
                ],
            );
            for i in 0..scenario.n_agents() {
                let report = low_effort_escape_check(&scenario, AgentId(i))?;
                table.push(vec![
                    i.to_string(),
                    fmt_f64(report.baseline_value),
                    fmt_f64(report.candidate_value),
                    fmt_f64(report.gain),
                    fmt_f64(report.gain / d),
                ]);
            }
            Ok(vec![table])
        }
        EquilibriumModeCfg::Verify => {
            let scenario = config.scenario(seed)?;
            let r_step = eq.and_then(|e| e.r_grid_step).unwrap_or(0.1);
            let tolerance = NashTolerance {
                absolute: eq.and_then(|e| e.tolerance).unwrap_or(1e-9),
                mc_sigmas: eq.and_then(|e| e.mc_sigmas).unwrap_or(3.0),
            };
            let estimator = match config.estimator_kind() {
                EstimatorCfg::Analytic => Estimator::Analytic,
                EstimatorCfg::Mc => Estimator::Mc {
                    trials: config.trials(trials),
                },
                EstimatorCfg::Enumerate => Estimator::Enumerate {
                    budget: config.enumeration_budget(),
                },
            };
            let candidates = basis_candidates(&scenario, r_step).map_err(CliError::config)?;
            let verdict = verify_nash(&scenario, &candidates, estimator, tolerance)?;

            let mut table = Table::new(
                "equilibrium",
                vec![
                    "agent",
                    "scope",
                    "candidate",
                    "baseline_value",
                    "candidate_value",
                    "gain",
                    "stderr",
                    "significance",
                    "outcome",
                ],
            );
            for r in &verdict.reports {
                let outcome = match r.classify(&tolerance) {
                    DeviationOutcome::Improves => "improves",
                    DeviationOutcome::Indifferent => "indifferent",
                    DeviationOutcome::Worsens => "worsens",
                };
                table.push(vec![
                    r.agent.to_string(),
                    r.scope.to_string(),
                    r.candidate.clone(),
                    fmt_f64(r.baseline_value),
                    fmt_f64(r.candidate_value),
                    fmt_f64(r.gain),
                    r.stderr.map(fmt_f64).unwrap_or_default(),
                    r.significance.map(fmt_f64).unwrap_or_default(),
                    outcome.into(),
                ]);
            }
            table.comments.push(format!(
                "verdict={}",
                if verdict.is_nash_over_candidates {
                    "NASH"
                } else {
                    "NOT_NASH"
                }
            ));
            let worst = &verdict.worst_deviation;
            table.comments.push(format!(
                "worst_deviation=agent {} {} {} gain={}",
                worst.agent,
                worst.scope,
                worst.candidate,
                fmt_f64(worst.gain)
            ));
            table
                .comments
                .push(format!("profile={}", verdict.profile));
            Ok(vec![table])
        }
    }
}

pub fn cmd_analytic(config: &ConfigFile) -> Result<Vec<Table>, CliError> {
    let prior = config.prior()?;
    let cfg = config
        .analytic
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [analytic] section".into()))?;
    let p = cfg.p;
    let q = cfg.q.unwrap_or(p);
    let d_tasks = cfg.d_tasks.unwrap_or(1);

    let mut table = Table::new("analytic", vec!["name", "value"]);
    let mut push = |name: &str, value: f64| table.push(vec![name.into(), fmt_f64(value)]);

    push("signal_prob_p", signal_prob(p, &prior).map_err(CliError::config)?);
    push(
        "pair_surplus_p_q",
        pair_surplus(p, q, &prior).map_err(CliError::config)?,
    );
    let scenario = HomogeneousScenario::new(d_tasks, p, prior).map_err(CliError::config)?;
    push(
        "truthful_total",
        expected_reward_homogeneous(&scenario, SymmetricResponse::Truthful)
            .map_err(CliError::config)?,
    );
    push(
        "inverting_total",
        expected_reward_homogeneous(&scenario, SymmetricResponse::Inverting)
            .map_err(CliError::config)?,
    );
    push(
        "coin_total",
        expected_reward_homogeneous(&scenario, SymmetricResponse::Coin(0.5))
            .map_err(CliError::config)?,
    );
    if let Some(trusted) = config.trusted()? {
        push(
            "trusted_gain_per_task",
            trusted_escape_gain(trusted.share, trusted.proficiency, p, &prior)
                .map_err(CliError::config)?,
        );
    }
    Ok(vec![table])
}
