//! Route-independence checks on three-task instances: the closed forms, the
//! bilinear engine, the exhaustive oracle, and Monte Carlo must agree for
//! both statistic schemes.

mod common;

use common::*;
use peerlab_core::analytic::{expected_reward_profile, ProfileSummary, TaskLoad};
use peerlab_core::equilibrium::exact_profile_rewards;
use peerlab_core::mechanism::{
    build_statistic_sets, with_custom_stat_sets, AssignmentCore, RefAssignment, Scheme,
};
use peerlab_core::model::{AgentId, Prior, TaskId};
use peerlab_core::simulation::{
    enumerate_expected_rewards, mc_expected_rewards, EnumerationBudget, Scenario, StrategyProfile,
};

fn three_task_scenario(scheme: Scheme, proficiencies: &[f64; 6], seed: u64) -> Scenario {
    use peerlab_core::assignment::{
        build_block_assignment, choose_reference_raters, BlockParams,
    };
    let params = BlockParams::new(9, 6, 3, 2).unwrap();
    let core = build_block_assignment(params, seed);
    let refs = choose_reference_raters(&core, scheme, seed).unwrap();
    let assignment = build_statistic_sets(refs, scheme).unwrap();
    Scenario::new(
        Prior::from_p_h(0.6).unwrap(),
        agents_from(proficiencies),
        assignment,
        StrategyProfile::all_truthful(6),
        1.0,
        seed,
    )
    .unwrap()
}

#[test]
fn three_task_homogeneous_routes_agree() {
    // 9 truth branches only, but the conceptual per-pair branches push the
    // budget well past the default; spend it explicitly.
    let budget = EnumerationBudget { max_bits: 50 };
    let prior = Prior::from_p_h(0.6).unwrap();
    for scheme in [Scheme::Ring, Scheme::Full] {
        let sc = three_task_scenario(scheme, &[0.8; 6], 13);
        let oracle = enumerate_expected_rewards(&sc, budget).unwrap();
        let engine = exact_profile_rewards(&sc).unwrap();

        // Closed form: three tasks, each worth the 0.8-0.8 kernel value.
        let profile = ProfileSummary::new(
            prior,
            0.8,
            vec![
                TaskLoad {
                    proficiency: 0.8,
                    stat_uses: sc.assignment.d()
                };
                3
            ],
        )
        .unwrap();
        let closed = expected_reward_profile(&profile, sc.assignment.d()).unwrap();
        assert!((closed - 3.0 * 0.1728).abs() < 1e-12);

        for i in 0..6 {
            assert!((oracle[i] - closed).abs() < 1e-9, "{scheme} agent {i}");
            assert!((engine[i] - oracle[i]).abs() < 1e-12, "{scheme} agent {i}");
        }

        let est = mc_expected_rewards(&sc, 30_000).unwrap();
        for (e, o) in est.iter().zip(&oracle) {
            assert!(
                (e.mean - o).abs() <= 4.0 * e.stderr,
                "{scheme}: mc {} +- {} vs {o}",
                e.mean,
                e.stderr
            );
        }
    }
}

#[test]
fn three_task_heterogeneous_routes_agree() {
    let budget = EnumerationBudget { max_bits: 50 };
    let proficiencies = [0.6, 0.7, 0.8, 0.95, 0.9, 0.65];
    for scheme in [Scheme::Ring, Scheme::Full] {
        let sc = three_task_scenario(scheme, &proficiencies, 29);
        let oracle = enumerate_expected_rewards(&sc, budget).unwrap();
        let engine = exact_profile_rewards(&sc).unwrap();
        for i in 0..6 {
            assert!((engine[i] - oracle[i]).abs() < 1e-12, "{scheme} agent {i}");
        }
        let est = mc_expected_rewards(&sc, 30_000).unwrap();
        for (e, o) in est.iter().zip(&oracle) {
            assert!((e.mean - o).abs() <= 4.0 * e.stderr, "{scheme}");
        }
    }
}

#[test]
fn trusted_references_agree_across_routes_at_d_two() {
    use peerlab_core::simulation::{RefPolicy, TrustedRaters};

    // The conceptual branch space (trusted picks and virtual draws included)
    // is huge, but the collapsed sum only walks the 2^9 truth vectors.
    let budget = EnumerationBudget { max_bits: 160 };
    let proficiencies = [0.8, 0.7, 0.95, 0.6, 0.9, 0.65];
    for scheme in [Scheme::Ring, Scheme::Full] {
        let base = three_task_scenario(scheme, &proficiencies, 31);
        let sc = Scenario::with_options(
            base.prior,
            base.agents.clone(),
            base.assignment.clone(),
            StrategyProfile::mixture(6, 0.35, 0.7).unwrap(),
            1.0,
            31,
            RefPolicy::Fixed,
            Some(TrustedRaters::new(0.2, 0.85).unwrap()),
        )
        .unwrap();
        let oracle = enumerate_expected_rewards(&sc, budget).unwrap();
        let engine = exact_profile_rewards(&sc).unwrap();
        for i in 0..6 {
            assert!(
                (engine[i] - oracle[i]).abs() < 1e-12,
                "{scheme} agent {i}: {} vs {}",
                engine[i],
                oracle[i]
            );
        }
        let est = mc_expected_rewards(&sc, 40_000).unwrap();
        for (e, o) in est.iter().zip(&oracle) {
            assert!(
                (e.mean - o).abs() <= 4.0 * e.stderr,
                "{scheme}: mc {} +- {} vs {o}",
                e.mean,
                e.stderr
            );
        }
    }
}

#[test]
fn custom_statistic_sets_cover_intermediate_d() {
    // A 6-agent, 9-task instance where each agent's reference shares exactly
    // one task; caller-supplied d = 2 sets out of D = 3 behave like the
    // all-but-one scheme here and validate against the set requirements.
    let tasks_of = vec![
        vec![TaskId(0), TaskId(1), TaskId(2)],
        vec![TaskId(3), TaskId(4), TaskId(5)],
        vec![TaskId(0), TaskId(3), TaskId(6)],
        vec![TaskId(1), TaskId(4), TaskId(7)],
        vec![TaskId(2), TaskId(5), TaskId(8)],
        vec![TaskId(6), TaskId(7), TaskId(8)],
    ];
    let core = AssignmentCore::new(9, tasks_of).unwrap();
    let ref_table = vec![
        vec![AgentId(2), AgentId(3), AgentId(4)],
        vec![AgentId(2), AgentId(3), AgentId(4)],
        vec![AgentId(0), AgentId(1), AgentId(5)],
        vec![AgentId(0), AgentId(1), AgentId(5)],
        vec![AgentId(0), AgentId(1), AgentId(5)],
        vec![AgentId(2), AgentId(3), AgentId(4)],
    ];
    let refs = RefAssignment::new(core, ref_table).unwrap();

    let all_but_one: Vec<Vec<Vec<TaskId>>> = (0..6)
        .map(|i| {
            let tasks = refs.core().tasks_of(AgentId(i)).to_vec();
            (0..3)
                .map(|slot| {
                    tasks
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != slot)
                        .map(|(_, &t)| t)
                        .collect()
                })
                .collect()
        })
        .collect();
    let custom = with_custom_stat_sets(refs.clone(), all_but_one.clone(), 2).unwrap();
    assert_eq!(custom.d(), 2);
    assert_eq!(custom.scheme(), None);

    // Same sets built through the named scheme give identical rewards.
    let named = build_statistic_sets(refs.clone(), Scheme::Full).unwrap();
    let sc_custom = Scenario::new(
        Prior::from_p_h(0.6).unwrap(),
        agents_from(&[0.8; 6]),
        custom,
        StrategyProfile::all_truthful(6),
        1.0,
        3,
    )
    .unwrap();
    let sc_named = Scenario::new(
        Prior::from_p_h(0.6).unwrap(),
        agents_from(&[0.8; 6]),
        named,
        StrategyProfile::all_truthful(6),
        1.0,
        3,
    )
    .unwrap();
    let budget = EnumerationBudget { max_bits: 50 };
    let a = enumerate_expected_rewards(&sc_custom, budget).unwrap();
    let b = enumerate_expected_rewards(&sc_named, budget).unwrap();
    assert_eq!(a, b);

    // Undersized sets are rejected.
    let mut short = all_but_one.clone();
    short[0][0] = vec![TaskId(1)];
    assert!(with_custom_stat_sets(refs.clone(), short, 2).is_err());

    // Sets containing the scored task are rejected.
    let mut self_ref = all_but_one;
    self_ref[0][0] = vec![TaskId(0), TaskId(1)];
    assert!(with_custom_stat_sets(refs, self_ref, 2).is_err());
}
