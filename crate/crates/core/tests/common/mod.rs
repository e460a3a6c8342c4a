//! Shared fixtures and independent oracles for the integration suites.
#![allow(dead_code)] // each test target compiles its own subset

use peerlab_core::assignment::{build_block_assignment, choose_reference_raters, BlockParams};
use peerlab_core::mechanism::{
    build_statistic_sets, Assignment, AssignmentCore, RefAssignment, Scheme,
};
use peerlab_core::model::{AgentId, AgentParams, Prior, TaskId};
use peerlab_core::simulation::{RefPolicy, Scenario, StrategyProfile, TrustedRaters};

/// Two mutually referencing pairs: agents {0,1} each paired with {2,3} on
/// single shared tasks. The smallest instance where every scored pair has a
/// reference with a disjoint statistic set.
pub fn pair_assignment() -> Assignment {
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
    build_statistic_sets(RefAssignment::new(core, refs).unwrap(), Scheme::Ring).unwrap()
}

pub fn agents_from(proficiencies: &[f64]) -> Vec<AgentParams> {
    proficiencies
        .iter()
        .enumerate()
        .map(|(i, &p)| AgentParams::new(AgentId(i), p, 0.0).unwrap())
        .collect()
}

pub fn pair_scenario(
    p_h: f64,
    proficiencies: [f64; 4],
    profile: StrategyProfile,
    seed: u64,
    trusted: Option<TrustedRaters>,
) -> Scenario {
    Scenario::with_options(
        Prior::from_p_h(p_h).unwrap(),
        agents_from(&proficiencies),
        pair_assignment(),
        profile,
        1.0,
        seed,
        RefPolicy::Fixed,
        trusted,
    )
    .unwrap()
}

/// Block-built scenario with homogeneous raters: m = D^2 tasks, T raters per
/// task, n = D*T agents.
pub fn block_scenario(
    d_tasks: usize,
    t_raters: usize,
    scheme: Scheme,
    proficiency: f64,
    p_h: f64,
    profile: impl Fn(usize) -> StrategyProfile,
    seed: u64,
) -> Scenario {
    let m = d_tasks * d_tasks;
    let n = d_tasks * t_raters;
    let params = BlockParams::new(m, n, d_tasks, t_raters).unwrap();
    let core = build_block_assignment(params, seed);
    let refs = choose_reference_raters(&core, scheme, seed).unwrap();
    let assignment = build_statistic_sets(refs, scheme).unwrap();
    Scenario::new(
        Prior::from_p_h(p_h).unwrap(),
        agents_from(&vec![proficiency; n]),
        assignment,
        profile(n),
        1.0,
        seed,
    )
    .unwrap()
}

/// Brute-force kernel oracle, independent of the library's calculators: the
/// agreement term enumerates the joint observation outcomes of two raters
/// sharing one truth; the baseline term enumerates two independent
/// (truth, observation) pairs drawn from the prior.
pub fn brute_force_pair_surplus(p: f64, q: f64, prior: &Prior) -> f64 {
    let mut agree = 0.0;
    for (tw, th) in [(prior.p_h(), true), (prior.p_l(), false)] {
        for pc in [true, false] {
            for qc in [true, false] {
                let w = tw * if pc { p } else { 1.0 - p } * if qc { q } else { 1.0 - q };
                if (th == pc) == (th == qc) {
                    agree += w;
                }
            }
        }
    }
    let mut baseline = 0.0;
    for (tw1, th1) in [(prior.p_h(), true), (prior.p_l(), false)] {
        for c1 in [true, false] {
            for (tw2, th2) in [(prior.p_h(), true), (prior.p_l(), false)] {
                for c2 in [true, false] {
                    let w = tw1
                        * if c1 { p } else { 1.0 - p }
                        * tw2
                        * if c2 { q } else { 1.0 - q };
                    if (th1 == c1) == (th2 == c2) {
                        baseline += w;
                    }
                }
            }
        }
    }
    agree - baseline
}
