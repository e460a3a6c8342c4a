//! Closed-form expected-reward calculators.
//!
//! Everything here follows from one kernel: `agreement_surplus(p, q, w)`,
//! the probability that two independent raters with accuracies p and q
//! evaluate a shared task identically, minus `w` times the probability that
//! their reports would match anyway if each tossed a coin with her marginal
//! H-frequency. Positive surplus is exactly what the mechanism pays for.

use crate::error::{Error, Result};
use crate::model::{signal_prob, Prior};

/// Agreement probability of two independent evaluations with accuracies
/// `p` and `q` of the same binary truth, minus `weight` times the blind
/// agreement baseline of their marginal signals:
///
/// `p*q + (1-p)*(1-q) - weight * (p[H]*q[H] + (1-p[H])*(1-q[H]))`
///
/// where `p[H]` is [`signal_prob`]`(p, prior)`.
pub fn agreement_surplus(p: f64, q: f64, weight: f64, prior: &Prior) -> Result<f64> {
    let sp = signal_prob(p, prior)?;
    let sq = signal_prob(q, prior)?;
    let agree = p * q + (1.0 - p) * (1.0 - q);
    let baseline = sp * sq + (1.0 - sp) * (1.0 - sq);
    Ok(agree - weight * baseline)
}

/// The unit-weight kernel; the per-task expected reward of two full-effort
/// truthful raters with accuracies `p` and `q`.
pub fn pair_surplus(p: f64, q: f64, prior: &Prior) -> Result<f64> {
    agreement_surplus(p, q, 1.0, prior)
}

/// All raters share one maximum proficiency and evaluate `d_tasks` tasks
/// each, with every reference also at full effort and truthful.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousScenario {
    pub d_tasks: usize,
    pub proficiency: f64,
    pub prior: Prior,
}

impl HomogeneousScenario {
    pub fn new(d_tasks: usize, proficiency: f64, prior: Prior) -> Result<Self> {
        if d_tasks == 0 {
            return Err(Error::InvalidScenario("d_tasks must be at least 1".into()));
        }
        if !(0.5..=1.0).contains(&proficiency) {
            return Err(Error::InvalidProficiency(proficiency));
        }
        Ok(HomogeneousScenario {
            d_tasks,
            proficiency,
            prior,
        })
    }
}

/// A rater's own uniform response when everyone else works and reports
/// truthfully.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymmetricResponse {
    /// Full effort, truthful reporting.
    Truthful,
    /// Full effort, inverted reporting.
    Inverting,
    /// No effort; report H with the given bias, independent of everything.
    Coin(f64),
}

/// Expected total reward of one rater in the homogeneous scenario:
/// truthful earns `D * pair_surplus(p, p)`, inverting earns its negation,
/// and any coin earns exactly zero.
pub fn expected_reward_homogeneous(
    s: &HomogeneousScenario,
    own: SymmetricResponse,
) -> Result<f64> {
    let unit = pair_surplus(s.proficiency, s.proficiency, &s.prior)?;
    let d = s.d_tasks as f64;
    match own {
        SymmetricResponse::Truthful => Ok(d * unit),
        SymmetricResponse::Inverting => Ok(-d * unit),
        SymmetricResponse::Coin(r) => {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidProbability { name: "r", value: r });
            }
            Ok(0.0)
        }
    }
}

/// One task in a per-task reward profile: the rater's own evaluation
/// accuracy there, and how many of her own rewards reuse this task's report
/// in their statistic terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskLoad {
    pub proficiency: f64,
    pub stat_uses: usize,
}

/// Per-task summary of a rater's situation against truthful references with
/// common mean accuracy `ref_mean`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSummary {
    pub prior: Prior,
    pub ref_mean: f64,
    pub tasks: Vec<TaskLoad>,
}

impl ProfileSummary {
    pub fn new(prior: Prior, ref_mean: f64, tasks: Vec<TaskLoad>) -> Result<Self> {
        if !(0.5..=1.0).contains(&ref_mean) {
            return Err(Error::InvalidProficiency(ref_mean));
        }
        for t in &tasks {
            if !(0.0..=1.0).contains(&t.proficiency) {
                return Err(Error::InvalidProbability {
                    name: "task proficiency",
                    value: t.proficiency,
                });
            }
        }
        Ok(ProfileSummary {
            prior,
            ref_mean,
            tasks,
        })
    }
}

/// Expected total reward of a truthful rater whose evaluation accuracy may
/// vary by task, against truthful references of mean accuracy `ref_mean`,
/// when task j's report feeds `stat_uses` of her `d`-sized statistic sets:
///
/// `sum_j [ agreement_surplus(q_j, ref_mean, u_j/d) + (u_j/d - 1) * (1 - ref_mean[H]) ]`
///
/// With `stat_uses = d` everywhere this reduces to `sum_j pair_surplus(q_j, ref_mean)`.
pub fn expected_reward_profile(ps: &ProfileSummary, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidStatSetSize {
            d: 0,
            d_tasks: ps.tasks.len(),
        });
    }
    let ref_signal = signal_prob(ps.ref_mean, &ps.prior)?;
    let mut total = 0.0;
    for task in &ps.tasks {
        let ratio = task.stat_uses as f64 / d as f64;
        total += agreement_surplus(task.proficiency, ps.ref_mean, ratio, &ps.prior)?
            + (ratio - 1.0) * (1.0 - ref_signal);
    }
    Ok(total)
}

/// One cohort of potential reference raters for the mixture calculators:
/// selected with probability `weight`, working truthfully with probability
/// `truthful_prob`, at accuracy `proficiency` when they do.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefMix {
    pub weight: f64,
    pub truthful_prob: f64,
    pub proficiency: f64,
}

/// Expected per-task reward of a rater who works truthfully with
/// probability `delta` (and tosses a coin otherwise), against reference
/// cohorts that each work truthfully with their own probability:
///
/// `delta * sum_k weight_k * truthful_prob_k * pair_surplus(own, p_k)`
///
/// The coin sides of both mixtures contribute nothing.
pub fn mixed_profile_task_value(
    delta: f64,
    refs: &[RefMix],
    own_proficiency: f64,
    prior: &Prior,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidProbability {
            name: "delta",
            value: delta,
        });
    }
    let weight_sum: f64 = refs.iter().map(|r| r.weight).sum();
    if (weight_sum - 1.0).abs() > 1e-9 {
        return Err(Error::WeightsNotNormalized(weight_sum));
    }
    let mut slope = 0.0;
    for r in refs {
        if !(0.0..=1.0).contains(&r.weight) || !(0.0..=1.0).contains(&r.truthful_prob) {
            return Err(Error::InvalidProbability {
                name: "reference mix",
                value: r.weight.min(r.truthful_prob),
            });
        }
        slope += r.weight * r.truthful_prob * pair_surplus(own_proficiency, r.proficiency, prior)?;
    }
    Ok(delta * slope)
}

/// Expected per-task gain from switching to full-effort truthtelling when
/// everyone else tosses coins, if the reference rater is a trusted truthful
/// rater of accuracy `trusted_prof` with probability `trusted_share`:
///
/// `trusted_share * pair_surplus(own, trusted_prof)`
///
/// Positive exactly when `trusted_share > 0` and both accuracies exceed 1/2.
pub fn trusted_escape_gain(
    trusted_share: f64,
    trusted_prof: f64,
    own_proficiency: f64,
    prior: &Prior,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&trusted_share) {
        return Err(Error::InvalidProbability {
            name: "trusted_share",
            value: trusted_share,
        });
    }
    Ok(trusted_share * pair_surplus(own_proficiency, trusted_prof, prior)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prior(p_h: f64) -> Prior {
        Prior::from_p_h(p_h).unwrap()
    }

    /// Brute-force kernel oracle, independent of `signal_prob` and
    /// `agreement_surplus`: the agreement term enumerates the joint
    /// observation outcomes of two raters on one shared truth; the baseline
    /// term enumerates two independent (truth, observation) pairs.
    fn brute_force_surplus(p: f64, q: f64, weight: f64, pr: &Prior) -> f64 {
        let mut agree = 0.0;
        for (truth_w, truth_h) in [(pr.p_h(), true), (pr.p_l(), false)] {
            for p_correct in [true, false] {
                for q_correct in [true, false] {
                    let w = truth_w
                        * if p_correct { p } else { 1.0 - p }
                        * if q_correct { q } else { 1.0 - q };
                    let p_sees_h = truth_h == p_correct;
                    let q_sees_h = truth_h == q_correct;
                    if p_sees_h == q_sees_h {
                        agree += w;
                    }
                }
            }
        }
        let mut baseline = 0.0;
        for (tw1, th1) in [(pr.p_h(), true), (pr.p_l(), false)] {
            for c1 in [true, false] {
                for (tw2, th2) in [(pr.p_h(), true), (pr.p_l(), false)] {
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
        agree - weight * baseline
    }

    #[test]
    fn kernel_matches_brute_force_oracle() {
        let pr = prior(0.6);
        // Frozen oracle values.
        assert!((brute_force_surplus(0.8, 0.8, 1.0, &pr) - 0.1728).abs() < 1e-12);
        assert!((brute_force_surplus(0.8, 0.9, 1.0, &pr) - 0.2304).abs() < 1e-12);

        for p in [0.0, 0.25, 0.5, 0.6, 0.8, 1.0] {
            for q in [0.0, 0.3, 0.5, 0.9, 1.0] {
                for w in [0.0, 0.5, 1.0] {
                    for ph in [0.3, 0.5, 0.6, 0.8] {
                        let pr = prior(ph);
                        let got = agreement_surplus(p, q, w, &pr).unwrap();
                        let want = brute_force_surplus(p, q, w, &pr);
                        assert!(
                            (got - want).abs() < 1e-12,
                            "p={p} q={q} w={w} ph={ph}: {got} vs {want}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn kernel_examples() {
        let pr = prior(0.6);
        // Proportional to (2p-1): vanishes at p = 1/2.
        assert!(agreement_surplus(0.5, 0.9, 1.0, &pr).unwrap().abs() < 1e-15);
        assert!((pair_surplus(0.8, 0.8, &pr).unwrap() - 0.1728).abs() < 1e-12);
        assert!((pair_surplus(0.8, 0.9, &pr).unwrap() - 0.2304).abs() < 1e-12);
    }

    #[test]
    fn kernel_symmetries() {
        for ph in [0.2, 0.4, 0.5, 0.6, 0.9] {
            let pr = prior(ph);
            let mut p = 0.0;
            while p <= 1.0 + 1e-9 {
                let mut q = 0.0;
                while q <= 1.0 + 1e-9 {
                    let f = pair_surplus(p, q, &pr).unwrap();
                    assert!((f - pair_surplus(q, p, &pr).unwrap()).abs() < 1e-12);
                    assert!((f - pair_surplus(1.0 - p, 1.0 - q, &pr).unwrap()).abs() < 1e-12);
                    assert!((pair_surplus(p, 1.0 - q, &pr).unwrap() + f).abs() < 1e-12);
                    assert!((pair_surplus(1.0 - p, q, &pr).unwrap() + f).abs() < 1e-12);
                    q += 0.05;
                }
                p += 0.05;
            }
        }
    }

    #[test]
    fn kernel_monotone_and_positive_above_half() {
        for ph in [0.3, 0.5, 0.6, 0.8] {
            let pr = prior(ph);
            for w in [0.0, 0.25, 0.5, 1.0] {
                for q in [0.55, 0.7, 0.9, 1.0] {
                    let mut prev = f64::NEG_INFINITY;
                    let mut p = 0.0;
                    while p <= 1.0 + 1e-9 {
                        let f = agreement_surplus(p, q, w, &pr).unwrap();
                        assert!(f > prev, "not increasing at p={p}, q={q}, w={w}, ph={ph}");
                        prev = f;
                        p += 0.05;
                    }
                }
            }
            // Nonnegative on [1/2,1]^2, strictly positive strictly above 1/2.
            for p in [0.5, 0.6, 0.8, 1.0] {
                for q in [0.5, 0.7, 1.0] {
                    assert!(agreement_surplus(p, q, 1.0, &pr).unwrap() >= -1e-15);
                }
            }
            assert!(agreement_surplus(0.51, 0.51, 1.0, &pr).unwrap() > 0.0);
        }
    }

    #[test]
    fn product_identity_on_grid() {
        // pair_surplus(p,q) = 2(2p-1)(2q-1) P[H] P[L], verified against the
        // definitional form.
        for ph in [0.2, 0.5, 0.6, 0.75] {
            let pr = prior(ph);
            let mut p = 0.0;
            while p <= 1.0 + 1e-9 {
                let mut q = 0.0;
                while q <= 1.0 + 1e-9 {
                    let f = pair_surplus(p, q, &pr).unwrap();
                    let product = 2.0 * (2.0 * p - 1.0) * (2.0 * q - 1.0) * pr.p_h() * pr.p_l();
                    assert!((f - product).abs() < 1e-12);
                    q += 0.05;
                }
                p += 0.05;
            }
        }
    }

    #[test]
    fn homogeneous_examples() {
        let s = HomogeneousScenario::new(10, 0.8, prior(0.6)).unwrap();
        let truth = expected_reward_homogeneous(&s, SymmetricResponse::Truthful).unwrap();
        let invert = expected_reward_homogeneous(&s, SymmetricResponse::Inverting).unwrap();
        assert!((truth - 1.728).abs() < 1e-12);
        assert!((invert + 1.728).abs() < 1e-12);
        assert_eq!(truth, -invert);
        for r in [0.0, 0.3, 0.7, 1.0] {
            let coin = expected_reward_homogeneous(&s, SymmetricResponse::Coin(r)).unwrap();
            assert_eq!(coin, 0.0);
        }
        assert!(expected_reward_homogeneous(&s, SymmetricResponse::Coin(1.5)).is_err());
    }

    #[test]
    fn profile_reduces_to_homogeneous() {
        let pr = prior(0.6);
        let tasks = vec![
            TaskLoad {
                proficiency: 0.8,
                stat_uses: 1
            };
            10
        ];
        let ps = ProfileSummary::new(pr, 0.8, tasks).unwrap();
        assert!((expected_reward_profile(&ps, 1).unwrap() - 1.728).abs() < 1e-12);

        // Half-proficiency tasks contribute nothing.
        let ps = ProfileSummary::new(
            pr,
            0.9,
            vec![
                TaskLoad {
                    proficiency: 0.5,
                    stat_uses: 2
                };
                4
            ],
        )
        .unwrap();
        assert!(expected_reward_profile(&ps, 2).unwrap().abs() < 1e-15);

        let ps = ProfileSummary::new(
            pr,
            0.9,
            vec![
                TaskLoad {
                    proficiency: 0.8,
                    stat_uses: 1,
                },
                TaskLoad {
                    proficiency: 0.5,
                    stat_uses: 1,
                },
            ],
        )
        .unwrap();
        assert!((expected_reward_profile(&ps, 1).unwrap() - 0.2304).abs() < 1e-12);
    }

    #[test]
    fn mixture_examples() {
        let pr = prior(0.6);
        let refs = [RefMix {
            weight: 1.0,
            truthful_prob: 0.4,
            proficiency: 0.8,
        }];
        assert_eq!(
            mixed_profile_task_value(0.0, &refs, 0.8, &pr).unwrap(),
            0.0
        );
        let never = [RefMix {
            weight: 1.0,
            truthful_prob: 0.0,
            proficiency: 0.9,
        }];
        assert_eq!(
            mixed_profile_task_value(1.0, &never, 0.8, &pr).unwrap(),
            0.0
        );
        let v = mixed_profile_task_value(0.5, &refs, 0.8, &pr).unwrap();
        assert!((v - 0.03456).abs() < 1e-12);

        let bad = [RefMix {
            weight: 0.5,
            truthful_prob: 0.4,
            proficiency: 0.8,
        }];
        assert!(matches!(
            mixed_profile_task_value(0.5, &bad, 0.8, &pr),
            Err(Error::WeightsNotNormalized(_))
        ));
    }

    #[test]
    fn mixture_monotone_in_delta() {
        let pr = prior(0.6);
        let refs = [
            RefMix {
                weight: 0.5,
                truthful_prob: 0.3,
                proficiency: 0.7,
            },
            RefMix {
                weight: 0.5,
                truthful_prob: 0.0,
                proficiency: 0.9,
            },
        ];
        let mut prev = -1.0;
        for k in 0..=10 {
            let v = mixed_profile_task_value(k as f64 / 10.0, &refs, 0.8, &pr).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn trusted_gain_examples() {
        let pr = prior(0.6);
        assert_eq!(trusted_escape_gain(0.0, 0.9, 0.8, &pr).unwrap(), 0.0);
        let g = trusted_escape_gain(0.1, 0.9, 0.8, &pr).unwrap();
        assert!((g - 0.02304).abs() < 1e-12);
        assert!(trusted_escape_gain(1.0, 0.5, 0.8, &pr).unwrap().abs() < 1e-15);
    }
}
