//! Ideal learner models: how an observer updates a belief over
//! candidate reward weights after watching a demonstrated trajectory.
//!
//! The exact learner treats a demonstration as evidence that the
//! weights make it globally optimal over the environment's candidate
//! set. Approximate learners only require the demonstration to be
//! *close* to optimal under a distance: the reward gap to the optimum,
//! the mean Euclidean state distance to the optimal trajectory, or a
//! strategy-cluster indicator. Closeness acts either deterministically
//! (within a tolerance tau: keep, else eliminate) or probabilistically
//! (weight by exp(-lambda * distance)). With the strategy distance the
//! two effects coincide, since the distance is only ever 0 or
//! infinity, so the factorial design yields five distinct approximate
//! models plus the exact learner.

use crate::config::{streams, substream_seed, RunConfig};
use crate::dynamics::Trajectory;
use crate::env::Environment;
use crate::features::RewardWeights;
use crate::optimizer::{classify_strategy, CandidateSet};
use crate::{Error, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// Relative slack under which two rewards count as co-optimal; this
/// absorbs roundoff in the argmax without letting genuinely distinct
/// optima collapse.
const CO_OPTIMAL_RTOL: f64 = 1e-9;

fn co_optimal(reward: f64, max_reward: f64) -> bool {
    max_reward - reward <= CO_OPTIMAL_RTOL * max_reward.abs().max(1.0)
}

/// How closeness to the optimum enters the likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Effect {
    /// Accept iff the distance is within `tau`.
    Deterministic { tau: f64 },
    /// Weight by exp(-lambda * distance), lambda > 0.
    Probabilistic { lambda: f64 },
}

/// Which distance the learner compares trajectories with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMetric {
    Reward,
    Euclidean,
    Strategy,
}

/// A learner model: exact inference, or an approximate effect/metric
/// pair. Construct approximate specs through [`LearnerSpec::approximate`]
/// so that the deterministic reward-gap learner with zero tolerance
/// canonicalizes to `Exact` (they define the same model).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearnerSpec {
    Exact,
    Approximate { effect: Effect, metric: DistanceMetric },
}

impl LearnerSpec {
    pub fn approximate(effect: Effect, metric: DistanceMetric) -> LearnerSpec {
        match (effect, metric) {
            (Effect::Deterministic { tau }, DistanceMetric::Reward) if tau == 0.0 => LearnerSpec::Exact,
            _ => LearnerSpec::Approximate { effect, metric },
        }
    }

    /// The collapsed strategy-cluster learner (deterministic and
    /// probabilistic effects coincide on a {0, inf} distance).
    pub fn strategy_based() -> LearnerSpec {
        LearnerSpec::Approximate { effect: Effect::Deterministic { tau: 0.0 }, metric: DistanceMetric::Strategy }
    }
}

/// The seven ideal users evaluated against each other: the exact
/// learner plus the 2x3 effect/metric grid. The two strategy cells
/// are numerically identical but keep separate rows and columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LearnerKind {
    Exact,
    DetReward,
    DetEuclid,
    DetStrategy,
    ProbReward,
    ProbEuclid,
    ProbStrategy,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 7] = [
        LearnerKind::Exact,
        LearnerKind::DetReward,
        LearnerKind::DetEuclid,
        LearnerKind::DetStrategy,
        LearnerKind::ProbReward,
        LearnerKind::ProbEuclid,
        LearnerKind::ProbStrategy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Exact => "exact",
            LearnerKind::DetReward => "det-reward",
            LearnerKind::DetEuclid => "det-euclid",
            LearnerKind::DetStrategy => "det-strategy",
            LearnerKind::ProbReward => "prob-reward",
            LearnerKind::ProbEuclid => "prob-euclid",
            LearnerKind::ProbStrategy => "prob-strategy",
        }
    }

    /// Builds the concrete spec with the configured hyperparameters.
    pub fn spec(self, config: &RunConfig) -> LearnerSpec {
        match self {
            LearnerKind::Exact => LearnerSpec::Exact,
            LearnerKind::DetReward => LearnerSpec::approximate(
                Effect::Deterministic { tau: config.det_reward_tau },
                DistanceMetric::Reward,
            ),
            LearnerKind::DetEuclid => LearnerSpec::approximate(
                Effect::Deterministic { tau: config.det_euclid_tau },
                DistanceMetric::Euclidean,
            ),
            LearnerKind::DetStrategy => LearnerSpec::strategy_based(),
            LearnerKind::ProbReward => LearnerSpec::approximate(
                Effect::Probabilistic { lambda: config.prob_reward_lambda },
                DistanceMetric::Reward,
            ),
            LearnerKind::ProbEuclid => LearnerSpec::approximate(
                Effect::Probabilistic { lambda: config.prob_euclid_lambda },
                DistanceMetric::Euclidean,
            ),
            LearnerKind::ProbStrategy => LearnerSpec::strategy_based(),
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        LearnerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown learner kind: {s}"))
    }
}

/// Reward gap between the best candidate for `weights` and the
/// observed candidate; nonnegative because the optimum is a maximum
/// over the same set the observation comes from.
pub fn distance_reward(weights: &RewardWeights, set: &CandidateSet, obs_idx: usize) -> f64 {
    set.max_reward(weights) - set.reward(weights, obs_idx)
}

/// Mean Euclidean distance between corresponding states (all five
/// components) after the shared start state.
pub fn distance_euclidean(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    if a.states.len() != b.states.len() || a.dt != b.dt {
        return Err(Error::Mismatch {
            context: format!(
                "state-distance operands differ: {} states dt {} vs {} states dt {}",
                a.states.len(),
                a.dt,
                b.states.len(),
                b.dt
            ),
        });
    }
    let steps = a.states.len() - 1;
    if steps == 0 {
        return Ok(0.0);
    }
    let total: f64 = a.states[1..]
        .iter()
        .zip(&b.states[1..])
        .map(|(sa, sb)| {
            sa.as_array()
                .iter()
                .zip(sb.as_array())
                .map(|(p, q)| (p - q) * (p - q))
                .sum::<f64>()
                .sqrt()
        })
        .sum();
    Ok(total / steps as f64)
}

/// Strategy-cluster distance: 0 when both trajectories land in the
/// same cluster of the environment, infinity otherwise.
pub fn distance_strategy(a: &Trajectory, b: &Trajectory, env: &Environment) -> f64 {
    if classify_strategy(a, env) == classify_strategy(b, env) {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Likelihood of observing candidate `obs_idx` if the true weights
/// were `weights`, under a learner spec. Exact: 1 iff the observation
/// is (co-)optimal. Deterministic: 1 iff its distance to the optimum
/// is within tau. Probabilistic: exp(-lambda * distance). Strategy
/// metric: 1 iff the observation shares the optimum's cluster, for
/// either effect.
pub fn likelihood(spec: &LearnerSpec, weights: &RewardWeights, set: &CandidateSet, obs_idx: usize) -> f64 {
    match spec {
        LearnerSpec::Exact => {
            if co_optimal(set.reward(weights, obs_idx), set.max_reward(weights)) {
                1.0
            } else {
                0.0
            }
        }
        LearnerSpec::Approximate { effect, metric } => {
            let opt_idx = set.argmax(weights);
            match metric {
                DistanceMetric::Strategy => {
                    if set.labels[opt_idx] == set.labels[obs_idx] {
                        1.0
                    } else {
                        0.0
                    }
                }
                _ => {
                    let d = match metric {
                        DistanceMetric::Reward => set.reward(weights, opt_idx) - set.reward(weights, obs_idx),
                        DistanceMetric::Euclidean => {
                            distance_euclidean(&set.trajectories[opt_idx], &set.trajectories[obs_idx])
                                .expect("candidates of one set share horizon and dt")
                        }
                        DistanceMetric::Strategy => unreachable!(),
                    };
                    match effect {
                        Effect::Deterministic { tau } => {
                            if d <= *tau {
                                1.0
                            } else {
                                0.0
                            }
                        }
                        Effect::Probabilistic { lambda } => (-lambda * d).exp(),
                    }
                }
            }
        }
    }
}

/// The candidate weight vectors a belief ranges over; the true
/// teacher weights always sit at `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSet {
    pub weights: Vec<RewardWeights>,
    pub target: usize,
}

impl ThetaSet {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn target_weights(&self) -> &RewardWeights {
        &self.weights[self.target]
    }
}

/// Samples `config.theta_count` candidate weight vectors uniformly
/// from the configured box of nonpositive weights (seeded substream
/// of the master seed) and appends the true weights last.
pub fn sample_candidate_thetas(config: &RunConfig) -> ThetaSet {
    let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(config.seed, streams::THETAS));
    let mut weights = Vec::with_capacity(config.theta_count + 1);
    for _ in 0..config.theta_count {
        let mut w = [0.0; 5];
        for (slot, low) in w.iter_mut().zip(config.theta_lows) {
            *slot = rng.random_range(low..=0.0);
        }
        weights.push(RewardWeights(w));
    }
    let target = weights.len();
    weights.push(RewardWeights(config.target_theta));
    ThetaSet { weights, target }
}

/// A belief over the candidate weights: unnormalized masses plus the
/// prior they started from. Updates multiply by likelihoods and never
/// renormalize, so an all-zero mass vector is detectable rather than
/// silently rescaled.
#[derive(Debug, Clone)]
pub struct Belief {
    pub thetas: Arc<ThetaSet>,
    pub prior: Vec<f64>,
    pub masses: Vec<f64>,
}

impl Belief {
    /// Uniform prior: one unit of mass per candidate.
    pub fn uniform(thetas: Arc<ThetaSet>) -> Belief {
        let n = thetas.len();
        Belief { thetas, prior: vec![1.0; n], masses: vec![1.0; n] }
    }

    /// Arbitrary nonnegative prior masses (at least one positive).
    pub fn with_prior(thetas: Arc<ThetaSet>, prior: Vec<f64>) -> Result<Belief> {
        if prior.len() != thetas.len() {
            return Err(Error::Mismatch {
                context: format!("prior has {} entries for {} candidates", prior.len(), thetas.len()),
            });
        }
        if prior.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::NonFinite { context: "prior masses" });
        }
        if prior.iter().all(|m| *m == 0.0) {
            return Err(Error::DegenerateBelief);
        }
        Ok(Belief { thetas, masses: prior.clone(), prior })
    }

    /// Folds one observation into the belief: every candidate's mass
    /// is multiplied by its likelihood of producing the observation.
    pub fn updated(&self, spec: &LearnerSpec, set: &CandidateSet, obs_idx: usize) -> Belief {
        let masses = self
            .masses
            .iter()
            .zip(&self.thetas.weights)
            .map(|(m, w)| m * likelihood(spec, w, set, obs_idx))
            .collect();
        Belief { thetas: Arc::clone(&self.thetas), prior: self.prior.clone(), masses }
    }

    /// True when every candidate's mass has reached zero.
    pub fn is_degenerate(&self) -> bool {
        self.masses.iter().all(|m| *m == 0.0)
    }

    /// Normalized posterior mass on candidate `idx`.
    pub fn posterior(&self, idx: usize) -> Result<f64> {
        let total: f64 = self.masses.iter().sum();
        if total == 0.0 {
            return Err(Error::DegenerateBelief);
        }
        Ok(self.masses[idx] / total)
    }

    /// Normalized posterior mass on the true weights.
    pub fn posterior_target_prob(&self) -> Result<f64> {
        self.posterior(self.thetas.target)
    }
}
