//! Reward features of a robot trajectory in an environment, and the
//! per-candidate-set normalization that puts the effort features on a
//! common [0, 1] scale.
//!
//! Five features, all accumulated with a per-step discount `gamma`
//! (1 by default, i.e. undiscounted):
//!
//! * `proximity` - anisotropic Gaussian kernel between the two cars,
//!   elongated along the other car's direction of travel; summed over
//!   every state. Left unnormalized so its scale is comparable across
//!   environments.
//! * `accel_sq` - squared per-step speed changes, summed over every
//!   consecutive state pair.
//! * `speed_dev_sq` - squared deviation from the initial speed.
//! * `turning` - absolute heading deviation from the initial heading.
//! * `goal_dist` - distance still to cover toward the goal: for a
//!   merge, the squared shortfall of x from the target lane center
//!   summed per step; for driving forward, the remaining gap to a
//!   goal line placed beyond the horizon's reach. Both shrink as the
//!   robot makes progress, so a negative weight rewards progress.

use crate::config::KernelParams;
use crate::dynamics::Trajectory;
use crate::env::{Environment, Goal, OtherCarState};
use crate::{Error, Result};

/// Reward weight vector over the five features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardWeights(pub [f64; 5]);

impl RewardWeights {
    pub fn as_array(&self) -> [f64; 5] {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|w| w.is_finite())
    }

    /// Linear reward of a feature vector under these weights.
    pub fn reward(&self, features: &FeatureVector) -> f64 {
        self.0.iter().zip(features.as_array()).map(|(w, f)| w * f).sum()
    }
}

/// The five trajectory features, in weight order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureVector {
    pub proximity: f64,
    pub accel_sq: f64,
    pub speed_dev_sq: f64,
    pub turning: f64,
    pub goal_dist: f64,
}

impl FeatureVector {
    pub fn as_array(&self) -> [f64; 5] {
        [self.proximity, self.accel_sq, self.speed_dev_sq, self.turning, self.goal_dist]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self { proximity: a[0], accel_sq: a[1], speed_dev_sq: a[2], turning: a[3], goal_dist: a[4] }
    }
}

/// Gaussian proximity kernel between a robot position and the other
/// car's pose. The covariance major axis lies along the other car's
/// heading (sigma_major), the minor axis across it (sigma_minor); the
/// kernel peaks at 1 when the positions coincide.
pub fn proximity_kernel(rx: f64, ry: f64, other: &OtherCarState, kernel: &KernelParams) -> f64 {
    let (dx, dy) = (rx - other.x, ry - other.y);
    let (sin_h, cos_h) = other.heading.sin_cos();
    let along = dx * cos_h + dy * sin_h;
    let across = -dx * sin_h + dy * cos_h;
    let m2 = (along / kernel.sigma_major).powi(2) + (across / kernel.sigma_minor).powi(2);
    (-0.5 * m2).exp()
}

/// Computes the raw (unnormalized) feature vector of a trajectory in
/// its environment. The trajectory must share the environment's step
/// size and horizon.
pub fn feature_vector(
    traj: &Trajectory,
    env: &Environment,
    gamma: f64,
    kernel: &KernelParams,
) -> Result<FeatureVector> {
    if traj.horizon() != env.horizon || traj.dt != env.dt {
        return Err(Error::Mismatch {
            context: format!(
                "trajectory has horizon {} dt {}, environment expects {} dt {}",
                traj.horizon(),
                traj.dt,
                env.horizon,
                env.dt
            ),
        });
    }
    let states = &traj.states;
    let first = states[0];
    let merge_target = first.x + env.lane_width;

    let mut proximity = 0.0;
    let mut accel_sq = 0.0;
    let mut speed_dev_sq = 0.0;
    let mut turning = 0.0;
    let mut merge_shortfall = 0.0;
    let mut discount = 1.0;
    for (t, s) in states.iter().enumerate() {
        proximity += discount * proximity_kernel(s.x, s.y, &env.other[t], kernel);
        speed_dev_sq += discount * (s.v - first.v) * (s.v - first.v);
        turning += discount * (s.heading - first.heading).abs();
        merge_shortfall += discount * (merge_target - s.x).max(0.0).powi(2);
        if t + 1 < states.len() {
            let dv = states[t + 1].v - s.v;
            accel_sq += discount * dv * dv;
        }
        discount *= gamma;
    }
    let goal_dist = match env.spec.goal {
        Goal::MergeRight => merge_shortfall,
        Goal::DriveForward => (env.goal_y - states[states.len() - 1].y).max(0.0),
    };
    Ok(FeatureVector { proximity, accel_sq, speed_dev_sq, turning, goal_dist })
}

/// Min-max scaling constants for the four effort/goal features
/// (proximity is never rescaled).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureScaling {
    /// Per-feature minima over the candidate set (accel_sq through
    /// goal_dist).
    pub min: [f64; 4],
    /// Per-feature maxima over the candidate set.
    pub max: [f64; 4],
}

impl FeatureScaling {
    /// Fits the scaling over a set of raw feature vectors.
    pub fn fit(raw: &[FeatureVector]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Empty("feature set"));
        }
        let mut min = [f64::INFINITY; 4];
        let mut max = [f64::NEG_INFINITY; 4];
        for f in raw {
            for (i, v) in f.as_array()[1..].iter().enumerate() {
                min[i] = min[i].min(*v);
                max[i] = max[i].max(*v);
            }
        }
        Ok(Self { min, max })
    }

    /// Rescales one raw vector: each effort feature maps to
    /// (v - min) / (max - min), or to 0 where the set was constant.
    /// Proximity passes through unchanged.
    pub fn apply(&self, raw: &FeatureVector) -> FeatureVector {
        let a = raw.as_array();
        let mut out = [a[0], 0.0, 0.0, 0.0, 0.0];
        for i in 0..4 {
            let span = self.max[i] - self.min[i];
            out[i + 1] = if span > 0.0 { (a[i + 1] - self.min[i]) / span } else { 0.0 };
        }
        FeatureVector::from_array(out)
    }
}

/// Min-max normalizes a set of feature vectors jointly, returning the
/// rescaled vectors and the constants used (so externally produced
/// trajectories can be scored on the same scale).
pub fn normalize_features(raw: &[FeatureVector]) -> Result<(Vec<FeatureVector>, FeatureScaling)> {
    let scaling = FeatureScaling::fit(raw)?;
    Ok((raw.iter().map(|f| scaling.apply(f)).collect(), scaling))
}
