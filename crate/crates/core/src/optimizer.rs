//! Candidate trajectory synthesis and the teacher's argmax.
//!
//! Each environment gets a finite library of maneuvers: stay in lane
//! or change to either neighbor lane at an early/mid/late time, each
//! combined with one of five speed profiles. A proportional
//! lane-tracking controller turns a maneuver template into bounded
//! controls through the bicycle model, so every candidate is
//! dynamically feasible by construction. Features are normalized
//! jointly across the candidate set, and the optimal trajectory for a
//! weight vector is the candidate maximizing the linear reward, ties
//! broken toward the earlier candidate.

use crate::config::{DynamicsParams, ManeuverParams, RunConfig};
use crate::dynamics::{step, ControlInput, Trajectory, VehicleState};
use crate::env::{classify_environment, EnvClassKind, Environment, Goal, Lane};
use crate::features::{feature_vector, normalize_features, FeatureScaling, FeatureVector, RewardWeights};
use crate::{Error, Result};
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

/// The eight strategy clusters, two per environment class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyLabel {
    /// Merge into the right lane in front of the other car.
    MergeAhead,
    /// Merge into the right lane behind the other car.
    MergeBehind,
    /// Keep the lane behind a slower leader.
    StayBehind,
    /// Change lanes to pass a slower leader.
    PassLane,
    /// Change lanes away from a tailgater.
    AvoidTailgater,
    /// Hold the lane ahead of a tailgater.
    SpeedUp,
    /// Merge right with no interaction forced.
    OtherMerge,
    /// Drive forward with no interaction forced.
    OtherForward,
}

impl StrategyLabel {
    pub const ALL: [StrategyLabel; 8] = [
        StrategyLabel::MergeAhead,
        StrategyLabel::MergeBehind,
        StrategyLabel::StayBehind,
        StrategyLabel::PassLane,
        StrategyLabel::AvoidTailgater,
        StrategyLabel::SpeedUp,
        StrategyLabel::OtherMerge,
        StrategyLabel::OtherForward,
    ];

    /// The environment class this cluster belongs to.
    pub fn class(self) -> EnvClassKind {
        match self {
            StrategyLabel::MergeAhead | StrategyLabel::MergeBehind => EnvClassKind::Merging,
            StrategyLabel::StayBehind | StrategyLabel::PassLane => EnvClassKind::Braking,
            StrategyLabel::AvoidTailgater | StrategyLabel::SpeedUp => EnvClassKind::Tailgating,
            StrategyLabel::OtherMerge | StrategyLabel::OtherForward => EnvClassKind::Other,
        }
    }

    /// The two clusters of a class, in canonical order.
    pub fn variants_of(class: EnvClassKind) -> [StrategyLabel; 2] {
        match class {
            EnvClassKind::Merging => [StrategyLabel::MergeAhead, StrategyLabel::MergeBehind],
            EnvClassKind::Braking => [StrategyLabel::StayBehind, StrategyLabel::PassLane],
            EnvClassKind::Tailgating => [StrategyLabel::AvoidTailgater, StrategyLabel::SpeedUp],
            EnvClassKind::Other => [StrategyLabel::OtherMerge, StrategyLabel::OtherForward],
        }
    }
}

impl fmt::Display for StrategyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl StrategyLabel {
    pub fn name(self) -> &'static str {
        match self {
            StrategyLabel::MergeAhead => "merge-ahead",
            StrategyLabel::MergeBehind => "merge-behind",
            StrategyLabel::StayBehind => "stay-behind",
            StrategyLabel::PassLane => "pass-lane",
            StrategyLabel::AvoidTailgater => "avoid-tailgater",
            StrategyLabel::SpeedUp => "speed-up",
            StrategyLabel::OtherMerge => "other-merge",
            StrategyLabel::OtherForward => "other-forward",
        }
    }
}

impl FromStr for StrategyLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        StrategyLabel::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| format!("unknown strategy label: {s}"))
    }
}

/// One of the five speed profiles of the maneuver library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpeedProfile {
    StrongBrake,
    MildBrake,
    Hold,
    MildAccel,
    StrongAccel,
}

impl SpeedProfile {
    pub const ALL: [SpeedProfile; 5] = [
        SpeedProfile::StrongBrake,
        SpeedProfile::MildBrake,
        SpeedProfile::Hold,
        SpeedProfile::MildAccel,
        SpeedProfile::StrongAccel,
    ];

    /// Commanded acceleration during the leading profile window.
    pub fn accel(self, mp: &ManeuverParams) -> f64 {
        match self {
            SpeedProfile::StrongBrake => -mp.strong_accel,
            SpeedProfile::MildBrake => -mp.mild_accel,
            SpeedProfile::Hold => 0.0,
            SpeedProfile::MildAccel => mp.mild_accel,
            SpeedProfile::StrongAccel => mp.strong_accel,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpeedProfile::StrongBrake => "strong-brake",
            SpeedProfile::MildBrake => "mild-brake",
            SpeedProfile::Hold => "hold",
            SpeedProfile::MildAccel => "mild-accel",
            SpeedProfile::StrongAccel => "strong-accel",
        }
    }
}

/// A maneuver template: which lane to end in, when to start moving
/// there (`None` = keep the start lane), and the speed profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ManeuverTemplate {
    pub target_lane: Lane,
    pub change_start: Option<usize>,
    pub profile: SpeedProfile,
}

/// The deduplicated template grid: five stay-in-lane profiles plus
/// both neighbor lanes x three change times x five profiles. Lane
/// changes into the start lane and "no change" timings collapse into
/// the stay-in-lane entries by construction.
pub fn maneuver_templates(mp: &ManeuverParams) -> Vec<ManeuverTemplate> {
    let mut out = Vec::with_capacity(35);
    for profile in SpeedProfile::ALL {
        out.push(ManeuverTemplate { target_lane: Lane::Center, change_start: None, profile });
    }
    for target_lane in [Lane::Left, Lane::Right] {
        for &start in &mp.change_steps {
            for profile in SpeedProfile::ALL {
                out.push(ManeuverTemplate { target_lane, change_start: Some(start), profile });
            }
        }
    }
    out
}

/// Steering-rate command that tracks a target lane center: the
/// lateral error sets a bounded approach angle off straight-ahead,
/// the heading error sets a turn rate, and the turn rate inverts the
/// bicycle yaw equation for a steering angle to chase.
fn steering_control(s: &VehicleState, target_x: f64, mp: &ManeuverParams, d: &DynamicsParams) -> f64 {
    // Command a lateral closure rate proportional to the error, and
    // divide by the forward speed to turn it into an approach angle;
    // the realized closure rate v * sin(approach) is then roughly
    // lateral_gain * error regardless of speed, which keeps the
    // outer loop's pole fixed and the heading/steering cascade damped
    // at every speed profile.
    let speed = s.v.max(1.0);
    let approach =
        (mp.lateral_gain * (target_x - s.x) / speed).clamp(-mp.approach_max, mp.approach_max);
    let desired_heading = FRAC_PI_2 - approach;
    let desired_rate = mp.heading_gain * (desired_heading - s.heading);
    let desired_alpha = if s.v > 1e-6 {
        (desired_rate * d.axle_length / s.v).atan().clamp(-d.alpha_max, d.alpha_max)
    } else {
        0.0
    };
    ((desired_alpha - s.alpha) / d.dt).clamp(-d.u1_max, d.u1_max)
}

/// Rolls one maneuver template into a full bounded-control trajectory
/// from the environment's robot start.
pub fn synthesize_maneuver(env: &Environment, template: &ManeuverTemplate, config: &RunConfig) -> Result<Trajectory> {
    let d = &config.dynamics;
    let mp = &config.maneuvers;
    let start_lane = env.nearest_lane(env.robot_start.x);
    let accel = template.profile.accel(mp);
    let mut states = Vec::with_capacity(d.horizon + 1);
    let mut controls = Vec::with_capacity(d.horizon);
    states.push(env.robot_start);
    for t in 0..d.horizon {
        let s = states[t];
        let lane = match template.change_start {
            Some(change) if t >= change => template.target_lane,
            _ => start_lane,
        };
        let u = ControlInput::new(
            steering_control(&s, env.lane_center(lane), mp, d),
            if t < mp.accel_steps { accel } else { 0.0 },
        );
        states.push(step(&s, u, d)?);
        controls.push(u);
    }
    Ok(Trajectory { dt: d.dt, states, controls })
}

/// A candidate set: the environment, its synthesized trajectories in
/// canonical template order, and their features both raw and
/// normalized under the shared scaling.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    pub env: Environment,
    pub templates: Vec<ManeuverTemplate>,
    pub trajectories: Vec<Trajectory>,
    pub raw_features: Vec<FeatureVector>,
    /// Min-max normalized features; rewards are evaluated on these.
    pub features: Vec<FeatureVector>,
    pub scaling: FeatureScaling,
    pub labels: Vec<StrategyLabel>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    /// Reward of candidate `idx` under `weights` (normalized scale).
    pub fn reward(&self, weights: &RewardWeights, idx: usize) -> f64 {
        weights.reward(&self.features[idx])
    }

    /// Index of the reward-maximizing candidate; the earliest
    /// candidate wins exact ties.
    pub fn argmax(&self, weights: &RewardWeights) -> usize {
        let mut best = 0;
        let mut best_reward = self.reward(weights, 0);
        for idx in 1..self.len() {
            let r = self.reward(weights, idx);
            if r > best_reward {
                best = idx;
                best_reward = r;
            }
        }
        best
    }

    /// Reward of the best candidate under `weights`.
    pub fn max_reward(&self, weights: &RewardWeights) -> f64 {
        self.reward(weights, self.argmax(weights))
    }

    /// Scores an externally produced trajectory on this set's scale.
    pub fn external_reward(&self, weights: &RewardWeights, traj: &Trajectory, config: &RunConfig) -> Result<f64> {
        let raw = feature_vector(traj, &self.env, config.gamma, &config.kernel)?;
        Ok(weights.reward(&self.scaling.apply(&raw)))
    }
}

/// Builds the candidate set for an environment: synthesizes every
/// template, drops exact duplicate state sequences (keeping the
/// first), computes features, and normalizes them jointly.
pub fn candidate_set(env: &Environment, config: &RunConfig) -> Result<CandidateSet> {
    let mut templates = Vec::new();
    let mut trajectories: Vec<Trajectory> = Vec::new();
    for template in maneuver_templates(&config.maneuvers) {
        let traj = synthesize_maneuver(env, &template, config)?;
        if trajectories.iter().any(|t| t.states == traj.states) {
            continue;
        }
        templates.push(template);
        trajectories.push(traj);
    }
    let raw_features: Vec<FeatureVector> = trajectories
        .iter()
        .map(|t| feature_vector(t, env, config.gamma, &config.kernel))
        .collect::<Result<_>>()?;
    let (features, scaling) = normalize_features(&raw_features)?;
    let labels = trajectories.iter().map(|t| classify_strategy(t, env)).collect();
    Ok(CandidateSet {
        env: env.clone(),
        templates,
        trajectories,
        raw_features,
        features,
        scaling,
        labels,
    })
}

/// Assigns a trajectory to one of its environment's two strategy
/// clusters. Merging compares longitudinal positions at the first
/// step the robot occupies the right lane; braking and tailgating
/// split on the robot's final lane; the no-interaction class splits
/// on the environment goal. The boolean is true when a merging
/// trajectory never reached the right lane and the comparison fell
/// back to final positions.
pub fn classify_strategy_detailed(traj: &Trajectory, env: &Environment) -> (StrategyLabel, bool) {
    match classify_environment(&env.spec) {
        EnvClassKind::Merging => {
            for (t, s) in traj.states.iter().enumerate() {
                if env.occupies_lane(s.x, Lane::Right) {
                    let label = if s.y > env.other[t].y {
                        StrategyLabel::MergeAhead
                    } else {
                        StrategyLabel::MergeBehind
                    };
                    return (label, false);
                }
            }
            let last = traj.end();
            let other_last = env.other[env.horizon];
            let label = if last.y > other_last.y { StrategyLabel::MergeAhead } else { StrategyLabel::MergeBehind };
            (label, true)
        }
        EnvClassKind::Braking => {
            let label = if env.nearest_lane(traj.end().x) == Lane::Center {
                StrategyLabel::StayBehind
            } else {
                StrategyLabel::PassLane
            };
            (label, false)
        }
        EnvClassKind::Tailgating => {
            let label = if env.nearest_lane(traj.end().x) == Lane::Center {
                StrategyLabel::SpeedUp
            } else {
                StrategyLabel::AvoidTailgater
            };
            (label, false)
        }
        EnvClassKind::Other => {
            let label = match env.spec.goal {
                Goal::MergeRight => StrategyLabel::OtherMerge,
                Goal::DriveForward => StrategyLabel::OtherForward,
            };
            (label, false)
        }
    }
}

/// [`classify_strategy_detailed`] without the fallback flag.
pub fn classify_strategy(traj: &Trajectory, env: &Environment) -> StrategyLabel {
    classify_strategy_detailed(traj, env).0
}

/// The teacher's choice for a weight vector: candidate index, the
/// trajectory itself (refined away from the library only when
/// refinement is enabled), and its reward on the set's scale.
#[derive(Debug, Clone)]
pub struct OptimalChoice {
    pub index: usize,
    pub trajectory: Trajectory,
    pub reward: f64,
    pub refined: bool,
}

/// Picks the reward-maximizing trajectory for `weights` over the
/// candidate set, optionally polishing it with local refinement.
pub fn optimal_trajectory(weights: &RewardWeights, set: &CandidateSet, config: &RunConfig) -> Result<OptimalChoice> {
    if !weights.is_finite() {
        return Err(Error::NonFinite { context: "reward weights" });
    }
    if set.is_empty() {
        return Err(Error::Empty("candidate set"));
    }
    let index = set.argmax(weights);
    let base_reward = set.reward(weights, index);
    if !config.maneuvers.refine {
        return Ok(OptimalChoice { index, trajectory: set.trajectories[index].clone(), reward: base_reward, refined: false });
    }
    let (trajectory, reward) = refine_controls(weights, set, index, config)?;
    Ok(OptimalChoice { index, trajectory, reward, refined: true })
}

/// Derivative-free ascent over control knots: perturbs blocks of
/// consecutive controls by a shrinking finite step in each direction
/// and keeps strict improvements, so the returned reward never drops
/// below the seed candidate's.
fn refine_controls(
    weights: &RewardWeights,
    set: &CandidateSet,
    seed_idx: usize,
    config: &RunConfig,
) -> Result<(Trajectory, f64)> {
    let d = &config.dynamics;
    let mp = &config.maneuvers;
    let score = |controls: &[ControlInput]| -> Result<(Trajectory, f64)> {
        let traj = crate::dynamics::rollout(set.env.robot_start, controls, d)?;
        let reward = set.external_reward(weights, &traj, config)?;
        Ok((traj, reward))
    };
    let mut controls = set.trajectories[seed_idx].controls.clone();
    let (mut best_traj, mut best_reward) = score(&controls)?;
    let stride = mp.refine_knot_stride.max(1);
    let mut h = [0.25 * d.u1_max, 0.25 * d.u2_max];
    for _ in 0..mp.refine_iterations {
        for knot in (0..controls.len()).step_by(stride) {
            let end = (knot + stride).min(controls.len());
            for dim in 0..2 {
                for dir in [1.0, -1.0] {
                    let mut trial = controls.clone();
                    for u in &mut trial[knot..end] {
                        match dim {
                            0 => u.u1 = (u.u1 + dir * h[0]).clamp(-d.u1_max, d.u1_max),
                            _ => u.u2 = (u.u2 + dir * h[1]).clamp(-d.u2_max, d.u2_max),
                        }
                    }
                    let (traj, reward) = score(&trial)?;
                    if reward > best_reward {
                        controls = trial;
                        best_traj = traj;
                        best_reward = reward;
                        break;
                    }
                }
            }
        }
        h = [h[0] * 0.5, h[1] * 0.5];
    }
    Ok((best_traj, best_reward))
}
