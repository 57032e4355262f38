//! Run-wide configuration with the documented reference defaults.
//!
//! Every tunable number in the pipeline lives here: the physical
//! constants of the vehicle, the road geometry, the proximity kernel,
//! the maneuver library used to build candidate trajectories, the
//! weight-sampling box, and the per-model hyperparameters. The
//! `Default` impl is the reference run; golden outputs are pinned
//! against it.

use crate::learners::LearnerKind;

/// Bicycle-model integration constants and control bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsParams {
    /// Integration step in seconds.
    pub dt: f64,
    /// Number of control steps per trajectory (states = horizon + 1).
    pub horizon: usize,
    /// Distance between front and rear axles.
    pub axle_length: f64,
    /// Steering-angle bound (radians, symmetric).
    pub alpha_max: f64,
    /// Steering-rate bound (rad/s, symmetric).
    pub u1_max: f64,
    /// Acceleration bound (per s^2, symmetric).
    pub u2_max: f64,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        Self {
            dt: 0.1,
            horizon: 50,
            axle_length: 3.0,
            alpha_max: 0.5,
            u1_max: 2.0,
            u2_max: 10.0,
        }
    }
}

/// Road geometry and the robot's fixed start. Cars drive along +y;
/// the three lane centers sit at x = -w, 0, +w for lane width w.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadParams {
    /// Lane width w.
    pub lane_width: f64,
    /// Robot initial speed (center lane, heading straight down +y).
    pub robot_v0: f64,
    /// Forward goal line y-offset used by the drive-forward goal
    /// feature (distance remaining to a line the horizon cannot
    /// reach, so the feature stays nonnegative).
    pub goal_lookahead: f64,
}

impl Default for RoadParams {
    fn default() -> Self {
        Self {
            lane_width: 4.0,
            robot_v0: 50.0,
            goal_lookahead: 400.0,
        }
    }
}

/// Anisotropic Gaussian proximity kernel: major axis along the other
/// car's heading, minor axis across it.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelParams {
    pub sigma_major: f64,
    pub sigma_minor: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        // 2w along the direction of travel, w/2 across it (w = 4).
        Self {
            sigma_major: 8.0,
            sigma_minor: 2.0,
        }
    }
}

/// Maneuver library used to synthesize the per-environment candidate
/// set, plus the lane-tracking controller gains that turn a template
/// into bounded controls.
#[derive(Debug, Clone, PartialEq)]
pub struct ManeuverParams {
    /// |u2| for the strong brake/accelerate profiles.
    pub strong_accel: f64,
    /// |u2| for the mild brake/accelerate profiles.
    pub mild_accel: f64,
    /// Number of leading steps the speed profile applies u2.
    pub accel_steps: usize,
    /// Step indices at which the early/mid/late lane changes begin.
    pub change_steps: [usize; 3],
    /// Lateral error to commanded lateral closure rate gain (1/s);
    /// the controller divides the rate by forward speed to get an
    /// approach angle, so this pole is speed-independent.
    pub lateral_gain: f64,
    /// Bound on the commanded approach angle (radians off straight).
    pub approach_max: f64,
    /// Heading error to commanded heading-rate gain (1/s).
    pub heading_gain: f64,
    /// Enable finite-difference refinement of the winning candidate.
    pub refine: bool,
    /// Refinement: control knot spacing in steps.
    pub refine_knot_stride: usize,
    /// Refinement: number of ascent sweeps.
    pub refine_iterations: usize,
}

impl Default for ManeuverParams {
    fn default() -> Self {
        Self {
            strong_accel: 8.0,
            mild_accel: 6.0,
            accel_steps: 25,
            change_steps: [0, 15, 30],
            lateral_gain: 2.0,
            approach_max: 0.15,
            heading_gain: 4.0,
            refine: false,
            refine_knot_stride: 5,
            refine_iterations: 12,
        }
    }
}

/// Whether teaching searches the stratified sample or the full catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolMode {
    /// Stratified class-balanced subsample (the default).
    Sample,
    /// Every catalog environment.
    Full,
}

/// Top-level configuration for a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Master seed; all random substreams derive from it.
    pub seed: u64,
    pub dynamics: DynamicsParams,
    pub road: RoadParams,
    pub kernel: KernelParams,
    pub maneuvers: ManeuverParams,
    /// Reward discount over steps (1 = undiscounted).
    pub gamma: f64,
    /// The teacher's true weight vector.
    pub target_theta: [f64; 5],
    /// Lower corner of the candidate-weight sampling box; the upper
    /// corner is the origin (all weights are nonpositive).
    pub theta_lows: [f64; 5],
    /// Number of sampled candidate weights (the target is appended).
    pub theta_count: usize,
    pub pool_mode: PoolMode,
    /// Environments drawn per class in `PoolMode::Sample`.
    pub pool_per_class: usize,
    /// Maximum teaching-sequence length.
    pub max_examples: usize,
    /// Marginal-gain cutoff for the coverage-augmented selector.
    pub coverage_epsilon: f64,
    /// Calibrated tolerance for the deterministic reward-gap learner.
    pub det_reward_tau: f64,
    /// Calibrated tolerance for the deterministic state-distance learner.
    pub det_euclid_tau: f64,
    /// Calibrated rate for the probabilistic reward-gap learner.
    pub prob_reward_lambda: f64,
    /// Calibrated rate for the probabilistic state-distance learner.
    pub prob_euclid_lambda: f64,
    /// Which approximate learner the coverage-augmented selector teaches.
    pub best_model: LearnerKind,
    /// Number of random sequences scored by the median baseline.
    pub baseline_samples: usize,
    /// Length of each baseline sequence.
    pub baseline_length: usize,
    /// Reward-gap threshold for test-environment alternates; `None`
    /// derives 0.5x the median candidate gap across the pool.
    pub reward_gap_threshold: Option<f64>,
    /// Draw budget for test-environment rejection sampling.
    pub testgen_budget: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 143,
            dynamics: DynamicsParams::default(),
            road: RoadParams::default(),
            kernel: KernelParams::default(),
            maneuvers: ManeuverParams::default(),
            gamma: 1.0,
            target_theta: [-64.0, -0.1, -1.0, -0.1, -0.5],
            theta_lows: [-128.0, -1.0, -2.0, -1.0, -1.0],
            theta_count: 100,
            pool_mode: PoolMode::Sample,
            pool_per_class: 100,
            max_examples: 10,
            coverage_epsilon: 0.01,
            det_reward_tau: 1e-1,
            det_euclid_tau: 1e1,
            prob_reward_lambda: 1e2,
            prob_euclid_lambda: 1e-1,
            best_model: LearnerKind::DetEuclid,
            baseline_samples: 1000,
            baseline_length: 8,
            reward_gap_threshold: None,
            testgen_budget: 200_000,
        }
    }
}

impl RunConfig {
    /// The hyperparameter search grid: eleven decades centered on 1.
    pub fn hyper_grid() -> [f64; 11] {
        let mut grid = [0.0; 11];
        for (i, e) in (-5..=5).enumerate() {
            grid[i] = 10f64.powi(e);
        }
        grid
    }

    /// Basic sanity checks; called by entry points that accept
    /// externally supplied configurations.
    pub fn validate(&self) -> crate::Result<()> {
        let d = &self.dynamics;
        let positive = [
            ("dt", d.dt),
            ("axle_length", d.axle_length),
            ("alpha_max", d.alpha_max),
            ("u1_max", d.u1_max),
            ("u2_max", d.u2_max),
            ("lane_width", self.road.lane_width),
            ("sigma_major", self.kernel.sigma_major),
            ("sigma_minor", self.kernel.sigma_minor),
            ("gamma", self.gamma),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(crate::Error::Config(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if d.horizon == 0 {
            return Err(crate::Error::Config("horizon must be >= 1".into()));
        }
        if self.max_examples == 0 {
            return Err(crate::Error::Config("max_examples must be >= 1".into()));
        }
        for step in self.maneuvers.change_steps {
            if step >= d.horizon {
                return Err(crate::Error::Config(format!(
                    "lane-change start step {step} must precede the horizon {}",
                    d.horizon
                )));
            }
        }
        Ok(())
    }
}

/// Derives an independent seed for a named random substream so that
/// enumeration order of one stream never perturbs another.
/// SplitMix64 finalizer over master ^ stream tag.
pub fn substream_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Substream tags for the random streams used across the pipeline.
pub mod streams {
    pub const THETAS: u64 = 1;
    pub const POOL: u64 = 2;
    pub const BASELINE: u64 = 3;
    pub const COVERAGE_RANDOM: u64 = 4;
    pub const TESTGEN: u64 = 5;
}
