//! Environment catalog: a three-lane highway segment with one other
//! car, enumerated over a fixed grid of goals, relative placements,
//! and velocity profiles.
//!
//! The robot always starts in the center lane at a fixed speed,
//! heading straight along +y. The other car holds its lane and ramps
//! its speed linearly from `v0` to `vf` over `accel_time` seconds,
//! then holds `vf`. Environments fall into four classes by the
//! interaction they set up: merging, braking, tailgating, or other.

use crate::config::RunConfig;
use crate::dynamics::VehicleState;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

/// The robot's task in an environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Goal {
    MergeRight,
    DriveForward,
}

impl Goal {
    pub fn name(self) -> &'static str {
        match self {
            Goal::MergeRight => "merge-right",
            Goal::DriveForward => "drive-forward",
        }
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Goal {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [Goal::MergeRight, Goal::DriveForward]
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| format!("unknown goal: {s}"))
    }
}

/// One of the three lanes; centers sit at x = -w, 0, +w.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lane {
    Left,
    Center,
    Right,
}

impl Lane {
    pub const ALL: [Lane; 3] = [Lane::Left, Lane::Center, Lane::Right];

    pub fn center(self, lane_width: f64) -> f64 {
        match self {
            Lane::Left => -lane_width,
            Lane::Center => 0.0,
            Lane::Right => lane_width,
        }
    }
}

impl fmt::Display for Lane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Lane {
    pub fn name(self) -> &'static str {
        match self {
            Lane::Left => "left",
            Lane::Center => "center",
            Lane::Right => "right",
        }
    }
}

impl FromStr for Lane {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Lane::ALL.into_iter().find(|l| l.name() == s).ok_or_else(|| format!("unknown lane: {s}"))
    }
}

/// Grid coordinates of one catalog environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentSpec {
    pub goal: Goal,
    /// Other car's initial longitudinal offset from the robot
    /// (positive = ahead of the robot).
    pub offset: f64,
    /// Lane the other car occupies for the whole episode.
    pub lane: Lane,
    /// Other car's initial speed.
    pub v0: f64,
    /// Seconds over which the other car ramps v0 -> vf (0 = no ramp).
    pub accel_time: f64,
    /// Ramp target speed; `None` iff `accel_time == 0`.
    pub vf: Option<f64>,
}

/// Interaction class of an environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnvClassKind {
    Merging,
    Braking,
    Tailgating,
    Other,
}

impl EnvClassKind {
    pub const ALL: [EnvClassKind; 4] = [
        EnvClassKind::Merging,
        EnvClassKind::Braking,
        EnvClassKind::Tailgating,
        EnvClassKind::Other,
    ];
}

impl EnvClassKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvClassKind::Merging => "merging",
            EnvClassKind::Braking => "braking",
            EnvClassKind::Tailgating => "tailgating",
            EnvClassKind::Other => "other",
        }
    }
}

impl fmt::Display for EnvClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvClassKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        EnvClassKind::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown environment class: {s}"))
    }
}

/// Enumeration grids, in canonical order.
pub mod grid {
    use super::{Goal, Lane};

    pub const GOALS: [Goal; 2] = [Goal::MergeRight, Goal::DriveForward];
    pub const LANES: [Lane; 3] = Lane::ALL;
    pub const ACCEL_TIMES: [f64; 4] = [0.5, 1.0, 1.5, 2.0];
    pub const RAMP_TARGETS: [f64; 4] = [20.0, 30.0, 70.0, 80.0];

    /// [-240, -220, ..., -100] then [100, 120, ..., 240].
    pub fn offsets() -> Vec<f64> {
        let mut out: Vec<f64> = (0..8).map(|i| -240.0 + 20.0 * i as f64).collect();
        out.extend((0..8).map(|i| 100.0 + 20.0 * i as f64));
        out
    }

    /// [20, 25, ..., 80].
    pub fn initial_speeds() -> Vec<f64> {
        (0..13).map(|i| 20.0 + 5.0 * i as f64).collect()
    }

    /// The 17 velocity profiles: constant speed, then every
    /// (accel_time, vf) pair.
    pub fn velocity_profiles() -> Vec<(f64, Option<f64>)> {
        let mut out = vec![(0.0, None)];
        for &a in &ACCEL_TIMES {
            for &vf in &RAMP_TARGETS {
                out.push((a, Some(vf)));
            }
        }
        out
    }
}

/// Enumerates the full catalog in canonical order: goal, then offset,
/// then lane, then initial speed, then velocity profile, each in grid
/// order. The catalog index of a spec is its position in this list.
pub fn enumerate_environments() -> Vec<EnvironmentSpec> {
    let offsets = grid::offsets();
    let speeds = grid::initial_speeds();
    let profiles = grid::velocity_profiles();
    let mut out =
        Vec::with_capacity(grid::GOALS.len() * offsets.len() * grid::LANES.len() * speeds.len() * profiles.len());
    for &goal in &grid::GOALS {
        for &offset in &offsets {
            for &lane in &grid::LANES {
                for &v0 in &speeds {
                    for &(accel_time, vf) in &profiles {
                        out.push(EnvironmentSpec { goal, offset, lane, v0, accel_time, vf });
                    }
                }
            }
        }
    }
    out
}

/// Classifies an environment by the interaction it sets up:
/// merging (other car in the right lane while the robot must merge),
/// braking (other car ahead in the robot's lane), tailgating (other
/// car behind in the robot's lane), and other (no forced interaction).
pub fn classify_environment(spec: &EnvironmentSpec) -> EnvClassKind {
    match (spec.lane, spec.goal) {
        (Lane::Right, Goal::MergeRight) => EnvClassKind::Merging,
        (Lane::Center, Goal::DriveForward) if spec.offset > 0.0 => EnvClassKind::Braking,
        (Lane::Center, Goal::DriveForward) if spec.offset < 0.0 => EnvClassKind::Tailgating,
        _ => EnvClassKind::Other,
    }
}

/// Per-class environment counts over a spec list, indexed in
/// [`EnvClassKind::ALL`] order.
pub fn class_census(specs: &[EnvironmentSpec]) -> [usize; 4] {
    let mut counts = [0usize; 4];
    for spec in specs {
        let class = classify_environment(spec);
        let slot = EnvClassKind::ALL.iter().position(|c| *c == class).unwrap();
        counts[slot] += 1;
    }
    counts
}

/// Other car's pose at one step. Heading is constant: it never
/// steers, so its covariance frame never rotates either.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OtherCarState {
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub heading: f64,
}

/// The other car's speed at time `t` seconds: linear ramp from v0 to
/// vf over `accel_time`, then constant.
fn ramp_speed(spec: &EnvironmentSpec, t: f64) -> f64 {
    match spec.vf {
        None => spec.v0,
        Some(vf) => {
            let frac = (t / spec.accel_time).min(1.0);
            spec.v0 + (vf - spec.v0) * frac
        }
    }
}

/// Tabulates the other car's poses for `horizon + 1` steps. Speeds
/// follow the linear ramp; positions accumulate the trapezoid rule,
/// which integrates the piecewise-linear speed exactly because every
/// ramp endpoint lands on a step boundary.
pub fn other_car_trajectory(spec: &EnvironmentSpec, horizon: usize, dt: f64, lane_width: f64) -> Vec<OtherCarState> {
    let x = spec.lane.center(lane_width);
    let mut out = Vec::with_capacity(horizon + 1);
    let mut y = spec.offset;
    let mut v = ramp_speed(spec, 0.0);
    out.push(OtherCarState { x, y, v, heading: FRAC_PI_2 });
    for t in 1..=horizon {
        let v_next = ramp_speed(spec, t as f64 * dt);
        y += 0.5 * (v + v_next) * dt;
        v = v_next;
        out.push(OtherCarState { x, y, v: v_next, heading: FRAC_PI_2 });
    }
    out
}

/// A fully instantiated environment: road geometry, the robot's start
/// state, and the other car's tabulated motion.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub spec: EnvironmentSpec,
    pub horizon: usize,
    pub dt: f64,
    pub lane_width: f64,
    pub robot_start: VehicleState,
    /// `horizon + 1` poses of the other car.
    pub other: Vec<OtherCarState>,
    /// Forward goal line for the drive-forward goal feature.
    pub goal_y: f64,
}

impl Environment {
    pub fn lane_center(&self, lane: Lane) -> f64 {
        lane.center(self.lane_width)
    }

    /// Lane whose center is nearest to `x` (earlier lane wins ties).
    pub fn nearest_lane(&self, x: f64) -> Lane {
        let mut best = Lane::Left;
        let mut best_gap = f64::INFINITY;
        for lane in Lane::ALL {
            let gap = (x - self.lane_center(lane)).abs();
            if gap < best_gap {
                best = lane;
                best_gap = gap;
            }
        }
        best
    }

    /// Whether `x` lies within the occupancy band of `lane`
    /// (|x - center| < w/4).
    pub fn occupies_lane(&self, x: f64, lane: Lane) -> bool {
        (x - self.lane_center(lane)).abs() < self.lane_width / 4.0
    }
}

/// Builds the concrete environment for a spec under a configuration:
/// robot centered at the origin heading +y at its fixed start speed,
/// other car offset along its own lane.
pub fn instantiate(spec: &EnvironmentSpec, config: &RunConfig) -> Environment {
    let d = &config.dynamics;
    let robot_start = VehicleState::new(0.0, 0.0, FRAC_PI_2, config.road.robot_v0, 0.0);
    Environment {
        spec: *spec,
        horizon: d.horizon,
        dt: d.dt,
        lane_width: config.road.lane_width,
        robot_start,
        other: other_car_trajectory(spec, d.horizon, d.dt, config.road.lane_width),
        goal_y: robot_start.y + config.road.goal_lookahead,
    }
}
