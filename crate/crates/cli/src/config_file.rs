//! Flat `key = value` run configuration files.
//!
//! Lines hold one assignment each; `#` starts a comment and blank
//! lines are skipped. Unknown keys are rejected so a typo cannot
//! silently fall back to a default. `render` emits every key with its
//! current value in canonical order, and `parse(render(c)) == c`.

use anyhow::{anyhow, bail, Context, Result};
use driveteach_core::{LearnerKind, PoolMode, RunConfig};
use std::fmt::Write as _;
use std::path::Path;

pub fn load(path: &Path) -> Result<RunConfig> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn parse(text: &str) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected `key = value`, got {raw:?}", idx + 1))?;
        apply(&mut config, key.trim(), value.trim()).with_context(|| format!("line {}", idx + 1))?;
    }
    Ok(config)
}

fn apply(config: &mut RunConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "seed" => config.seed = value.parse()?,
        "dt" => config.dynamics.dt = value.parse()?,
        "horizon" => config.dynamics.horizon = value.parse()?,
        "axle_length" => config.dynamics.axle_length = value.parse()?,
        "alpha_max" => config.dynamics.alpha_max = value.parse()?,
        "u1_max" => config.dynamics.u1_max = value.parse()?,
        "u2_max" => config.dynamics.u2_max = value.parse()?,
        "lane_width" => config.road.lane_width = value.parse()?,
        "robot_v0" => config.road.robot_v0 = value.parse()?,
        "goal_lookahead" => config.road.goal_lookahead = value.parse()?,
        "sigma_major" => config.kernel.sigma_major = value.parse()?,
        "sigma_minor" => config.kernel.sigma_minor = value.parse()?,
        "strong_accel" => config.maneuvers.strong_accel = value.parse()?,
        "mild_accel" => config.maneuvers.mild_accel = value.parse()?,
        "accel_steps" => config.maneuvers.accel_steps = value.parse()?,
        "change_steps" => {
            let parts = split_list(value)?;
            let steps: Vec<usize> = parts
                .iter()
                .map(|p| p.parse::<usize>().map_err(anyhow::Error::from))
                .collect::<Result<_>>()?;
            config.maneuvers.change_steps = steps
                .try_into()
                .map_err(|v: Vec<usize>| anyhow!("change_steps wants 3 values, got {}", v.len()))?;
        }
        "lateral_gain" => config.maneuvers.lateral_gain = value.parse()?,
        "approach_max" => config.maneuvers.approach_max = value.parse()?,
        "heading_gain" => config.maneuvers.heading_gain = value.parse()?,
        "refine" => config.maneuvers.refine = value.parse()?,
        "refine_knot_stride" => config.maneuvers.refine_knot_stride = value.parse()?,
        "refine_iterations" => config.maneuvers.refine_iterations = value.parse()?,
        "gamma" => config.gamma = value.parse()?,
        "target_theta" => config.target_theta = parse_five(value)?,
        "theta_lows" => config.theta_lows = parse_five(value)?,
        "theta_count" => config.theta_count = value.parse()?,
        "pool_mode" => {
            config.pool_mode = match value {
                "sample" => PoolMode::Sample,
                "full" => PoolMode::Full,
                other => bail!("pool_mode must be `sample` or `full`, got {other}"),
            }
        }
        "pool_per_class" => config.pool_per_class = value.parse()?,
        "max_examples" => config.max_examples = value.parse()?,
        "coverage_epsilon" => config.coverage_epsilon = value.parse()?,
        "det_reward_tau" => config.det_reward_tau = value.parse()?,
        "det_euclid_tau" => config.det_euclid_tau = value.parse()?,
        "prob_reward_lambda" => config.prob_reward_lambda = value.parse()?,
        "prob_euclid_lambda" => config.prob_euclid_lambda = value.parse()?,
        "best_model" => {
            config.best_model = value.parse::<LearnerKind>().map_err(|e| anyhow!(e))?
        }
        "baseline_samples" => config.baseline_samples = value.parse()?,
        "baseline_length" => config.baseline_length = value.parse()?,
        "reward_gap_threshold" => {
            config.reward_gap_threshold =
                if value == "auto" { None } else { Some(value.parse()?) }
        }
        "testgen_budget" => config.testgen_budget = value.parse()?,
        other => bail!("unknown configuration key: {other}"),
    }
    Ok(())
}

fn split_list(value: &str) -> Result<Vec<&str>> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("empty element in list {value:?}");
    }
    Ok(parts)
}

fn parse_five(value: &str) -> Result<[f64; 5]> {
    let parts = split_list(value)?;
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(anyhow::Error::from))
        .collect::<Result<_>>()?;
    nums.try_into().map_err(|v: Vec<f64>| anyhow!("expected 5 values, got {}", v.len()))
}

fn join<T: ToString>(values: &[T]) -> String {
    values.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Every key with its current value, in the order `apply` documents.
pub fn render(config: &RunConfig) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| writeln!(out, "{k} = {v}").unwrap();
    kv("seed", config.seed.to_string());
    kv("dt", config.dynamics.dt.to_string());
    kv("horizon", config.dynamics.horizon.to_string());
    kv("axle_length", config.dynamics.axle_length.to_string());
    kv("alpha_max", config.dynamics.alpha_max.to_string());
    kv("u1_max", config.dynamics.u1_max.to_string());
    kv("u2_max", config.dynamics.u2_max.to_string());
    kv("lane_width", config.road.lane_width.to_string());
    kv("robot_v0", config.road.robot_v0.to_string());
    kv("goal_lookahead", config.road.goal_lookahead.to_string());
    kv("sigma_major", config.kernel.sigma_major.to_string());
    kv("sigma_minor", config.kernel.sigma_minor.to_string());
    kv("strong_accel", config.maneuvers.strong_accel.to_string());
    kv("mild_accel", config.maneuvers.mild_accel.to_string());
    kv("accel_steps", config.maneuvers.accel_steps.to_string());
    kv("change_steps", join(&config.maneuvers.change_steps));
    kv("lateral_gain", config.maneuvers.lateral_gain.to_string());
    kv("approach_max", config.maneuvers.approach_max.to_string());
    kv("heading_gain", config.maneuvers.heading_gain.to_string());
    kv("refine", config.maneuvers.refine.to_string());
    kv("refine_knot_stride", config.maneuvers.refine_knot_stride.to_string());
    kv("refine_iterations", config.maneuvers.refine_iterations.to_string());
    kv("gamma", config.gamma.to_string());
    kv("target_theta", join(&config.target_theta));
    kv("theta_lows", join(&config.theta_lows));
    kv("theta_count", config.theta_count.to_string());
    kv(
        "pool_mode",
        match config.pool_mode {
            PoolMode::Sample => "sample".to_string(),
            PoolMode::Full => "full".to_string(),
        },
    );
    kv("pool_per_class", config.pool_per_class.to_string());
    kv("max_examples", config.max_examples.to_string());
    kv("coverage_epsilon", config.coverage_epsilon.to_string());
    kv("det_reward_tau", config.det_reward_tau.to_string());
    kv("det_euclid_tau", config.det_euclid_tau.to_string());
    kv("prob_reward_lambda", config.prob_reward_lambda.to_string());
    kv("prob_euclid_lambda", config.prob_euclid_lambda.to_string());
    kv("best_model", config.best_model.to_string());
    kv("baseline_samples", config.baseline_samples.to_string());
    kv("baseline_length", config.baseline_length.to_string());
    kv(
        "reward_gap_threshold",
        config.reward_gap_threshold.map_or("auto".to_string(), |t| t.to_string()),
    );
    kv("testgen_budget", config.testgen_budget.to_string());
    out
}
