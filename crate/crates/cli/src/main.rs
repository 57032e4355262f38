//! Command-line front end for the teaching pipeline.
//!
//! Commands write line-record and grid files plus a manifest with a
//! SHA-256 digest of each output, so reruns under the same
//! configuration can be checked byte for byte. Configuration comes
//! from a flat key=value file, overridden by `DRIVETEACH_SEED` /
//! `DRIVETEACH_OUT` and then by flags. Failures print one
//! machine-parseable `error kind=... message="..."` line on stderr
//! and exit nonzero.

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use driveteach_cli::records::{AnswerResult, AnswerRow};
use driveteach_cli::{config_file, manifest, records};
use driveteach_core::env::class_census;
use driveteach_core::{
    coverage_augmented_select, coverage_random, cross_evaluate, enumerate_environments,
    generate_test_environments, greedy_select, helpful_environment_count, random_baseline,
    select_hyperparameter, simulated_learner_answer, standard_sequences, tally_examples_by_class,
    Belief, DistanceMetric, EnvClassKind, Error as CoreError, LearnerKind, LearnerSpec, PoolMode,
    RunConfig, Scenario, StrategyLabel, TeachingProblem, TeachingSequence, TestEnvironment,
    Trajectory,
};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Parser)]
#[command(
    name = "driveteach",
    version,
    about = "Teach driving objectives by showing informative optimal demonstrations"
)]
struct Cli {
    /// Flat key = value configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed, overriding the config file and DRIVETEACH_SEED.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory (created if missing; default `out`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Environment pool: the stratified sample or the full catalog.
    #[arg(long, global = true, value_enum, value_name = "MODE")]
    pool: Option<PoolArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PoolArg {
    Sample,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Write the full environment catalog and its class census.
    Enumerate,
    /// Select one teaching sequence and write its records.
    Teach {
        /// Sequence generator id (see `--help` for the list).
        #[arg(long, value_name = "ID")]
        model: String,
    },
    /// Cross-evaluate all generators and answer the held-out tests.
    Evaluate,
    /// Sweep the tolerance/rate grid for the tunable learner models.
    Hyperparam,
    /// Write the demonstration trajectories of one sequence.
    ExportTrajectories {
        /// Sequence generator id (see `--help` for the list).
        #[arg(long, value_name = "ID")]
        model: String,
    },
}

const GENERATOR_IDS: [&str; 9] = [
    "exact",
    "det-reward",
    "det-euclid",
    "prob-reward",
    "prob-euclid",
    "strategy",
    "random",
    "cov-random",
    "cov-best",
];

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                std::process::exit(0);
            }
            eprintln!("error kind=usage message=\"{}\"", escape(&err.to_string()));
            std::process::exit(2);
        }
    };
    match run(cli) {
        Ok(summary) => println!("{summary}"),
        Err(err) => {
            eprintln!(
                "error kind={} message=\"{}\"",
                error_kind(&err),
                escape(&format!("{err:#}"))
            );
            std::process::exit(1);
        }
    }
}

fn escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
}

/// Stable error-kind slug for the stderr error line.
fn error_kind(err: &anyhow::Error) -> &'static str {
    if let Some(core) = err.downcast_ref::<CoreError>() {
        return match core {
            CoreError::NonFinite { .. } => "non-finite",
            CoreError::EmptyControls => "empty-controls",
            CoreError::Mismatch { .. } => "mismatch",
            CoreError::DegenerateBelief => "degenerate-belief",
            CoreError::UnrealizableCluster(_) => "unrealizable-cluster",
            CoreError::TestSearchExhausted { .. } => "test-search",
            CoreError::Empty(_) => "empty",
            CoreError::Config(_) => "config",
        };
    }
    if err.chain().any(|cause| cause.is::<std::io::Error>()) {
        return "io";
    }
    "cli"
}

fn run(cli: Cli) -> Result<String> {
    let mut config = match &cli.config {
        Some(path) => config_file::load(path).map_err(|e| CoreError::Config(format!("{e:#}")))?,
        None => RunConfig::default(),
    };
    if let Ok(raw) = std::env::var("DRIVETEACH_SEED") {
        config.seed = raw
            .trim()
            .parse()
            .map_err(|e| CoreError::Config(format!("DRIVETEACH_SEED={raw}: {e}")))?;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(pool) = cli.pool {
        config.pool_mode = match pool {
            PoolArg::Sample => PoolMode::Sample,
            PoolArg::Full => PoolMode::Full,
        };
    }
    config.validate()?;
    let out = cli
        .out
        .clone()
        .or_else(|| std::env::var_os("DRIVETEACH_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    match &cli.command {
        Command::Enumerate => cmd_enumerate(&config, &out),
        Command::Teach { model } => cmd_teach(&config, &out, model),
        Command::Evaluate => cmd_evaluate(&config, &out),
        Command::Hyperparam => cmd_hyperparam(&config, &out),
        Command::ExportTrajectories { model } => cmd_export_trajectories(&config, &out, model),
    }
}

fn cmd_enumerate(config: &RunConfig, out: &Path) -> Result<String> {
    let specs = enumerate_environments();
    let census = class_census(&specs);
    records::write_catalog(&out.join("catalog.txt"), &specs)?;
    records::write_census(&out.join("census.csv"), &specs)?;
    manifest::write(out, "enumerate", config, &["catalog.txt", "census.csv"])?;
    Ok(format!(
        "enumerate specs={} merging={} braking={} tailgating={} other={}",
        specs.len(),
        census[0],
        census[1],
        census[2],
        census[3],
    ))
}

fn unknown_model(id: &str) -> anyhow::Error {
    CoreError::Config(format!("unknown model id {id}; expected one of {}", GENERATOR_IDS.join(", ")))
        .into()
}

/// Runs the generator named by a model id on the shared problem.
fn sequence_for(problem: &TeachingProblem, id: &str) -> Result<TeachingSequence> {
    let config = &problem.config;
    let seq = match id {
        "exact" => greedy_select(problem, &LearnerKind::Exact.spec(config), id)?,
        "det-reward" => greedy_select(problem, &LearnerKind::DetReward.spec(config), id)?,
        "det-euclid" => greedy_select(problem, &LearnerKind::DetEuclid.spec(config), id)?,
        "prob-reward" => greedy_select(problem, &LearnerKind::ProbReward.spec(config), id)?,
        "prob-euclid" => greedy_select(problem, &LearnerKind::ProbEuclid.spec(config), id)?,
        "strategy" => greedy_select(problem, &LearnerSpec::strategy_based(), id)?,
        "random" => random_baseline(problem)?.0,
        "cov-random" => coverage_random(problem)?,
        "cov-best" => coverage_augmented_select(problem, &config.best_model.spec(config), id)?,
        other => return Err(unknown_model(other)),
    };
    Ok(seq)
}

fn cmd_teach(config: &RunConfig, out: &Path, model: &str) -> Result<String> {
    if !GENERATOR_IDS.contains(&model) {
        return Err(unknown_model(model));
    }
    let problem = TeachingProblem::new(config)?;
    let seq = sequence_for(&problem, model)?;
    let file = format!("sequence-{model}.txt");
    records::write_sequence(&out.join(&file), &seq, config)?;
    manifest::write(out, "teach", config, &[&file])?;
    let final_posterior = seq.posterior_trace.last().map_or("-".to_string(), ToString::to_string);
    Ok(format!(
        "teach model={model} entries={} final_posterior={final_posterior}",
        seq.entries.len(),
    ))
}

fn cmd_export_trajectories(config: &RunConfig, out: &Path, model: &str) -> Result<String> {
    if !GENERATOR_IDS.contains(&model) {
        return Err(unknown_model(model));
    }
    let problem = TeachingProblem::new(config)?;
    let seq = sequence_for(&problem, model)?;
    let file = format!("trajectories-{model}.txt");
    records::write_trajectories(&out.join(&file), &seq)?;
    manifest::write(out, "export-trajectories", config, &[&file])?;
    let states: usize = seq.entries.iter().map(|e| e.trajectory.states.len()).sum();
    Ok(format!(
        "export-trajectories model={model} demos={} states={states}",
        seq.entries.len(),
    ))
}

fn cmd_evaluate(config: &RunConfig, out: &Path) -> Result<String> {
    let problem = TeachingProblem::new(config)?;

    let mut rows = standard_sequences(&problem)?;
    let matrix = cross_evaluate(&problem, &rows)?;
    records::write_matrix(&out.join("matrix.csv"), &matrix)?;

    rows.push(coverage_augmented_select(&problem, &config.best_model.spec(config), "cov-best")?);
    rows.push(coverage_random(&problem)?);

    let tallies: Vec<(String, [[usize; 4]; 2])> =
        rows.iter().map(|seq| (seq.generator.clone(), tally_examples_by_class(seq))).collect();
    records::write_tallies(&out.join("tallies.csv"), &tallies)?;

    let mut helpful = Vec::new();
    for seq in &rows {
        for class in EnvClassKind::ALL {
            for label in StrategyLabel::variants_of(class) {
                let count = helpful_environment_count(seq, class, label)?;
                helpful.push((seq.generator.clone(), class, label, count));
            }
        }
    }
    records::write_helpful(&out.join("helpful.csv"), &helpful)?;

    let tests = generate_test_environments(&problem)?;
    let mut needed: Vec<usize> = tests.environments.iter().map(|t| t.pool_idx).collect();
    for seq in &rows {
        needed.extend(seq.entries.iter().map(|e| e.pool_idx));
    }
    needed.sort_unstable();
    needed.dedup();
    let mut cache: HashMap<usize, Scenario> = HashMap::new();
    for idx in needed {
        cache.insert(idx, problem.scenario(idx)?);
    }

    let bundles: Vec<Vec<Trajectory>> = tests
        .environments
        .iter()
        .map(|t| {
            let set = &cache[&t.pool_idx].set;
            t.options.iter().map(|o| set.trajectories[o.candidate_idx].clone()).collect()
        })
        .collect();
    records::write_test_environments(&out.join("test-environments.txt"), &tests, &bundles)?;

    let mut answers = Vec::new();
    for seq in &rows {
        for kind in LearnerKind::ALL {
            let spec = kind.spec(config);
            let mut belief = Belief::uniform(Arc::clone(&problem.thetas));
            for entry in &seq.entries {
                let scenario = &cache[&entry.pool_idx];
                belief = belief.updated(&spec, &scenario.set, scenario.teacher_idx);
            }
            for (testenv, test) in tests.environments.iter().enumerate() {
                let result = if belief.is_degenerate() {
                    None
                } else {
                    let scenario = &cache[&test.pool_idx];
                    let answer =
                        simulated_learner_answer(&spec, &belief, &scenario.set, &test.options)?;
                    Some(AnswerResult {
                        posterior: belief.posterior_target_prob()?,
                        answer,
                        correct: answer == TestEnvironment::CORRECT,
                    })
                };
                answers.push(AnswerRow {
                    generator: seq.generator.clone(),
                    model: kind,
                    testenv,
                    result,
                });
            }
        }
    }
    records::write_answers(&out.join("answers.csv"), &answers)?;

    manifest::write(
        out,
        "evaluate",
        config,
        &["matrix.csv", "tallies.csv", "helpful.csv", "test-environments.txt", "answers.csv"],
    )?;
    Ok(format!(
        "evaluate rows={} generators={} tests={} answers={}",
        matrix.row_names.len(),
        rows.len(),
        tests.environments.len(),
        answers.len(),
    ))
}

fn cmd_hyperparam(config: &RunConfig, out: &Path) -> Result<String> {
    let problem = TeachingProblem::new(config)?;
    let sweeps = vec![
        ("det-reward".to_string(), select_hyperparameter(&problem, true, DistanceMetric::Reward)?),
        (
            "det-euclid".to_string(),
            select_hyperparameter(&problem, true, DistanceMetric::Euclidean)?,
        ),
        (
            "prob-reward".to_string(),
            select_hyperparameter(&problem, false, DistanceMetric::Reward)?,
        ),
        (
            "prob-euclid".to_string(),
            select_hyperparameter(&problem, false, DistanceMetric::Euclidean)?,
        ),
    ];
    records::write_hyperparam(&out.join("hyperparam.csv"), &sweeps)?;
    manifest::write(out, "hyperparam", config, &["hyperparam.csv"])?;
    let chosen: Vec<String> = sweeps
        .iter()
        .map(|(model, choice)| {
            format!("{model}={}{}", choice.value, if choice.fallback { "*" } else { "" })
        })
        .collect();
    Ok(format!("hyperparam {}", chosen.join(" ")))
}
