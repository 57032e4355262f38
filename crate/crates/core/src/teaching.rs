//! Teaching-sequence selection: which environments should the
//! teacher demonstrate, in what order, to sharpen a given learner
//! model's belief about the true reward weights as fast as possible?
//!
//! The teacher always shows its own optimal trajectory for the chosen
//! environment, so a teaching sequence is just an ordered list of
//! environments. Selection is greedy: at each step, score every pool
//! environment by the posterior mass the learner would put on the
//! true weights after seeing it, and keep the best strict improver.
//! Coverage-augmented and random baselines reuse the same machinery.
//!
//! All belief math during search runs on precomputed distance tables
//! (one row per pool environment, one column per candidate weight
//! vector), so each greedy step is a pure array scan; trajectories
//! are only materialized for the handful of selected entries.

use crate::config::{streams, substream_seed, PoolMode, RunConfig};
use crate::dynamics::Trajectory;
use crate::env::{classify_environment, enumerate_environments, instantiate, EnvClassKind, EnvironmentSpec};
use crate::features::RewardWeights;
use crate::learners::{
    distance_euclidean, distance_reward, likelihood, sample_candidate_thetas, Belief, DistanceMetric, Effect,
    LearnerSpec, ThetaSet,
};
use crate::optimizer::{candidate_set, CandidateSet, StrategyLabel};
use crate::{Error, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::sync::Arc;

/// One environment eligible for teaching, with everything derived
/// from the true weights precomputed: the index of the teacher's
/// optimal candidate and the strategy cluster it lands in.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub catalog_index: usize,
    pub spec: EnvironmentSpec,
    pub class: EnvClassKind,
    pub set: CandidateSet,
    pub teacher_idx: usize,
    pub teacher_label: StrategyLabel,
}

/// Materializes the candidate set and teacher optimum for one
/// catalog entry.
pub fn prepare_scenario(catalog_index: usize, spec: &EnvironmentSpec, config: &RunConfig) -> Result<Scenario> {
    let env = instantiate(spec, config);
    let set = candidate_set(&env, config)?;
    let teacher = RewardWeights(config.target_theta);
    let teacher_idx = set.argmax(&teacher);
    let teacher_label = set.labels[teacher_idx];
    Ok(Scenario {
        catalog_index,
        spec: spec.clone(),
        class: classify_environment(spec),
        set,
        teacher_idx,
        teacher_label,
    })
}

/// A lightweight pool entry; candidate sets are rebuilt on demand so
/// the full 21,216-environment catalog stays streamable.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolEntry {
    pub catalog_index: usize,
    pub spec: EnvironmentSpec,
    pub class: EnvClassKind,
}

/// The set of environments the teacher searches over, in canonical
/// (ascending catalog) order.
#[derive(Debug, Clone)]
pub struct EnvironmentPool {
    pub entries: Vec<PoolEntry>,
    pub mode: PoolMode,
}

impl EnvironmentPool {
    /// Builds the configured pool: either a seeded stratified sample
    /// (`pool_per_class` per environment class) or the full catalog.
    pub fn build(config: &RunConfig) -> Result<EnvironmentPool> {
        let catalog = enumerate_environments();
        let chosen: Vec<usize> = match config.pool_mode {
            PoolMode::Full => (0..catalog.len()).collect(),
            PoolMode::Sample => {
                let mut by_class: [Vec<usize>; 4] = Default::default();
                for (idx, spec) in catalog.iter().enumerate() {
                    let class = classify_environment(spec);
                    let slot = EnvClassKind::ALL.iter().position(|c| *c == class).unwrap();
                    by_class[slot].push(idx);
                }
                let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(config.seed, streams::POOL));
                let mut chosen = Vec::with_capacity(4 * config.pool_per_class);
                for indices in &by_class {
                    if indices.len() < config.pool_per_class {
                        return Err(Error::Config(format!(
                            "pool_per_class {} exceeds a class of {} environments",
                            config.pool_per_class,
                            indices.len()
                        )));
                    }
                    let picks = rand::seq::index::sample(&mut rng, indices.len(), config.pool_per_class);
                    chosen.extend(picks.iter().map(|i| indices[i]));
                }
                chosen.sort_unstable();
                chosen
            }
        };
        let entries = chosen
            .into_iter()
            .map(|idx| PoolEntry {
                catalog_index: idx,
                spec: catalog[idx].clone(),
                class: classify_environment(&catalog[idx]),
            })
            .collect();
        Ok(EnvironmentPool { entries, mode: config.pool_mode })
    }

    /// A pool over explicit catalog indices (ascending), mainly for
    /// desk-scale analysis.
    pub fn from_indices(indices: &[usize], _config: &RunConfig) -> Result<EnvironmentPool> {
        let catalog = enumerate_environments();
        let mut sorted: Vec<usize> = indices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.is_empty() {
            return Err(Error::Empty("environment pool"));
        }
        if let Some(&bad) = sorted.iter().find(|&&i| i >= catalog.len()) {
            return Err(Error::Config(format!("catalog index {bad} out of range")));
        }
        let entries = sorted
            .into_iter()
            .map(|idx| PoolEntry {
                catalog_index: idx,
                spec: catalog[idx].clone(),
                class: classify_environment(&catalog[idx]),
            })
            .collect();
        Ok(EnvironmentPool { entries, mode: PoolMode::Sample })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Per-(pool environment, candidate weight) quantities from which
/// every learner's likelihood of the teacher's demonstration can be
/// reassembled without touching trajectories again:
/// the reward gap between the candidate's optimum and the teacher's
/// demonstration, the exact co-optimality indicator, the Euclidean
/// distance between the two trajectories, and whether they share a
/// strategy cluster.
#[derive(Debug, Clone)]
pub struct DistanceTables {
    pub gap: Vec<Vec<f64>>,
    pub exact: Vec<Vec<bool>>,
    pub euclid: Vec<Vec<f64>>,
    pub same_strategy: Vec<Vec<bool>>,
    /// Teacher candidate index per pool environment.
    pub teacher_idx: Vec<usize>,
    /// Strategy cluster of the teacher's demonstration per pool environment.
    pub teacher_label: Vec<StrategyLabel>,
}

impl DistanceTables {
    /// Builds all rows in parallel; each row is independent, and the
    /// positional collect keeps the result deterministic.
    pub fn build(pool: &EnvironmentPool, thetas: &ThetaSet, config: &RunConfig) -> Result<DistanceTables> {
        struct Row {
            gap: Vec<f64>,
            exact: Vec<bool>,
            euclid: Vec<f64>,
            same: Vec<bool>,
            teacher_idx: usize,
            teacher_label: StrategyLabel,
        }
        let rows: Vec<Row> = pool
            .entries
            .par_iter()
            .map(|entry| -> Result<Row> {
                let scenario = prepare_scenario(entry.catalog_index, &entry.spec, config)?;
                let set = &scenario.set;
                let obs = scenario.teacher_idx;
                let n = thetas.len();
                let mut row = Row {
                    gap: Vec::with_capacity(n),
                    exact: Vec::with_capacity(n),
                    euclid: Vec::with_capacity(n),
                    same: Vec::with_capacity(n),
                    teacher_idx: obs,
                    teacher_label: scenario.teacher_label,
                };
                for w in &thetas.weights {
                    let opt = set.argmax(w);
                    row.gap.push(distance_reward(w, set, obs));
                    row.exact.push(likelihood(&LearnerSpec::Exact, w, set, obs) == 1.0);
                    row.euclid.push(distance_euclidean(&set.trajectories[opt], &set.trajectories[obs])?);
                    row.same.push(set.labels[opt] == set.labels[obs]);
                }
                Ok(row)
            })
            .collect::<Result<Vec<Row>>>()?;
        let mut tables = DistanceTables {
            gap: Vec::with_capacity(rows.len()),
            exact: Vec::with_capacity(rows.len()),
            euclid: Vec::with_capacity(rows.len()),
            same_strategy: Vec::with_capacity(rows.len()),
            teacher_idx: Vec::with_capacity(rows.len()),
            teacher_label: Vec::with_capacity(rows.len()),
        };
        for row in rows {
            tables.gap.push(row.gap);
            tables.exact.push(row.exact);
            tables.euclid.push(row.euclid);
            tables.same_strategy.push(row.same);
            tables.teacher_idx.push(row.teacher_idx);
            tables.teacher_label.push(row.teacher_label);
        }
        Ok(tables)
    }

    /// Likelihood of the teacher's demonstration at pool environment
    /// `env_idx` under candidate weights `theta_idx`; reproduces
    /// `learners::likelihood` exactly (same argmax, same arithmetic).
    pub fn likelihood(&self, spec: &LearnerSpec, env_idx: usize, theta_idx: usize) -> f64 {
        match spec {
            LearnerSpec::Exact => f64::from(self.exact[env_idx][theta_idx]),
            LearnerSpec::Approximate { effect, metric } => match metric {
                DistanceMetric::Strategy => f64::from(self.same_strategy[env_idx][theta_idx]),
                _ => {
                    let d = match metric {
                        DistanceMetric::Reward => self.gap[env_idx][theta_idx],
                        DistanceMetric::Euclidean => self.euclid[env_idx][theta_idx],
                        DistanceMetric::Strategy => unreachable!(),
                    };
                    match effect {
                        Effect::Deterministic { tau } => f64::from(d <= *tau),
                        Effect::Probabilistic { lambda } => (-lambda * d).exp(),
                    }
                }
            },
        }
    }
}

/// Everything a selection strategy needs: the candidate weights, the
/// pool, and the precomputed tables over both.
#[derive(Debug, Clone)]
pub struct TeachingProblem {
    pub config: RunConfig,
    pub thetas: Arc<ThetaSet>,
    pub pool: EnvironmentPool,
    pub tables: DistanceTables,
}

impl TeachingProblem {
    pub fn new(config: &RunConfig) -> Result<TeachingProblem> {
        let thetas = Arc::new(sample_candidate_thetas(config));
        let pool = EnvironmentPool::build(config)?;
        TeachingProblem::from_parts(config.clone(), thetas, pool)
    }

    pub fn from_parts(config: RunConfig, thetas: Arc<ThetaSet>, pool: EnvironmentPool) -> Result<TeachingProblem> {
        let tables = DistanceTables::build(&pool, &thetas, &config)?;
        Ok(TeachingProblem { config, thetas, pool, tables })
    }

    /// Rebuilds the full scenario (candidate set included) for a pool
    /// entry.
    pub fn scenario(&self, pool_idx: usize) -> Result<Scenario> {
        let entry = &self.pool.entries[pool_idx];
        let scenario = prepare_scenario(entry.catalog_index, &entry.spec, &self.config)?;
        debug_assert_eq!(scenario.teacher_idx, self.tables.teacher_idx[pool_idx]);
        Ok(scenario)
    }

    /// Posterior mass on the true weights after multiplying `masses`
    /// by the likelihood row of `env_idx`, or None if every mass
    /// would vanish.
    fn posterior_with(&self, spec: &LearnerSpec, masses: &[f64], env_idx: usize) -> Option<f64> {
        let mut total = 0.0;
        let mut target = 0.0;
        for (k, m) in masses.iter().enumerate() {
            let updated = m * self.tables.likelihood(spec, env_idx, k);
            total += updated;
            if k == self.thetas.target {
                target = updated;
            }
        }
        if total == 0.0 {
            None
        } else {
            Some(target / total)
        }
    }

    fn apply(&self, spec: &LearnerSpec, masses: &mut [f64], env_idx: usize) {
        for (k, m) in masses.iter_mut().enumerate() {
            *m *= self.tables.likelihood(spec, env_idx, k);
        }
    }

    fn posterior_of(&self, masses: &[f64]) -> Result<f64> {
        let total: f64 = masses.iter().sum();
        if total == 0.0 {
            return Err(Error::DegenerateBelief);
        }
        Ok(masses[self.thetas.target] / total)
    }

    /// Folds a sequence of pool environments through a learner from
    /// the uniform prior, returning the posterior trace.
    pub fn posterior_trace(&self, spec: &LearnerSpec, env_indices: &[usize]) -> Result<Vec<f64>> {
        let mut masses = vec![1.0; self.thetas.len()];
        let mut trace = Vec::with_capacity(env_indices.len());
        for &e in env_indices {
            self.apply(spec, &mut masses, e);
            trace.push(self.posterior_of(&masses)?);
        }
        Ok(trace)
    }
}

/// One selected example: the environment plus the teacher's
/// demonstrated trajectory and its strategy cluster.
#[derive(Debug, Clone)]
pub struct SequenceEntry {
    pub pool_idx: usize,
    pub catalog_index: usize,
    pub spec: EnvironmentSpec,
    pub class: EnvClassKind,
    pub label: StrategyLabel,
    pub trajectory: Trajectory,
}

/// An ordered teaching sequence with its posterior trace (posterior
/// mass on the true weights after each prefix, under the generating
/// model's belief update).
#[derive(Debug, Clone)]
pub struct TeachingSequence {
    pub generator: String,
    pub entries: Vec<SequenceEntry>,
    pub posterior_trace: Vec<f64>,
    /// Strategy clusters no pool environment could realize (coverage
    /// modes only).
    pub uncoverable: Vec<StrategyLabel>,
    /// Environments skipped during search because appending them
    /// would have zeroed every candidate's mass.
    pub degenerate_skips: usize,
}

impl TeachingSequence {
    pub fn env_indices(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.pool_idx).collect()
    }

    pub fn labels(&self) -> Vec<StrategyLabel> {
        self.entries.iter().map(|e| e.label).collect()
    }

    pub fn distinct_label_count(&self) -> usize {
        let mut seen: Vec<StrategyLabel> = Vec::new();
        for e in &self.entries {
            if !seen.contains(&e.label) {
                seen.push(e.label);
            }
        }
        seen.len()
    }
}

fn make_entry(problem: &TeachingProblem, pool_idx: usize) -> Result<SequenceEntry> {
    let scenario = problem.scenario(pool_idx)?;
    Ok(SequenceEntry {
        pool_idx,
        catalog_index: scenario.catalog_index,
        spec: scenario.spec,
        class: scenario.class,
        label: scenario.teacher_label,
        trajectory: scenario.set.trajectories[scenario.teacher_idx].clone(),
    })
}

struct GreedyState {
    masses: Vec<f64>,
    current: f64,
    picks: Vec<usize>,
    trace: Vec<f64>,
    degenerate_skips: usize,
}

fn greedy_init(problem: &TeachingProblem) -> GreedyState {
    let n = problem.thetas.len();
    GreedyState {
        masses: vec![1.0; n],
        current: 1.0 / n as f64,
        picks: Vec::new(),
        trace: Vec::new(),
        degenerate_skips: 0,
    }
}

/// One greedy scan: the environment maximizing the posterior on the
/// true weights (ties break to canonical pool order), skipping any
/// environment that would zero the whole belief.
fn greedy_best(problem: &TeachingProblem, spec: &LearnerSpec, state: &mut GreedyState) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for e in 0..problem.pool.len() {
        match problem.posterior_with(spec, &state.masses, e) {
            None => state.degenerate_skips += 1,
            Some(post) => {
                if best.map_or(true, |(_, b)| post > b) {
                    best = Some((e, post));
                }
            }
        }
    }
    best
}

fn commit_pick(problem: &TeachingProblem, spec: &LearnerSpec, state: &mut GreedyState, e: usize, post: f64) {
    problem.apply(spec, &mut state.masses, e);
    state.current = post;
    state.picks.push(e);
    state.trace.push(post);
}

fn finish_sequence(
    problem: &TeachingProblem,
    generator: &str,
    state: GreedyState,
    uncoverable: Vec<StrategyLabel>,
) -> Result<TeachingSequence> {
    let entries = state.picks.iter().map(|&e| make_entry(problem, e)).collect::<Result<Vec<_>>>()?;
    Ok(TeachingSequence {
        generator: generator.to_string(),
        entries,
        posterior_trace: state.trace,
        uncoverable,
        degenerate_skips: state.degenerate_skips,
    })
}

/// Greedy selection: repeatedly append the pool environment whose
/// demonstration most increases the learner's posterior on the true
/// weights; stop at the example budget or as soon as no environment
/// strictly improves it.
pub fn greedy_select(problem: &TeachingProblem, spec: &LearnerSpec, generator: &str) -> Result<TeachingSequence> {
    if problem.pool.is_empty() {
        return Err(Error::Empty("environment pool"));
    }
    let mut state = greedy_init(problem);
    while state.picks.len() < problem.config.max_examples {
        match greedy_best(problem, spec, &mut state) {
            Some((e, post)) if post > state.current => commit_pick(problem, spec, &mut state, e, post),
            _ => break,
        }
    }
    finish_sequence(problem, generator, state, Vec::new())
}

/// Outcome summary for one grid value of the tolerance/rate search.
#[derive(Debug, Clone)]
pub struct HyperparamTrial {
    pub value: f64,
    pub sequence_len: usize,
    pub distinct_labels: usize,
    /// Posterior after the first example (prior if the sequence is empty).
    pub first: f64,
    /// Posterior after the full sequence.
    pub last: f64,
    /// last - first: how much the examples beyond the first add.
    pub increase: f64,
    pub qualified: bool,
}

/// The chosen hyperparameter value plus every trial (for reporting).
#[derive(Debug, Clone)]
pub struct HyperparamChoice {
    pub value: f64,
    /// True when no grid value met the 0.1-increase bar and the raw
    /// maximizer was returned instead.
    pub fallback: bool,
    pub trials: Vec<HyperparamTrial>,
}

fn spec_for_value(deterministic: bool, metric: DistanceMetric, value: f64) -> LearnerSpec {
    let effect = if deterministic {
        Effect::Deterministic { tau: value }
    } else {
        Effect::Probabilistic { lambda: value }
    };
    LearnerSpec::Approximate { effect, metric }
}

/// Sweeps the 11-value log grid for a deterministic tolerance or
/// probabilistic rate. A value qualifies when its greedy sequence
/// lifts the posterior from the one-example prefix to the full
/// sequence by at least 0.1; among qualifiers the one with the most
/// distinct strategy labels wins (ties to the smaller value). If
/// nothing qualifies, the raw-increase maximizer is returned flagged.
pub fn select_hyperparameter(
    problem: &TeachingProblem,
    deterministic: bool,
    metric: DistanceMetric,
) -> Result<HyperparamChoice> {
    if metric == DistanceMetric::Strategy {
        return Err(Error::Config("the strategy metric has no tolerance to select".into()));
    }
    let mut trials = Vec::new();
    for value in RunConfig::hyper_grid() {
        let spec = spec_for_value(deterministic, metric, value);
        let seq = greedy_select(problem, &spec, "hyperparam-trial")?;
        let prior = 1.0 / problem.thetas.len() as f64;
        let first = seq.posterior_trace.first().copied().unwrap_or(prior);
        let last = seq.posterior_trace.last().copied().unwrap_or(prior);
        let increase = last - first;
        trials.push(HyperparamTrial {
            value,
            sequence_len: seq.entries.len(),
            distinct_labels: seq.distinct_label_count(),
            first,
            last,
            increase,
            qualified: increase >= 0.1,
        });
    }
    let qualified: Vec<&HyperparamTrial> = trials.iter().filter(|t| t.qualified).collect();
    let (value, fallback) = if qualified.is_empty() {
        let best = trials
            .iter()
            .max_by(|a, b| match a.increase.partial_cmp(&b.increase).unwrap() {
                std::cmp::Ordering::Equal => b.value.partial_cmp(&a.value).unwrap(),
                other => other,
            })
            .unwrap();
        (best.value, true)
    } else {
        let best = qualified
            .iter()
            .max_by(|a, b| match a.distinct_labels.cmp(&b.distinct_labels) {
                std::cmp::Ordering::Equal => b.value.partial_cmp(&a.value).unwrap(),
                other => other,
            })
            .unwrap();
        (best.value, false)
    };
    Ok(HyperparamChoice { value, fallback, trials })
}

/// Greedy selection with a coverage pass: once the marginal posterior
/// gain drops below `epsilon`, append for each still-uncovered
/// strategy cluster (canonical order) the environment whose teacher
/// demonstration lands in that cluster and maximizes the extended
/// prefix's posterior. Clusters no pool environment realizes are
/// reported in `uncoverable`.
pub fn coverage_augmented_select(
    problem: &TeachingProblem,
    spec: &LearnerSpec,
    generator: &str,
) -> Result<TeachingSequence> {
    if problem.pool.is_empty() {
        return Err(Error::Empty("environment pool"));
    }
    let epsilon = problem.config.coverage_epsilon;
    let max_n = problem.config.max_examples;
    let mut state = greedy_init(problem);
    while state.picks.len() < max_n {
        match greedy_best(problem, spec, &mut state) {
            Some((e, post)) if post - state.current >= epsilon => commit_pick(problem, spec, &mut state, e, post),
            _ => break,
        }
    }
    let mut uncoverable = Vec::new();
    for label in StrategyLabel::ALL {
        if state.picks.len() >= max_n {
            break;
        }
        let covered = state.picks.iter().any(|&e| problem.tables.teacher_label[e] == label);
        if covered {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for e in 0..problem.pool.len() {
            if problem.tables.teacher_label[e] != label {
                continue;
            }
            match problem.posterior_with(spec, &state.masses, e) {
                None => state.degenerate_skips += 1,
                Some(post) => {
                    if best.map_or(true, |(_, b)| post > b) {
                        best = Some((e, post));
                    }
                }
            }
        }
        match best {
            Some((e, post)) => commit_pick(problem, spec, &mut state, e, post),
            None => uncoverable.push(label),
        }
    }
    finish_sequence(problem, generator, state, uncoverable)
}

/// Scores of all sampled baseline sequences, for reporting the
/// median-selection construction.
#[derive(Debug, Clone)]
pub struct BaselineReport {
    /// The sampled environment index sequences, in draw order.
    pub draws: Vec<Vec<usize>>,
    /// Exact-model posterior of each draw, in draw order.
    pub scores: Vec<f64>,
    /// Draw indices sorted by ascending score (stable).
    pub ranking: Vec<usize>,
    /// Position in `ranking` that was returned.
    pub chosen_rank: usize,
}

impl BaselineReport {
    pub fn chosen_score(&self) -> f64 {
        self.scores[self.ranking[self.chosen_rank]]
    }
}

/// Median-of-random baseline: draw `baseline_samples` sequences of
/// `baseline_length` distinct pool environments, score each by the
/// exact learner's posterior on the true weights, and return the
/// median-ranked one (its trace is the exact learner's).
pub fn random_baseline(problem: &TeachingProblem) -> Result<(TeachingSequence, BaselineReport)> {
    let n = problem.config.baseline_length;
    if problem.pool.len() < n {
        return Err(Error::Config(format!(
            "baseline needs {} distinct environments, pool has {}",
            n,
            problem.pool.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(problem.config.seed, streams::BASELINE));
    let draws: Vec<Vec<usize>> = (0..problem.config.baseline_samples)
        .map(|_| rand::seq::index::sample(&mut rng, problem.pool.len(), n).into_vec())
        .collect();
    let exact = LearnerSpec::Exact;
    let scores: Vec<f64> = draws
        .par_iter()
        .map(|seq| {
            problem
                .posterior_trace(&exact, seq)
                .map(|trace| trace.last().copied().unwrap_or(0.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut ranking: Vec<usize> = (0..draws.len()).collect();
    ranking.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    let chosen_rank = draws.len() / 2;
    let chosen = &draws[ranking[chosen_rank]];
    let trace = problem.posterior_trace(&exact, chosen)?;
    let entries = chosen.iter().map(|&e| make_entry(problem, e)).collect::<Result<Vec<_>>>()?;
    let sequence = TeachingSequence {
        generator: "random".to_string(),
        entries,
        posterior_trace: trace,
        uncoverable: Vec::new(),
        degenerate_skips: 0,
    };
    Ok((sequence, BaselineReport { draws, scores, ranking, chosen_rank }))
}

/// Coverage-random baseline: one uniformly drawn pool environment per
/// strategy cluster, in canonical cluster order. Errors if any
/// cluster has no realizing environment in the pool.
pub fn coverage_random(problem: &TeachingProblem) -> Result<TeachingSequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(problem.config.seed, streams::COVERAGE_RANDOM));
    let mut picks = Vec::with_capacity(StrategyLabel::ALL.len());
    for label in StrategyLabel::ALL {
        let candidates: Vec<usize> = (0..problem.pool.len())
            .filter(|&e| problem.tables.teacher_label[e] == label)
            .collect();
        if candidates.is_empty() {
            return Err(Error::UnrealizableCluster(label));
        }
        picks.push(candidates[rng.random_range(0..candidates.len())]);
    }
    let trace = problem.posterior_trace(&LearnerSpec::Exact, &picks)?;
    let entries = picks.iter().map(|&e| make_entry(problem, e)).collect::<Result<Vec<_>>>()?;
    Ok(TeachingSequence {
        generator: "cov-random".to_string(),
        entries,
        posterior_trace: trace,
        uncoverable: Vec::new(),
        degenerate_skips: 0,
    })
}

/// Folds a sequence through `Belief::updated` (rebuilding each
/// scenario) — the slow reference path; selection uses the distance
/// tables, and the two must agree exactly.
pub fn fold_with_beliefs(
    problem: &TeachingProblem,
    spec: &LearnerSpec,
    env_indices: &[usize],
) -> Result<Vec<f64>> {
    let mut belief = Belief::uniform(Arc::clone(&problem.thetas));
    let mut trace = Vec::with_capacity(env_indices.len());
    for &e in env_indices {
        let scenario = problem.scenario(e)?;
        belief = belief.updated(spec, &scenario.set, scenario.teacher_idx);
        trace.push(belief.posterior_target_prob()?);
    }
    Ok(trace)
}
