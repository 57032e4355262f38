//! Cross-model evaluation of teaching sequences: how well does a
//! sequence optimized for one learner model teach every other model,
//! which strategy clusters do the examples land in, and can a taught
//! learner pick the right trajectory in held-out test environments?

use crate::config::{streams, substream_seed};
use crate::env::EnvClassKind;
use crate::learners::{likelihood, Belief, LearnerKind, LearnerSpec};
use crate::optimizer::{CandidateSet, StrategyLabel};
use crate::teaching::{greedy_select, random_baseline, TeachingProblem, TeachingSequence};
use crate::{Error, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Posterior mass on the true weights that each learner (column)
/// reaches after observing each teaching sequence (row).
#[derive(Debug, Clone)]
pub struct EvalMatrix {
    pub row_names: Vec<String>,
    pub columns: [LearnerKind; 7],
    pub cells: Vec<[f64; 7]>,
    /// A flagged cell means the belief died (every candidate mass
    /// reached zero); its posterior is recorded as 0.
    pub degenerate: Vec<[bool; 7]>,
}

impl EvalMatrix {
    pub fn column_index(&self, kind: LearnerKind) -> usize {
        self.columns.iter().position(|k| *k == kind).unwrap()
    }
}

/// The eight standard rows: one greedy sequence per learner model,
/// plus the median-of-random baseline.
pub fn standard_sequences(problem: &TeachingProblem) -> Result<Vec<TeachingSequence>> {
    let mut rows = Vec::with_capacity(LearnerKind::ALL.len() + 1);
    for kind in LearnerKind::ALL {
        rows.push(greedy_select(problem, &kind.spec(&problem.config), kind.name())?);
    }
    rows.push(random_baseline(problem)?.0);
    Ok(rows)
}

/// Folds every row sequence through every learner column from the
/// uniform prior. Cells are independent, so rows evaluate in
/// parallel; the positional collect keeps the result deterministic.
pub fn cross_evaluate(problem: &TeachingProblem, rows: &[TeachingSequence]) -> Result<EvalMatrix> {
    let columns = LearnerKind::ALL;
    let per_row: Vec<([f64; 7], [bool; 7])> = rows
        .par_iter()
        .map(|row| {
            let envs = row.env_indices();
            let mut cells = [0.0; 7];
            let mut degenerate = [false; 7];
            for (c, kind) in columns.iter().enumerate() {
                let spec = kind.spec(&problem.config);
                match problem.posterior_trace(&spec, &envs) {
                    Ok(trace) => {
                        cells[c] = trace.last().copied().unwrap_or(1.0 / problem.thetas.len() as f64)
                    }
                    Err(Error::DegenerateBelief) => degenerate[c] = true,
                    Err(other) => panic!("posterior fold cannot fail otherwise: {other}"),
                }
            }
            (cells, degenerate)
        })
        .collect();
    Ok(EvalMatrix {
        row_names: rows.iter().map(|r| r.generator.clone()).collect(),
        columns,
        cells: per_row.iter().map(|(c, _)| *c).collect(),
        degenerate: per_row.iter().map(|(_, d)| *d).collect(),
    })
}

/// Counts a sequence's examples per (strategy variant, environment
/// class) cell: rows are the first/second variant of each class (in
/// `StrategyLabel::variants_of` order), columns follow
/// `EnvClassKind::ALL`. The grid sums to the sequence length.
pub fn tally_examples_by_class(seq: &TeachingSequence) -> [[usize; 4]; 2] {
    let mut grid = [[0usize; 4]; 2];
    for entry in &seq.entries {
        let class = entry.label.class();
        let col = EnvClassKind::ALL.iter().position(|c| *c == class).unwrap();
        let row = StrategyLabel::variants_of(class).iter().position(|l| *l == entry.label).unwrap();
        grid[row][col] += 1;
    }
    grid
}

/// Signed helpfulness of a sequence for one strategy `a` of a class:
/// the number of examples demonstrating `a` if any were shown,
/// otherwise minus the number demonstrating the opposing strategy.
pub fn helpful_environment_count(seq: &TeachingSequence, class: EnvClassKind, a: StrategyLabel) -> Result<i64> {
    if a.class() != class {
        return Err(Error::Config(format!("{a} is not a strategy of the {class} class")));
    }
    let variants = StrategyLabel::variants_of(class);
    let b = if variants[0] == a { variants[1] } else { variants[0] };
    let x = seq.entries.iter().filter(|e| e.label == a).count() as i64;
    let y = seq.entries.iter().filter(|e| e.label == b).count() as i64;
    Ok(if x > 0 { x } else { -y })
}

/// One multiple-choice option of a test environment: a candidate
/// index into the environment's candidate set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOption {
    pub candidate_idx: usize,
    pub label: StrategyLabel,
    /// Reward gap to the teacher's optimum under the true weights.
    pub gap: f64,
}

/// A held-out test environment: the teacher's demonstration plus
/// three near-optimal alternates, two options per strategy cluster,
/// with the correct option always first.
#[derive(Debug, Clone)]
pub struct TestEnvironment {
    pub class: EnvClassKind,
    pub target_label: StrategyLabel,
    pub pool_idx: usize,
    pub catalog_index: usize,
    pub options: [TestOption; 4],
}

impl TestEnvironment {
    pub const CORRECT: usize = 0;
}

/// The six test environments (both strategies of each informative
/// class) and the reward-gap threshold they were generated under.
#[derive(Debug, Clone)]
pub struct TestEnvironmentSet {
    pub threshold: f64,
    pub environments: Vec<TestEnvironment>,
}

/// The three classes whose strategy pairs get test environments.
const INFORMATIVE: [EnvClassKind; 3] = [EnvClassKind::Merging, EnvClassKind::Braking, EnvClassKind::Tailgating];

/// Median reward gap between the teacher's optimum and every other
/// candidate across the pool, used to set the default alternate
/// threshold (half the median).
pub fn median_pool_gap(problem: &TeachingProblem) -> Result<f64> {
    let mut gaps: Vec<f64> = problem
        .pool
        .entries
        .par_iter()
        .enumerate()
        .map(|(e, _)| -> Result<Vec<f64>> {
            let scenario = problem.scenario(e)?;
            let teacher = crate::features::RewardWeights(problem.config.target_theta);
            let best = scenario.set.reward(&teacher, scenario.teacher_idx);
            Ok((0..scenario.set.len())
                .filter(|j| *j != scenario.teacher_idx)
                .map(|j| best - scenario.set.reward(&teacher, j))
                .collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?
        .into_iter()
        .flatten()
        .collect();
    if gaps.is_empty() {
        return Err(Error::Empty("pool reward gaps"));
    }
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(gaps[gaps.len() / 2])
}

/// Rejection-samples one test environment per (informative class,
/// strategy) target: the teacher's demonstration must land in the
/// target cluster and at least three distinct alternates must sit
/// within the reward-gap threshold, one sharing the teacher's
/// cluster and two in the opposing cluster (the hardest such
/// alternates — largest gap under the threshold — are kept).
/// Deterministic given the seed; unmet targets are an error.
pub fn generate_test_environments(problem: &TeachingProblem) -> Result<TestEnvironmentSet> {
    let threshold = match problem.config.reward_gap_threshold {
        Some(t) => t,
        None => 0.5 * median_pool_gap(problem)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(problem.config.seed, streams::TESTGEN));
    let mut environments = Vec::with_capacity(6);
    let mut unmet: Vec<(EnvClassKind, StrategyLabel)> = Vec::new();
    for class in INFORMATIVE {
        for target in StrategyLabel::variants_of(class) {
            // A fresh seeded pass order per target; scanning a random
            // permutation rejects unsuitable environments without
            // ever re-testing one.
            let order = rand::seq::index::sample(&mut rng, problem.pool.len(), problem.pool.len());
            let mut found = None;
            for e in order.iter().take(problem.config.testgen_budget) {
                if problem.pool.entries[e].class != class || problem.tables.teacher_label[e] != target {
                    continue;
                }
                let scenario = problem.scenario(e)?;
                let teacher = crate::features::RewardWeights(problem.config.target_theta);
                if let Some(options) = pick_options(&scenario.set, &teacher, scenario.teacher_idx, threshold) {
                    found = Some(TestEnvironment {
                        class,
                        target_label: target,
                        pool_idx: e,
                        catalog_index: scenario.catalog_index,
                        options,
                    });
                    break;
                }
            }
            match found {
                Some(env) => environments.push(env),
                None => unmet.push((class, target)),
            }
        }
    }
    if !unmet.is_empty() {
        return Err(Error::TestSearchExhausted { unmet });
    }
    Ok(TestEnvironmentSet { threshold, environments })
}

/// Builds the 4-option slate for one environment, or None if it
/// lacks enough near-optimal alternates on either side: the teacher's
/// optimum first, then the largest-gap-below-threshold alternate from
/// the teacher's cluster, then the two largest from the opposing one.
fn pick_options(
    set: &CandidateSet,
    teacher: &crate::features::RewardWeights,
    teacher_idx: usize,
    threshold: f64,
) -> Option<[TestOption; 4]> {
    let teacher_label = set.labels[teacher_idx];
    let best = set.reward(teacher, teacher_idx);
    let mut same: Vec<TestOption> = Vec::new();
    let mut other: Vec<TestOption> = Vec::new();
    for j in 0..set.len() {
        if j == teacher_idx {
            continue;
        }
        let gap = best - set.reward(teacher, j);
        if gap < threshold {
            let option = TestOption { candidate_idx: j, label: set.labels[j], gap };
            if option.label == teacher_label {
                same.push(option);
            } else {
                other.push(option);
            }
        }
    }
    if same.is_empty() || other.len() < 2 {
        return None;
    }
    // Descending by gap; the stable sort keeps ties in ascending
    // candidate order.
    same.sort_by(|a, b| b.gap.partial_cmp(&a.gap).unwrap());
    other.sort_by(|a, b| b.gap.partial_cmp(&a.gap).unwrap());
    Some([
        TestOption { candidate_idx: teacher_idx, label: teacher_label, gap: 0.0 },
        same[0],
        other[0],
        other[1],
    ])
}

/// Picks, for a taught belief, the option whose observation the
/// learner finds most plausible in expectation over the surviving
/// candidate weights; ties break to the lowest option index.
pub fn simulated_learner_answer(
    spec: &LearnerSpec,
    belief: &Belief,
    set: &CandidateSet,
    options: &[TestOption],
) -> Result<usize> {
    if belief.is_degenerate() {
        return Err(Error::DegenerateBelief);
    }
    if options.is_empty() {
        return Err(Error::Empty("test options"));
    }
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, option) in options.iter().enumerate() {
        let score: f64 = belief
            .masses
            .iter()
            .zip(&belief.thetas.weights)
            .map(|(m, w)| m * likelihood(spec, w, set, option.candidate_idx))
            .sum();
        if score > best.1 {
            best = (i, score);
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use crate::learners::{DistanceMetric, Effect};
    use crate::teaching::{coverage_random, fold_with_beliefs};
    use std::sync::{Arc, OnceLock};

    fn desk_problem() -> &'static TeachingProblem {
        static PROBLEM: OnceLock<TeachingProblem> = OnceLock::new();
        PROBLEM.get_or_init(|| {
            let mut config = RunConfig::default();
            config.pool_per_class = 6;
            config.theta_count = 30;
            TeachingProblem::new(&config).unwrap()
        })
    }

    fn desk_rows() -> &'static Vec<TeachingSequence> {
        static ROWS: OnceLock<Vec<TeachingSequence>> = OnceLock::new();
        ROWS.get_or_init(|| standard_sequences(desk_problem()).unwrap())
    }

    #[test]
    fn matrix_has_eight_rows_seven_columns_and_unit_interval_cells() {
        let problem = desk_problem();
        let matrix = cross_evaluate(problem, desk_rows()).unwrap();
        assert_eq!(matrix.row_names.len(), 8);
        assert_eq!(matrix.cells.len(), 8);
        let mut names = matrix.row_names.clone();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 8, "row names are unique");
        assert_eq!(matrix.row_names[7], "random");
        for (cells, flags) in matrix.cells.iter().zip(&matrix.degenerate) {
            for (value, flag) in cells.iter().zip(flags) {
                assert!((0.0..=1.0).contains(value));
                if *flag {
                    assert_eq!(*value, 0.0, "degenerate cells are recorded as zero");
                }
            }
        }
    }

    #[test]
    fn matrix_is_deterministic() {
        let problem = desk_problem();
        let a = cross_evaluate(problem, desk_rows()).unwrap();
        let b = cross_evaluate(problem, desk_rows()).unwrap();
        assert_eq!(a.cells, b.cells);
        assert_eq!(a.degenerate, b.degenerate);
    }

    #[test]
    fn teacher_demonstrations_never_kill_the_whole_belief() {
        // The true weights rate their own demonstrations with
        // likelihood 1 under every model, so no cell can degenerate.
        let problem = desk_problem();
        let matrix = cross_evaluate(problem, desk_rows()).unwrap();
        for flags in &matrix.degenerate {
            assert_eq!(*flags, [false; 7]);
        }
    }

    #[test]
    fn single_cell_matrix_matches_the_direct_belief_fold() {
        let problem = desk_problem();
        let kind = LearnerKind::DetEuclid;
        let row = greedy_select(problem, &kind.spec(&problem.config), kind.name()).unwrap();
        let matrix = cross_evaluate(problem, std::slice::from_ref(&row)).unwrap();
        let cell = matrix.cells[0][matrix.column_index(kind)];
        let reference = fold_with_beliefs(problem, &kind.spec(&problem.config), &row.env_indices())
            .unwrap()
            .last()
            .copied()
            .unwrap();
        assert!((cell - reference).abs() <= 1e-12 * reference.abs().max(1.0));
    }

    #[test]
    fn tallies_sum_to_sequence_length_and_recount_exactly() {
        for seq in desk_rows() {
            let grid = tally_examples_by_class(seq);
            let total: usize = grid.iter().flatten().sum();
            assert_eq!(total, seq.entries.len());
            for (col, class) in EnvClassKind::ALL.iter().enumerate() {
                for (row, label) in StrategyLabel::variants_of(*class).iter().enumerate() {
                    let direct = seq.entries.iter().filter(|e| e.label == *label).count();
                    assert_eq!(grid[row][col], direct);
                }
            }
        }
    }

    #[test]
    fn empty_sequence_tallies_to_zeros() {
        let problem = desk_problem();
        let spec = LearnerSpec::approximate(Effect::Deterministic { tau: 1e15 }, DistanceMetric::Reward);
        let seq = greedy_select(problem, &spec, "empty").unwrap();
        assert!(seq.entries.is_empty());
        assert_eq!(tally_examples_by_class(&seq), [[0; 4]; 2]);
    }

    #[test]
    fn coverage_random_tallies_one_per_cell_when_realizable() {
        let problem = desk_problem();
        if let Ok(seq) = coverage_random(problem) {
            assert_eq!(tally_examples_by_class(&seq), [[1; 4]; 2]);
        }
    }

    #[test]
    fn helpful_count_follows_the_signed_rule() {
        let problem = desk_problem();
        let base = greedy_select(problem, &problem.config.best_model.spec(&problem.config), "base").unwrap();
        assert!(!base.entries.is_empty());
        let template = base.entries[0].clone();
        let with_labels = |labels: &[StrategyLabel]| -> TeachingSequence {
            let entries = labels
                .iter()
                .map(|l| {
                    let mut e = template.clone();
                    e.label = *l;
                    e
                })
                .collect();
            TeachingSequence {
                generator: "synthetic".into(),
                entries,
                posterior_trace: vec![0.0; labels.len()],
                uncoverable: Vec::new(),
                degenerate_skips: 0,
            }
        };
        let [a, b] = StrategyLabel::variants_of(EnvClassKind::Merging);
        let seq = with_labels(&[a, b, a, b, b]);
        assert_eq!(helpful_environment_count(&seq, EnvClassKind::Merging, a).unwrap(), 2);
        let seq = with_labels(&[b, b, b]);
        assert_eq!(helpful_environment_count(&seq, EnvClassKind::Merging, a).unwrap(), -3);
        let seq = with_labels(&[]);
        assert_eq!(helpful_environment_count(&seq, EnvClassKind::Merging, a).unwrap(), 0);
        assert!(helpful_environment_count(&seq, EnvClassKind::Braking, a).is_err());
    }

    #[test]
    fn median_pool_gap_is_positive_and_deterministic() {
        let problem = desk_problem();
        let m1 = median_pool_gap(problem).unwrap();
        let m2 = median_pool_gap(problem).unwrap();
        assert_eq!(m1, m2);
        assert!(m1 > 0.0);
    }

    #[test]
    fn test_environment_slates_satisfy_the_construction_rules() {
        let problem = desk_problem();
        match generate_test_environments(problem) {
            Ok(set) => {
                assert_eq!(set.environments.len(), 6);
                let expected_targets: Vec<(EnvClassKind, StrategyLabel)> = INFORMATIVE
                    .iter()
                    .flat_map(|c| StrategyLabel::variants_of(*c).map(|l| (*c, l)))
                    .collect();
                let actual: Vec<(EnvClassKind, StrategyLabel)> =
                    set.environments.iter().map(|t| (t.class, t.target_label)).collect();
                assert_eq!(actual, expected_targets);
                for test in &set.environments {
                    let scenario = problem.scenario(test.pool_idx).unwrap();
                    assert_eq!(scenario.teacher_label, test.target_label);
                    let correct = &test.options[TestEnvironment::CORRECT];
                    assert_eq!(correct.candidate_idx, scenario.teacher_idx);
                    assert_eq!(correct.gap, 0.0);
                    let mut indices: Vec<usize> = test.options.iter().map(|o| o.candidate_idx).collect();
                    indices.sort_unstable();
                    indices.dedup();
                    assert_eq!(indices.len(), 4, "options are pairwise distinct");
                    let same = test.options.iter().filter(|o| o.label == test.target_label).count();
                    assert_eq!(same, 2, "two options per strategy cluster");
                    for option in &test.options[1..] {
                        assert!(option.gap < set.threshold);
                        assert_eq!(option.label, scenario.set.labels[option.candidate_idx]);
                    }
                }
                let again = generate_test_environments(problem).unwrap();
                let again_pools: Vec<usize> = again.environments.iter().map(|t| t.pool_idx).collect();
                let pools: Vec<usize> = set.environments.iter().map(|t| t.pool_idx).collect();
                assert_eq!(pools, again_pools, "generation is deterministic");
            }
            Err(Error::TestSearchExhausted { unmet }) => {
                assert!(!unmet.is_empty(), "exhaustion must name its unmet targets");
            }
            Err(other) => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn certain_beliefs_answer_the_correct_option_under_every_model() {
        // Needs an environment whose candidates span both clusters;
        // classes whose label depends only on the goal never do.
        let problem = desk_problem();
        let teacher = crate::features::RewardWeights(problem.config.target_theta);
        let (scenario, options) = (0..problem.pool.len())
            .find_map(|e| {
                let scenario = problem.scenario(e).unwrap();
                pick_options(&scenario.set, &teacher, scenario.teacher_idx, f64::MAX)
                    .map(|options| (scenario, options))
            })
            .expect("some pool environment admits a cross-cluster slate");
        let mut prior = vec![0.0; problem.thetas.len()];
        prior[problem.thetas.target] = 1.0;
        let belief = Belief::with_prior(Arc::clone(&problem.thetas), prior).unwrap();
        for kind in LearnerKind::ALL {
            let answer =
                simulated_learner_answer(&kind.spec(&problem.config), &belief, &scenario.set, &options).unwrap();
            assert_eq!(answer, TestEnvironment::CORRECT, "{kind}");
        }
    }

    #[test]
    fn answers_match_a_hand_computed_two_candidate_oracle() {
        let problem = desk_problem();
        let scenario = problem.scenario(3).unwrap();
        let spec = LearnerSpec::approximate(Effect::Probabilistic { lambda: 1e-3 }, DistanceMetric::Reward);
        let rival = &problem.thetas.weights[0];
        let target = &problem.thetas.weights[problem.thetas.target];
        let masses = [0.25f64, 0.75];
        let option_indices = [scenario.teacher_idx, 2, 9];
        let options: Vec<TestOption> = option_indices
            .iter()
            .map(|&j| TestOption { candidate_idx: j, label: scenario.set.labels[j], gap: 0.0 })
            .collect();
        // Hand-accumulated expected plausibility per option.
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, &j) in option_indices.iter().enumerate() {
            let score = masses[0] * likelihood(&spec, rival, &scenario.set, j)
                + masses[1] * likelihood(&spec, target, &scenario.set, j);
            if score > best.1 {
                best = (i, score);
            }
        }
        let thetas = Arc::new(crate::learners::ThetaSet {
            weights: vec![rival.clone(), target.clone()],
            target: 1,
        });
        let belief = Belief::with_prior(thetas, masses.to_vec()).unwrap();
        let answer = simulated_learner_answer(&spec, &belief, &scenario.set, &options).unwrap();
        assert_eq!(answer, best.0);
    }

    #[test]
    fn degenerate_beliefs_and_empty_slates_are_rejected() {
        let problem = desk_problem();
        let scenario = problem.scenario(0).unwrap();
        let spec = LearnerSpec::Exact;
        let belief = Belief::uniform(Arc::clone(&problem.thetas));
        assert!(simulated_learner_answer(&spec, &belief, &scenario.set, &[]).is_err());
        let mut dead = belief.clone();
        dead.masses.iter_mut().for_each(|m| *m = 0.0);
        let options = [TestOption { candidate_idx: 0, label: scenario.set.labels[0], gap: 0.0 }];
        assert!(simulated_learner_answer(&spec, &dead, &scenario.set, &options).is_err());
    }
}
