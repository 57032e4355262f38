//! Teaching driving objectives by showing informative demonstrations.
//!
//! A simulated teacher drives a highway scenario optimally under its
//! true reward weights and picks the sequence of environments whose
//! optimal trajectories most sharpen an observing learner's belief
//! over candidate weight vectors. Learners range from exact inverse
//! reinforcement learning to approximate models that only compare
//! trajectories by reward gap, state distance, or strategy cluster.
//!
//! Modules follow the pipeline order: `dynamics` (vehicle model),
//! `env` (scenario catalog), `features` (reward features),
//! `optimizer` (candidate trajectories and the teacher's argmax),
//! `learners` (belief updates), `teaching` (sequence selection), and
//! `eval` (cross-model evaluation and simulated option tests).

pub mod config;
pub mod dynamics;
pub mod env;
pub mod error;
pub mod eval;
pub mod features;
pub mod learners;
pub mod optimizer;
pub mod teaching;

pub use config::{DynamicsParams, KernelParams, ManeuverParams, PoolMode, RoadParams, RunConfig};
pub use dynamics::{rollout, step, ControlInput, Trajectory, VehicleState};
pub use env::{
    classify_environment, enumerate_environments, instantiate, EnvClassKind, Environment,
    EnvironmentSpec, Goal, Lane, OtherCarState,
};
pub use error::{Error, Result};
pub use eval::{
    cross_evaluate, generate_test_environments, helpful_environment_count, median_pool_gap,
    simulated_learner_answer, standard_sequences, tally_examples_by_class, EvalMatrix, TestEnvironment,
    TestEnvironmentSet, TestOption,
};
pub use features::{feature_vector, normalize_features, FeatureScaling, FeatureVector, RewardWeights};
pub use learners::{
    distance_euclidean, distance_reward, distance_strategy, likelihood, sample_candidate_thetas, Belief,
    DistanceMetric, Effect, LearnerKind, LearnerSpec, ThetaSet,
};
pub use optimizer::{
    candidate_set, classify_strategy, classify_strategy_detailed, maneuver_templates, optimal_trajectory,
    synthesize_maneuver, CandidateSet, ManeuverTemplate, OptimalChoice, SpeedProfile, StrategyLabel,
};
pub use teaching::{
    coverage_augmented_select, coverage_random, greedy_select, prepare_scenario, random_baseline,
    select_hyperparameter, BaselineReport, DistanceTables, EnvironmentPool, HyperparamChoice,
    HyperparamTrial, Scenario, SequenceEntry, TeachingProblem, TeachingSequence,
};
