//! Error type shared across the core pipeline.

use crate::env::EnvClassKind;
use crate::optimizer::StrategyLabel;
use thiserror::Error;

/// Errors surfaced by the core pipeline. Numeric code paths reject
/// non-finite input eagerly so that NaNs never propagate silently.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A state, control, or weight vector contained NaN or infinity.
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    /// Rollouts need at least one control step.
    #[error("control sequence is empty")]
    EmptyControls,

    /// Trajectory and environment disagree on horizon or step size.
    #[error("trajectory/environment mismatch: {context}")]
    Mismatch { context: String },

    /// Every candidate mass reached zero; the posterior is undefined.
    #[error("belief is degenerate: all candidate masses are zero")]
    DegenerateBelief,

    /// Coverage selection could not find any pool environment whose
    /// taught trajectory lands in the requested cluster.
    #[error("no pool environment realizes strategy cluster {0}")]
    UnrealizableCluster(StrategyLabel),

    /// Rejection sampling for test environments ran out of budget.
    #[error("test-environment search exhausted its draw budget; unmet targets: {unmet:?}")]
    TestSearchExhausted {
        unmet: Vec<(EnvClassKind, StrategyLabel)>,
    },

    /// A collection that must be nonempty was empty.
    #[error("empty collection: {0}")]
    Empty(&'static str),

    /// Invalid configuration value.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
