use thiserror::Error;

use crate::mdp::{ActionId, BlockId, StateKey};

/// Errors surfaced by the abstraction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// The exact memorizer was queried on a pair it never saw during fit.
    #[error("state-action pair ({state:?}, {action:?}) was not seen during fit")]
    UnseenPair { state: StateKey, action: ActionId },

    /// Members of one (state block, state-action block) cell disagree on
    /// reward or successor state block. Signals classifier noise upstream,
    /// or a partition that stopped refining before reaching a fixed point.
    #[error("inconsistent partition: {reason} (state block {state_block}, block {block:?})")]
    InconsistentPartition {
        state_block: usize,
        block: BlockId,
        reason: String,
    },

    /// A classifier failed during state projection; aborts the outer
    /// partitioning iteration.
    #[error("state projection failed: {0}")]
    Projection(String),

    /// Value iteration hit the sweep limit before converging.
    #[error("value iteration did not converge within {sweeps} sweeps")]
    NonConverged { sweeps: usize },

    /// Model enumeration exceeded the state-action pair guard.
    #[error("model too large: more than {limit} state-action pairs")]
    TooLarge { limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
