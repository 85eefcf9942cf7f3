use serde::{Deserialize, Serialize};

use crate::mdp::{ActionId, StateKey};
use crate::scalar::Scalar;

/// Fixed-length numeric encoding of a (state, action) pair.
///
/// Encodings are environment-defined, deterministic and of constant length
/// per environment; classifiers treat them as points in Euclidean space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector<F: Scalar>(pub Vec<F>);

impl<F: Scalar> FeatureVector<F> {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn squared_distance(&self, other: &FeatureVector<F>) -> F {
        debug_assert_eq!(self.0.len(), other.0.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum()
    }
}

/// The admissible-action structure and feature encoding of a state-action
/// space. Environments implement this; partitioning and planning consume it
/// wherever a classifier has to be queried over `A_s`.
pub trait StateActionSpace<F: Scalar> {
    /// Admissible actions in `state`; empty for terminal states, so that
    /// projecting a terminal state yields the empty key.
    fn admissible(&self, state: &StateKey) -> Vec<ActionId>;

    fn encode(&self, state: &StateKey, action: ActionId) -> FeatureVector<F>;
}
