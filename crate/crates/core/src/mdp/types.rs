use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Canonical, hashable encoding of one ground state.
///
/// Environments define their own byte layouts; the only contract is that two
/// ground states are equal iff their keys are byte-equal and that encoding is
/// deterministic.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateKey(Vec<u8>);

impl StateKey {
    pub fn new(bytes: Vec<u8>) -> Self {
        StateKey(bytes)
    }

    pub fn bytes(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s[")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "]")
    }
}

/// Index into an environment's action enumeration.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActionId(pub usize);

impl fmt::Debug for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

/// One experienced step; the atom of all partitioning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition<F: Scalar> {
    pub state: StateKey,
    pub action: ActionId,
    pub reward: F,
    pub next_state: StateKey,
    pub terminal: bool,
}

/// Bounded FIFO store of transitions.
///
/// Indices are stable for the lifetime of a partitioning run: collection
/// happens first (evicting oldest entries at capacity), partitioning operates
/// on the frozen buffer.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperienceBuffer<F: Scalar> {
    transitions: VecDeque<Transition<F>>,
    capacity: usize,
}

impl<F: Scalar> ExperienceBuffer<F> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "buffer capacity must be positive");
        ExperienceBuffer {
            transitions: VecDeque::with_capacity(capacity.min(1 << 20)),
            capacity,
        }
    }

    pub fn from_transitions(transitions: Vec<Transition<F>>) -> Self {
        let capacity = transitions.len().max(1);
        ExperienceBuffer {
            transitions: transitions.into(),
            capacity,
        }
    }

    /// Appends a transition, evicting the oldest one at capacity.
    pub fn push(&mut self, t: Transition<F>) {
        debug_assert!(t.reward.is_finite(), "transition reward must be finite");
        if self.transitions.len() == self.capacity {
            self.transitions.pop_front();
        }
        self.transitions.push_back(t);
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, index: usize) -> &Transition<F> {
        &self.transitions[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition<F>> {
        self.transitions.iter()
    }

    /// Distinct observed states: everything appearing as `state` or
    /// `next_state`, sources first, in first-appearance order.
    pub fn observed_states(&self) -> Vec<StateKey> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for t in &self.transitions {
            if seen.insert(t.state.clone()) {
                out.push(t.state.clone());
            }
        }
        for t in &self.transitions {
            if seen.insert(t.next_state.clone()) {
                out.push(t.next_state.clone());
            }
        }
        out
    }
}

impl<F: Scalar> std::ops::Index<usize> for ExperienceBuffer<F> {
    type Output = Transition<F>;

    fn index(&self, index: usize) -> &Transition<F> {
        &self.transitions[index]
    }
}
