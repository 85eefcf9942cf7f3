use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::types::{ExperienceBuffer, StateKey};
use crate::scalar::Scalar;

/// Identifier of one state-action block. Ids are minted monotonically within
/// a run and never reused: a split retires the parent id and mints fresh ids,
/// which makes refinement lineage auditable in traces.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockId(pub u32);

impl fmt::Debug for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

/// A partition of the experienced state-action pairs into blocks.
///
/// Blocks are disjoint, non-empty and cover the transition index range
/// `0..len`. Member lists are kept sorted so iteration order is canonical.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    blocks: BTreeMap<BlockId, Vec<usize>>,
    assignment: Vec<BlockId>,
    next_id: u32,
}

impl Partition {
    /// The trivial one-block partition over `len` transitions.
    pub fn trivial(len: usize) -> Self {
        assert!(len > 0, "cannot partition an empty transition set");
        let id = BlockId(0);
        let mut blocks = BTreeMap::new();
        blocks.insert(id, (0..len).collect());
        Partition {
            blocks,
            assignment: vec![id; len],
            next_id: 1,
        }
    }

    /// Builds a partition from an explicit assignment of transition indices
    /// to groups; one fresh block id is minted per distinct group, in the
    /// order groups first appear.
    pub fn from_groups(groups: &[Vec<usize>], len: usize) -> Self {
        let mut blocks = BTreeMap::new();
        let mut assignment = vec![BlockId(u32::MAX); len];
        let mut next_id = 0u32;
        for members in groups {
            assert!(!members.is_empty(), "blocks must be non-empty");
            let id = BlockId(next_id);
            next_id += 1;
            let mut sorted = members.clone();
            sorted.sort_unstable();
            for &i in &sorted {
                assert_eq!(assignment[i].0, u32::MAX, "transition {i} assigned twice");
                assignment[i] = id;
            }
            blocks.insert(id, sorted);
        }
        assert!(
            assignment.iter().all(|b| b.0 != u32::MAX),
            "assignment must cover every transition"
        );
        Partition {
            blocks,
            assignment,
            next_id,
        }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_ids(&self) -> impl Iterator<Item = BlockId> + '_ {
        self.blocks.keys().copied()
    }

    pub fn members(&self, id: BlockId) -> Option<&[usize]> {
        self.blocks.get(&id).map(|v| v.as_slice())
    }

    pub fn block_of(&self, transition_index: usize) -> BlockId {
        self.assignment[transition_index]
    }

    pub fn assignment(&self) -> &[BlockId] {
        &self.assignment
    }

    /// Replaces block `parent` by two fresh blocks holding `left` and
    /// `right`. Caller guarantees the two halves exactly cover the parent.
    /// Returns the minted (left, right) ids.
    pub fn replace_block(
        &mut self,
        parent: BlockId,
        left: Vec<usize>,
        right: Vec<usize>,
    ) -> (BlockId, BlockId) {
        let old = self.blocks.remove(&parent).expect("parent block exists");
        debug_assert_eq!(old.len(), left.len() + right.len());
        debug_assert!(!left.is_empty() && !right.is_empty());
        let lid = BlockId(self.next_id);
        let rid = BlockId(self.next_id + 1);
        self.next_id += 2;
        for &i in &left {
            self.assignment[i] = lid;
        }
        for &i in &right {
            self.assignment[i] = rid;
        }
        let mut left = left;
        let mut right = right;
        left.sort_unstable();
        right.sort_unstable();
        self.blocks.insert(lid, left);
        self.blocks.insert(rid, right);
        debug_assert!(self.validate().is_ok());
        (lid, rid)
    }

    /// Checks the disjoint-cover invariant: blocks are pairwise disjoint,
    /// non-empty, and their union covers every transition index.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.assignment.len()];
        for (id, members) in &self.blocks {
            if members.is_empty() {
                return Err(Error::Contract(format!("block {id:?} is empty")));
            }
            for &i in members {
                if seen[i] {
                    return Err(Error::Contract(format!("transition {i} in two blocks")));
                }
                seen[i] = true;
                if self.assignment[i] != *id {
                    return Err(Error::Contract(format!(
                        "assignment of {i} disagrees with block {id:?}"
                    )));
                }
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::Contract("blocks do not cover all transitions".into()));
        }
        Ok(())
    }

    /// The equivalence relation induced on transition indices, in a canonical
    /// form independent of block ids: sorted member lists, sorted by first
    /// element. Two partitions are equal up to relabeling iff these match.
    pub fn canonical_classes(&self) -> Vec<Vec<usize>> {
        let mut classes: Vec<Vec<usize>> = self.blocks.values().cloned().collect();
        classes.sort_by_key(|c| c[0]);
        classes
    }
}

/// Returns true iff every block of `fine` is a subset of some block of
/// `coarse`. Errors if the two partitions index different transition sets.
pub fn is_refinement(fine: &Partition, coarse: &Partition) -> Result<bool> {
    if fine.len() != coarse.len() {
        return Err(Error::Contract(format!(
            "partitions cover different universes: {} vs {} transitions",
            fine.len(),
            coarse.len()
        )));
    }
    for members in fine.blocks.values() {
        let target = coarse.block_of(members[0]);
        if members.iter().any(|&i| coarse.block_of(i) != target) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Identifies one state block: the set of distinct state-action blocks
/// containing pairs of which the state is a component. Canonical form is the
/// sorted, deduplicated id list; the empty key is legal and denotes states
/// with no observed outgoing pairs (terminal states).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct StateBlockKey(Vec<BlockId>);

impl StateBlockKey {
    pub fn empty() -> Self {
        StateBlockKey(Vec::new())
    }

    pub fn from_blocks(mut blocks: Vec<BlockId>) -> Self {
        blocks.sort_unstable();
        blocks.dedup();
        StateBlockKey(blocks)
    }

    pub fn members(&self) -> &[BlockId] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: BlockId) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    /// Jaccard similarity |A∩B| / |A∪B|; zero when either side is empty and
    /// the other is not, and when both are empty the keys compare equal
    /// before similarity is ever consulted.
    pub fn jaccard<F: Scalar>(&self, other: &StateBlockKey) -> F {
        let a: BTreeSet<_> = self.0.iter().collect();
        let b: BTreeSet<_> = other.0.iter().collect();
        let union = a.union(&b).count();
        if union == 0 {
            return F::zero();
        }
        let inter = a.intersection(&b).count();
        F::from_usize(inter).unwrap() / F::from_usize(union).unwrap()
    }
}

impl fmt::Debug for StateBlockKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b:?}")?;
        }
        write!(f, "}}")
    }
}

/// The projection of a state-action partition onto the observed states:
/// every state appears under exactly one key.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatePartition {
    blocks: BTreeMap<StateBlockKey, Vec<StateKey>>,
    key_of: HashMap<StateKey, StateBlockKey>,
}

impl StatePartition {
    pub fn from_keys(key_of: HashMap<StateKey, StateBlockKey>) -> Self {
        let mut blocks: BTreeMap<StateBlockKey, Vec<StateKey>> = BTreeMap::new();
        for (state, key) in &key_of {
            blocks.entry(key.clone()).or_default().push(state.clone());
        }
        for members in blocks.values_mut() {
            members.sort();
        }
        StatePartition { blocks, key_of }
    }

    pub fn key_of(&self, state: &StateKey) -> Option<&StateBlockKey> {
        self.key_of.get(state)
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// State blocks in canonical key order (empty key first).
    pub fn blocks(&self) -> impl Iterator<Item = (&StateBlockKey, &[StateKey])> {
        self.blocks.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn keys(&self) -> impl Iterator<Item = &StateBlockKey> {
        self.blocks.keys()
    }

    pub fn states_of(&self, key: &StateBlockKey) -> Option<&[StateKey]> {
        self.blocks.get(key).map(|v| v.as_slice())
    }
}

/// Groups every observed state by the set of blocks its outgoing pairs
/// belong to, using ground-truth assignments. States with no observed
/// outgoing pairs receive the empty key.
pub fn project_exact<F: Scalar>(
    partition: &Partition,
    experience: &ExperienceBuffer<F>,
) -> StatePartition {
    assert_eq!(
        partition.len(),
        experience.len(),
        "partition must cover the experience buffer"
    );
    let mut outgoing: HashMap<StateKey, Vec<BlockId>> = HashMap::new();
    for state in experience.observed_states() {
        outgoing.insert(state, Vec::new());
    }
    for (i, t) in experience.iter().enumerate() {
        outgoing
            .get_mut(&t.state)
            .expect("source state observed")
            .push(partition.block_of(i));
    }
    let key_of = outgoing
        .into_iter()
        .map(|(state, blocks)| (state, StateBlockKey::from_blocks(blocks)))
        .collect();
    StatePartition::from_keys(key_of)
}

/// True iff within every block all member rewards are within `tol` of each
/// other.
pub fn is_reward_respecting<F: Scalar>(
    partition: &Partition,
    experience: &ExperienceBuffer<F>,
    tol: F,
) -> bool {
    partition.blocks.values().all(|members| {
        let mut lo = F::infinity();
        let mut hi = F::neg_infinity();
        for &i in members {
            let r = experience[i].reward;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        hi - lo <= tol
    })
}

/// Deterministic specialization of the stochastic substitution property:
/// within every block, all member transitions' next states fall in the same
/// state block of `proj`.
pub fn has_ssp<F: Scalar>(
    partition: &Partition,
    experience: &ExperienceBuffer<F>,
    proj: &StatePartition,
) -> bool {
    partition.blocks.values().all(|members| {
        let first = proj
            .key_of(&experience[members[0]].next_state)
            .expect("projection covers every next state");
        members.iter().all(|&i| {
            proj.key_of(&experience[i].next_state)
                .expect("projection covers every next state")
                == first
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::types::{ActionId, Transition};

    fn buffer(specs: &[(u8, usize, f64, u8, bool)]) -> ExperienceBuffer<f64> {
        ExperienceBuffer::from_transitions(
            specs
                .iter()
                .map(|&(s, a, r, n, term)| Transition {
                    state: StateKey::new(vec![s]),
                    action: ActionId(a),
                    reward: r,
                    next_state: StateKey::new(vec![n]),
                    terminal: term,
                })
                .collect(),
        )
    }

    #[test]
    fn refinement_is_reflexive() {
        let p = Partition::from_groups(&[vec![0, 1], vec![2]], 3);
        assert!(is_refinement(&p, &p).unwrap());
    }

    #[test]
    fn singletons_refine_one_block() {
        let fine = Partition::from_groups(&[vec![0], vec![1], vec![2]], 3);
        let coarse = Partition::trivial(3);
        assert!(is_refinement(&fine, &coarse).unwrap());
        assert!(!is_refinement(&coarse, &fine).unwrap());
    }

    #[test]
    fn coarser_cannot_refine_strictly_finer() {
        let one = Partition::trivial(4);
        let two = Partition::from_groups(&[vec![0, 1], vec![2, 3]], 4);
        assert!(!is_refinement(&one, &two).unwrap());
        assert!(is_refinement(&two, &one).unwrap());
    }

    #[test]
    fn refinement_rejects_mismatched_universes() {
        let a = Partition::trivial(3);
        let b = Partition::trivial(4);
        assert!(is_refinement(&a, &b).is_err());
    }

    #[test]
    fn state_block_key_is_canonical() {
        let a = StateBlockKey::from_blocks(vec![BlockId(3), BlockId(1), BlockId(3)]);
        let b = StateBlockKey::from_blocks(vec![BlockId(1), BlockId(3)]);
        assert_eq!(a, b);
        assert!(StateBlockKey::empty().is_empty());
    }

    #[test]
    fn project_single_block_two_state_mdp() {
        // 2-state loop: both states have outgoing pairs in the only block.
        let exp = buffer(&[(0, 0, 0.0, 1, false), (1, 0, 0.0, 0, false)]);
        let p = Partition::trivial(2);
        let proj = project_exact(&p, &exp);
        assert_eq!(proj.block_count(), 1);
        let key = StateBlockKey::from_blocks(vec![BlockId(0)]);
        assert_eq!(proj.states_of(&key).unwrap().len(), 2);
    }

    #[test]
    fn project_gives_terminal_states_the_empty_key() {
        let exp = buffer(&[(0, 0, 1.0, 1, true)]);
        let p = Partition::trivial(1);
        let proj = project_exact(&p, &exp);
        assert_eq!(proj.block_count(), 2);
        assert_eq!(
            proj.key_of(&StateKey::new(vec![1])),
            Some(&StateBlockKey::empty())
        );
    }

    #[test]
    fn reward_respecting_detects_mixed_blocks() {
        let exp = buffer(&[(0, 0, 0.0, 1, false), (1, 0, 10.0, 2, true)]);
        let mixed = Partition::trivial(2);
        assert!(!is_reward_respecting(&mixed, &exp, 1e-9));
        let split = Partition::from_groups(&[vec![0], vec![1]], 2);
        assert!(is_reward_respecting(&split, &exp, 1e-9));
    }

    #[test]
    fn singleton_blocks_are_always_reward_respecting() {
        let exp = buffer(&[(0, 0, 1.0, 1, false), (1, 0, 2.0, 0, false)]);
        let p = Partition::from_groups(&[vec![0], vec![1]], 2);
        assert!(is_reward_respecting(&p, &exp, 0.0));
    }

    #[test]
    fn ssp_detects_successors_in_two_state_blocks() {
        // t0: 0 -> 1, t1: 1 -> 2(terminal). Under the one-block partition,
        // state 1 has key {b0} while state 2 has the empty key, so the
        // block's successors straddle two state blocks.
        let exp = buffer(&[(0, 0, 0.0, 1, false), (1, 0, 0.0, 2, true)]);
        let p = Partition::trivial(2);
        let proj = project_exact(&p, &exp);
        assert!(!has_ssp(&p, &exp, &proj));
        let fine = Partition::from_groups(&[vec![0], vec![1]], 2);
        let proj = project_exact(&fine, &exp);
        assert!(has_ssp(&fine, &exp, &proj));
    }

    #[test]
    fn canonical_classes_ignore_block_ids() {
        let a = Partition::from_groups(&[vec![0, 2], vec![1]], 3);
        let b = Partition::from_groups(&[vec![1], vec![0, 2]], 3);
        assert_eq!(a.canonical_classes(), b.canonical_classes());
    }

    #[test]
    fn replace_block_mints_fresh_ids() {
        let mut p = Partition::trivial(4);
        let (l, r) = p.replace_block(BlockId(0), vec![0, 1], vec![2, 3]);
        assert_eq!((l, r), (BlockId(1), BlockId(2)));
        assert_eq!(p.block_count(), 2);
        p.validate().unwrap();
        let (l2, _) = p.replace_block(l, vec![0], vec![1]);
        assert_eq!(l2, BlockId(3));
        p.validate().unwrap();
    }
}
