//! Instance and solution representation: set families, packings, the
//! conflict graph between a packing and the remaining sets, and swap
//! application.
//!
//! All types are immutable after construction, so they can be shared
//! freely across threads; every mutation constructs a new value.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pathdecomp::PathDecomposition;

/// Errors raised by instance/solution validation and swap application.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoreError {
    #[error("set {index} is empty")]
    EmptySet { index: usize },
    #[error("set {index} has {size} elements, exceeding k = {k}")]
    OversizedSet { index: usize, size: usize, k: usize },
    #[error("set {index} contains element {element} outside [1, {n_elements}]")]
    ElementOutOfRange {
        index: usize,
        element: u32,
        n_elements: usize,
    },
    #[error("set {index} repeats element {element}")]
    RepeatedElement { index: usize, element: u32 },
    #[error("set {index} duplicates set {first}")]
    DuplicateSet { index: usize, first: usize },
    #[error("set index {index} out of range (family has {n_sets} sets)")]
    IndexOutOfRange { index: usize, n_sets: usize },
    #[error("packing repeats set index {index}")]
    RepeatedMember { index: usize },
    #[error("packing members {a} and {b} intersect")]
    MembersIntersect { a: usize, b: usize },
    #[error("set index {index} is not on the non-member side of the conflict graph")]
    NotANonMember { index: usize },
    #[error("candidate sets {a} and {b} intersect, so they form no improving set")]
    CandidatesIntersect { a: usize, b: usize },
    #[error("not an improving set: |N(X)| = {neighbors} is not smaller than |X| = {size}")]
    NotImproving { neighbors: usize, size: usize },
    #[error("improving set does not match this packing: {reason}")]
    StaleImprovingSet { reason: String },
}

/// A k-Set Packing instance: a family of distinct sets of size at most `k`
/// over the universe `{1, ..., n_elements}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetFamily {
    n_elements: usize,
    k: usize,
    sets: Vec<Vec<u32>>,
}

impl SetFamily {
    /// Builds a family, validating every invariant: each set is nonempty,
    /// has at most `k` elements without repetition, all element ids lie in
    /// `[1, n_elements]`, and no two sets are identical. Input sets may be
    /// unsorted; they are stored strictly sorted.
    pub fn new(n_elements: usize, k: usize, sets: Vec<Vec<u32>>) -> Result<Self, CoreError> {
        let mut normalized: Vec<Vec<u32>> = Vec::with_capacity(sets.len());
        for (index, mut set) in sets.into_iter().enumerate() {
            if set.is_empty() {
                return Err(CoreError::EmptySet { index });
            }
            if set.len() > k {
                return Err(CoreError::OversizedSet {
                    index,
                    size: set.len(),
                    k,
                });
            }
            set.sort_unstable();
            for pair in set.windows(2) {
                if pair[0] == pair[1] {
                    return Err(CoreError::RepeatedElement {
                        index,
                        element: pair[0],
                    });
                }
            }
            for &element in &set {
                if element == 0 || element as usize > n_elements {
                    return Err(CoreError::ElementOutOfRange {
                        index,
                        element,
                        n_elements,
                    });
                }
            }
            if let Some(first) = normalized.iter().position(|other| *other == set) {
                return Err(CoreError::DuplicateSet { index, first });
            }
            normalized.push(set);
        }
        Ok(SetFamily {
            n_elements,
            k,
            sets: normalized,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_sets(&self) -> usize {
        self.sets.len()
    }

    /// The elements of set `index`, strictly sorted.
    pub fn set(&self, index: usize) -> &[u32] {
        &self.sets[index]
    }

    pub fn sets(&self) -> &[Vec<u32>] {
        &self.sets
    }

    /// Whether the two indexed sets share an element.
    pub fn sets_intersect(&self, a: usize, b: usize) -> bool {
        sorted_intersect(&self.sets[a], &self.sets[b])
    }

    fn check_index(&self, index: usize) -> Result<(), CoreError> {
        if index >= self.sets.len() {
            return Err(CoreError::IndexOutOfRange {
                index,
                n_sets: self.sets.len(),
            });
        }
        Ok(())
    }
}

/// Whether two strictly sorted slices share an element.
pub(crate) fn sorted_intersect(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// A feasible solution: a sorted list of pairwise-disjoint set indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Packing {
    members: Vec<usize>,
}

impl Packing {
    /// The empty packing.
    pub fn empty() -> Self {
        Packing {
            members: Vec::new(),
        }
    }

    /// Builds a packing from set indices, validating range, distinctness
    /// and pairwise disjointness against `family`.
    pub fn new(family: &SetFamily, mut members: Vec<usize>) -> Result<Self, CoreError> {
        members.sort_unstable();
        for pair in members.windows(2) {
            if pair[0] == pair[1] {
                return Err(CoreError::RepeatedMember { index: pair[0] });
            }
        }
        for &index in &members {
            family.check_index(index)?;
        }
        for (pos, &a) in members.iter().enumerate() {
            for &b in &members[pos + 1..] {
                if family.sets_intersect(a, b) {
                    return Err(CoreError::MembersIntersect { a, b });
                }
            }
        }
        Ok(Packing { members })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.binary_search(&index).is_ok()
    }
}

/// The bipartite intersection graph between packing members (left side)
/// and non-members (right side). An edge is present exactly when the two
/// sets share an element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictGraph {
    members: Vec<usize>,
    non_members: Vec<usize>,
    /// For the i-th non-member, the sorted member indices it intersects.
    adjacency: Vec<Vec<usize>>,
    /// Maps a set index to its position in `non_members`, if any.
    right_pos: Vec<Option<usize>>,
}

impl ConflictGraph {
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn non_members(&self) -> &[usize] {
        &self.non_members
    }

    /// Member neighbors of a non-member set, sorted by set index.
    pub fn neighbors_of(&self, non_member: usize) -> Result<&[usize], CoreError> {
        match self
            .right_pos
            .get(non_member)
            .copied()
            .flatten()
        {
            Some(pos) => Ok(&self.adjacency[pos]),
            None => Err(CoreError::NotANonMember { index: non_member }),
        }
    }

    pub fn is_non_member(&self, index: usize) -> bool {
        self.right_pos.get(index).copied().flatten().is_some()
    }
}

/// Builds the conflict graph of `packing` within `family`.
///
/// Adjacency lists encode exactly the nonempty pairwise intersections
/// between members and non-members, in ascending index order.
pub fn build_conflict_graph(
    family: &SetFamily,
    packing: &Packing,
) -> Result<ConflictGraph, CoreError> {
    for &index in packing.members() {
        family.check_index(index)?;
    }
    let members: Vec<usize> = packing.members().to_vec();
    let mut non_members = Vec::with_capacity(family.n_sets() - members.len());
    let mut right_pos = vec![None; family.n_sets()];
    let mut adjacency = Vec::new();
    for index in 0..family.n_sets() {
        if packing.contains(index) {
            continue;
        }
        let neighbors: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&m| family.sets_intersect(m, index))
            .collect();
        right_pos[index] = Some(non_members.len());
        non_members.push(index);
        adjacency.push(neighbors);
    }
    Ok(ConflictGraph {
        members,
        non_members,
        adjacency,
        right_pos,
    })
}

/// The member neighborhood `N(X)` of a set of non-member indices: the
/// union of their adjacency lists, sorted and deduplicated.
pub fn neighborhood(cg: &ConflictGraph, x: &[usize]) -> Result<Vec<usize>, CoreError> {
    let mut out = Vec::new();
    for &index in x {
        out.extend_from_slice(cg.neighbors_of(index)?);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Tests the improving-set condition for `x`: all listed non-member sets
/// are pairwise disjoint and `|N(X)| < |X|`.
pub fn is_improving_set(
    family: &SetFamily,
    packing: &Packing,
    x: &[usize],
) -> Result<bool, CoreError> {
    let cg = build_conflict_graph(family, packing)?;
    let mut sorted = x.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != x.len() {
        // A repeated index cannot be pairwise disjoint with itself.
        return Ok(false);
    }
    for &index in &sorted {
        if !cg.is_non_member(index) {
            return Err(CoreError::NotANonMember { index });
        }
    }
    for (pos, &a) in sorted.iter().enumerate() {
        for &b in &sorted[pos + 1..] {
            if family.sets_intersect(a, b) {
                return Ok(false);
            }
        }
    }
    let removed = neighborhood(&cg, &sorted)?;
    Ok(removed.len() < sorted.len())
}

/// An improving set `X` together with the packing members `N(X)` it
/// displaces and, optionally, a path decomposition of the conflict-graph
/// subgraph induced by `N[X]` witnessing bounded pathwidth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImprovingSet {
    sets: Vec<usize>,
    removed: Vec<usize>,
    witness_decomposition: Option<PathDecomposition>,
}

impl ImprovingSet {
    /// Validates `sets` as an improving set for `packing` and computes its
    /// exact neighborhood. Fails if the sets are not pairwise disjoint
    /// non-members or the neighborhood is not strictly smaller.
    pub fn new(
        family: &SetFamily,
        packing: &Packing,
        mut sets: Vec<usize>,
    ) -> Result<Self, CoreError> {
        sets.sort_unstable();
        sets.dedup();
        let cg = build_conflict_graph(family, packing)?;
        for &index in &sets {
            if !cg.is_non_member(index) {
                return Err(CoreError::NotANonMember { index });
            }
        }
        for (pos, &a) in sets.iter().enumerate() {
            for &b in &sets[pos + 1..] {
                if family.sets_intersect(a, b) {
                    return Err(CoreError::CandidatesIntersect { a, b });
                }
            }
        }
        let removed = neighborhood(&cg, &sets)?;
        if removed.len() >= sets.len() {
            return Err(CoreError::NotImproving {
                neighbors: removed.len(),
                size: sets.len(),
            });
        }
        Ok(ImprovingSet {
            sets,
            removed,
            witness_decomposition: None,
        })
    }

    /// Attaches a witness path decomposition of the subgraph induced by
    /// `N[X]` (bags hold set indices).
    pub fn with_witness(mut self, witness: PathDecomposition) -> Self {
        self.witness_decomposition = Some(witness);
        self
    }

    /// The added sets `X`, sorted.
    pub fn sets(&self) -> &[usize] {
        &self.sets
    }

    /// The displaced members `N(X)`, sorted.
    pub fn removed(&self) -> &[usize] {
        &self.removed
    }

    pub fn witness_decomposition(&self) -> Option<&PathDecomposition> {
        self.witness_decomposition.as_ref()
    }

    pub fn size(&self) -> usize {
        self.sets.len()
    }
}

/// Applies an improving set: returns `(packing \ N(X)) ∪ X`.
///
/// Re-validates the swap against this packing first, so an infeasible
/// packing can never be produced silently; the result is strictly larger.
pub fn apply_swap(
    family: &SetFamily,
    packing: &Packing,
    swap: &ImprovingSet,
) -> Result<Packing, CoreError> {
    let fresh = ImprovingSet::new(family, packing, swap.sets().to_vec())?;
    if fresh.removed() != swap.removed() {
        return Err(CoreError::StaleImprovingSet {
            reason: format!(
                "recorded neighborhood {:?} differs from actual {:?}",
                swap.removed(),
                fresh.removed()
            ),
        });
    }
    let mut members: Vec<usize> = packing
        .members()
        .iter()
        .copied()
        .filter(|m| fresh.removed().binary_search(m).is_err())
        .collect();
    members.extend_from_slice(fresh.sets());
    Packing::new(family, members)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The running four-set example: S0={1,2,3}, S1={1,4,5}, S2={2,6,7},
    /// S3={4,5,6} over 7 elements.
    pub(crate) fn family_e1() -> SetFamily {
        SetFamily::new(
            7,
            3,
            vec![vec![1, 2, 3], vec![1, 4, 5], vec![2, 6, 7], vec![4, 5, 6]],
        )
        .unwrap()
    }

    #[test]
    fn family_validation_rejects_bad_input() {
        assert!(matches!(
            SetFamily::new(7, 3, vec![vec![1, 2, 3, 4]]),
            Err(CoreError::OversizedSet { .. })
        ));
        assert!(matches!(
            SetFamily::new(7, 3, vec![vec![1, 1, 2]]),
            Err(CoreError::RepeatedElement { .. })
        ));
        assert!(matches!(
            SetFamily::new(7, 3, vec![vec![1, 2, 8]]),
            Err(CoreError::ElementOutOfRange { .. })
        ));
        assert!(matches!(
            SetFamily::new(7, 3, vec![vec![1, 2], vec![2, 1]]),
            Err(CoreError::DuplicateSet { index: 1, first: 0 })
        ));
        assert!(matches!(
            SetFamily::new(7, 3, vec![vec![]]),
            Err(CoreError::EmptySet { .. })
        ));
    }

    #[test]
    fn conflict_graph_on_e1() {
        let family = family_e1();
        let packing = Packing::new(&family, vec![0]).unwrap();
        let cg = build_conflict_graph(&family, &packing).unwrap();
        assert_eq!(cg.members(), &[0]);
        assert_eq!(cg.non_members(), &[1, 2, 3]);
        assert_eq!(cg.neighbors_of(1).unwrap(), &[0]);
        assert_eq!(cg.neighbors_of(2).unwrap(), &[0]);
        assert_eq!(cg.neighbors_of(3).unwrap(), &[] as &[usize]);
        assert!(matches!(
            cg.neighbors_of(0),
            Err(CoreError::NotANonMember { index: 0 })
        ));
    }

    #[test]
    fn conflict_graph_disjoint_family_has_no_edges() {
        let family = SetFamily::new(9, 3, vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]).unwrap();
        let packing = Packing::new(&family, vec![0, 1, 2]).unwrap();
        let cg = build_conflict_graph(&family, &packing).unwrap();
        assert!(cg.non_members().is_empty());
    }

    #[test]
    fn conflict_graph_single_set_empty_packing() {
        let family = SetFamily::new(3, 3, vec![vec![1, 2, 3]]).unwrap();
        let cg = build_conflict_graph(&family, &Packing::empty()).unwrap();
        assert_eq!(cg.non_members(), &[0]);
        assert_eq!(cg.neighbors_of(0).unwrap(), &[] as &[usize]);
    }

    #[test]
    fn neighborhood_on_e1() {
        let family = family_e1();
        let packing = Packing::new(&family, vec![0]).unwrap();
        let cg = build_conflict_graph(&family, &packing).unwrap();
        assert_eq!(neighborhood(&cg, &[1, 2]).unwrap(), vec![0]);
        assert_eq!(neighborhood(&cg, &[]).unwrap(), Vec::<usize>::new());
        assert_eq!(neighborhood(&cg, &[3]).unwrap(), Vec::<usize>::new());
        assert!(neighborhood(&cg, &[0]).is_err());
    }

    #[test]
    fn improving_set_examples() {
        let family = family_e1();
        let packing = Packing::new(&family, vec![0]).unwrap();
        assert!(is_improving_set(&family, &packing, &[1, 2]).unwrap());
        assert!(!is_improving_set(&family, &packing, &[]).unwrap());
        let both = Packing::new(&family, vec![0, 3]).unwrap();
        assert!(!is_improving_set(&family, &both, &[1, 2]).unwrap());
    }

    #[test]
    fn apply_swap_examples() {
        let family = family_e1();
        let packing = Packing::new(&family, vec![0]).unwrap();
        let swap = ImprovingSet::new(&family, &packing, vec![1, 2]).unwrap();
        let next = apply_swap(&family, &packing, &swap).unwrap();
        assert_eq!(next.members(), &[1, 2]);

        let empty = Packing::empty();
        let single = ImprovingSet::new(&family, &empty, vec![3]).unwrap();
        assert_eq!(apply_swap(&family, &empty, &single).unwrap().members(), &[3]);

        let add = ImprovingSet::new(&family, &packing, vec![3]).unwrap();
        assert_eq!(apply_swap(&family, &packing, &add).unwrap().members(), &[0, 3]);
    }

    #[test]
    fn apply_swap_rejects_non_improving() {
        let family = family_e1();
        let packing = Packing::new(&family, vec![0, 3]).unwrap();
        assert!(matches!(
            ImprovingSet::new(&family, &packing, vec![1, 2]),
            Err(CoreError::NotImproving { .. })
        ));
    }

    #[test]
    fn stale_swap_rejected() {
        let family = family_e1();
        let empty = Packing::empty();
        let swap = ImprovingSet::new(&family, &empty, vec![1]).unwrap();
        // After the packing changed, the recorded empty neighborhood is stale.
        let packing = Packing::new(&family, vec![0]).unwrap();
        assert!(apply_swap(&family, &packing, &swap).is_err());
    }

    /// From-scratch restatement of the improving-set definition, used as
    /// an independent oracle against `is_improving_set`.
    fn is_improving_by_definition(family: &SetFamily, packing: &Packing, x: &[usize]) -> bool {
        if x.iter().any(|&i| packing.contains(i) || i >= family.n_sets()) {
            return false;
        }
        for (pos, &a) in x.iter().enumerate() {
            for &b in &x[pos + 1..] {
                if a == b || family.sets_intersect(a, b) {
                    return false;
                }
            }
        }
        let mut neighbors = std::collections::BTreeSet::new();
        for &s in x {
            for &m in packing.members() {
                if family.sets_intersect(m, s) {
                    neighbors.insert(m);
                }
            }
        }
        neighbors.len() < x.len()
    }

    #[test]
    fn improving_check_matches_definition_on_random_families() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..40 {
            let n_elements = rng.gen_range(5..=10);
            let n_sets = rng.gen_range(2..=12u32);
            let mut sets = Vec::new();
            while sets.len() < n_sets as usize {
                let size = rng.gen_range(1..=3);
                let mut set: Vec<u32> = (1..=n_elements as u32).collect();
                set.shuffle(&mut rng);
                set.truncate(size);
                set.sort_unstable();
                if !sets.contains(&set) {
                    sets.push(set);
                }
            }
            let family = SetFamily::new(n_elements, 3, sets).unwrap();
            let packing = crate::solvers::greedy_maximal(&family);
            let non_members: Vec<usize> =
                (0..family.n_sets()).filter(|&i| !packing.contains(i)).collect();
            // All subsets X of non-members with |X| <= 4.
            for mask in 0u32..(1 << non_members.len().min(12)) {
                if mask.count_ones() > 4 {
                    continue;
                }
                let x: Vec<usize> = non_members
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| mask >> bit & 1 == 1)
                    .map(|(_, &i)| i)
                    .collect();
                assert_eq!(
                    is_improving_set(&family, &packing, &x).unwrap(),
                    is_improving_by_definition(&family, &packing, &x),
                    "family {:?} packing {:?} x {:?}",
                    family.sets(),
                    packing.members(),
                    x
                );
            }
        }
    }

    #[test]
    fn conflict_graph_edges_match_intersections_exhaustively() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let n_elements = rng.gen_range(4..=9);
            let n_sets = rng.gen_range(1..=10);
            let mut sets = Vec::new();
            let mut tries = 0;
            while sets.len() < n_sets && tries < 200 {
                tries += 1;
                let size = rng.gen_range(1..=3);
                let mut set: Vec<u32> = (1..=n_elements as u32).collect();
                set.shuffle(&mut rng);
                set.truncate(size);
                set.sort_unstable();
                if !sets.contains(&set) {
                    sets.push(set);
                }
            }
            let family = SetFamily::new(n_elements, 3, sets).unwrap();
            let packing = crate::solvers::greedy_maximal(&family);
            let cg = build_conflict_graph(&family, &packing).unwrap();
            for &s in cg.non_members() {
                for &m in packing.members() {
                    let expected = family
                        .set(s)
                        .iter()
                        .any(|e| family.set(m).contains(e));
                    let present = cg.neighbors_of(s).unwrap().contains(&m);
                    assert_eq!(expected, present);
                }
            }
        }
    }
}
