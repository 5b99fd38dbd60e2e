//! Exhaustive improving-set search: the classical size-bounded swap
//! engine, and the correctness oracle the color-coding search is tested
//! against.
//!
//! Enumeration order is fixed: candidates are explored depth-first over
//! ascending non-member indices, extending only pairwise-disjoint partial
//! selections, so results come in ascending lexicographic order of the
//! sorted index vectors. Golden tests rely on this order.

use std::ops::ControlFlow;

use thiserror::Error;

use crate::core::{
    build_conflict_graph, neighborhood, CoreError, ImprovingSet, Packing, SetFamily,
};
use crate::pathdecomp::{exact_pathwidth, swap_subgraph, SwapPathwidthError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SwapSearchError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Pathwidth(#[from] SwapPathwidthError),
}

/// Visits every pairwise-disjoint X ⊆ non-members with 1 ≤ |X| ≤ r in
/// lexicographic order, passing X and N(X) to the visitor.
fn visit_disjoint_subsets<F>(
    family: &SetFamily,
    packing: &Packing,
    r: usize,
    mut visit: F,
) -> Result<(), CoreError>
where
    F: FnMut(&[usize], &[usize]) -> ControlFlow<()>,
{
    let cg = build_conflict_graph(family, packing)?;
    let non_members: Vec<usize> = cg.non_members().to_vec();
    let mut selection: Vec<usize> = Vec::new();

    fn recurse(
        family: &SetFamily,
        cg: &crate::core::ConflictGraph,
        non_members: &[usize],
        r: usize,
        start: usize,
        selection: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize], &[usize]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        for pos in start..non_members.len() {
            let candidate = non_members[pos];
            if selection
                .iter()
                .any(|&chosen| family.sets_intersect(chosen, candidate))
            {
                continue;
            }
            selection.push(candidate);
            let removed =
                neighborhood(cg, selection).expect("selection consists of non-members");
            visit(selection, &removed)?;
            if selection.len() < r {
                recurse(family, cg, non_members, r, pos + 1, selection, visit)?;
            }
            selection.pop();
        }
        ControlFlow::Continue(())
    }

    if r >= 1 {
        let _ = recurse(
            family,
            &cg,
            &non_members,
            r,
            0,
            &mut selection,
            &mut visit,
        );
    }
    Ok(())
}

/// All improving sets X with |X| ≤ r, exhaustively, in the documented
/// lexicographic order.
pub fn enumerate_improving_sets(
    family: &SetFamily,
    packing: &Packing,
    r: usize,
) -> Result<Vec<ImprovingSet>, CoreError> {
    let mut found = Vec::new();
    visit_disjoint_subsets(family, packing, r, |selection, removed| {
        if removed.len() < selection.len() {
            found.push(
                ImprovingSet::new(family, packing, selection.to_vec())
                    .expect("visited selections satisfy the definition"),
            );
        }
        ControlFlow::Continue(())
    })?;
    Ok(found)
}

/// The lexicographically first improving set with |X| ≤ r, if any.
pub fn first_improving_set(
    family: &SetFamily,
    packing: &Packing,
    r: usize,
) -> Result<Option<ImprovingSet>, CoreError> {
    let mut found = None;
    visit_disjoint_subsets(family, packing, r, |selection, removed| {
        if removed.len() < selection.len() {
            found = Some(selection.to_vec());
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    found
        .map(|sets| ImprovingSet::new(family, packing, sets))
        .transpose()
}

/// The lexicographically first improving set with |X| ≤ r whose induced
/// conflict-graph subgraph on N[X] has pathwidth ≤ pw; the returned set
/// carries an optimal witness decomposition. Exhaustive, so a `None`
/// certifies that no qualifying improving set exists.
pub fn bruteforce_find_pw(
    family: &SetFamily,
    packing: &Packing,
    r: usize,
    pw: usize,
) -> Result<Option<ImprovingSet>, SwapSearchError> {
    let mut found: Option<Vec<usize>> = None;
    let mut failure: Option<SwapPathwidthError> = None;
    visit_disjoint_subsets(family, packing, r, |selection, removed| {
        if removed.len() >= selection.len() {
            return ControlFlow::Continue(());
        }
        let graph = match swap_subgraph(family, packing, selection) {
            Ok(graph) => graph,
            Err(err) => {
                failure = Some(err.into());
                return ControlFlow::Break(());
            }
        };
        match exact_pathwidth(&graph) {
            Ok((width, _)) if width <= pw => {
                found = Some(selection.to_vec());
                ControlFlow::Break(())
            }
            Ok(_) => ControlFlow::Continue(()),
            Err(err) => {
                failure = Some(err.into());
                ControlFlow::Break(())
            }
        }
    })
    .map_err(SwapPathwidthError::from)?;
    if let Some(err) = failure {
        return Err(SwapSearchError::Pathwidth(err));
    }
    match found {
        Some(sets) => {
            let improving = ImprovingSet::new(family, packing, sets.clone())
                .map_err(SwapPathwidthError::from)?;
            let graph = swap_subgraph(family, packing, &sets).map_err(SwapPathwidthError::from)?;
            let (_, witness) = exact_pathwidth(&graph).map_err(SwapPathwidthError::from)?;
            Ok(Some(improving.with_witness(witness)))
        }
        None => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathdecomp::{swap_pathwidth, validate_decomposition};

    fn family_e1() -> SetFamily {
        SetFamily::new(
            7,
            3,
            vec![vec![1, 2, 3], vec![1, 4, 5], vec![2, 6, 7], vec![4, 5, 6]],
        )
        .unwrap()
    }

    #[test]
    fn enumerate_on_e1_is_exhaustive_and_ordered() {
        let family = family_e1();
        let packing = Packing::new(&family, vec![0]).unwrap();
        let sets: Vec<Vec<usize>> = enumerate_improving_sets(&family, &packing, 2)
            .unwrap()
            .into_iter()
            .map(|im| im.sets().to_vec())
            .collect();
        // DFS-lexicographic order: [1,2] precedes [3].
        assert_eq!(sets, vec![vec![1, 2], vec![3]]);
    }

    #[test]
    fn enumerate_on_maximal_packing_is_empty() {
        let family = family_e1();
        let packing = Packing::new(&family, vec![0, 3]).unwrap();
        assert!(enumerate_improving_sets(&family, &packing, 2)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn size_one_enumeration_empty_for_maximal_packing() {
        let family = SetFamily::new(6, 3, vec![vec![1, 2, 3], vec![3, 4, 5], vec![5, 6, 1]]).unwrap();
        let packing = crate::solvers::greedy_maximal(&family);
        assert!(enumerate_improving_sets(&family, &packing, 1)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn bruteforce_find_pw_examples() {
        let family = family_e1();
        let packing = Packing::new(&family, vec![0]).unwrap();

        let found = bruteforce_find_pw(&family, &packing, 2, 1).unwrap().unwrap();
        assert_eq!(found.sets(), &[1, 2]);
        let witness = found.witness_decomposition().unwrap();
        assert!(witness.width() <= 1);
        let graph = swap_subgraph(&family, &packing, found.sets()).unwrap();
        assert!(validate_decomposition(&graph, witness));

        // With pw = 0 the pair is excluded, the isolated set remains.
        let found = bruteforce_find_pw(&family, &packing, 2, 0).unwrap().unwrap();
        assert_eq!(found.sets(), &[3]);
        assert_eq!(swap_pathwidth(&family, &packing, found.sets()).unwrap(), 0);
    }

    #[test]
    fn bruteforce_find_pw_none_on_optimum() {
        let family = family_e1();
        let optimum = Packing::new(&family, vec![0, 3]).unwrap();
        for r in 1..=4 {
            for pw in 0..=3 {
                assert!(bruteforce_find_pw(&family, &optimum, r, pw)
                    .unwrap()
                    .is_none());
            }
        }
    }

    #[test]
    fn unrestricted_swaps_reach_the_optimum_iff_not_maximum() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        for _ in 0..25 {
            let n_elements = rng.gen_range(5..=9);
            let n_sets = rng.gen_range(2..=12);
            let mut sets = Vec::new();
            let mut tries = 0;
            while sets.len() < n_sets && tries < 400 {
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
            let optimum = crate::solvers::exact_max_packing(&family, None).unwrap();
            let r = family.n_sets() - packing.len();
            let found = first_improving_set(&family, &packing, r.max(1)).unwrap();
            assert_eq!(
                found.is_some(),
                packing.len() < optimum.len(),
                "family {:?}",
                family.sets()
            );
        }
    }
}
