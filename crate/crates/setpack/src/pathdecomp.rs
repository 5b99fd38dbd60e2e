//! Path decompositions: validation, conversion to nice decompositions,
//! and an exact pathwidth oracle for small graphs based on the dynamic
//! program over vertex subsets (vertex-separation formulation).
//!
//! Graphs here carry arbitrary `usize` vertex labels so that conflict-graph
//! subgraphs (whose vertices are set indices) can be decomposed without
//! relabeling on the caller side.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard cap for the exact pathwidth oracle (the DP is exponential in |V|).
pub const EXACT_PATHWIDTH_LIMIT: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PathDecompError {
    #[error("graph has {n} vertices, exceeding the exact-oracle limit {limit}")]
    GraphTooLarge { n: usize, limit: usize },
    #[error("edge endpoint {vertex} is not a vertex of the graph")]
    UnknownVertex { vertex: usize },
    #[error("self-loop on vertex {vertex} not allowed")]
    SelfLoop { vertex: usize },
    #[error("input decomposition is invalid: {reason}")]
    InvalidDecomposition { reason: String },
}

/// A simple undirected graph over arbitrary `usize` vertex labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    vertices: BTreeSet<usize>,
    edges: BTreeSet<(usize, usize)>,
}

impl SimpleGraph {
    pub fn new<V, E>(vertices: V, edges: E) -> Result<Self, PathDecompError>
    where
        V: IntoIterator<Item = usize>,
        E: IntoIterator<Item = (usize, usize)>,
    {
        let vertices: BTreeSet<usize> = vertices.into_iter().collect();
        let mut normalized = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(PathDecompError::SelfLoop { vertex: u });
            }
            for w in [u, v] {
                if !vertices.contains(&w) {
                    return Err(PathDecompError::UnknownVertex { vertex: w });
                }
            }
            normalized.insert((u.min(v), u.max(v)));
        }
        Ok(SimpleGraph {
            vertices,
            edges: normalized,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.vertices.iter().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
}

/// A sequence of bags; vertices are arbitrary labels. Bags are stored
/// sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathDecomposition {
    bags: Vec<Vec<usize>>,
}

impl PathDecomposition {
    pub fn new(bags: Vec<Vec<usize>>) -> Self {
        let bags = bags
            .into_iter()
            .map(|mut bag| {
                bag.sort_unstable();
                bag.dedup();
                bag
            })
            .collect();
        PathDecomposition { bags }
    }

    pub fn bags(&self) -> &[Vec<usize>] {
        &self.bags
    }

    /// Largest bag size minus one; the width of `[∅]` is 0 by convention.
    pub fn width(&self) -> usize {
        self.bags
            .iter()
            .map(|bag| bag.len())
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    /// All vertices covered by some bag.
    pub fn covered_vertices(&self) -> BTreeSet<usize> {
        self.bags.iter().flatten().copied().collect()
    }

    /// Checks property (iii) alone: every vertex occupies a contiguous
    /// interval of bags. This is the only invariant checkable without the
    /// underlying graph.
    pub fn is_contiguous(&self) -> bool {
        let mut last_seen: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, bag) in self.bags.iter().enumerate() {
            for &v in bag {
                if let Some(&prev) = last_seen.get(&v) {
                    if prev + 1 != i {
                        return false;
                    }
                }
                last_seen.insert(v, i);
            }
        }
        true
    }
}

/// Checks all three path-decomposition properties of `pd` for `graph`:
/// (i) every vertex lies in some bag, (ii) every edge has both endpoints
/// in some bag, (iii) each vertex's bags form a contiguous interval.
pub fn validate_decomposition(graph: &SimpleGraph, pd: &PathDecomposition) -> bool {
    let covered = pd.covered_vertices();
    if !graph.vertices().all(|v| covered.contains(&v)) {
        return false;
    }
    if covered.iter().any(|v| !graph.vertices.contains(v)) {
        return false;
    }
    for (u, v) in graph.edges() {
        if !pd
            .bags()
            .iter()
            .any(|bag| bag.binary_search(&u).is_ok() && bag.binary_search(&v).is_ok())
        {
            return false;
        }
    }
    pd.is_contiguous()
}

/// The role a bag plays inside a nice path decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BagKind {
    First,
    Introduce(usize),
    Forget(usize),
    Last,
}

/// A nice path decomposition: starts and ends with the empty bag, and each
/// internal bag introduces or forgets exactly one vertex relative to its
/// predecessor. The final empty bag absorbs the last forget, so the bag
/// preceding it holds at most one vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NicePathDecomposition {
    bags: Vec<Vec<usize>>,
    kinds: Vec<BagKind>,
}

impl NicePathDecomposition {
    pub fn bags(&self) -> &[Vec<usize>] {
        &self.bags
    }

    pub fn kinds(&self) -> &[BagKind] {
        &self.kinds
    }

    pub fn width(&self) -> usize {
        self.as_path_decomposition().width()
    }

    pub fn as_path_decomposition(&self) -> PathDecomposition {
        PathDecomposition::new(self.bags.clone())
    }

    /// Checks the structural invariants of niceness (independent of any
    /// graph): empty first/last bags and one-vertex steps matching the
    /// recorded kinds.
    pub fn is_nice(&self) -> bool {
        let q = self.bags.len();
        if q < 2 || q != self.kinds.len() {
            return false;
        }
        if self.kinds[0] != BagKind::First || !self.bags[0].is_empty() {
            return false;
        }
        if self.kinds[q - 1] != BagKind::Last || !self.bags[q - 1].is_empty() {
            return false;
        }
        if self.bags[q - 2].len() > 1 {
            return false;
        }
        for i in 1..q - 1 {
            let prev: BTreeSet<usize> = self.bags[i - 1].iter().copied().collect();
            let cur: BTreeSet<usize> = self.bags[i].iter().copied().collect();
            match self.kinds[i] {
                BagKind::Introduce(v) => {
                    if prev.contains(&v) || !cur.contains(&v) {
                        return false;
                    }
                    let mut expected = prev.clone();
                    expected.insert(v);
                    if expected != cur {
                        return false;
                    }
                }
                BagKind::Forget(v) => {
                    if !prev.contains(&v) || cur.contains(&v) {
                        return false;
                    }
                    let mut expected = prev.clone();
                    expected.remove(&v);
                    if expected != cur {
                        return false;
                    }
                }
                BagKind::First | BagKind::Last => return false,
            }
        }
        true
    }
}

/// Transforms a valid path decomposition into a nice one of the same graph
/// without increasing the width.
///
/// Sweeps left to right, emitting the forgets and then the introduces that
/// turn each bag into the next (each group in ascending vertex order), so
/// the output is deterministic. Rejects inputs whose vertex occurrences
/// are not contiguous, which is the invariant checkable without the graph.
pub fn make_nice(pd: &PathDecomposition) -> Result<NicePathDecomposition, PathDecompError> {
    if !pd.is_contiguous() {
        return Err(PathDecompError::InvalidDecomposition {
            reason: "vertex occurrences are not contiguous".into(),
        });
    }
    let mut bags: Vec<Vec<usize>> = vec![Vec::new()];
    let mut kinds = vec![BagKind::First];
    let mut current: BTreeSet<usize> = BTreeSet::new();
    let q = pd.bags().len();
    for i in 0..=q {
        let target: BTreeSet<usize> = if i < q {
            pd.bags()[i].iter().copied().collect()
        } else {
            BTreeSet::new()
        };
        let forgets: Vec<usize> = current.difference(&target).copied().collect();
        let introduces: Vec<usize> = target.difference(&current).copied().collect();
        for v in forgets {
            current.remove(&v);
            // The trailing empty bag doubles as the last forget.
            if i == q && current.is_empty() {
                break;
            }
            bags.push(current.iter().copied().collect());
            kinds.push(BagKind::Forget(v));
        }
        for v in introduces {
            current.insert(v);
            bags.push(current.iter().copied().collect());
            kinds.push(BagKind::Introduce(v));
        }
    }
    bags.push(Vec::new());
    kinds.push(BagKind::Last);
    let nice = NicePathDecomposition { bags, kinds };
    debug_assert!(nice.is_nice());
    Ok(nice)
}

/// Exact pathwidth of `graph`, together with a witness decomposition.
///
/// Dynamic program over vertex subsets in the vertex-separation
/// formulation; rejects graphs with more than [`EXACT_PATHWIDTH_LIMIT`]
/// vertices. The empty graph has width 0 with decomposition `[∅]`.
pub fn exact_pathwidth(
    graph: &SimpleGraph,
) -> Result<(usize, PathDecomposition), PathDecompError> {
    let vertices: Vec<usize> = graph.vertices().collect();
    let n = vertices.len();
    if n > EXACT_PATHWIDTH_LIMIT {
        return Err(PathDecompError::GraphTooLarge {
            n,
            limit: EXACT_PATHWIDTH_LIMIT,
        });
    }
    if n == 0 {
        return Ok((0, PathDecomposition::new(vec![vec![]])));
    }
    let index_of: BTreeMap<usize, usize> = vertices
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    // Dense adjacency as bitmasks.
    let mut adj = vec![0u32; n];
    for (u, v) in graph.edges() {
        let (iu, iv) = (index_of[&u], index_of[&v]);
        adj[iu] |= 1 << iv;
        adj[iv] |= 1 << iu;
    }
    let full: u32 = if n == 32 { u32::MAX } else { (1 << n) - 1 };
    // boundary(S) = number of vertices in S with a neighbor outside S.
    let boundary = |s: u32| -> u8 {
        let mut count = 0;
        let mut bits = s;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            if adj[i] & !s != 0 {
                count += 1;
            }
        }
        count
    };
    let size = 1usize << n;
    let mut cost = vec![u8::MAX; size];
    let mut choice = vec![u8::MAX; size];
    cost[0] = 0;
    for s in 1u32..=full {
        let b = boundary(s);
        let mut best = u8::MAX;
        let mut best_v = u8::MAX;
        let mut bits = s;
        while bits != 0 {
            let i = bits.trailing_zeros();
            bits &= bits - 1;
            let prev = cost[(s & !(1 << i)) as usize];
            let value = prev.max(b);
            if value < best {
                best = value;
                best_v = i as u8;
            }
        }
        cost[s as usize] = best;
        choice[s as usize] = best_v;
    }
    // Reconstruct the layout from the recorded choices.
    let mut layout = Vec::with_capacity(n);
    let mut s = full;
    while s != 0 {
        let v = choice[s as usize] as usize;
        layout.push(v);
        s &= !(1 << v);
    }
    layout.reverse();
    // Convert the layout to bags: bag i holds v_i plus every earlier vertex
    // that still has a neighbor at position >= i.
    let mut position = vec![0usize; n];
    for (pos, &v) in layout.iter().enumerate() {
        position[v] = pos;
    }
    let mut bags = Vec::with_capacity(n);
    for (pos, &v) in layout.iter().enumerate() {
        let mut bag = vec![vertices[v]];
        for &u in &layout[..pos] {
            let mut bits = adj[u];
            let mut keep = false;
            while bits != 0 {
                let w = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                if position[w] >= pos {
                    keep = true;
                    break;
                }
            }
            if keep {
                bag.push(vertices[u]);
            }
        }
        bags.push(bag);
    }
    let pd = PathDecomposition::new(bags);
    let width = cost[full as usize] as usize;
    debug_assert!(validate_decomposition(graph, &pd));
    debug_assert_eq!(pd.width(), width);
    Ok((width, pd))
}

/// The conflict-graph subgraph induced by `N[X]` for a candidate swap `X`,
/// with set indices as vertex labels.
pub fn swap_subgraph(
    family: &crate::core::SetFamily,
    packing: &crate::core::Packing,
    x: &[usize],
) -> Result<SimpleGraph, crate::core::CoreError> {
    let cg = crate::core::build_conflict_graph(family, packing)?;
    let removed = crate::core::neighborhood(&cg, x)?;
    let mut vertices: Vec<usize> = x.to_vec();
    vertices.extend_from_slice(&removed);
    let mut edges = Vec::new();
    for &s in x {
        for &m in cg.neighbors_of(s).expect("checked by neighborhood") {
            edges.push((m, s));
        }
    }
    Ok(SimpleGraph::new(vertices, edges).expect("induced subgraph is simple"))
}

/// Exact pathwidth of the conflict-graph subgraph induced by `N[X]`.
pub fn swap_pathwidth(
    family: &crate::core::SetFamily,
    packing: &crate::core::Packing,
    x: &[usize],
) -> Result<usize, SwapPathwidthError> {
    let graph = swap_subgraph(family, packing, x)?;
    let (width, _) = exact_pathwidth(&graph)?;
    Ok(width)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SwapPathwidthError {
    #[error(transparent)]
    Core(#[from] crate::core::CoreError),
    #[error(transparent)]
    PathDecomp(#[from] PathDecompError),
}
