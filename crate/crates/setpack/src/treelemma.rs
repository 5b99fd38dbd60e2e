//! Bounded trees with witness edges in labeled multigraphs, and the path
//! decompositions derived from them.
//!
//! Given a multigraph of minimum degree 3 whose edges carry symbol sets
//! (at most γ symbols per edge, each symbol on at most γ edges),
//! [`find_bounded_tree`] produces a logarithmic-size tree containing two
//! extra edges, with at most four leaves, in which any two label-sharing
//! tree edges sit within β levels of each other. [`verify_tree_certificate`]
//! checks all four properties independently, and
//! [`build_decomposed_subgraph`] turns the certificate into a subgraph
//! with one more edge than vertices plus a path decomposition of width at
//! most 4(β+3) whose bags keep label-sharing edges together.
//!
//! The construction grows layered trees whose depth-j layer holds exactly
//! ⌊2(3/2)^j⌋ vertices, excluding edges whose labels appear above the last
//! β levels; when growth stalls, the two witness edges are extracted from
//! the stalled frontier by case analysis.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::core::sorted_intersect;
use crate::pathdecomp::{validate_decomposition, PathDecomposition, SimpleGraph};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeLemmaError {
    #[error("gamma must be at least 1")]
    BadGamma,
    #[error("edge ({u}, {v}) is a self-loop")]
    SelfLoop { u: usize, v: usize },
    #[error("edge ({u}, {v}) references a vertex outside [0, {n})")]
    VertexOutOfRange { u: usize, v: usize, n: usize },
    #[error("edge {edge} carries {size} symbols, exceeding gamma = {gamma}")]
    LabelTooLarge {
        edge: usize,
        size: usize,
        gamma: usize,
    },
    #[error("symbol {symbol} appears on {count} edges, exceeding gamma = {gamma}")]
    SymbolOverused {
        symbol: u32,
        count: usize,
        gamma: usize,
    },
    #[error("vertex {vertex} has degree {degree} < 3")]
    DegreeTooSmall { vertex: usize, degree: usize },
    #[error("graph has no vertices")]
    Empty,
    #[error("case analysis gap: {details}")]
    CaseAnalysisGap { details: String },
    #[error("constructed certificate failed self-verification: {details}")]
    InternalVerification { details: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// One edge of a labeled multigraph; parallel edges are distinct entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiEdge {
    pub u: usize,
    pub v: usize,
    /// Sorted distinct symbol ids.
    pub label: Vec<u32>,
}

/// An undirected multigraph with per-edge symbol sets. Vertices are
/// `0..n_vertices`; the edge id is the index into the edge list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledMultigraph {
    n_vertices: usize,
    edges: Vec<MultiEdge>,
    gamma: usize,
}

impl LabeledMultigraph {
    /// Validates everything except the minimum-degree requirement, which
    /// only the constructive procedures need.
    pub fn new(
        n_vertices: usize,
        edges: Vec<(usize, usize, Vec<u32>)>,
        gamma: usize,
    ) -> Result<Self, TreeLemmaError> {
        if gamma < 1 {
            return Err(TreeLemmaError::BadGamma);
        }
        let mut normalized = Vec::with_capacity(edges.len());
        let mut symbol_counts: BTreeMap<u32, usize> = BTreeMap::new();
        for (index, (u, v, mut label)) in edges.into_iter().enumerate() {
            if u == v {
                return Err(TreeLemmaError::SelfLoop { u, v });
            }
            if u >= n_vertices || v >= n_vertices {
                return Err(TreeLemmaError::VertexOutOfRange {
                    u,
                    v,
                    n: n_vertices,
                });
            }
            label.sort_unstable();
            label.dedup();
            if label.len() > gamma {
                return Err(TreeLemmaError::LabelTooLarge {
                    edge: index,
                    size: label.len(),
                    gamma,
                });
            }
            for &symbol in &label {
                *symbol_counts.entry(symbol).or_insert(0) += 1;
            }
            normalized.push(MultiEdge { u, v, label });
        }
        for (symbol, count) in symbol_counts {
            if count > gamma {
                return Err(TreeLemmaError::SymbolOverused {
                    symbol,
                    count,
                    gamma,
                });
            }
        }
        Ok(LabeledMultigraph {
            n_vertices,
            edges: normalized,
            gamma,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[MultiEdge] {
        &self.edges
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn degree(&self, vertex: usize) -> usize {
        self.edges
            .iter()
            .filter(|e| e.u == vertex || e.v == vertex)
            .count()
    }

    fn check_min_degree(&self) -> Result<(), TreeLemmaError> {
        if self.n_vertices == 0 {
            return Err(TreeLemmaError::Empty);
        }
        let mut degree = vec![0usize; self.n_vertices];
        for e in &self.edges {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        for (vertex, &d) in degree.iter().enumerate() {
            if d < 3 {
                return Err(TreeLemmaError::DegreeTooSmall { vertex, degree: d });
            }
        }
        Ok(())
    }

    /// Edge ids incident to `vertex`, ascending.
    fn incident(&self, vertex: usize) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.u == vertex || e.v == vertex)
            .map(|(i, _)| i)
            .collect()
    }

    /// Multiplicity classes: normalized endpoint pair → ascending edge ids.
    fn parallel_classes(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut classes: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            classes
                .entry((e.u.min(e.v), e.u.max(e.v)))
                .or_default()
                .push(i);
        }
        classes
    }
}

/// β = ⌈log_{3/2}(12 γ²)⌉, computed with integer arithmetic.
pub fn beta(gamma: usize) -> Result<u32, TreeLemmaError> {
    if gamma < 1 {
        return Err(TreeLemmaError::BadGamma);
    }
    let threshold = 12u128 * (gamma as u128) * (gamma as u128);
    let mut b = 0u32;
    let (mut pow3, mut pow2) = (1u128, 1u128);
    // Smallest b with (3/2)^b >= 12 γ², i.e. 3^b >= 12 γ² 2^b.
    while pow3 < threshold.saturating_mul(pow2) {
        b += 1;
        pow3 = pow3.saturating_mul(3);
        pow2 = pow2.saturating_mul(2);
    }
    Ok(b)
}

/// ⌊2 (3/2)^j⌋.
fn layer_target(j: u32) -> usize {
    let pow3 = 3u128.checked_pow(j);
    match pow3 {
        Some(p) => {
            let value = (2 * p) >> j;
            usize::try_from(value).unwrap_or(usize::MAX)
        }
        None => usize::MAX,
    }
}

/// The output of [`find_bounded_tree`]: a tree subgraph `T0 = (V0, E0)`
/// rooted at `root`, plus two extra edges with both endpoints in `V0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeCertificate {
    /// Sorted vertex set V0.
    pub vertices: Vec<usize>,
    /// Sorted edge ids E0 forming a spanning tree of `vertices`.
    pub tree_edges: Vec<usize>,
    pub root: usize,
    /// The two witness edges, ascending ids, not in `tree_edges`.
    pub extra_edges: (usize, usize),
}

impl TreeCertificate {
    fn from_parts(
        vertices: impl IntoIterator<Item = usize>,
        tree_edges: impl IntoIterator<Item = usize>,
        root: usize,
        e1: usize,
        e2: usize,
    ) -> Self {
        let mut vertices: Vec<usize> = vertices.into_iter().collect();
        vertices.sort_unstable();
        vertices.dedup();
        let mut tree_edges: Vec<usize> = tree_edges.into_iter().collect();
        tree_edges.sort_unstable();
        tree_edges.dedup();
        TreeCertificate {
            vertices,
            tree_edges,
            root,
            extra_edges: (e1.min(e2), e1.max(e2)),
        }
    }

    /// Depth of every certificate vertex below the root, following tree
    /// edges only. `None` for disconnected certificates.
    pub fn depths(&self, h: &LabeledMultigraph) -> Option<HashMap<usize, usize>> {
        let vertex_set: HashSet<usize> = self.vertices.iter().copied().collect();
        if !vertex_set.contains(&self.root) {
            return None;
        }
        let mut adjacency: HashMap<usize, Vec<usize>> = HashMap::new();
        for &edge in &self.tree_edges {
            let e = h.edges().get(edge)?;
            adjacency.entry(e.u).or_default().push(e.v);
            adjacency.entry(e.v).or_default().push(e.u);
        }
        let mut depth = HashMap::new();
        depth.insert(self.root, 0usize);
        let mut queue = std::collections::VecDeque::from([self.root]);
        while let Some(v) = queue.pop_front() {
            let d = depth[&v];
            for &w in adjacency.get(&v).into_iter().flatten() {
                if !depth.contains_key(&w) {
                    depth.insert(w, d + 1);
                    queue.push_back(w);
                }
            }
        }
        if depth.len() == self.vertices.len() {
            Some(depth)
        } else {
            None
        }
    }
}

/// Checks the four certificate properties against `h`:
/// size `|V0| ≤ 4(log_{3/2} n + 2)`, two distinct extra edges outside the
/// tree with both endpoints in `V0`, at most four leaves, and β-nearness
/// of label-sharing tree edges, with `dist(r0, uv) = min` over endpoints.
pub fn verify_tree_certificate(h: &LabeledMultigraph, cert: &TreeCertificate) -> bool {
    let n = h.n_vertices();
    let m = h.edges().len();
    let vertex_set: BTreeSet<usize> = cert.vertices.iter().copied().collect();
    if vertex_set.len() != cert.vertices.len() || vertex_set.is_empty() {
        return false;
    }
    if !vertex_set.contains(&cert.root) {
        return false;
    }
    let tree_set: BTreeSet<usize> = cert.tree_edges.iter().copied().collect();
    if tree_set.len() != cert.tree_edges.len() {
        return false;
    }
    for &edge in &cert.tree_edges {
        if edge >= m {
            return false;
        }
        let e = &h.edges()[edge];
        if !vertex_set.contains(&e.u) || !vertex_set.contains(&e.v) {
            return false;
        }
    }
    // Tree: |E0| = |V0| - 1 and connected from the root.
    if cert.tree_edges.len() + 1 != cert.vertices.len() {
        return false;
    }
    let Some(depth) = cert.depths(h) else {
        return false;
    };
    // |V0| ≤ 4(log_{3/2} n + 2).
    let bound = 4.0 * ((n as f64).ln() / 1.5f64.ln() + 2.0) + 1e-9;
    if (cert.vertices.len() as f64) > bound {
        return false;
    }
    // Two distinct extra edges outside E0, both endpoints inside V0.
    let (e1, e2) = cert.extra_edges;
    if e1 == e2 || e1 >= m || e2 >= m {
        return false;
    }
    for extra in [e1, e2] {
        if tree_set.contains(&extra) {
            return false;
        }
        let e = &h.edges()[extra];
        if !vertex_set.contains(&e.u) || !vertex_set.contains(&e.v) {
            return false;
        }
    }
    // At most 4 leaves.
    let mut tree_degree: HashMap<usize, usize> = HashMap::new();
    for &edge in &cert.tree_edges {
        let e = &h.edges()[edge];
        *tree_degree.entry(e.u).or_insert(0) += 1;
        *tree_degree.entry(e.v).or_insert(0) += 1;
    }
    let leaves = cert
        .vertices
        .iter()
        .filter(|v| tree_degree.get(v).copied().unwrap_or(0) == 1)
        .count();
    if leaves > 4 {
        return false;
    }
    // β-nearness of label-sharing tree edges.
    let Ok(beta) = beta(h.gamma()) else {
        return false;
    };
    let edge_dist = |edge: usize| -> usize {
        let e = &h.edges()[edge];
        depth[&e.u].min(depth[&e.v])
    };
    for (pos, &a) in cert.tree_edges.iter().enumerate() {
        for &b in &cert.tree_edges[pos + 1..] {
            if sorted_intersect(&h.edges()[a].label, &h.edges()[b].label) {
                let (da, db) = (edge_dist(a), edge_dist(b));
                if da.abs_diff(db) > beta as usize {
                    return false;
                }
            }
        }
    }
    true
}

/// Growing-tree bookkeeping shared by the growth loop and extraction.
struct GrownTree {
    layers: Vec<Vec<usize>>,
    depth: HashMap<usize, usize>,
    parent_vertex: HashMap<usize, usize>,
    parent_edge: HashMap<usize, usize>,
    tree_edges: HashSet<usize>,
    /// Parent-edge ids per edge depth (edges joining layer d to d+1).
    edges_at_depth: Vec<Vec<usize>>,
}

impl GrownTree {
    fn contains(&self, vertex: usize) -> bool {
        self.depth.contains_key(&vertex)
    }

    fn lca(&self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (a, b);
        while self.depth[&a] > self.depth[&b] {
            a = self.parent_vertex[&a];
        }
        while self.depth[&b] > self.depth[&a] {
            b = self.parent_vertex[&b];
        }
        while a != b {
            a = self.parent_vertex[&a];
            b = self.parent_vertex[&b];
        }
        a
    }

    /// Tree vertices and parent edges on the path from `v` up to `stop`.
    fn path_to(&self, v: usize, stop: usize) -> (Vec<usize>, Vec<usize>) {
        let mut vertices = vec![v];
        let mut edges = Vec::new();
        let mut cursor = v;
        while cursor != stop {
            edges.push(self.parent_edge[&cursor]);
            cursor = self.parent_vertex[&cursor];
            vertices.push(cursor);
        }
        (vertices, edges)
    }
}

/// Constructs a tree certificate for `h` following the layered-growth
/// procedure; ties are always broken toward the lowest vertex or edge id,
/// so the output is deterministic.
pub fn find_bounded_tree(h: &LabeledMultigraph) -> Result<TreeCertificate, TreeLemmaError> {
    h.check_min_degree()?;
    let finish = |cert: TreeCertificate| -> Result<TreeCertificate, TreeLemmaError> {
        if verify_tree_certificate(h, &cert) {
            Ok(cert)
        } else {
            Err(TreeLemmaError::InternalVerification {
                details: format!("{cert:?}"),
            })
        }
    };

    let classes = h.parallel_classes();

    // Corner case (i): a triple of parallel edges.
    for (&(u, v), ids) in &classes {
        if ids.len() >= 3 {
            return finish(TreeCertificate::from_parts(
                [u, v],
                [ids[0]],
                u,
                ids[1],
                ids[2],
            ));
        }
    }

    // Parallel partners per vertex.
    let mut partners: BTreeMap<usize, Vec<(usize, usize, usize)>> = BTreeMap::new();
    for (&(u, v), ids) in &classes {
        if ids.len() >= 2 {
            partners.entry(u).or_default().push((v, ids[0], ids[1]));
            partners.entry(v).or_default().push((u, ids[0], ids[1]));
        }
    }

    // Corner case (ii): two parallel pairs sharing a center vertex.
    for (&center, list) in &partners {
        if list.len() >= 2 {
            let (u, e_a, e_b) = list[0];
            let (w, e_c, e_d) = list[1];
            return finish(TreeCertificate::from_parts(
                [u, center, w],
                [e_a, e_c],
                center,
                e_b,
                e_d,
            ));
        }
    }

    // Corner case (iii): every vertex lies on a parallel pair.
    if (0..h.n_vertices()).all(|v| partners.contains_key(&v)) {
        let unparalleled = h
            .edges()
            .iter()
            .enumerate()
            .find(|(_, e)| classes[&(e.u.min(e.v), e.u.max(e.v))].len() == 1);
        let Some((edge_uv, e)) = unparalleled else {
            return Err(TreeLemmaError::CaseAnalysisGap {
                details: "all edges parallel but corner cases (i)/(ii) did not fire".into(),
            });
        };
        let (u, v) = (e.u.min(e.v), e.u.max(e.v));
        let (u_partner, e_a, e_b) = partners[&u][0];
        let (v_partner, e_c, e_d) = partners[&v][0];
        if u_partner == v_partner {
            return Err(TreeLemmaError::CaseAnalysisGap {
                details: "shared parallel partner should have triggered corner case (ii)".into(),
            });
        }
        return finish(TreeCertificate::from_parts(
            [u, u_partner, v, v_partner],
            [e_a, edge_uv, e_c],
            u,
            e_b,
            e_d,
        ));
    }

    // Main procedure: grow layered trees from a root with three distinct
    // neighbors (one exists: any vertex without a parallel pair).
    let mut neighbor_sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); h.n_vertices()];
    for e in h.edges() {
        neighbor_sets[e.u].insert(e.v);
        neighbor_sets[e.v].insert(e.u);
    }
    let root = (0..h.n_vertices())
        .find(|&v| neighbor_sets[v].len() >= 3)
        .ok_or_else(|| TreeLemmaError::CaseAnalysisGap {
            details: "no vertex with three distinct neighbors outside the corner cases".into(),
        })?;

    let beta = beta(h.gamma())? as usize;
    let mut tree = GrownTree {
        layers: vec![vec![root]],
        depth: HashMap::from([(root, 0)]),
        parent_vertex: HashMap::new(),
        parent_edge: HashMap::new(),
        tree_edges: HashSet::new(),
        edges_at_depth: Vec::new(),
    };
    let first_children: Vec<usize> = neighbor_sets[root].iter().copied().take(3).collect();
    let mut first_edges = Vec::new();
    for &child in &first_children {
        let edge = h
            .incident(root)
            .into_iter()
            .find(|&i| {
                let e = &h.edges()[i];
                e.u == child || e.v == child
            })
            .expect("child is a neighbor of the root");
        tree.depth.insert(child, 1);
        tree.parent_vertex.insert(child, root);
        tree.parent_edge.insert(child, edge);
        tree.tree_edges.insert(edge);
        first_edges.push(edge);
    }
    tree.layers.push(first_children);
    tree.edges_at_depth.push(first_edges);
    assert_eq!(tree.layers[1].len(), layer_target(1));

    let mut banned_symbols: HashSet<u32> = HashSet::new();
    let mut i = 1usize;
    loop {
        // Ban symbols of tree edges above the last β levels: edge depth
        // ≤ i - β - 1.
        if i >= beta + 1 {
            let d = i - beta - 1;
            if d < tree.edges_at_depth.len() {
                for &edge in &tree.edges_at_depth[d] {
                    banned_symbols.extend(h.edges()[edge].label.iter().copied());
                }
            }
        }
        let frontier: HashSet<usize> = tree.layers[i].iter().copied().collect();
        let mut candidate_edges: Vec<usize> = Vec::new();
        for &v in &tree.layers[i] {
            candidate_edges.extend(h.incident(v));
        }
        candidate_edges.sort_unstable();
        candidate_edges.dedup();
        candidate_edges.retain(|e| !tree.tree_edges.contains(e));

        let is_free = |edge: usize| -> bool {
            h.edges()[edge]
                .label
                .iter()
                .all(|s| !banned_symbols.contains(s))
        };
        let mut outside: BTreeSet<usize> = BTreeSet::new();
        for &edge in &candidate_edges {
            if !is_free(edge) {
                continue;
            }
            let e = &h.edges()[edge];
            for w in [e.u, e.v] {
                if !tree.contains(w) {
                    outside.insert(w);
                }
            }
        }
        let target = layer_target(i as u32 + 1);
        if outside.len() >= target {
            // Grow layer i+1 with the lowest-id vertices.
            let selected: Vec<usize> = outside.into_iter().take(target).collect();
            let mut new_edges = Vec::new();
            for &w in &selected {
                let parent_edge = candidate_edges
                    .iter()
                    .copied()
                    .find(|&edge| {
                        if !is_free(edge) {
                            return false;
                        }
                        let e = &h.edges()[edge];
                        (e.u == w && frontier.contains(&e.v))
                            || (e.v == w && frontier.contains(&e.u))
                    })
                    .expect("selected vertices touch the frontier through a free edge");
                let e = &h.edges()[parent_edge];
                let parent = if e.u == w { e.v } else { e.u };
                tree.depth.insert(w, i + 1);
                tree.parent_vertex.insert(w, parent);
                tree.parent_edge.insert(w, parent_edge);
                tree.tree_edges.insert(parent_edge);
                new_edges.push(parent_edge);
            }
            tree.layers.push(selected);
            tree.edges_at_depth.push(new_edges);
            assert_eq!(tree.layers[i + 1].len(), target, "exponential growth invariant");
            i += 1;
            continue;
        }

        // Growth stalled: extract the certificate.
        let inside: Vec<usize> = candidate_edges
            .iter()
            .copied()
            .filter(|&edge| {
                let e = &h.edges()[edge];
                tree.contains(e.u) && tree.contains(e.v)
            })
            .collect();
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &edge in &candidate_edges {
            if !is_free(edge) {
                continue;
            }
            let e = &h.edges()[edge];
            match (tree.contains(e.u), tree.contains(e.v)) {
                (true, false) => groups.entry(e.v).or_default().push(edge),
                (false, true) => groups.entry(e.u).or_default().push(edge),
                _ => {}
            }
        }
        let tree_endpoint = |edge: usize| -> usize {
            let e = &h.edges()[edge];
            if tree.contains(e.u) {
                e.u
            } else {
                e.v
            }
        };

        // needed: tree vertices forced into V0; extensions: (edge, outside
        // vertex) pairs appended below the frontier.
        let mut needed: Vec<usize> = Vec::new();
        let mut extensions: Vec<(usize, usize)> = Vec::new();
        let extras: (usize, usize);
        if inside.len() >= 2 {
            let (a, b) = (inside[0], inside[1]);
            for &edge in &[a, b] {
                let e = &h.edges()[edge];
                needed.push(e.u);
                needed.push(e.v);
            }
            extras = (a, b);
        } else if let Some((&x, ids)) = groups.iter().find(|(_, ids)| ids.len() >= 3) {
            extensions.push((ids[0], x));
            needed.push(tree_endpoint(ids[0]));
            needed.push(tree_endpoint(ids[1]));
            needed.push(tree_endpoint(ids[2]));
            extras = (ids[1], ids[2]);
        } else {
            let pairs: Vec<(usize, &Vec<usize>)> = groups
                .iter()
                .filter(|(_, ids)| ids.len() >= 2)
                .map(|(&x, ids)| (x, ids))
                .collect();
            if pairs.len() >= 2 {
                let (x, ids_x) = pairs[0];
                let (y, ids_y) = pairs[1];
                extensions.push((ids_x[0], x));
                extensions.push((ids_y[0], y));
                needed.extend([
                    tree_endpoint(ids_x[0]),
                    tree_endpoint(ids_x[1]),
                    tree_endpoint(ids_y[0]),
                    tree_endpoint(ids_y[1]),
                ]);
                extras = (ids_x[1], ids_y[1]);
            } else if inside.len() == 1 && pairs.len() == 1 {
                let (x, ids_x) = pairs[0];
                extensions.push((ids_x[0], x));
                let e = &h.edges()[inside[0]];
                needed.extend([e.u, e.v, tree_endpoint(ids_x[0]), tree_endpoint(ids_x[1])]);
                extras = (inside[0], ids_x[1]);
            } else {
                return Err(TreeLemmaError::CaseAnalysisGap {
                    details: format!(
                        "stalled at depth {i} with {} inside edges, {} shared-endpoint groups, \
                         |V''| = {} < target {target}",
                        inside.len(),
                        pairs.len(),
                        outside.len(),
                    ),
                });
            }
        }

        needed.sort_unstable();
        needed.dedup();
        let mut r0 = needed[0];
        for &v in &needed[1..] {
            r0 = tree.lca(r0, v);
        }
        let mut vertices: Vec<usize> = vec![r0];
        let mut tree_edges: Vec<usize> = Vec::new();
        for &v in &needed {
            let (path_vertices, path_edges) = tree.path_to(v, r0);
            vertices.extend(path_vertices);
            tree_edges.extend(path_edges);
        }
        for &(edge, outside_vertex) in &extensions {
            vertices.push(outside_vertex);
            tree_edges.push(edge);
        }
        return finish(TreeCertificate::from_parts(
            vertices,
            tree_edges,
            r0,
            extras.0,
            extras.1,
        ));
    }
}

/// The certified subgraph `H0 = T0 + {e1, e2}` and its path decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecomposedSubgraph {
    pub certificate: TreeCertificate,
    /// Sorted edge ids of H0.
    pub edge_ids: Vec<usize>,
    pub decomposition: PathDecomposition,
}

/// Runs [`find_bounded_tree`], adds the two witness edges to the tree and
/// builds the layered path decomposition: bag i is the union of tree
/// layers max(0, i-β-1)..=i plus the endpoints of both extra edges.
///
/// All four subgraph properties are re-checked before returning: the edge
/// count exceeds the vertex count by one, the size bound, label-sharing
/// edge pairs meeting in a single bag, and per-edge co-occurrence
/// intervals; so is decomposition validity and the 4(β+3) width bound.
pub fn build_decomposed_subgraph(
    h: &LabeledMultigraph,
) -> Result<DecomposedSubgraph, TreeLemmaError> {
    let certificate = find_bounded_tree(h)?;
    let beta = beta(h.gamma())? as usize;
    let depth = certificate
        .depths(h)
        .expect("verified certificates are connected");
    let max_depth = depth.values().copied().max().unwrap_or(0);
    let mut layers: Vec<Vec<usize>> = vec![Vec::new(); max_depth + 1];
    for (&v, &d) in &depth {
        layers[d].push(v);
    }
    let (e1, e2) = certificate.extra_edges;
    let special: Vec<usize> = {
        let a = &h.edges()[e1];
        let b = &h.edges()[e2];
        vec![a.u, a.v, b.u, b.v]
    };
    let mut bags: Vec<Vec<usize>> = Vec::new();
    for i in 0..=max_depth {
        let mut bag: Vec<usize> = special.clone();
        for layer in layers[i.saturating_sub(beta + 1)..=i].iter() {
            bag.extend_from_slice(layer);
        }
        bag.sort_unstable();
        bag.dedup();
        if bags.last() != Some(&bag) {
            bags.push(bag);
        }
    }
    let decomposition = PathDecomposition::new(bags);

    let mut edge_ids = certificate.tree_edges.clone();
    edge_ids.push(e1);
    edge_ids.push(e2);
    edge_ids.sort_unstable();
    edge_ids.dedup();

    let fail = |details: String| TreeLemmaError::InternalVerification { details };
    // (a) one more edge than vertices.
    if edge_ids.len() != certificate.vertices.len() + 1 {
        return Err(fail(format!(
            "|E0| = {} but |V0| + 1 = {}",
            edge_ids.len(),
            certificate.vertices.len() + 1
        )));
    }
    // Proper path decomposition of the simple support graph.
    let support = SimpleGraph::new(
        certificate.vertices.iter().copied(),
        edge_ids.iter().map(|&i| {
            let e = &h.edges()[i];
            (e.u, e.v)
        }),
    )
    .expect("subgraph has no self-loops");
    if !validate_decomposition(&support, &decomposition) {
        return Err(fail("bag sequence is not a path decomposition of H0".into()));
    }
    // Width bound 4(β+3).
    if decomposition.width() > 4 * (beta + 3) {
        return Err(fail(format!(
            "width {} exceeds 4(β+3) = {}",
            decomposition.width(),
            4 * (beta + 3)
        )));
    }
    // (c) label-sharing pairs meet in one bag.
    for (pos, &a) in edge_ids.iter().enumerate() {
        for &b in &edge_ids[pos + 1..] {
            if !sorted_intersect(&h.edges()[a].label, &h.edges()[b].label) {
                continue;
            }
            let ea = &h.edges()[a];
            let eb = &h.edges()[b];
            let hit = decomposition.bags().iter().any(|bag| {
                [ea.u, ea.v, eb.u, eb.v]
                    .iter()
                    .all(|v| bag.binary_search(v).is_ok())
            });
            if !hit {
                return Err(fail(format!(
                    "label-sharing edges {a} and {b} never share a bag"
                )));
            }
        }
    }
    // (d) co-occurrence indices form an interval for every edge.
    for &edge in &edge_ids {
        let e = &h.edges()[edge];
        let hits: Vec<usize> = decomposition
            .bags()
            .iter()
            .enumerate()
            .filter(|(_, bag)| {
                bag.binary_search(&e.u).is_ok() && bag.binary_search(&e.v).is_ok()
            })
            .map(|(i, _)| i)
            .collect();
        if hits.is_empty() || hits.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(fail(format!(
                "edge {edge} co-occurrence {hits:?} is not a nonempty interval"
            )));
        }
    }
    Ok(DecomposedSubgraph {
        certificate,
        edge_ids,
        decomposition,
    })
}

/// Random multigraph of minimum degree 3: the union of three uniform
/// perfect matchings plus a few extra random edges, with random labels
/// honoring both γ bounds. `n_vertices` must be even and at least 4.
pub fn gen_multigraph(
    n_vertices: usize,
    gamma: usize,
    seed: u64,
) -> Result<LabeledMultigraph, TreeLemmaError> {
    if gamma < 1 {
        return Err(TreeLemmaError::BadGamma);
    }
    if n_vertices < 4 || n_vertices % 2 != 0 {
        return Err(TreeLemmaError::Parse {
            line: 0,
            message: format!("n_vertices = {n_vertices} must be even and at least 4"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut endpoints: Vec<(usize, usize)> = Vec::new();
    for _ in 0..3 {
        let mut order: Vec<usize> = (0..n_vertices).collect();
        order.shuffle(&mut rng);
        for pair in order.chunks(2) {
            endpoints.push((pair[0], pair[1]));
        }
    }
    for _ in 0..n_vertices / 5 {
        let u = rng.gen_range(0..n_vertices);
        let mut v = rng.gen_range(0..n_vertices);
        while v == u {
            v = rng.gen_range(0..n_vertices);
        }
        endpoints.push((u, v));
    }
    let m = endpoints.len();
    let n_symbols = (m / 2).max(1) as u32;
    let mut remaining: Vec<usize> = vec![gamma; n_symbols as usize];
    let mut edges = Vec::with_capacity(m);
    for (u, v) in endpoints {
        let want = rng.gen_range(0..=gamma);
        let mut label = Vec::new();
        for _ in 0..want {
            let available: Vec<u32> = (1..=n_symbols)
                .filter(|&s| remaining[s as usize - 1] > 0 && !label.contains(&s))
                .collect();
            if available.is_empty() {
                break;
            }
            let symbol = available[rng.gen_range(0..available.len())];
            remaining[symbol as usize - 1] -= 1;
            label.push(symbol);
        }
        edges.push((u, v, label));
    }
    LabeledMultigraph::new(n_vertices, edges, gamma)
}

/// Parses the `p mgraph` text format (1-based vertex ids in the file).
pub fn read_multigraph(text: &str) -> Result<LabeledMultigraph, TreeLemmaError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut edges = Vec::new();
    let mut last_line = 0;
    for (offset, raw) in text.lines().enumerate() {
        let line = offset + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        match tokens.next() {
            Some("p") => {
                if tokens.next() != Some("mgraph") {
                    return Err(TreeLemmaError::Parse {
                        line,
                        message: "expected header `p mgraph <n> <m> <gamma>`".into(),
                    });
                }
                let mut numbers = Vec::new();
                for _ in 0..3 {
                    let token = tokens.next().ok_or_else(|| TreeLemmaError::Parse {
                        line,
                        message: "header needs three numbers".into(),
                    })?;
                    numbers.push(token.parse::<usize>().map_err(|_| TreeLemmaError::Parse {
                        line,
                        message: format!("bad number `{token}`"),
                    })?);
                }
                header = Some((numbers[0], numbers[1], numbers[2]));
            }
            Some("e") => {
                let mut parse_vertex = |name: &str| -> Result<usize, TreeLemmaError> {
                    let token = tokens.next().ok_or_else(|| TreeLemmaError::Parse {
                        line,
                        message: format!("edge line missing {name}"),
                    })?;
                    let value: usize =
                        token.parse().map_err(|_| TreeLemmaError::Parse {
                            line,
                            message: format!("bad vertex id `{token}`"),
                        })?;
                    if value == 0 {
                        return Err(TreeLemmaError::Parse {
                            line,
                            message: "vertex ids are 1-based".into(),
                        });
                    }
                    Ok(value - 1)
                };
                let u = parse_vertex("u")?;
                let v = parse_vertex("v")?;
                let mut label = Vec::new();
                for token in tokens {
                    label.push(token.parse::<u32>().map_err(|_| TreeLemmaError::Parse {
                        line,
                        message: format!("bad symbol `{token}`"),
                    })?);
                }
                edges.push((u, v, label));
            }
            Some(other) => {
                return Err(TreeLemmaError::Parse {
                    line,
                    message: format!("unknown line type `{other}`"),
                });
            }
            None => unreachable!(),
        }
    }
    let (n, m, gamma) = header.ok_or(TreeLemmaError::Parse {
        line: last_line.max(1),
        message: "missing header `p mgraph ...`".into(),
    })?;
    if edges.len() != m {
        return Err(TreeLemmaError::Parse {
            line: last_line.max(1),
            message: format!("header announces {m} edges, found {}", edges.len()),
        });
    }
    LabeledMultigraph::new(n, edges, gamma)
}

pub fn write_multigraph(h: &LabeledMultigraph) -> String {
    let mut out = format!(
        "p mgraph {} {} {}\n",
        h.n_vertices(),
        h.edges().len(),
        h.gamma()
    );
    for e in h.edges() {
        out.push_str(&format!("e {} {}", e.u + 1, e.v + 1));
        for &s in &e.label {
            out.push_str(&format!(" {s}"));
        }
        out.push('\n');
    }
    out
}

/// Parses the tree-certificate format: `p treecert <root> <n_tree_edges>`,
/// one `t <edge-id>` line per tree edge, and `x <e1> <e2>` for the
/// witness edges (vertex and edge ids 1-based in files).
pub fn read_tree_certificate(
    text: &str,
    h: &LabeledMultigraph,
) -> Result<TreeCertificate, TreeLemmaError> {
    let mut root: Option<usize> = None;
    let mut expected_edges: Option<usize> = None;
    let mut tree_edges: Vec<usize> = Vec::new();
    let mut extras: Option<(usize, usize)> = None;
    let mut last_line = 0;
    let parse_id = |token: &str, line: usize, what: &str| -> Result<usize, TreeLemmaError> {
        let value: usize = token.parse().map_err(|_| TreeLemmaError::Parse {
            line,
            message: format!("bad {what} `{token}`"),
        })?;
        if value == 0 {
            return Err(TreeLemmaError::Parse {
                line,
                message: format!("{what} ids are 1-based"),
            });
        }
        Ok(value - 1)
    };
    for (offset, raw) in text.lines().enumerate() {
        let line = offset + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        match tokens.next() {
            Some("p") => {
                if tokens.next() != Some("treecert") {
                    return Err(TreeLemmaError::Parse {
                        line,
                        message: "expected header `p treecert <root> <n_tree_edges>`".into(),
                    });
                }
                let root_token = tokens.next().ok_or_else(|| TreeLemmaError::Parse {
                    line,
                    message: "missing root".into(),
                })?;
                root = Some(parse_id(root_token, line, "vertex")?);
                let count_token = tokens.next().ok_or_else(|| TreeLemmaError::Parse {
                    line,
                    message: "missing tree-edge count".into(),
                })?;
                expected_edges =
                    Some(count_token.parse().map_err(|_| TreeLemmaError::Parse {
                        line,
                        message: format!("bad count `{count_token}`"),
                    })?);
            }
            Some("t") => {
                let token = tokens.next().ok_or_else(|| TreeLemmaError::Parse {
                    line,
                    message: "missing edge id".into(),
                })?;
                tree_edges.push(parse_id(token, line, "edge")?);
            }
            Some("x") => {
                let a = tokens.next().ok_or_else(|| TreeLemmaError::Parse {
                    line,
                    message: "missing first witness edge".into(),
                })?;
                let b = tokens.next().ok_or_else(|| TreeLemmaError::Parse {
                    line,
                    message: "missing second witness edge".into(),
                })?;
                extras = Some((parse_id(a, line, "edge")?, parse_id(b, line, "edge")?));
            }
            Some(other) => {
                return Err(TreeLemmaError::Parse {
                    line,
                    message: format!("unknown line type `{other}`"),
                });
            }
            None => unreachable!(),
        }
    }
    let root = root.ok_or(TreeLemmaError::Parse {
        line: last_line.max(1),
        message: "missing header".into(),
    })?;
    let (e1, e2) = extras.ok_or(TreeLemmaError::Parse {
        line: last_line.max(1),
        message: "missing witness line `x <e1> <e2>`".into(),
    })?;
    if let Some(expected) = expected_edges {
        if tree_edges.len() != expected {
            return Err(TreeLemmaError::Parse {
                line: last_line.max(1),
                message: format!(
                    "header announces {expected} tree edges, found {}",
                    tree_edges.len()
                ),
            });
        }
    }
    let mut vertices: Vec<usize> = vec![root];
    for &edge in &tree_edges {
        let e = h.edges().get(edge).ok_or(TreeLemmaError::Parse {
            line: last_line.max(1),
            message: format!("edge id {} out of range", edge + 1),
        })?;
        vertices.push(e.u);
        vertices.push(e.v);
    }
    Ok(TreeCertificate::from_parts(
        vertices, tree_edges, root, e1, e2,
    ))
}

pub fn write_tree_certificate(cert: &TreeCertificate) -> String {
    let mut out = format!("p treecert {} {}\n", cert.root + 1, cert.tree_edges.len());
    for &edge in &cert.tree_edges {
        out.push_str(&format!("t {}\n", edge + 1));
    }
    out.push_str(&format!(
        "x {} {}\n",
        cert.extra_edges.0 + 1,
        cert.extra_edges.1 + 1
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_values() {
        assert_eq!(beta(1).unwrap(), 7);
        assert_eq!(beta(2).unwrap(), 10);
        assert_eq!(beta(4).unwrap(), 13);
        assert!(beta(0).is_err());
        // Ceiling definition: (3/2)^7 >= 12 > (3/2)^6.
        assert!(3u64.pow(7) >= 12 * 2u64.pow(7));
        assert!(3u64.pow(6) < 12 * 2u64.pow(6));
    }

    #[test]
    fn layer_targets() {
        assert_eq!(layer_target(1), 3);
        assert_eq!(layer_target(2), 4);
        assert_eq!(layer_target(3), 6);
        assert_eq!(layer_target(4), 10);
        assert_eq!(layer_target(5), 15);
    }

    #[test]
    fn corner_case_triple_parallel_edge() {
        let h = LabeledMultigraph::new(
            2,
            vec![(0, 1, vec![]), (0, 1, vec![]), (0, 1, vec![])],
            1,
        )
        .unwrap();
        let cert = find_bounded_tree(&h).unwrap();
        assert_eq!(cert.vertices, vec![0, 1]);
        assert_eq!(cert.tree_edges, vec![0]);
        assert_eq!(cert.extra_edges, (1, 2));
        assert!(verify_tree_certificate(&h, &cert));
    }

    #[test]
    fn corner_case_two_adjacent_parallel_pairs() {
        // u=0, v=1, w=2 with pairs (0,1) and (1,2); edge (0,2) fixes the
        // minimum degree.
        let h = LabeledMultigraph::new(
            3,
            vec![
                (0, 1, vec![]),
                (0, 1, vec![]),
                (1, 2, vec![]),
                (1, 2, vec![]),
                (0, 2, vec![]),
            ],
            1,
        )
        .unwrap();
        let cert = find_bounded_tree(&h).unwrap();
        assert_eq!(cert.vertices, vec![0, 1, 2]);
        assert_eq!(cert.tree_edges, vec![0, 2]);
        assert_eq!(cert.extra_edges, (1, 3));
        assert_eq!(cert.root, 1);
        assert!(verify_tree_certificate(&h, &cert));
    }

    #[test]
    fn corner_case_every_vertex_on_a_parallel_pair() {
        // Pairs (0,1) and (2,3), single edges 0-2, 1-3, 0-3, 1-2: every
        // vertex lies on a parallel pair and no vertex has two partners.
        let h = LabeledMultigraph::new(
            4,
            vec![
                (0, 1, vec![]),
                (0, 1, vec![]),
                (2, 3, vec![]),
                (2, 3, vec![]),
                (0, 2, vec![]),
                (1, 3, vec![]),
                (0, 3, vec![]),
                (1, 2, vec![]),
            ],
            1,
        )
        .unwrap();
        let cert = find_bounded_tree(&h).unwrap();
        assert!(verify_tree_certificate(&h, &cert));
        // The first unparalleled edge is 0-2; its endpoints' pair partners
        // are 1 and 3.
        assert_eq!(cert.vertices, vec![0, 1, 2, 3]);
        assert_eq!(cert.tree_edges, vec![0, 2, 4]);
        assert_eq!(cert.extra_edges, (1, 3));
    }

    #[test]
    fn k4_certificate() {
        let h = LabeledMultigraph::new(
            4,
            vec![
                (0, 1, vec![]),
                (0, 2, vec![]),
                (0, 3, vec![]),
                (1, 2, vec![]),
                (1, 3, vec![]),
                (2, 3, vec![]),
            ],
            1,
        )
        .unwrap();
        let cert = find_bounded_tree(&h).unwrap();
        assert!(verify_tree_certificate(&h, &cert));
        let bound = 4.0 * ((4.0f64).ln() / 1.5f64.ln() + 2.0);
        assert!((cert.vertices.len() as f64) <= bound);
    }

    #[test]
    fn verifier_rejects_five_leaves() {
        // A star with 5 leaves: vertices 0..6, center 0.
        let mut edges: Vec<(usize, usize, Vec<u32>)> =
            (1..=5).map(|v| (0, v, vec![])).collect();
        // Enough extra edges to make the ids meaningful.
        edges.push((1, 2, vec![]));
        edges.push((3, 4, vec![]));
        let h = LabeledMultigraph::new(6, edges, 1).unwrap();
        let cert = TreeCertificate::from_parts(0..=5, 0..5, 0, 5, 6);
        assert!(!verify_tree_certificate(&h, &cert));
    }

    #[test]
    fn verifier_rejects_label_sharing_edges_too_far_apart() {
        // A path of length 9 rooted at 0; edges 0 and 8 share symbol 1 and
        // sit beta+1 = 8 levels apart.
        let mut edges: Vec<(usize, usize, Vec<u32>)> =
            (0..9).map(|i| (i, i + 1, vec![])).collect();
        edges[0].2 = vec![1];
        edges[8].2 = vec![1];
        // Two parallel copies of the first edge so extras exist.
        edges.push((0, 1, vec![]));
        edges.push((0, 1, vec![]));
        let h = LabeledMultigraph::new(10, edges, 2).unwrap();
        let cert = TreeCertificate::from_parts(0..=9, 0..9, 0, 9, 10);
        // beta(2) = 10 > 8: accepted.
        assert!(verify_tree_certificate(&h, &cert));
        // A longer path with the shared symbol beta(2)+1 = 11 levels
        // apart must fail. (With gamma = 1 no symbol may repeat at all,
        // so the counterexample needs gamma = 2.)
        let mut edges: Vec<(usize, usize, Vec<u32>)> =
            (0..12).map(|i| (i, i + 1, vec![])).collect();
        edges[0].2 = vec![1];
        edges[11].2 = vec![1];
        edges.push((0, 1, vec![]));
        edges.push((0, 1, vec![]));
        let h = LabeledMultigraph::new(13, edges, 2).unwrap();
        let cert = TreeCertificate::from_parts(0..=12, 0..12, 0, 12, 13);
        assert!(!verify_tree_certificate(&h, &cert));
    }

    #[test]
    fn decomposition_of_triple_parallel_edge() {
        let h = LabeledMultigraph::new(
            2,
            vec![(0, 1, vec![]), (0, 1, vec![]), (0, 1, vec![])],
            1,
        )
        .unwrap();
        let out = build_decomposed_subgraph(&h).unwrap();
        assert_eq!(out.edge_ids, vec![0, 1, 2]);
        assert_eq!(out.decomposition.bags(), &[vec![0, 1]]);
        assert_eq!(out.decomposition.width(), 1);
    }

    #[test]
    fn decomposition_of_k4() {
        let h = LabeledMultigraph::new(
            4,
            vec![
                (0, 1, vec![]),
                (0, 2, vec![]),
                (0, 3, vec![]),
                (1, 2, vec![]),
                (1, 3, vec![]),
                (2, 3, vec![]),
            ],
            1,
        )
        .unwrap();
        let out = build_decomposed_subgraph(&h).unwrap();
        assert_eq!(
            out.edge_ids.len(),
            out.certificate.vertices.len() + 1
        );
    }

    #[test]
    fn random_multigraphs_yield_valid_certificates() {
        for (seed, n, gamma) in [(1u64, 10usize, 1usize), (2, 30, 2), (3, 100, 4), (4, 60, 2)] {
            let h = gen_multigraph(n, gamma, seed).unwrap();
            let cert = find_bounded_tree(&h).unwrap();
            assert!(verify_tree_certificate(&h, &cert), "seed {seed}");
            let out = build_decomposed_subgraph(&h).unwrap();
            let b = beta(gamma).unwrap() as usize;
            assert!(out.decomposition.width() <= 4 * (b + 3));
        }
    }

    #[test]
    fn certificate_roundtrips_through_text() {
        let h = gen_multigraph(30, 2, 5).unwrap();
        let text = write_multigraph(&h);
        let h2 = read_multigraph(&text).unwrap();
        assert_eq!(h, h2);
        let cert = find_bounded_tree(&h).unwrap();
        let cert_text = write_tree_certificate(&cert);
        let cert2 = read_tree_certificate(&cert_text, &h2).unwrap();
        assert_eq!(cert, cert2);
        assert!(verify_tree_certificate(&h2, &cert2));
    }

    #[test]
    fn degree_validation() {
        let h = LabeledMultigraph::new(3, vec![(0, 1, vec![]), (1, 2, vec![])], 1).unwrap();
        assert!(matches!(
            find_bounded_tree(&h),
            Err(TreeLemmaError::DegreeTooSmall { .. })
        ));
    }

    #[test]
    fn label_validation() {
        assert!(matches!(
            LabeledMultigraph::new(2, vec![(0, 1, vec![1, 2])], 1),
            Err(TreeLemmaError::LabelTooLarge { .. })
        ));
        assert!(matches!(
            LabeledMultigraph::new(
                3,
                vec![(0, 1, vec![7]), (1, 2, vec![7]), (0, 2, vec![7])],
                2
            ),
            Err(TreeLemmaError::SymbolOverused { symbol: 7, .. })
        ));
        assert!(matches!(
            LabeledMultigraph::new(2, vec![(0, 0, vec![])], 1),
            Err(TreeLemmaError::SelfLoop { .. })
        ));
    }
}
