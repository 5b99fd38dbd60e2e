//! Reduction from Multicolored Clique to 3-Set Packing with a planted
//! near-perfect packing, usable as an instance generator for local-search
//! hardness experiments.
//!
//! The construction emits, for a colored graph on n vertices with k color
//! classes (k raised to a power of 4 by adding universal vertices), a
//! 3-uniform family over `(2k-1)(n+1) + 2n + C(k,2) + 2k` elements plus a
//! disjoint subfamily `f0` of size `|U|/3 - 1` that leaves exactly three
//! elements uncovered. A perfect packing (size `|U|/3`) exists iff the
//! graph has a multicolored k-clique: [`witness_packing`] builds the
//! packing from a clique (within O(k²) symmetric difference of `f0`), and
//! [`extract_clique`] recovers the clique from any perfect packing.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

use crate::core::{CoreError, Packing, SetFamily};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HardnessError {
    #[error("vertex {vertex} has color {color}, outside [0, {k})")]
    BadColor {
        vertex: usize,
        color: usize,
        k: usize,
    },
    #[error("edge ({u}, {v}) is invalid: {reason}")]
    BadEdge { u: usize, v: usize, reason: String },
    #[error("k must be at least 1")]
    BadK,
    #[error("h must be at least 1")]
    BadH,
    #[error("not a multicolored clique: {reason}")]
    NotClique { reason: String },
    #[error("packing of size {size} is not perfect (|U|/3 = {required})")]
    NotPerfect { size: usize, required: usize },
    #[error("reduction self-check failed: {reason}")]
    Internal { reason: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// A Multicolored Clique instance: does the graph contain a k-clique with
/// one vertex of each color? Vertices are `0..n`, colors `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulticoloredCliqueInstance {
    n: usize,
    k: usize,
    colors: Vec<usize>,
    edges: BTreeSet<(usize, usize)>,
}

impl MulticoloredCliqueInstance {
    pub fn new(
        n: usize,
        k: usize,
        colors: Vec<usize>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, HardnessError> {
        if k < 1 {
            return Err(HardnessError::BadK);
        }
        if colors.len() != n {
            return Err(HardnessError::Internal {
                reason: format!("{} colors for {n} vertices", colors.len()),
            });
        }
        for (vertex, &color) in colors.iter().enumerate() {
            if color >= k {
                return Err(HardnessError::BadColor { vertex, color, k });
            }
        }
        let mut normalized = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(HardnessError::BadEdge {
                    u,
                    v,
                    reason: "self-loop".into(),
                });
            }
            if u >= n || v >= n {
                return Err(HardnessError::BadEdge {
                    u,
                    v,
                    reason: format!("vertex outside [0, {n})"),
                });
            }
            normalized.insert((u.min(v), u.max(v)));
        }
        Ok(MulticoloredCliqueInstance {
            n,
            k,
            colors,
            edges: normalized,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn color(&self, v: usize) -> usize {
        self.colors[v]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// Verifies that `candidate` is a multicolored k-clique.
    pub fn check_multicolored_clique(&self, candidate: &[usize]) -> Result<(), HardnessError> {
        if candidate.len() != self.k {
            return Err(HardnessError::NotClique {
                reason: format!("{} vertices, need {}", candidate.len(), self.k),
            });
        }
        let mut seen_colors = BTreeSet::new();
        for &v in candidate {
            if v >= self.n {
                return Err(HardnessError::NotClique {
                    reason: format!("vertex {v} out of range"),
                });
            }
            if !seen_colors.insert(self.colors[v]) {
                return Err(HardnessError::NotClique {
                    reason: format!("color {} repeated", self.colors[v]),
                });
            }
        }
        for (pos, &u) in candidate.iter().enumerate() {
            for &v in &candidate[pos + 1..] {
                if !self.has_edge(u, v) {
                    return Err(HardnessError::NotClique {
                        reason: format!("vertices {u} and {v} are not adjacent"),
                    });
                }
            }
        }
        Ok(())
    }

    /// All multicolored k-cliques, by brute force over one vertex per
    /// color class. `cap` bounds the number of candidate tuples explored.
    pub fn brute_force_cliques(&self, cap: usize) -> Result<Vec<Vec<usize>>, HardnessError> {
        let mut classes: Vec<Vec<usize>> = vec![Vec::new(); self.k];
        for v in 0..self.n {
            classes[self.colors[v]].push(v);
        }
        let mut product: usize = 1;
        for class in &classes {
            product = product.saturating_mul(class.len().max(1));
        }
        if product > cap {
            return Err(HardnessError::Internal {
                reason: format!("{product} candidate tuples exceed the cap {cap}"),
            });
        }
        let mut results = Vec::new();
        let mut current: Vec<usize> = Vec::new();
        fn recurse(
            classes: &[Vec<usize>],
            instance: &MulticoloredCliqueInstance,
            current: &mut Vec<usize>,
            results: &mut Vec<Vec<usize>>,
        ) {
            let depth = current.len();
            if depth == classes.len() {
                let mut clique = current.clone();
                clique.sort_unstable();
                results.push(clique);
                return;
            }
            for &v in &classes[depth] {
                if current.iter().all(|&u| instance.has_edge(u, v)) {
                    current.push(v);
                    recurse(classes, instance, current, results);
                    current.pop();
                }
            }
        }
        recurse(&classes, self, &mut current, &mut results);
        results.sort();
        Ok(results)
    }

    /// Raises k to the next power of four by adding one universal vertex
    /// per new color; multicolored cliques correspond one-to-one (padding
    /// vertices are always part of a padded clique).
    pub fn pad_to_power_of_four(&self) -> MulticoloredCliqueInstance {
        let mut target = 4usize;
        while target < self.k {
            target *= 4;
        }
        if target == self.k {
            return self.clone();
        }
        let added = target - self.k;
        let n = self.n + added;
        let mut colors = self.colors.clone();
        colors.extend(self.k..target);
        let mut edges = self.edges.clone();
        for new in self.n..n {
            for other in 0..n {
                if other != new {
                    edges.insert((new.min(other), new.max(other)));
                }
            }
        }
        MulticoloredCliqueInstance {
            n,
            k: target,
            colors,
            edges,
        }
    }
}

/// An (x, h)-amplifier: element names `x_1 .. x_{2·4^h-1}` under `prefix`
/// and the triples `{x_i, x_{2i}, x_{2i+1}}` for `1 ≤ i < 4^h` as 1-based
/// local element indices.
pub fn make_amplifier(
    prefix: &str,
    h: u32,
) -> Result<(Vec<String>, Vec<[usize; 3]>), HardnessError> {
    if h < 1 {
        return Err(HardnessError::BadH);
    }
    let k = 4usize.pow(h);
    let n_elements = 2 * k - 1;
    let elements = (1..=n_elements).map(|i| format!("{prefix}_{i}")).collect();
    let sets = (1..k).map(|i| [i, 2 * i, 2 * i + 1]).collect();
    Ok((elements, sets))
}

fn floor_log2(i: usize) -> u32 {
    usize::BITS - 1 - i.leading_zeros()
}

/// The reduced 3-Set Packing instance with its planted near-perfect
/// packing and all bookkeeping needed by the witness and extraction
/// procedures.
#[derive(Debug, Clone)]
pub struct ReductionOutput {
    pub family: SetFamily,
    pub f0: Packing,
    /// Symbolic name per element, indexed by element id - 1.
    name_map: Vec<String>,
    padded: MulticoloredCliqueInstance,
    original_n: usize,
    /// Per padded vertex: family index of the amplifier root set
    /// {v_1, v_2, v_3}.
    root_set_index: Vec<usize>,
    top_even_sets: Vec<usize>,
    vertex_even_sets: Vec<Vec<usize>>,
    vertex_odd_sets: Vec<Vec<usize>>,
    /// Family index of {v_1, v', v''} per vertex (group i).
    group1_index: Vec<usize>,
    /// Family index of {x_{k+c(v)}, v', v''} per vertex (group ii).
    group2_index: Vec<usize>,
    /// Family index of the edge set per normalized edge (group iii).
    group3_index: BTreeMap<(usize, usize), usize>,
    /// Family index of {v_{k+c(v)}, l-pair} per vertex (group iv).
    group4_index: Vec<usize>,
}

impl ReductionOutput {
    pub fn padded_instance(&self) -> &MulticoloredCliqueInstance {
        &self.padded
    }

    pub fn original_n(&self) -> usize {
        self.original_n
    }

    pub fn is_padding_vertex(&self, v: usize) -> bool {
        v >= self.original_n
    }

    pub fn element_name(&self, id: u32) -> &str {
        &self.name_map[id as usize - 1]
    }

    /// Text sidecar mapping element ids to symbolic names.
    pub fn write_name_map(&self) -> String {
        let mut out = String::new();
        for (index, name) in self.name_map.iter().enumerate() {
            out.push_str(&format!("element {} {}\n", index + 1, name));
        }
        out
    }
}

/// Builds the reduction. If k is not a power of four the instance is
/// padded first; all structural invariants are re-checked before
/// returning.
pub fn reduce_mcc(
    instance: &MulticoloredCliqueInstance,
) -> Result<ReductionOutput, HardnessError> {
    let original_n = instance.n;
    let padded = instance.pad_to_power_of_four();
    let k = padded.k;
    let n = padded.n;
    let amp = 2 * k - 1;
    let pairs = k * (k - 1) / 2;
    // Divisibility facts behind the layout.
    if (2 * k) % 3 != 2 || pairs % 3 != 0 {
        return Err(HardnessError::Internal {
            reason: format!("divisibility failure at k = {k}"),
        });
    }
    let n_elements = amp * (n + 1) + 2 * n + pairs + 2 * k;
    if n_elements % 3 != 0 {
        return Err(HardnessError::Internal {
            reason: format!("|U| = {n_elements} not divisible by 3"),
        });
    }

    // Element ids, 1-based, in layout order.
    let top_id = |t: usize| -> u32 { t as u32 };
    let vertex_id = |v: usize, t: usize| -> u32 { (amp * (v + 1) + t) as u32 };
    let pair_base = amp * (n + 1);
    let prime_id = |v: usize| -> u32 { (pair_base + 2 * v + 1) as u32 };
    let doubleprime_id = |v: usize| -> u32 { (pair_base + 2 * v + 2) as u32 };
    let s_base = pair_base + 2 * n;
    let mut s_id: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    {
        let mut next = s_base as u32 + 1;
        for i in 0..k {
            for j in i + 1..k {
                s_id.insert((i, j), next);
                next += 1;
            }
        }
    }
    let l_base = s_base + pairs;
    let l_id = |t: usize| -> u32 { (l_base + t) as u32 };

    let mut name_map = vec![String::new(); n_elements];
    let mut name = |id: u32, text: String| {
        name_map[id as usize - 1] = text;
    };
    for t in 1..=amp {
        name(top_id(t), format!("x_{t}"));
    }
    for v in 0..n {
        for t in 1..=amp {
            name(vertex_id(v, t), format!("v{}_{t}", v + 1));
        }
        name(prime_id(v), format!("v{}'", v + 1));
        name(doubleprime_id(v), format!("v{}''", v + 1));
    }
    for (&(i, j), &id) in &s_id {
        name(id, format!("s_({i},{j})"));
    }
    for t in 1..=2 * k {
        name(l_id(t), format!("l_{t}"));
    }

    let mut sets: Vec<Vec<u32>> = Vec::new();
    let mut f0_indices: Vec<usize> = Vec::new();
    let push = |sets: &mut Vec<Vec<u32>>, set: Vec<u32>| -> usize {
        sets.push(set);
        sets.len() - 1
    };

    // Top amplifier.
    let mut top_even_sets = Vec::new();
    for i in 1..k {
        let index = push(
            &mut sets,
            vec![top_id(i), top_id(2 * i), top_id(2 * i + 1)],
        );
        if floor_log2(i) % 2 == 1 {
            f0_indices.push(index);
        } else {
            top_even_sets.push(index);
        }
    }
    // Vertex amplifiers.
    let mut vertex_even_sets = vec![Vec::new(); n];
    let mut vertex_odd_sets = vec![Vec::new(); n];
    let mut root_set_index = vec![usize::MAX; n];
    for v in 0..n {
        for i in 1..k {
            let index = push(
                &mut sets,
                vec![
                    vertex_id(v, i),
                    vertex_id(v, 2 * i),
                    vertex_id(v, 2 * i + 1),
                ],
            );
            if i == 1 {
                root_set_index[v] = index;
            }
            if floor_log2(i) % 2 == 1 {
                f0_indices.push(index);
                vertex_odd_sets[v].push(index);
            } else {
                vertex_even_sets[v].push(index);
            }
        }
    }
    // (i) {v_1, v', v''}.
    let mut group1_index = vec![usize::MAX; n];
    for v in 0..n {
        let index = push(
            &mut sets,
            vec![vertex_id(v, 1), prime_id(v), doubleprime_id(v)],
        );
        group1_index[v] = index;
        f0_indices.push(index);
    }
    // (ii) {x_{k+c(v)}, v', v''}, grouped by color.
    let mut group2_index = vec![usize::MAX; n];
    for color in 0..k {
        for v in 0..n {
            if padded.colors[v] == color {
                let index = push(
                    &mut sets,
                    vec![top_id(k + color), prime_id(v), doubleprime_id(v)],
                );
                group2_index[v] = index;
            }
        }
    }
    // (iii) {u_{k+c(v)}, v_{k+c(u)}, s_(c(u),c(v))} for inter-color edges.
    let mut group3_index = BTreeMap::new();
    for &(a, b) in &padded.edges {
        let (ca, cb) = (padded.colors[a], padded.colors[b]);
        if ca == cb {
            continue;
        }
        let (u, v) = if ca < cb { (a, b) } else { (b, a) };
        let (cu, cv) = (padded.colors[u], padded.colors[v]);
        let index = push(
            &mut sets,
            vec![vertex_id(u, k + cv), vertex_id(v, k + cu), s_id[&(cu, cv)]],
        );
        group3_index.insert((a.min(b), a.max(b)), index);
    }
    // (iv) {v_{k+c(v)}, l_{2c(v)+1}, l_{2c(v)+2}}.
    let mut group4_index = vec![usize::MAX; n];
    for v in 0..n {
        let c = padded.colors[v];
        let index = push(
            &mut sets,
            vec![vertex_id(v, k + c), l_id(2 * c + 1), l_id(2 * c + 2)],
        );
        group4_index[v] = index;
    }
    // (v) l-triples.
    for i in 1..=(2 * k - 2) / 3 {
        let index = push(
            &mut sets,
            vec![l_id(3 * i - 2), l_id(3 * i - 1), l_id(3 * i)],
        );
        f0_indices.push(index);
    }
    // (vi) s-triples in lexicographic pair order.
    let s_ids_in_order: Vec<u32> = s_id.values().copied().collect();
    for triple in s_ids_in_order.chunks(3) {
        let index = push(&mut sets, triple.to_vec());
        f0_indices.push(index);
    }

    let family = SetFamily::new(n_elements, 3, sets)?;
    let f0 = Packing::new(&family, f0_indices)?;

    // Invariants: |f0| = |U|/3 - 1 and the uncovered elements are exactly
    // x_1, l_{2k-1}, l_{2k}.
    if f0.len() != n_elements / 3 - 1 {
        return Err(HardnessError::Internal {
            reason: format!("|f0| = {} but |U|/3 - 1 = {}", f0.len(), n_elements / 3 - 1),
        });
    }
    let mut covered = vec![false; n_elements];
    for &index in f0.members() {
        for &e in family.set(index) {
            covered[e as usize - 1] = true;
        }
    }
    let uncovered: Vec<u32> = (1..=n_elements as u32)
        .filter(|&e| !covered[e as usize - 1])
        .collect();
    let expected = vec![top_id(1), l_id(2 * k - 1), l_id(2 * k)];
    if uncovered != expected {
        return Err(HardnessError::Internal {
            reason: format!("uncovered elements {uncovered:?}, expected {expected:?}"),
        });
    }

    Ok(ReductionOutput {
        family,
        f0,
        name_map,
        padded,
        original_n,
        root_set_index,
        top_even_sets,
        vertex_even_sets,
        vertex_odd_sets,
        group1_index,
        group2_index,
        group3_index,
        group4_index,
    })
}

/// Builds the perfect packing corresponding to a multicolored clique `K`
/// of the padded instance. Its size is `|U|/3` and its symmetric
/// difference with `f0` is O(k²).
pub fn witness_packing(
    output: &ReductionOutput,
    clique: &[usize],
) -> Result<Packing, HardnessError> {
    output.padded.check_multicolored_clique(clique)?;
    let k = output.padded.k;
    let in_clique: HashSet<usize> = clique.iter().copied().collect();
    let mut members: Vec<usize> = Vec::new();
    members.extend_from_slice(&output.top_even_sets);
    for v in 0..output.padded.n {
        if in_clique.contains(&v) {
            members.extend_from_slice(&output.vertex_even_sets[v]);
            members.push(output.group2_index[v]);
            members.push(output.group4_index[v]);
        } else {
            members.extend_from_slice(&output.vertex_odd_sets[v]);
            members.push(output.group1_index[v]);
        }
    }
    for (pos, &u) in clique.iter().enumerate() {
        for &v in &clique[pos + 1..] {
            let key = (u.min(v), u.max(v));
            let index =
                output
                    .group3_index
                    .get(&key)
                    .copied()
                    .ok_or(HardnessError::Internal {
                        reason: format!("clique edge {key:?} has no reduction set"),
                    })?;
            members.push(index);
        }
    }
    let _ = k;
    let packing = Packing::new(&output.family, members)?;
    let required = output.family.n_elements() / 3;
    if packing.len() != required {
        return Err(HardnessError::Internal {
            reason: format!("witness has size {}, expected {required}", packing.len()),
        });
    }
    Ok(packing)
}

/// Number of sets in exactly one of the two packings.
pub fn symmetric_difference_size(a: &Packing, b: &Packing) -> usize {
    let sa: HashSet<usize> = a.members().iter().copied().collect();
    let sb: HashSet<usize> = b.members().iter().copied().collect();
    sa.symmetric_difference(&sb).count()
}

/// Recovers the multicolored clique from a perfect packing: the vertices
/// whose amplifier root set {v_1, v_2, v_3} is in the packing. The result
/// is verified to be a multicolored k-clique of the padded instance.
pub fn extract_clique(
    output: &ReductionOutput,
    packing: &Packing,
) -> Result<Vec<usize>, HardnessError> {
    let required = output.family.n_elements() / 3;
    if packing.len() != required {
        return Err(HardnessError::NotPerfect {
            size: packing.len(),
            required,
        });
    }
    let members: HashSet<usize> = packing.members().iter().copied().collect();
    let clique: Vec<usize> = (0..output.padded.n)
        .filter(|&v| members.contains(&output.root_set_index[v]))
        .collect();
    output.padded.check_multicolored_clique(&clique)?;
    Ok(clique)
}

/// Parses the colored-graph format: `p mcc <n> <m> <k>`, one
/// `v <id> <color>` line per vertex, one `e <u> <v>` line per edge
/// (vertex ids 1-based, colors 0-based).
pub fn read_mcc(text: &str) -> Result<MulticoloredCliqueInstance, HardnessError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut colors: BTreeMap<usize, usize> = BTreeMap::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut seen_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut last_line = 0;
    for (offset, raw) in text.lines().enumerate() {
        let line = offset + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let parse_usize = |token: Option<&str>, what: &str| -> Result<usize, HardnessError> {
            let token = token.ok_or_else(|| HardnessError::Parse {
                line,
                message: format!("missing {what}"),
            })?;
            token.parse().map_err(|_| HardnessError::Parse {
                line,
                message: format!("bad {what} `{token}`"),
            })
        };
        match tokens.next() {
            Some("p") => {
                if tokens.next() != Some("mcc") {
                    return Err(HardnessError::Parse {
                        line,
                        message: "expected header `p mcc <n> <m> <k>`".into(),
                    });
                }
                let n = parse_usize(tokens.next(), "n")?;
                let m = parse_usize(tokens.next(), "m")?;
                let k = parse_usize(tokens.next(), "k")?;
                header = Some((n, m, k));
            }
            Some("v") => {
                let id = parse_usize(tokens.next(), "vertex id")?;
                let color = parse_usize(tokens.next(), "color")?;
                if id == 0 {
                    return Err(HardnessError::Parse {
                        line,
                        message: "vertex ids are 1-based".into(),
                    });
                }
                if colors.insert(id - 1, color).is_some() {
                    return Err(HardnessError::Parse {
                        line,
                        message: format!("vertex {id} colored twice"),
                    });
                }
            }
            Some("e") => {
                let u = parse_usize(tokens.next(), "u")?;
                let v = parse_usize(tokens.next(), "v")?;
                if u == 0 || v == 0 {
                    return Err(HardnessError::Parse {
                        line,
                        message: "vertex ids are 1-based".into(),
                    });
                }
                if u == v {
                    return Err(HardnessError::Parse {
                        line,
                        message: "self-loop".into(),
                    });
                }
                let key = ((u - 1).min(v - 1), (u - 1).max(v - 1));
                if !seen_edges.insert(key) {
                    return Err(HardnessError::Parse {
                        line,
                        message: format!("duplicate edge ({u}, {v})"),
                    });
                }
                edges.push(key);
            }
            Some(other) => {
                return Err(HardnessError::Parse {
                    line,
                    message: format!("unknown line type `{other}`"),
                });
            }
            None => unreachable!(),
        }
    }
    let (n, m, k) = header.ok_or(HardnessError::Parse {
        line: last_line.max(1),
        message: "missing header `p mcc ...`".into(),
    })?;
    if edges.len() != m {
        return Err(HardnessError::Parse {
            line: last_line.max(1),
            message: format!("header announces {m} edges, found {}", edges.len()),
        });
    }
    let mut color_vec = Vec::with_capacity(n);
    for v in 0..n {
        match colors.get(&v) {
            Some(&c) => color_vec.push(c),
            None => {
                return Err(HardnessError::Parse {
                    line: last_line.max(1),
                    message: format!("vertex {} has no color line", v + 1),
                })
            }
        }
    }
    MulticoloredCliqueInstance::new(n, k, color_vec, edges)
}

pub fn write_mcc(instance: &MulticoloredCliqueInstance) -> String {
    let mut out = format!(
        "p mcc {} {} {}\n",
        instance.n,
        instance.edges.len(),
        instance.k
    );
    for v in 0..instance.n {
        out.push_str(&format!("v {} {}\n", v + 1, instance.colors[v]));
    }
    for &(u, v) in &instance.edges {
        out.push_str(&format!("e {} {}\n", u + 1, v + 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::exact_max_packing;

    fn k4_instance() -> MulticoloredCliqueInstance {
        MulticoloredCliqueInstance::new(
            4,
            4,
            vec![0, 1, 2, 3],
            [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        )
        .unwrap()
    }

    #[test]
    fn amplifier_h1() {
        let (elements, sets) = make_amplifier("x", 1).unwrap();
        assert_eq!(elements.len(), 7);
        assert_eq!(elements[0], "x_1");
        assert_eq!(sets, vec![[1, 2, 3], [2, 4, 5], [3, 6, 7]]);
    }

    #[test]
    fn amplifier_h2() {
        let (elements, sets) = make_amplifier("x", 2).unwrap();
        assert_eq!(elements.len(), 31);
        assert_eq!(sets.len(), 15);
        assert!(make_amplifier("x", 0).is_err());
    }

    #[test]
    fn reduce_k4_counts() {
        let output = reduce_mcc(&k4_instance()).unwrap();
        assert_eq!(output.family.n_elements(), 57);
        assert_eq!(output.family.n_sets(), 37);
        assert_eq!(output.f0.len(), 18);
        // Uncovered elements are x_1, l_7, l_8.
        let mut covered = vec![false; 57];
        for &index in output.f0.members() {
            for &e in output.family.set(index) {
                covered[e as usize - 1] = true;
            }
        }
        let uncovered: Vec<String> = (1..=57u32)
            .filter(|&e| !covered[e as usize - 1])
            .map(|e| output.element_name(e).to_string())
            .collect();
        assert_eq!(uncovered, vec!["x_1", "l_7", "l_8"]);
    }

    #[test]
    fn reduce_k4_minus_edge() {
        // Remove the edge between colors 0 and 1.
        let instance = MulticoloredCliqueInstance::new(
            4,
            4,
            vec![0, 1, 2, 3],
            [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        )
        .unwrap();
        let output = reduce_mcc(&instance).unwrap();
        assert_eq!(output.family.n_sets(), 36);
        assert_eq!(output.f0.len(), 18);
        // No multicolored clique, so no perfect packing: the optimum is 18.
        let exact = exact_max_packing(&output.family, None).unwrap();
        assert_eq!(exact.len(), 18);
    }

    #[test]
    fn witness_is_perfect_and_close_to_f0() {
        let output = reduce_mcc(&k4_instance()).unwrap();
        let witness = witness_packing(&output, &[0, 1, 2, 3]).unwrap();
        assert_eq!(witness.len(), 19);
        // Perfect cover.
        let mut covered = vec![false; 57];
        for &index in witness.members() {
            for &e in output.family.set(index) {
                covered[e as usize - 1] = true;
            }
        }
        assert!(covered.iter().all(|&c| c));
        // All of V is in the clique, so F1 and F0 are disjoint here.
        assert_eq!(symmetric_difference_size(&witness, &output.f0), 37);
        let k = output.padded_instance().k();
        assert!(symmetric_difference_size(&witness, &output.f0) <= 4 * k * k + 8 * k);
        // The top-amplifier root set {x_1, x_2, x_3} is set index 0.
        assert!(witness.contains(0));
        assert_eq!(output.family.set(0), &[1, 2, 3]);
    }

    #[test]
    fn witness_rejects_non_cliques() {
        let instance = MulticoloredCliqueInstance::new(
            4,
            4,
            vec![0, 1, 2, 3],
            [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        )
        .unwrap();
        let output = reduce_mcc(&instance).unwrap();
        assert!(matches!(
            witness_packing(&output, &[0, 1, 2, 3]),
            Err(HardnessError::NotClique { .. })
        ));
    }

    #[test]
    fn extraction_roundtrip() {
        let output = reduce_mcc(&k4_instance()).unwrap();
        let witness = witness_packing(&output, &[0, 1, 2, 3]).unwrap();
        assert_eq!(extract_clique(&output, &witness).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn extraction_from_exact_solution() {
        let output = reduce_mcc(&k4_instance()).unwrap();
        let exact = exact_max_packing(&output.family, None).unwrap();
        assert_eq!(exact.len(), 19);
        let clique = extract_clique(&output, &exact).unwrap();
        assert_eq!(clique, vec![0, 1, 2, 3]);
    }

    #[test]
    fn extraction_rejects_imperfect_packings() {
        let output = reduce_mcc(&k4_instance()).unwrap();
        assert!(matches!(
            extract_clique(&output, &output.f0),
            Err(HardnessError::NotPerfect {
                size: 18,
                required: 19
            })
        ));
    }

    #[test]
    fn universe_size_formula() {
        for (n_extra, expected_n) in [(0usize, 4usize), (2, 6)] {
            let n = 4 + n_extra;
            let colors: Vec<usize> = (0..n).map(|v| v % 4).collect();
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    edges.push((u, v));
                }
            }
            let instance = MulticoloredCliqueInstance::new(n, 4, colors, edges).unwrap();
            let output = reduce_mcc(&instance).unwrap();
            let k = 4;
            let amp = 2 * k - 1;
            assert_eq!(
                output.family.n_elements(),
                amp * (expected_n + 1) + 2 * expected_n + k * (k - 1) / 2 + 2 * k
            );
        }
    }

    #[test]
    fn padding_preserves_clique_existence() {
        // A multicolored triangle with k = 3 pads to k = 4.
        let triangle =
            MulticoloredCliqueInstance::new(3, 3, vec![0, 1, 2], [(0, 1), (0, 2), (1, 2)])
                .unwrap();
        let output = reduce_mcc(&triangle).unwrap();
        assert_eq!(output.padded_instance().k(), 4);
        assert_eq!(output.padded_instance().n_vertices(), 4);
        assert!(output.is_padding_vertex(3));
        let exact = exact_max_packing(&output.family, None).unwrap();
        assert_eq!(exact.len(), output.family.n_elements() / 3);
        let clique = extract_clique(&output, &exact).unwrap();
        assert_eq!(clique, vec![0, 1, 2, 3]);

        // A path has no triangle: padded instance has no multicolored
        // 4-clique either, so no perfect packing.
        let path = MulticoloredCliqueInstance::new(3, 3, vec![0, 1, 2], [(0, 1), (1, 2)]).unwrap();
        let output = reduce_mcc(&path).unwrap();
        let exact = exact_max_packing(&output.family, None).unwrap();
        assert!(exact.len() < output.family.n_elements() / 3);
    }

    #[test]
    fn divisibility_facts() {
        for h in 1..=2u32 {
            let k = 4usize.pow(h);
            assert_eq!((2 * k) % 3, 2);
            assert_eq!((k * (k - 1) / 2) % 3, 0);
        }
    }

    #[test]
    fn mcc_io_roundtrip_and_errors() {
        let instance = k4_instance();
        let text = write_mcc(&instance);
        assert_eq!(read_mcc(&text).unwrap(), instance);

        let err = read_mcc("p mcc 2 1 2\nv 1 0\nv 2 1\ne 1 1\n").unwrap_err();
        assert!(matches!(err, HardnessError::Parse { line: 4, .. }));

        let err = read_mcc("p mcc 2 1 2\nv 1 0\ne 1 2\n").unwrap_err();
        assert!(err.to_string().contains("no color"), "{err}");

        let err = read_mcc("p mcc 2 2 2\nv 1 0\nv 2 1\ne 1 2\ne 2 1\n").unwrap_err();
        assert!(err.to_string().contains("duplicate edge"), "{err}");
    }

    #[test]
    fn brute_force_cliques_on_k4() {
        let cliques = k4_instance().brute_force_cliques(10_000).unwrap();
        assert_eq!(cliques, vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn name_map_is_complete() {
        let output = reduce_mcc(&k4_instance()).unwrap();
        let text = output.write_name_map();
        assert_eq!(text.lines().count(), 57);
        assert!(text.contains("element 1 x_1"));
        assert!(text.contains("s_(0,1)"));
    }
}
