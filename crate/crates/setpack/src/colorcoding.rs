//! Color-coding search for improving sets of bounded pathwidth.
//!
//! Given colorings `c_F0 : F0 → [r-1]` and `c_U : U → [rk]`, the search
//! explores an implicit digraph whose vertices are states
//! `(C_F0, C_U, B)`: the set of member colors used so far, the set of
//! element colors used so far, and the current bag of at most `pw + 1`
//! sets. Introduce arcs add a set to the bag (claiming its colors), forget
//! arcs drop a set whose neighborhood is fully accounted for, and any
//! state with an empty bag and `|C_F0| < |C_U| / k` yields an improving
//! set, reconstructed from the recorded arcs together with a width-≤pw
//! path decomposition of `N[X]`.
//!
//! The search is one-sided: whatever it returns is re-verified against the
//! improving-set definition before being handed back, while a `None` only
//! certifies absence under the supplied colorings. The randomized driver
//! [`find_improving_set`] repeats the search over independently seeded
//! uniform colorings often enough to reach a configurable failure
//! probability.

use std::collections::BTreeMap;
use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{
    build_conflict_graph, is_improving_set, CoreError, ImprovingSet, Packing, SetFamily,
};
use crate::pathdecomp::{swap_subgraph, validate_decomposition, PathDecomposition};

/// Color-domain cap: both bit sets live in a `u128`.
pub const MAX_COLOR_DOMAIN: usize = 128;

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("family is not k-uniform: set {index} has {size} elements, expected {k}")]
    NotUniform { index: usize, size: usize, k: usize },
    #[error("coloring is not total: {reason}")]
    PartialColoring { reason: String },
    #[error("color {color} outside range [1, {limit}]")]
    ColorOutOfRange { color: u32, limit: usize },
    #[error("color domain too large: need {needed} colors, supported maximum is {max}")]
    DomainTooLarge { needed: usize, max: usize },
    #[error("invalid search parameters: {reason}")]
    InvalidParams { reason: String },
    #[error("r = {r} < 2: use the direct size-1 scan instead of coloring trials")]
    UseDirectScan { r: usize },
    #[error("trial count overflows: e^{exponent} ln(1/delta) exceeds u64")]
    TrialCountOverflow { exponent: usize },
    #[error("internal witness verification failed: {reason}")]
    WitnessVerification { reason: String },
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// A family padded so that every set has exactly `k` elements, together
/// with the record of which fresh dummy element belongs to which set.
#[derive(Debug, Clone)]
pub struct PaddedFamily {
    family: SetFamily,
    original_n_elements: usize,
    dummy_owner: BTreeMap<u32, usize>,
}

impl PaddedFamily {
    pub fn family(&self) -> &SetFamily {
        &self.family
    }

    /// Elements above this id are padding dummies.
    pub fn original_n_elements(&self) -> usize {
        self.original_n_elements
    }

    /// Maps each dummy element id to the set it pads.
    pub fn dummy_owner(&self) -> &BTreeMap<u32, usize> {
        &self.dummy_owner
    }

    pub fn is_dummy(&self, element: u32) -> bool {
        element as usize > self.original_n_elements
    }
}

/// Pads every set of `family` to exactly `k = family.k()` elements with
/// fresh dummy ids, unique per occurrence. Set order and indices are
/// preserved, and intersections are unchanged, so improving sets of the
/// padded family are improving sets of the original.
pub fn pad_to_uniform(family: &SetFamily) -> PaddedFamily {
    let k = family.k();
    let mut next = family.n_elements() as u32;
    let mut dummy_owner = BTreeMap::new();
    let mut sets = Vec::with_capacity(family.n_sets());
    for (index, set) in family.sets().iter().enumerate() {
        let mut padded = set.clone();
        while padded.len() < k {
            next += 1;
            padded.push(next);
            dummy_owner.insert(next, index);
        }
        sets.push(padded);
    }
    let padded = SetFamily::new(next as usize, k, sets)
        .expect("padding preserves family validity");
    PaddedFamily {
        family: padded,
        original_n_elements: family.n_elements(),
        dummy_owner,
    }
}

/// The pair of colorings driving one search: member colors in `[1, r-1]`
/// and element colors in `[1, r*k]` (dummies included).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    member_colors: BTreeMap<usize, u32>,
    element_colors: Vec<u32>,
    r: usize,
    k: usize,
}

impl Coloring {
    /// Builds and validates a coloring: every packing member must receive
    /// a color in `[1, r-1]` and every element of `[1, n_elements]` a
    /// color in `[1, r*k]`.
    pub fn new(
        members: &[usize],
        n_elements: usize,
        r: usize,
        k: usize,
        member_colors: BTreeMap<usize, u32>,
        element_colors: Vec<u32>,
    ) -> Result<Self, SearchError> {
        if r < 2 {
            return Err(SearchError::UseDirectScan { r });
        }
        for &member in members {
            match member_colors.get(&member) {
                None => {
                    return Err(SearchError::PartialColoring {
                        reason: format!("packing member {member} has no color"),
                    })
                }
                Some(&color) => {
                    if color == 0 || color as usize > r - 1 {
                        return Err(SearchError::ColorOutOfRange {
                            color,
                            limit: r - 1,
                        });
                    }
                }
            }
        }
        if element_colors.len() != n_elements {
            return Err(SearchError::PartialColoring {
                reason: format!(
                    "expected colors for {n_elements} elements, got {}",
                    element_colors.len()
                ),
            });
        }
        for &color in &element_colors {
            if color == 0 || color as usize > r * k {
                return Err(SearchError::ColorOutOfRange {
                    color,
                    limit: r * k,
                });
            }
        }
        Ok(Coloring {
            member_colors,
            element_colors,
            r,
            k,
        })
    }

    /// Samples a uniform coloring: member colors uniform on `[1, r-1]`,
    /// element colors uniform on `[1, r*k]`.
    pub fn sample_uniform(
        members: &[usize],
        n_elements: usize,
        r: usize,
        k: usize,
        rng: &mut impl Rng,
    ) -> Result<Self, SearchError> {
        if r < 2 {
            return Err(SearchError::UseDirectScan { r });
        }
        let member_colors = members
            .iter()
            .map(|&m| (m, rng.gen_range(1..=(r as u32 - 1))))
            .collect();
        let element_colors = (0..n_elements)
            .map(|_| rng.gen_range(1..=(r * k) as u32))
            .collect();
        Coloring::new(members, n_elements, r, k, member_colors, element_colors)
    }

    pub fn member_color(&self, member: usize) -> u32 {
        self.member_colors[&member]
    }

    /// Element ids are 1-based.
    pub fn element_color(&self, element: u32) -> u32 {
        self.element_colors[element as usize - 1]
    }
}

/// Parameters of the randomized driver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Maximum improving-set size.
    pub r: usize,
    /// Pathwidth bound on the induced conflict subgraph of `N[X]`.
    pub pw: usize,
    /// Number of independent coloring trials.
    pub trials: u64,
    /// Master seed; trial t uses the stream (seed, t).
    pub seed: u64,
    /// Target failure probability the trial count was derived from.
    pub failure_prob: f64,
}

impl SearchParams {
    /// Explicit trial count.
    pub fn new(r: usize, pw: usize, trials: u64, seed: u64, failure_prob: f64) -> Self {
        SearchParams {
            r,
            pw,
            trials,
            seed,
            failure_prob,
        }
    }

    /// Derives the trial count from the failure probability via
    /// [`trial_count`]; `r = 1` needs no colorings, so one trial is
    /// recorded.
    pub fn with_failure_prob(
        r: usize,
        k: usize,
        pw: usize,
        seed: u64,
        failure_prob: f64,
    ) -> Result<Self, SearchError> {
        let trials = if r == 1 {
            1
        } else {
            trial_count(r, k, failure_prob)?
        };
        Ok(SearchParams {
            r,
            pw,
            trials,
            seed,
            failure_prob,
        })
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if self.r < 1 {
            return Err(SearchError::InvalidParams {
                reason: "r must be at least 1".into(),
            });
        }
        if self.trials < 1 {
            return Err(SearchError::InvalidParams {
                reason: "at least one trial is required".into(),
            });
        }
        if !(self.failure_prob > 0.0 && self.failure_prob < 1.0) {
            return Err(SearchError::InvalidParams {
                reason: format!("failure probability {} not in (0, 1)", self.failure_prob),
            });
        }
        Ok(())
    }
}

/// Number of independent uniform colorings needed so that an existing
/// qualifying improving set is missed with probability at most `delta`:
/// `⌈e^(r-1+rk) · ln(1/delta)⌉`.
pub fn trial_count(r: usize, k: usize, delta: f64) -> Result<u64, SearchError> {
    if r < 2 {
        return Err(SearchError::UseDirectScan { r });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(SearchError::InvalidParams {
            reason: format!("failure probability {delta} not in (0, 1)"),
        });
    }
    let exponent = r - 1 + r * k;
    let value = (exponent as f64).exp() * (1.0 / delta).ln();
    if !value.is_finite() || value >= u64::MAX as f64 {
        return Err(SearchError::TrialCountOverflow { exponent });
    }
    Ok((value.ceil() as u64).max(1))
}

/// Exploration statistics of one search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Number of distinct states visited (memoized).
    pub visited_states: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Arc {
    Introduce(usize),
    Forget(usize),
}

type StateKey = (u128, u128, Vec<usize>);

struct SearchContext<'a> {
    family: &'a SetFamily,
    k: usize,
    pw: usize,
    /// Per set index: Some(color bit) for members, None for non-members.
    member_color_bit: Vec<Option<u128>>,
    /// Per set index: element color mask and distinct color count
    /// (non-members only).
    element_mask: Vec<(u128, u32)>,
    /// Per non-member: sorted member neighbor list; empty for members.
    neighbors: Vec<Vec<usize>>,
    parents: HashMap<StateKey, Option<(StateKey, Arc)>>,
}

impl<'a> SearchContext<'a> {
    fn is_member(&self, set: usize) -> bool {
        self.member_color_bit[set].is_some()
    }

    /// Mask of member colors over N(S) if they are pairwise distinct.
    fn neighbor_colors_if_injective(&self, set: usize) -> Option<u128> {
        let mut mask = 0u128;
        for &m in &self.neighbors[set] {
            let bit = self.member_color_bit[m].expect("neighbors are members");
            if mask & bit != 0 {
                return None;
            }
            mask |= bit;
        }
        Some(mask)
    }

    fn arcs_from(&self, state: &StateKey) -> Vec<(Arc, StateKey)> {
        let (cf0, cu, bag) = state;
        let mut out = Vec::new();
        // Forget arcs first, in ascending set order.
        for &s in bag.iter() {
            let allowed = if self.is_member(s) {
                true
            } else {
                // All neighbor colors must already be accounted for.
                self.neighbors[s].iter().all(|&m| {
                    let bit = self.member_color_bit[m].unwrap();
                    cf0 & bit != 0
                })
            };
            if allowed {
                let next_bag: Vec<usize> = bag.iter().copied().filter(|&t| t != s).collect();
                out.push((Arc::Forget(s), (*cf0, *cu, next_bag)));
            }
        }
        if bag.len() > self.pw {
            return out;
        }
        // Introduce arcs, ascending set index.
        for s in 0..self.family.n_sets() {
            if bag.binary_search(&s).is_ok() {
                continue;
            }
            if let Some(color_bit) = self.member_color_bit[s] {
                // Member rule: fresh member color, and no bagged non-member
                // S' may see this color inside c_F0(N(S')) unless S really
                // is a neighbor of S'.
                if cf0 & color_bit != 0 {
                    continue;
                }
                let ok = bag.iter().filter(|&&t| !self.is_member(t)).all(|&t| {
                    let is_neighbor = self.neighbors[t].binary_search(&s).is_ok();
                    if is_neighbor {
                        return true;
                    }
                    self.neighbors[t]
                        .iter()
                        .all(|&m| self.member_color_bit[m].unwrap() != color_bit)
                });
                if !ok {
                    continue;
                }
                let mut next_bag = bag.clone();
                let pos = next_bag.binary_search(&s).unwrap_err();
                next_bag.insert(pos, s);
                out.push((Arc::Introduce(s), (cf0 | color_bit, *cu, next_bag)));
            } else {
                // Non-member rule: k fresh, pairwise-distinct element
                // colors, injectively colored neighborhood, and no
                // out-of-bag neighbor color already claimed.
                let (mask, distinct) = self.element_mask[s];
                if distinct as usize != self.k || cu & mask != 0 {
                    continue;
                }
                let neighbor_mask = match self.neighbor_colors_if_injective(s) {
                    Some(mask) => mask,
                    None => continue,
                };
                let in_bag_mask: u128 = self.neighbors[s]
                    .iter()
                    .filter(|&&m| bag.binary_search(&m).is_ok())
                    .map(|&m| self.member_color_bit[m].unwrap())
                    .fold(0, |acc, bit| acc | bit);
                if (neighbor_mask & !in_bag_mask) & cf0 != 0 {
                    continue;
                }
                let mut next_bag = bag.clone();
                let pos = next_bag.binary_search(&s).unwrap_err();
                next_bag.insert(pos, s);
                out.push((Arc::Introduce(s), (*cf0, cu | mask, next_bag)));
            }
        }
        out
    }

    fn accepting(&self, state: &StateKey) -> bool {
        let (cf0, cu, bag) = state;
        bag.is_empty() && (self.k as u32) * cf0.count_ones() < cu.count_ones()
    }

    /// Depth-first exploration with memoization; arcs only ever add colors,
    /// so the state digraph is acyclic and the walk terminates.
    fn explore(&mut self, state: StateKey) -> Option<StateKey> {
        if self.accepting(&state) {
            return Some(state);
        }
        for (arc, next) in self.arcs_from(&state) {
            if self.parents.contains_key(&next) {
                continue;
            }
            self.parents.insert(next.clone(), Some((state.clone(), arc)));
            if let Some(accepting) = self.explore(next) {
                return Some(accepting);
            }
        }
        None
    }
}

/// Searches for an improving set of size ≤ r and pathwidth ≤ pw whose
/// relevant sets are injectively colored by `coloring`.
///
/// One-sided: a returned set is re-verified to satisfy the improving-set
/// definition and carries a validated witness decomposition of `N[X]` of
/// width ≤ pw; `None` only certifies absence under these colorings.
pub fn search_with_coloring(
    family: &SetFamily,
    packing: &Packing,
    coloring: &Coloring,
    r: usize,
    pw: usize,
) -> Result<Option<ImprovingSet>, SearchError> {
    search_with_coloring_stats(family, packing, coloring, r, pw).map(|(found, _)| found)
}

/// [`search_with_coloring`] plus exploration statistics.
pub fn search_with_coloring_stats(
    family: &SetFamily,
    packing: &Packing,
    coloring: &Coloring,
    r: usize,
    pw: usize,
) -> Result<(Option<ImprovingSet>, SearchStats), SearchError> {
    let k = family.k();
    if r < 2 {
        return Err(SearchError::UseDirectScan { r });
    }
    if coloring.r != r || coloring.k != k {
        return Err(SearchError::InvalidParams {
            reason: format!(
                "coloring was sampled for (r, k) = ({}, {}), search runs at ({}, {})",
                coloring.r, coloring.k, r, k
            ),
        });
    }
    check_domains(r, k)?;
    for (index, set) in family.sets().iter().enumerate() {
        if set.len() != k {
            return Err(SearchError::NotUniform {
                index,
                size: set.len(),
                k,
            });
        }
    }
    if coloring.element_colors.len() != family.n_elements() {
        return Err(SearchError::PartialColoring {
            reason: format!(
                "coloring covers {} elements, family has {}",
                coloring.element_colors.len(),
                family.n_elements()
            ),
        });
    }
    let cg = build_conflict_graph(family, packing)?;
    for &m in packing.members() {
        if !coloring.member_colors.contains_key(&m) {
            return Err(SearchError::PartialColoring {
                reason: format!("packing member {m} has no color"),
            });
        }
    }

    let n_sets = family.n_sets();
    let mut member_color_bit = vec![None; n_sets];
    for &m in packing.members() {
        member_color_bit[m] = Some(1u128 << (coloring.member_color(m) - 1));
    }
    let mut element_mask = vec![(0u128, 0u32); n_sets];
    let mut neighbors = vec![Vec::new(); n_sets];
    for &s in cg.non_members() {
        let mut mask = 0u128;
        let mut distinct = 0;
        for &e in family.set(s) {
            let bit = 1u128 << (coloring.element_color(e) - 1);
            if mask & bit == 0 {
                distinct += 1;
            }
            mask |= bit;
        }
        element_mask[s] = (mask, distinct);
        neighbors[s] = cg.neighbors_of(s).expect("non-member").to_vec();
    }

    let mut ctx = SearchContext {
        family,
        k,
        pw,
        member_color_bit,
        element_mask,
        neighbors,
        parents: HashMap::new(),
    };
    let start: StateKey = (0, 0, Vec::new());
    ctx.parents.insert(start.clone(), None);
    let accepting = ctx.explore(start);
    let stats = SearchStats {
        visited_states: ctx.parents.len(),
    };
    let accepting = match accepting {
        Some(state) => state,
        None => return Ok((None, stats)),
    };

    // Walk the parent chain back to the start, collecting bags and the
    // introduced non-members.
    let mut chain = Vec::new();
    let mut cursor = accepting;
    let mut sets = Vec::new();
    loop {
        chain.push(cursor.2.clone());
        match ctx.parents.get(&cursor).cloned().flatten() {
            Some((parent, arc)) => {
                if let Arc::Introduce(s) = arc {
                    if !ctx.is_member(s) {
                        sets.push(s);
                    }
                }
                cursor = parent;
            }
            None => break,
        }
    }
    chain.reverse();
    sets.sort_unstable();

    // Independent re-verification: definition, size, witness.
    if sets.len() > r {
        return Err(SearchError::WitnessVerification {
            reason: format!("reconstructed set has {} > r = {} members", sets.len(), r),
        });
    }
    if !is_improving_set(family, packing, &sets)? {
        return Err(SearchError::WitnessVerification {
            reason: format!("reconstructed set {sets:?} fails the improving-set definition"),
        });
    }
    let improving = ImprovingSet::new(family, packing, sets.clone())?;
    let closed: std::collections::BTreeSet<usize> = improving
        .sets()
        .iter()
        .chain(improving.removed())
        .copied()
        .collect();
    let mut bags: Vec<Vec<usize>> = Vec::with_capacity(chain.len());
    for bag in chain {
        let restricted: Vec<usize> = bag
            .into_iter()
            .filter(|s| closed.contains(s))
            .collect();
        if bags.last() != Some(&restricted) {
            bags.push(restricted);
        }
    }
    let witness = PathDecomposition::new(bags);
    let subgraph = swap_subgraph(family, packing, improving.sets())?;
    if !validate_decomposition(&subgraph, &witness) {
        return Err(SearchError::WitnessVerification {
            reason: "bag sequence is not a path decomposition of N[X]".into(),
        });
    }
    if witness.width() > pw {
        return Err(SearchError::WitnessVerification {
            reason: format!("witness width {} exceeds pw = {pw}", witness.width()),
        });
    }
    if witness.covered_vertices() != closed {
        return Err(SearchError::WitnessVerification {
            reason: "witness does not cover exactly N[X]".into(),
        });
    }
    Ok((Some(improving.with_witness(witness)), stats))
}

fn check_domains(r: usize, k: usize) -> Result<(), SearchError> {
    if r - 1 > MAX_COLOR_DOMAIN {
        return Err(SearchError::DomainTooLarge {
            needed: r - 1,
            max: MAX_COLOR_DOMAIN,
        });
    }
    if r * k > MAX_COLOR_DOMAIN {
        return Err(SearchError::DomainTooLarge {
            needed: r * k,
            max: MAX_COLOR_DOMAIN,
        });
    }
    Ok(())
}

/// SplitMix64, used to derive per-attempt seeds from a master seed.
pub(crate) fn mix_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Randomized driver: pads the family, then runs `params.trials`
/// independent uniform colorings and returns the first improving set
/// found (lowest trial index, regardless of parallel execution).
///
/// For `r = 1` the coloring domain `[r-1]` is empty, so a direct scan for
/// a non-member disjoint from every member replaces the trials; it is
/// exact and uses no randomness.
pub fn find_improving_set(
    family: &SetFamily,
    packing: &Packing,
    params: &SearchParams,
) -> Result<Option<ImprovingSet>, SearchError> {
    params.validate()?;
    if params.r == 1 {
        return direct_scan(family, packing);
    }
    check_domains(params.r, family.k())?;
    let padded = pad_to_uniform(family);
    let members: Vec<usize> = packing.members().to_vec();
    let n_elements = padded.family().n_elements();
    let (r, k, pw) = (params.r, family.k(), params.pw);

    let result: Option<Result<ImprovingSet, SearchError>> = (0..params.trials)
        .into_par_iter()
        .find_map_first(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(trial);
            let coloring =
                match Coloring::sample_uniform(&members, n_elements, r, k, &mut rng) {
                    Ok(c) => c,
                    Err(e) => return Some(Err(e)),
                };
            match search_with_coloring(padded.family(), packing, &coloring, r, pw) {
                Ok(Some(found)) => Some(Ok(found)),
                Ok(None) => None,
                Err(e) => Some(Err(e)),
            }
        });
    match result {
        None => Ok(None),
        Some(Err(e)) => Err(e),
        Some(Ok(found)) => {
            // The padded search already verified the set; re-validate
            // against the original family and keep the witness.
            let witness = found
                .witness_decomposition()
                .cloned()
                .expect("search attaches a witness");
            let improving = ImprovingSet::new(family, packing, found.sets().to_vec())?;
            Ok(Some(improving.with_witness(witness)))
        }
    }
}

/// r = 1 path: the first non-member disjoint from all members, with the
/// trivial single-bag witness.
fn direct_scan(
    family: &SetFamily,
    packing: &Packing,
) -> Result<Option<ImprovingSet>, SearchError> {
    let cg = build_conflict_graph(family, packing)?;
    for &s in cg.non_members() {
        if cg.neighbors_of(s).expect("non-member").is_empty() {
            let improving = ImprovingSet::new(family, packing, vec![s])?;
            let witness = PathDecomposition::new(vec![vec![s]]);
            return Ok(Some(improving.with_witness(witness)));
        }
    }
    Ok(None)
}
