//! End-to-end algorithms: the greedy baseline, an exact branch-and-bound
//! oracle, and the local-search driver in its three modes (size-2 swaps,
//! bounded-size swaps, bounded-pathwidth color-coding swaps).

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colorcoding::{
    find_improving_set, mix_seed, trial_count, SearchError, SearchParams,
};
use crate::core::{apply_swap, CoreError, ImprovingSet, Packing, SetFamily};
use crate::swapsearch::first_improving_set;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("time budget exceeded; best packing found has size {}", incumbent.len())]
    BudgetExceeded { incumbent: Packing },
    #[error("invalid solver configuration: {reason}")]
    InvalidConfig { reason: String },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Search(#[from] SearchError),
}

/// Solver selection plus global limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub mode: SolverMode,
    /// Cap on applied swaps (local-search modes only).
    pub iteration_cap: Option<u64>,
    pub time_budget: Option<Duration>,
}

impl SolverConfig {
    pub fn new(mode: SolverMode) -> Self {
        SolverConfig {
            mode,
            iteration_cap: None,
            time_budget: None,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        match &self.mode {
            SolverMode::SwapBruteforce { r } if *r < 1 => Err(SolverError::InvalidConfig {
                reason: "swap size r must be at least 1".into(),
            }),
            SolverMode::SwapPathwidth { r, delta, .. } => {
                if *r < 1 {
                    return Err(SolverError::InvalidConfig {
                        reason: "swap size r must be at least 1".into(),
                    });
                }
                if !(*delta > 0.0 && *delta < 1.0) {
                    return Err(SolverError::InvalidConfig {
                        reason: format!("failure probability {delta} not in (0, 1)"),
                    });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SolverMode {
    Greedy,
    Exact,
    SwapBruteforce {
        r: usize,
    },
    SwapPathwidth {
        r: usize,
        pw: usize,
        /// Colorings per search call; `None` derives the count from
        /// `delta` via [`trial_count`] at each sweep size.
        trials: Option<u64>,
        seed: u64,
        delta: f64,
    },
}

impl SolverMode {
    pub fn name(&self) -> &'static str {
        match self {
            SolverMode::Greedy => "greedy",
            SolverMode::Exact => "exact",
            SolverMode::SwapBruteforce { .. } => "swap",
            SolverMode::SwapPathwidth { .. } => "pwls",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    /// Proven maximum (exact mode).
    Optimal,
    /// No improving set in the searched neighborhood.
    LocalMaximum,
    /// Inclusionwise maximal (greedy).
    Maximal,
    /// Terminated by the time budget or iteration cap; the packing is
    /// still feasible.
    Budget,
}

impl SolveStatus {
    pub fn label(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::LocalMaximum => "local-maximum",
            SolveStatus::Maximal => "maximal",
            SolveStatus::Budget => "budget",
        }
    }
}

/// One applied swap in a local-search run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppliedSwap {
    pub swap: ImprovingSet,
    pub size_after: usize,
}

/// Solver result: the packing, how the run ended, and the audit trace of
/// every applied swap (serializable for replay).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub packing: Packing,
    pub status: SolveStatus,
    pub trace: Vec<AppliedSwap>,
}

/// Inclusionwise maximal packing in set-index order: scan sets ascending
/// and keep every set disjoint from those already kept.
pub fn greedy_maximal(family: &SetFamily) -> Packing {
    let mut chosen: Vec<usize> = Vec::new();
    for index in 0..family.n_sets() {
        if chosen.iter().all(|&c| !family.sets_intersect(c, index)) {
            chosen.push(index);
        }
    }
    Packing::new(family, chosen).expect("greedy output is disjoint by construction")
}

/// Maximum-cardinality packing by branch and bound.
///
/// Branches on the lowest-coverable element with the fewest includable
/// covering sets (include one of them, or give the element up), prunes
/// with `|chosen| + ⌊free/s_min⌋ ≤ best`, and starts from the greedy
/// packing as incumbent. On budget exhaustion the incumbent is returned
/// inside [`SolverError::BudgetExceeded`], explicitly flagged non-optimal.
pub fn exact_max_packing(
    family: &SetFamily,
    budget: Option<Duration>,
) -> Result<Packing, SolverError> {
    let n = family.n_elements();
    let n_sets = family.n_sets();
    let s_min = family
        .sets()
        .iter()
        .map(|s| s.len())
        .min()
        .unwrap_or(1)
        .max(1);
    let words = n / 64 + 1;
    let mut set_masks = vec![vec![0u64; words]; n_sets];
    for (i, set) in family.sets().iter().enumerate() {
        for &e in set {
            let e = e as usize - 1;
            set_masks[i][e / 64] |= 1 << (e % 64);
        }
    }
    // covering[e] = sets containing element e, ascending.
    let mut covering: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, set) in family.sets().iter().enumerate() {
        for &e in set {
            covering[e as usize - 1].push(i);
        }
    }

    struct Ctx<'a> {
        family: &'a SetFamily,
        set_masks: Vec<Vec<u64>>,
        covering: Vec<Vec<usize>>,
        s_min: usize,
        best: Vec<usize>,
        deadline: Option<Instant>,
        nodes: u64,
        timed_out: bool,
        max_possible: usize,
    }

    impl Ctx<'_> {
        fn disjoint(&self, set: usize, used: &[u64]) -> bool {
            self.set_masks[set]
                .iter()
                .zip(used.iter())
                .all(|(a, b)| a & b == 0)
        }

        fn blocked(&self, set: usize, banned: &[u64]) -> bool {
            self.set_masks[set]
                .iter()
                .zip(banned.iter())
                .any(|(a, b)| a & b != 0)
        }

        fn recurse(
            &mut self,
            chosen: &mut Vec<usize>,
            used: &mut Vec<u64>,
            banned: &mut Vec<u64>,
            free: usize,
        ) -> bool {
            self.nodes += 1;
            if self.nodes % 1024 == 0 {
                if let Some(deadline) = self.deadline {
                    if Instant::now() > deadline {
                        self.timed_out = true;
                    }
                }
            }
            if self.timed_out {
                return true;
            }
            if chosen.len() > self.best.len() {
                self.best = chosen.clone();
                if self.best.len() == self.max_possible {
                    return true;
                }
            }
            if chosen.len() + free / self.s_min <= self.best.len() {
                return false;
            }
            // Pick the free element with the fewest includable covers.
            let mut branch_element = None;
            let mut branch_options: Option<Vec<usize>> = None;
            for e in 0..self.covering.len() {
                let word = e / 64;
                let bit = 1u64 << (e % 64);
                if used[word] & bit != 0 || banned[word] & bit != 0 {
                    continue;
                }
                let options: Vec<usize> = self.covering[e]
                    .iter()
                    .copied()
                    .filter(|&s| self.disjoint(s, used) && !self.blocked(s, banned))
                    .collect();
                if branch_options
                    .as_ref()
                    .map(|cur| options.len() < cur.len())
                    .unwrap_or(true)
                {
                    branch_element = Some(e);
                    branch_options = Some(options);
                    if branch_options.as_ref().unwrap().is_empty() {
                        break;
                    }
                }
            }
            let Some(element) = branch_element else {
                // Every element is covered or given up.
                return false;
            };
            let options = branch_options.unwrap();
            for set in options {
                chosen.push(set);
                let size = self.family.set(set).len();
                for w in 0..used.len() {
                    used[w] |= self.set_masks[set][w];
                }
                if self.recurse(chosen, used, banned, free - size) {
                    return true;
                }
                for w in 0..used.len() {
                    used[w] &= !self.set_masks[set][w];
                }
                chosen.pop();
            }
            // Give the element up: no chosen set will cover it.
            let word = element / 64;
            let bit = 1u64 << (element % 64);
            banned[word] |= bit;
            let stop = self.recurse(chosen, used, banned, free - 1);
            banned[word] &= !bit;
            stop
        }
    }

    let greedy = greedy_maximal(family);
    let mut ctx = Ctx {
        family,
        set_masks,
        covering,
        s_min,
        best: greedy.members().to_vec(),
        deadline: budget.map(|b| Instant::now() + b),
        nodes: 0,
        timed_out: false,
        max_possible: n / s_min,
    };
    let mut chosen = Vec::new();
    let mut used = vec![0u64; words];
    let mut banned = vec![0u64; words];
    ctx.recurse(&mut chosen, &mut used, &mut banned, n);
    let best = Packing::new(family, ctx.best.clone())?;
    if ctx.timed_out {
        return Err(SolverError::BudgetExceeded { incumbent: best });
    }
    Ok(best)
}

/// Local search from the greedy packing, repeatedly applying the first
/// improving set the configured searcher finds.
///
/// In `SwapPathwidth` mode each attempt sweeps swap sizes s = 1, 2, ..., r
/// (s = 1 is the exact direct scan, so the result is always maximal) and
/// the sweep restarts after every successful swap. Terminates after at
/// most `n_elements` swaps since every swap strictly grows the packing.
pub fn local_search(
    family: &SetFamily,
    config: &SolverConfig,
) -> Result<SolveOutcome, SolverError> {
    config.validate()?;
    let deadline = config.time_budget.map(|b| Instant::now() + b);
    let mut packing = greedy_maximal(family);
    let mut trace: Vec<AppliedSwap> = Vec::new();
    let mut attempt: u64 = 0;
    loop {
        if let Some(cap) = config.iteration_cap {
            if trace.len() as u64 >= cap {
                return Ok(SolveOutcome {
                    packing,
                    status: SolveStatus::Budget,
                    trace,
                });
            }
        }
        if let Some(deadline) = deadline {
            if Instant::now() > deadline {
                return Ok(SolveOutcome {
                    packing,
                    status: SolveStatus::Budget,
                    trace,
                });
            }
        }
        let found = match &config.mode {
            SolverMode::SwapBruteforce { r } => first_improving_set(family, &packing, *r)?,
            SolverMode::SwapPathwidth {
                r,
                pw,
                trials,
                seed,
                delta,
            } => {
                let mut found = None;
                for s in 1..=*r {
                    let call_trials = match (s, trials) {
                        (1, _) => 1,
                        (_, Some(t)) => *t,
                        (_, None) => trial_count(s, family.k(), *delta)?,
                    };
                    let params = SearchParams::new(
                        s,
                        *pw,
                        call_trials,
                        mix_seed(*seed, attempt),
                        *delta,
                    );
                    attempt += 1;
                    if let Some(swap) = find_improving_set(family, &packing, &params)? {
                        found = Some(swap);
                        break;
                    }
                }
                found
            }
            other => {
                return Err(SolverError::InvalidConfig {
                    reason: format!("local_search does not handle mode {}", other.name()),
                })
            }
        };
        match found {
            Some(swap) => {
                packing = apply_swap(family, &packing, &swap)?;
                trace.push(AppliedSwap {
                    swap,
                    size_after: packing.len(),
                });
            }
            None => {
                return Ok(SolveOutcome {
                    packing,
                    status: SolveStatus::LocalMaximum,
                    trace,
                })
            }
        }
    }
}

/// Runs the configured solver. Budget-terminated exact runs return their
/// incumbent with [`SolveStatus::Budget`] instead of an error.
pub fn solve(family: &SetFamily, config: &SolverConfig) -> Result<SolveOutcome, SolverError> {
    config.validate()?;
    match &config.mode {
        SolverMode::Greedy => Ok(SolveOutcome {
            packing: greedy_maximal(family),
            status: SolveStatus::Maximal,
            trace: Vec::new(),
        }),
        SolverMode::Exact => match exact_max_packing(family, config.time_budget) {
            Ok(packing) => Ok(SolveOutcome {
                packing,
                status: SolveStatus::Optimal,
                trace: Vec::new(),
            }),
            Err(SolverError::BudgetExceeded { incumbent }) => Ok(SolveOutcome {
                packing: incumbent,
                status: SolveStatus::Budget,
                trace: Vec::new(),
            }),
            Err(other) => Err(other),
        },
        _ => local_search(family, config),
    }
}

/// Theory-faithful parameters for the bounded-pathwidth local search at
/// quality target ε: `r = ⌈2(k+1)^(1/ε) · log2(n_sets)⌉` and
/// `pw = ⌈4(k+1)^(1/ε)⌉`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestedParams {
    pub r: usize,
    pub pw: usize,
    pub warning: String,
}

/// The warning attached to every suggestion.
pub const PARAMETER_WARNING: &str = "theory-faithful values; typically impractical to run — \
     override r and pw for practical experiments";

pub fn suggested_parameters(
    k: usize,
    epsilon: f64,
    n_sets: usize,
) -> Result<SuggestedParams, SolverError> {
    if k < 3 {
        return Err(SolverError::InvalidConfig {
            reason: format!("k = {k} must be at least 3"),
        });
    }
    if !(epsilon > 0.0) {
        return Err(SolverError::InvalidConfig {
            reason: format!("epsilon = {epsilon} must be positive"),
        });
    }
    if n_sets < 2 {
        return Err(SolverError::InvalidConfig {
            reason: format!("n_sets = {n_sets} must be at least 2"),
        });
    }
    let base = ((k + 1) as f64).powf(1.0 / epsilon);
    let r = (2.0 * base * (n_sets as f64).log2()).ceil();
    let pw = (4.0 * base).ceil();
    if !r.is_finite() || !pw.is_finite() || r >= usize::MAX as f64 {
        return Err(SolverError::InvalidConfig {
            reason: "suggested parameters overflow".into(),
        });
    }
    Ok(SuggestedParams {
        r: r as usize,
        pw: pw as usize,
        warning: PARAMETER_WARNING.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family_e1() -> SetFamily {
        SetFamily::new(
            7,
            3,
            vec![vec![1, 2, 3], vec![1, 4, 5], vec![2, 6, 7], vec![4, 5, 6]],
        )
        .unwrap()
    }

    /// Brute force over all subsets, the independent oracle for the
    /// branch-and-bound solver.
    fn max_packing_by_enumeration(family: &SetFamily) -> usize {
        let n = family.n_sets();
        assert!(n <= 20);
        let mut best = 0;
        'outer: for mask in 0u32..(1 << n) {
            let chosen: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            for (pos, &a) in chosen.iter().enumerate() {
                for &b in &chosen[pos + 1..] {
                    if family.sets_intersect(a, b) {
                        continue 'outer;
                    }
                }
            }
            best = best.max(chosen.len());
        }
        best
    }

    #[test]
    fn greedy_examples() {
        assert_eq!(greedy_maximal(&family_e1()).members(), &[0, 3]);

        let disjoint =
            SetFamily::new(9, 3, vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]).unwrap();
        assert_eq!(greedy_maximal(&disjoint).members(), &[0, 1, 2]);

        let shared = SetFamily::new(4, 3, vec![vec![1, 2], vec![1, 3], vec![1, 4]]).unwrap();
        assert_eq!(greedy_maximal(&shared).members(), &[0]);
    }

    #[test]
    fn exact_on_e1_is_two() {
        let family = family_e1();
        assert_eq!(max_packing_by_enumeration(&family), 2);
        assert_eq!(exact_max_packing(&family, None).unwrap().len(), 2);
    }

    #[test]
    fn exact_on_disjoint_family() {
        let disjoint =
            SetFamily::new(9, 3, vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]).unwrap();
        assert_eq!(exact_max_packing(&disjoint, None).unwrap().len(), 3);
    }

    #[test]
    fn exact_matches_enumeration_on_random_families() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..40 {
            let n_elements = rng.gen_range(5..=10usize);
            let n_sets = rng.gen_range(1..=12usize);
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
            assert_eq!(
                exact_max_packing(&family, None).unwrap().len(),
                max_packing_by_enumeration(&family)
            );
        }
    }

    #[test]
    fn local_search_swap2_on_e1_reaches_optimum() {
        let family = family_e1();
        let config = SolverConfig::new(SolverMode::SwapBruteforce { r: 2 });
        let outcome = local_search(&family, &config).unwrap();
        assert_eq!(outcome.packing.len(), 2);
        assert_eq!(outcome.status, SolveStatus::LocalMaximum);
        assert!(outcome.trace.is_empty());
    }

    #[test]
    fn local_search_escapes_the_greedy_trap() {
        // Greedy picks A and stalls at size 1; a 2-swap removes A for B, C.
        let family =
            SetFamily::new(7, 3, vec![vec![1, 2, 3], vec![1, 4, 5], vec![2, 6, 7]]).unwrap();
        assert_eq!(greedy_maximal(&family).members(), &[0]);
        let config = SolverConfig::new(SolverMode::SwapBruteforce { r: 2 });
        let outcome = local_search(&family, &config).unwrap();
        assert_eq!(outcome.packing.members(), &[1, 2]);
        assert_eq!(outcome.trace.len(), 1);
    }

    #[test]
    fn bruteforce_full_swaps_match_exact_on_small_families() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n_elements = rng.gen_range(5..=9usize);
            let n_sets = rng.gen_range(1..=10usize);
            let mut sets = Vec::new();
            let mut tries = 0;
            while sets.len() < n_sets && tries < 300 {
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
            let exact = exact_max_packing(&family, None).unwrap().len();
            let config = SolverConfig::new(SolverMode::SwapBruteforce {
                r: family.n_sets(),
            });
            let ls = local_search(&family, &config).unwrap();
            assert_eq!(ls.packing.len(), exact);
        }
    }

    #[test]
    fn pwls_mode_runs_and_is_maximal() {
        let family =
            SetFamily::new(7, 3, vec![vec![1, 2, 3], vec![1, 4, 5], vec![2, 6, 7]]).unwrap();
        let config = SolverConfig::new(SolverMode::SwapPathwidth {
            r: 2,
            pw: 2,
            trials: Some(2000),
            seed: 11,
            delta: 0.01,
        });
        let outcome = local_search(&family, &config).unwrap();
        assert_eq!(outcome.packing.len(), 2);
        // Maximality: no size-1 improvement is left behind.
        assert!(
            crate::swapsearch::first_improving_set(&family, &outcome.packing, 1)
                .unwrap()
                .is_none()
        );
    }

    #[test]
    fn termination_bound_holds() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let n_elements = rng.gen_range(6..=12usize);
            let n_sets = rng.gen_range(3..=14usize);
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
            let config = SolverConfig::new(SolverMode::SwapBruteforce { r: 3 });
            let outcome = local_search(&family, &config).unwrap();
            assert!(outcome.trace.len() <= n_elements);
        }
    }

    #[test]
    fn iteration_cap_flags_budget() {
        let family =
            SetFamily::new(7, 3, vec![vec![1, 2, 3], vec![1, 4, 5], vec![2, 6, 7]]).unwrap();
        let mut config = SolverConfig::new(SolverMode::SwapBruteforce { r: 2 });
        config.iteration_cap = Some(0);
        let outcome = local_search(&family, &config).unwrap();
        assert_eq!(outcome.status, SolveStatus::Budget);
        assert_eq!(outcome.packing.len(), 1);
    }

    #[test]
    fn suggested_parameter_values() {
        let p = suggested_parameters(3, 1.0, 256).unwrap();
        assert_eq!((p.r, p.pw), (64, 16));
        let p = suggested_parameters(3, 2.0, 2).unwrap();
        assert_eq!((p.r, p.pw), (4, 8));
        assert!(!p.warning.is_empty());

        // r is non-decreasing in n_sets.
        let mut last = 0;
        for n_sets in [2, 4, 16, 256, 4096] {
            let p = suggested_parameters(3, 1.0, n_sets).unwrap();
            assert!(p.r >= last);
            last = p.r;
        }

        assert!(suggested_parameters(2, 1.0, 4).is_err());
        assert!(suggested_parameters(3, 0.0, 4).is_err());
        assert!(suggested_parameters(3, 1.0, 1).is_err());
    }

    #[test]
    fn swap2_ratio_bound_on_random_instances() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..30 {
            let k = rng.gen_range(3..=4usize);
            let n_elements = rng.gen_range(6..=12usize);
            let n_sets = rng.gen_range(2..=14usize);
            let mut sets = Vec::new();
            let mut tries = 0;
            while sets.len() < n_sets && tries < 400 {
                tries += 1;
                let size = rng.gen_range(1..=k);
                let mut set: Vec<u32> = (1..=n_elements as u32).collect();
                set.shuffle(&mut rng);
                set.truncate(size);
                set.sort_unstable();
                if !sets.contains(&set) {
                    sets.push(set);
                }
            }
            let family = SetFamily::new(n_elements, k, sets).unwrap();
            let exact = exact_max_packing(&family, None).unwrap().len();
            let config = SolverConfig::new(SolverMode::SwapBruteforce { r: 2 });
            let swap2 = local_search(&family, &config).unwrap().packing.len();
            // (k+1)/2 approximation bound for a 2-swap local maximum.
            assert!(2 * exact <= (k + 1) * swap2);
        }
    }
}
