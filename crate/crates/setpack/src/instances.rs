//! Instance I/O and generators.
//!
//! The on-disk format is plain text: a header `p sp <n_elements> <n_sets>
//! <k>`, optional comment lines `c ...`, and one `s <e1> <e2> ...` line
//! per set. Element ids are 1-based. The writer emits a canonical form
//! (sets in family order, elements sorted), so written files are
//! bit-exact reproducible and `read(write(f)) = f`.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::core::{CoreError, SetFamily};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("infeasible generator parameters: {reason}")]
    Infeasible { reason: String },
    #[error("retry cap exhausted while sampling distinct sets")]
    RetriesExhausted,
}

fn parse_error(line: usize, message: impl Into<String>) -> InstanceError {
    InstanceError::Parse {
        line,
        message: message.into(),
    }
}

/// Parses the `p sp` instance format.
pub fn read_instance(text: &str) -> Result<SetFamily, InstanceError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut sets: Vec<Vec<u32>> = Vec::new();
    let mut set_lines: Vec<usize> = Vec::new();
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
                if header.is_some() {
                    return Err(parse_error(line, "duplicate header"));
                }
                if tokens.next() != Some("sp") {
                    return Err(parse_error(line, "expected header `p sp <n> <m> <k>`"));
                }
                let mut numbers = Vec::new();
                for _ in 0..3 {
                    let token = tokens
                        .next()
                        .ok_or_else(|| parse_error(line, "header needs three numbers"))?;
                    let value: usize = token
                        .parse()
                        .map_err(|_| parse_error(line, format!("bad number `{token}`")))?;
                    numbers.push(value);
                }
                if tokens.next().is_some() {
                    return Err(parse_error(line, "trailing tokens after header"));
                }
                header = Some((numbers[0], numbers[1], numbers[2]));
            }
            Some("s") => {
                if header.is_none() {
                    return Err(parse_error(line, "set line before header"));
                }
                let mut set = Vec::new();
                for token in tokens {
                    let value: u32 = token
                        .parse()
                        .map_err(|_| parse_error(line, format!("bad element id `{token}`")))?;
                    set.push(value);
                }
                if set.is_empty() {
                    return Err(parse_error(line, "empty set"));
                }
                sets.push(set);
                set_lines.push(line);
            }
            Some(other) => {
                return Err(parse_error(line, format!("unknown line type `{other}`")));
            }
            None => unreachable!("trimmed line is nonempty"),
        }
    }
    let (n_elements, n_sets, k) =
        header.ok_or_else(|| parse_error(last_line.max(1), "missing header `p sp ...`"))?;
    if sets.len() != n_sets {
        return Err(parse_error(
            last_line.max(1),
            format!("header announces {n_sets} sets, found {}", sets.len()),
        ));
    }
    SetFamily::new(n_elements, k, sets).map_err(|err| {
        let line = match &err {
            CoreError::EmptySet { index }
            | CoreError::OversizedSet { index, .. }
            | CoreError::ElementOutOfRange { index, .. }
            | CoreError::RepeatedElement { index, .. }
            | CoreError::DuplicateSet { index, .. } => set_lines.get(*index).copied(),
            _ => None,
        };
        parse_error(line.unwrap_or(last_line.max(1)), err.to_string())
    })
}

/// Canonical text form of a family; `read_instance` inverts it exactly.
pub fn write_instance(family: &SetFamily) -> String {
    let mut out = format!(
        "p sp {} {} {}\n",
        family.n_elements(),
        family.n_sets(),
        family.k()
    );
    for set in family.sets() {
        out.push('s');
        for &e in set {
            out.push(' ');
            out.push_str(&e.to_string());
        }
        out.push('\n');
    }
    out
}

fn binomial_at_least(n: usize, k: usize, threshold: usize) -> bool {
    // Computes min(C(n, k), threshold+1) without overflow.
    if k > n {
        return threshold == 0;
    }
    let mut value: u128 = 1;
    for i in 0..k {
        value = value.saturating_mul((n - i) as u128) / (i + 1) as u128;
        if value > threshold as u128 {
            return true;
        }
    }
    value >= threshold as u128
}

const RETRY_CAP: usize = 10_000;

/// `n_sets` distinct sets of size exactly `k`, elements sampled uniformly
/// without replacement per set, deterministically from `seed`.
pub fn gen_random(
    n_elements: usize,
    n_sets: usize,
    k: usize,
    seed: u64,
) -> Result<SetFamily, InstanceError> {
    if k == 0 || k > n_elements {
        return Err(InstanceError::Infeasible {
            reason: format!("set size k = {k} infeasible for universe of {n_elements}"),
        });
    }
    if !binomial_at_least(n_elements, k, n_sets) {
        return Err(InstanceError::Infeasible {
            reason: format!("requested {n_sets} distinct sets, C({n_elements}, {k}) is smaller"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sets: Vec<Vec<u32>> = Vec::with_capacity(n_sets);
    while sets.len() < n_sets {
        let mut found = false;
        for _ in 0..RETRY_CAP {
            let mut set: Vec<u32> = rand::seq::index::sample(&mut rng, n_elements, k)
                .into_iter()
                .map(|i| i as u32 + 1)
                .collect();
            set.sort_unstable();
            if !sets.contains(&set) {
                sets.push(set);
                found = true;
                break;
            }
        }
        if !found {
            return Err(InstanceError::RetriesExhausted);
        }
    }
    SetFamily::new(n_elements, k, sets)
        .map_err(|err| InstanceError::Infeasible {
            reason: format!("generated family failed validation: {err}"),
        })
}

/// Planted 3-Dimensional Matching: universe of `3m` elements split into
/// blocks X = 1..m, Y = m+1..2m, Z = 2m+1..3m, the perfect matching
/// {(i, m+i, 2m+i)} plus `noise` distinct random block-respecting triples.
///
/// Returns the family and `m`, the instance's optimum: the matching
/// achieves m, and no packing can exceed `|U|/3 = m`.
pub fn gen_planted_3dm(
    m: usize,
    noise: usize,
    seed: u64,
) -> Result<(SetFamily, usize), InstanceError> {
    if m < 1 {
        return Err(InstanceError::Infeasible {
            reason: "m must be at least 1".into(),
        });
    }
    let capacity = m.saturating_mul(m).saturating_mul(m) - m;
    if noise > capacity {
        return Err(InstanceError::Infeasible {
            reason: format!("noise = {noise} exceeds {capacity} distinct non-planted triples"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sets: Vec<Vec<u32>> = (1..=m as u32)
        .map(|i| vec![i, m as u32 + i, 2 * m as u32 + i])
        .collect();
    let mut added = 0;
    while added < noise {
        let mut found = false;
        for _ in 0..RETRY_CAP {
            let x = rng.gen_range(1..=m as u32);
            let y = m as u32 + rng.gen_range(1..=m as u32);
            let z = 2 * m as u32 + rng.gen_range(1..=m as u32);
            let triple = vec![x, y, z];
            if !sets.contains(&triple) {
                sets.push(triple);
                found = true;
                break;
            }
        }
        if !found {
            return Err(InstanceError::RetriesExhausted);
        }
        added += 1;
    }
    // Shuffle so the planted matching does not lead the index order, which
    // would make index-order greedy trivially optimal.
    sets.shuffle(&mut rng);
    let family = SetFamily::new(3 * m, 3, sets).map_err(|err| InstanceError::Infeasible {
        reason: format!("generated family failed validation: {err}"),
    })?;
    Ok((family, m))
}
