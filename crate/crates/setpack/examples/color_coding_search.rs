//! The color-coding search, piece by piece: a hand-built coloring that
//! exposes the planted improving pair, one that hides it, the trial-count
//! formula, and a small empirical estimate of the per-trial hit rate.
//!
//! Run with `cargo run --release --example color_coding_search`.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use setpack::colorcoding::{
    find_improving_set, search_with_coloring, trial_count, Coloring, SearchParams,
};
use setpack::core::{Packing, SetFamily};

fn main() {
    // {S1, S2} is the only improving set for the packing {S0}.
    let family = SetFamily::new(
        7,
        3,
        vec![vec![1, 2, 3], vec![1, 4, 5], vec![2, 6, 7]],
    )
    .unwrap();
    let packing = Packing::new(&family, vec![0]).unwrap();
    let (r, k, pw) = (2, 3, 2);

    // A good coloring: the six elements of S1 ∪ S2 get six distinct
    // colors (element 3 only appears in the member S0, so its color is
    // irrelevant).
    let good = Coloring::new(
        packing.members(),
        7,
        r,
        k,
        BTreeMap::from([(0, 1)]),
        vec![1, 2, 1, 3, 4, 5, 6],
    )
    .unwrap();
    let found = search_with_coloring(&family, &packing, &good, r, pw)
        .unwrap()
        .expect("colorful pair is found");
    println!("injective coloring finds X = {:?}", found.sets());
    println!(
        "witness decomposition bags: {:?} (width {})",
        found.witness_decomposition().unwrap().bags(),
        found.witness_decomposition().unwrap().width()
    );

    // A bad coloring: elements 1 and 4 collide, so S1 is never colorful.
    let bad = Coloring::new(
        packing.members(),
        7,
        r,
        k,
        BTreeMap::from([(0, 1)]),
        vec![1, 2, 3, 1, 4, 5, 6],
    )
    .unwrap();
    println!(
        "colliding coloring finds: {:?}",
        search_with_coloring(&family, &packing, &bad, r, pw).unwrap()
    );

    // How many random colorings make a miss unlikely?
    for delta in [0.1, 0.01, 0.001] {
        println!(
            "trials for failure probability {delta}: {}",
            trial_count(r, k, delta).unwrap()
        );
    }

    // Empirical per-trial hit rate over 20000 colorings.
    let trials = 20_000u64;
    let mut hits = 0u64;
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        rng.set_stream(t);
        let coloring = Coloring::sample_uniform(packing.members(), 7, r, k, &mut rng).unwrap();
        if search_with_coloring(&family, &packing, &coloring, r, pw)
            .unwrap()
            .is_some()
        {
            hits += 1;
        }
    }
    println!(
        "empirical per-trial rate: {:.5} (theory floor e^-7 = {:.5})",
        hits as f64 / trials as f64,
        (-7.0f64).exp()
    );

    // The full driver wraps the loop and re-verifies what it returns.
    let params = SearchParams::with_failure_prob(r, k, pw, 5, 0.01).unwrap();
    let found = find_improving_set(&family, &packing, &params).unwrap().unwrap();
    println!("driver finds X = {:?} within {} trials", found.sets(), params.trials);
}
