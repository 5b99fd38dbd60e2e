//! A small benchmark over planted 3-Dimensional Matching instances: how
//! close do greedy, swap-2 and the bounded-pathwidth search get to the
//! planted optimum as noise grows?
//!
//! Run with `cargo run --release --example planted_3dm_bench`.

use setpack::instances::gen_planted_3dm;
use setpack::solvers::{greedy_maximal, local_search, SolverConfig, SolverMode};

fn main() {
    println!(
        "{:>3} {:>6} {:>8} {:>7} {:>6} {:>6}",
        "m", "noise", "optimum", "greedy", "swap2", "pwls"
    );
    for m in [6usize, 8, 10] {
        for noise in [10usize, 30, 60] {
            let (family, optimum) = gen_planted_3dm(m, noise, 1000 + noise as u64).unwrap();
            let greedy = greedy_maximal(&family).len();
            let swap2 = local_search(
                &family,
                &SolverConfig::new(SolverMode::SwapBruteforce { r: 2 }),
            )
            .unwrap()
            .packing
            .len();
            let pwls = local_search(
                &family,
                &SolverConfig::new(SolverMode::SwapPathwidth {
                    r: 3,
                    pw: 2,
                    trials: Some(4000),
                    seed: 17,
                    delta: 0.05,
                }),
            )
            .unwrap()
            .packing
            .len();
            println!(
                "{:>3} {:>6} {:>8} {:>7} {:>6} {:>6}",
                m, noise, optimum, greedy, swap2, pwls
            );
        }
    }
    println!("\nthe planted matching is the optimum: |U|/3 caps every packing at m");
}
