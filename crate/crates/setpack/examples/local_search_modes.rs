//! Compare the solver modes on one random instance: greedy, size-2
//! swaps, bounded-pathwidth color-coding swaps, and the exact optimum.
//!
//! Run with `cargo run --release --example local_search_modes`.

use setpack::instances::gen_random;
use setpack::solvers::{solve, suggested_parameters, SolverConfig, SolverMode};

fn main() {
    let family = gen_random(30, 60, 3, 42).unwrap();
    println!(
        "instance: {} sets of size <= {} over {} elements\n",
        family.n_sets(),
        family.k(),
        family.n_elements()
    );

    let modes = [
        SolverMode::Greedy,
        SolverMode::SwapBruteforce { r: 2 },
        SolverMode::SwapBruteforce { r: 3 },
        SolverMode::SwapPathwidth {
            r: 3,
            pw: 2,
            trials: Some(3000),
            seed: 7,
            delta: 0.05,
        },
        SolverMode::Exact,
    ];
    println!("{:<10} {:>6} {:>8} {:>16}", "mode", "size", "swaps", "status");
    for mode in modes {
        let label = match &mode {
            SolverMode::SwapBruteforce { r } => format!("swap(r={r})"),
            SolverMode::SwapPathwidth { r, pw, .. } => format!("pwls({r},{pw})"),
            other => other.name().to_string(),
        };
        let outcome = solve(&family, &SolverConfig::new(mode)).unwrap();
        println!(
            "{:<10} {:>6} {:>8} {:>16}",
            label,
            outcome.packing.len(),
            outcome.trace.len(),
            outcome.status.label()
        );
    }

    // The theory-faithful parameters are exposed but deliberately not the
    // default: they are far too large to run.
    let params = suggested_parameters(3, 1.0, 60).unwrap();
    println!(
        "\nsuggested (k=3, eps=1, n=60): r = {}, pw = {} — {}",
        params.r, params.pw, params.warning
    );
}
