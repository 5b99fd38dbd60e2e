//! The Multicolored Clique reduction as an instance generator: reduce K4,
//! solve the resulting 3-Set Packing instance exactly, and pull the
//! clique back out of the perfect packing.
//!
//! Run with `cargo run --release --example hardness_reduction`.

use setpack::hardness::{
    extract_clique, reduce_mcc, symmetric_difference_size, witness_packing,
    MulticoloredCliqueInstance,
};
use setpack::solvers::exact_max_packing;

fn main() {
    let k4 = MulticoloredCliqueInstance::new(
        4,
        4,
        vec![0, 1, 2, 3],
        [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
    )
    .unwrap();
    let output = reduce_mcc(&k4).unwrap();
    println!(
        "K4 reduces to {} sets over {} elements; planted packing f0 has size {} = |U|/3 - 1",
        output.family.n_sets(),
        output.family.n_elements(),
        output.f0.len()
    );

    // The clique certifies a perfect packing near f0.
    let witness = witness_packing(&output, &[0, 1, 2, 3]).unwrap();
    println!(
        "witness packing: size {} (perfect), |f0 Δ witness| = {}",
        witness.len(),
        symmetric_difference_size(&output.f0, &witness)
    );

    // The exact solver reaches |U|/3 and the clique is recoverable.
    let exact = exact_max_packing(&output.family, None).unwrap();
    let clique = extract_clique(&output, &exact).unwrap();
    println!("exact optimum {}, extracted clique {:?}", exact.len(), clique);

    // Remove one inter-color edge: no clique, no perfect packing.
    let broken = MulticoloredCliqueInstance::new(
        4,
        4,
        vec![0, 1, 2, 3],
        [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
    )
    .unwrap();
    let output = reduce_mcc(&broken).unwrap();
    let exact = exact_max_packing(&output.family, None).unwrap();
    println!(
        "K4 minus an edge: optimum {} < |U|/3 = {}",
        exact.len(),
        output.family.n_elements() / 3
    );

    // Element names make the gadget structure readable.
    println!("\nfirst sets of the reduction:");
    for index in 0..4 {
        let named: Vec<&str> = output.family.set(index)
            .iter()
            .map(|&e| output.element_name(e))
            .collect();
        println!("  set {index}: {named:?}");
    }
}
