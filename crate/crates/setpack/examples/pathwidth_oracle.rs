//! Path decompositions: the exact oracle, nice decompositions, and the
//! pathwidth of a candidate swap's conflict subgraph.
//!
//! Run with `cargo run --example pathwidth_oracle`.

use setpack::core::{Packing, SetFamily};
use setpack::pathdecomp::{
    exact_pathwidth, make_nice, swap_pathwidth, validate_decomposition, PathDecomposition,
    SimpleGraph,
};

fn main() {
    // Exact pathwidth of a few small graphs.
    let path5 = SimpleGraph::new(0..5, (0..4).map(|i| (i, i + 1))).unwrap();
    let k4 = SimpleGraph::new(0..4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
    let cycle6 = SimpleGraph::new(0..6, (0..6).map(|i| (i, (i + 1) % 6))).unwrap();
    for (name, graph) in [("path P5", &path5), ("clique K4", &k4), ("cycle C6", &cycle6)] {
        let (width, witness) = exact_pathwidth(graph).unwrap();
        println!("{name}: pathwidth {width}, witness bags {:?}", witness.bags());
        assert!(validate_decomposition(graph, &witness));
    }

    // Nice decompositions introduce and forget one vertex at a time.
    let pd = PathDecomposition::new(vec![vec![0, 1], vec![1, 2]]);
    let nice = make_nice(&pd).unwrap();
    println!("\nnice form of {:?}:", pd.bags());
    for (bag, kind) in nice.bags().iter().zip(nice.kinds()) {
        println!("  {kind:?}: {bag:?}");
    }

    // The pathwidth of a swap: the conflict subgraph induced by N[X].
    let family = SetFamily::new(
        7,
        3,
        vec![vec![1, 2, 3], vec![1, 4, 5], vec![2, 6, 7], vec![4, 5, 6]],
    )
    .unwrap();
    let packing = Packing::new(&family, vec![0]).unwrap();
    println!();
    for x in [vec![1, 2], vec![3], vec![1]] {
        println!(
            "swap_pathwidth(X = {x:?}) = {}",
            swap_pathwidth(&family, &packing, &x).unwrap()
        );
    }
}
