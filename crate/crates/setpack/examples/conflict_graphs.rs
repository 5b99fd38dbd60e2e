//! Instance basics: build a conflict graph, test improving sets, apply a
//! swap.
//!
//! Run with `cargo run --example conflict_graphs`.

use setpack::core::{
    apply_swap, build_conflict_graph, is_improving_set, neighborhood, ImprovingSet, Packing,
    SetFamily,
};

fn main() {
    // Four sets over seven elements; S1 and S2 overlap S0, S3 is free.
    let family = SetFamily::new(
        7,
        3,
        vec![vec![1, 2, 3], vec![1, 4, 5], vec![2, 6, 7], vec![4, 5, 6]],
    )
    .unwrap();
    let packing = Packing::new(&family, vec![0]).unwrap();
    println!("family with {} sets, packing = {:?}", family.n_sets(), packing.members());

    let cg = build_conflict_graph(&family, &packing).unwrap();
    for &s in cg.non_members() {
        println!("non-member S{s} intersects members {:?}", cg.neighbors_of(s).unwrap());
    }

    // {S1, S2} displaces only S0, so it is an improving set.
    let candidate = vec![1, 2];
    println!(
        "N({candidate:?}) = {:?}, improving = {}",
        neighborhood(&cg, &candidate).unwrap(),
        is_improving_set(&family, &packing, &candidate).unwrap()
    );

    let swap = ImprovingSet::new(&family, &packing, candidate).unwrap();
    let bigger = apply_swap(&family, &packing, &swap).unwrap();
    println!(
        "applied swap: {:?} -> {:?} (size {} -> {})",
        packing.members(),
        bigger.members(),
        packing.len(),
        bigger.len()
    );

    // The swap engine refuses anything that is not improving.
    let err = ImprovingSet::new(&family, &bigger, vec![3]).unwrap_err();
    println!("adding S3 to {:?} fails: {err}", bigger.members());
}
