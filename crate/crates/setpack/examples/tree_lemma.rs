//! Bounded-tree certificates in labeled multigraphs: construct, verify,
//! derive the path decomposition, and write the files consumed by
//! `setpack verify cert-tree`.
//!
//! Run with `cargo run --release --example tree_lemma`.

use setpack::treelemma::{
    beta, build_decomposed_subgraph, find_bounded_tree, gen_multigraph, verify_tree_certificate,
    write_multigraph, write_tree_certificate,
};

fn main() {
    for gamma in [1usize, 2, 4] {
        println!("beta({gamma}) = {}", beta(gamma).unwrap());
    }

    let n = 200;
    let gamma = 2;
    let h = gen_multigraph(n, gamma, 11).unwrap();
    println!(
        "\nrandom multigraph: {} vertices, {} edges, gamma = {gamma}",
        h.n_vertices(),
        h.edges().len()
    );

    let cert = find_bounded_tree(&h).unwrap();
    let bound = 4.0 * ((n as f64).ln() / 1.5f64.ln() + 2.0);
    println!(
        "tree certificate: |V0| = {} (bound {:.1}), root {}, extras {:?}",
        cert.vertices.len(),
        bound,
        cert.root,
        cert.extra_edges
    );
    println!("verifies: {}", verify_tree_certificate(&h, &cert));

    let decomposed = build_decomposed_subgraph(&h).unwrap();
    let b = beta(gamma).unwrap() as usize;
    println!(
        "subgraph H0: {} edges over {} vertices; decomposition width {} <= 4(beta+3) = {}",
        decomposed.edge_ids.len(),
        decomposed.certificate.vertices.len(),
        decomposed.decomposition.width(),
        4 * (b + 3)
    );

    // Write the pair of files the CLI verifier consumes.
    let dir = std::env::temp_dir();
    let mgraph_path = dir.join("tree_lemma_example.mgraph");
    let cert_path = dir.join("tree_lemma_example.treecert");
    std::fs::write(&mgraph_path, write_multigraph(&h)).unwrap();
    std::fs::write(&cert_path, write_tree_certificate(&cert)).unwrap();
    println!(
        "\nwrote {} and {}\ncheck them with: setpack verify cert-tree {} {}",
        mgraph_path.display(),
        cert_path.display(),
        mgraph_path.display(),
        cert_path.display()
    );
}
