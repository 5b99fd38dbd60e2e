//! Solvers and tooling for the k-Set Packing problem.
//!
//! Given a family of sets of size at most `k` over a finite universe, the
//! goal is to select a maximum number of pairwise disjoint sets. This crate
//! implements a local-search solver whose neighborhood consists of
//! *improving sets of bounded pathwidth*, searched with color coding, next
//! to classical baselines (greedy, brute-force swaps) and an exact
//! branch-and-bound oracle. It also ships the supporting machinery as
//! reusable pieces:
//!
//! - [`core`]: instances, packings, the conflict graph and swap semantics;
//! - [`pathdecomp`]: path decompositions, nice decompositions and an exact
//!   pathwidth oracle for small graphs;
//! - [`swapsearch`]: exhaustive improving-set enumeration (baseline and
//!   test oracle);
//! - [`colorcoding`]: the randomized bounded-pathwidth improving-set
//!   search;
//! - [`solvers`]: end-to-end algorithms and the local-search driver;
//! - [`treelemma`]: bounded-depth tree certificates in labeled multigraphs
//!   and the derived path decompositions;
//! - [`hardness`]: the Multicolored Clique reduction, usable as an
//!   instance generator with verified witness/extraction procedures;
//! - [`instances`]: file formats and instance generators;
//! - [`cli`]: the command-line front end used by the `setpack` binary.
//!
//! The `examples/` directory contains one runnable program per major
//! capability; start with `cargo run --example local_search_modes`.

pub mod cli;
pub mod colorcoding;
pub mod core;
pub mod hardness;
pub mod instances;
pub mod pathdecomp;
pub mod solvers;
pub mod swapsearch;
pub mod treelemma;

pub use crate::core::{ConflictGraph, ImprovingSet, Packing, SetFamily};
pub use crate::solvers::{SolveOutcome, SolveStatus, SolverConfig, SolverMode};
