//! End-to-end tests of the command-line interface, run in-process through
//! `cli::run_from`.

use std::path::{Path, PathBuf};

use setpack::cli::run_from;

fn run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let full: Vec<String> = std::iter::once("setpack".to_string())
        .chain(args.iter().map(|s| s.to_string()))
        .collect();
    let code = run_from(full, &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn path_str(path: &Path) -> String {
    path.to_string_lossy().into_owned()
}

#[test]
fn solve_exact_on_e1() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("e1.cert");
    let (code, out) = run(&[
        "solve",
        &path_str(&golden("e1.sp")),
        "--mode",
        "exact",
        "--cert",
        &path_str(&cert),
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("size=2"), "{out}");
    assert!(out.contains("status=optimal"), "{out}");
    // The certificate passes verification.
    let (code, out) = run(&[
        "verify",
        "packing",
        &path_str(&golden("e1.sp")),
        &path_str(&cert),
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("ok size=2"), "{out}");
}

#[test]
fn solve_all_modes_produce_verified_certificates() {
    let dir = tempfile::tempdir().unwrap();
    for mode in ["greedy", "exact", "swap", "pwls"] {
        let cert = dir.path().join(format!("{mode}.cert"));
        let (code, out) = run(&[
            "solve",
            &path_str(&golden("e1.sp")),
            "--mode",
            mode,
            "--cert",
            &path_str(&cert),
        ]);
        assert_eq!(code, 0, "mode {mode}: {out}");
        let (code, _) = run(&[
            "verify",
            "packing",
            &path_str(&golden("e1.sp")),
            &path_str(&cert),
        ]);
        assert_eq!(code, 0, "mode {mode} certificate should verify");
    }
}

#[test]
fn verify_packing_rejects_overlapping_sets() {
    let dir = tempfile::tempdir().unwrap();
    // S1 = {1,4,5} and S3 = {4,5,6} intersect.
    let cert = dir.path().join("bad.cert");
    std::fs::write(&cert, "1\n3\n").unwrap();
    let (code, _) = run(&[
        "verify",
        "packing",
        &path_str(&golden("e1.sp")),
        &path_str(&cert),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn reduce_then_solve_k4() {
    let dir = tempfile::tempdir().unwrap();
    let sp = dir.path().join("k4.sp");
    let map = dir.path().join("k4.map");
    let (code, out) = run(&[
        "reduce",
        "mcc",
        &path_str(&golden("k4.mcc")),
        "-o",
        &path_str(&sp),
        "--map",
        &path_str(&map),
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("n_elements=57"), "{out}");
    assert!(out.contains("n_sets=37"), "{out}");
    assert!(out.contains("f0=18"), "{out}");
    let map_text = std::fs::read_to_string(&map).unwrap();
    assert!(map_text.starts_with("element 1 x_1\n"));

    let cert = dir.path().join("k4.cert");
    let (code, out) = run(&[
        "solve",
        &path_str(&sp),
        "--mode",
        "exact",
        "--cert",
        &path_str(&cert),
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("size=19"), "{out}");
}

#[test]
fn verify_reduction_roundtrip() {
    let (code, out) = run(&["verify", "reduction", &path_str(&golden("k4.mcc"))]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("cliques=1"), "{out}");
    assert!(out.contains("optimum=19"), "{out}");
}

#[test]
fn gen_random_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("random.sp");
    let (code, _) = run(&[
        "gen",
        "random",
        "--n-elements",
        "7",
        "--n-sets",
        "4",
        "--k",
        "3",
        "--seed",
        "1",
        "-o",
        &path_str(&path),
    ]);
    assert_eq!(code, 0);
    let generated = std::fs::read_to_string(&path).unwrap();
    let frozen = std::fs::read_to_string(golden("random_7_4_3_seed1.sp")).unwrap();
    assert_eq!(generated, frozen);
}

#[test]
fn gen_3dm_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("planted.sp");
    let (code, out) = run(&[
        "gen",
        "3dm",
        "--m",
        "3",
        "--noise",
        "2",
        "--seed",
        "7",
        "-o",
        &path_str(&path),
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("optimum=3"), "{out}");
    let generated = std::fs::read_to_string(&path).unwrap();
    let frozen = std::fs::read_to_string(golden("planted3dm_3_2_seed7.sp")).unwrap();
    assert_eq!(generated, frozen);
}

#[test]
fn tree_certificate_flow() {
    let dir = tempfile::tempdir().unwrap();
    let h = setpack::treelemma::gen_multigraph(20, 2, 3).unwrap();
    let mgraph = dir.path().join("g.mgraph");
    std::fs::write(&mgraph, setpack::treelemma::write_multigraph(&h)).unwrap();
    let cert = setpack::treelemma::find_bounded_tree(&h).unwrap();
    let cert_path = dir.path().join("g.treecert");
    std::fs::write(&cert_path, setpack::treelemma::write_tree_certificate(&cert)).unwrap();
    let (code, out) = run(&[
        "verify",
        "cert-tree",
        &path_str(&mgraph),
        &path_str(&cert_path),
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.starts_with("ok"), "{out}");

    // Tampering with the witness edges must fail verification.
    let text = std::fs::read_to_string(&cert_path).unwrap();
    let tampered: String = text
        .lines()
        .map(|line| {
            if line.starts_with('x') {
                format!("x 1 1\n")
            } else {
                format!("{line}\n")
            }
        })
        .collect();
    std::fs::write(&cert_path, tampered).unwrap();
    let (code, _) = run(&[
        "verify",
        "cert-tree",
        &path_str(&mgraph),
        &path_str(&cert_path),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn bench_rows_are_deterministic_modulo_walltime() {
    let dir = tempfile::tempdir().unwrap();
    for (name, seed) in [("a.sp", 10u64), ("b.sp", 11)] {
        let family = setpack::instances::gen_random(9, 8, 3, seed).unwrap();
        std::fs::write(
            dir.path().join(name),
            setpack::instances::write_instance(&family),
        )
        .unwrap();
    }
    let args = [
        "bench",
        &path_str(dir.path()),
        "--modes",
        "greedy,swap,pwls",
        "--seed",
        "5",
        "--trials",
        "500",
    ];
    let (code_a, out_a) = run(&args);
    let (code_b, out_b) = run(&args);
    assert_eq!(code_a, 0, "{out_a}");
    assert_eq!(code_b, 0);
    let strip = |text: &str| -> Vec<Vec<String>> {
        text.lines()
            .map(|line| {
                line.split(',')
                    .enumerate()
                    .filter(|(i, _)| *i != 5) // wall_time_s column
                    .map(|(_, field)| field.to_string())
                    .collect()
            })
            .collect()
    };
    assert_eq!(strip(&out_a), strip(&out_b));
    assert!(out_a.starts_with("instance,mode,size,optimum_or_bound,ratio,wall_time_s,seed,status"));
    // 1 header + 2 instances x 3 modes.
    assert_eq!(out_a.lines().count(), 7);
}

#[test]
fn usage_errors_exit_one() {
    let (code, _) = run(&["solve", "/nonexistent/file.sp", "--mode", "exact"]);
    assert_eq!(code, 1);
    let (code, _) = run(&["frobnicate"]);
    assert_eq!(code, 1);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.sp");
    std::fs::write(&bad, "p sp 3 1 3\ns 1 1 2\n").unwrap();
    let (code, _) = run(&["solve", &path_str(&bad), "--mode", "greedy"]);
    assert_eq!(code, 1);
}

#[test]
fn trace_is_written_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    // Greedy trap: swap mode must apply one swap.
    let family = setpack::core::SetFamily::new(
        7,
        3,
        vec![vec![1, 2, 3], vec![1, 4, 5], vec![2, 6, 7]],
    )
    .unwrap();
    let sp = dir.path().join("trap.sp");
    std::fs::write(&sp, setpack::instances::write_instance(&family)).unwrap();
    let trace = dir.path().join("trap.trace.json");
    let (code, out) = run(&[
        "solve",
        &path_str(&sp),
        "--mode",
        "swap",
        "--r",
        "2",
        "--trace",
        &path_str(&trace),
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("size=2"), "{out}");
    let parsed: Vec<setpack::solvers::AppliedSwap> =
        serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(parsed.len(), 1);
    assert_eq!(parsed[0].swap.sets(), &[1, 2]);
    // Replay the trace against the instance.
    let mut packing = setpack::solvers::greedy_maximal(&family);
    for step in &parsed {
        packing = setpack::core::apply_swap(&family, &packing, &step.swap).unwrap();
        assert_eq!(packing.len(), step.size_after);
    }
    assert_eq!(packing.len(), 2);
}
