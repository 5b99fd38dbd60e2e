//! Command-line front end: solving, generating, reducing, verifying and
//! benchmarking, all batch and non-interactive.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 verification failure,
//! 3 size/limit error. Budget-terminated solves still exit 0 and report
//! `status=budget`.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};

use crate::core::Packing;
use crate::hardness::{extract_clique, read_mcc, reduce_mcc, witness_packing};
use crate::instances::{gen_planted_3dm, gen_random, read_instance, write_instance};
use crate::solvers::{solve, SolveStatus, SolverConfig, SolverMode};
use crate::treelemma::{read_multigraph, read_tree_certificate, verify_tree_certificate};

#[derive(Parser)]
#[command(
    name = "setpack",
    about = "k-Set Packing solvers, generators and verifiers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and write a packing certificate.
    Solve(SolveArgs),
    /// Generate instances.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Reduce other problems to set packing.
    #[command(subcommand)]
    Reduce(ReduceCommand),
    /// Verify certificates and constructions.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Run solver modes over a directory of instances, printing CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolverOptions {
    /// Maximum swap size for swap/pwls modes.
    #[arg(long, default_value_t = 2)]
    r: usize,
    /// Pathwidth bound for pwls mode.
    #[arg(long, default_value_t = 2)]
    pw: usize,
    /// Coloring trials per search; derived from delta when omitted.
    #[arg(long)]
    trials: Option<u64>,
    /// Per-search failure probability for pwls mode.
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    /// Master random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    budget: Option<f64>,
}

impl SolverOptions {
    fn config(&self, mode: &str) -> Result<SolverConfig, CliError> {
        let mode = match mode {
            "greedy" => SolverMode::Greedy,
            "exact" => SolverMode::Exact,
            "swap" => SolverMode::SwapBruteforce { r: self.r },
            "pwls" => SolverMode::SwapPathwidth {
                r: self.r,
                pw: self.pw,
                trials: self.trials,
                seed: self.seed,
                delta: self.delta,
            },
            other => {
                return Err(CliError::Usage(format!(
                    "unknown mode `{other}` (expected greedy|exact|swap|pwls)"
                )))
            }
        };
        let mut config = SolverConfig::new(mode);
        config.time_budget = self.budget.map(Duration::from_secs_f64);
        Ok(config)
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file in `p sp` format.
    instance: PathBuf,
    /// greedy | exact | swap | pwls.
    #[arg(long)]
    mode: String,
    #[command(flatten)]
    options: SolverOptions,
    /// Certificate output path; defaults to `<instance>.cert`.
    #[arg(long)]
    cert: Option<PathBuf>,
    /// Write the applied-swap trace as JSON.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Uniform random k-sets.
    Random {
        #[arg(long)]
        n_elements: usize,
        #[arg(long)]
        n_sets: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Planted 3-Dimensional Matching.
    #[command(name = "3dm")]
    ThreeDm {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        noise: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum ReduceCommand {
    /// Multicolored Clique → 3-Set Packing.
    Mcc {
        /// Colored graph in `p mcc` format.
        graph: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Sidecar file mapping element ids to symbolic names.
        #[arg(long)]
        map: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Check that a certificate is a valid packing of the instance.
    Packing { instance: PathBuf, cert: PathBuf },
    /// Check a bounded-tree certificate against its multigraph.
    CertTree { mgraph: PathBuf, cert: PathBuf },
    /// Run the clique/packing round-trip checks on a small colored graph.
    Reduction { graph: PathBuf },
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of `*.sp` instances.
    suite: PathBuf,
    /// Comma-separated modes: greedy,exact,swap,pwls.
    #[arg(long)]
    modes: String,
    #[command(flatten)]
    options: SolverOptions,
}

enum CliError {
    Usage(String),
    Io(String),
    Verification(String),
    Limit(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Limit(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Verification(m) | CliError::Limit(m) => m,
        }
    }
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Entry point used by the binary: real stdout, process arguments.
pub fn run() -> i32 {
    let args: Vec<String> = std::env::args().collect();
    let mut stdout = std::io::stdout();
    run_from(args, &mut stdout)
}

/// Runs the CLI on explicit arguments, writing regular output to `out`.
/// Returns the process exit code.
pub fn run_from<I, S>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(err) => {
            // clap handles --help/--version as "errors" with exit code 0.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = write!(out, "{err}");
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.code()
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args, out),
        Command::Gen(args) => cmd_gen(args, out),
        Command::Reduce(args) => cmd_reduce(args, out),
        Command::Verify(args) => cmd_verify(args, out),
        Command::Bench(args) => cmd_bench(args, out),
    }
}

fn cmd_solve(args: SolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let family = read_instance(&read_to_string(&args.instance)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.instance.display())))?;
    let config = args.options.config(&args.mode)?;
    let outcome = solve(&family, &config).map_err(solver_error)?;
    let cert_path = args
        .cert
        .unwrap_or_else(|| with_extension(&args.instance, "cert"));
    let mut cert = String::new();
    for &index in outcome.packing.members() {
        let _ = writeln!(cert, "{index}");
    }
    write_file(&cert_path, &cert)?;
    let _ = writeln!(out, "size={}", outcome.packing.len());
    let _ = writeln!(out, "status={}", outcome.status.label());
    let _ = writeln!(out, "certificate={}", cert_path.display());
    if let Some(trace_path) = args.trace {
        let json = serde_json::to_string_pretty(&outcome.trace)
            .map_err(|e| CliError::Io(format!("cannot serialize trace: {e}")))?;
        write_file(&trace_path, &json)?;
    }
    Ok(())
}

fn with_extension(path: &Path, ext: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".");
    name.push(ext);
    PathBuf::from(name)
}

fn solver_error(err: crate::solvers::SolverError) -> CliError {
    use crate::solvers::SolverError;
    match err {
        SolverError::InvalidConfig { reason } => CliError::Usage(reason),
        SolverError::BudgetExceeded { incumbent } => CliError::Limit(format!(
            "budget exceeded; incumbent size {}",
            incumbent.len()
        )),
        other => CliError::Usage(other.to_string()),
    }
}

fn cmd_gen(command: GenCommand, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        GenCommand::Random {
            n_elements,
            n_sets,
            k,
            seed,
            output,
        } => {
            let family = gen_random(n_elements, n_sets, k, seed)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            write_file(&output, &write_instance(&family))?;
            let _ = writeln!(out, "wrote {}", output.display());
        }
        GenCommand::ThreeDm {
            m,
            noise,
            seed,
            output,
        } => {
            let (family, planted) =
                gen_planted_3dm(m, noise, seed).map_err(|e| CliError::Usage(e.to_string()))?;
            write_file(&output, &write_instance(&family))?;
            let _ = writeln!(out, "wrote {} optimum={planted}", output.display());
        }
    }
    Ok(())
}

fn cmd_reduce(command: ReduceCommand, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        ReduceCommand::Mcc { graph, output, map } => {
            let instance = read_mcc(&read_to_string(&graph)?)
                .map_err(|e| CliError::Usage(format!("{}: {e}", graph.display())))?;
            let reduction = reduce_mcc(&instance).map_err(|e| CliError::Usage(e.to_string()))?;
            write_file(&output, &write_instance(&reduction.family))?;
            if let Some(map_path) = map {
                write_file(&map_path, &reduction.write_name_map())?;
            }
            let _ = writeln!(
                out,
                "wrote {} n_elements={} n_sets={} f0={}",
                output.display(),
                reduction.family.n_elements(),
                reduction.family.n_sets(),
                reduction.f0.len()
            );
        }
    }
    Ok(())
}

fn cmd_verify(command: VerifyCommand, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        VerifyCommand::Packing { instance, cert } => {
            let family = read_instance(&read_to_string(&instance)?)
                .map_err(|e| CliError::Usage(format!("{}: {e}", instance.display())))?;
            let text = read_to_string(&cert)?;
            let mut members = Vec::new();
            for (offset, line) in text.lines().enumerate() {
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('c') {
                    continue;
                }
                let index: usize = trimmed.parse().map_err(|_| {
                    CliError::Usage(format!(
                        "{}:{}: bad set index `{trimmed}`",
                        cert.display(),
                        offset + 1
                    ))
                })?;
                members.push(index);
            }
            match Packing::new(&family, members) {
                Ok(packing) => {
                    let _ = writeln!(out, "ok size={}", packing.len());
                    Ok(())
                }
                Err(err) => Err(CliError::Verification(format!(
                    "certificate is not a valid packing: {err}"
                ))),
            }
        }
        VerifyCommand::CertTree { mgraph, cert } => {
            let graph = read_multigraph(&read_to_string(&mgraph)?)
                .map_err(|e| CliError::Usage(format!("{}: {e}", mgraph.display())))?;
            let certificate = read_tree_certificate(&read_to_string(&cert)?, &graph)
                .map_err(|e| CliError::Usage(format!("{}: {e}", cert.display())))?;
            if verify_tree_certificate(&graph, &certificate) {
                let _ = writeln!(
                    out,
                    "ok vertices={} tree_edges={}",
                    certificate.vertices.len(),
                    certificate.tree_edges.len()
                );
                Ok(())
            } else {
                Err(CliError::Verification(
                    "tree certificate failed verification".into(),
                ))
            }
        }
        VerifyCommand::Reduction { graph } => cmd_verify_reduction(&graph, out),
    }
}

/// Round-trip validation of the reduction at small scale: for every
/// multicolored clique, the witness packing is perfect and extraction
/// recovers the clique; the exact optimum is perfect iff a clique exists.
fn cmd_verify_reduction(graph: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let instance = read_mcc(&read_to_string(graph)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", graph.display())))?;
    let reduction = reduce_mcc(&instance).map_err(|e| CliError::Usage(e.to_string()))?;
    let padded = reduction.padded_instance();
    let cliques = padded
        .brute_force_cliques(200_000)
        .map_err(|e| CliError::Limit(format!("instance too large for round-trip: {e}")))?;
    for clique in &cliques {
        let witness = witness_packing(&reduction, clique)
            .map_err(|e| CliError::Verification(format!("witness failed for {clique:?}: {e}")))?;
        let recovered = extract_clique(&reduction, &witness)
            .map_err(|e| CliError::Verification(format!("extraction failed: {e}")))?;
        if &recovered != clique {
            return Err(CliError::Verification(format!(
                "round trip recovered {recovered:?}, expected {clique:?}"
            )));
        }
    }
    let exact = crate::solvers::exact_max_packing(&reduction.family, None)
        .map_err(|e| CliError::Limit(e.to_string()))?;
    let perfect = exact.len() == reduction.family.n_elements() / 3;
    if perfect != !cliques.is_empty() {
        return Err(CliError::Verification(format!(
            "perfect packing exists = {perfect}, cliques found = {}",
            cliques.len()
        )));
    }
    if perfect {
        let recovered = extract_clique(&reduction, &exact)
            .map_err(|e| CliError::Verification(format!("extraction failed: {e}")))?;
        let _ = writeln!(
            out,
            "ok cliques={} optimum={} extracted={recovered:?}",
            cliques.len(),
            exact.len()
        );
    } else {
        let _ = writeln!(
            out,
            "ok cliques=0 optimum={} (no perfect packing)",
            exact.len()
        );
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let modes: Vec<String> = args
        .modes
        .split(',')
        .map(|m| m.trim().to_string())
        .filter(|m| !m.is_empty())
        .collect();
    if modes.is_empty() {
        return Err(CliError::Usage("no modes given".into()));
    }
    let mut entries: Vec<PathBuf> = std::fs::read_dir(&args.suite)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", args.suite.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|path| path.extension().map(|e| e == "sp").unwrap_or(false))
        .collect();
    entries.sort();
    if entries.is_empty() {
        return Err(CliError::Usage(format!(
            "no .sp instances in {}",
            args.suite.display()
        )));
    }
    let _ = writeln!(
        out,
        "instance,mode,size,optimum_or_bound,ratio,wall_time_s,seed,status"
    );
    for path in entries {
        let family = read_instance(&read_to_string(&path)?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        // Optimum if the exact solver finishes within a short budget,
        // otherwise the packing-number upper bound |U| / s_min.
        let bound = match crate::solvers::exact_max_packing(
            &family,
            Some(Duration::from_secs(5)),
        ) {
            Ok(packing) => packing.len(),
            Err(_) => {
                let s_min = family.sets().iter().map(|s| s.len()).min().unwrap_or(1);
                family.n_elements() / s_min.max(1)
            }
        };
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        for mode in &modes {
            let config = args.options.config(mode)?;
            let started = Instant::now();
            let outcome = solve(&family, &config).map_err(solver_error)?;
            let elapsed = started.elapsed().as_secs_f64();
            let ratio = bound as f64 / outcome.packing.len().max(1) as f64;
            let status = match outcome.status {
                SolveStatus::Budget => "budget",
                _ => "ok",
            };
            let _ = writeln!(
                out,
                "{name},{mode},{},{bound},{ratio:.4},{elapsed:.4},{},{status}",
                outcome.packing.len(),
                args.options.seed
            );
        }
    }
    Ok(())
}
