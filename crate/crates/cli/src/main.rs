mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::Failure;

/// Robust and distributionally robust Max-Cut, Max-DiCut and Max k-AllEqual
/// through SDP relaxation and randomized rounding.
#[derive(Parser, Debug)]
#[command(name = "robustcut", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the relaxation, round it and evaluate the rounded assignment.
    Solve(SolveArgs),
    /// Solve, then check the approximation guarantees against brute force.
    Verify(VerifyArgs),
    /// Re-round the factor stored in an earlier `solve` report.
    Round(RoundArgs),
    /// Write a random instance or an uncertainty set.
    Gen(GenArgs),
    /// Time the pipeline on generated instances.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Instance file: JSON, or an edge list (`i j w` per line, 1-based).
    #[arg(long)]
    pub instance: PathBuf,
    /// Read an edge list as a directed (DiCut) instance.
    #[arg(long)]
    pub directed: bool,
    /// Seed for every random stream.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rounding draws.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Rounding scheme; defaults to the one matching the problem kind.
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Report path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Include wall-clock timings in the report.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// Uncertainty set file (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Solver configuration file (JSON); flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Rank of the low-rank factor.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Relative duality-gap tolerance of the saddle solver.
    #[arg(long)]
    pub gap_tol: Option<f64>,
    /// Iteration cap of the outer loop (the SDP sweeps for singleton sets).
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Saddle-point method for non-singleton sets.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    solver: SolverArgs,
    /// CSV of per-term weights, relaxed coefficients and contributions.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    solver: SolverArgs,
    /// Random feasible weights checked on the lower side.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Rounded assignments checked on the upper side.
    #[arg(long, default_value_t = 200)]
    cuts: usize,
    /// Test hook: overwrite the relaxed value before certification.
    #[arg(long, hide = true)]
    corrupt_value: Option<f64>,
}

#[derive(Args, Debug)]
struct RoundArgs {
    #[command(flatten)]
    common: Common,
    /// Uncertainty set, for the worst-case value of the rounded assignment.
    #[arg(long)]
    spec: PathBuf,
    /// Report written by `solve`.
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Instance family.
    #[arg(long, value_enum, conflicts_with = "spec", required_unless_present = "spec")]
    kind: Option<GenKind>,
    /// Uncertainty-set family (needs `--instance`).
    #[arg(long, value_enum, requires = "instance")]
    spec: Option<GenSpec>,
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Edge (arc) probability.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Clause arity.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Number of clauses.
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = 1.0)]
    lo: f64,
    #[arg(long, default_value_t = 1.0)]
    hi: f64,
    /// Relative half-width of box and budget sets.
    #[arg(long, default_value_t = 0.2)]
    width: f64,
    /// Total relative deviation of budget sets.
    #[arg(long, default_value_t = 1.0)]
    budget: f64,
    /// Largest relative move of any coordinate in ellipsoids.
    #[arg(long, default_value_t = 0.3)]
    frac: f64,
    /// Support size of Wasserstein sets.
    #[arg(long, default_value_t = 3)]
    points: usize,
    /// Relative scatter of the support points.
    #[arg(long, default_value_t = 0.3)]
    spread: f64,
    #[arg(long, default_value_t = 0.1)]
    radius: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Instance sizes to time.
    #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, value_enum, default_value_t = GenSpec::Box)]
    spec: GenSpec,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeArg {
    Uniform,
    DicutUniform,
    AllequalBiased,
    SignPsd,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodArg {
    CuttingPlane,
    Supergradient,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    Gnp,
    Cycle,
    Digraph,
    Allequal,
    Signed,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenSpec {
    Singleton,
    Box,
    Budget,
    Ellipsoid,
    Wasserstein,
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("ROBUSTCUT_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow::anyhow!("ROBUSTCUT_THREADS must be a positive integer, got `{v}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().map_err(Failure::Input).and_then(|()| match cli.command {
        Command::Solve(a) => commands::solve(&a.common, &a.solver, a.csv.as_deref()),
        Command::Verify(a) => commands::verify(&a.common, &a.solver, a.samples, a.cuts, a.corrupt_value),
        Command::Round(a) => commands::round(&a.common, &a.spec, &a.report),
        Command::Gen(a) => commands::gen(&a),
        Command::Bench(a) => commands::bench(&a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("robustcut: {f}");
            ExitCode::from(f.code())
        }
    }
}
