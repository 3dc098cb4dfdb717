use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pdmeans::divergences::{
    bures_wasserstein_distance, log_det_alpha_divergence, phi_alpha_z, AlphaZ,
};
use pdmeans::io::{format_real, matrix_to_json, read_pd, read_tuple, tuple_to_json};
use pdmeans::linalg::{PdMatrix, PdRng};
use pdmeans::means::{
    arithmetic_mean, cartan_mean, harmonic_mean, power_mean, PdTuple, WeightVector,
};
use pdmeans::rightmean::right_mean;
use pdmeans::solver::{SolverConfig, SolverReport};
use pdmeans::verify::{run_suite, SuiteConfig};
use pdmeans::wasserstein::wasserstein_mean;
use pdmeans::{Error, ErrorKind};
use serde::Serialize;

/// Weighted means and divergences of positive definite matrices.
///
/// Exit status: 0 success, 1 verification found violations or solver
/// failures, 2 unreadable or malformed input, 3 parameter or domain error,
/// 4 solver did not converge.
#[derive(Parser, Debug)]
#[command(name = "pdmeans", version, about, long_about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute a weighted mean of the tuple in a JSON file.
    Mean(MeanArgs),
    /// Evaluate a divergence or distance between two matrices.
    Divergence(DivergenceArgs),
    /// Run the randomized theorem checks.
    Verify(VerifyArgs),
    /// Write a random weighted tuple.
    Gen(GenArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum MeanKind {
    Right,
    Power,
    Cartan,
    Wasserstein,
    Arithmetic,
    Harmonic,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum DivergenceKind {
    Phi,
    Bw,
    Logdet,
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Fixed-point tolerance on the relative residual.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Iteration budget.
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig, Error> {
        SolverConfig::new(self.tol, self.max_iter, 1.0)
    }
}

#[derive(Args, Debug)]
struct MeanArgs {
    kind: MeanKind,
    /// Weighted tuple JSON file.
    input: PathBuf,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    z: Option<f64>,
    /// Power-mean parameter, 0 < |t| ≤ 1.
    #[arg(long)]
    t: Option<f64>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write the mean here (and a `.report.json` sidecar); stdout otherwise.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct DivergenceArgs {
    kind: DivergenceKind,
    a: PathBuf,
    b: PathBuf,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    z: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Comma-separated theorem ids; all registered checks when omitted.
    #[arg(long, value_delimiter = ',')]
    theorems: Option<Vec<String>>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 4])]
    dims: Vec<usize>,
    /// Tuple sizes to sample from.
    #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 5])]
    ns: Vec<usize>,
    /// Condition numbers to sample from.
    #[arg(long, value_delimiter = ',', default_values_t = [10.0, 1e3])]
    cond: Vec<f64>,
    /// Fix alpha instead of sampling (requires --z).
    #[arg(long, requires = "z")]
    alpha: Option<f64>,
    #[arg(long, requires = "alpha")]
    z: Option<f64>,
    /// Also sample outside stated regions; such checks are informational.
    #[arg(long)]
    explore: bool,
    #[arg(long, default_value_t = pdmeans::verify::suite::HARNESS_TOL)]
    tol: f64,
    #[arg(long, default_value_t = pdmeans::verify::suite::HARNESS_MAX_ITER)]
    max_iter: usize,
    #[arg(long, default_value_t = pdmeans::verify::suite::DEFAULT_SLACK)]
    slack: f64,
    /// Worker threads; the report does not depend on this.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, short, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 10.0)]
    cond: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated weights; uniform when omitted.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Failure of a command, carrying its exit status.
enum Failure {
    Lib(Error),
    Violations,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Parse | ErrorKind::Io => 2,
        ErrorKind::Domain => 3,
        ErrorKind::Convergence | ErrorKind::Numerical => 4,
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn require(value: Option<f64>, flag: &str) -> Result<f64, Error> {
    value.ok_or_else(|| Error::Domain(format!("--{flag} is required for this kind")))
}

#[derive(Serialize)]
struct MeanReport<'a> {
    kind: &'a str,
    dim: usize,
    n: usize,
    #[serde(flatten)]
    solver: &'a SolverReport,
}

fn render_matrix(m: &PdMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.dim() {
        let row: Vec<String> = (0..m.dim())
            .map(|j| {
                let z = m.matrix()[(i, j)];
                format!("{:>24} {:+.16e}i", format_real(z.re), z.im)
            })
            .collect();
        out.push_str(&row.join("  "));
        out.push('\n');
    }
    out
}

fn compute_mean(
    args: &MeanArgs,
    w: &WeightVector,
    tuple: &PdTuple,
) -> Result<(PdMatrix, SolverReport), Error> {
    let cfg = args.solver.config()?;
    match args.kind {
        MeanKind::Right => {
            let p = AlphaZ::new(require(args.alpha, "alpha")?, require(args.z, "z")?)?;
            right_mean(&p, w, tuple, &cfg)
        }
        MeanKind::Power => power_mean(require(args.t, "t")?, w, tuple, &cfg),
        MeanKind::Cartan => cartan_mean(w, tuple, &cfg),
        MeanKind::Wasserstein => wasserstein_mean(w, tuple, &cfg),
        MeanKind::Arithmetic => Ok((arithmetic_mean(w, tuple)?, SolverReport::exact(0.0))),
        MeanKind::Harmonic => Ok((harmonic_mean(w, tuple)?, SolverReport::exact(0.0))),
    }
}

fn cmd_mean(args: MeanArgs) -> Result<(), Failure> {
    let (w, tuple) = read_tuple(&args.input)?;
    let kind = format!("{:?}", args.kind).to_lowercase();
    let (mean, report) = compute_mean(&args, &w, &tuple).inspect_err(|e| {
        if let Some(r) = e.solver_report() {
            log::error!(
                "{kind} mean: {} after {} iterations",
                r.status,
                r.iterations
            );
        }
    })?;
    let sidecar = MeanReport {
        kind: &kind,
        dim: tuple.dim(),
        n: tuple.len(),
        solver: &report,
    };
    let sidecar = serde_json::to_string_pretty(&sidecar).expect("report serializes") + "\n";
    log::info!(
        "{kind} mean: {} iterations, residual {:e}",
        report.iterations,
        report.final_residual
    );
    let body = match args.format {
        Format::Json => matrix_to_json(mean.matrix()),
        Format::Table => render_matrix(&mean),
    };
    write_or_print(args.output.as_deref(), &body)?;
    if let Some(out) = &args.output {
        let mut path = out.clone().into_os_string();
        path.push(".report.json");
        fs::write(PathBuf::from(path), sidecar).map_err(Error::from)?;
    }
    Ok(())
}

fn cmd_divergence(args: DivergenceArgs) -> Result<(), Failure> {
    let a = read_pd(&args.a)?;
    let b = read_pd(&args.b)?;
    let value = match args.kind {
        DivergenceKind::Phi => {
            let p = AlphaZ::new(require(args.alpha, "alpha")?, require(args.z, "z")?)?;
            phi_alpha_z(&p, &a, &b)?
        }
        DivergenceKind::Bw => bures_wasserstein_distance(&a, &b)?,
        DivergenceKind::Logdet => log_det_alpha_divergence(require(args.alpha, "alpha")?, &a, &b)?,
    };
    match args.format {
        Format::Table => println!("{}", format_real(value)),
        Format::Json => println!(
            "{{\"kind\": \"{}\", \"value\": {}}}",
            format!("{:?}", args.kind).to_lowercase(),
            format_real(value)
        ),
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let config = SuiteConfig {
        seed: args.seed,
        theorems: args
            .theorems
            .map(|ids| ids.into_iter().filter(|id| !id.is_empty()).collect()),
        trials: args.trials,
        dims: args.dims,
        ns: args.ns,
        conds: args.cond,
        params: args.alpha.zip(args.z),
        explore: args.explore,
        solver: SolverConfig::new(args.tol, args.max_iter, 1.0)?,
        slack: args.slack,
        jobs: args.jobs,
    };
    let report = run_suite(&config)?;
    let json = report.to_json();
    if let Some(path) = &args.report {
        fs::write(path, &json).map_err(Error::from)?;
    }
    match args.format {
        Format::Json => print!("{json}"),
        Format::Table => print!("{}", report.render_table()),
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Violations)
    }
}

fn cmd_gen(args: GenArgs) -> Result<(), Failure> {
    if args.n == 0 || args.dim == 0 {
        return Err(Error::Domain("--n and --dim must be positive".into()).into());
    }
    let weights = match args.weights {
        Some(w) if w.len() != args.n => {
            return Err(Error::LengthMismatch {
                what: "weights",
                expected: args.n,
                found: w.len(),
            }
            .into())
        }
        Some(w) => WeightVector::new(w)?,
        None => WeightVector::uniform(args.n)?,
    };
    let mut rng = PdRng::new(args.seed);
    let items = (0..args.n)
        .map(|_| rng.pd(args.dim, args.cond))
        .collect::<Result<Vec<_>, _>>()?;
    let tuple = PdTuple::new(items)?;
    write_or_print(args.output.as_deref(), &tuple_to_json(&weights, &tuple))?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PDMEANS_LOG", "warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Mean(a) => cmd_mean(a),
        Command::Divergence(a) => cmd_divergence(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violations) => {
            eprintln!("error: verification reported violations or solver failures");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
