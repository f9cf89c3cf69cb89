//! `genequ` command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use genequ::bench::{comparison_series, rate_report, reproduce_table, run_grid, GridReport, GridSpec, Table};
use genequ::kantorovich::{certify, CertificateInput, MajorantParams};
use genequ::prelude::*;
use genequ::problems::builtin_with_params;
use serde::Serialize;

const EXIT_USAGE: u8 = 2;
const EXIT_FAILURE: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "genequ",
    version,
    about = "Josephy-Newton and Josephy-Halley solvers for generalized equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one method from a start point and emit the iteration trace.
    Solve(SolveArgs),
    /// Run one method and join the trace with e_k, r_k and L_k.
    Rate(SolveArgs),
    /// Evaluate the semilocal majorant certificate.
    Certify(CertifyArgs),
    /// Classify a uniform grid of start points.
    Grid(GridArgs),
    /// Regenerate a tabulated or plotted experiment.
    Repro(ReproArgs),
}

#[derive(Args, Debug, Clone)]
struct PrecisionArgs {
    /// Significant decimal digits of the working precision.
    #[arg(long, env = "GE_DIGITS", default_value_t = 400)]
    digits: u32,
    /// Stopping tolerance on the residual distance.
    #[arg(long, default_value = "1e-300")]
    tol: String,
    /// Iteration cap.
    #[arg(long = "max-iter", default_value_t = 200)]
    max_iter: usize,
}

#[derive(Args, Debug, Clone)]
struct ProblemArgs {
    /// Built-in problem: ex1i, ex1ii, ex2i, ex2ii.
    #[arg(long)]
    problem: String,
    /// Override the parameter p (two-variable problems).
    #[arg(long)]
    p: Option<String>,
    /// Override the parameter q1 (two-variable problems).
    #[arg(long)]
    q1: Option<String>,
    /// Override the parameter q2 (two-variable problems).
    #[arg(long)]
    q2: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Newton,
    Halley,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Newton => Method::Newton,
            MethodArg::Halley => Method::Halley,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Halley)]
    method: MethodArg,
    /// Comma-separated start point; defaults to the problem's registered start.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[command(flatten)]
    precision: PrecisionArgs,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[arg(long)]
    kappa: String,
    #[arg(long)]
    l1: String,
    #[arg(long)]
    l2: String,
    #[arg(long)]
    eta: String,
    /// Domain radius.
    #[arg(long)]
    a: String,
    /// Range radius.
    #[arg(long)]
    b: String,
    /// Norm of the initial residual element.
    #[arg(long, alias = "y0")]
    y0norm: String,
    /// Terms of the majorant sequences.
    #[arg(long, default_value_t = genequ::kantorovich::DEFAULT_CERTIFY_STEPS)]
    steps: usize,
    #[arg(long, env = "GE_DIGITS", default_value_t = 400)]
    digits: u32,
    /// JSON report path; printed after the table when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Interval `a,b` used for both axes.
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,
    /// Points per axis.
    #[arg(long, default_value_t = GridSpec::DEFAULT_N)]
    n: usize,
    #[command(flatten)]
    precision: PrecisionArgs,
    /// Drop the wall-time columns so the CSV is byte-reproducible.
    #[arg(long)]
    no_timing: bool,
    /// CSV path; the summary goes to `<out>.summary.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Artifact {
    Table1,
    Table2,
    Table3,
    Fig1,
    Fig2,
    Fig3,
}

#[derive(Args, Debug)]
struct ReproArgs {
    #[arg(value_enum)]
    artifact: Artifact,
    #[command(flatten)]
    precision: PrecisionArgs,
    /// Grid points per axis for fig2/fig3.
    #[arg(long, default_value_t = GridSpec::DEFAULT_N)]
    n: usize,
    /// Grid figures at 120 digits and tolerance 1e-100.
    #[arg(long)]
    desk: bool,
    /// Output file; stdout when absent. Required for fig2/fig3.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Solver(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DimensionMismatch { .. }
            | Error::InvalidPrecision(_)
            | Error::Parse(_)
            | Error::UnknownProblem(_)
            | Error::UnknownParameter(_)
            | Error::InvalidArgument(_) => Failure::Usage(e.into()),
            _ => Failure::Solver(e.into()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Solver(e.into())
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(anyhow::anyhow!(msg.into()))
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Whether the run met its goal; a non-converged trace is still written.
enum Outcome {
    Ok,
    NotConverged(String),
}

fn solve_config(method: Method, prec: &PrecisionArgs) -> CliResult<(SolveConfig, PrecisionContext)> {
    let ctx = PrecisionContext::new(prec.digits)?;
    let tol = ctx.parse(&prec.tol)?;
    let cfg = SolveConfig {
        method,
        tol,
        max_iter: prec.max_iter,
        digits: ctx.digits(),
    };
    cfg.validate()?;
    Ok((cfg, ctx))
}

fn load_problem(args: &ProblemArgs, ctx: PrecisionContext) -> CliResult<ProblemInstance> {
    let overrides: Vec<(&str, &str)> = [("p", &args.p), ("q1", &args.q1), ("q2", &args.q2)]
        .into_iter()
        .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
        .collect();
    Ok(builtin_with_params(&args.problem, ctx, &overrides)?)
}

fn parse_vector(text: &str, ctx: &PrecisionContext) -> CliResult<Vector> {
    let parts = text
        .split(',')
        .map(|s| ctx.parse(s))
        .collect::<genequ::Result<Vec<_>>>()?;
    Ok(Vector::new(parts))
}

fn parse_range(text: &str, ctx: &PrecisionContext) -> CliResult<(Scalar, Scalar)> {
    let v = parse_vector(text, ctx)?;
    if v.dim() != 2 {
        return Err(usage(format!("--range expects `a,b`, got {text:?}")));
    }
    Ok((v[0].clone(), v[1].clone()))
}

/// Writes through a temporary file in the target directory so a failed run
/// never leaves a truncated file behind.
fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))
        .map_err(Failure::Solver)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(Failure::Solver)?;
    Ok(())
}

fn emit(out: Option<&Path>, contents: &str) -> CliResult<()> {
    match out {
        Some(path) => write_atomic(path, contents),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes())?;
            Ok(())
        }
    }
}

fn status_outcome(trace: &IterationTrace) -> Outcome {
    match trace.status {
        Status::Converged => Outcome::Ok,
        s => Outcome::NotConverged(format!(
            "{} on {} stopped with status {s:?} after {} iterations (residual {})",
            trace.config.method,
            trace.problem,
            trace.iterations(),
            trace.final_residual().to_sci_string(2)
        )),
    }
}

fn cmd_solve(args: &SolveArgs) -> CliResult<Outcome> {
    let (cfg, ctx) = solve_config(args.method.into(), &args.precision)?;
    let problem = load_problem(&args.problem, ctx)?;
    let x0 = start_point(args, &problem, &ctx)?;
    let trace = run(&problem, &x0, &cfg)?;
    let text = match args.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut s = trace.to_json();
            s.push('\n');
            s
        }
        Format::Csv => trace.to_csv(),
    };
    emit(args.out.as_deref(), &text)?;
    Ok(status_outcome(&trace))
}

fn start_point(args: &SolveArgs, problem: &ProblemInstance, ctx: &PrecisionContext) -> CliResult<Vector> {
    let x0 = match &args.x0 {
        Some(text) => parse_vector(text, ctx)?,
        None => problem
            .default_start
            .clone()
            .ok_or_else(|| usage("--x0 is required for this problem"))?,
    };
    if x0.dim() != problem.dim() {
        return Err(usage(format!(
            "--x0 has {} components but {} has dimension {}",
            x0.dim(),
            problem.name,
            problem.dim()
        )));
    }
    Ok(x0)
}

#[derive(Serialize)]
struct RateJson<'a> {
    trace: &'a IterationTrace,
    estimates: &'a [genequ::rates::RateEstimate],
}

fn cmd_rate(args: &SolveArgs) -> CliResult<Outcome> {
    let (cfg, ctx) = solve_config(args.method.into(), &args.precision)?;
    let problem = load_problem(&args.problem, ctx)?;
    let x0 = start_point(args, &problem, &ctx)?;
    let report = rate_report(&problem, &x0, &cfg)?;
    let text = match args.format.unwrap_or(Format::Csv) {
        Format::Csv => report.to_csv(),
        Format::Json => {
            let body = RateJson {
                trace: &report.trace,
                estimates: &report.estimates,
            };
            serde_json::to_string_pretty(&body).expect("report serializes") + "\n"
        }
    };
    emit(args.out.as_deref(), &text)?;
    Ok(status_outcome(&report.trace))
}

fn cmd_certify(args: &CertifyArgs) -> CliResult<Outcome> {
    let ctx = PrecisionContext::new(args.digits)?;
    let p = |s: &str| ctx.parse(s);
    let params = MajorantParams::new(p(&args.kappa)?, p(&args.l1)?, p(&args.l2)?, p(&args.eta)?)?;
    let input = CertificateInput {
        params,
        a: p(&args.a)?,
        b: p(&args.b)?,
        y0_norm: p(&args.y0norm)?,
    };
    if !input.a.is_positive() || !input.b.is_positive() || input.y0_norm.is_negative() {
        return Err(usage("--a and --b must be positive and --y0norm nonnegative"));
    }
    if args.steps == 0 {
        return Err(usage("--steps must be at least 1"));
    }
    let report = certify(&input, args.steps)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    let mut text = format!("eta_max = {}\n", report.eta_max.to_sig_string(10));
    text.push_str(&report.table());
    match &args.out {
        Some(path) => {
            write_atomic(path, &json)?;
            emit(None, &text)?;
        }
        None => emit(None, &(text + &json))?,
    }
    Ok(Outcome::Ok)
}

fn write_grid(report: &GridReport, out: &Path, with_timing: bool) -> CliResult<()> {
    let mut summary_path = out.as_os_str().to_owned();
    summary_path.push(".summary.json");
    let summary = report.summary_json() + "\n";
    write_atomic(out, &report.to_csv(with_timing))?;
    write_atomic(Path::new(&summary_path), &summary)?;
    let counts = report.case_counts();
    eprintln!(
        "{}: {} cells, case counts 0:{} 1:{} 2:{} 3:{}",
        report.spec.problem,
        report.cells.len(),
        counts[0],
        counts[1],
        counts[2],
        counts[3]
    );
    Ok(())
}

fn cmd_grid(args: &GridArgs) -> CliResult<Outcome> {
    let (cfg, ctx) = solve_config(Method::Halley, &args.precision)?;
    // validates the name and parameters before any cell runs
    let problem = load_problem(&args.problem, ctx)?;
    if problem.dim() != 2 {
        return Err(usage(format!(
            "grid needs a two-variable problem, {} has dimension {}",
            problem.name,
            problem.dim()
        )));
    }
    if args.problem.p.is_some() || args.problem.q1.is_some() || args.problem.q2.is_some() {
        return Err(usage("grid runs the registered parameters; drop --p/--q1/--q2"));
    }
    let mut spec = GridSpec::new(&args.problem.problem, cfg);
    spec.n_per_axis = args.n;
    if let Some(range) = &args.range {
        let r = parse_range(range, &ctx)?;
        spec.x_range = r.clone();
        spec.y_range = r;
    }
    let report = run_grid(&spec)?;
    write_grid(&report, &args.out, !args.no_timing)?;
    Ok(Outcome::Ok)
}

fn cmd_repro(args: &ReproArgs) -> CliResult<Outcome> {
    let (cfg, ctx) = solve_config(Method::Halley, &args.precision)?;
    let table = match args.artifact {
        Artifact::Table1 => Some(Table::Table1),
        Artifact::Table2 => Some(Table::Table2),
        Artifact::Table3 => Some(Table::Table3),
        _ => None,
    };
    if let Some(table) = table {
        let report = reproduce_table(table, &cfg)?;
        emit(args.out.as_deref(), &report.to_csv())?;
        return Ok(status_outcome(&report.trace));
    }
    match args.artifact {
        Artifact::Fig1 => {
            let problem = builtin("ex2i", ctx)?;
            let series = comparison_series(&problem, &Table::Table3.start(&ctx), &cfg)?;
            emit(args.out.as_deref(), &series.to_csv())?;
        }
        _ => {
            let out = args.out.as_deref().ok_or_else(|| usage("fig2/fig3 need --out"))?;
            let name = if args.artifact == Artifact::Fig2 {
                "ex2i"
            } else {
                "ex2ii"
            };
            let mut spec = if args.desk {
                GridSpec::desk_profile(name, args.n)
            } else {
                GridSpec::new(name, cfg)
            };
            spec.n_per_axis = args.n;
            spec.cfg.max_iter = args.precision.max_iter;
            let report = run_grid(&spec)?;
            write_grid(&report, out, true)?;
        }
    }
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Rate(a) => cmd_rate(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Grid(a) => cmd_grid(a),
        Command::Repro(a) => cmd_repro(a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged(msg)) => {
            eprintln!("genequ: {msg}");
            ExitCode::from(EXIT_FAILURE)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("genequ: usage error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("genequ: {e:#}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
