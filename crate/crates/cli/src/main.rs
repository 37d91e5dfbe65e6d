use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{error, info, LevelFilter};
use serde::Serialize;

use pcapacity::constants::{c_d_gamma, c_d_monte_carlo};
use pcapacity::continuum::{lyons_lower_bound, QuadratureConfig};
use pcapacity::lattice::{build_lattice, capacity_with_options, kappa, upper_bound_test_function, LatticeSpec};
use pcapacity::network::read_edge_list;
use pcapacity::solver::{p1_capacity, solve_dirichlet, SolverConfig};
use pcapacity::{verify, Exponent};
use pcapacity_cli::record::{RunRecord, FULL_HEADER, SWEEP_HEADER};

const EXIT_INPUT: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;

#[derive(Parser)]
#[command(name = "pcapacity", version, about = "Discrete p-capacities of lattice boxes and finite networks")]
struct Cli {
    /// Log more to standard error (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity of one lattice box or one network file.
    Capacity(CapacityArgs),
    /// Capacities of a lattice box over a list of radii.
    Sweep(SweepArgs),
    /// The limiting constant c_d, by the Gamma formula and by Monte Carlo.
    Constant(ConstantArgs),
    /// Run the built-in verification suites.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Minimise the energy (upper side) and certify it.
    Dirichlet,
    /// Only the explicit flow and test-function bounds.
    Flow,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct SolveArgs {
    #[arg(long)]
    p: f64,
    #[arg(long, value_enum, default_value = "both")]
    method: Method,
    /// Largest accepted vertex residual.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_sweeps: usize,
    /// Gauss–Legendre points per axis for face fluxes.
    #[arg(long, default_value_t = 12)]
    quad_points: usize,
    #[arg(long, value_enum, default_value = "json")]
    out: OutFormat,
    /// Accepted for uniformity across commands; capacity runs are deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report wall_seconds as 0 so that repeated runs print identical bytes.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct CapacityArgs {
    #[command(flatten)]
    solve: SolveArgs,
    #[arg(long, conflicts_with = "graph", requires = "n")]
    dim: Option<usize>,
    #[arg(long, conflicts_with = "graph", requires = "dim")]
    n: Option<usize>,
    /// Edge-list file with SOURCE and SINK lines.
    #[arg(long, required_unless_present = "dim")]
    graph: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    solve: SolveArgs,
    #[arg(long)]
    dim: usize,
    /// Comma-separated increasing radii, e.g. 16,32,64.
    #[arg(long)]
    n_list: String,
}

#[derive(Args)]
struct ConstantArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    out: OutFormat,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

type CliResult<T> = Result<T, String>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();

    let result = match cli.command {
        Command::Capacity(args) => cmd_capacity(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Constant(args) => cmd_constant(&args),
        Command::Verify(args) => cmd_verify(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            error!("{msg}");
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn exponent(p: f64) -> CliResult<Exponent> {
    Exponent::new(p).map_err(|e| e.to_string())
}

fn solver_config(args: &SolveArgs, base: SolverConfig) -> SolverConfig {
    SolverConfig { tol_residual: args.tol, max_sweeps: args.max_sweeps, ..base }
}

fn quadrature(args: &SolveArgs) -> QuadratureConfig {
    QuadratureConfig::with_points(args.quad_points)
}

/// Computes one lattice record; the flag is `false` when the solver did not converge.
fn lattice_record(d: usize, n: usize, args: &SolveArgs) -> CliResult<(RunRecord, bool)> {
    let p = exponent(args.p)?;
    let spec = LatticeSpec::new(d, n, p).map_err(|e| e.to_string())?;
    let mut rec = RunRecord {
        d: Some(d),
        p: args.p,
        n: Some(n),
        cap: None,
        kappa: None,
        lower: None,
        upper: None,
        sweeps: 0,
        max_residual: None,
        wall_seconds: 0.0,
    };
    if args.p == 1.0 {
        let net = build_lattice(&spec).map_err(|e| e.to_string())?;
        let r = p1_capacity(&net).map_err(|e| e.to_string())?;
        rec.cap = Some(r.capacity);
        rec.kappa = kappa(&spec, r.capacity).ok();
        rec.lower = Some(r.dual);
        rec.upper = Some(r.capacity);
        return Ok((rec, true));
    }
    let quad = quadrature(args);
    quad.validate().map_err(|e| e.to_string())?;
    if args.method == Method::Flow {
        if args.p != d as f64 || d < 2 || n < 2 {
            return Err("--method flow needs p = dim ≥ 2 and n ≥ 2".into());
        }
        rec.lower = Some(lyons_lower_bound(&spec, &quad).map_err(|e| e.to_string())?);
        rec.upper = Some(upper_bound_test_function(&spec).map_err(|e| e.to_string())?.1);
        return Ok((rec, true));
    }
    let cfg = solver_config(args, SolverConfig::for_lattice(&spec));
    let quad = (args.method == Method::Both).then_some(&quad);
    let r = capacity_with_options(&spec, &cfg, quad).map_err(|e| e.to_string())?;
    rec.cap = Some(r.report.capacity);
    rec.kappa = r.kappa;
    rec.lower = r.lower();
    rec.upper = Some(r.upper());
    rec.sweeps = r.report.sweeps;
    rec.max_residual = Some(r.report.max_residual);
    Ok((rec, r.report.converged))
}

fn graph_record(path: &PathBuf, args: &SolveArgs) -> CliResult<(RunRecord, bool)> {
    let net = read_edge_list(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let p = exponent(args.p)?;
    let mut rec = RunRecord {
        d: None,
        p: args.p,
        n: None,
        cap: None,
        kappa: None,
        lower: None,
        upper: None,
        sweeps: 0,
        max_residual: None,
        wall_seconds: 0.0,
    };
    if args.p == 1.0 {
        let r = p1_capacity(&net).map_err(|e| e.to_string())?;
        rec.cap = Some(r.capacity);
        rec.lower = Some(r.dual);
        rec.upper = Some(r.capacity);
        return Ok((rec, true));
    }
    if args.method == Method::Flow {
        return Err("--method flow has no explicit flow for a network file; use dirichlet or both".into());
    }
    let cfg = solver_config(args, SolverConfig::default());
    let sol = solve_dirichlet(&net, p, &cfg).map_err(|e| e.to_string())?;
    rec.cap = Some(sol.report.capacity);
    rec.lower = sol.report.lower_bound;
    rec.upper = Some(sol.report.upper_bound);
    rec.sweeps = sol.report.sweeps;
    rec.max_residual = Some(sol.report.max_residual);
    Ok((rec, sol.report.converged))
}

fn timed<T>(no_timing: bool, f: impl FnOnce() -> CliResult<(RunRecord, T)>) -> CliResult<(RunRecord, T)> {
    let start = Instant::now();
    let (mut rec, extra) = f()?;
    rec.wall_seconds = if no_timing { 0.0 } else { start.elapsed().as_secs_f64() };
    Ok((rec, extra))
}

fn io_err(e: impl std::fmt::Display) -> String {
    format!("cannot write output: {e}")
}

fn write_csv<W: Write>(out: W, header: &[&str], rows: &[RunRecord]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io_err)?;
    for r in rows {
        w.write_record(r.csv_row(header)).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

fn cmd_capacity(args: &CapacityArgs) -> CliResult<u8> {
    let (rec, converged) = timed(args.solve.no_timing, || match (&args.graph, args.dim, args.n) {
        (Some(path), _, _) => graph_record(path, &args.solve),
        (None, Some(d), Some(n)) => lattice_record(d, n, &args.solve),
        _ => Err("give either --graph FILE or both --dim and --n".into()),
    })?;
    let stdout = io::stdout();
    match args.solve.out {
        OutFormat::Json => {
            let text = serde_json::to_string(&rec).map_err(io_err)?;
            writeln!(stdout.lock(), "{text}").map_err(io_err)?;
        }
        OutFormat::Csv => write_csv(stdout.lock(), &FULL_HEADER, &[rec])?,
    }
    Ok(if converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn parse_n_list(text: &str) -> CliResult<Vec<usize>> {
    let list = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| format!("`{s}` in --n-list is not a positive integer")))
        .collect::<CliResult<Vec<_>>>()?;
    if list.is_empty() {
        return Err("--n-list is empty".into());
    }
    if list.contains(&0) {
        return Err("radii must be positive".into());
    }
    if list.windows(2).any(|w| w[0] >= w[1]) {
        return Err("--n-list must be strictly increasing".into());
    }
    Ok(list)
}

fn cmd_sweep(args: &SweepArgs) -> CliResult<u8> {
    let radii = parse_n_list(&args.n_list)?;
    let stdout = io::stdout();
    let mut all_converged = true;
    match args.solve.out {
        OutFormat::Csv => {
            let mut w = csv::Writer::from_writer(stdout.lock());
            w.write_record(SWEEP_HEADER).map_err(io_err)?;
            w.flush().map_err(io_err)?;
            for &n in &radii {
                let (rec, converged) = timed(args.solve.no_timing, || lattice_record(args.dim, n, &args.solve))?;
                all_converged &= converged;
                w.write_record(rec.csv_row(&SWEEP_HEADER)).map_err(io_err)?;
                w.flush().map_err(io_err)?;
            }
        }
        OutFormat::Json => {
            let mut out = stdout.lock();
            write!(out, "[").map_err(io_err)?;
            for (i, &n) in radii.iter().enumerate() {
                let (rec, converged) = timed(args.solve.no_timing, || lattice_record(args.dim, n, &args.solve))?;
                all_converged &= converged;
                let sep = if i == 0 { "" } else { "," };
                write!(out, "{sep}\n{}", serde_json::to_string(&rec).map_err(io_err)?).map_err(io_err)?;
                out.flush().map_err(io_err)?;
            }
            writeln!(out, "\n]").map_err(io_err)?;
        }
    }
    Ok(if all_converged { 0 } else { EXIT_NOT_CONVERGED })
}

#[derive(Serialize)]
struct ConstantRecord {
    d: usize,
    gamma_formula: f64,
    monte_carlo: f64,
    stderr: f64,
    delta: f64,
    samples: u64,
    seed: u64,
}

fn cmd_constant(args: &ConstantArgs) -> CliResult<u8> {
    let exact = c_d_gamma(args.dim).map_err(|e| e.to_string())?;
    let (estimate, stderr) = c_d_monte_carlo(args.dim, args.samples, args.seed).map_err(|e| e.to_string())?;
    let rec = ConstantRecord {
        d: args.dim,
        gamma_formula: exact,
        monte_carlo: estimate,
        stderr,
        delta: estimate - exact,
        samples: args.samples,
        seed: args.seed,
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match args.out {
        OutFormat::Json => writeln!(out, "{}", serde_json::to_string(&rec).map_err(io_err)?).map_err(io_err)?,
        OutFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.serialize(&rec).map_err(io_err)?;
            w.flush().map_err(io_err)?;
        }
    }
    Ok(0)
}

fn cmd_verify(args: &VerifyArgs) -> CliResult<u8> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut all = true;
    for suite in verify::SUITES {
        let start = Instant::now();
        let r = (suite.run)(args.seed);
        info!("{} took {:.2}s", r.name, start.elapsed().as_secs_f64());
        all &= r.passed;
        let tag = if r.passed { "PASS" } else { "FAIL" };
        writeln!(out, "[{tag}] {}: {}", r.name, r.detail).map_err(io_err)?;
        out.flush().map_err(io_err)?;
    }
    Ok(if all { 0 } else { EXIT_NOT_CONVERGED })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_list_parsing() {
        assert_eq!(parse_n_list("16,32, 64").unwrap(), vec![16, 32, 64]);
        assert!(parse_n_list("").is_err());
        assert!(parse_n_list("8,4").is_err());
        assert!(parse_n_list("0,4").is_err());
        assert!(parse_n_list("a").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
