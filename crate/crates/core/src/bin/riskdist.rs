use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use riskdist::counterexample::{
    verify_median_counterexample, verify_mode_counterexample, CounterexampleReport,
};
use riskdist::dist::Family;
use riskdist::mapping::{
    map_family, map_generic, mean_cstat_of, MapOptions, MeanCstat, SolveReport,
};
use riskdist::quad::DEFAULT_TOL;
use riskdist::sim::{grid_values, run_grid, run_grid_with_threads, write_csv, SimCell, SimGrid};
use riskdist::special::{logit, std_normal_quantile};
use riskdist::Error;

const SCHEMA_VERSION: u32 = 1;

const EXIT_USAGE: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_NO_CONVERGENCE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "riskdist",
    version,
    about = "Risk distributions on [0, 1] from a mean and a c-statistic"
)]
struct Cli {
    #[command(flatten)]
    solver: SolverArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SolverArgs {
    /// Absolute tolerance of the adaptive quadrature
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    quad_tol: f64,

    /// Iteration cap for the root finder / simplex search
    #[arg(long, global = true)]
    max_iter: Option<usize>,
}

impl SolverArgs {
    fn options(&self) -> Result<MapOptions<f64>, Error> {
        if !(self.quad_tol > 0.0 && self.quad_tol.is_finite()) {
            return Err(Error::Domain(format!(
                "--quad-tol must be positive, got {}",
                self.quad_tol
            )));
        }
        if self.max_iter == Some(0) {
            return Err(Error::Domain("--max-iter must be at least 1".into()));
        }
        Ok(MapOptions {
            quad_tol: self.quad_tol,
            max_iter: self.max_iter,
            ..MapOptions::default()
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the parameters of a family with the given mean and c-statistic
    Map {
        #[arg(long, value_enum)]
        family: MapFamily,
        #[arg(long)]
        mean: f64,
        #[arg(long)]
        cstat: f64,
        /// Family searched by the generic least-squares solver
        #[arg(long, value_enum, default_value = "beta")]
        base: NamedFamily,
        /// Starting parameters for the generic solver
        #[arg(long, value_delimiter = ',', num_args = 2, value_names = ["P1", "P2"])]
        start: Option<Vec<f64>>,
        #[arg(long)]
        json: bool,
    },
    /// Mean and c-statistic of a family member
    Eval {
        #[arg(long, value_enum)]
        family: NamedFamily,
        #[arg(long, allow_negative_numbers = true)]
        p1: f64,
        #[arg(long, allow_negative_numbers = true)]
        p2: f64,
        #[arg(long)]
        json: bool,
    },
    /// Monte-Carlo accuracy study over a grid of (m, c), written as CSV
    Grid(GridArgs),
    /// Verify that mode or median together with c do not identify a distribution
    Counterexample {
        #[arg(long, value_enum)]
        kind: CounterexampleKind,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct GridArgs {
    /// Comma-separated families
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "beta,logitnorm,probitnorm"
    )]
    families: Vec<NamedFamily>,
    #[arg(long, default_value_t = 0.1)]
    m_from: f64,
    #[arg(long, default_value_t = 0.5)]
    m_to: f64,
    #[arg(long, default_value_t = 0.2)]
    m_step: f64,
    #[arg(long, default_value_t = 0.6)]
    c_from: f64,
    #[arg(long, default_value_t = 0.9)]
    c_to: f64,
    #[arg(long, default_value_t = 0.15)]
    c_step: f64,
    /// Full grid m = 0.01..0.50, c = 0.51..0.99 in steps of 0.01
    #[arg(long, conflicts_with_all = ["m_from", "m_to", "m_step", "c_from", "c_to", "c_step"])]
    full: bool,
    /// Target standard error of the estimated mean and c-statistic
    #[arg(long, default_value_t = 0.001)]
    se: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MapFamily {
    Beta,
    Logitnorm,
    Probitnorm,
    Generic,
}

#[derive(Clone, Copy, ValueEnum)]
enum NamedFamily {
    Beta,
    Logitnorm,
    Probitnorm,
}

impl From<NamedFamily> for Family {
    fn from(f: NamedFamily) -> Self {
        match f {
            NamedFamily::Beta => Family::Beta,
            NamedFamily::Logitnorm => Family::LogitNormal,
            NamedFamily::Probitnorm => Family::ProbitNormal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CounterexampleKind {
    Mode,
    Median,
}

enum Failure {
    Domain(String),
    NoConvergence(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Degenerate(_) => Failure::Domain(e.to_string()),
            Error::Bracket { .. } | Error::NoConvergence { .. } | Error::NonFinite(_) => {
                Failure::NoConvergence(e.to_string())
            }
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Domain(format!("i/o error: {e}"))
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = cli
        .solver
        .options()
        .map_err(Failure::from)
        .and_then(|opts| run(cli.command, &opts));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_NO_CONVERGENCE),
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DOMAIN)
        }
        Err(Failure::NoConvergence(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_NO_CONVERGENCE)
        }
    }
}

fn run(command: Command, opts: &MapOptions<f64>) -> Outcome {
    match command {
        Command::Map {
            family,
            mean,
            cstat,
            base,
            start,
            json,
        } => map(family, mean, cstat, base.into(), start, json, opts),
        Command::Eval {
            family,
            p1,
            p2,
            json,
        } => eval(family.into(), p1, p2, json, opts),
        Command::Grid(args) => grid(args, opts),
        Command::Counterexample { kind, a, json } => counterexample(kind, a, json),
    }
}

fn params_object(family: Family, p1: f64, p2: f64) -> Value {
    let (n1, n2) = family.param_names();
    let mut params = Map::new();
    params.insert(n1.into(), json!(p1));
    params.insert(n2.into(), json!(p2));
    Value::Object(params)
}

fn print_json(value: &Value) -> io::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)
}

fn default_start(family: Family, m: f64) -> Result<[f64; 2], Error> {
    Ok(match family {
        Family::Beta => [1.0, (1.0 - m) / m],
        Family::LogitNormal => [logit(m)?, 1.0],
        Family::ProbitNormal => [std_normal_quantile(m)?, 1.0],
    })
}

fn map(
    family: MapFamily,
    mean: f64,
    cstat: f64,
    base: Family,
    start: Option<Vec<f64>>,
    json: bool,
    opts: &MapOptions<f64>,
) -> Outcome {
    let mc = MeanCstat::new(mean, cstat)?;
    let (name, family, report): (&str, Family, SolveReport<f64, [f64; 2]>) = match family {
        MapFamily::Generic => {
            let start = match start {
                Some(v) => [v[0], v[1]],
                None => default_start(base, mean)?,
            };
            ("generic", base, map_generic(&base, &mc, start, opts)?)
        }
        named => {
            let family = match named {
                MapFamily::Beta => Family::Beta,
                MapFamily::Logitnorm => Family::LogitNormal,
                _ => Family::ProbitNormal,
            };
            let report = map_family(family, &mc, opts)?;
            let report = report.map_params(|p| {
                let (p1, p2) = p.values();
                [p1, p2]
            });
            (family.name(), family, report)
        }
    };
    let [p1, p2] = report.params;
    let (n1, n2) = family.param_names();
    if json {
        print_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "map",
            "solver": name,
            "family": family,
            "mean": mean,
            "cstat": cstat,
            "params": params_object(family, p1, p2),
            "residual_i1": report.residual_i1,
            "residual_i2": report.residual_i2,
            "iterations": report.iterations,
            "converged": report.converged,
            "warning": report.warning,
        }))?;
    } else {
        println!("family: {family}");
        println!("{n1}: {p1}");
        println!("{n2}: {p2}");
        println!("residual_i1: {:e}", report.residual_i1);
        println!("residual_i2: {:e}", report.residual_i2);
        println!("iterations: {}", report.iterations);
        println!("converged: {}", report.converged);
        if let Some(w) = &report.warning {
            eprintln!("warning: {w}");
        }
    }
    Ok(report.converged)
}

fn eval(family: Family, p1: f64, p2: f64, json: bool, opts: &MapOptions<f64>) -> Outcome {
    let params = family.params(p1, p2)?;
    let mc = mean_cstat_of(&params, opts.quad_tol)?;
    if json {
        print_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "eval",
            "family": family,
            "params": params_object(family, p1, p2),
            "mean": mc.m(),
            "cstat": mc.c(),
        }))?;
    } else {
        println!("m: {}", mc.m());
        println!("c: {}", mc.c());
    }
    Ok(true)
}

fn grid(args: GridArgs, opts: &MapOptions<f64>) -> Outcome {
    let (m_range, c_range) = if args.full {
        ((0.01, 0.50, 0.01), (0.51, 0.99, 0.01))
    } else {
        (
            (args.m_from, args.m_to, args.m_step),
            (args.c_from, args.c_to, args.c_step),
        )
    };
    let m_values = grid_values(m_range.0, m_range.1, m_range.2)?;
    let c_values = grid_values(c_range.0, c_range.1, c_range.2)?;
    let families = args.families.into_iter().map(Family::from).collect();
    let grid = SimGrid::new(families, m_values, c_values, args.se, args.seed)?.with_options(*opts);
    let cells = match args.threads {
        Some(0) => return Err(Failure::Domain("--threads must be at least 1".into())),
        Some(t) => run_grid_with_threads(&grid, t)?,
        None => run_grid(&grid)?,
    };
    match &args.out {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path)?);
            write_csv(&cells, &mut out)?;
            out.flush()?;
        }
        None => {
            let mut out = BufWriter::new(io::stdout().lock());
            write_csv(&cells, &mut out)?;
            out.flush()?;
        }
    }
    Ok(summarize(&cells))
}

fn summarize(cells: &[SimCell]) -> bool {
    let mut clean = true;
    for cell in cells {
        if let Some(msg) = &cell.failure {
            eprintln!(
                "cell {} m={} c={} failed: {msg}",
                cell.family, cell.m, cell.c
            );
            clean = false;
        } else if !cell.converged {
            eprintln!(
                "cell {} m={} c={} did not converge",
                cell.family, cell.m, cell.c
            );
            clean = false;
        }
    }
    let worst = cells
        .iter()
        .filter(|c| c.converged)
        .filter_map(SimCell::max_error)
        .fold(0.0, f64::max);
    eprintln!(
        "{} cells, max |dm|,|dc| over converged cells: {worst}",
        cells.len()
    );
    clean
}

fn counterexample(kind: CounterexampleKind, a: f64, json: bool) -> Outcome {
    let report: CounterexampleReport = match kind {
        CounterexampleKind::Mode => verify_mode_counterexample(a)?,
        CounterexampleKind::Median => verify_median_counterexample(a)?,
    };
    if json {
        let mut value =
            serde_json::to_value(&report).map_err(|e| Failure::Domain(e.to_string()))?;
        if let Value::Object(map) = &mut value {
            map.insert("schema_version".into(), json!(SCHEMA_VERSION));
            map.insert("command".into(), json!("counterexample"));
            map.insert("same_location".into(), json!(report.same_location()));
            map.insert("same_cstat".into(), json!(report.same_cstat()));
            map.insert("distinct".into(), json!(report.distinct()));
            map.insert("verified".into(), json!(report.verified()));
        }
        print_json(&value)?;
    } else {
        let [a1, a2] = report.a;
        let [l1, l2] = report.locations;
        let [c1, c2] = report.cstats;
        println!("{} family, a = {a1} and a = {a2}", report.kind);
        println!(
            "{}s: {l1} {l2} (same: {})",
            report.kind,
            report.same_location()
        );
        println!("c: {c1} {c2} (same: {})", report.same_cstat());
        println!(
            "sup |F1 - F2|: {} (distinct: {})",
            report.cdf_gap,
            report.distinct()
        );
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
        println!("verified: {}", report.verified());
    }
    Ok(report.verified())
}
