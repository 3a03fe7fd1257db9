//! Command-line front end for `cournot-core`: configuration, dispatch and
//! CSV/JSON output.
//!
//! Exit codes: 0 success, 2 configuration error, 3 failed model assumption,
//! 4 oracle disagreement. Failures print one line of JSON to standard error.

mod commands;
pub mod config;
pub mod error;
pub mod table;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Axis, Family, Format, RunConfig};
use crate::error::{CliError, EXIT_CONFIG, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "wind-cournot", version, about = "Bayesian Cournot equilibria with correlated stochastic capacities")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Two producers with binary availability.
    #[command(subcommand)]
    Duopoly(Action),
    /// N+1 exchangeable producers.
    #[command(subcommand)]
    Multi(Action),
    /// Two producers plus a dispatchable generator.
    #[command(subcommand)]
    Mixed(Action),
    /// Transfer feasibility and deterrence threshold for collusion.
    #[command(subcommand)]
    Collusion(ConductAction),
    /// Value of publicly sharing availability.
    #[command(subcommand, name = "info-sharing")]
    InfoSharing(ConductAction),
    /// Stochastic-dominance matrices for an availability family.
    Validate(ValidateArgs),
    /// Cross-check the analytic solution against brute-force oracles.
    Verify(VerifyArgs),
}

#[derive(Debug, Subcommand)]
enum Action {
    /// Solve at one parameter point.
    Solve(Common),
    /// Solve along a closed parameter grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: SweepArgs,
    },
}

#[derive(Debug, Subcommand)]
enum ConductAction {
    /// Evaluate at one parameter point.
    Assess(Common),
    /// Evaluate along a closed parameter grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        beta_grid: BetaGridArgs,
    },
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file (standard output when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Demand intercept.
    #[arg(long)]
    s: Option<f64>,
    /// Linear coefficient of quadratic demand.
    #[arg(long)]
    a: Option<f64>,
    /// Curvature coefficient of quadratic demand.
    #[arg(long)]
    b: Option<f64>,
    /// Probability of the high state.
    #[arg(long)]
    beta: Option<f64>,
    /// Dispersion in [0, 1].
    #[arg(long)]
    d: Option<f64>,
    /// Low-state availability.
    #[arg(long, alias = "L")]
    low: Option<f64>,
    /// High-state availability.
    #[arg(long, alias = "H")]
    high: Option<f64>,
    /// Marginal cost of the dispatchable generator.
    #[arg(long, alias = "c")]
    cost: Option<f64>,
    /// Expected collusion penalty.
    #[arg(long)]
    gamma: Option<f64>,
    /// Number of producers (multi market).
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Debug, Clone, Args)]
struct SweepArgs {
    /// Swept parameter.
    #[arg(long, value_enum)]
    over: Option<Axis>,
    /// First grid value.
    #[arg(long)]
    from: Option<f64>,
    /// Last grid value.
    #[arg(long)]
    to: Option<f64>,
    /// Number of grid points, endpoints included.
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Debug, Clone, Args)]
struct BetaGridArgs {
    /// First β of the information-sharing surface.
    #[arg(long)]
    beta_from: Option<f64>,
    /// Last β of the information-sharing surface.
    #[arg(long)]
    beta_to: Option<f64>,
    /// Number of β rows.
    #[arg(long)]
    beta_steps: Option<usize>,
}

#[derive(Debug, Clone, Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    /// Availability family.
    #[arg(long, value_enum)]
    family: Option<Family>,
    /// Number of evenly spaced dispersion values on [0, 1].
    #[arg(long)]
    d_grid: Option<usize>,
}

#[derive(Debug, Clone, Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Best-response grid resolution.
    #[arg(long)]
    grid: Option<usize>,
}

/// Where and how to write results.
pub(crate) struct Sink {
    format: Format,
    out: Option<PathBuf>,
}

/// What a command produced.
pub(crate) enum Output {
    Table(table::Table),
    Json(serde_json::Value),
    /// A single record: a one-row table for CSV, an object for JSON.
    Record { table: table::Table, json: serde_json::Value },
}

impl Sink {
    fn emit(&self, output: &Output) -> Result<(), CliError> {
        match &self.out {
            Some(path) => {
                let f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                let mut w = BufWriter::new(f);
                self.write(output, &mut w)?;
                w.flush()?;
            }
            None => {
                let stdout = io::stdout();
                let mut w = stdout.lock();
                self.write(output, &mut w)?;
                w.flush()?;
            }
        }
        Ok(())
    }

    fn write<W: Write>(&self, output: &Output, w: &mut W) -> Result<(), CliError> {
        match (output, self.format) {
            (Output::Table(t), Format::Csv) | (Output::Record { table: t, .. }, Format::Csv) => t.write_csv(w),
            (Output::Table(t), Format::Json) => write_json(w, &t.to_json()),
            (Output::Record { json, .. }, Format::Json) | (Output::Json(json), _) => write_json(w, json),
        }
    }
}

fn write_json<W: Write>(w: &mut W, v: &serde_json::Value) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *w, v).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

fn merge(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    commands::apply_overrides(&mut cfg, common)?;
    Ok(cfg)
}

fn sink(cfg: &RunConfig, default: Format) -> Sink {
    Sink { format: cfg.format.unwrap_or(default), out: cfg.out.clone() }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    use commands::*;
    use config::Market;
    let (cfg, output, default_format) = match cli.command {
        Command::Duopoly(Action::Solve(c)) => {
            let cfg = merge(&c)?;
            let out = duopoly_solve(&cfg);
            (cfg, out, Format::Json)
        }
        Command::Duopoly(Action::Sweep { common, sweep }) => {
            let cfg = with_sweep(merge(&common)?, &sweep);
            let out = market_sweep(&cfg, Market::Duopoly);
            (cfg, out, Format::Csv)
        }
        Command::Multi(Action::Solve(c)) => {
            let cfg = merge(&c)?;
            let out = multi_solve(&cfg);
            (cfg, out, Format::Json)
        }
        Command::Multi(Action::Sweep { common, sweep }) => {
            let cfg = with_sweep(merge(&common)?, &sweep);
            let out = market_sweep(&cfg, Market::Multi);
            (cfg, out, Format::Csv)
        }
        Command::Mixed(Action::Solve(c)) => {
            let cfg = merge(&c)?;
            let out = mixed_solve(&cfg);
            (cfg, out, Format::Json)
        }
        Command::Mixed(Action::Sweep { common, sweep }) => {
            let cfg = with_sweep(merge(&common)?, &sweep);
            let out = market_sweep(&cfg, Market::Mixed);
            (cfg, out, Format::Csv)
        }
        Command::Collusion(ConductAction::Assess(c)) => {
            let cfg = merge(&c)?;
            let out = collusion_assess(&cfg);
            (cfg, out, Format::Json)
        }
        Command::Collusion(ConductAction::Sweep { common, sweep, .. }) => {
            let cfg = with_sweep(merge(&common)?, &sweep);
            let out = collusion_sweep(&cfg);
            (cfg, out, Format::Csv)
        }
        Command::InfoSharing(ConductAction::Assess(c)) => {
            let cfg = merge(&c)?;
            let out = info_sharing_assess(&cfg);
            (cfg, out, Format::Json)
        }
        Command::InfoSharing(ConductAction::Sweep { common, sweep, beta_grid }) => {
            let mut cfg = with_sweep(merge(&common)?, &sweep);
            let g = cfg.beta_grid.get_or_insert_with(Default::default);
            g.from = beta_grid.beta_from.or(g.from);
            g.to = beta_grid.beta_to.or(g.to);
            g.steps = beta_grid.beta_steps.or(g.steps);
            let out = info_sharing_sweep(&cfg);
            (cfg, out, Format::Csv)
        }
        Command::Validate(v) => {
            let mut cfg = merge(&v.common)?;
            cfg.family = v.family.or(cfg.family);
            let out = validate(&cfg, v.d_grid.unwrap_or(11));
            (cfg, out, Format::Csv)
        }
        Command::Verify(v) => {
            let mut cfg = merge(&v.common)?;
            cfg.grid = v.grid.or(cfg.grid);
            let out = verify(&cfg);
            (cfg, out, Format::Json)
        }
    };
    let sink = sink(&cfg, default_format);
    // Partial results (failed sweep rows, failed checks) are written before
    // the error is reported.
    match output {
        Ok(out) => sink.emit(&out),
        Err(commands::Failure::Before(e)) => Err(e),
        Err(commands::Failure::After(out, e)) => {
            sink.emit(&out)?;
            Err(e)
        }
    }
}

fn with_sweep(mut cfg: RunConfig, args: &SweepArgs) -> RunConfig {
    let s = cfg.sweep.get_or_insert_with(Default::default);
    s.over = args.over.or(s.over);
    s.from = args.from.or(s.from);
    s.to = args.to.or(s.to);
    s.steps = args.steps.or(s.steps);
    cfg
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let err = CliError::Config(e.kind().to_string() + ": " + e.to_string().lines().next().unwrap_or(""));
            eprintln!("{}", err.to_json_line());
            return EXIT_CONFIG;
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            e.exit_code()
        }
    }
}

