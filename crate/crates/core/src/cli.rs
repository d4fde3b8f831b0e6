//! The `cheshire` command line.
//!
//! ```text
//! cheshire run <scenario> [--mode exact|pointer|montecarlo] [--g G] [--seed S]
//!              [--samples N] [--format csv|json] [--grid-points N] [--sigma S]
//!              [--observable NAME]
//! cheshire sweep <scenario> --observable NAME --g G1,G2,...
//! cheshire montecarlo <scenario> [--samples N] [--seed S]
//! ```
//!
//! `<scenario>` is a built-in name (`single-cat`, `grin-swap`) or a path to a
//! `.qcc` file. Exit status is 0 on success, 2 for usage and input errors and
//! 3 for numerical failures.

use std::io::Write;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pointer::PointerGrid;
use crate::scenario::{self, run_scenario, RunMode, RunParams, Scenario, ScenarioRun};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Monte Carlo trial count when `--samples` is not given.
pub const DEFAULT_SAMPLES: usize = 100_000;

#[derive(Debug, Parser)]
#[command(name = "cheshire", version, about = "Weak values of pre/post-selected photons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate every observable of a scenario.
    Run(RunArgs),
    /// Pointer estimates of one observable over several coupling strengths.
    Sweep(SweepArgs),
    /// Monte Carlo estimates with standard errors and acceptance rates.
    Montecarlo(MonteCarloArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Pointer,
    Montecarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct Common {
    /// Built-in scenario name or path to a `.qcc` file.
    scenario: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Pointer grid size (overrides the scenario).
    #[arg(long)]
    grid_points: Option<usize>,
    /// Pointer width (overrides the scenario; the grid widens to at least 8 sigma).
    #[arg(long)]
    sigma: Option<f64>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    /// Coupling strength (overrides the scenario).
    #[arg(long)]
    g: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo trials; only valid with `--mode montecarlo`.
    #[arg(long)]
    samples: Option<usize>,
    /// Restrict output to one observable.
    #[arg(long)]
    observable: Option<String>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    observable: String,
    /// Comma-separated coupling strengths.
    #[arg(long, allow_hyphen_values = true)]
    g: String,
}

#[derive(Debug, Args)]
struct MonteCarloArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    observable: Option<String>,
}

/// One output row. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRecord {
    pub scenario: String,
    pub mode: String,
    pub observable: String,
    pub weak_value_re: f64,
    pub weak_value_im: f64,
    pub estimate: Option<f64>,
    pub std_error: Option<f64>,
    pub abs_error: Option<f64>,
    pub postselection_probability: f64,
    pub acceptance_rate: Option<f64>,
    pub g: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
}

/// Rounds to 15 significant digits; magnitudes below 1e-12 print as 0.
pub fn round_output(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        return 0.0;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

fn round_opt(x: Option<f64>) -> Option<f64> {
    x.map(round_output)
}

pub fn records(run: &ScenarioRun) -> Vec<OutputRecord> {
    run.results
        .iter()
        .map(|r| OutputRecord {
            scenario: run.scenario.clone(),
            mode: run.mode.as_str().to_string(),
            observable: r.name.clone(),
            weak_value_re: round_output(r.weak_value.re),
            weak_value_im: round_output(r.weak_value.im),
            estimate: round_opt(r.estimate),
            std_error: round_opt(r.std_error),
            abs_error: round_opt(r.estimate.map(|e| (e - r.weak_value.re).abs())),
            postselection_probability: round_output(run.report.postselection_probability),
            acceptance_rate: round_opt(r.acceptance_rate),
            g: round_opt(run.g),
            seed: run.seed,
            samples: run.samples,
        })
        .collect()
}

pub fn write_csv<W: Write>(out: W, rows: &[OutputRecord]) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
}

pub const CSV_COLUMNS: [&str; 13] = [
    "scenario",
    "mode",
    "observable",
    "weak_value_re",
    "weak_value_im",
    "estimate",
    "std_error",
    "abs_error",
    "postselection_probability",
    "acceptance_rate",
    "g",
    "seed",
    "samples",
];

pub fn write_json<W: Write>(mut out: W, rows: &[OutputRecord]) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)
}

/// A built-in scenario by name, otherwise a `.qcc` file.
pub fn resolve_scenario(spec: &str) -> Result<Scenario> {
    if let Some(s) = scenario::builtin(spec) {
        return Ok(s);
    }
    let path = Path::new(spec);
    if path.exists() || path.extension().is_some_and(|e| e == "qcc") {
        return scenario::load_scenario(path).map_err(|e| match e {
            Error::Io { .. } => e,
            other => Error::Scenario {
                scenario: spec.to_string(),
                source: Box::new(other),
            },
        });
    }
    Err(Error::UnknownScenario(spec.to_string()))
}

fn grid_for(s: &Scenario, c: &Common) -> Result<Option<PointerGrid>> {
    if c.grid_points.is_none() && c.sigma.is_none() {
        return Ok(None);
    }
    let base = s.pointer.grid;
    let sigma = c.sigma.unwrap_or(base.sigma());
    let half_width = base.half_width().max(8.0 * sigma);
    let points = c.grid_points.unwrap_or(base.points());
    PointerGrid::new(half_width, points, sigma).map(Some)
}

fn observable_index(s: &Scenario, observable: Option<&str>) -> Result<Option<usize>> {
    observable
        .map(|name| {
            s.observables
                .iter()
                .position(|o| o.name == name)
                .ok_or_else(|| Error::UnknownObservable(name.to_string()))
        })
        .transpose()
}

fn parse_g_list(text: &str) -> Result<Vec<f64>> {
    let gs = text
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("`{t}` is not a number in --g")))
        })
        .collect::<Result<Vec<_>>>()?;
    if gs.is_empty() {
        return Err(Error::InvalidArgument("--g needs at least one value".into()));
    }
    Ok(gs)
}

fn execute(command: Command) -> Result<(Vec<OutputRecord>, Format)> {
    match command {
        Command::Run(a) => {
            let mode = match a.mode {
                Mode::Exact => RunMode::Exact,
                Mode::Pointer => RunMode::Pointer,
                Mode::Montecarlo => RunMode::MonteCarlo,
            };
            if a.samples.is_some() && mode != RunMode::MonteCarlo {
                return Err(Error::InvalidArgument(
                    "--samples requires --mode montecarlo".into(),
                ));
            }
            let s = resolve_scenario(&a.common.scenario)?;
            let params = RunParams {
                g: a.g,
                grid: grid_for(&s, &a.common)?,
                seed: a.seed,
                samples: (mode == RunMode::MonteCarlo)
                    .then(|| a.samples.unwrap_or(DEFAULT_SAMPLES)),
                only: observable_index(&s, a.observable.as_deref())?,
            };
            let run = run_scenario(&s, mode, &params)?;
            Ok((records(&run), a.common.format))
        }
        Command::Sweep(a) => {
            let gs = parse_g_list(&a.g)?;
            let s = resolve_scenario(&a.common.scenario)?;
            let only = observable_index(&s, Some(&a.observable))?;
            let grid = grid_for(&s, &a.common)?;
            let mut rows = Vec::with_capacity(gs.len());
            for g in gs {
                let params = RunParams {
                    g: Some(g),
                    grid,
                    only,
                    ..RunParams::default()
                };
                rows.extend(records(&run_scenario(&s, RunMode::Pointer, &params)?));
            }
            Ok((rows, a.common.format))
        }
        Command::Montecarlo(a) => {
            let s = resolve_scenario(&a.common.scenario)?;
            let params = RunParams {
                g: a.g,
                grid: grid_for(&s, &a.common)?,
                seed: a.seed,
                samples: Some(a.samples),
                only: observable_index(&s, a.observable.as_deref())?,
            };
            let run = run_scenario(&s, RunMode::MonteCarlo, &params)?;
            Ok((records(&run), a.common.format))
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

/// Runs the command line `args` (including the program name) and returns the
/// exit status.
pub fn run<I, T, O, E>(args: I, stdout: &mut O, stderr: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
    O: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    match execute(cli.command) {
        Ok((rows, format)) => {
            let written = match format {
                Format::Csv => write_csv(&mut *stdout, &rows),
                Format::Json => write_json(&mut *stdout, &rows),
            };
            match written {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(stderr, "error: writing output: {e}");
                    EXIT_USAGE
                }
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("cheshire").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn rounding() {
        assert_eq!(round_output(0.1 + 0.2), 0.3);
        assert_eq!(round_output(1e-13), 0.0);
        assert_eq!(round_output(-1e-13).to_string(), "0");
        assert_eq!(round_output(2.0 / 3.0), 0.666666666666667);
    }

    #[test]
    fn g_list() {
        assert_eq!(parse_g_list("0.1, 0.05,0.01").unwrap(), vec![0.1, 0.05, 0.01]);
        assert!(parse_g_list(" , ").is_err());
        assert!(parse_g_list("0.1,x").is_err());
    }

    #[test]
    fn exact_single_cat() {
        let (code, out, _) = call(&["run", "single-cat"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 5);
        assert!(out.starts_with(&CSV_COLUMNS.join(",")));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["run", "nowhere"]).0, EXIT_USAGE);
        assert_eq!(call(&["run", "single-cat", "--samples", "10"]).0, EXIT_USAGE);
        assert_eq!(call(&["montecarlo", "single-cat", "--samples", "0"]).0, EXIT_USAGE);
        assert_eq!(call(&["sweep", "single-cat", "--observable", "Pi_L", "--g", ""]).0, EXIT_USAGE);
        assert_eq!(call(&["sweep", "single-cat", "--observable", "Pi_X", "--g", "0.1"]).0, EXIT_USAGE);
        assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
    }

    #[test]
    fn help_is_success() {
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("sweep"));
    }
}
