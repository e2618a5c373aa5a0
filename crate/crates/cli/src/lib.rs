//! Command-line front end: single-point strategies, parameter sweeps with CSV
//! and SVG output, Monte Carlo runs and the oracle verification suite.
//!
//! Exit codes: 0 success, 1 verification or numerical failure, 2 invalid
//! configuration.

pub mod output;
pub mod svg;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use retention_core::simulate::{compare_outputs, estimate_from_output, simulate_many, Comparison};
use retention_core::verify::{self, OracleReport};
use retention_core::{optimal_strategy, Error, McEstimate, RunConfig, StrategyPoint, SweepConfig};
use serde::Serialize;

use output::{StrategyRow, SweepRow};

#[derive(Parser, Debug, Clone)]
#[command(name = "retention", version, about = "Optimal reinsurance and investment strategies")]
pub struct Cli {
    /// JSON run configuration; missing sections take baseline defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Dotted-path override, e.g. `--set market.sigma1=0.3`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Seed for simulation (overrides `sim.seed`) or for verification draws.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// CSV output path (overrides `output.csv`).
    #[arg(long, global = true, value_name = "PATH")]
    pub out_csv: Option<PathBuf>,
    /// SVG output path for sweeps (overrides `output.svg`).
    #[arg(long, global = true, value_name = "PATH")]
    pub out_svg: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Optimal (u*, a*) at the configured state, as JSON.
    Strategy,
    /// Evaluate the optimal strategy over the `sweep` section's range.
    Sweep,
    /// Monte Carlo estimate of expected terminal utility (or a comparison).
    Simulate {
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the oracle suite; exits 1 if any check fails.
    Verify {
        /// Replace the proportional solver by a sign-flipped mutant.
        #[arg(long, hide = true)]
        mutant: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Failed(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::Domain { .. } => CliError::Config(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

fn io_failed(what: &str, path: &std::path::Path, e: impl std::fmt::Display) -> CliError {
    CliError::Failed(format!("cannot write {what} to {}: {e}", path.display()))
}

/// What a run printed and how it ended.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Reads the config file (if any), then applies `--set` overrides and the
/// `--seed`/`--out-*` flags.
pub fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::Config(format!("--config: cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut overrides = cli.overrides.clone();
    if let (Some(seed), Command::Simulate { .. }) = (cli.seed, &cli.command) {
        overrides.push(format!("sim.seed={seed}"));
    }
    if let Command::Simulate { workers: Some(w) } = &cli.command {
        overrides.push(format!("sim.workers={w}"));
    }
    let mut cfg = RunConfig::from_json_str(&text, &overrides)?;
    if let Some(p) = &cli.out_csv {
        cfg.output.csv = Some(p.display().to_string());
    }
    if let Some(p) = &cli.out_svg {
        cfg.output.svg = Some(p.display().to_string());
    }
    Ok(cfg)
}

pub fn cmd_strategy(cfg: &RunConfig) -> Result<StrategyPoint, CliError> {
    Ok(optimal_strategy(&cfg.problem()?, &cfg.state())?)
}

fn sweep_section(cfg: &RunConfig) -> Result<&SweepConfig, CliError> {
    cfg.sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep: section required (parameter, from, to, points)".into()))
}

/// One row per sweep value, evaluated in parallel and returned in sweep order.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>, CliError> {
    let sweep = sweep_section(cfg)?;
    sweep
        .values()
        .into_par_iter()
        .map(|v| {
            let mut point = cfg.clone();
            sweep.parameter.apply(&mut point, v);
            let sp = optimal_strategy(&point.problem()?, &point.state())?;
            Ok(SweepRow {
                param: v,
                u_star: sp.u_star,
                a_star: sp.a_star,
                region: sp.region,
            })
        })
        .collect::<Result<Vec<_>, Error>>()
        .map_err(|e| {
            let param = sweep.parameter;
            match CliError::from(e) {
                CliError::Config(m) => CliError::Config(format!("sweep over {param}: {m}")),
                f => f,
            }
        })
}

/// u* (solid) and a* (dashed) against the swept parameter.
pub fn sweep_svg(sweep: &SweepConfig, rows: &[SweepRow]) -> String {
    let xs: Vec<f64> = rows.iter().map(|r| r.param).collect();
    let us: Vec<f64> = rows.iter().map(|r| r.u_star).collect();
    let as_: Vec<f64> = rows.iter().map(|r| r.a_star).collect();
    svg::line_plot(
        &format!("Optimal strategy vs {}", sweep.parameter),
        sweep.parameter.name(),
        &xs,
        &[
            svg::Series { name: "retention u*", ys: &us, dashed: false, color: "#1f4e9a" },
            svg::Series { name: "investment a*", ys: &as_, dashed: true, color: "#b2382b" },
        ],
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SimulateReport {
    Estimate(McEstimate),
    Comparison(Comparison),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOutput {
    pub report: SimulateReport,
    /// Mean over paths of `∫₀ᵀ a_t² dt`, per strategy.
    pub mean_int_a_squared: Vec<f64>,
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<SimulateOutput, CliError> {
    let problem = cfg.problem()?;
    let mut sim = cfg.sim_config();
    sim.store_paths |= cfg.output.paths_csv.is_some();
    let mut strategies = vec![cfg.sim.strategy.clone()];
    strategies.extend(cfg.sim.compare.iter().cloned());
    let outputs = simulate_many(&problem, &strategies, &sim, cfg.state.x)?;
    if let Some(path) = &cfg.output.paths_csv {
        let path = PathBuf::from(path);
        let file = std::fs::File::create(&path).map_err(|e| io_failed("paths", &path, e))?;
        // paths of the primary strategy only
        let rows = outputs[0].paths.as_deref().unwrap_or_default();
        output::write_paths(std::io::BufWriter::new(file), rows).map_err(|e| io_failed("paths", &path, e))?;
    }
    let report = if outputs.len() == 1 {
        SimulateReport::Estimate(estimate_from_output(&problem, &outputs[0], &sim)?)
    } else {
        SimulateReport::Comparison(compare_outputs(&problem, &outputs, &sim)?)
    };
    Ok(SimulateOutput {
        report,
        mean_int_a_squared: outputs.iter().map(|o| o.mean_int_a_squared()).collect(),
    })
}

pub const DEFAULT_VERIFY_SEED: u64 = 20_240_601;

/// The oracle suite, preceded by a grid check of the configured point.
pub fn cmd_verify(cfg: &RunConfig, seed: u64, mutant: bool) -> Result<Vec<OracleReport>, CliError> {
    let solver: &verify::Solver = if mutant {
        &verify::mutated_proportional
    } else {
        &verify::closed_form_solver
    };
    let problem = cfg.problem()?;
    let s = cfg.state();
    let bounded = problem.reinsurance.retention_bound().is_finite();
    let h = if bounded { 1e-5 } else { 1e-4 };
    let mut reports = vec![match (solver(&problem, &s), verify::grid_argmax_u(&problem, &s, h, None)) {
        (Ok(sp), Ok(g)) => OracleReport::new(
            "config_point_u",
            sp.u_star,
            g.u,
            h,
            format!("u in [0, {}] step {h:e}", g.u_max),
        ),
        (Err(e), _) | (_, Err(e)) => OracleReport {
            name: "config_point_u".into(),
            closed_form: f64::NAN,
            oracle: f64::NAN,
            abs_diff: f64::NAN,
            tolerance: h,
            pass: false,
            grid_spec: format!("error: {e}"),
        },
    }];
    reports.extend(verify::default_suite(seed, solver));
    Ok(reports)
}

fn write_file(what: &str, path: &str, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| io_failed(what, std::path::Path::new(path), e))
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serialisable")
}

fn execute(cli: &Cli, out: &mut Outcome) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Strategy => {
            let sp = cmd_strategy(&cfg)?;
            if let Some(path) = &cfg.output.csv {
                let csv = output::to_csv_string(&[StrategyRow::new(&cfg.state(), &sp)])
                    .map_err(|e| CliError::Failed(e.to_string()))?;
                write_file("strategy CSV", path, &csv)?;
            }
            out.stdout = json(&sp) + "\n";
        }
        Command::Sweep => {
            let rows = cmd_sweep(&cfg)?;
            let csv = output::to_csv_string(&rows).map_err(|e| CliError::Failed(e.to_string()))?;
            match &cfg.output.csv {
                Some(path) => write_file("sweep CSV", path, &csv)?,
                None => out.stdout = csv,
            }
            if let Some(path) = &cfg.output.svg {
                write_file("sweep SVG", path, &sweep_svg(sweep_section(&cfg)?, &rows))?;
            }
        }
        Command::Simulate { .. } => {
            let res = cmd_simulate(&cfg)?;
            out.stdout = json(&res.report) + "\n";
            for (i, v) in res.mean_int_a_squared.iter().enumerate() {
                out.stderr += &format!("strategy {i}: mean integral of a^2 dt = {v}\n");
            }
        }
        Command::Verify { mutant } => {
            let reports = cmd_verify(&cfg, cli.seed.unwrap_or(DEFAULT_VERIFY_SEED), *mutant)?;
            out.stdout = serde_json::to_string_pretty(&reports).expect("serialisable") + "\n";
            let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
            out.stderr += &format!("{} checks, {} failed\n", reports.len(), failed.len());
            if !failed.is_empty() {
                out.stderr += &format!("failed: {}\n", failed.join(", "));
                out.code = 1;
            }
        }
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Outcome {
    let mut out = Outcome::default();
    if let Err(e) = execute(cli, &mut out) {
        out.stderr += &format!("{e}\n");
        out.code = e.exit_code();
    }
    out
}

/// Parses `args` (including the program name) and runs; clap errors exit 2.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => Outcome {
            stdout: String::new(),
            stderr: e.to_string(),
            code: if e.use_stderr() { 2 } else { 0 },
        },
    }
}
