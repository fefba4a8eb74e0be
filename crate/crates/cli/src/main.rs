//! `uplink`: evaluate, sweep and optimise dual-uplink entanglement swapping.
//!
//! Exit codes: 0 success, 1 config parse/validation error, 2 model or I/O
//! error, 3 optimiser did not converge (results are still written).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use uplink_core::config::{self, ConfigError, DEFAULTS_TOML};
use uplink_core::optimize::{optimize, OptimizeOutcome};
use uplink_core::output::{emit_results, render, OutputFormat};
use uplink_core::sweep::{run_sweep, FigurePreset, ResultRow, ResultTable};
use uplink_core::{evaluate_scenario, ScenarioParams};

#[derive(Debug, Parser)]
#[command(name = "uplink", version, about)]
struct RunConfig {
    /// Print the default scenario document and exit.
    #[arg(long)]
    defaults: bool,

    /// More progress output on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one scenario.
    Eval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a grid of scenarios.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
    },
    /// Search for the best configuration; writes the evaluation trace.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
    },
    /// Regenerate the data behind a figure.
    Figure {
        #[arg(long, value_parser = ["fig2", "fig3"])]
        preset: String,
        #[arg(long)]
        out: PathBuf,
        /// Baseline scenario; defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
    },
}

enum Failure {
    Usage(String),
    Config(ConfigError),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn write_table(
    table: &ResultTable,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<(), Failure> {
    match out {
        Some(path) => emit_results(table, format, path).map_err(runtime),
        None => {
            print!("{}", render(table, format).map_err(runtime)?);
            Ok(())
        }
    }
}

fn report_failed_rows(table: &ResultTable) {
    let failed = table.rows.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        eprintln!(
            "warning: {failed} of {} grid points failed",
            table.rows.len()
        );
    }
}

fn trace_table(spec_free: &[String], outcome: &OptimizeOutcome) -> ResultTable {
    ResultTable {
        axes: spec_free.to_vec(),
        rows: outcome
            .trace
            .iter()
            .map(|t| ResultRow {
                axis_values: t.point.clone(),
                outcome: t.outcome.clone(),
            })
            .collect(),
    }
}

/// Returns whether the run fully succeeded (`false` only for optimiser
/// non-convergence).
fn run(cfg: RunConfig) -> Result<bool, Failure> {
    if cfg.defaults {
        print!("{DEFAULTS_TOML}");
        return Ok(true);
    }
    let Some(command) = cfg.command else {
        return Err(Failure::Usage(
            "no command given; see `uplink --help`".into(),
        ));
    };
    match command {
        Command::Eval {
            config,
            format,
            out,
        } => {
            let params = config::load_scenario(&config)?;
            let metrics = evaluate_scenario(&params).map_err(runtime)?;
            if cfg.verbose > 0 {
                eprintln!(
                    "z = {:.1} km, theta = {:.2} deg, eta_ch = {:.4e}",
                    metrics.geometry.slant_range_m / 1e3,
                    metrics.geometry.zenith_angle_rad.to_degrees(),
                    metrics.channel.total
                );
            }
            let table = ResultTable {
                axes: vec![],
                rows: vec![ResultRow {
                    axis_values: vec![],
                    outcome: Ok(metrics),
                }],
            };
            write_table(&table, format, out.as_deref())?;
            Ok(true)
        }
        Command::Sweep {
            config,
            out,
            format,
        } => {
            let spec = config::load_sweep(&config)?;
            let table = run_sweep(&spec).map_err(runtime)?;
            report_failed_rows(&table);
            write_table(&table, format, Some(&out))?;
            Ok(true)
        }
        Command::Optimize {
            config,
            out,
            seed,
            format,
        } => {
            let spec = config::load_optimize(&config)?;
            let outcome = optimize(&spec, seed).map_err(runtime)?;
            let names: Vec<String> = spec.free.iter().map(|f| f.param.to_string()).collect();
            write_table(&trace_table(&names, &outcome), format, Some(&out))?;
            println!("evaluations: {}", outcome.evaluations);
            println!("converged: {}", outcome.converged);
            for (name, v) in names.iter().zip(&outcome.best_point) {
                println!("{name}: {v:.6e}");
            }
            println!("F: {:.6}", outcome.best_metrics.fidelity);
            println!("eta_tot: {:.6e}", outcome.best_metrics.eta_tot);
            if !outcome.converged {
                eprintln!("warning: evaluation budget exhausted before convergence");
            }
            Ok(outcome.converged)
        }
        Command::Figure {
            preset,
            out,
            config,
            format,
        } => {
            let preset: FigurePreset = preset.parse().map_err(runtime)?;
            let baseline = match config {
                Some(path) => config::load_scenario(&path)?,
                None => ScenarioParams::default(),
            };
            let table = run_sweep(&preset.sweep(baseline)).map_err(runtime)?;
            report_failed_rows(&table);
            write_table(&table, format, Some(&out))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cfg = match RunConfig::try_parse() {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
