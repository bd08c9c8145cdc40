//! `fracwave` command line: evolve a configured problem, compute a solitary
//! wave, or run a named experiment.
//!
//! Exit status: 0 on a passing verdict, 1 on a failing one, 2 on error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use fracwave::config::{parse_config_with, Overrides, EXPERIMENT_NAMES};
use fracwave::io::{emit_outputs, report_outputs, run_outputs, soliton_outputs};
use fracwave::solitary::{petviashvili_solve, PetviashviliOptions, SolitaryError};
use fracwave::{evolution, GridSpec, RunOutcome};

#[derive(Parser)]
#[command(name = "fracwave", version, about = "Fractional dispersive Burgers laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured problem and write diagnostics and snapshots.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the solitary wave of order ALPHA and speed C.
    Soliton {
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long)]
        speed: f64,
        /// Grid as `N,L`: N points on [-L, L).
        #[arg(long, value_parser = parse_grid)]
        grid: GridSpec,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Iterate even below alpha = 1/3, where no solitary wave exists.
        #[arg(long)]
        force: bool,
    },
    /// Run a named experiment.
    Experiment {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(EXPERIMENT_NAMES))]
        name: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let (n, l) = s.split_once(',').ok_or("expected N,L")?;
    let n: usize = n.trim().parse().map_err(|_| format!("`{n}` is not a point count"))?;
    let l: f64 = l.trim().parse().map_err(|_| format!("`{l}` is not a half-length"))?;
    GridSpec::new(n, l).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read_config(path: &Path, over: Overrides) -> Result<fracwave::config::RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config_with(&text, &over).with_context(|| format!("in {}", path.display()))
}

fn out_override(out: Option<PathBuf>) -> Option<String> {
    out.map(|p| p.to_string_lossy().into_owned())
}

fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Evolve { config, out } => {
            let cfg = read_config(
                &config,
                Overrides {
                    output_dir: out_override(out),
                    ..Default::default()
                },
            )?;
            if cfg.experiment.is_some() {
                bail!("config has an [experiment] section; use `fracwave experiment`");
            }
            let problem = cfg.problem()?;
            let result = evolution::run(&problem, cfg.t_end)?;
            let alpha = problem.symbol.power_alpha();
            emit_outputs(&run_outputs(&result, alpha), &cfg.output_dir, &cfg.resolved)?;
            let d = &result.diagnostics;
            println!(
                "{}: t = {} after {} steps, drift of int u^2 {:.3e}, of the conserved energy {:.3e}",
                result.outcome.tag(),
                result.final_time,
                result.steps,
                d.relative_drift(|r| r.mass),
                d.relative_drift(|r| r.hamiltonian)
            );
            if let Some(tb) = result.breaking_time {
                println!("breaking time {tb}");
            }
            Ok(matches!(result.outcome, RunOutcome::Completed | RunOutcome::BreakingDetected))
        }
        Command::Soliton {
            alpha,
            speed,
            grid,
            out,
            force,
        } => {
            let opts = PetviashviliOptions {
                force,
                ..Default::default()
            };
            let wave = match petviashvili_solve(alpha, speed, grid, None, &opts) {
                Ok(w) => w,
                Err(e @ (SolitaryError::NotConverged { .. } | SolitaryError::CollapsedToZero(_))) => {
                    println!("no solitary wave: {e}");
                    return Ok(false);
                }
                Err(e) => return Err(e.into()),
            };
            let resolved = format!(
                "[soliton]\nalpha = {alpha:?}\nspeed = {speed:?}\nn_points = {}\nhalf_length = {:?}\nforce = {force}\nmax_iter = {}\nchange_tol = {:?}\nresidual_tol = {:?}\ngamma = {:?}\n",
                grid.n_points(),
                grid.half_length(),
                opts.max_iter,
                opts.change_tol,
                opts.residual_tol,
                opts.gamma
            );
            emit_outputs(&soliton_outputs(&wave), &out, &resolved)?;
            let cert = wave.certificate();
            println!(
                "iterations {}, residual {:.3e}, pohozaev ({:.3e}, {:.3e}), evenness {:.3e}, certificate {}",
                wave.iterations,
                wave.residual,
                wave.pohozaev.0,
                wave.pohozaev.1,
                wave.evenness_defect,
                if cert.passed() { "passed" } else { "failed" }
            );
            Ok(cert.passed())
        }
        Command::Experiment { name, config, out } => {
            let cfg = read_config(
                &config,
                Overrides {
                    output_dir: out_override(out),
                    experiment: Some(name),
                },
            )?;
            let report = cfg.run_experiment()?;
            emit_outputs(&report_outputs(&report), &cfg.output_dir, &cfg.resolved)?;
            for v in &report.verdicts {
                println!(
                    "{} {}: {:.6e} (tolerance {:.6e})",
                    if v.passed { "PASS" } else { "FAIL" },
                    v.name,
                    v.measured,
                    v.tolerance
                );
            }
            Ok(report.passed())
        }
    }
}
