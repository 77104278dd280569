mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use ising_echo::echo::spectrum_series;
use ising_echo::oracle::oracle_echo;
use ising_echo::spectrum::{mode_spectrum, ChainConfig};
use ising_echo::sweep::{
    detect_critical_point, emit_series, run_sweep, window_grid, write_oracle_csv, write_sweep_csv,
    ScanValues, SeriesPaths, Truncation,
};
use ising_echo::{EchoError, Execution};

use config::{FileConfig, ModelArgs};

const ORACLE_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(
    name = "ising-echo",
    version,
    about = "Qubit dephasing by a transverse-field Ising ring"
)]
struct Cli {
    /// TOML file with defaults for any of the model flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker cap for the thread pool.
    #[arg(long, global = true, env = "ISING_ECHO_THREADS")]
    threads: Option<usize>,
    /// Single-threaded evaluation.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time series (echo, rates, Fisher flow) for each lambda*; one CSV each.
    Series {
        #[command(flatten)]
        model: ModelArgs,
        /// Directory for the CSV files.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Also write an exact-diagonalization comparison (N <= 12).
        #[arg(long)]
        oracle: bool,
    },
    /// Non-Markovianity landscape over (N, lambda*).
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        /// Output CSV (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep, then locate the minimizing lambda* for each N.
    Critical {
        #[command(flatten)]
        model: ModelArgs,
        /// Also write the landscape CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the quasiparticle echo with exact diagonalization.
    Oracle {
        #[command(flatten)]
        model: ModelArgs,
        /// Output CSV (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn default_scan() -> ScanValues {
    ScanValues::Range {
        min: 0.5,
        max: 1.5,
        step: 0.05,
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!(EchoError::InvalidConfig(
                "thread count must be positive".into()
            ));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };

    match cli.command {
        Command::Series {
            model,
            out_dir,
            oracle,
        } => {
            let spec = model.merge(
                &file,
                ScanValues::List(vec![0.5, 1.0, 1.5]),
                vec![4000],
                Truncation::Time(50.0),
            )?;
            for config in spec.cells()? {
                let t_max = spec.t_max.resolve(&config)?;
                let grid = window_grid(&mode_spectrum(&config)?, t_max, spec.dt)?;
                let stem = format!("n{}_ls{}", config.n_spins(), config.lambda_star());
                let paths = SeriesPaths {
                    series: out_dir.join(format!("series_{stem}.csv")),
                    oracle: oracle.then(|| out_dir.join(format!("oracle_{stem}.csv"))),
                };
                let out = emit_series(&config, &grid, &paths, exec)?;
                println!(
                    "{}",
                    json!({
                        "n_spins": config.n_spins(),
                        "lambda_star": config.lambda_star(),
                        "t_max": out.cell.report.t_max,
                        "blp": out.cell.report.value,
                        "n_intervals": out.cell.report.intervals.len(),
                        "exceeds_recurrence_guard": out.cell.report.exceeds_recurrence_guard,
                        "series": paths.series,
                        "oracle": paths.oracle,
                        "oracle_max_dl": out.oracle_max_dl,
                    })
                );
            }
        }
        Command::Sweep { model, out } => {
            let spec = model.merge(&file, default_scan(), vec![100, 400], Truncation::Auto)?;
            let out = out.or(file.out);
            let result = run_sweep(&spec, exec)?;
            write_sweep_csv(&result, sink(out.as_deref())?)?;
            if let Some(path) = out {
                let failed = result.rows.iter().filter(|r| r.error.is_some()).count();
                println!(
                    "{}",
                    json!({ "cells": result.rows.len(), "failed": failed, "out": path })
                );
            }
        }
        Command::Critical { model, out } => {
            let spec = model.merge(&file, default_scan(), vec![100, 400], Truncation::Auto)?;
            let result = run_sweep(&spec, exec)?;
            if let Some(path) = out.or(file.out) {
                write_sweep_csv(&result, sink(Some(&path))?)?;
            }
            let mut first_err = None;
            for &n in &spec.n_spins {
                match detect_critical_point(&result, n) {
                    Ok(cp) => println!(
                        "{}",
                        json!({
                            "n_spins": n,
                            "lambda_star": cp.lambda_star,
                            "blp": cp.blp,
                            "markovian": cp.markovian,
                        })
                    ),
                    Err(e) => {
                        println!(
                            "{}",
                            json!({ "n_spins": n, "error": e.kind(), "message": e.to_string() })
                        );
                        first_err.get_or_insert(e);
                    }
                }
            }
            if let Some(e) = first_err {
                return Err(e.into());
            }
        }
        Command::Oracle { model, out } => {
            let spec = model.merge(
                &file,
                ScanValues::List(vec![1.0]),
                vec![8],
                Truncation::Time(20.0),
            )?;
            let out = out.or(file.out);
            let cells = spec.cells()?;
            if cells.len() != 1 {
                bail!(EchoError::InvalidConfig(format!(
                    "oracle compares one configuration, got {}",
                    cells.len()
                )));
            }
            let mut body = sink(out.as_deref())?;
            let worst = oracle_cell(&cells[0], &spec.t_max, spec.dt, exec, &mut body)?;
            body.flush()?;
            drop(body);
            let summary = json!({ "max_abs_dl": worst, "tolerance": ORACLE_TOL });
            if out.is_some() {
                println!("{summary}");
            } else {
                eprintln!("{summary}");
            }
            if worst >= ORACLE_TOL {
                bail!(EchoError::Domain(format!(
                    "oracle mismatch {worst:.3e} exceeds {ORACLE_TOL:e}"
                )));
            }
        }
    }
    Ok(())
}

fn oracle_cell(
    config: &ChainConfig,
    t_max: &Truncation,
    dt: Option<f64>,
    exec: Execution,
    out: &mut Box<dyn Write>,
) -> Result<f64> {
    let spectrum = mode_spectrum(config)?;
    let grid = window_grid(&spectrum, t_max.resolve(config)?, dt)?;
    let qp = spectrum_series(&spectrum, &grid, exec)?;
    let ed = oracle_echo(
        config.n_spins(),
        config.lambda(),
        config.delta(),
        config.coupling(),
        &grid,
    )?;
    Ok(write_oracle_csv(&qp, &ed, out)?)
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    if let Some(e) = e.downcast_ref::<EchoError>() {
        return e.kind();
    }
    if e.downcast_ref::<io::Error>().is_some() {
        return "io";
    }
    if e.chain()
        .any(|c| c.downcast_ref::<toml::de::Error>().is_some())
    {
        return "invalid_config";
    }
    "error"
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let summary = json!({ "error": error_kind(&e), "message": format!("{e:#}") });
            eprintln!("{summary}");
            ExitCode::FAILURE
        }
    }
}
