//! Command-line surface.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::engine::{evaluate, GateRecord, OracleOutput, Problem};
use crate::ensemble_io;
use crate::montecarlo;
use crate::report::{RunReport, Versions};
use crate::scenario::{self, DataSpec, Scenario, BUNDLED};

#[derive(Debug, Parser)]
#[command(name = "timereg", version, about = "Temporal regularity laboratory for linear parabolic SPDEs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario file, or the name of a bundled scenario.
    #[arg(long, global = true, env = "TIMEREG_SCENARIO")]
    pub scenario: Option<String>,
    /// Output directory (default: the scenario's `output`, else `out/<name>`).
    #[arg(long, global = true, env = "TIMEREG_OUT")]
    pub out: Option<PathBuf>,
    /// Quadrature tolerance override.
    #[arg(long, global = true, env = "TIMEREG_TOL")]
    pub tol: Option<f64>,
    /// Monte Carlo seed override.
    #[arg(long, global = true, env = "TIMEREG_SEED")]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "TIMEREG_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Everything the scenario configures.
    Run,
    /// Moments and certificates only.
    Oracle,
    /// Sample the Monte Carlo ensemble and write `ensemble.bin`.
    Sample,
    /// Monte Carlo gates, on a stored ensemble or a fresh one.
    Verify {
        #[arg(long)]
        ensemble: Option<PathBuf>,
    },
    /// Truncation sweeps, optionally over a different α grid.
    Sweep {
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
    },
    /// Re-render the CSV tables from a stored `report.json`.
    Report {
        #[arg(long)]
        from: PathBuf,
    },
    /// List bundled scenarios.
    Scenarios,
}

#[derive(Debug, Default, Serialize)]
struct Timing {
    command: String,
    threads: usize,
    stages: Vec<(String, f64)>,
    total_seconds: f64,
}

impl Timing {
    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.stages.push((name.into(), start.elapsed().as_secs_f64()));
        out
    }
}

/// Applies command-line overrides and normalizes for echoing.
pub fn normalize(mut s: Scenario, tol: Option<f64>, seed: Option<u64>) -> Result<Scenario> {
    if let Some(t) = tol {
        s.tolerance = t;
    }
    if let (Some(seed), Some(mc)) = (seed, s.monte_carlo.as_mut()) {
        mc.seed = seed;
    }
    if let DataSpec::Samples { path } = &mut s.data {
        *path = path.canonicalize().with_context(|| format!("data.path {}", path.display()))?;
    }
    s.output = None;
    Ok(s)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Run => "run",
        Command::Oracle => "oracle",
        Command::Sample => "sample",
        Command::Verify { .. } => "verify",
        Command::Sweep { .. } => "sweep",
        Command::Report { .. } => "report",
        Command::Scenarios => "scenarios",
    }
}

fn print_gates(gates: &[GateRecord]) {
    for g in gates {
        println!("{} {}: {}", if g.pass { "PASS" } else { "FAIL" }, g.name, g.detail);
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Runs a parsed command line; `Ok(false)` means a gate failed.
pub fn execute(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
        return pool.install(|| dispatch(cli));
    }
    dispatch(cli)
}

fn dispatch(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::Scenarios => {
            for (name, _) in BUNDLED {
                println!("{name}");
            }
            return Ok(true);
        }
        Command::Report { from } => {
            let report = RunReport::read(from).with_context(|| format!("reading {}", from.display()))?;
            let dir = cli.out.clone().unwrap_or_else(|| from.parent().unwrap_or(Path::new(".")).to_path_buf());
            report.write_tables(&dir)?;
            print_gates(&report.gates);
            return Ok(report.all_gates_pass);
        }
        _ => {}
    }

    let spec = cli.scenario.as_deref().context("--scenario is required")?;
    let loaded = scenario::load(spec)?;
    let out = cli
        .out
        .clone()
        .or_else(|| loaded.output.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&loaded.name));
    let mut s = normalize(loaded, cli.tol, cli.seed)?;
    if let Command::Sweep { alphas: Some(alphas) } = &cli.command {
        s.query.alphas = alphas.clone();
        if let Some(sweep) = s.sweep.as_mut() {
            sweep.expect.retain(|e| alphas.contains(&e.alpha));
        }
    }

    let mut timing = Timing {
        command: command_name(&cli.command).into(),
        threads: rayon::current_num_threads(),
        ..Timing::default()
    };
    let total = Instant::now();
    let problem = timing.stage("setup", || Problem::new(s.clone()))?;

    let mut oracle = OracleOutput::default();
    let mut mc = None;
    match &cli.command {
        Command::Run => {
            oracle = timing.stage("oracle", || evaluate(&problem, true))?;
            if let Some(spec) = &s.monte_carlo {
                let ensemble = timing.stage("sample", || montecarlo::sample(&problem, spec))?;
                if spec.dump_ensemble {
                    std::fs::create_dir_all(&out)?;
                    ensemble_io::save(&out.join("ensemble.bin"), &ensemble)?;
                }
                mc = Some(timing.stage("verify", || montecarlo::verify(&problem, spec, &ensemble))?);
            }
        }
        Command::Oracle => oracle = timing.stage("oracle", || evaluate(&problem, false))?,
        Command::Sweep { .. } => {
            if s.sweep.is_none() {
                bail!("scenario {} has no [sweep] block", s.name);
            }
            oracle = timing.stage("sweep", || evaluate(&problem, true))?;
            oracle.gates.retain(|g| g.name.starts_with("sweep"));
            oracle.certificates.clear();
        }
        Command::Sample => {
            let spec = s.monte_carlo.as_ref().context("scenario has no [monte-carlo] block")?;
            let ensemble = timing.stage("sample", || montecarlo::sample(&problem, spec))?;
            std::fs::create_dir_all(&out)?;
            let path = out.join("ensemble.bin");
            ensemble_io::save(&path, &ensemble)?;
            println!("wrote {} paths to {}", ensemble.n_paths, path.display());
        }
        Command::Verify { ensemble } => {
            let spec = s.monte_carlo.as_ref().context("scenario has no [monte-carlo] block")?;
            let ens = match ensemble {
                Some(path) => {
                    let e = ensemble_io::load(path).with_context(|| format!("reading {}", path.display()))?;
                    let expected = (problem.operator.truncation(), spec.steps, spec.paths, spec.seed, s.horizon);
                    let found = (e.modes, e.grid.steps(), e.n_paths, e.seed, e.grid.horizon());
                    if expected != found {
                        bail!(
                            "ensemble (modes, steps, paths, seed, T) = {found:?} does not match the scenario's {expected:?}"
                        );
                    }
                    e
                }
                None => timing.stage("sample", || montecarlo::sample(&problem, spec))?,
            };
            mc = Some(timing.stage("verify", || montecarlo::verify(&problem, spec, &ens))?);
        }
        Command::Report { .. } | Command::Scenarios => unreachable!(),
    }

    let mut gates = oracle.gates;
    let monte_carlo = mc.map(|(report, g)| {
        gates.extend(g);
        report
    });
    let all_gates_pass = gates.iter().all(|g| g.pass);
    let report = RunReport {
        versions: Versions::current(),
        command: timing.command.clone(),
        scenario: s,
        moments: oracle.moments,
        certificates: oracle.certificates,
        sweeps: oracle.sweeps,
        coefficient_check: oracle.coefficient_check,
        monte_carlo,
        gates,
        all_gates_pass,
    };
    report.write(&out)?;
    timing.total_seconds = total.elapsed().as_secs_f64();
    std::fs::write(out.join("timing.json"), serde_json::to_string_pretty(&timing)? + "\n")?;
    print_gates(&report.gates);
    println!("wrote {}", out.display());
    Ok(all_gates_pass)
}
