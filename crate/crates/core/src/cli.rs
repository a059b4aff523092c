//! The `uav-offload` command line: single-point analysis, simulation,
//! theory-vs-simulation comparison, and parameter sweeps.
//!
//! Exit codes are scriptable: 0 success, 1 config or I/O error, 2 comparison
//! failure, 3 quadrature non-convergence anywhere in a sweep.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis;
use crate::config::RawConfig;
use crate::montecarlo;
use crate::sweep::{self, Axis, Engine, SweepSpec};
use crate::units;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_COMPARE: u8 = 2;
pub const EXIT_NON_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "uav-offload",
    version,
    about = "Task completion probability for UAV-relayed task offloading: analytical chain, Monte Carlo validation, and parameter sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the spatially averaged success probability analytically.
    Analyze {
        #[command(flatten)]
        config: ConfigOpts,
        /// Emit JSON instead of the human-readable report.
        #[arg(long)]
        json: bool,
    },
    /// Estimate the success probability by Monte Carlo simulation.
    Simulate {
        #[command(flatten)]
        config: ConfigOpts,
        #[command(flatten)]
        mc: McOpts,
    },
    /// Run both engines over an altitude grid and check their agreement.
    Compare {
        #[command(flatten)]
        config: ConfigOpts,
        #[command(flatten)]
        mc: McOpts,
        /// Altitude grid as start:stop:count, meters.
        #[arg(long, default_value = "100:1000:19")]
        grid: String,
    },
    /// Sweep one or two parameters and write a CSV dataset.
    Sweep {
        #[command(flatten)]
        config: ConfigOpts,
        /// Swept axis as param=start:stop:count[:log]; repeat for a 2D grid.
        /// Params: altitude, cn_density, cn_dist_radius, t_max,
        /// compute_latency (units: m, nodes/km2, ms).
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
        /// theory, mc, or both.
        #[arg(long, default_value = "theory")]
        engine: String,
        /// CSV output path.
        #[arg(long)]
        output: PathBuf,
        /// Optional JSON mirror of the records.
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        mc: McOpts,
    },
}

#[derive(Args)]
struct ConfigOpts {
    /// Config file (key = value lines); defaults apply when omitted.
    #[arg(long, env = "UAV_OFFLOAD_CONFIG")]
    config: Option<PathBuf>,
    /// Override a config key after loading, e.g. --set uav_altitude_m=300.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigOpts {
    fn raw(&self) -> anyhow::Result<RawConfig> {
        let text = match &self.config {
            Some(path) => fs::read_to_string(path)
                .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?,
            None => String::new(),
        };
        let mut raw = RawConfig::parse(&text)?;
        for pair in &self.set {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| anyhow::anyhow!("--set `{pair}` must be KEY=VALUE"))?;
            raw.set(key.trim(), value.trim())?;
        }
        Ok(raw)
    }
}

#[derive(Args)]
struct McOpts {
    /// Number of Monte Carlo trials.
    #[arg(long, default_value_t = montecarlo::DEFAULT_TRIALS, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Ground users sampled per trial.
    #[arg(long, default_value_t = montecarlo::DEFAULT_GUS_PER_TRIAL, value_parser = clap::value_parser!(u64).range(1..))]
    gus: u64,
    /// Master seed; fixed seed means bit-identical output.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads (0 = all cores). Never changes results.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

/// Parses the process arguments and runs the selected command.
pub fn run() -> ExitCode {
    // clap's default usage-error code is 2, which this tool reserves for
    // comparison failures; remap usage errors onto the config/IO code
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) if err.use_stderr() => {
            err.print().expect("stderr");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(help_or_version) => {
            help_or_version.print().expect("stdout");
            return ExitCode::from(EXIT_OK);
        }
    };
    let (jobs, body): (usize, Box<dyn FnOnce() -> anyhow::Result<u8> + Send>) = match cli.command {
        Command::Analyze { config, json } => (0, Box::new(move || cmd_analyze(&config, json))),
        Command::Simulate { config, mc } => (mc.jobs, Box::new(move || cmd_simulate(&config, &mc))),
        Command::Compare { config, mc, grid } => {
            (mc.jobs, Box::new(move || cmd_compare(&config, &mc, &grid)))
        }
        Command::Sweep {
            config,
            axes,
            engine,
            output,
            json,
            mc,
        } => (
            mc.jobs,
            Box::new(move || cmd_sweep(&config, &axes, &engine, &output, json.as_deref(), &mc)),
        ),
    };
    match with_jobs(jobs, body) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

#[cfg(feature = "parallel")]
fn with_jobs<T: Send>(jobs: usize, f: Box<dyn FnOnce() -> T + Send>) -> T {
    if jobs == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("thread pool")
            .install(f)
    }
}

#[cfg(not(feature = "parallel"))]
fn with_jobs<T: Send>(_jobs: usize, f: Box<dyn FnOnce() -> T + Send>) -> T {
    f()
}

#[derive(Serialize)]
struct AnalyzeReport {
    average: analysis::AverageAnalysis,
    points: Vec<analysis::PointAnalysis>,
}

fn cmd_analyze(config: &ConfigOpts, json: bool) -> anyhow::Result<u8> {
    let cfg = config.raw()?.into_scenario()?;
    let average = analysis::average_success_probability(&cfg);
    let radii = [0.0, cfg.request_radius / 2.0, cfg.request_radius];
    let points: Vec<_> = radii.iter().map(|&r| analysis::analyze_at(r, &cfg)).collect();
    let report = AnalyzeReport { average, points };

    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!(
            "average task completion probability: {:.6}",
            report.average.mean_prob
        );
        println!(
            "quadrature: converged = {}, error estimate = {:.3e}",
            report.average.converged, report.average.quad_error
        );
        println!("per-distance diagnostics:");
        println!("  r_u_m      lambda     success_prob  service_radius_m  t1_ms");
        for p in &report.points {
            println!(
                "  {:<9.1} {:<10.4} {:<13.6} {:<17.1} {:.4}",
                p.r_u,
                p.lambda,
                p.success_prob,
                p.service_radius,
                units::seconds_to_ms(p.t1)
            );
        }
    }
    Ok(EXIT_OK)
}

fn cmd_simulate(config: &ConfigOpts, mc: &McOpts) -> anyhow::Result<u8> {
    let cfg = config.raw()?.into_scenario()?;
    let est = montecarlo::estimate_success(&cfg, mc.trials, mc.gus, mc.seed);
    // fixed formatting: same seed must produce byte-identical output
    println!("mean: {:.6}", est.mean);
    println!("ci_halfwidth: {:.6}", est.ci_halfwidth);
    println!("confidence_level: {:.2}", est.confidence_level);
    println!("trials: {}", est.n_trials);
    println!("gus_per_trial: {}", est.gus_per_trial);
    println!("seed: {}", est.seed);
    Ok(EXIT_OK)
}

fn cmd_compare(config: &ConfigOpts, mc: &McOpts, grid: &str) -> anyhow::Result<u8> {
    let raw = config.raw()?;
    let axis: Axis = format!("altitude={grid}").parse().map_err(anyhow::Error::msg)?;
    if axis.count < 1 {
        anyhow::bail!("comparison grid needs at least one altitude");
    }

    println!("altitude_m  theory      mc          abs_diff    mc_ci       verdict");
    let mut failures = 0usize;
    for altitude in axis.values() {
        let mut point = raw.clone();
        point.uav_altitude_m = altitude;
        let cfg = point.into_scenario()?;
        let theory = analysis::average_success_probability(&cfg).mean_prob;
        let est = montecarlo::estimate_success(&cfg, mc.trials, mc.gus, mc.seed);
        let diff = (theory - est.mean).abs();
        let tolerance = (3.0 * est.ci_halfwidth).max(0.01);
        let pass = diff <= tolerance;
        if !pass {
            failures += 1;
        }
        println!(
            "{:<11.1} {:<11.6} {:<11.6} {:<11.6} {:<11.6} {}",
            altitude,
            theory,
            est.mean,
            diff,
            est.ci_halfwidth,
            if pass { "pass" } else { "FAIL" }
        );
    }
    if failures == 0 {
        println!("summary: all {} altitudes within max(0.01, 3*ci)", axis.count);
        Ok(EXIT_OK)
    } else {
        println!("summary: {failures}/{} altitudes FAILED", axis.count);
        Ok(EXIT_COMPARE)
    }
}

fn cmd_sweep(
    config: &ConfigOpts,
    axes: &[String],
    engine: &str,
    output: &std::path::Path,
    json: Option<&std::path::Path>,
    mc: &McOpts,
) -> anyhow::Result<u8> {
    let raw = config.raw()?;
    let spec = SweepSpec {
        axes: axes
            .iter()
            .map(|s| s.parse::<Axis>())
            .collect::<Result<_, _>>()
            .map_err(anyhow::Error::msg)?,
        engine: engine.parse::<Engine>().map_err(anyhow::Error::msg)?,
        n_trials: mc.trials,
        gus_per_trial: mc.gus,
        seed: mc.seed,
    };
    let records = sweep::run_sweep(&raw, &spec)?;

    let mut csv = Vec::new();
    sweep::write_csv(&mut csv, &raw, &spec, &records)?;
    fs::write(output, &csv)
        .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", output.display()))?;
    if let Some(path) = json {
        fs::write(path, serde_json::to_string_pretty(&records)?)
            .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?;
    }

    let non_converged = records.iter().filter(|r| !r.converged).count();
    println!("wrote {} records to {}", records.len(), output.display());
    if non_converged > 0 {
        eprintln!("warning: {non_converged} records carry non-converged quadrature");
        return Ok(EXIT_NON_CONVERGED);
    }
    Ok(EXIT_OK)
}
