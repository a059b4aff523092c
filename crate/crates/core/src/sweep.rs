//! Parameter sweeps over one or two axes, feeding either engine, with CSV
//! (and optional JSON) output carrying the full effective configuration.

use std::io::{self, Write};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::analysis;
use crate::config::{ConfigError, RawConfig};
use crate::montecarlo;
use crate::units;

/// A sweepable scenario parameter. Values are given in the config-file units
/// of the key they feed (meters, nodes/km², milliseconds).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Altitude,
    CnDensity,
    CnDistRadius,
    TMax,
    ComputeLatency,
}

impl SweepParam {
    /// The CSV column header (also names the unit).
    pub fn column(&self) -> &'static str {
        match self {
            Self::Altitude => "altitude_m",
            Self::CnDensity => "cn_density_per_km2",
            Self::CnDistRadius => "cn_dist_radius_m",
            Self::TMax => "t_max_ms",
            Self::ComputeLatency => "compute_latency_ms",
        }
    }

    pub fn apply(&self, raw: &mut RawConfig, value: f64) {
        match self {
            Self::Altitude => raw.uav_altitude_m = value,
            Self::CnDensity => raw.cn_density_per_km2 = value,
            Self::CnDistRadius => raw.cn_dist_radius_m = Some(value),
            Self::TMax => raw.t_max_ms = value,
            Self::ComputeLatency => {
                raw.compute_latency_model = raw
                    .compute_latency_model
                    .with_characteristic_time(units::ms_to_seconds(value))
            }
        }
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "altitude" => Ok(Self::Altitude),
            "cn_density" => Ok(Self::CnDensity),
            "cn_dist_radius" => Ok(Self::CnDistRadius),
            "t_max" => Ok(Self::TMax),
            "compute_latency" => Ok(Self::ComputeLatency),
            other => Err(format!(
                "unknown sweep parameter `{other}` (expected altitude, cn_density, \
                 cn_dist_radius, t_max, or compute_latency)"
            )),
        }
    }
}

/// One swept axis: `param=start:stop:count[:log]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub log_spacing: bool,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        if n == 1 {
            return vec![self.start];
        }
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                if self.log_spacing {
                    (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + t * (self.stop - self.start)
                }
            })
            .collect()
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, range) = s
            .split_once('=')
            .ok_or_else(|| format!("axis `{s}` must look like param=start:stop:count[:log]"))?;
        let param: SweepParam = name.trim().parse()?;
        let parts: Vec<&str> = range.split(':').collect();
        if !(parts.len() == 3 || parts.len() == 4) {
            return Err(format!("axis range `{range}` must be start:stop:count[:log]"));
        }
        let num = |p: &str| -> Result<f64, String> {
            p.trim().parse().map_err(|_| format!("`{p}` is not a number"))
        };
        let log_spacing = match parts.get(3) {
            None => false,
            Some(&"log") => true,
            Some(other) => return Err(format!("unknown axis spacing `{other}` (only `log`)")),
        };
        Ok(Self {
            param,
            start: num(parts[0])?,
            stop: num(parts[1])?,
            count: num(parts[2])? as usize,
            log_spacing,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Theory,
    Mc,
    Both,
}

impl Engine {
    fn runs_theory(&self) -> bool {
        matches!(self, Self::Theory | Self::Both)
    }
    fn runs_mc(&self) -> bool {
        matches!(self, Self::Mc | Self::Both)
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "theory" => Ok(Self::Theory),
            "mc" => Ok(Self::Mc),
            "both" => Ok(Self::Both),
            other => Err(format!("unknown engine `{other}` (theory, mc, or both)")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
    pub engine: Engine,
    pub n_trials: u64,
    pub gus_per_trial: u64,
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(format!("need 1 or 2 axes, got {}", self.axes.len()));
        }
        for axis in &self.axes {
            if axis.count < 2 {
                return Err(format!("axis {} needs at least 2 points", axis.param.column()));
            }
            if !(axis.start > 0.0 && axis.stop > 0.0) {
                return Err(format!("axis {} range must be positive", axis.param.column()));
            }
        }
        if self.engine.runs_mc() && self.n_trials == 0 {
            return Err("mc engine needs at least one trial".to_string());
        }
        Ok(())
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    /// Swept values, in axis order.
    pub axis_values: Vec<f64>,
    pub theory_prob: Option<f64>,
    pub mc_mean: Option<f64>,
    pub mc_ci: Option<f64>,
    /// Qualified-node intensity for a user at the zone center.
    pub lambda_center: f64,
    /// Service radius for a user at the zone center, m.
    pub service_radius_center_m: f64,
    pub wall_time_s: f64,
    /// False when any quadrature in this record failed to converge.
    pub converged: bool,
}

/// Evaluates the grid in row-major axis order. Grid points are independent;
/// with the `parallel` feature they are evaluated concurrently and assembled
/// back in grid order.
pub fn run_sweep(base: &RawConfig, spec: &SweepSpec) -> Result<Vec<SweepRecord>, ConfigError> {
    spec.validate().map_err(ConfigError::InvalidSweep)?;
    let grid = grid_points(&spec.axes);
    // surface config errors (e.g. a swept value violating an invariant)
    // deterministically on the first point rather than mid-parallel-flight
    for point in &grid {
        configure(base, &spec.axes, point)?;
    }
    let eval = |point: &Vec<f64>| -> SweepRecord {
        let started = Instant::now();
        let cfg = configure(base, &spec.axes, point).expect("validated above");
        let center = analysis::analyze_at(0.0, &cfg);
        let mut converged = center.converged;
        let theory_prob = if spec.engine.runs_theory() {
            let avg = analysis::average_success_probability(&cfg);
            converged &= avg.converged;
            Some(avg.mean_prob)
        } else {
            None
        };
        let (mc_mean, mc_ci) = if spec.engine.runs_mc() {
            let est = montecarlo::estimate_success(&cfg, spec.n_trials, spec.gus_per_trial, spec.seed);
            (Some(est.mean), Some(est.ci_halfwidth))
        } else {
            (None, None)
        };
        SweepRecord {
            axis_values: point.clone(),
            theory_prob,
            mc_mean,
            mc_ci,
            lambda_center: center.lambda,
            service_radius_center_m: center.service_radius,
            wall_time_s: started.elapsed().as_secs_f64(),
            converged,
        }
    };
    Ok(map_grid(&grid, eval))
}

#[cfg(feature = "parallel")]
fn map_grid<F>(grid: &[Vec<f64>], f: F) -> Vec<SweepRecord>
where
    F: Fn(&Vec<f64>) -> SweepRecord + Sync + Send,
{
    use rayon::prelude::*;
    grid.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_grid<F>(grid: &[Vec<f64>], f: F) -> Vec<SweepRecord>
where
    F: Fn(&Vec<f64>) -> SweepRecord + Sync + Send,
{
    grid.iter().map(f).collect()
}

fn grid_points(axes: &[Axis]) -> Vec<Vec<f64>> {
    match axes {
        [a] => a.values().into_iter().map(|v| vec![v]).collect(),
        [a, b] => {
            let bs = b.values();
            a.values()
                .into_iter()
                .flat_map(|va| bs.iter().map(move |&vb| vec![va, vb]))
                .collect()
        }
        _ => unreachable!("spec validation enforces 1..=2 axes"),
    }
}

fn configure(
    base: &RawConfig,
    axes: &[Axis],
    point: &[f64],
) -> Result<crate::config::ScenarioConfig, ConfigError> {
    let mut raw = base.clone();
    for (axis, &value) in axes.iter().zip(point) {
        axis.param.apply(&mut raw, value);
    }
    raw.into_scenario()
}

/// Writes the records as CSV behind a `#` header block carrying the tool
/// version, the base configuration, and the sweep spec.
pub fn write_csv<W: Write>(
    w: &mut W,
    base: &RawConfig,
    spec: &SweepSpec,
    records: &[SweepRecord],
) -> io::Result<()> {
    writeln!(w, "# uav-offload v{} sweep", env!("CARGO_PKG_VERSION"))?;
    writeln!(
        w,
        "# engine = {}",
        match spec.engine {
            Engine::Theory => "theory",
            Engine::Mc => "mc",
            Engine::Both => "both",
        }
    )?;
    if spec.engine.runs_mc() {
        writeln!(
            w,
            "# trials = {}, gus_per_trial = {}, seed = {}",
            spec.n_trials, spec.gus_per_trial, spec.seed
        )?;
    }
    writeln!(w, "# base config:")?;
    for line in base.echo_lines() {
        writeln!(w, "#   {line}")?;
    }
    let axis_cols: Vec<&str> = spec.axes.iter().map(|a| a.param.column()).collect();
    writeln!(
        w,
        "{},theory_prob,mc_mean,mc_ci,lambda_center,service_radius_center_m,wall_time_s",
        axis_cols.join(",")
    )?;
    for record in records {
        let axis_vals: Vec<String> = record.axis_values.iter().map(|v| format!("{v}")).collect();
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.9}")).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{:.9},{:.3},{:.3}",
            axis_vals.join(","),
            opt(record.theory_prob),
            opt(record.mc_mean),
            opt(record.mc_ci),
            record.lambda_center,
            record.service_radius_center_m,
            record.wall_time_s
        )?;
    }
    Ok(())
}
