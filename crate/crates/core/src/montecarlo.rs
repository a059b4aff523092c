//! Monte Carlo simulation of the offloading pipeline, independent of the
//! analytical chain it validates.
//!
//! A trial draws one node realization shared by all its users, places each
//! user by the radial density 2r/R², draws a fresh computing time per
//! (user, node) pair, and marks the user served when some node finishes the
//! whole chain inside the budget. Trials are the independence unit for the
//! confidence interval because users inside a trial share the node
//! realization.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::channel::{transmission_latency, ChannelParams, LinkGeometry};
use crate::compute::ComputeLatencyModel;
use crate::config::ScenarioConfig;
use crate::coverage::{self, RADIUS_CAP};
use crate::rng::TrialStreams;

/// Trial and user counts for the headline validation runs.
pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_GUS_PER_TRIAL: u64 = 400;
pub const DEFAULT_CONFIDENCE: f64 = 0.99;

/// A simulated success-probability estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    /// Served fraction over all user outcomes.
    pub mean: f64,
    /// Normal-approximation halfwidth over per-trial means.
    pub ci_halfwidth: f64,
    pub confidence_level: f64,
    pub n_trials: u64,
    pub gus_per_trial: u64,
    pub seed: u64,
}

/// One user's outcome inside a trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    /// Radial user position, m.
    pub gu_radius: f64,
    pub served: bool,
    /// Best end-to-end latency over the realized nodes, s; `None` when the
    /// realization holds no nodes at all.
    pub best_e2e_latency: Option<f64>,
    /// Nodes that met the end-to-end deadline for this user.
    pub qualified_cn_count: u64,
}

/// Draws a homogeneous Poisson point process on a disc of the given radius:
/// Poisson count, then independent uniform positions (radius by √U scaling).
pub fn sample_ppp_disc<R: Rng + ?Sized>(density: f64, radius: f64, rng: &mut R) -> Vec<[f64; 2]> {
    let mean = density * std::f64::consts::PI * radius * radius;
    if mean <= 0.0 {
        return Vec::new();
    }
    let count = Poisson::new(mean).expect("positive finite mean").sample(rng) as usize;
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let r = radius * rng.random::<f64>().sqrt();
        let theta = 2.0 * std::f64::consts::PI * rng.random::<f64>();
        points.push([r * theta.cos(), r * theta.sin()]);
    }
    points
}

/// Reusable per-scenario simulation state.
pub struct Simulator<'a> {
    cfg: &'a ScenarioConfig,
    up: ChannelParams,
    down: ChannelParams,
    /// Radius of the disc node realizations are drawn on. Nodes beyond it
    /// can never qualify, so truncating there realizes the unbounded plane
    /// exactly for this metric.
    pub sim_radius: f64,
}

impl<'a> Simulator<'a> {
    pub fn new(cfg: &'a ScenarioConfig) -> Self {
        let up = cfg.uplink();
        let down = cfg.downlink();
        let sim_radius = if cfg.cn_dist_radius.is_finite() {
            cfg.cn_dist_radius
        } else {
            // loosest bound over user positions: the service radius of a
            // user directly under the UAV
            let t1_center = transmission_latency(
                cfg.data_size,
                &up,
                &LinkGeometry::new(0.0, cfg.altitude),
                cfg.bandwidth,
                cfg.noise_power,
            );
            let residual = cfg.t_max - t1_center;
            if residual <= 0.0 || residual.is_nan() {
                0.0
            } else if residual == f64::INFINITY {
                RADIUS_CAP
            } else {
                coverage::max_service_radius(
                    residual,
                    &down,
                    cfg.altitude,
                    cfg.data_size,
                    cfg.bandwidth,
                    cfg.noise_power,
                )
                .expect("finite residual")
                .radius
            }
        };
        let expected_nodes = cfg.cn_density * std::f64::consts::PI * sim_radius * sim_radius;
        assert!(
            expected_nodes < 1e7,
            "a node realization would average {expected_nodes:.1e} points; \
             bound cn_dist_radius or tighten t_max before simulating"
        );
        Self {
            cfg,
            up,
            down,
            sim_radius,
        }
    }

    fn t1(&self, r_u: f64) -> f64 {
        transmission_latency(
            self.cfg.data_size,
            &self.up,
            &LinkGeometry::new(r_u, self.cfg.altitude),
            self.cfg.bandwidth,
            self.cfg.noise_power,
        )
    }

    fn t2(&self, r_c: f64) -> f64 {
        transmission_latency(
            self.cfg.data_size,
            &self.down,
            &LinkGeometry::new(r_c, self.cfg.altitude),
            self.cfg.bandwidth,
            self.cfg.noise_power,
        )
    }

    /// Forwarding latencies of one node realization, sorted ascending.
    fn realize_t2(&self, streams: &mut TrialStreams) -> Vec<f64> {
        let mut t2: Vec<f64> = sample_ppp_disc(self.cfg.cn_density, self.sim_radius, &mut streams.cn)
            .iter()
            .map(|p| self.t2((p[0] * p[0] + p[1] * p[1]).sqrt()))
            .collect();
        t2.sort_by(f64::total_cmp);
        t2
    }

    fn outcome_for_user(&self, r_u: f64, sorted_t2: &[f64], streams: &mut TrialStreams) -> TrialOutcome {
        let t1 = self.t1(r_u);
        let (qualified, best) = match &self.cfg.compute_model {
            // degenerate computing time: a node qualifies iff its forwarding
            // latency fits the fixed allowance
            ComputeLatencyModel::Deterministic { t_c } => {
                let allowance = self.cfg.t_max - t1 - t_c;
                let qualified = sorted_t2.partition_point(|&t2| t2 <= allowance) as u64;
                let best = sorted_t2.first().map(|&min_t2| t1 + min_t2 + t_c);
                (qualified, best)
            }
            model => {
                let mut qualified = 0u64;
                let mut best: Option<f64> = None;
                for &t2 in sorted_t2 {
                    let t_c = model.sample_latency(&mut streams.latency, self.cfg.data_size);
                    let e2e = t1 + t2 + t_c;
                    if e2e <= self.cfg.t_max {
                        qualified += 1;
                    }
                    best = Some(best.map_or(e2e, |b: f64| b.min(e2e)));
                }
                (qualified, best)
            }
        };
        TrialOutcome {
            gu_radius: r_u,
            served: qualified > 0,
            best_e2e_latency: best,
            qualified_cn_count: qualified,
        }
    }

    /// One trial: a shared node realization, `gus_per_trial` users drawn by
    /// the radial density, fresh computing times per (user, node) pair.
    pub fn run_trial(&self, streams: &mut TrialStreams, gus_per_trial: u64) -> Vec<TrialOutcome> {
        let sorted_t2 = self.realize_t2(streams);
        (0..gus_per_trial)
            .map(|_| {
                let r_u = self.cfg.request_radius * streams.gu.random::<f64>().sqrt();
                self.outcome_for_user(r_u, &sorted_t2, streams)
            })
            .collect()
    }

    /// One trial with a single user pinned at `r_u`; validation hook for the
    /// per-distance Poisson structure.
    pub fn trial_at_radius(&self, streams: &mut TrialStreams, r_u: f64) -> TrialOutcome {
        let sorted_t2 = self.realize_t2(streams);
        self.outcome_for_user(r_u, &sorted_t2, streams)
    }
}

/// Convenience wrapper over [`Simulator::run_trial`] for a one-off trial.
pub fn run_trial(
    cfg: &ScenarioConfig,
    gus_per_trial: u64,
    master_seed: u64,
    trial_index: u64,
) -> Vec<TrialOutcome> {
    let sim = Simulator::new(cfg);
    let mut streams = TrialStreams::for_trial(master_seed, trial_index);
    sim.run_trial(&mut streams, gus_per_trial)
}

/// Runs `n_trials` independent trials and aggregates the served fraction.
///
/// Identical (cfg, n_trials, gus_per_trial, seed) reproduce the estimate
/// bit-for-bit: each trial owns streams keyed by its index, results are
/// collected in index order, and the reduction is a fixed-order fold over
/// exact integer counts.
pub fn estimate_success(
    cfg: &ScenarioConfig,
    n_trials: u64,
    gus_per_trial: u64,
    seed: u64,
) -> Estimate {
    assert!(n_trials >= 1, "need at least one trial");
    assert!(gus_per_trial >= 1, "need at least one user per trial");
    let sim = Simulator::new(cfg);
    let served_by_trial = map_trials(n_trials, |trial| {
        let mut streams = TrialStreams::for_trial(seed, trial);
        sim.run_trial(&mut streams, gus_per_trial)
            .iter()
            .filter(|o| o.served)
            .count() as u64
    });

    let total_served: u64 = served_by_trial.iter().sum();
    let mean = total_served as f64 / (n_trials * gus_per_trial) as f64;

    let ci_halfwidth = if n_trials > 1 {
        let variance = served_by_trial
            .iter()
            .map(|&c| {
                let m = c as f64 / gus_per_trial as f64;
                (m - mean) * (m - mean)
            })
            .sum::<f64>()
            / (n_trials - 1) as f64;
        normal_quantile(0.5 + DEFAULT_CONFIDENCE / 2.0) * (variance / n_trials as f64).sqrt()
    } else {
        0.0
    };

    Estimate {
        mean,
        ci_halfwidth,
        confidence_level: DEFAULT_CONFIDENCE,
        n_trials,
        gus_per_trial,
        seed,
    }
}

#[cfg(feature = "parallel")]
fn map_trials<F: Fn(u64) -> u64 + Sync + Send>(n_trials: u64, f: F) -> Vec<u64> {
    use rayon::prelude::*;
    (0..n_trials).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_trials<F: Fn(u64) -> u64 + Sync + Send>(n_trials: u64, f: F) -> Vec<u64> {
    (0..n_trials).map(f).collect()
}

/// Normal-approximation binomial confidence halfwidth at the default
/// confidence level, for a proportion over `n` independent outcomes.
pub fn normal_ci_halfwidth(p: f64, n: u64) -> f64 {
    normal_quantile(0.5 + DEFAULT_CONFIDENCE / 2.0) * (p * (1.0 - p) / n as f64).sqrt()
}

/// Inverse standard normal CDF (Acklam's rational approximation, absolute
/// error below 1.2e-9; far finer than any confidence bound here needs).
pub(crate) fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0,1), got {p}");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}
