//! Browser bindings for the offloading evaluator. Three operations drive the
//! demo page: the altitude response curve, the per-user radial profile, and
//! a Monte Carlo spot check. Inputs arrive as the same `key = value` config
//! text the CLI reads; results leave as JSON strings for the page to plot.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use uav_offload::{analysis, config, montecarlo};

#[derive(Serialize)]
struct CurvePoint {
    altitude_m: f64,
    prob: f64,
    lambda_center: f64,
    service_radius_center_m: f64,
}

#[derive(Serialize)]
struct ProfilePoint {
    r_u_m: f64,
    prob: f64,
    lambda: f64,
    service_radius_m: f64,
    t1_ms: f64,
}

#[derive(Serialize)]
struct McPoint {
    altitude_m: f64,
    mean: f64,
    ci_halfwidth: f64,
    n_trials: u64,
    gus_per_trial: u64,
    seed: u64,
}

fn curve(config_text: &str, h_min: f64, h_max: f64, points: usize) -> Result<String, String> {
    if !(h_min > 0.0 && h_max > h_min && (2..=512).contains(&points)) {
        return Err(format!("bad altitude grid {h_min}..{h_max} x {points}"));
    }
    let raw = config::RawConfig::parse(config_text).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(points);
    for i in 0..points {
        let altitude = h_min + i as f64 * (h_max - h_min) / (points - 1) as f64;
        let mut point_raw = raw.clone();
        point_raw.uav_altitude_m = altitude;
        let cfg = point_raw.into_scenario().map_err(|e| e.to_string())?;
        let avg = analysis::average_success_probability(&cfg);
        let center = analysis::analyze_at(0.0, &cfg);
        out.push(CurvePoint {
            altitude_m: altitude,
            prob: avg.mean_prob,
            lambda_center: center.lambda,
            service_radius_center_m: center.service_radius,
        });
    }
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

fn profile(config_text: &str, points: usize) -> Result<String, String> {
    if !(2..=512).contains(&points) {
        return Err(format!("bad point count {points}"));
    }
    let cfg = config::load_config(config_text).map_err(|e| e.to_string())?;
    let out: Vec<ProfilePoint> = (0..points)
        .map(|i| {
            let r_u = i as f64 * cfg.request_radius / (points - 1) as f64;
            let p = analysis::analyze_at(r_u, &cfg);
            ProfilePoint {
                r_u_m: r_u,
                prob: p.success_prob,
                lambda: p.lambda,
                service_radius_m: p.service_radius,
                t1_ms: p.t1 * 1e3,
            }
        })
        .collect();
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

fn mc_check(config_text: &str, trials: u32, gus: u32, seed: u32) -> Result<String, String> {
    if trials == 0 || gus == 0 {
        return Err("trials and gus must be positive".to_string());
    }
    if u64::from(trials) * u64::from(gus) > 2_000_000 {
        return Err("trials x gus too large for an interactive run".to_string());
    }
    let cfg = config::load_config(config_text).map_err(|e| e.to_string())?;
    let est = montecarlo::estimate_success(&cfg, u64::from(trials), u64::from(gus), u64::from(seed));
    serde_json::to_string(&McPoint {
        altitude_m: cfg.altitude,
        mean: est.mean,
        ci_halfwidth: est.ci_halfwidth,
        n_trials: est.n_trials,
        gus_per_trial: est.gus_per_trial,
        seed: est.seed,
    })
    .map_err(|e| e.to_string())
}

/// Averaged success probability over an altitude grid; JSON array of
/// `{altitude_m, prob, lambda_center, service_radius_center_m}`.
#[wasm_bindgen]
pub fn altitude_curve(config_text: &str, h_min: f64, h_max: f64, points: usize) -> Result<String, JsError> {
    curve(config_text, h_min, h_max, points).map_err(|e| JsError::new(&e))
}

/// Per-user diagnostics across the request zone; JSON array of
/// `{r_u_m, prob, lambda, service_radius_m, t1_ms}`.
#[wasm_bindgen]
pub fn user_profile(config_text: &str, points: usize) -> Result<String, JsError> {
    profile(config_text, points).map_err(|e| JsError::new(&e))
}

/// Monte Carlo estimate at the configured altitude; JSON
/// `{altitude_m, mean, ci_halfwidth, n_trials, gus_per_trial, seed}`.
#[wasm_bindgen]
pub fn monte_carlo_check(config_text: &str, trials: u32, gus: u32, seed: u32) -> Result<String, JsError> {
    mc_check(config_text, trials, gus, seed).map_err(|e| JsError::new(&e))
}
