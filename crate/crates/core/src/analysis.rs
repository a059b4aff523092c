//! Analytical evaluation chain: qualified-node intensity, per-user success
//! probability, and the spatial average over the request zone.
//!
//! For a user at horizontal distance r_u the number of nodes that can finish
//! its task in time is Poisson with mean
//!
//! Λ(r_u) = 2π·λ_c ∫₀^R F(T_max − t₁(r_u) − t₂(r_c)) · r_c dr_c,
//!
//! R = min(service radius, node distribution radius), F the computing-latency
//! CDF. Success is the complement of the void probability, 1 − exp(−Λ), and
//! the system-wide figure averages that over the radial user density
//! 2·r_u/R_u². The nested integrals have no closed form, hence the adaptive
//! quadrature underneath; the deterministic-CDF special case collapses to a
//! disc area and doubles as an oracle for the quadrature path.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;

use serde::Serialize;

use crate::channel::{transmission_latency, LinkGeometry};
use crate::config::ScenarioConfig;
use crate::coverage::{self, ServiceRadius};
use crate::quad::{self, Quadrature};

/// Inner (intensity) integral tolerances.
pub const INNER_REL_TOL: f64 = 1e-8;
pub const INNER_ABS_TOL: f64 = 1e-12;
/// Outer (spatial average) tolerances; the metric is a probability needing
/// about four significant digits, the inner error budget dominates below.
pub const OUTER_REL_TOL: f64 = 1e-6;
pub const OUTER_ABS_TOL: f64 = 1e-12;

/// Everything the chain knows about one user distance.
#[derive(Debug, Clone, Serialize)]
pub struct PointAnalysis {
    /// Horizontal user-UAV distance, m.
    pub r_u: f64,
    /// Expected number of qualified nodes Λ(r_u).
    pub lambda: f64,
    /// 1 − exp(−Λ).
    pub success_prob: f64,
    /// Communication-constrained service radius, m.
    pub service_radius: f64,
    /// Service-radius search hit its ceiling.
    pub capped: bool,
    /// Uplink latency t₁(r_u), s.
    pub t1: f64,
    /// Error estimate of the intensity integral (same scale as `lambda`).
    pub quad_error: f64,
    pub converged: bool,
}

/// The spatially averaged success probability.
#[derive(Debug, Clone, Serialize)]
pub struct AverageAnalysis {
    pub mean_prob: f64,
    /// Outer quadrature error estimate, probability scale.
    pub quad_error: f64,
    /// False if the outer rule or any inner evaluation failed to converge.
    pub converged: bool,
}

/// Full analytical evaluation at one user distance.
pub fn analyze_at(r_u: f64, cfg: &ScenarioConfig) -> PointAnalysis {
    let up = cfg.uplink();
    let t1 = transmission_latency(
        cfg.data_size,
        &up,
        &LinkGeometry::new(r_u, cfg.altitude),
        cfg.bandwidth,
        cfg.noise_power,
    );

    // Comm-limited before forwarding even starts.
    if t1 >= cfg.t_max || t1.is_nan() {
        return PointAnalysis {
            r_u,
            lambda: 0.0,
            success_prob: 0.0,
            service_radius: 0.0,
            capped: false,
            t1,
            quad_error: 0.0,
            converged: true,
        };
    }

    let residual = cfg.t_max - t1;
    let down = cfg.downlink();
    let service = coverage::max_service_radius(
        residual,
        &down,
        cfg.altitude,
        cfg.data_size,
        cfg.bandwidth,
        cfg.noise_power,
    )
    .expect("residual is finite: t1 < t_max and t_max is finite");

    let upper = service.radius.min(cfg.cn_dist_radius);
    if cfg.cn_density == 0.0 || upper <= 0.0 {
        return from_lambda(r_u, 0.0, &service, t1, 0.0, true);
    }

    let t2 = |r_c: f64| {
        transmission_latency(
            cfg.data_size,
            &down,
            &LinkGeometry::new(r_c, cfg.altitude),
            cfg.bandwidth,
            cfg.noise_power,
        )
    };
    let integrand = |r_c: f64| cfg.compute_model.latency_cdf(residual - t2(r_c), cfg.data_size) * r_c;

    // CDF jumps and kinks land at known radii (where the residual after
    // forwarding crosses a kink time); hand them to the quadrature so a
    // discontinuity near the rim cannot hide between rule nodes.
    let breakpoints: Vec<f64> = cfg
        .compute_model
        .cdf_kink_times(cfg.data_size)
        .into_iter()
        .filter(|tau| *tau < residual)
        .map(|tau| {
            coverage::max_service_radius(
                residual - tau,
                &down,
                cfg.altitude,
                cfg.data_size,
                cfg.bandwidth,
                cfg.noise_power,
            )
            .expect("finite residual")
            .radius
        })
        .collect();
    let q = quad::integrate_with_breakpoints(integrand, 0.0, upper, &breakpoints, INNER_REL_TOL, INNER_ABS_TOL);

    let scale = 2.0 * std::f64::consts::PI * cfg.cn_density;
    let lambda = (scale * q.value).max(0.0);
    from_lambda(r_u, lambda, &service, t1, scale * q.error_estimate, q.converged)
}

fn from_lambda(
    r_u: f64,
    lambda: f64,
    service: &ServiceRadius,
    t1: f64,
    quad_error: f64,
    converged: bool,
) -> PointAnalysis {
    PointAnalysis {
        r_u,
        lambda,
        success_prob: 1.0 - (-lambda).exp(),
        service_radius: service.radius,
        capped: service.capped,
        t1,
        quad_error,
        converged,
    }
}

/// Expected number of qualified nodes for a user at `r_u`.
pub fn qualified_intensity(r_u: f64, cfg: &ScenarioConfig) -> f64 {
    analyze_at(r_u, cfg).lambda
}

/// Probability that at least one node completes the task in time for a user
/// at `r_u`.
pub fn success_probability(r_u: f64, cfg: &ScenarioConfig) -> f64 {
    analyze_at(r_u, cfg).success_prob
}

/// Averages `f(r)` over a disc of the given radius with the radial density
/// 2r/radius²; `value` is the average, errors scaled accordingly.
pub(crate) fn radial_average<F: Fn(f64) -> f64>(f: F, radius: f64) -> Quadrature {
    let q = quad::integrate(|r| f(r) * r, 0.0, radius, OUTER_REL_TOL, OUTER_ABS_TOL);
    let norm = 2.0 / (radius * radius);
    Quadrature {
        value: q.value * norm,
        error_estimate: q.error_estimate * norm,
        converged: q.converged,
        evaluations: q.evaluations,
    }
}

/// Success probability averaged over user positions in the request zone.
///
/// The outer adaptive rule revisits abscissae when it subdivides, so the
/// per-distance evaluations are memoized for the duration of one call. The
/// cache is per-evaluation; concurrent calls share nothing.
pub fn average_success_probability(cfg: &ScenarioConfig) -> AverageAnalysis {
    let cache: RefCell<HashMap<u64, f64>> = RefCell::new(HashMap::new());
    let inner_converged = Cell::new(true);
    let prob = |r_u: f64| {
        if let Some(p) = cache.borrow().get(&r_u.to_bits()) {
            return *p;
        }
        let point = analyze_at(r_u, cfg);
        if !point.converged {
            inner_converged.set(false);
        }
        cache.borrow_mut().insert(r_u.to_bits(), point.success_prob);
        point.success_prob
    };
    let q = radial_average(prob, cfg.request_radius);
    AverageAnalysis {
        mean_prob: q.value.clamp(0.0, 1.0),
        quad_error: q.error_estimate,
        converged: q.converged && inner_converged.get(),
    }
}

/// Closed form of the intensity for a deterministic computing time: the CDF
/// is a step, so the integral collapses to the disc of radius
/// min(r* solving t₂(r*) = T_max − t₁ − t_c, distribution radius, service
/// radius) and Λ = λ_c·π·r*². Exposed for oracle-style testing against the
/// quadrature path.
pub fn deterministic_intensity_closed_form(r_u: f64, cfg: &ScenarioConfig, t_c: f64) -> f64 {
    let up = cfg.uplink();
    let t1 = transmission_latency(
        cfg.data_size,
        &up,
        &LinkGeometry::new(r_u, cfg.altitude),
        cfg.bandwidth,
        cfg.noise_power,
    );
    if t1 >= cfg.t_max || t1.is_nan() {
        return 0.0;
    }
    let down = cfg.downlink();
    let solve = |residual: f64| {
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
    };
    let comm_radius = solve(cfg.t_max - t1);
    let compute_radius = solve(cfg.t_max - t1 - t_c);
    let r_star = compute_radius.min(comm_radius).min(cfg.cn_dist_radius);
    cfg.cn_density * std::f64::consts::PI * r_star * r_star
}
