//! Communication-constrained service radius and the thinned node density.
//!
//! Given the time left after the uplink, the forwarding latency t₂(r) is a
//! strictly increasing function of the node's horizontal distance, so the
//! farthest servable node sits at the unique radius where t₂ exhausts the
//! residual budget. Nodes inside that radius are further thinned by the
//! probability that their computing time fits what remains.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{transmission_latency, ChannelParams, LinkGeometry};
use crate::compute::ComputeLatencyModel;

/// Ceiling on the service radius search; far beyond any physically
/// meaningful forwarding range, it exists because finite SNR precision can
/// keep t₂ below a huge residual forever.
pub const RADIUS_CAP: f64 = 1.0e7;

/// Absolute bisection tolerance in meters; ~60 halvings from the cap.
pub const RADIUS_TOLERANCE: f64 = 1.0e-6;

#[derive(Debug, Error)]
pub enum CoverageError {
    #[error("residual time budget must be finite, got {0}")]
    NonFiniteResidual(f64),
}

/// The solved service boundary for one uplink residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceRadius {
    /// Largest horizontal node distance still reachable in time, meters.
    /// Zero encodes the comm-limited case (no time even for a node directly
    /// under the UAV); probabilities downstream evaluate to zero through the
    /// normal pipeline rather than by special-casing.
    pub radius: f64,
    /// True when the search hit [`RADIUS_CAP`] before exhausting the budget.
    pub capped: bool,
    /// The residual budget this boundary was solved for, seconds.
    pub residual_budget: f64,
}

/// Inverts t₂ to find the service radius for the given residual budget.
///
/// Bracket by geometric doubling from the altitude, then bisect to
/// [`RADIUS_TOLERANCE`]. t₂(·) is strictly increasing (checked by the test
/// suite on a grid), so the root is unique when it exists.
pub fn max_service_radius(
    residual: f64,
    down: &ChannelParams,
    altitude: f64,
    data_size: f64,
    bandwidth: f64,
    noise: f64,
) -> Result<ServiceRadius, CoverageError> {
    if !residual.is_finite() {
        return Err(CoverageError::NonFiniteResidual(residual));
    }
    let t2 = |r: f64| transmission_latency(data_size, down, &LinkGeometry::new(r, altitude), bandwidth, noise);

    if t2(0.0) >= residual {
        return Ok(ServiceRadius {
            radius: 0.0,
            capped: false,
            residual_budget: residual,
        });
    }

    let mut hi = altitude;
    while t2(hi) < residual {
        hi *= 2.0;
        if hi >= RADIUS_CAP {
            if t2(RADIUS_CAP) < residual {
                return Ok(ServiceRadius {
                    radius: RADIUS_CAP,
                    capped: true,
                    residual_budget: residual,
                });
            }
            hi = RADIUS_CAP;
            break;
        }
    }

    let mut lo = 0.0;
    while hi - lo > RADIUS_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if t2(mid) < residual {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ServiceRadius {
        radius: 0.5 * (lo + hi),
        capped: false,
        residual_budget: residual,
    })
}

/// Density of nodes at distance `r_c` that complete the task in time:
/// the communication indicator times the computing-success probability.
/// Never exceeds `cn_density` (thinning only removes points).
pub fn effective_density(
    cn_density: f64,
    r_c: f64,
    service: &ServiceRadius,
    residual_after_t2: f64,
    model: &ComputeLatencyModel,
    workload: f64,
) -> f64 {
    if r_c > service.radius {
        return 0.0;
    }
    cn_density * model.latency_cdf(residual_after_t2, workload)
}
