//! Adaptive one-dimensional quadrature.
//!
//! A 15-point Kronrod rule with its embedded 7-point Gauss rule gives a
//! per-interval value and error estimate; the interval with the worst error
//! is bisected until the summed estimate meets tolerance. Good enough for
//! smooth integrands and, because refinement concentrates around the worst
//! interval, for integrands with a step discontinuity (the deterministic
//! computing-latency CDF produces exactly that).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Default relative tolerance for inner (intensity) integrals.
pub const DEFAULT_REL_TOL: f64 = 1e-8;
/// Default absolute floor so integrals near zero terminate.
pub const DEFAULT_ABS_TOL: f64 = 1e-12;

/// Hard cap on interval count; hitting it flags the result non-converged.
const MAX_INTERVALS: usize = 4096;

/// Result of an adaptive integration. A non-converged result still carries
/// the best available value and its (honest) error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
    pub evaluations: usize,
}

// 15-point Kronrod abscissae on [0, 1] side of [-1, 1]; odd indices are the
// embedded 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut kronrod = WGK[7] * f_center;
    let mut gauss = WG[3] * f_center;
    for (j, x) in XGK.iter().enumerate().take(7) {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    kronrod *= half;
    gauss *= half;
    Segment {
        a,
        b,
        value: kronrod,
        error: (kronrod - gauss).abs(),
    }
}

/// Integrates `f` over `[a, b]` to `max(rel_tol·|value|, abs_tol)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Quadrature {
    integrate_with_breakpoints(f, a, b, &[], rel_tol, abs_tol)
}

/// [`integrate`] with interior points where the integrand is known to be
/// non-smooth. Each breakpoint becomes an initial segment boundary, so a
/// discontinuity cannot hide between the outermost rule nodes and an
/// interval edge where the embedded error estimate is blind to it.
pub fn integrate_with_breakpoints<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Quadrature {
    assert!(a <= b, "inverted integration bounds [{a}, {b}]");
    if a == b {
        return Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            converged: true,
            evaluations: 0,
        };
    }

    let mut edges: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| *x > a && *x < b)
        .collect();
    edges.push(a);
    edges.push(b);
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let mut heap = BinaryHeap::with_capacity(64);
    let mut evaluations = 0;
    for pair in edges.windows(2) {
        heap.push(kronrod_15(&f, pair[0], pair[1]));
        evaluations += 15;
    }

    // Segments narrower than floating-point resolution cannot be split; park
    // them and keep refining the rest.
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    let width_floor = f64::EPSILON * (a.abs() + b.abs() + 1.0);

    loop {
        let live_value: f64 = heap.iter().map(|s| s.value).sum();
        let live_error: f64 = heap.iter().map(|s| s.error).sum();
        let value = frozen_value + live_value;
        let error = frozen_error + live_error;
        let target = (rel_tol * value.abs()).max(abs_tol);

        if error <= target {
            return Quadrature {
                value,
                error_estimate: error,
                converged: true,
                evaluations,
            };
        }
        if heap.len() + 1 >= MAX_INTERVALS || heap.is_empty() {
            return Quadrature {
                value,
                error_estimate: error,
                converged: false,
                evaluations,
            };
        }

        let worst = heap.pop().expect("heap checked non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if worst.b - worst.a <= width_floor || mid <= worst.a || mid >= worst.b {
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        heap.push(kronrod_15(&f, worst.a, mid));
        heap.push(kronrod_15(&f, mid, worst.b));
        evaluations += 30;
    }
}

/// [`integrate`] with the default tolerances.
pub fn integrate_default<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Quadrature {
    integrate(f, a, b, DEFAULT_REL_TOL, DEFAULT_ABS_TOL)
}
