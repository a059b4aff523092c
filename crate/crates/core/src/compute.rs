//! Computing-latency distributions of the heterogeneous computing nodes.
//!
//! A node's computing time is described only through its CDF: the analytical
//! engine integrates `P(t_c <= T_res)` and the Monte Carlo engine draws
//! samples from the same distribution. Keeping both behind one type is what
//! guarantees the two evaluation paths model identical hardware.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::config::Violation;

/// Family of computing-latency distributions. All times in seconds.
///
/// The task workload (bits) is threaded through [`latency_cdf`] and
/// [`sample_latency`] so workload-dependent models are expressible, but the
/// three parametric variants ignore it: their parameters already describe
/// the latency of the configured task size. [`EmpiricalTable`] optionally
/// rescales its latencies by `workload / workload_ref` for callers that want
/// linear time scaling.
///
/// [`latency_cdf`]: ComputeLatencyModel::latency_cdf
/// [`sample_latency`]: ComputeLatencyModel::sample_latency
/// [`EmpiricalTable`]: ComputeLatencyModel::EmpiricalTable
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComputeLatencyModel {
    /// Fixed computing time.
    Deterministic { t_c: f64 },
    /// Memoryless computing time with the given mean.
    Exponential { mean: f64 },
    /// Hard floor plus an exponential excess; `mean_excess` is the mean of
    /// the part above the floor.
    ShiftedExponential { floor: f64, mean_excess: f64 },
    /// Tabulated CDF: `(latency, cumulative probability)` pairs with strictly
    /// increasing latencies, nondecreasing probabilities, last entry 1.0.
    /// When `workload_ref` (bits) is set, latencies scale by
    /// `workload / workload_ref`.
    EmpiricalTable {
        points: Vec<(f64, f64)>,
        workload_ref: Option<f64>,
    },
}

impl ComputeLatencyModel {
    /// P(t_c <= t_res) for a task of `workload` bits. Returns 0 for negative
    /// `t_res`; right-continuous and nondecreasing in `t_res`.
    pub fn latency_cdf(&self, t_res: f64, workload: f64) -> f64 {
        if t_res < 0.0 || t_res.is_nan() {
            return 0.0; // the task already missed its budget
        }
        match self {
            Self::Deterministic { t_c } => {
                // closed inequality: the CDF jumps to 1 exactly at t_c
                if t_res >= *t_c {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Exponential { mean } => 1.0 - (-t_res / mean).exp(),
            Self::ShiftedExponential { floor, mean_excess } => {
                if t_res < *floor {
                    0.0
                } else {
                    1.0 - (-(t_res - floor) / mean_excess).exp()
                }
            }
            Self::EmpiricalTable {
                points,
                workload_ref,
            } => {
                let t = match workload_ref {
                    Some(d_ref) => t_res * d_ref / workload,
                    None => t_res,
                };
                points
                    .iter()
                    .take_while(|(lat, _)| *lat <= t)
                    .last()
                    .map(|(_, p)| *p)
                    .unwrap_or(0.0)
            }
        }
    }

    /// Draws one computing time for a task of `workload` bits.
    pub fn sample_latency<R: Rng + ?Sized>(&self, rng: &mut R, workload: f64) -> f64 {
        match self {
            Self::Deterministic { t_c } => *t_c,
            Self::Exponential { mean } => Exp::new(1.0 / mean).unwrap().sample(rng),
            Self::ShiftedExponential { floor, mean_excess } => {
                floor + Exp::new(1.0 / mean_excess).unwrap().sample(rng)
            }
            Self::EmpiricalTable {
                points,
                workload_ref,
            } => {
                let u: f64 = rng.random();
                let base = points
                    .iter()
                    .find(|(_, p)| *p >= u)
                    .map(|(lat, _)| *lat)
                    .unwrap_or_else(|| points.last().map(|(lat, _)| *lat).unwrap_or(0.0));
                match workload_ref {
                    Some(d_ref) => base * workload / d_ref,
                    None => base,
                }
            }
        }
    }

    /// Times (in `t_res` space, for a task of `workload` bits) where the CDF
    /// is not smooth (jumps or derivative kinks), for quadrature that
    /// integrates through it. The zero-time kink every model shares maps to
    /// an integration endpoint anyway and is omitted.
    pub fn cdf_kink_times(&self, workload: f64) -> Vec<f64> {
        match self {
            Self::Deterministic { t_c } => vec![*t_c],
            Self::Exponential { .. } => Vec::new(),
            Self::ShiftedExponential { floor, .. } => {
                if *floor > 0.0 {
                    vec![*floor]
                } else {
                    Vec::new()
                }
            }
            Self::EmpiricalTable {
                points,
                workload_ref,
            } => {
                let scale = workload_ref.map_or(1.0, |d_ref| workload / d_ref);
                points.iter().map(|(lat, _)| lat * scale).collect()
            }
        }
    }

    /// The model's characteristic time scale, used when a sweep axis rescales
    /// computing capability: the fixed time, the mean, the floor-plus-excess
    /// mean, or the mean of the tabulated latencies.
    pub fn characteristic_time(&self) -> f64 {
        match self {
            Self::Deterministic { t_c } => *t_c,
            Self::Exponential { mean } => *mean,
            Self::ShiftedExponential { floor, mean_excess } => floor + mean_excess,
            Self::EmpiricalTable { points, .. } => {
                // mean of the discrete distribution
                let mut prev = 0.0;
                let mut mean = 0.0;
                for (lat, p) in points {
                    mean += lat * (p - prev);
                    prev = *p;
                }
                mean
            }
        }
    }

    /// Uniformly rescales all time parameters so that
    /// `characteristic_time() == target`.
    pub fn with_characteristic_time(&self, target: f64) -> Self {
        let current = self.characteristic_time();
        let k = target / current;
        match self {
            Self::Deterministic { t_c } => Self::Deterministic { t_c: t_c * k },
            Self::Exponential { mean } => Self::Exponential { mean: mean * k },
            Self::ShiftedExponential { floor, mean_excess } => Self::ShiftedExponential {
                floor: floor * k,
                mean_excess: mean_excess * k,
            },
            Self::EmpiricalTable {
                points,
                workload_ref,
            } => Self::EmpiricalTable {
                points: points.iter().map(|(lat, p)| (lat * k, *p)).collect(),
                workload_ref: *workload_ref,
            },
        }
    }

    /// Structural invariants as a violation list (empty when valid).
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut positive = |name: &'static str, x: f64| {
            if x <= 0.0 || x.is_nan() {
                v.push(Violation::new(name, x, "must be > 0"));
            }
        };
        match self {
            Self::Deterministic { t_c } => positive("compute_model.t_c", *t_c),
            Self::Exponential { mean } => positive("compute_model.mean", *mean),
            Self::ShiftedExponential { floor, mean_excess } => {
                positive("compute_model.mean_excess", *mean_excess);
                if *floor < 0.0 || floor.is_nan() {
                    v.push(Violation::new("compute_model.floor", *floor, "must be >= 0"));
                }
            }
            Self::EmpiricalTable { points, .. } => {
                if points.is_empty() {
                    v.push(Violation::new("compute_model.points", f64::NAN, "must be non-empty"));
                    return v;
                }
                let increasing = points.windows(2).all(|w| w[0].0 < w[1].0);
                let nondecreasing = points.windows(2).all(|w| w[0].1 <= w[1].1);
                let in_range = points.iter().all(|(_, p)| (0.0..=1.0).contains(p));
                if !increasing {
                    v.push(Violation::new(
                        "compute_model.points",
                        f64::NAN,
                        "latencies must be strictly increasing",
                    ));
                }
                if !nondecreasing || !in_range {
                    v.push(Violation::new(
                        "compute_model.points",
                        f64::NAN,
                        "probabilities must be nondecreasing in [0,1]",
                    ));
                }
                let last = points.last().unwrap().1;
                if last != 1.0 {
                    v.push(Violation::new(
                        "compute_model.points",
                        last,
                        "last cumulative probability must be 1",
                    ));
                }
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    const MS: f64 = 1e-3;
    const WORKLOAD: f64 = 8e6;

    fn test_rng() -> rand_chacha::ChaCha8Rng {
        rng::stream(7, 0, rng::StreamPurpose::ComputeLatency)
    }

    #[test]
    fn deterministic_cdf_is_a_right_continuous_step() {
        let m = ComputeLatencyModel::Deterministic { t_c: 0.2 * MS };
        assert_eq!(m.latency_cdf(0.3 * MS, WORKLOAD), 1.0);
        assert_eq!(m.latency_cdf(0.2 * MS, WORKLOAD), 1.0); // closed at the jump
        assert_eq!(m.latency_cdf(0.19 * MS, WORKLOAD), 0.0);
    }

    #[test]
    fn negative_residual_is_zero_for_all_variants() {
        let models = all_variants();
        for m in &models {
            assert_eq!(m.latency_cdf(-MS, WORKLOAD), 0.0, "{m:?}");
            assert_eq!(m.latency_cdf(f64::NAN, WORKLOAD), 0.0, "{m:?}");
        }
    }

    #[test]
    fn exponential_cdf_at_mean() {
        let m = ComputeLatencyModel::Exponential { mean: 2.0 * MS };
        let expect = 1.0 - (-1.0f64).exp();
        assert!((m.latency_cdf(2.0 * MS, WORKLOAD) - expect).abs() < 1e-12);
    }

    #[test]
    fn cdf_limits_and_monotonicity() {
        for m in all_variants() {
            assert_eq!(m.latency_cdf(f64::INFINITY, WORKLOAD), 1.0, "{m:?}");
            assert_eq!(m.latency_cdf(-1e-18, WORKLOAD), 0.0, "{m:?}");
            let mut prev = -1.0;
            for i in 0..1000 {
                let t = i as f64 * 5e-6; // 0..5 ms
                let p = m.latency_cdf(t, WORKLOAD);
                assert!(p >= prev, "{m:?} not monotone at t={t}");
                assert!((0.0..=1.0).contains(&p));
                prev = p;
            }
        }
    }

    #[test]
    fn deterministic_sampler_is_degenerate() {
        let m = ComputeLatencyModel::Deterministic { t_c: 0.2 * MS };
        let mut r = test_rng();
        for _ in 0..100 {
            assert_eq!(m.sample_latency(&mut r, WORKLOAD), 0.2 * MS);
        }
    }

    #[test]
    fn exponential_sample_mean_within_clt_band() {
        let m = ComputeLatencyModel::Exponential { mean: 2.0 * MS };
        let mut r = test_rng();
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| m.sample_latency(&mut r, WORKLOAD)).sum::<f64>() / n as f64;
        let sigma = 2.0 * MS / (n as f64).sqrt();
        assert!(
            (mean - 2.0 * MS).abs() < 3.0 * sigma,
            "sample mean {mean:e} vs 2 ms, 3-sigma {:e}",
            3.0 * sigma
        );
    }

    #[test]
    fn shifted_exponential_respects_floor() {
        let m = ComputeLatencyModel::ShiftedExponential {
            floor: 0.1 * MS,
            mean_excess: 1.9 * MS,
        };
        let mut r = test_rng();
        for _ in 0..10_000 {
            assert!(m.sample_latency(&mut r, WORKLOAD) >= 0.1 * MS);
        }
    }

    /// Kolmogorov-Smirnov distance between n samples and the model CDF must
    /// stay under the alpha = 0.01 critical value 1.6276 / sqrt(n). Applies
    /// to the continuous variants; the degenerate and tabulated ones get
    /// their own exact checks.
    #[test]
    fn sampler_matches_cdf_by_ks_test() {
        let n = 100_000usize;
        let critical = 1.6276 / (n as f64).sqrt();
        for m in [
            ComputeLatencyModel::Exponential { mean: 2.0 * MS },
            ComputeLatencyModel::ShiftedExponential {
                floor: 0.1 * MS,
                mean_excess: 1.9 * MS,
            },
        ] {
            let mut r = test_rng();
            let mut samples: Vec<f64> = (0..n).map(|_| m.sample_latency(&mut r, WORKLOAD)).collect();
            samples.sort_by(f64::total_cmp);
            let mut d: f64 = 0.0;
            for (i, x) in samples.iter().enumerate() {
                let f = m.latency_cdf(*x, WORKLOAD);
                d = d.max((f - i as f64 / n as f64).abs());
                d = d.max((f - (i + 1) as f64 / n as f64).abs());
            }
            assert!(d <= critical, "{m:?}: KS distance {d:e} > {critical:e}");
        }
    }

    #[test]
    fn empirical_table_sampling_matches_weights() {
        let m = ComputeLatencyModel::EmpiricalTable {
            points: vec![(0.1 * MS, 0.25), (0.5 * MS, 0.75), (1.0 * MS, 1.0)],
            workload_ref: None,
        };
        assert!(m.validate().is_empty());
        let mut r = test_rng();
        let n = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            let s = m.sample_latency(&mut r, WORKLOAD);
            let idx = [0.1 * MS, 0.5 * MS, 1.0 * MS]
                .iter()
                .position(|l| (s - l).abs() < 1e-15)
                .expect("sample must be a table latency");
            counts[idx] += 1;
        }
        for (idx, p) in [(0usize, 0.25), (1, 0.5), (2, 0.25)] {
            let freq = counts[idx] as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((freq - p).abs() < 4.0 * sigma, "bin {idx}: {freq} vs {p}");
        }
    }

    #[test]
    fn empirical_table_workload_scaling() {
        let m = ComputeLatencyModel::EmpiricalTable {
            points: vec![(1.0 * MS, 1.0)],
            workload_ref: Some(WORKLOAD),
        };
        // double the workload: the single latency point moves to 2 ms
        assert_eq!(m.latency_cdf(1.5 * MS, 2.0 * WORKLOAD), 0.0);
        assert_eq!(m.latency_cdf(2.0 * MS, 2.0 * WORKLOAD), 1.0);
        let mut r = test_rng();
        assert!((m.sample_latency(&mut r, 2.0 * WORKLOAD) - 2.0 * MS).abs() < 1e-15);
    }

    #[test]
    fn characteristic_time_rescaling() {
        for m in all_variants() {
            let scaled = m.with_characteristic_time(4.0 * MS);
            assert!((scaled.characteristic_time() - 4.0 * MS).abs() < 1e-15, "{m:?}");
        }
    }

    #[test]
    fn validation_flags_bad_parameters() {
        assert!(!ComputeLatencyModel::Deterministic { t_c: 0.0 }.validate().is_empty());
        assert!(!ComputeLatencyModel::Exponential { mean: -1.0 }.validate().is_empty());
        let bad_table = ComputeLatencyModel::EmpiricalTable {
            points: vec![(1.0, 0.5)],
            workload_ref: None,
        };
        assert!(!bad_table.validate().is_empty());
    }

    fn all_variants() -> Vec<ComputeLatencyModel> {
        vec![
            ComputeLatencyModel::Deterministic { t_c: 0.2 * MS },
            ComputeLatencyModel::Exponential { mean: 2.0 * MS },
            ComputeLatencyModel::ShiftedExponential {
                floor: 0.1 * MS,
                mean_excess: 1.9 * MS,
            },
            ComputeLatencyModel::EmpiricalTable {
                points: vec![(0.1 * MS, 0.25), (0.5 * MS, 0.75), (1.0 * MS, 1.0)],
                workload_ref: None,
            },
        ]
    }
}
