//! Scenario configuration: parsing the flat `key = value` format, the
//! human-unit raw view, and the SI-normalized view consumed by the engines.
//!
//! The file grammar is one `key = value` per line with `#` comments. Values
//! are decimal numbers except `compute_latency_model` (a tag such as
//! `deterministic:0.2`, `exponential:2.0`, `shifted_exponential:0.1+1.9`,
//! parameters in ms) and `channel_averaging` (`power_avg` or `rate_avg`).
//! Unknown keys are rejected so typos cannot silently fall back to defaults.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{AveragingMode, ChannelParams};
use crate::compute::ComputeLatencyModel;
use crate::units;

/// Configuration and validation failures. Every variant names the offending
/// key so a config author can fix the file without reading source.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown config key `{key}`")]
    UnknownKey { key: String },
    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("config violates invariants:\n{0}")]
    Invariants(ViolationList),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

/// One violated invariant: which field, what it was, what it must satisfy.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub field: &'static str,
    pub value: f64,
    pub constraint: &'static str,
}

impl Violation {
    pub fn new(field: &'static str, value: f64, constraint: &'static str) -> Self {
        Self {
            field,
            value,
            constraint,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {} ({})", self.field, self.value, self.constraint)
    }
}

#[derive(Debug, Clone)]
pub struct ViolationList(pub Vec<Violation>);

impl fmt::Display for ViolationList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.0 {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

/// The accepted config keys, in canonical order. `RawConfig` has exactly one
/// field per entry and `ScenarioConfig` one normalized field per entry.
pub const CONFIG_KEYS: &[&str] = &[
    "tx_power_gu_dbw",
    "tx_power_uav_dbw",
    "pathloss_exp_up",
    "pathloss_exp_down",
    "nlos_attenuation_db",
    "bandwidth_mhz",
    "noise_dbm",
    "data_size_mb",
    "t_max_ms",
    "gu_density_per_km2",
    "cn_density_per_km2",
    "compute_latency_model",
    "request_radius_m",
    "cn_dist_radius_m",
    "env_b",
    "env_c",
    "uav_altitude_m",
    "channel_averaging",
];

/// Configuration in the units a person writes: dBW, dBm, MHz, ms, MB,
/// nodes/km². The defaults describe the urban reference scenario exercised
/// throughout the test suite.
#[derive(Debug, Clone, PartialEq)]
pub struct RawConfig {
    pub tx_power_gu_dbw: f64,
    pub tx_power_uav_dbw: f64,
    pub pathloss_exp_up: f64,
    /// Downlink exponent; `None` mirrors the uplink exponent.
    pub pathloss_exp_down: Option<f64>,
    pub nlos_attenuation_db: f64,
    pub bandwidth_mhz: f64,
    pub noise_dbm: f64,
    pub data_size_mb: f64,
    pub t_max_ms: f64,
    pub gu_density_per_km2: f64,
    pub cn_density_per_km2: f64,
    /// Parsed from its tag form; time parameters already in seconds.
    pub compute_latency_model: ComputeLatencyModel,
    pub request_radius_m: f64,
    /// `None` means computing nodes are unbounded in extent.
    pub cn_dist_radius_m: Option<f64>,
    pub env_b: f64,
    pub env_c: f64,
    pub uav_altitude_m: f64,
    pub channel_averaging: AveragingMode,
}

impl Default for RawConfig {
    fn default() -> Self {
        Self {
            tx_power_gu_dbw: 20.0,
            tx_power_uav_dbw: 20.0,
            pathloss_exp_up: 2.0,
            pathloss_exp_down: None,
            nlos_attenuation_db: 20.0,
            bandwidth_mhz: 8.0,
            noise_dbm: -120.0,
            data_size_mb: 1.0,
            t_max_ms: 55.0,
            gu_density_per_km2: 500.0,
            cn_density_per_km2: 5.0,
            compute_latency_model: ComputeLatencyModel::Deterministic { t_c: 0.2e-3 },
            request_radius_m: 200.0,
            cn_dist_radius_m: None,
            env_b: 0.136,
            env_c: 11.95,
            uav_altitude_m: 200.0,
            channel_averaging: AveragingMode::PowerAverage,
        }
    }
}

impl RawConfig {
    /// Parses a config document, starting from the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                text: raw_line.trim().to_string(),
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Sets one key from its textual value. Also backs the CLI `--set` flag.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let num = |value: &str| -> Result<f64, ConfigError> {
            let x: f64 = value.parse().map_err(|_| ConfigError::InvalidValue {
                key: key.to_string(),
                reason: format!("`{value}` is not a number"),
            })?;
            if !x.is_finite() {
                return Err(ConfigError::InvalidValue {
                    key: key.to_string(),
                    reason: format!("`{value}` is not finite"),
                });
            }
            Ok(x)
        };
        match key {
            "tx_power_gu_dbw" => self.tx_power_gu_dbw = num(value)?,
            "tx_power_uav_dbw" => self.tx_power_uav_dbw = num(value)?,
            "pathloss_exp_up" => self.pathloss_exp_up = num(value)?,
            "pathloss_exp_down" => self.pathloss_exp_down = Some(num(value)?),
            "nlos_attenuation_db" => self.nlos_attenuation_db = num(value)?,
            "bandwidth_mhz" => self.bandwidth_mhz = num(value)?,
            "noise_dbm" => self.noise_dbm = num(value)?,
            "data_size_mb" => self.data_size_mb = num(value)?,
            "t_max_ms" => self.t_max_ms = num(value)?,
            "gu_density_per_km2" => self.gu_density_per_km2 = num(value)?,
            "cn_density_per_km2" => self.cn_density_per_km2 = num(value)?,
            "compute_latency_model" => self.compute_latency_model = parse_model_tag(value)?,
            "request_radius_m" => self.request_radius_m = num(value)?,
            "cn_dist_radius_m" => self.cn_dist_radius_m = Some(num(value)?),
            "env_b" => self.env_b = num(value)?,
            "env_c" => self.env_c = num(value)?,
            "uav_altitude_m" => self.uav_altitude_m = num(value)?,
            "channel_averaging" => {
                self.channel_averaging = match value {
                    "power_avg" => AveragingMode::PowerAverage,
                    "rate_avg" => AveragingMode::RateAverage,
                    other => {
                        return Err(ConfigError::InvalidValue {
                            key: key.to_string(),
                            reason: format!("`{other}` is neither `power_avg` nor `rate_avg`"),
                        })
                    }
                }
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// SI normalization. Fails when the normalized values violate invariants.
    pub fn into_scenario(self) -> Result<ScenarioConfig, ConfigError> {
        if self.nlos_attenuation_db < 0.0 {
            return Err(ConfigError::InvalidValue {
                key: "nlos_attenuation_db".to_string(),
                reason: format!(
                    "{} dB would be a gain; attenuation must be >= 0 dB",
                    self.nlos_attenuation_db
                ),
            });
        }
        let cfg = ScenarioConfig {
            tx_power_gu: units::dbw_to_watts(self.tx_power_gu_dbw),
            tx_power_uav: units::dbw_to_watts(self.tx_power_uav_dbw),
            alpha_up: self.pathloss_exp_up,
            alpha_down: self.pathloss_exp_down.unwrap_or(self.pathloss_exp_up),
            eta: units::db_to_linear(-self.nlos_attenuation_db),
            bandwidth: units::mhz_to_hz(self.bandwidth_mhz),
            noise_power: units::dbm_to_watts(self.noise_dbm),
            data_size: units::megabytes_to_bits(self.data_size_mb),
            t_max: units::ms_to_seconds(self.t_max_ms),
            gu_density: units::per_km2_to_per_m2(self.gu_density_per_km2),
            cn_density: units::per_km2_to_per_m2(self.cn_density_per_km2),
            request_radius: self.request_radius_m,
            cn_dist_radius: self.cn_dist_radius_m.unwrap_or(f64::INFINITY),
            env_b: self.env_b,
            env_c: self.env_c,
            altitude: self.uav_altitude_m,
            compute_model: self.compute_latency_model,
            averaging: self.channel_averaging,
        };
        let violations = cfg.validate();
        if violations.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError::Invariants(ViolationList(violations)))
        }
    }

    /// Renders the canonical `key = value` lines, usable to round-trip the
    /// config and to stamp output files with the effective scenario.
    pub fn echo_lines(&self) -> Vec<String> {
        let model = render_model_tag(&self.compute_latency_model);
        let mut lines = vec![
            format!("tx_power_gu_dbw = {}", self.tx_power_gu_dbw),
            format!("tx_power_uav_dbw = {}", self.tx_power_uav_dbw),
            format!("pathloss_exp_up = {}", self.pathloss_exp_up),
        ];
        if let Some(down) = self.pathloss_exp_down {
            lines.push(format!("pathloss_exp_down = {down}"));
        }
        lines.extend([
            format!("nlos_attenuation_db = {}", self.nlos_attenuation_db),
            format!("bandwidth_mhz = {}", self.bandwidth_mhz),
            format!("noise_dbm = {}", self.noise_dbm),
            format!("data_size_mb = {}", self.data_size_mb),
            format!("t_max_ms = {}", self.t_max_ms),
            format!("gu_density_per_km2 = {}", self.gu_density_per_km2),
            format!("cn_density_per_km2 = {}", self.cn_density_per_km2),
            format!("compute_latency_model = {model}"),
            format!("request_radius_m = {}", self.request_radius_m),
        ]);
        if let Some(r) = self.cn_dist_radius_m {
            lines.push(format!("cn_dist_radius_m = {r}"));
        }
        lines.extend([
            format!("env_b = {}", self.env_b),
            format!("env_c = {}", self.env_c),
            format!("uav_altitude_m = {}", self.uav_altitude_m),
            format!(
                "channel_averaging = {}",
                match self.channel_averaging {
                    AveragingMode::PowerAverage => "power_avg",
                    AveragingMode::RateAverage => "rate_avg",
                }
            ),
        ]);
        lines
    }
}

/// `deterministic:0.2`, `exponential:2.0`, `shifted_exponential:0.1+1.9`;
/// parameters in milliseconds.
fn parse_model_tag(tag: &str) -> Result<ComputeLatencyModel, ConfigError> {
    let bad = |reason: String| ConfigError::InvalidValue {
        key: "compute_latency_model".to_string(),
        reason,
    };
    let (name, params) = tag
        .split_once(':')
        .ok_or_else(|| bad(format!("`{tag}` is missing the `tag:params` separator")))?;
    let ms = |s: &str| -> Result<f64, ConfigError> {
        let x: f64 = s
            .parse()
            .map_err(|_| bad(format!("`{s}` is not a number")))?;
        if !x.is_finite() {
            return Err(bad(format!("`{s}` is not finite")));
        }
        Ok(units::ms_to_seconds(x))
    };
    match name {
        "deterministic" => Ok(ComputeLatencyModel::Deterministic { t_c: ms(params)? }),
        "exponential" => Ok(ComputeLatencyModel::Exponential { mean: ms(params)? }),
        "shifted_exponential" => {
            let (floor, excess) = params
                .split_once('+')
                .ok_or_else(|| bad(format!("`{params}` must be `floor+mean_excess`")))?;
            Ok(ComputeLatencyModel::ShiftedExponential {
                floor: ms(floor)?,
                mean_excess: ms(excess)?,
            })
        }
        other => Err(bad(format!("unknown model tag `{other}`"))),
    }
}

fn render_model_tag(model: &ComputeLatencyModel) -> String {
    match model {
        ComputeLatencyModel::Deterministic { t_c } => {
            format!("deterministic:{}", units::seconds_to_ms(*t_c))
        }
        ComputeLatencyModel::Exponential { mean } => {
            format!("exponential:{}", units::seconds_to_ms(*mean))
        }
        ComputeLatencyModel::ShiftedExponential { floor, mean_excess } => format!(
            "shifted_exponential:{}+{}",
            units::seconds_to_ms(*floor),
            units::seconds_to_ms(*mean_excess)
        ),
        // not expressible in the tag grammar; echoed for human eyes only
        ComputeLatencyModel::EmpiricalTable { points, .. } => {
            format!("empirical_table[{} points]", points.len())
        }
    }
}

/// The SI-normalized scenario every engine consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Ground-user transmit power, W.
    pub tx_power_gu: f64,
    /// UAV transmit power, W.
    pub tx_power_uav: f64,
    pub alpha_up: f64,
    pub alpha_down: f64,
    /// Linear NLoS attenuation ratio in (0, 1].
    pub eta: f64,
    /// Hz.
    pub bandwidth: f64,
    /// W.
    pub noise_power: f64,
    /// bits.
    pub data_size: f64,
    /// End-to-end latency budget, s.
    pub t_max: f64,
    /// Ground users per m².
    pub gu_density: f64,
    /// Computing nodes per m².
    pub cn_density: f64,
    /// Request-zone radius, m.
    pub request_radius: f64,
    /// Radius of the node distribution disc, m; +inf when unbounded.
    pub cn_dist_radius: f64,
    pub env_b: f64,
    pub env_c: f64,
    /// UAV altitude, m.
    pub altitude: f64,
    pub compute_model: ComputeLatencyModel,
    pub averaging: AveragingMode,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        RawConfig::default()
            .into_scenario()
            .expect("defaults satisfy their own invariants")
    }
}

impl ScenarioConfig {
    /// Uplink (ground user to UAV) channel.
    pub fn uplink(&self) -> ChannelParams {
        ChannelParams {
            tx_power: self.tx_power_gu,
            alpha: self.alpha_up,
            eta: self.eta,
            env_b: self.env_b,
            env_c: self.env_c,
            averaging: self.averaging,
        }
    }

    /// Downlink (UAV to computing node) channel. Shares the environment
    /// constants with the uplink; construct a [`ChannelParams`] directly for
    /// a per-link override.
    pub fn downlink(&self) -> ChannelParams {
        ChannelParams {
            tx_power: self.tx_power_uav,
            alpha: self.alpha_down,
            eta: self.eta,
            env_b: self.env_b,
            env_c: self.env_c,
            averaging: self.averaging,
        }
    }

    /// Checks every type invariant; the list is empty iff the config is
    /// usable. Violations are data, not failures.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut check = |cond: bool, field: &'static str, value: f64, constraint: &'static str| {
            if !cond {
                v.push(Violation::new(field, value, constraint));
            }
        };
        check(self.tx_power_gu > 0.0, "tx_power_gu", self.tx_power_gu, "must be > 0 W");
        check(self.tx_power_uav > 0.0, "tx_power_uav", self.tx_power_uav, "must be > 0 W");
        check(self.alpha_up >= 1.0, "alpha_up", self.alpha_up, "must be >= 1");
        check(self.alpha_down >= 1.0, "alpha_down", self.alpha_down, "must be >= 1");
        check(
            self.eta > 0.0 && self.eta <= 1.0,
            "eta",
            self.eta,
            "must be in (0, 1]",
        );
        check(
            self.bandwidth > 0.0 && self.bandwidth.is_finite(),
            "bandwidth",
            self.bandwidth,
            "must be positive and finite",
        );
        check(
            self.noise_power > 0.0 && self.noise_power.is_finite(),
            "noise_power",
            self.noise_power,
            "must be positive and finite",
        );
        check(self.data_size > 0.0, "data_size", self.data_size, "must be > 0 bits");
        check(
            self.t_max > 0.0 && self.t_max.is_finite(),
            "t_max",
            self.t_max,
            "must be positive and finite",
        );
        check(self.gu_density >= 0.0, "gu_density", self.gu_density, "must be >= 0");
        check(self.cn_density >= 0.0, "cn_density", self.cn_density, "must be >= 0");
        check(
            self.request_radius > 0.0,
            "request_radius",
            self.request_radius,
            "must be > 0 m",
        );
        check(
            self.cn_dist_radius >= 0.0,
            "cn_dist_radius",
            self.cn_dist_radius,
            "must be >= 0 m",
        );
        check(self.env_b > 0.0, "env_b", self.env_b, "must be > 0");
        check(self.env_c > 0.0, "env_c", self.env_c, "must be > 0");
        check(self.altitude > 0.0, "altitude", self.altitude, "must be > 0 m");
        v.extend(self.compute_model.validate());
        v
    }
}

/// Parses and normalizes a config document in one step.
pub fn load_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    RawConfig::parse(text)?.into_scenario()
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL_DOC: &str = "\
# urban reference scenario
tx_power_gu_dbw = 20
tx_power_uav_dbw = 20
pathloss_exp_up = 2
nlos_attenuation_db = 20
bandwidth_mhz = 8
noise_dbm = -120
data_size_mb = 1
t_max_ms = 55
gu_density_per_km2 = 500
cn_density_per_km2 = 5
compute_latency_model = deterministic:0.2
request_radius_m = 200
env_b = 0.136
env_c = 11.95
uav_altitude_m = 200
";

    #[test]
    fn full_document_normalizes_to_si() {
        let cfg = load_config(FULL_DOC).unwrap();
        assert_eq!(cfg.bandwidth, 8e6);
        assert!((cfg.t_max - 0.055).abs() < 1e-15);
        assert!((cfg.cn_density - 5e-6).abs() < 1e-20);
        assert!((cfg.gu_density - 5e-4).abs() < 1e-18);
        assert!((cfg.tx_power_gu - 100.0).abs() < 1e-10);
        assert!((cfg.noise_power - 1e-15).abs() / 1e-15 < 1e-12);
        assert_eq!(cfg.data_size, 8e6);
        assert!((cfg.eta - 0.01).abs() < 1e-15);
        assert_eq!(cfg.cn_dist_radius, f64::INFINITY);
        assert_eq!(cfg.alpha_down, 2.0);
        assert_eq!(
            cfg.compute_model,
            ComputeLatencyModel::Deterministic { t_c: 0.2e-3 }
        );
    }

    #[test]
    fn empty_document_equals_defaults() {
        let cfg = load_config("").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(cfg, load_config(FULL_DOC).unwrap());
        assert!(cfg.validate().is_empty());
    }

    #[test]
    fn negative_attenuation_is_rejected() {
        let err = load_config("nlos_attenuation_db = -3").unwrap_err();
        assert!(err.to_string().contains("nlos_attenuation_db"), "{err}");
    }

    #[test]
    fn unknown_key_is_rejected_by_name() {
        let err = load_config("uav_altitude = 100").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { ref key } if key == "uav_altitude"));
    }

    #[test]
    fn malformed_value_names_the_key() {
        let err = load_config("bandwidth_mhz = eight").unwrap_err();
        assert!(err.to_string().contains("bandwidth_mhz"), "{err}");
        let err = load_config("t_max_ms = inf").unwrap_err();
        assert!(err.to_string().contains("not finite"), "{err}");
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = load_config("t_max_ms = 55\nnonsense line\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 2, .. }), "{err}");
    }

    #[test]
    fn model_tags_parse_in_ms() {
        let cfg = load_config("compute_latency_model = exponential:2.0").unwrap();
        assert_eq!(cfg.compute_model, ComputeLatencyModel::Exponential { mean: 2e-3 });
        let cfg = load_config("compute_latency_model = shifted_exponential:0.1+1.9").unwrap();
        assert_eq!(
            cfg.compute_model,
            ComputeLatencyModel::ShiftedExponential {
                floor: 0.1e-3,
                mean_excess: 1.9e-3,
            }
        );
        assert!(load_config("compute_latency_model = gaussian:1.0").is_err());
    }

    #[test]
    fn downlink_exponent_mirrors_uplink_unless_set() {
        let cfg = load_config("pathloss_exp_up = 2.5").unwrap();
        assert_eq!(cfg.alpha_down, 2.5);
        let cfg = load_config("pathloss_exp_up = 2.5\npathloss_exp_down = 3.0").unwrap();
        assert_eq!(cfg.alpha_down, 3.0);
    }

    #[test]
    fn validate_reports_field_level_violations() {
        let mut cfg = ScenarioConfig::default();
        assert!(cfg.validate().is_empty());
        cfg.altitude = 0.0;
        let v = cfg.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "altitude");
        cfg.altitude = 200.0;
        cfg.t_max = -1.0;
        let v = cfg.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "t_max");
    }

    /// Every raw key maps to exactly one normalized field: no silent drops.
    #[test]
    fn normalization_is_total() {
        let cfg = ScenarioConfig::default();
        let json = serde_json::to_value(&cfg).unwrap();
        assert_eq!(json.as_object().unwrap().len(), CONFIG_KEYS.len());
    }

    #[test]
    fn every_listed_key_is_settable() {
        let mut raw = RawConfig::default();
        for key in CONFIG_KEYS {
            let value = match *key {
                "compute_latency_model" => "deterministic:1.0",
                "channel_averaging" => "rate_avg",
                _ => "2",
            };
            raw.set(key, value).unwrap_or_else(|e| panic!("{key}: {e}"));
        }
    }

    #[test]
    fn echo_round_trips() {
        let mut raw = RawConfig::default();
        raw.set("uav_altitude_m", "321.5").unwrap();
        raw.set("cn_dist_radius_m", "1000").unwrap();
        raw.set("compute_latency_model", "shifted_exponential:0.1+1.9").unwrap();
        raw.set("channel_averaging", "rate_avg").unwrap();
        let text = raw.echo_lines().join("\n");
        let reparsed = RawConfig::parse(&text).unwrap();
        assert_eq!(raw, reparsed);
    }

    #[test]
    fn set_rejects_bad_averaging_mode() {
        let mut raw = RawConfig::default();
        assert!(raw.set("channel_averaging", "mean_avg").is_err());
    }
}
