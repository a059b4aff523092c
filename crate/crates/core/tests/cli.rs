//! End-to-end tests of the `uav-offload` binary: exit codes, output
//! determinism, and the sweep file schema.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uav-offload"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn tmp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("uav-offload-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn analyze_defaults_reports_a_probability() {
    let out = run(&["analyze"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(
        text.contains("average task completion probability:"),
        "{text}"
    );
}

#[test]
fn analyze_json_is_machine_readable() {
    let out = run(&["analyze", "--json", "--set", "uav_altitude_m=300"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    let mean = v["average"]["mean_prob"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&mean));
    assert_eq!(v["points"].as_array().unwrap().len(), 3);
}

#[test]
fn zero_density_override_yields_zero() {
    let out = run(&["analyze", "--set", "cn_density_per_km2=0"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("probability: 0.000000"));
}

#[test]
fn malformed_config_exits_nonzero_naming_the_key() {
    let path = tmp_path("bad.cfg");
    fs::write(&path, "bandwidth_mhz = eight\n").unwrap();
    let out = run(&["analyze", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bandwidth_mhz"), "{err}");
    fs::remove_file(&path).ok();
}

#[test]
fn unknown_set_key_exits_nonzero() {
    let out = run(&["analyze", "--set", "altitude=100"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("altitude"));
}

#[test]
fn config_path_env_var_is_honored() {
    let path = tmp_path("env.cfg");
    fs::write(&path, "cn_density_per_km2 = 0\n").unwrap();
    let out = bin()
        .args(["analyze"])
        .env("UAV_OFFLOAD_CONFIG", &path)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("probability: 0.000000"));
    fs::remove_file(&path).ok();
}

#[test]
fn simulate_is_byte_identical_across_runs_and_jobs() {
    let args = |jobs: &str| {
        vec![
            "simulate".to_string(),
            "--trials".into(),
            "200".into(),
            "--gus".into(),
            "25".into(),
            "--seed".into(),
            "42".into(),
            "--jobs".into(),
            jobs.to_string(),
            "--set".into(),
            "cn_dist_radius_m=400".into(),
        ]
    };
    let first = run(&args("1").iter().map(String::as_str).collect::<Vec<_>>());
    let second = run(&args("1").iter().map(String::as_str).collect::<Vec<_>>());
    let parallel = run(&args("4").iter().map(String::as_str).collect::<Vec<_>>());
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout, "same seed, same bytes");
    assert_eq!(first.stdout, parallel.stdout, "jobs must not change bytes");
    assert!(stdout(&first).contains("seed: 42"));
}

#[test]
fn compare_small_grid_passes_and_exits_zero() {
    let out = run(&[
        "compare",
        "--grid",
        "150:450:3",
        "--trials",
        "400",
        "--gus",
        "50",
        "--seed",
        "7",
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert_eq!(text.matches("pass").count(), 3, "{text}");
    assert!(text.contains("summary: all 3 altitudes"));
}

/// `compare`'s theory column and `analyze`'s headline value must come from
/// the same code path: pin them against each other for one configuration.
#[test]
fn compare_theory_column_equals_analyze() {
    let analyze = run(&["analyze", "--json", "--set", "uav_altitude_m=350"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&analyze)).unwrap();
    let from_analyze = v["average"]["mean_prob"].as_f64().unwrap();

    let compare = run(&[
        "compare",
        "--grid",
        "350:350:1",
        "--trials",
        "50",
        "--gus",
        "10",
    ]);
    let text = stdout(&compare);
    let row = text.lines().nth(1).expect("one data row");
    let theory: f64 = row.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(
        (theory - from_analyze).abs() < 5e-7,
        "compare shows {theory}, analyze shows {from_analyze}"
    );
}

#[test]
fn simulate_with_no_nodes_reports_zero() {
    let out = run(&[
        "simulate",
        "--trials",
        "10",
        "--gus",
        "5",
        "--set",
        "cn_density_per_km2=0",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("mean: 0.000000"));
}

#[test]
fn compare_holds_under_rate_averaging_too() {
    let out = run(&[
        "compare",
        "--grid",
        "200:800:3",
        "--trials",
        "400",
        "--gus",
        "50",
        "--seed",
        "5",
        "--set",
        "channel_averaging=rate_avg",
        "--set",
        "cn_dist_radius_m=800",
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("summary: all 3 altitudes"));
}

#[test]
fn zero_trials_is_rejected_by_the_parser() {
    let out = run(&["simulate", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(1), "usage errors exit 1, not clap's 2");
    assert!(String::from_utf8_lossy(&out.stderr).contains("trials"));
}

#[test]
fn help_and_version_exit_zero() {
    for flag in ["--help", "--version"] {
        let out = run(&[flag]);
        assert_eq!(out.status.code(), Some(0), "{flag}");
    }
    let out = run(&["analyze", "--bogus-flag"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_writes_expected_rows_and_schema() {
    let csv_path = tmp_path("sweep.csv");
    let json_path = tmp_path("sweep.json");
    let out = run(&[
        "sweep",
        "--axis",
        "cn_density=2:10:3",
        "--axis",
        "altitude=200:400:2",
        "--engine",
        "theory",
        "--output",
        csv_path.to_str().unwrap(),
        "--json",
        json_path.to_str().unwrap(),
        "--set",
        "cn_dist_radius_m=500",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv_path).unwrap();
    let data_lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data_lines.len(), 1 + 6, "header plus 3x2 grid");
    assert_eq!(
        data_lines[0],
        "cn_density_per_km2,altitude_m,theory_prob,mc_mean,mc_ci,lambda_center,service_radius_center_m,wall_time_s"
    );
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 6);
    fs::remove_file(&csv_path).ok();
    fs::remove_file(&json_path).ok();
}

/// Golden-file regression on a pinned config and seed: everything except the
/// wall-time column must match byte-for-byte.
#[test]
fn sweep_matches_golden_output() {
    let csv_path = tmp_path("golden.csv");
    let out = run(&[
        "sweep",
        "--axis",
        "altitude=200:800:4",
        "--engine",
        "both",
        "--trials",
        "64",
        "--gus",
        "16",
        "--seed",
        "11",
        "--output",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let got = mask_wall_time(&fs::read_to_string(&csv_path).unwrap());
    let want = mask_wall_time(include_str!("golden/sweep_both.csv"));
    assert_eq!(got, want, "sweep output drifted from the golden file");
    fs::remove_file(&csv_path).ok();
}

fn mask_wall_time(text: &str) -> String {
    text.lines()
        .map(|line| {
            if line.starts_with('#') || line.ends_with("wall_time_s") {
                line.to_string()
            } else {
                match line.rfind(',') {
                    Some(idx) => format!("{},<t>", &line[..idx]),
                    None => line.to_string(),
                }
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}
