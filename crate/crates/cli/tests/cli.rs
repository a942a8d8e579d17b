use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_robin"))
}

struct Run {
    dir: TempDir,
    out: Output,
}

impl Run {
    fn code(&self) -> i32 {
        self.out.status.code().unwrap()
    }

    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.out.stderr).into_owned()
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join("out").join(name)
    }

    fn json(&self, name: &str) -> Value {
        let text = std::fs::read_to_string(self.path(name))
            .unwrap_or_else(|e| panic!("{name}: {e}; {}", self.stderr()));
        serde_json::from_str(&text).unwrap()
    }
}

fn run_in(dir: TempDir, command: &str, config: &str, extra: &[&str]) -> Run {
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, config).unwrap();
    let out = bin()
        .arg(command)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .args(extra)
        .output()
        .unwrap();
    Run { dir, out }
}

fn run(command: &str, config: &str) -> Run {
    run_in(tempfile::tempdir().unwrap(), command, config, &[])
}

fn bessel(n: i32, x: f64) -> f64 {
    let mut term = (x / 2.0).powi(n) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..200 {
        term *= -(x * x / 4.0) / (k as f64 * (k + n) as f64);
        sum += term;
    }
    sum
}

/// `k²` with `k J₁(k) = β J₀(k)`, `k ∈ (0, j₀₁)`.
fn disk_robin(beta: f64) -> f64 {
    let f = |k: f64| k * bessel(1, k) - beta * bessel(0, k);
    let (mut lo, mut hi) = (1e-9, 2.404_825_557_695_773);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo * lo
}

#[test]
fn eigen_on_ball_matches_bessel() {
    let r = run(
        "eigen",
        r#"{"domain": {"shape": "ball", "radius": 1}, "solver": {"p": 2, "beta": 1}}"#,
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let j = r.json("eigen.json");
    assert_eq!(j["command"], "eigen");
    assert_eq!(j["converged"], true);
    assert_eq!(j["result"]["method"], "radial");
    let lambda = j["result"]["lambda"].as_f64().unwrap();
    let exact = disk_robin(1.0);
    assert!((lambda - exact).abs() < 1e-6 * exact, "{lambda} vs {exact}");
    assert!(r.path("profile.csv").exists());
}

#[test]
fn eigen_with_neumann_condition_is_zero() {
    let r = run(
        "eigen",
        r#"{"domain": {"shape": "ball", "radius": 1}, "solver": {"beta": 0}}"#,
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    assert_eq!(r.json("eigen.json")["result"]["lambda"].as_f64(), Some(0.0));
}

#[test]
fn eigen_below_minus_one_is_rejected_as_unbounded() {
    let r = run(
        "eigen",
        r#"{"domain": {"shape": "ball", "radius": 1}, "solver": {"beta": -1.5}}"#,
    );
    assert_eq!(r.code(), 1);
    assert!(r.stderr().contains("unbounded"), "{}", r.stderr());
    assert!(!r.path("eigen.json").exists());
}

#[test]
fn eigen_on_grid_writes_field() {
    let r = run(
        "eigen",
        r#"{"domain": {"shape": "rectangle", "width": 1, "height": 1}, "solver": {"h": 0.0625, "p": 2, "beta": 1}}"#,
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let j = r.json("eigen.json");
    assert_eq!(j["result"]["method"], "grid");
    let lambda = j["result"]["lambda"].as_f64().unwrap();
    let bound = j["result"]["constant_bound"].as_f64().unwrap();
    assert!(lambda > 0.0 && lambda <= bound, "{lambda} {bound}");
    let csv = std::fs::read_to_string(r.path("field.csv")).unwrap();
    assert!(csv.starts_with("i,j,x,y,value\n"));
    assert_eq!(csv.lines().count(), 1 + 16 * 16);
}

#[test]
fn limit_on_ball_is_close_to_one() {
    let r = run(
        "limit",
        r#"{"domain": {"shape": "ball", "radius": 1}, "solver": {"h": 0.03125, "beta": 0.5}}"#,
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let j = r.json("limit.json");
    let lambda = j["result"]["lambda"].as_f64().unwrap();
    assert!((lambda - 1.0).abs() < 0.05, "{lambda}");
    assert_eq!(j["result"]["closed_form"].as_f64(), Some(1.0));
    assert!(r.path("limit_set.mask").exists());
}

#[test]
fn cheeger_of_square() {
    let r = run(
        "cheeger",
        r#"{"domain": {"shape": "rectangle", "width": 1, "height": 1}, "solver": {"h": 0.03125}}"#,
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let lambda = r.json("cheeger.json")["result"]["lambda"].as_f64().unwrap();
    let exact = 2.0 + std::f64::consts::PI.sqrt();
    assert!((lambda - exact).abs() < 0.05 * exact, "{lambda}");
}

#[test]
fn empty_mask_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.mask"), "3 2 0.5\n0 0 0\n0 0 0\n").unwrap();
    let r = run_in(dir, "limit", r#"{"mask": "empty.mask"}"#, &[]);
    assert_eq!(r.code(), 1, "{}", r.stderr());
}

#[test]
fn mask_runs_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("l.mask"), "3 2 0.5\n1 0 0\n1 1 1\n").unwrap();
    let r = run_in(dir, "cheeger", r#"{"mask": "l.mask"}"#, &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    assert!(r.json("cheeger.json")["result"]["lambda"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_reverse_faber_krahn_on_square() {
    let cfg = r#"{
        "solver": {"h": 0.03125},
        "verify": {"checks": [
            {"kind": "faber_krahn", "domain": {"shape": "rectangle", "width": 1.7724538509055159, "height": 1.7724538509055159}, "beta": -0.5}
        ]}
    }"#;
    let r = run("verify", cfg);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let csv = std::fs::read_to_string(r.path("verdicts.csv")).unwrap();
    let rows = robin_core::io::parse_verdict_csv(&csv).unwrap();
    assert!(rows.iter().any(|v| v.id == "fk2"));
    assert!(rows.iter().all(|v| v.verdict == "pass"), "{csv}");
}

#[test]
fn verify_failure_exits_three() {
    // a sweep with an impossible tolerance
    let cfg = r#"{
        "verify": {"checks": [
            {"kind": "sweep", "domain": {"shape": "ball", "radius": 1}, "beta": 0.5, "p_list": [2.0, 1.9, 1.8], "tolerance": 1e-6}
        ]}
    }"#;
    let r = run("verify", cfg);
    assert_eq!(r.code(), 3, "{}", r.stderr());
    assert_eq!(r.json("verify.json")["result"]["pass"], false);
}

#[test]
fn shell_checks_pass() {
    let cfg = r#"{"verify": {"checks": [{"kind": "shell_ratio", "dimension": 3, "beta": -0.5}, {"kind": "shell_ratio", "dimension": 2, "beta": 5}]}}"#;
    let r = run("verify", cfg);
    assert_eq!(r.code(), 0, "{}", r.stderr());
}

#[test]
fn malformed_p_list_is_rejected() {
    for p_list in ["[1.1, 1.5]", "[]", "[1.0]", "[2, \"x\"]"] {
        let r = run(
            "sweep",
            &format!(
                r#"{{"domain": {{"shape": "ball", "radius": 1}}, "solver": {{"p_list": {p_list}}}}}"#
            ),
        );
        assert_eq!(r.code(), 1, "{p_list}: {}", r.stderr());
    }
    let cfg = r#"{"verify": {"checks": [{"kind": "sweep", "domain": {"shape": "ball", "radius": 1}, "beta": 0.5, "p_list": [1.02, 1.5], "tolerance": 0.01}]}}"#;
    assert_eq!(run("verify", cfg).code(), 1);
}

#[test]
fn unknown_keys_are_rejected() {
    for cfg in [
        r#"{"solver": {"bta": 1}}"#,
        r#"{"extra": 0}"#,
        r#"{"domain": {"shape": "ball", "radius": 1, "center": [0, 0]}}"#,
        r#"{"output": {"dir": "x"}}"#,
    ] {
        let r = run("eigen", cfg);
        assert_eq!(r.code(), 1, "{cfg}");
        assert!(r.stderr().contains("unknown"), "{}", r.stderr());
    }
}

#[test]
fn sweep_on_ball_passes() {
    let r = run(
        "sweep",
        r#"{"domain": {"shape": "ball", "radius": 1}, "solver": {"beta": 0.5}}"#,
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let rows =
        robin_core::io::parse_sweep_csv(&std::fs::read_to_string(r.path("sweep.csv")).unwrap())
            .unwrap();
    assert_eq!(rows.len(), 5);
    let star = r.json("sweep.json")["result"]["lambda_star"]
        .as_f64()
        .unwrap();
    assert!((star - 1.0).abs() < 0.01, "{star}");
}

#[test]
fn blowup_defaults_to_unit_square() {
    let r = run("blowup", r#"{"solver": {"beta": -1.5, "h": 0.0078125}}"#);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let j = r.json("blowup.json");
    assert_eq!(j["result"]["strictly_decreasing"], true);
    let r = run("blowup", r#"{"solver": {"beta": -0.5}}"#);
    assert_eq!(r.code(), 1);
}

#[test]
fn demo_values_follow_closed_form() {
    let r = run("demo-figure1", "{}");
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let values = r.json("demo.json")["result"]["values"]
        .as_array()
        .unwrap()
        .clone();
    assert_eq!(values.len(), 7);
    let v: Vec<f64> = values
        .iter()
        .map(|x| x["value"].as_f64().unwrap())
        .collect();
    assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
}

#[test]
fn format_flag_limits_outputs() {
    let cfg = r#"{"domain": {"shape": "ball", "radius": 1}}"#;
    let r = run_in(
        tempfile::tempdir().unwrap(),
        "eigen",
        cfg,
        &["--format", "csv"],
    );
    assert_eq!(r.code(), 0);
    assert!(r.path("profile.csv").exists() && !r.path("eigen.json").exists());
    let r = run_in(
        tempfile::tempdir().unwrap(),
        "eigen",
        cfg,
        &["--format", "json"],
    );
    assert!(!r.path("profile.csv").exists() && r.path("eigen.json").exists());
}

fn without_timestamp(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = text
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
        .collect();
    assert_eq!(lines.len() + 1, text.lines().count());
    lines.join("\n")
}

#[test]
fn identical_configs_give_identical_reports() {
    let cfg = r#"{"domain": {"shape": "ellipse", "semi_x": 1, "semi_y": 0.6}, "solver": {"h": 0.0625, "p": 1.5, "beta": 2}}"#;
    let a = run("eigen", cfg);
    let (json, field) = (
        without_timestamp(&a.path("eigen.json")),
        std::fs::read(a.path("field.csv")).unwrap(),
    );
    let b = run_in(a.dir, "eigen", cfg, &[]);
    assert_eq!(b.code(), 0);
    assert_eq!(without_timestamp(&b.path("eigen.json")), json);
    assert_eq!(std::fs::read(b.path("field.csv")).unwrap(), field);
}

#[test]
fn missing_config_file_is_an_error() {
    let out = bin()
        .args(["eigen", "--config", "/nonexistent/run.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
