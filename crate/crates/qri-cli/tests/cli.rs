//! End-to-end tests of the binary: exit codes, output schemas, and
//! bitwise determinism of seeded runs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qri"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qri-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).expect("scratch dir");
    dir
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, text).expect("config written");
    path
}

const SMALL_RANDOM_TAU: &str = r#"
model = "spin_spin"

[params]
e_s = 1.0
e_e = 2.0
lambda = 0.5
beta = 1.0
tau = 1.0

[distributions.tau]
kind = "uniform"
lo = 0.8
hi = 1.2

[run]
n_steps = 4000
n_trajectories = 2
seed = 7
cesaro_window = 1000

[[outputs]]
kind = "csv"
path = "series.csv"

[[outputs]]
kind = "json"
path = "summary.json"
"#;

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {args:?} failed ({:?}): {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn simulate_reports_the_asymptotic_temperature() {
    let dir = scratch("simulate");
    let config = write_config(&dir, SMALL_RANDOM_TAU);
    run_ok(&[
        "simulate",
        "--quiet",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["model"], "spin_spin");
    assert_eq!(summary["seed"], 7);
    assert_eq!(summary["config_hash"].as_str().unwrap().len(), 64);
    let beta_hat = summary["estimates"]["beta_prime"].as_f64().unwrap();
    let beta_target = summary["targets"]["beta_prime"].as_f64().unwrap();
    assert_eq!(beta_target, 2.0);
    assert!((beta_hat - 2.0).abs() < 0.05, "beta estimate {beta_hat}");
    // CSV carries the metadata line, a header, and checkpoint rows
    let csv = fs::read_to_string(dir.join("series.csv")).unwrap();
    let mut lines = csv.lines();
    let meta = lines.next().unwrap();
    assert!(meta.starts_with("# model=spin_spin seed=7 config_hash="));
    assert_eq!(lines.next().unwrap(), "n,p0,p1,max_population_dev,coherence_abs");
    assert_eq!(lines.count(), 4);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn identical_seeds_give_bitwise_identical_outputs() {
    let dir = scratch("determinism");
    let config = write_config(&dir, SMALL_RANDOM_TAU);
    for sub in ["a", "b"] {
        run_ok(&[
            "simulate",
            "--quiet",
            "--config",
            config.to_str().unwrap(),
            "--out",
            dir.join(sub).to_str().unwrap(),
        ]);
    }
    for file in ["series.csv", "summary.json"] {
        let a = fs::read(dir.join("a").join(file)).unwrap();
        let b = fs::read(dir.join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
    // overriding the seed changes the outputs
    run_ok(&[
        "simulate",
        "--quiet",
        "--seed",
        "8",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.join("c").to_str().unwrap(),
    ]);
    let a = fs::read(dir.join("a").join("series.csv")).unwrap();
    let c = fs::read(dir.join("c").join("series.csv")).unwrap();
    assert_ne!(a, c, "seed override must change the trajectory");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn malformed_config_exits_2_without_partial_outputs() {
    let dir = scratch("malformed");
    let config = write_config(&dir, &SMALL_RANDOM_TAU.replace("e_s = 1.0", "e_sss = 1.0"));
    let out = bin()
        .args([
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            dir.join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.join("out").exists(), "no files may be created for a bad config");
    // missing config path is also a config error
    let out = bin().args(["simulate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn unknown_validate_suite_is_a_usage_error() {
    let out = bin().args(["validate", "nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_fermion_suite_passes_and_writes_json() {
    let dir = scratch("validate");
    let out = run_ok(&["validate", "spin_fermion", "--out", dir.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 2);
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("validate.json")).unwrap()).unwrap();
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["results"].as_array().unwrap().len(), 2);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn thermo_zero_coupling_reports_zero_fluxes() {
    let dir = scratch("thermo");
    let config = write_config(
        &dir,
        &SMALL_RANDOM_TAU
            .replace("lambda = 0.5", "lambda = 0.0")
            .replace("series.csv", "thermo.csv")
            .replace("summary.json", "thermo.json"),
    );
    run_ok(&[
        "thermo",
        "--quiet",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("thermo.json")).unwrap()).unwrap();
    assert_eq!(doc["targets"]["de_plus"].as_f64().unwrap(), 0.0);
    assert_eq!(doc["targets"]["ds_plus"].as_f64().unwrap(), 0.0);
    assert!(doc["extra"].is_null() || doc.get("beta_effective").is_some());
    assert_eq!(doc["beta_effective"].as_f64().unwrap(), 1.0);
    assert!(doc["second_law_residual"].as_f64().unwrap() < 1e-12);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn thermo_random_beta_marks_temperature_as_random() {
    let dir = scratch("thermo-random-beta");
    let config = write_config(
        &dir,
        r#"
model = "spin_spin"

[params]
e_s = 1.0
e_e = 2.0
lambda = 0.5
beta = 1.0
tau = 1.0

[distributions.beta]
kind = "finite"
atoms = [[0.5, 0.5], [2.0, 0.5]]

[run]
n_steps = 2000
seed = 5

[[outputs]]
kind = "json"
path = "report.json"
"#,
    );
    run_ok(&[
        "thermo",
        "--quiet",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(doc["beta_effective"], "random");
    assert!(doc.get("second_law_residual").is_none());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn spectrum_sweep_marks_the_period_boundary() {
    let dir = scratch("spectrum");
    let config = write_config(
        &dir,
        &SMALL_RANDOM_TAU
            .replace("series.csv", "spectrum.csv")
            .replace("summary.json", "spectrum.json"),
    );
    run_ok(&[
        "spectrum",
        "--quiet",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    let csv = fs::read_to_string(dir.join("spectrum.csv")).unwrap();
    let period = 2.0 * std::f64::consts::PI / 2f64.sqrt();
    let mut found_boundary = false;
    for line in csv.lines().skip(2) {
        let cells: Vec<&str> = line.split(',').collect();
        let tau: f64 = cells[0].parse().unwrap();
        let gate = cells[5];
        if (tau - period).abs() < 1e-9 {
            found_boundary = true;
            assert_eq!(gate, "0", "gate must fail exactly at the period");
            let abs_e0: f64 = cells[1].parse().unwrap();
            assert!((abs_e0 - 1.0).abs() < 1e-9);
        }
    }
    assert!(found_boundary, "sweep must include the period boundary row");
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("spectrum.json")).unwrap()).unwrap();
    assert!((doc["estimates"]["period"].as_f64().unwrap() - period).abs() < 1e-12);
    assert!(doc["estimates"]["worst_numeric_dev"].as_f64().unwrap() < 1e-9);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn spin_fermion_simulate_two_routes_within_budget() {
    let dir = scratch("fermion");
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/spin_fermion.toml");
    run_ok(&[
        "simulate",
        "--quiet",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("fermion_summary.json")).unwrap())
            .unwrap();
    let two_route = doc["discrepancies"]["two_route"].as_f64().unwrap();
    let budget = doc["targets"]["remainder_budget"].as_f64().unwrap();
    assert!(two_route < budget, "two-route deviation {two_route} vs budget {budget}");
    assert!(two_route < 1e-3);
    let q = doc["targets"]["q_expansion"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&q));
    let _ = fs::remove_dir_all(&dir);
}
