//! Acceptance criteria, one test each. Every test prints a PASS/FAIL line.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use noiselab_cli::checks::{find_check, run_check};

/// Writes past libtest's output capture so every verdict shows up in the log.
fn report(line: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

fn criterion(id: u32) {
    let check = find_check(id).expect("registered check");
    let result = run_check(&check);
    report(&result.line());
    assert!(result.passed, "criterion {id} failed: {}", result.detail);
}

#[test]
fn c01_permanent_oracle_equivalence() {
    criterion(1);
}

#[test]
fn c02_boson_normalization() {
    criterion(2);
}

#[test]
fn c03_fermion_cauchy_binet() {
    criterion(3);
}

#[test]
fn c04_hong_ou_mandel() {
    criterion(4);
}

#[test]
fn c05_mean_attenuation() {
    criterion(5);
}

#[test]
fn c06_noise_semigroup() {
    criterion(6);
}

#[test]
fn c07_correlation_decay_trend() {
    criterion(7);
}

#[test]
fn c08_boolean_stability_exactness() {
    criterion(8);
}

#[test]
fn c09_noise_operator_semigroup() {
    criterion(9);
}

#[test]
fn c10_repetition_decoding() {
    criterion(10);
}

#[test]
fn c11_trajectory_density_consistency() {
    criterion(11);
}

#[test]
fn c12_noisy_cat_closed_form() {
    criterion(12);
}

#[test]
fn c13_cat_error_correlation() {
    criterion(13);
}

#[test]
fn c14_error_synchronization() {
    criterion(14);
}

#[test]
fn c15_low_degree_concentration() {
    criterion(15);
}

#[test]
fn c16_chaos_probe() {
    criterion(16);
}

fn lab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_lab")).args(args).output().expect("lab runs")
}

fn digest(path: &Path) -> String {
    noiselab_cli::output::sha256_hex(&std::fs::read(path).expect("readable output"))
}

#[test]
fn c17_run_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("decay.json");
    std::fs::write(
        &config,
        r#"{"experiment": "boson-noisy-decay",
            "params": {"n_list": [2, 3, 4], "t_list": [0.1, 0.3, 0.7], "mc_samples": 20000, "seed": 7}}"#,
    )
    .unwrap();
    let mut digests = Vec::new();
    for run in ["first", "second"] {
        let out_dir = dir.path().join(run);
        let out = lab(&["run", "--config", config.to_str().unwrap(), "--output-dir", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        digests.push((digest(&out_dir.join("decay.csv")), digest(&out_dir.join("resolved_config.json"))));
    }
    let same = digests[0] == digests[1];
    report(&format!(
        "[{}] 17 run determinism | decay.csv sha256 {} twice: {same}",
        if same { "PASS" } else { "FAIL" },
        &digests[0].0[..16]
    ));
    assert!(same);
}

/// Runs the full `lab validate` and checks its time budget. The exit status
/// reflects the individual criteria, which have their own tests above.
#[test]
fn c17_validate_runtime_bound() {
    let start = Instant::now();
    let out = lab(&["validate"]);
    let elapsed = start.elapsed();
    let stdout = String::from_utf8_lossy(&out.stdout);
    let lines = stdout.lines().filter(|l| l.starts_with("[PASS]") || l.starts_with("[FAIL]")).count();
    let ok = elapsed < Duration::from_secs(20 * 60) && lines == 17;
    report(&format!(
        "[{}] 17 validate runtime | {:.1}s for {lines} checks (budget 1200s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    ));
    assert!(ok, "{stdout}");
}
