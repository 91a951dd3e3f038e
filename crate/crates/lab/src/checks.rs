//! Acceptance checks with fixed seeds and tolerances, shared by
//! `lab validate` and the test suite.

use std::time::{Duration, Instant};

use noiselab::boolfourier::{
    empirical_stability, make_majority, make_parity, noise_operator, noise_stability,
    repetition_majority_logical_error, repetition_majority_monte_carlo, walsh_transform, BooleanFunction,
};
use noiselab::bosonsampler::{boson_distribution, fermion_distribution};
use noiselab::matcore::{haar_orthonormal_rows, permanent_naive, permanent_ryser, ComplexMatrix, RandomSource};
use noiselab::nisqsim::{
    cat_circuit, chaos_probe, error_correlation, output_fourier_profile, random_circuit, run_circuit_density,
    run_circuit_trajectories, NoiseModel,
};
use noiselab::noisybs::{correlation_decay_curve, noise_semigroup_check, DecayPoint, NoiseRate};
use noiselab::stats::Z95;
use serde_json::{json, Map};

use crate::error::LabResult;
use crate::experiments::{attenuation_rows, sync_stats, BosonAttenuation, ErrorSynchronization};
use crate::runner::{output_digests, run_experiment, ExperimentConfig};

pub struct Verdict {
    pub passed: bool,
    pub detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

pub struct Check {
    pub id: u32,
    pub name: &'static str,
    pub anchor: &'static str,
    /// Wall-clock budget; exceeding it fails the check.
    pub budget: Option<Duration>,
    pub run: fn() -> LabResult<Verdict>,
}

pub struct CheckReport {
    pub id: u32,
    pub name: &'static str,
    pub anchor: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CheckReport {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {} | {} | {:.1}s | {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.anchor
        )
    }
}

pub fn run_check(c: &Check) -> CheckReport {
    let start = Instant::now();
    let result = (c.run)();
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match result {
        Ok(v) => (v.passed, v.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(budget) = c.budget {
        if elapsed > budget {
            passed = false;
            detail.push_str(&format!("; over budget {}s", budget.as_secs()));
        }
    }
    CheckReport {
        id: c.id,
        name: c.name,
        anchor: c.anchor,
        passed,
        detail,
        elapsed,
    }
}

pub fn find_check(id: u32) -> Option<Check> {
    all_checks().into_iter().find(|c| c.id == id)
}

pub fn all_checks() -> Vec<Check> {
    let secs = Duration::from_secs;
    vec![
        Check {
            id: 1,
            name: "permanent oracle equivalence",
            anchor: "Ryser permanent against the n!-term sum",
            budget: Some(secs(5)),
            run: permanent_oracle,
        },
        Check {
            id: 2,
            name: "boson normalization",
            anchor: "boson output probabilities sum to one",
            budget: Some(secs(30)),
            run: boson_normalization,
        },
        Check {
            id: 3,
            name: "fermion Cauchy-Binet",
            anchor: "sum of |det(X_S)|^2 over column subsets is one",
            budget: None,
            run: fermion_cauchy_binet,
        },
        Check {
            id: 4,
            name: "Hong-Ou-Mandel",
            anchor: "two-photon bunching through a balanced beam splitter",
            budget: None,
            run: hong_ou_mandel,
        },
        Check {
            id: 5,
            name: "mean attenuation",
            anchor: "E[Per(M_S)] = (1-t)^(n/2) Per(A_S) under Gaussian noise",
            budget: Some(secs(120)),
            run: mean_attenuation,
        },
        Check {
            id: 6,
            name: "noise semigroup",
            anchor: "two Gaussian noise stages equal one composed stage",
            budget: None,
            run: noise_semigroup,
        },
        Check {
            id: 7,
            name: "correlation decay trend",
            anchor: "noisy boson sampling decorrelates from the ideal law in t and n",
            budget: Some(secs(300)),
            run: decay_trend,
        },
        Check {
            id: 8,
            name: "Boolean stability exactness",
            anchor: "Stab_rho(parity_n) = rho^n, Stab_rho(Maj_3) = (3 rho + rho^3)/4",
            budget: None,
            run: boolean_exactness,
        },
        Check {
            id: 9,
            name: "noise operator semigroup",
            anchor: "T_a T_b = T_ab on Fourier spectra",
            budget: None,
            run: noise_operator_semigroup,
        },
        Check {
            id: 10,
            name: "repetition decoding",
            anchor: "majority decoding of a classical repetition code",
            budget: None,
            run: repetition_decoding,
        },
        Check {
            id: 11,
            name: "trajectory/density consistency",
            anchor: "pure-state unraveling reproduces the depolarizing channel",
            budget: None,
            run: trajectory_density,
        },
        Check {
            id: 12,
            name: "noisy cat closed form",
            anchor: "(1-t)|cat><cat| + t I/4 after a noisy CNOT",
            budget: None,
            run: noisy_cat,
        },
        Check {
            id: 13,
            name: "cat error correlation",
            anchor: "entangled qubits are subject to positively correlated noise",
            budget: None,
            run: cat_error_correlation,
        },
        Check {
            id: 14,
            name: "error synchronization",
            anchor: "super-binomial fluctuation of simultaneous qubit errors",
            budget: None,
            run: error_synchronization,
        },
        Check {
            id: 15,
            name: "low-degree concentration",
            anchor: "noise pushes output distributions toward low Fourier degree",
            budget: Some(secs(180)),
            run: low_degree_concentration,
        },
        Check {
            id: 16,
            name: "chaos probe",
            anchor: "noisy outputs depend sharply on fine noise parameters",
            budget: None,
            run: chaos,
        },
        Check {
            id: 17,
            name: "run determinism",
            anchor: "identical configs give byte-identical outputs",
            budget: None,
            run: determinism,
        },
    ]
}

fn random_matrix(n: usize, rng: &mut RandomSource) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| rng.complex_normal(1.0))
}

fn permanent_oracle() -> LabResult<Verdict> {
    let mut rng = RandomSource::new(1);
    let mut worst = 0.0f64;
    for n in 2..=7 {
        for _ in 0..100 {
            let m = random_matrix(n, &mut rng);
            let naive = permanent_naive(&m)?;
            let ryser = permanent_ryser(&m)?;
            worst = worst.max((ryser - naive).norm() / naive.norm().max(1.0));
        }
    }
    Ok(verdict(worst <= 1e-9, format!("max relative gap {worst:.2e} (tol 1e-9)")))
}

/// 20 Haar inputs per shape, shape `i` seeded by stream `fork(i)`.
fn haar_inputs() -> LabResult<Vec<ComplexMatrix>> {
    let base = RandomSource::new(2);
    let mut out = Vec::new();
    for (i, (n, m)) in [(2, 4), (3, 6), (4, 8)].into_iter().enumerate() {
        let mut r = base.fork(i as u64);
        for _ in 0..20 {
            out.push(haar_orthonormal_rows(n, m, &mut r)?);
        }
    }
    Ok(out)
}

fn boson_normalization() -> LabResult<Verdict> {
    let mut worst = 0.0f64;
    for x in haar_inputs()? {
        worst = worst.max((boson_distribution(&x)?.total() - 1.0).abs());
    }
    Ok(verdict(worst <= 1e-8, format!("max |sum p - 1| = {worst:.2e} (tol 1e-8)")))
}

fn fermion_cauchy_binet() -> LabResult<Verdict> {
    let mut worst = 0.0f64;
    for x in haar_inputs()? {
        worst = worst.max((fermion_distribution(&x)?.total() - 1.0).abs());
    }
    Ok(verdict(worst <= 1e-10, format!("max |sum |det|^2 - 1| = {worst:.2e} (tol 1e-10)")))
}

fn hong_ou_mandel() -> LabResult<Verdict> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let x = ComplexMatrix::from_real_rows(&[&[h, h], &[h, -h]])?;
    let d = boson_distribution(&x)?;
    let p = |s: &str| {
        d.iter()
            .find(|(k, _)| k.to_string() == s)
            .map(|(_, p)| p)
            .unwrap_or(f64::NAN)
    };
    let (p20, p11, p02) = (p("2,0"), p("1,1"), p("0,2"));
    let ok = p11 <= 1e-12 && (p20 - 0.5).abs() <= 1e-12 && (p02 - 0.5).abs() <= 1e-12;
    Ok(verdict(ok, format!("P(2,0)={p20:.15}, P(1,1)={p11:.1e}, P(0,2)={p02:.15} (tol 1e-12)")))
}

fn mean_attenuation() -> LabResult<Verdict> {
    let rows = attenuation_rows(&BosonAttenuation::default())?;
    let worst = rows.iter().map(|r| r.z).fold(0.0, f64::max);
    Ok(verdict(
        worst <= 3.0,
        format!("{} (A, S, t) cases, max |estimate - target| = {worst:.2} std errors (tol 3)", rows.len()),
    ))
}

fn noise_semigroup() -> LabResult<Verdict> {
    let mut rng = RandomSource::new(6);
    let a = haar_orthonormal_rows(2, 3, &mut rng)?;
    let c = noise_semigroup_check(&a, NoiseRate::new(0.2)?, NoiseRate::new(0.2)?, 100_000, &mut rng)?;
    let gap = c.max_gap_in_std_errors();
    Ok(verdict(gap <= 3.0, format!("max per-outcome gap {gap:.2} combined std errors (tol 3)")))
}

/// Consecutive points separated by non-overlapping 95% intervals.
fn strictly_decreasing(points: &[DecayPoint]) -> bool {
    points
        .windows(2)
        .all(|w| w[0].corr - Z95 * w[0].std_err > w[1].corr + Z95 * w[1].std_err)
}

fn fmt_curve(points: &[DecayPoint]) -> String {
    points
        .iter()
        .map(|p| format!("{:.3}±{:.3}", p.corr, p.std_err))
        .collect::<Vec<_>>()
        .join(" > ")
}

fn decay_trend() -> LabResult<Verdict> {
    let base = RandomSource::new(7);
    let in_t = correlation_decay_curve(&[4], |n| n * n, &[0.1, 0.3, 0.5, 0.8], 20_000, &mut base.fork(0))?;
    let in_n = correlation_decay_curve(&[2, 3, 4, 5], |n| n * n, &[0.3], 20_000, &mut base.fork(1))?;
    let (a, b) = (strictly_decreasing(&in_t), strictly_decreasing(&in_n));
    Ok(verdict(
        a && b,
        format!("over t at n=4: {} [{}]; over n at t=0.3: {} [{}]", fmt_curve(&in_t), a, fmt_curve(&in_n), b),
    ))
}

fn boolean_exactness() -> LabResult<Verdict> {
    let grid: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
    let mut parity_gap = 0.0f64;
    for n in 1..=10 {
        let f = make_parity(n)?;
        for &rho in &grid {
            parity_gap = parity_gap.max((noise_stability(&f, rho)? - rho.powi(n as i32)).abs());
        }
    }
    let maj = make_majority(3)?;
    let mut maj_gap = 0.0f64;
    for &rho in &grid {
        maj_gap = maj_gap.max((noise_stability(&maj, rho)? - (3.0 * rho + rho.powi(3)) / 4.0).abs());
    }
    let base = RandomSource::new(8);
    let mut worst_z = 0.0f64;
    for (i, rho) in [0.1, 0.5, 0.9].into_iter().enumerate() {
        let (est, se) = empirical_stability(&maj, rho, 1_000_000, &mut base.fork(i as u64))?;
        worst_z = worst_z.max((est - (3.0 * rho + rho.powi(3)) / 4.0).abs() / se);
    }
    Ok(verdict(
        parity_gap <= 1e-12 && maj_gap <= 1e-12 && worst_z <= 3.0,
        format!(
            "parity gap {parity_gap:.1e}, majority gap {maj_gap:.1e} (tol 1e-12); sampled majority max {worst_z:.2} std errors (tol 3)"
        ),
    ))
}

fn noise_operator_semigroup() -> LabResult<Verdict> {
    let mut rng = RandomSource::new(9);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let table = (0..1 << 10).map(|_| if rng.bernoulli(0.5) { 1.0 } else { -1.0 }).collect();
        let spec = walsh_transform(&BooleanFunction::new(10, table)?);
        let (a, b) = (2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
        let two = noise_operator(&noise_operator(&spec, b)?, a)?;
        let one = noise_operator(&spec, a * b)?;
        for (x, y) in two.coeffs().iter().zip(one.coeffs()) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(verdict(worst <= 1e-10, format!("max coefficient gap {worst:.1e} over 50 functions (tol 1e-10)")))
}

fn repetition_decoding() -> LabResult<Verdict> {
    let exact = repetition_majority_logical_error(5, 0.1)?;
    let exact_ok = (exact - 0.00856).abs() <= 1e-10;
    let (mc, se) = repetition_majority_monte_carlo(5, 0.1, 1_000_000, &mut RandomSource::new(10))?;
    let z = (mc - exact).abs() / se;
    let mut all_below = true;
    for l in [3, 5, 7] {
        for p in [0.05, 0.1, 0.2] {
            all_below &= repetition_majority_logical_error(l, p)? < p;
        }
    }
    Ok(verdict(
        exact_ok && z <= 3.0 && all_below,
        format!("L=5 p=0.1: exact {exact:.12}, sampled {mc:.5} ({z:.2} std errors); logical < physical on grid: {all_below}"),
    ))
}

fn trajectory_density() -> LabResult<Verdict> {
    let base = RandomSource::new(11);
    let nm = NoiseModel::new(0.05, 0.05)?;
    let random = random_circuit(6, 6, &mut base.fork(0))?;
    let mut details = Vec::new();
    let mut ok = true;
    for (i, (label, c)) in [("cat", cat_circuit()), ("random n=6 depth 6", random)].into_iter().enumerate() {
        let (_, exact) = run_circuit_density(&c, &nm)?;
        let run = run_circuit_trajectories(&c, &nm, 100_000, &mut base.fork(1 + i as u64))?;
        let tvd = run.empirical.tvd(&exact)?;
        ok &= tvd < 0.01;
        details.push(format!("{label}: TVD {tvd:.4}"));
    }
    Ok(verdict(ok, format!("{} (tol < 0.01, 1e5 shots)", details.join(", "))))
}

fn noisy_cat() -> LabResult<Verdict> {
    let (_, out) = run_circuit_density(&cat_circuit(), &NoiseModel::new(0.0, 0.2)?)?;
    let expect = [0.45, 0.05, 0.05, 0.45];
    let gap = out
        .probs()
        .iter()
        .zip(expect)
        .map(|(p, e)| (p - e).abs())
        .fold(0.0, f64::max);
    Ok(verdict(gap <= 1e-10, format!("output {:?}, max gap {gap:.1e} (tol 1e-10)", out.probs())))
}

fn cat_error_correlation() -> LabResult<Verdict> {
    let nm = NoiseModel::new(0.02, 0.1)?;
    let run = run_circuit_trajectories(&cat_circuit(), &nm, 100_000, &mut RandomSource::new(13))?;
    let e = error_correlation(&run.records, (0, 1))?;
    Ok(verdict(
        e.ci95.0 > 0.0,
        format!("pearson {:.4}, 95% CI [{:.4}, {:.4}] (need lower bound > 0)", e.pearson, e.ci95.0, e.ci95.1),
    ))
}

fn error_synchronization() -> LabResult<Verdict> {
    let gated = sync_stats(&ErrorSynchronization::default())?;
    let independent = sync_stats(&ErrorSynchronization {
        t_gate: 0.0,
        t_qubit: 0.05,
        seed: 114,
        ..ErrorSynchronization::default()
    })?;
    let excess = gated.excess_in_std_errors();
    let indep = independent.excess_in_std_errors();
    Ok(verdict(
        excess > 3.0 && indep.abs() <= 3.0,
        format!(
            "gate noise std ratio {:.3}±{:.3} ({excess:.1} SE above 1, need > 3); qubit noise {:.3}±{:.3} ({indep:.2} SE, need |.| <= 3)",
            gated.ratio, gated.ratio_std_err, independent.ratio, independent.ratio_std_err
        ),
    ))
}

fn low_degree_concentration() -> LabResult<Verdict> {
    let c = random_circuit(8, 12, &mut RandomSource::new(15))?;
    let above = |t: f64| -> LabResult<f64> {
        let (_, out) = run_circuit_density(&c, &NoiseModel::new(t, 0.0)?)?;
        Ok(output_fourier_profile(&out)?.mass_above(4))
    };
    let (low, high) = (above(0.02)?, above(0.2)?);
    Ok(verdict(
        high < low,
        format!("relative mass above degree 4: {low:.4} at t=0.02, {high:.4} at t=0.2"),
    ))
}

fn chaos() -> LabResult<Verdict> {
    let base = RandomSource::new(16);
    let c = random_circuit(6, 6, &mut base.fork(0))?;
    let jittered = chaos_probe(&c, &NoiseModel::new(0.05, 0.05)?.with_jitter(0.5)?, 20, &mut base.fork(1))?;
    let still = chaos_probe(&c, &NoiseModel::new(0.05, 0.05)?.with_jitter(0.0)?, 20, &mut base.fork(2))?;
    let bound = 1.0 - 3.0 * jittered.cross_corr_std;
    let ok = jittered.cross_corr_mean < bound && (still.cross_corr_mean - 1.0).abs() <= 1e-10;
    Ok(verdict(
        ok,
        format!(
            "r=0.5: cross mean {:.6} ± {:.6} (need < {bound:.6}), self {:.12}; r=0: cross mean {:.12}",
            jittered.cross_corr_mean, jittered.cross_corr_std, jittered.self_corr, still.cross_corr_mean
        ),
    ))
}

fn determinism() -> LabResult<Verdict> {
    let dir = std::env::temp_dir().join(format!("lab-determinism-{}", std::process::id()));
    let mut digests = Vec::new();
    for run in ["a", "b"] {
        let params = json!({"n_list": [2, 3, 4], "t_list": [0.1, 0.3, 0.7], "mc_samples": 2000, "seed": 7});
        let cfg = ExperimentConfig {
            experiment: "boson-noisy-decay".into(),
            params: params.as_object().cloned().unwrap_or_else(Map::new),
            output_dir: dir.join(run),
        };
        let manifest = run_experiment(&cfg)?;
        digests.push(output_digests(&cfg.output_dir, &manifest)?);
    }
    let _ = std::fs::remove_dir_all(&dir);
    let same = digests[0] == digests[1];
    Ok(verdict(same, format!("{} data files, digests identical: {same}", digests[0].len())))
}

