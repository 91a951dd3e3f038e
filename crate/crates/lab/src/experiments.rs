//! Registry of named experiments and their parameter schemas.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use noiselab::boolfourier::{
    degree_profile, empirical_stability, make_dictator, make_majority, make_parity, make_tribes, noise_stability,
    repetition_majority_logical_error, repetition_majority_monte_carlo, walsh_transform, BooleanFunction,
};
use noiselab::bosonsampler::{
    boson_distribution, boson_outcome_count, enumerate_boson_outcomes, fermion_distribution, MAX_OUTCOMES,
};
use noiselab::matcore::{haar_orthonormal_rows, RandomSource};
use noiselab::nisqsim::{
    bitflip_code_experiment, cat_circuit, chaos_probe, error_correlation, error_synchronization_stats,
    ideal_vs_noisy_correlation, output_fourier_profile, random_circuit, run_circuit_density, run_circuit_trajectories,
    three_bit_majority_failure, BitflipNoise, Circuit, Gate, GateKind, NoiseModel, MAX_DENSITY_QUBITS,
    MAX_STATE_QUBITS,
};
use noiselab::noisybs::{correlation_decay_curve, mean_attenuation_check, noise_semigroup_check, NoiseRate};

use crate::error::{LabError, LabResult};
use crate::output::{num, quoted, OutputSet};

/// A parameter schema that knows how to run itself.
pub trait Experiment: DeserializeOwned + Serialize {
    fn seed(&self) -> u64;

    /// Shot or sample count recorded in CSV metadata.
    fn shots(&self) -> Option<usize> {
        None
    }

    /// Resource caps and value ranges, checked before any computation.
    fn check(&self) -> LabResult<()> {
        Ok(())
    }

    fn run(&self, out: &mut OutputSet) -> LabResult<()>;
}

/// Parameters resolved against a schema, ready to run.
pub struct Prepared {
    pub resolved: Value,
    pub seed: u64,
    pub shots: Option<usize>,
    runner: Box<dyn FnOnce(&mut OutputSet) -> LabResult<()>>,
}

impl Prepared {
    pub fn run(self, out: &mut OutputSet) -> LabResult<()> {
        (self.runner)(out)
    }
}

fn prepare<E: Experiment + 'static>(params: &Map<String, Value>) -> LabResult<Prepared> {
    let value = Value::Object(params.clone());
    let p: E = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            LabError::Config(format!("params: {}", e.inner()))
        } else {
            LabError::Config(format!("params.{path}: {}", e.inner()))
        }
    })?;
    p.check()?;
    Ok(Prepared {
        resolved: serde_json::to_value(&p)?,
        seed: p.seed(),
        shots: p.shots(),
        runner: Box::new(move |out| p.run(out)),
    })
}

pub struct ExperimentInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub anchor: &'static str,
    pub prepare: fn(&Map<String, Value>) -> LabResult<Prepared>,
}

pub fn registry() -> Vec<ExperimentInfo> {
    vec![
        ExperimentInfo {
            name: "boson-ideal",
            description: "exact boson and fermion output distributions of a Haar input",
            anchor: "boson sampling law |Per(X_S)|^2/prod S_j! and its determinant analogue",
            prepare: prepare::<BosonIdeal>,
        },
        ExperimentInfo {
            name: "boson-noisy-decay",
            description: "correlation between ideal and Gaussian-noised boson distributions over (n, t)",
            anchor: "noise sensitivity of boson sampling: vanishing ideal/noisy correlation",
            prepare: prepare::<BosonNoisyDecay>,
        },
        ExperimentInfo {
            name: "boson-attenuation",
            description: "mean permanent under noise against (1-t)^(n/2) Per(A_S)",
            anchor: "attenuation of the degree-n part by the noise operator",
            prepare: prepare::<BosonAttenuation>,
        },
        ExperimentInfo {
            name: "boson-semigroup",
            description: "two noise stages against a single composed stage",
            anchor: "Gaussian noise composes as 1-(1-t1)(1-t2)",
            prepare: prepare::<BosonSemigroup>,
        },
        ExperimentInfo {
            name: "bool-stability",
            description: "exact and sampled noise stability of standard Boolean functions",
            anchor: "noise stability Stab_rho(f) = sum_S rho^|S| f^(S)^2",
            prepare: prepare::<BoolStability>,
        },
        ExperimentInfo {
            name: "bool-degree-profile",
            description: "Fourier mass per degree of standard Boolean functions",
            anchor: "low-degree concentration of noise-stable functions",
            prepare: prepare::<BoolDegreeProfile>,
        },
        ExperimentInfo {
            name: "repetition-code-classical",
            description: "majority decoding of a classical repetition code",
            anchor: "classical error correction by repetition and majority",
            prepare: prepare::<RepetitionClassical>,
        },
        ExperimentInfo {
            name: "circuit-ideal-vs-noisy",
            description: "correlation and TVD of a random circuit's noisy output against the ideal one",
            anchor: "noisy circuit outputs drift far from the noiseless distribution",
            prepare: prepare::<CircuitIdealVsNoisy>,
        },
        ExperimentInfo {
            name: "circuit-chaos",
            description: "output correlations across jittered noise parameters",
            anchor: "sensitivity of noisy outputs to fine noise parameters (chaotic outcomes)",
            prepare: prepare::<CircuitChaos>,
        },
        ExperimentInfo {
            name: "circuit-fourier-profile",
            description: "degree profile of a random circuit's output distribution under noise",
            anchor: "noisy output distributions are well approximated by low-degree terms",
            prepare: prepare::<CircuitFourierProfile>,
        },
        ExperimentInfo {
            name: "cat-error-correlation",
            description: "correlation of error events on the two qubits of a cat state",
            anchor: "entangled qubits are subject to positively correlated noise",
            prepare: prepare::<CatErrorCorrelation>,
        },
        ExperimentInfo {
            name: "error-synchronization",
            description: "fluctuations of the number of qubits hit per run against a binomial baseline",
            anchor: "error synchronization: many simultaneous qubit errors",
            prepare: prepare::<ErrorSynchronization>,
        },
        ExperimentInfo {
            name: "bitflip-code",
            description: "three-qubit bit-flip code with one syndrome round against a bare qubit",
            anchor: "small quantum error correction on a noisy device",
            prepare: prepare::<BitflipCode>,
        },
    ]
}

pub fn find(name: &str) -> LabResult<ExperimentInfo> {
    registry().into_iter().find(|e| e.name == name).ok_or_else(|| {
        let names: Vec<_> = registry().iter().map(|e| e.name).collect();
        LabError::Config(format!("unknown experiment {name:?}; known: {}", names.join(", ")))
    })
}

fn cfg(msg: impl Into<String>) -> LabError {
    LabError::Config(msg.into())
}

fn check_rate(name: &str, t: f64) -> LabResult<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(cfg(format!("{name} = {t} outside [0, 1]")))
    }
}

fn check_positive(name: &str, v: usize) -> LabResult<()> {
    if v == 0 {
        Err(cfg(format!("{name} must be at least 1")))
    } else {
        Ok(())
    }
}

fn check_boson_size(n: usize, m: usize) -> LabResult<()> {
    if n == 0 || n > m {
        return Err(cfg(format!("need 1 <= n <= m, got n={n}, m={m}")));
    }
    let count = boson_outcome_count(n, m);
    if count > MAX_OUTCOMES {
        return Err(cfg(format!("size cap: {count} boson outcomes for n={n}, m={m} (limit {MAX_OUTCOMES})")));
    }
    Ok(())
}

fn check_qubits(n: usize, limit: usize) -> LabResult<()> {
    if n < 2 || n > limit {
        return Err(cfg(format!("size cap: n_qubits = {n} outside [2, {limit}]")));
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BosonIdeal {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
}

impl Default for BosonIdeal {
    fn default() -> Self {
        Self { n: 3, m: 6, seed: 1 }
    }
}

impl Experiment for BosonIdeal {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn check(&self) -> LabResult<()> {
        check_boson_size(self.n, self.m)
    }

    fn run(&self, out: &mut OutputSet) -> LabResult<()> {
        let a = haar_orthonormal_rows(self.n, self.m, &mut RandomSource::new(self.seed))?;
        let bosons = boson_distribution(&a)?;
        let rows: Vec<_> = bosons.iter().map(|(k, p)| vec![quoted(k), num(p)]).collect();
        out.csv("boson.csv", &["outcome", "probability"], &rows)?;
        let fermions = fermion_distribution(&a)?;
        let rows: Vec<_> = fermions.iter().map(|(k, p)| vec![quoted(k), num(p)]).collect();
        out.csv("fermion.csv", &["outcome", "probability"], &rows)?;
        out.csv(
            "summary.csv",
            &["n", "m", "boson_total", "fermion_total"],
            &[vec![self.n.to_string(), self.m.to_string(), num(bosons.total()), num(fermions.total())]],
        )
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BosonNoisyDecay {
    pub n_list: Vec<usize>,
    pub t_list: Vec<f64>,
    pub mc_samples: usize,
    /// Number of modes is `n^2` unless fixed here.
    pub m: Option<usize>,
    pub seed: u64,
}

impl Default for BosonNoisyDecay {
    fn default() -> Self {
        Self {
            n_list: vec![2, 3, 4],
            t_list: vec![0.1, 0.3, 0.5, 0.8],
            mc_samples: 20_000,
            m: None,
            seed: 7,
        }
    }
}

impl BosonNoisyDecay {
    fn modes(&self, n: usize) -> usize {
        self.m.unwrap_or(n * n)
    }
}

impl Experiment for BosonNoisyDecay {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn shots(&self) -> Option<usize> {
        Some(self.mc_samples)
    }

    fn check(&self) -> LabResult<()> {
        check_positive("mc_samples", self.mc_samples)?;
        for &t in &self.t_list {
            check_rate("t", t)?;
        }
        for &n in &self.n_list {
            check_boson_size(n, self.modes(n))?;
        }
        Ok(())
    }

    fn run(&self, out: &mut OutputSet) -> LabResult<()> {
        let rows = correlation_decay_curve(
            &self.n_list,
            |n| self.modes(n),
            &self.t_list,
            self.mc_samples,
            &mut RandomSource::new(self.seed),
        )?;
        let rows: Vec<_> = rows
            .iter()
            .map(|r| vec![r.n.to_string(), r.m.to_string(), num(r.t), num(r.corr), num(r.std_err), num(r.tvd)])
            .collect();
        out.csv("decay.csv", &["n", "m", "t", "corr", "std_err", "tvd"], &rows)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BosonAttenuation {
    pub n: usize,
    pub m: usize,
    pub t_list: Vec<f64>,
    pub mc_samples: usize,
    /// Number of random (A, S) pairs.
    pub trials: usize,
    pub seed: u64,
}

impl Default for BosonAttenuation {
    fn default() -> Self {
        Self {
            n: 3,
            m: 9,
            t_list: vec![0.1, 0.3, 0.7],
            mc_samples: 100_000,
            trials: 5,
            seed: 5,
        }
    }
}

impl Experiment for BosonAttenuation {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn shots(&self) -> Option<usize> {
        Some(self.mc_samples)
    }

    fn check(&self) -> LabResult<()> {
        check_positive("mc_samples", self.mc_samples)?;
        check_positive("trials", self.trials)?;
        for &t in &self.t_list {
            check_rate("t", t)?;
        }
        check_boson_size(self.n, self.m)
    }

    fn run(&self, out: &mut OutputSet) -> LabResult<()> {
        let rows = attenuation_rows(self)?
            .into_iter()
            .map(|r| {
                vec![
                    r.trial.to_string(),
                    num(r.t),
                    quoted(&r.outcome),
                    num(r.estimate.0),
                    num(r.estimate.1),
                    num(r.target.0),
                    num(r.target.1),
                    num(r.std_err),
                    num(r.z),
                ]
            })
            .collect::<Vec<_>>();
        out.csv(
            "attenuation.csv",
            &["trial", "t", "outcome", "estimate_re", "estimate_im", "target_re", "target_im", "std_err", "z"],
            &rows,
        )
    }
}

pub struct AttenuationRow {
    pub trial: usize,
    pub t: f64,
    pub outcome: String,
    pub estimate: (f64, f64),
    pub target: (f64, f64),
    pub std_err: f64,
    pub z: f64,
}

/// Trial `i` draws `A` and `S` from stream `fork(2i)` and the noise for
/// rate `j` from `fork(2i+1).fork(j)`.
pub fn attenuation_rows(p: &BosonAttenuation) -> LabResult<Vec<AttenuationRow>> {
    let base = RandomSource::new(p.seed);
    let outcomes = enumerate_boson_outcomes(p.n, p.m)?;
    let mut rows = Vec::new();
    for trial in 0..p.trials {
        let mut r = base.fork(2 * trial as u64);
        let a = haar_orthonormal_rows(p.n, p.m, &mut r)?;
        let s = &outcomes[r.index(outcomes.len())];
        let noise = base.fork(2 * trial as u64 + 1);
        for (j, &t) in p.t_list.iter().enumerate() {
            let c = mean_attenuation_check(&a, s, NoiseRate::new(t)?, p.mc_samples, &mut noise.fork(j as u64))?;
            rows.push(AttenuationRow {
                trial,
                t,
                outcome: s.to_string(),
                estimate: (c.estimate.re, c.estimate.im),
                target: (c.target.re, c.target.im),
                std_err: c.std_err,
                z: c.z_score(),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BosonSemigroup {
    pub n: usize,
    pub m: usize,
    pub t1: f64,
    pub t2: f64,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for BosonSemigroup {
    fn default() -> Self {
        Self {
            n: 2,
            m: 3,
            t1: 0.2,
            t2: 0.2,
            mc_samples: 100_000,
            seed: 6,
        }
    }
}

impl Experiment for BosonSemigroup {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn shots(&self) -> Option<usize> {
        Some(self.mc_samples)
    }

    fn check(&self) -> LabResult<()> {
        check_positive("mc_samples", self.mc_samples)?;
        check_rate("t1", self.t1)?;
        check_rate("t2", self.t2)?;
        check_boson_size(self.n, self.m)
    }

    fn run(&self, out: &mut OutputSet) -> LabResult<()> {
        let mut rng = RandomSource::new(self.seed);
        let a = haar_orthonormal_rows(self.n, self.m, &mut rng)?;
        let c = noise_semigroup_check(&a, NoiseRate::new(self.t1)?, NoiseRate::new(self.t2)?, self.mc_samples, &mut rng)?;
        let rows: Vec<_> = c
            .two_stage
            .dist
            .iter()
            .enumerate()
            .map(|(i, (k, p))| {
                let q = c.one_stage.dist.probs()[i];
                let se = c.two_stage.std_err[i].hypot(c.one_stage.std_err[i]);
                vec![quoted(k), num(p), num(q), num(se), num((p - q).abs() / se)]
            })
            .collect();
        out.csv("semigroup.csv", &["outcome", "two_stage", "one_stage", "combined_std_err", "gap_in_std_errors"], &rows)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionName {
    Majority,
    Parity,
    Dictator,
    Tribes,
}

/// `n` is the number of variables; tribes uses width 2 and `n/2` tribes.
pub fn build_function(name: FunctionName, n: usize) -> LabResult<BooleanFunction> {
    Ok(match name {
        FunctionName::Majority => make_majority(n)?,
        FunctionName::Parity => make_parity(n)?,
        FunctionName::Dictator => make_dictator(n, 0)?,
        FunctionName::Tribes => make_tribes(2, n / 2)?,
    })
}

fn check_functions(functions: &[FunctionName], n: usize) -> LabResult<()> {
    if n == 0 || n > 20 {
        return Err(cfg(format!("size cap: n = {n} outside [1, 20]")));
    }
    for &f in functions {
        if f == FunctionName::Majority && n % 2 == 0 {
            return Err(cfg(format!("majority needs an odd n, got {n}")));
        }
        if f == FunctionName::Tribes && n < 2 {
            return Err(cfg("tribes needs n >= 2"));
        }
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoolStability {
    pub functions: Vec<FunctionName>,
    pub n: usize,
    pub rho_list: Vec<f64>,
    pub shots: usize,
    pub seed: u64,
}

impl Default for BoolStability {
    fn default() -> Self {
        Self {
            functions: vec![FunctionName::Majority, FunctionName::Parity, FunctionName::Dictator, FunctionName::Tribes],
            n: 5,
            rho_list: (1..10).map(|i| i as f64 / 10.0).collect(),
            shots: 100_000,
            seed: 8,
        }
    }
}

impl Experiment for BoolStability {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn shots(&self) -> Option<usize> {
        Some(self.shots)
    }

    fn check(&self) -> LabResult<()> {
        check_positive("shots", self.shots)?;
        check_functions(&self.functions, self.n)?;
        for &rho in &self.rho_list {
            if !(0.0..=1.0).contains(&rho) {
                return Err(cfg(format!("rho = {rho} outside [0, 1]")));
            }
        }
        Ok(())
    }

    fn run(&self, out: &mut OutputSet) -> LabResult<()> {
        let base = RandomSource::new(self.seed);
        let mut rows = Vec::new();
        for (i, &name) in self.functions.iter().enumerate() {
            let f = build_function(name, self.n)?;
            for (j, &rho) in self.rho_list.iter().enumerate() {
                let exact = noise_stability(&f, rho)?;
                let mut r = base.fork((i * self.rho_list.len() + j) as u64);
                let (emp, se) = empirical_stability(&f, rho, self.shots, &mut r)?;
                rows.push(vec![
                    quoted(serde_json::to_value(name)?.as_str().unwrap_or_default()),
                    f.n_vars().to_string(),
                    num(rho),
                    num(exact),
                    num(emp),
                    num(se),
                ]);
            }
        }
        out.csv("stability.csv", &["function", "n", "rho", "exact", "empirical", "std_err"], &rows)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoolDegreeProfile {
    pub functions: Vec<FunctionName>,
    pub n: usize,
    pub seed: u64,
}

impl Default for BoolDegreeProfile {
    fn default() -> Self {
        Self {
            functions: vec![FunctionName::Majority, FunctionName::Parity, FunctionName::Dictator, FunctionName::Tribes],
            n: 9,
            seed: 0,
        }
    }
}

impl Experiment for BoolDegreeProfile {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn check(&self) -> LabResult<()> {
        check_functions(&self.functions, self.n)
    }

    fn run(&self, out: &mut OutputSet) -> LabResult<()> {
        let mut rows = Vec::new();
        for &name in &self.functions {
            let f = build_function(name, self.n)?;
            let profile = degree_profile(&walsh_transform(&f));
            let label = serde_json::to_value(name)?.as_str().unwrap_or_default().to_string();
            for (d, mass) in profile.masses.iter().enumerate() {
                rows.push(vec![quoted(&label), f.n_vars().to_string(), d.to_string(), num(*mass)]);
            }
        }
        out.csv("degree_profile.csv", &["function", "n", "degree", "mass"], &rows)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RepetitionClassical {
    pub l_list: Vec<usize>,
    pub p_list: Vec<f64>,
    pub shots: usize,
    pub seed: u64,
}

impl Default for RepetitionClassical {
    fn default() -> Self {
        Self {
            l_list: vec![3, 5, 7],
            p_list: vec![0.05, 0.1, 0.2],
            shots: 1_000_000,
            seed: 10,
        }
    }
}

impl Experiment for RepetitionClassical {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn shots(&self) -> Option<usize> {
        Some(self.shots)
    }

    fn check(&self) -> LabResult<()> {
        check_positive("shots", self.shots)?;
        for &l in &self.l_list {
            if l % 2 == 0 || l > 1001 {
                return Err(cfg(format!("repetition length {l} must be odd and at most 1001")));
            }
        }
        for &p in &self.p_list {
            if !(0.0..=0.5).contains(&p) {
                return Err(cfg(format!("p = {p} outside [0, 0.5]")));
            }
        }
        Ok(())
    }

    fn run(&self, out: &mut OutputSet) -> LabResult<()> {
        let base = RandomSource::new(self.seed);
        let mut rows = Vec::new();
        for (i, &l) in self.l_list.iter().enumerate() {
            for (j, &p) in self.p_list.iter().enumerate() {
                let exact = repetition_majority_logical_error(l, p)?;
                let mut r = base.fork((i * self.p_list.len() + j) as u64);
                let (mc, se) = repetition_majority_monte_carlo(l, p, self.shots, &mut r)?;
                rows.push(vec![l.to_string(), num(p), num(exact), num(mc), num(se)]);
            }
        }
        out.csv("repetition.csv", &["l", "p", "logical_exact", "logical_mc", "std_err"], &rows)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitIdealVsNoisy {
    pub n_qubits: usize,
    pub depth: usize,
    pub t_list: Vec<f64>,
    /// Gate noise as a multiple of the qubit rate.
    pub gate_factor: f64,
    pub seed: u64,
}

impl Default for CircuitIdealVsNoisy {
    fn default() -> Self {
        Self {
            n_qubits: 6,
            depth: 8,
            t_list: vec![0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5],
            gate_factor: 1.0,
            seed: 11,
        }
    }
}

impl Experiment for CircuitIdealVsNoisy {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn check(&self) -> LabResult<()> {
        check_qubits(self.n_qubits, MAX_DENSITY_QUBITS)?;
        for &t in &self.t_list {
            check_rate("t", t)?;
            check_rate("t * gate_factor", t * self.gate_factor)?;
        }
        Ok(())
    }

    fn run(&self, out: &mut OutputSet) -> LabResult<()> {
        let c = random_circuit(self.n_qubits, self.depth, &mut RandomSource::new(self.seed))?;
        let mut rows = Vec::new();
        for &t in &self.t_list {
            let (corr, tvd) = ideal_vs_noisy_correlation(&c, &NoiseModel::new(t, t * self.gate_factor)?)?;
            rows.push(vec![num(t), num(corr), num(tvd)]);
        }
        out.csv("ideal_vs_noisy.csv", &["t", "corr", "tvd"], &rows)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitChaos {
    pub n_qubits: usize,
    pub depth: usize,
    pub t: f64,
    pub jitter: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for CircuitChaos {
    fn default() -> Self {
        Self {
            n_qubits: 6,
            depth: 6,
            t: 0.05,
            jitter: 0.5,
            trials: 20,
            seed: 16,
        }
    }
}

impl Experiment for CircuitChaos {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn check(&self) -> LabResult<()> {
        check_qubits(self.n_qubits, MAX_DENSITY_QUBITS)?;
        check_rate("t", self.t)?;
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(cfg(format!("jitter = {} must be non-negative", self.jitter)));
        }
        if self.trials < 2 {
            return Err(cfg("trials must be at least 2"));
        }
        Ok(())
    }

    fn run(&self, out: &mut OutputSet) -> LabResult<()> {
        let p = run_chaos(self.n_qubits, self.depth, self.t, self.jitter, self.trials, self.seed)?;
        out.csv(
            "chaos.csv",
            &["n_qubits", "depth", "t", "jitter", "trials", "self_corr", "cross_corr_mean", "cross_corr_std"],
            &[vec![
                self.n_qubits.to_string(),
                self.depth.to_string(),
                num(self.t),
                num(self.jitter),
                self.trials.to_string(),
                num(p.self_corr),
                num(p.cross_corr_mean),
                num(p.cross_corr_std),
            ]],
        )
    }
}

/// Circuit from stream `fork(0)`, jitter draws from `fork(1)`.
pub fn run_chaos(
    n: usize,
    depth: usize,
    t: f64,
    jitter: f64,
    trials: usize,
    seed: u64,
) -> LabResult<noiselab::nisqsim::ChaosProbe> {
    let base = RandomSource::new(seed);
    let c = random_circuit(n, depth, &mut base.fork(0))?;
    let nm = NoiseModel::new(t, t)?.with_jitter(jitter)?;
    Ok(chaos_probe(&c, &nm, trials, &mut base.fork(1))?)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitFourierProfile {
    pub n_qubits: usize,
    pub depth: usize,
    pub t_list: Vec<f64>,
    pub seed: u64,
}

impl Default for CircuitFourierProfile {
    fn default() -> Self {
        Self {
            n_qubits: 8,
            depth: 12,
            t_list: vec![0.0, 0.02, 0.05, 0.1, 0.2],
            seed: 15,
        }
    }
}

impl Experiment for CircuitFourierProfile {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn check(&self) -> LabResult<()> {
        check_qubits(self.n_qubits, MAX_DENSITY_QUBITS)?;
        for &t in &self.t_list {
            check_rate("t", t)?;
        }
        Ok(())
    }

    fn run(&self, out: &mut OutputSet) -> LabResult<()> {
        let c = random_circuit(self.n_qubits, self.depth, &mut RandomSource::new(self.seed))?;
        let mut rows = Vec::new();
        for &t in &self.t_list {
            let (_, dist) = run_circuit_density(&c, &NoiseModel::new(t, 0.0)?)?;
            let p = output_fourier_profile(&dist)?;
            for (d, m) in p.masses.iter().enumerate().skip(1) {
                rows.push(vec![num(t), d.to_string(), num(*m), p.degenerate.to_string()]);
            }
        }
        out.csv("fourier_profile.csv", &["t", "degree", "relative_mass", "degenerate"], &rows)
    }
}

/// Cat circuit followed by `indirection` pairs of CNOTs that cancel out.
pub fn indirect_cat_circuit(indirection: usize) -> LabResult<Circuit> {
    let base = cat_circuit();
    let mut cycles = base.cycles().to_vec();
    for _ in 0..2 * indirection {
        cycles.push(vec![Gate::new(GateKind::Cnot, &[0, 1])?]);
    }
    Ok(Circuit::new(2, cycles, vec![0, 1])?)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CatErrorCorrelation {
    pub t_gate: f64,
    pub t_qubit: f64,
    pub shots: usize,
    /// Extra CNOT pairs appended after the cat state is prepared.
    pub indirection: usize,
    pub seed: u64,
}

impl Default for CatErrorCorrelation {
    fn default() -> Self {
        Self {
            t_gate: 0.1,
            t_qubit: 0.02,
            shots: 100_000,
            indirection: 0,
            seed: 13,
        }
    }
}

impl Experiment for CatErrorCorrelation {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn shots(&self) -> Option<usize> {
        Some(self.shots)
    }

    fn check(&self) -> LabResult<()> {
        check_positive("shots", self.shots)?;
        check_rate("t_gate", self.t_gate)?;
        check_rate("t_qubit", self.t_qubit)?;
        if self.indirection > 1000 {
            return Err(cfg("size cap: indirection above 1000"));
        }
        Ok(())
    }

    fn run(&self, out: &mut OutputSet) -> LabResult<()> {
        let c = indirect_cat_circuit(self.indirection)?;
        let nm = NoiseModel::new(self.t_qubit, self.t_gate)?;
        let run = run_circuit_trajectories(&c, &nm, self.shots, &mut RandomSource::new(self.seed))?;
        let e = error_correlation(&run.records, (0, 1))?;
        out.csv(
            "error_correlation.csv",
            &["shots", "rate_q0", "rate_q1", "pearson", "ci95_low", "ci95_high"],
            &[vec![e.shots.to_string(), num(e.rate_i), num(e.rate_j), num(e.pearson), num(e.ci95.0), num(e.ci95.1)]],
        )?;
        let rows: Vec<_> = run
            .empirical
            .iter()
            .zip(run.born_average.probs())
            .map(|((k, p), b)| vec![quoted(k), num(p), num(*b)])
            .collect();
        out.csv("outcomes.csv", &["outcome", "empirical", "born_average"], &rows)
    }
}

/// `cycles` cycles of CNOTs on the pairs (0,1), (2,3), ...
pub fn paired_cnot_circuit(n_qubits: usize, cycles: usize) -> LabResult<Circuit> {
    let layer: Vec<Gate> = (0..n_qubits / 2)
        .map(|i| Gate::new(GateKind::Cnot, &[2 * i, 2 * i + 1]))
        .collect::<Result<_, _>>()?;
    Ok(Circuit::new(n_qubits, vec![layer; cycles], (0..n_qubits).collect())?)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ErrorSynchronization {
    pub n_qubits: usize,
    pub cycles: usize,
    pub t_gate: f64,
    pub t_qubit: f64,
    pub shots: usize,
    pub seed: u64,
}

impl Default for ErrorSynchronization {
    fn default() -> Self {
        Self {
            n_qubits: 6,
            cycles: 4,
            t_gate: 0.1,
            t_qubit: 0.0,
            shots: 100_000,
            seed: 14,
        }
    }
}

impl Experiment for ErrorSynchronization {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn shots(&self) -> Option<usize> {
        Some(self.shots)
    }

    fn check(&self) -> LabResult<()> {
        check_positive("shots", self.shots)?;
        check_qubits(self.n_qubits, MAX_STATE_QUBITS)?;
        check_rate("t_gate", self.t_gate)?;
        check_rate("t_qubit", self.t_qubit)
    }

    fn run(&self, out: &mut OutputSet) -> LabResult<()> {
        let s = sync_stats(self)?;
        out.csv(
            "synchronization.csv",
            &["shots", "mean", "std", "binomial_std", "ratio", "ratio_std_err"],
            &[vec![s.shots.to_string(), num(s.mean), num(s.std), num(s.binomial_std), num(s.ratio), num(s.ratio_std_err)]],
        )?;
        let rows: Vec<_> = s.tail.iter().map(|(k, p)| vec![k.to_string(), num(*p)]).collect();
        out.csv("tail.csv", &["threshold", "probability_at_least"], &rows)
    }
}

pub fn sync_stats(p: &ErrorSynchronization) -> LabResult<noiselab::nisqsim::SyncStats> {
    let c = paired_cnot_circuit(p.n_qubits, p.cycles)?;
    let nm = NoiseModel::new(p.t_qubit, p.t_gate)?;
    let run = run_circuit_trajectories(&c, &nm, p.shots, &mut RandomSource::new(p.seed))?;
    Ok(error_synchronization_stats(&run.records, p.n_qubits)?)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BitflipCode {
    pub t_list: Vec<f64>,
    /// Gate noise as a multiple of the qubit rate (full mode only).
    pub gate_factor: f64,
    pub noise: BitflipNoise,
    pub shots: usize,
    pub seed: u64,
}

impl Default for BitflipCode {
    fn default() -> Self {
        Self {
            t_list: vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.3],
            gate_factor: 1.0,
            noise: BitflipNoise::Full,
            shots: 100_000,
            seed: 3,
        }
    }
}

impl Experiment for BitflipCode {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn shots(&self) -> Option<usize> {
        Some(self.shots)
    }

    fn check(&self) -> LabResult<()> {
        check_positive("shots", self.shots)?;
        for &t in &self.t_list {
            check_rate("t", t)?;
            check_rate("t * gate_factor", t * self.gate_factor)?;
        }
        Ok(())
    }

    fn run(&self, out: &mut OutputSet) -> LabResult<()> {
        let base = RandomSource::new(self.seed);
        let mut rows = Vec::new();
        for (i, &t) in self.t_list.iter().enumerate() {
            let r = bitflip_code_experiment(t * self.gate_factor, t, self.noise, self.shots, &mut base.fork(i as u64))?;
            // a depolarizing hit flips a basis state with probability 1/2
            let predicted = match self.noise {
                BitflipNoise::MemoryOnly => num(three_bit_majority_failure(t / 2.0)),
                BitflipNoise::Full => String::new(),
            };
            rows.push(vec![
                num(t),
                num(r.logical_error),
                num(r.logical_ci95.0),
                num(r.logical_ci95.1),
                num(r.physical_error),
                num(r.physical_ci95.0),
                num(r.physical_ci95.1),
                predicted,
            ]);
        }
        out.csv(
            "bitflip.csv",
            &[
                "t",
                "logical_error",
                "logical_ci95_low",
                "logical_ci95_high",
                "physical_error",
                "physical_ci95_low",
                "physical_ci95_high",
                "logical_predicted",
            ],
            &rows,
        )
    }
}
