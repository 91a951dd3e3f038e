use rand::RngCore;
use serde::Serialize;

use super::circuit::{Circuit, Gate, GateKind, NoiseModel};
use super::density::{run_circuit_density, run_circuit_density_resolved};
use super::statevector::StateVector;
use super::trajectory::replace_with_random_state;
use crate::boolfourier::{degree_profile, walsh_transform, BooleanFunction};
use crate::distribution::{BitString, OutcomeDistribution};
use crate::error::{Error, Result};
use crate::matcore::RandomSource;
use crate::noisybs::distribution_correlation;
use crate::par;
use crate::stats::wilson_interval;

/// Correlation and total-variation distance between the noiseless and the
/// noisy output distributions of `c`.
pub fn ideal_vs_noisy_correlation(c: &Circuit, nm: &NoiseModel) -> Result<(f64, f64)> {
    let (_, ideal) = run_circuit_density(c, &NoiseModel::noiseless())?;
    let (_, noisy) = run_circuit_density(c, nm)?;
    Ok((distribution_correlation(&ideal, &noisy)?, ideal.tvd(&noisy)?))
}

/// Fourier mass of a distribution's non-constant part, per degree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FourierProfile {
    /// Entry `d` is the share of non-constant mass at degree `d`; entry 0 is 0.
    pub masses: Vec<f64>,
    /// Set when there is no non-constant mass (uniform input).
    pub degenerate: bool,
}

impl FourierProfile {
    pub fn mass_above(&self, d: usize) -> f64 {
        self.masses.iter().skip(d + 1).sum()
    }
}

/// Walsh-transforms the probability vector as a function on `{0,1}^k` and
/// returns its normalized degree profile. Requires every `k`-bit string in
/// index order.
pub fn output_fourier_profile(out: &OutcomeDistribution<BitString>) -> Result<FourierProfile> {
    let len = out.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::Key(format!("{len} outcomes do not form a full set of bit strings")));
    }
    let k = len.trailing_zeros() as usize;
    for (i, key) in out.outcomes().iter().enumerate() {
        if key.value != i as u64 || key.width != k {
            return Err(Error::Key(format!("outcome {i} is {key}, expected full index order")));
        }
    }
    let f = BooleanFunction::new(k, out.probs().to_vec())?;
    let mut masses = degree_profile(&walsh_transform(&f)).masses;
    masses[0] = 0.0;
    let total: f64 = masses.iter().sum();
    // uniform input leaves at most round-off in the non-constant part
    let degenerate = total <= 1e-28;
    if degenerate {
        masses.iter_mut().for_each(|m| *m = 0.0);
    } else {
        masses.iter_mut().for_each(|m| *m /= total);
    }
    Ok(FourierProfile { masses, degenerate })
}

/// Sensitivity of the output distribution to small changes of the noise
/// rates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChaosProbe {
    pub trials: usize,
    /// Correlation of one perturbed model's output with its own recomputation.
    pub self_corr: f64,
    pub cross_corr_mean: f64,
    pub cross_corr_std: f64,
}

/// Runs `trials` jittered copies of `nm` (trial `i` drawn from stream
/// `fork(i)`) and summarises the pairwise correlations of their outputs.
pub fn chaos_probe(c: &Circuit, nm: &NoiseModel, trials: usize, rng: &mut RandomSource) -> Result<ChaosProbe> {
    nm.validate()?;
    if nm.jitter.is_none() {
        return Err(Error::Precondition("chaos probe needs a noise model with jitter".into()));
    }
    if trials < 2 {
        return Err(Error::Precondition("chaos probe needs at least 2 trials".into()));
    }
    let base = RandomSource::new(rng.next_u64());
    let models = (0..trials)
        .map(|i| nm.jittered(c, &mut base.fork(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let outputs = par::map_range(trials, |i| run_circuit_density_resolved(c, &models[i]).map(|(_, out)| out))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let (_, again) = run_circuit_density_resolved(c, &models[0])?;
    let self_corr = distribution_correlation(&outputs[0], &again)?;
    let mut cross = Vec::with_capacity(trials * (trials - 1) / 2);
    for i in 0..trials {
        for j in i + 1..trials {
            cross.push(distribution_correlation(&outputs[i], &outputs[j])?);
        }
    }
    let mean = cross.iter().sum::<f64>() / cross.len() as f64;
    let var = cross.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / cross.len() as f64;
    Ok(ChaosProbe {
        trials,
        self_corr,
        cross_corr_mean: mean,
        cross_corr_std: var.sqrt(),
    })
}

/// Which parts of the bit-flip code experiment are noisy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BitflipNoise {
    /// Gate and qubit noise in every cycle, on data and ancilla qubits.
    Full,
    /// Qubit noise on the data qubits during the single memory cycle only.
    MemoryOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BitflipResult {
    pub shots: usize,
    pub logical_failures: u64,
    pub physical_failures: u64,
    pub logical_error: f64,
    pub logical_ci95: (f64, f64),
    pub physical_error: f64,
    pub physical_ci95: (f64, f64),
}

const DATA: [usize; 3] = [0, 1, 2];
const CODE_CYCLES: usize = 5;
const MEMORY_CYCLE: usize = 2;

fn code_cycles() -> Result<Vec<Vec<Gate>>> {
    let cx = |a, b| Gate::new(GateKind::Cnot, &[a, b]);
    Ok(vec![
        vec![cx(0, 1)?],
        vec![cx(0, 2)?],
        vec![],
        vec![cx(0, 3)?, cx(1, 4)?],
        vec![cx(1, 3)?, cx(2, 4)?],
    ])
}

fn noisy_qubits(mode: BitflipNoise, cycle: usize, n: usize) -> Vec<usize> {
    match mode {
        BitflipNoise::Full => (0..n).collect(),
        BitflipNoise::MemoryOnly if cycle == MEMORY_CYCLE => DATA.iter().copied().filter(|&q| q < n).collect(),
        BitflipNoise::MemoryOnly => vec![],
    }
}

fn encoded_shot(cycles: &[Vec<Gate>], t_gate: f64, t_qubit: f64, mode: BitflipNoise, rng: &mut RandomSource) -> Result<bool> {
    let mut psi = StateVector::zero_state(5)?;
    for (cycle, gates) in cycles.iter().enumerate() {
        for g in gates {
            psi.apply_gate(g)?;
            if mode == BitflipNoise::Full && t_gate > 0.0 && rng.bernoulli(t_gate) {
                replace_with_random_state(&mut psi, g.targets(), rng)?;
            }
        }
        if t_qubit > 0.0 {
            for q in noisy_qubits(mode, cycle, 5) {
                if rng.bernoulli(t_qubit) {
                    replace_with_random_state(&mut psi, &[q], rng)?;
                }
            }
        }
    }
    // ancilla 3 checks d0⊕d1, ancilla 4 checks d1⊕d2
    let syndrome = psi.measure(&[3, 4], rng)?;
    let flip = match syndrome {
        0b01 => Some(0),
        0b11 => Some(1),
        0b10 => Some(2),
        _ => None,
    };
    if let Some(q) = flip {
        psi.apply_gate(&Gate::new(GateKind::X, &[q])?)?;
    }
    let data = psi.measure(&DATA, rng)?;
    Ok(data.count_ones() >= 2)
}

fn bare_shot(t_qubit: f64, mode: BitflipNoise, rng: &mut RandomSource) -> Result<bool> {
    let mut psi = StateVector::zero_state(1)?;
    if t_qubit > 0.0 {
        for cycle in 0..CODE_CYCLES {
            if !noisy_qubits(mode, cycle, 1).is_empty() && rng.bernoulli(t_qubit) {
                replace_with_random_state(&mut psi, &[0], rng)?;
            }
        }
    }
    Ok(psi.measure(&[0], rng)? == 1)
}

/// Three-qubit bit-flip repetition code holding logical `|0⟩`: encode, one
/// round of syndrome extraction with two ancillas, correction, majority
/// readout. The baseline is a single bare qubit exposed to the same qubit
/// noise over the same cycles.
pub fn bitflip_code_experiment(
    t_gate: f64,
    t_qubit: f64,
    mode: BitflipNoise,
    shots: usize,
    rng: &mut RandomSource,
) -> Result<BitflipResult> {
    for (name, t) in [("t_gate", t_gate), ("t_qubit", t_qubit)] {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Precondition(format!("{name} = {t} outside [0, 1]")));
        }
    }
    if shots == 0 {
        return Err(Error::Precondition("shots must be at least 1".into()));
    }
    let cycles = code_cycles()?;
    let base = RandomSource::new(rng.next_u64());
    let parts = par::map_chunks(shots, 1024, |start, end| -> Result<(u64, u64)> {
        let (mut logical, mut physical) = (0, 0);
        for s in start..end {
            let mut r = base.fork(2 * s as u64);
            logical += encoded_shot(&cycles, t_gate, t_qubit, mode, &mut r)? as u64;
            let mut r = base.fork(2 * s as u64 + 1);
            physical += bare_shot(t_qubit, mode, &mut r)? as u64;
        }
        Ok((logical, physical))
    });
    let (mut logical, mut physical) = (0, 0);
    for p in parts {
        let (l, ph) = p?;
        logical += l;
        physical += ph;
    }
    let n = shots as u64;
    Ok(BitflipResult {
        shots,
        logical_failures: logical,
        physical_failures: physical,
        logical_error: logical as f64 / shots as f64,
        logical_ci95: wilson_interval(logical, n),
        physical_error: physical as f64 / shots as f64,
        physical_ci95: wilson_interval(physical, n),
    })
}

/// Majority-vote failure probability for three independent flips of
/// probability `p`.
pub fn three_bit_majority_failure(p: f64) -> f64 {
    3.0 * p * p - 2.0 * p * p * p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nisqsim::circuit::{cat_circuit, random_circuit};

    #[test]
    fn noiseless_circuit_is_perfectly_correlated() {
        let c = random_circuit(4, 3, &mut RandomSource::new(1)).unwrap();
        let (corr, tvd) = ideal_vs_noisy_correlation(&c, &NoiseModel::noiseless()).unwrap();
        assert!((corr - 1.0).abs() < 1e-10 && tvd < 1e-10);
        let (corr, tvd) = ideal_vs_noisy_correlation(&c, &NoiseModel::new(1.0, 0.0).unwrap()).unwrap();
        assert_eq!(corr, 0.0);
        assert!(tvd > 0.0);
    }

    #[test]
    fn fourier_profile_examples() {
        let keys: Vec<BitString> = (0..8).map(|value| BitString { value, width: 3 }).collect();
        let uniform = OutcomeDistribution::new(keys.clone(), vec![0.125; 8]).unwrap();
        let p = output_fourier_profile(&uniform).unwrap();
        assert!(p.degenerate && p.masses.iter().all(|&m| m == 0.0));

        let mut delta = vec![0.0; 8];
        delta[0] = 1.0;
        let p = output_fourier_profile(&OutcomeDistribution::new(keys.clone(), delta).unwrap()).unwrap();
        assert!(!p.degenerate);
        for (d, binom) in [(1, 3.0), (2, 3.0), (3, 1.0)] {
            assert!((p.masses[d] - binom / 7.0).abs() < 1e-12);
        }
        assert!((p.masses.iter().sum::<f64>() - 1.0).abs() < 1e-10);

        let partial = OutcomeDistribution::new(keys[..6].to_vec(), vec![1.0 / 6.0; 6]).unwrap();
        assert!(matches!(output_fourier_profile(&partial), Err(Error::Key(_))));
    }

    #[test]
    fn chaos_probe_edge_cases() {
        let c = random_circuit(3, 2, &mut RandomSource::new(2)).unwrap();
        let still = NoiseModel::new(0.05, 0.05).unwrap().with_jitter(0.0).unwrap();
        let p = chaos_probe(&c, &still, 4, &mut RandomSource::new(3)).unwrap();
        assert!((p.cross_corr_mean - 1.0).abs() < 1e-10);
        let zero = NoiseModel::new(0.0, 0.0).unwrap().with_jitter(0.7).unwrap();
        let p = chaos_probe(&c, &zero, 4, &mut RandomSource::new(3)).unwrap();
        assert!((p.cross_corr_mean - 1.0).abs() < 1e-12 && (p.self_corr - 1.0).abs() < 1e-12);
        assert!(chaos_probe(&cat_circuit(), &NoiseModel::noiseless(), 4, &mut RandomSource::new(0)).is_err());
    }

    #[test]
    fn bitflip_noiseless_and_memory_only() {
        let r = bitflip_code_experiment(0.0, 0.0, BitflipNoise::Full, 500, &mut RandomSource::new(4)).unwrap();
        assert_eq!((r.logical_failures, r.physical_failures), (0, 0));

        // depolarizing at rate t flips a basis state with probability t/2
        let t = 0.2;
        let shots = 40_000;
        let r = bitflip_code_experiment(0.0, t, BitflipNoise::MemoryOnly, shots, &mut RandomSource::new(5)).unwrap();
        let p = t / 2.0;
        let expect = three_bit_majority_failure(p);
        let sigma = (expect * (1.0 - expect) / shots as f64).sqrt();
        assert!((r.logical_error - expect).abs() < 4.0 * sigma, "{} vs {expect}", r.logical_error);
        let sigma = (p * (1.0 - p) / shots as f64).sqrt();
        assert!((r.physical_error - p).abs() < 4.0 * sigma);
    }

    #[test]
    fn single_errors_are_corrected() {
        // inject an X on each data qubit during the memory cycle
        let cycles = code_cycles().unwrap();
        for q in DATA {
            let mut psi = StateVector::zero_state(5).unwrap();
            for (cycle, gates) in cycles.iter().enumerate() {
                for g in gates {
                    psi.apply_gate(g).unwrap();
                }
                if cycle == MEMORY_CYCLE {
                    psi.apply_gate(&Gate::new(GateKind::X, &[q]).unwrap()).unwrap();
                }
            }
            let mut rng = RandomSource::new(0);
            let syndrome = psi.measure(&[3, 4], &mut rng).unwrap();
            assert_eq!(syndrome, [0b01, 0b11, 0b10][q]);
        }
    }
}
