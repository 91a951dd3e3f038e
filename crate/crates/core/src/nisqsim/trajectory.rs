use rand::RngCore;
use serde::Serialize;

use super::circuit::{Circuit, NoiseModel, ResolvedNoise};
use super::density::marginal_distribution;
use super::statevector::{local_key, StateVector};
use crate::distribution::{BitString, OutcomeDistribution};
use crate::error::{Error, Result};
use crate::matcore::{haar_unitary, RandomSource};
use crate::par;
use crate::stats::{fisher_interval, Z95};

const SHOT_CHUNK: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Qubit,
    Gate,
}

/// One noise event.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ErrorEvent {
    pub cycle: usize,
    pub qubits: Vec<usize>,
    pub kind: ErrorKind,
}

/// Noise events of a single shot, in the order they fired.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PauliErrorRecord {
    pub events: Vec<ErrorEvent>,
}

impl PauliErrorRecord {
    pub fn hit(&self, q: usize) -> bool {
        self.events.iter().any(|e| e.qubits.contains(&q))
    }

    /// Number of distinct qubits touched by at least one event.
    pub fn distinct_hits(&self) -> usize {
        let mut mask = 0u64;
        for e in &self.events {
            for &q in &e.qubits {
                mask |= 1 << q;
            }
        }
        mask.count_ones() as usize
    }
}

/// Replaces the state of `qubits` by a Haar-random pure state. The qubits are
/// first decoupled from the rest of the register by a measurement in a
/// Haar-random basis whose result is discarded.
pub(crate) fn replace_with_random_state(psi: &mut StateVector, qubits: &[usize], rng: &mut RandomSource) -> Result<()> {
    let d = 1 << qubits.len();
    let v = haar_unitary(d, rng)?;
    psi.apply_unitary(qubits, v.as_slice())?;
    psi.measure(qubits, rng)?;
    let w = haar_unitary(d, rng)?;
    psi.apply_unitary(qubits, w.as_slice())
}

/// One noisy pass through `c`, with the same event order as the density
/// evolution: each gate then its gate noise, then qubit noise per cycle.
pub(crate) fn run_shot(c: &Circuit, noise: &ResolvedNoise, rng: &mut RandomSource) -> Result<(StateVector, PauliErrorRecord)> {
    let mut psi = StateVector::zero_state(c.n_qubits())?;
    let mut record = PauliErrorRecord::default();
    for (cycle, (gates, rates)) in c.cycles().iter().zip(&noise.gate).enumerate() {
        for (g, &t) in gates.iter().zip(rates) {
            psi.apply_gate(g)?;
            if t > 0.0 && rng.bernoulli(t) {
                replace_with_random_state(&mut psi, g.targets(), rng)?;
                record.events.push(ErrorEvent {
                    cycle,
                    qubits: g.targets().to_vec(),
                    kind: ErrorKind::Gate,
                });
            }
        }
        for (q, &t) in noise.qubit.iter().enumerate() {
            if t > 0.0 && rng.bernoulli(t) {
                replace_with_random_state(&mut psi, &[q], rng)?;
                record.events.push(ErrorEvent {
                    cycle,
                    qubits: vec![q],
                    kind: ErrorKind::Qubit,
                });
            }
        }
    }
    Ok((psi, record))
}

/// Result of a trajectory run.
#[derive(Clone, Debug)]
pub struct TrajectoryRun {
    /// Frequencies of the sampled measurement outcomes, one per shot.
    pub empirical: OutcomeDistribution<BitString>,
    /// Average over shots of each final state's exact outcome probabilities;
    /// an unbiased, lower-variance estimate of the same distribution.
    pub born_average: OutcomeDistribution<BitString>,
    pub counts: Vec<u64>,
    pub records: Vec<PauliErrorRecord>,
}

/// Pure-state Monte Carlo unraveling of the depolarizing noise model. Shot
/// `s` draws from its own stream `fork(s)` of a base seed taken from `rng`,
/// so results do not depend on the thread count.
pub fn run_circuit_trajectories(c: &Circuit, nm: &NoiseModel, shots: usize, rng: &mut RandomSource) -> Result<TrajectoryRun> {
    nm.validate()?;
    run_trajectories_resolved(c, &nm.resolve(c), shots, rng)
}

pub fn run_trajectories_resolved(c: &Circuit, noise: &ResolvedNoise, shots: usize, rng: &mut RandomSource) -> Result<TrajectoryRun> {
    if shots == 0 {
        return Err(Error::Precondition("shots must be at least 1".into()));
    }
    StateVector::zero_state(c.n_qubits())?;
    let base = RandomSource::new(rng.next_u64());
    let measured = c.measured();
    let k = measured.len();
    let chunks = par::map_chunks(shots, SHOT_CHUNK, |start, end| -> Result<_> {
        let mut counts = vec![0u64; 1 << k];
        let mut born = vec![0.0; 1 << k];
        let mut records = Vec::with_capacity(end - start);
        for s in start..end {
            let mut r = base.fork(s as u64);
            let (psi, record) = run_shot(c, noise, &mut r)?;
            counts[local_key(psi.sample_index(&mut r), measured)] += 1;
            for (i, p) in psi.probabilities().into_iter().enumerate() {
                born[local_key(i, measured)] += p;
            }
            records.push(record);
        }
        Ok((counts, born, records))
    });
    let mut counts = vec![0u64; 1 << k];
    let mut borns = Vec::with_capacity(chunks.len());
    let mut records = Vec::with_capacity(shots);
    for chunk in chunks {
        let (cn, b, rec) = chunk?;
        counts.iter_mut().zip(cn).for_each(|(a, x)| *a += x);
        borns.push(b);
        records.extend(rec);
    }
    let born = par::pairwise_sum(borns).expect("at least one chunk");
    let keys: Vec<BitString> = (0..1u64 << k).map(|value| BitString { value, width: k }).collect();
    let freqs = counts.iter().map(|&n| n as f64 / shots as f64).collect();
    let empirical = OutcomeDistribution::new(keys.clone(), freqs)?;
    let born_average = OutcomeDistribution::from_weights(keys, born)?;
    Ok(TrajectoryRun {
        empirical,
        born_average,
        counts,
        records,
    })
}

/// Pearson correlation of the hit indicators of two qubits across shots.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorCorrelation {
    pub pearson: f64,
    pub ci95: (f64, f64),
    pub shots: usize,
    pub rate_i: f64,
    pub rate_j: f64,
}

pub fn error_correlation(records: &[PauliErrorRecord], pair: (usize, usize)) -> Result<ErrorCorrelation> {
    let n = records.len();
    if n == 0 {
        return Err(Error::UndefinedStatistic("no shots recorded".into()));
    }
    let (i, j) = pair;
    let (mut a, mut b, mut ab) = (0u64, 0u64, 0u64);
    for r in records {
        let (hi, hj) = (r.hit(i), r.hit(j));
        a += hi as u64;
        b += hj as u64;
        ab += (hi && hj) as u64;
    }
    let nf = n as f64;
    let (pa, pb) = (a as f64 / nf, b as f64 / nf);
    let var_a = pa * (1.0 - pa);
    let var_b = pb * (1.0 - pb);
    if var_a == 0.0 || var_b == 0.0 {
        return Err(Error::UndefinedStatistic(format!(
            "hit indicator of qubit {} has zero variance",
            if var_a == 0.0 { i } else { j }
        )));
    }
    let cov = ab as f64 / nf - pa * pb;
    let r = (cov / (var_a * var_b).sqrt()).clamp(-1.0, 1.0);
    Ok(ErrorCorrelation {
        pearson: r,
        ci95: fisher_interval(r, n),
        shots: n,
        rate_i: pa,
        rate_j: pb,
    })
}

/// Fluctuations of the per-shot number of distinct qubits hit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SyncStats {
    pub shots: usize,
    pub mean: f64,
    pub std: f64,
    /// Standard deviation of a binomial count over `n_qubits` with the same mean.
    pub binomial_std: f64,
    pub ratio: f64,
    /// Jackknife standard error of `ratio`.
    pub ratio_std_err: f64,
    /// `(θ, P(count ≥ θ))` for θ = 0..=n_qubits.
    pub tail: Vec<(usize, f64)>,
}

impl SyncStats {
    /// Distance of `ratio` from 1 in units of its standard error.
    pub fn excess_in_std_errors(&self) -> f64 {
        (self.ratio - 1.0) / self.ratio_std_err
    }

    pub fn ratio_ci95(&self) -> (f64, f64) {
        (self.ratio - Z95 * self.ratio_std_err, self.ratio + Z95 * self.ratio_std_err)
    }
}

fn std_ratio(s1: f64, s2: f64, n: f64, n_qubits: f64) -> f64 {
    let mean = s1 / n;
    let var = (s2 - n * mean * mean) / (n - 1.0);
    let p = mean / n_qubits;
    let binom = n_qubits * p * (1.0 - p);
    if binom <= 0.0 {
        return f64::NAN;
    }
    (var.max(0.0) / binom).sqrt()
}

pub fn error_synchronization_stats(records: &[PauliErrorRecord], n_qubits: usize) -> Result<SyncStats> {
    let n = records.len();
    if n == 0 {
        return Err(Error::UndefinedStatistic("no shots recorded".into()));
    }
    if n_qubits == 0 {
        return Err(Error::Precondition("n_qubits must be at least 1".into()));
    }
    let counts: Vec<usize> = records.iter().map(PauliErrorRecord::distinct_hits).collect();
    if let Some(&c) = counts.iter().find(|&&c| c > n_qubits) {
        return Err(Error::Dimension(format!("{c} qubits hit in a {n_qubits}-qubit register")));
    }
    let nf = n as f64;
    let nq = n_qubits as f64;
    let s1: f64 = counts.iter().map(|&c| c as f64).sum();
    let s2: f64 = counts.iter().map(|&c| (c * c) as f64).sum();
    let mean = s1 / nf;
    let std = if n > 1 { ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0).sqrt() } else { 0.0 };
    let p = mean / nq;
    let binomial_std = (nq * p * (1.0 - p)).sqrt();
    let ratio = if n > 1 { std_ratio(s1, s2, nf, nq) } else { f64::NAN };

    // delete-one jackknife; shots with equal counts give equal replicates
    let mut ratio_std_err = f64::NAN;
    if n > 2 && ratio.is_finite() {
        let mut hist = vec![0usize; n_qubits + 1];
        for &c in &counts {
            hist[c] += 1;
        }
        let reps: Vec<(f64, f64)> = hist
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(c, &m)| {
                let c = c as f64;
                (std_ratio(s1 - c, s2 - c * c, nf - 1.0, nq), m as f64)
            })
            .collect();
        if reps.iter().all(|(r, _)| r.is_finite()) {
            let jmean = reps.iter().map(|(r, m)| r * m).sum::<f64>() / nf;
            let ss = reps.iter().map(|(r, m)| m * (r - jmean).powi(2)).sum::<f64>();
            ratio_std_err = ((nf - 1.0) / nf * ss).sqrt();
        }
    }

    let tail = (0..=n_qubits)
        .map(|theta| (theta, counts.iter().filter(|&&c| c >= theta).count() as f64 / nf))
        .collect();
    Ok(SyncStats {
        shots: n,
        mean,
        std,
        binomial_std,
        ratio,
        ratio_std_err,
        tail,
    })
}

/// Exact marginal of a pure state on `measured`.
pub fn state_distribution(psi: &StateVector, measured: &[usize]) -> Result<OutcomeDistribution<BitString>> {
    marginal_distribution(&psi.probabilities(), measured)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nisqsim::circuit::{cat_circuit, random_circuit, Gate, GateKind};
    use crate::nisqsim::density::{run_circuit_density, DensityMatrix};

    #[test]
    fn noiseless_runs_have_no_events() {
        let c = cat_circuit();
        let run = run_circuit_trajectories(&c, &NoiseModel::noiseless(), 4000, &mut RandomSource::new(1)).unwrap();
        assert!(run.records.iter().all(|r| r.events.is_empty()));
        let (_, exact) = run_circuit_density(&c, &NoiseModel::noiseless()).unwrap();
        // multinomial 3σ band per outcome
        for (p, q) in run.empirical.probs().iter().zip(exact.probs()) {
            let sigma = (q * (1.0 - q) / 4000.0).sqrt();
            assert!((p - q).abs() <= 3.0 * sigma + 1e-15, "{p} vs {q}");
        }
        for (p, q) in run.born_average.probs().iter().zip(exact.probs()) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn random_replacement_averages_to_depolarizing() {
        // Monte Carlo average of the replaced state's density matrix
        let mut rng = RandomSource::new(9);
        let shots = 20_000;
        let mut base = StateVector::zero_state(2).unwrap();
        base.apply_gate(&Gate::new(GateKind::H, &[0]).unwrap()).unwrap();
        base.apply_gate(&Gate::new(GateKind::Cnot, &[0, 1]).unwrap()).unwrap();
        let mut acc = vec![num_complex::Complex64::new(0.0, 0.0); 16];
        for _ in 0..shots {
            let mut psi = base.clone();
            replace_with_random_state(&mut psi, &[1], &mut rng).unwrap();
            let rho = DensityMatrix::from_pure(&psi).unwrap();
            for r in 0..4 {
                for c in 0..4 {
                    acc[r * 4 + c] += rho.entry(r, c) / shots as f64;
                }
            }
        }
        let mut expect = DensityMatrix::from_pure(&base).unwrap();
        expect.apply_depolarizing(&[1], 1.0).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                assert!((acc[r * 4 + c] - expect.entry(r, c)).norm() < 0.02);
            }
        }
    }

    #[test]
    fn cat_gate_noise_matches_density() {
        let c = cat_circuit();
        let nm = NoiseModel::new(0.0, 0.1).unwrap();
        let run = run_circuit_trajectories(&c, &nm, 20_000, &mut RandomSource::new(2)).unwrap();
        let (_, exact) = run_circuit_density(&c, &nm).unwrap();
        assert!(run.empirical.tvd(&exact).unwrap() < 0.02);
        assert!(run.born_average.tvd(&exact).unwrap() < 0.01);
        let fired = run.records.iter().filter(|r| !r.events.is_empty()).count() as f64 / 20_000.0;
        // cycle 1 only has the CNOT
        assert!((fired - (1.0 - 0.9f64.powi(2))).abs() < 0.01);
    }

    #[test]
    fn deterministic_and_mode_independent() {
        let c = random_circuit(4, 3, &mut RandomSource::new(3)).unwrap();
        let nm = NoiseModel::new(0.05, 0.05).unwrap();
        let a = run_circuit_trajectories(&c, &nm, 600, &mut RandomSource::new(4)).unwrap();
        let b = run_circuit_trajectories(&c, &nm, 600, &mut RandomSource::new(4)).unwrap();
        assert_eq!(a.counts, b.counts);
        assert_eq!(a.records, b.records);
        assert_eq!(a.born_average.probs(), b.born_average.probs());
    }

    fn record(events: &[&[usize]]) -> PauliErrorRecord {
        PauliErrorRecord {
            events: events
                .iter()
                .map(|q| ErrorEvent {
                    cycle: 0,
                    qubits: q.to_vec(),
                    kind: if q.len() == 2 { ErrorKind::Gate } else { ErrorKind::Qubit },
                })
                .collect(),
        }
    }

    #[test]
    fn correlation_edge_cases() {
        let clean = vec![PauliErrorRecord::default(); 10];
        assert!(matches!(error_correlation(&clean, (0, 1)), Err(Error::UndefinedStatistic(_))));
        assert!(matches!(error_correlation(&[], (0, 1)), Err(Error::UndefinedStatistic(_))));
        let mut recs = vec![record(&[&[0, 1]]); 5];
        recs.extend(vec![PauliErrorRecord::default(); 7]);
        let e = error_correlation(&recs, (0, 1)).unwrap();
        assert!((e.pearson - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sync_stats_small_case() {
        let recs = vec![record(&[]), record(&[&[0], &[0]]), record(&[&[0, 1]]), record(&[&[2], &[0, 1]])];
        let s = error_synchronization_stats(&recs, 3).unwrap();
        assert_eq!(s.mean, 1.5);
        assert_eq!(s.tail[0], (0, 1.0));
        assert_eq!(s.tail[2], (2, 0.5));
        assert_eq!(s.tail[3], (3, 0.25));
        let zero = error_synchronization_stats(&vec![PauliErrorRecord::default(); 5], 4).unwrap();
        assert_eq!(zero.mean, 0.0);
        assert_eq!(zero.tail[1], (1, 0.0));
    }

    #[test]
    fn jackknife_matches_brute_force() {
        let recs: Vec<_> = [0usize, 1, 1, 2, 0, 3, 1, 0, 2, 1]
            .iter()
            .map(|&c| PauliErrorRecord {
                events: (0..c)
                    .map(|q| ErrorEvent {
                        cycle: 0,
                        qubits: vec![q],
                        kind: ErrorKind::Qubit,
                    })
                    .collect(),
            })
            .collect();
        let s = error_synchronization_stats(&recs, 4).unwrap();
        let reps: Vec<f64> = (0..recs.len())
            .map(|i| {
                let mut r = recs.clone();
                r.remove(i);
                error_synchronization_stats(&r, 4).unwrap().ratio
            })
            .collect();
        let n = reps.len() as f64;
        let m = reps.iter().sum::<f64>() / n;
        let se = ((n - 1.0) / n * reps.iter().map(|r| (r - m).powi(2)).sum::<f64>()).sqrt();
        assert!((se - s.ratio_std_err).abs() < 1e-12);
    }
}
