use num_complex::Complex64;

use super::circuit::{Circuit, Gate, NoiseModel, ResolvedNoise};
use super::kernel::{apply_matrix, for_each_group};
use super::statevector::StateVector;
use crate::distribution::{BitString, OutcomeDistribution};
use crate::error::{size_cap, Error, Result};

/// Largest register simulated with a dense density matrix.
pub const MAX_DENSITY_QUBITS: usize = 10;

/// Density matrix of `n` qubits, `2ⁿ × 2ⁿ`, row-major. Qubit `q` is bit `q`
/// of a basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// `|0…0⟩⟨0…0|`
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_DENSITY_QUBITS {
            return Err(size_cap("density-matrix qubits", n_qubits as u64, MAX_DENSITY_QUBITS as u64));
        }
        let dim = 1usize << n_qubits;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        data[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, data })
    }

    /// `|ψ⟩⟨ψ|`
    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        let n = psi.n_qubits();
        if n > MAX_DENSITY_QUBITS {
            return Err(size_cap("density-matrix qubits", n as u64, MAX_DENSITY_QUBITS as u64));
        }
        let a = psi.amplitudes();
        let mut data = Vec::with_capacity(a.len() * a.len());
        for r in a {
            for c in a {
                data.push(r * c.conj());
            }
        }
        Ok(Self { n_qubits: n, data })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim() + c]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.entry(i, i)).sum()
    }

    /// Largest `|ρ_rc − conj(ρ_cr)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.entry(r, c) - self.entry(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Whether `ρ + tol·I` admits a Cholesky factorisation, i.e. every
    /// eigenvalue is at least `−tol`.
    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        let d = self.dim();
        let mut l = vec![Complex64::new(0.0, 0.0); d * d];
        for j in 0..d {
            let mut diag = self.entry(j, j).re + tol;
            for k in 0..j {
                diag -= l[j * d + k].norm_sqr();
            }
            if diag <= 0.0 {
                return false;
            }
            let ljj = diag.sqrt();
            l[j * d + j] = Complex64::new(ljj, 0.0);
            for i in j + 1..d {
                let mut s = self.entry(i, j);
                for k in 0..j {
                    s -= l[i * d + k] * l[j * d + k].conj();
                }
                l[i * d + j] = s / ljj;
            }
        }
        true
    }

    fn check_qubits(&self, qubits: &[usize]) -> Result<()> {
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(Error::Dimension(format!("qubit {q} out of range for {} qubits", self.n_qubits)));
            }
            if qubits[..i].contains(&q) {
                return Err(Error::Dimension(format!("qubit {q} listed twice")));
            }
        }
        Ok(())
    }

    /// `ρ → UρU†` on the gate's targets.
    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        self.check_qubits(g.targets())?;
        let n = self.n_qubits;
        let u = g.matrix().as_slice();
        let u_conj: Vec<Complex64> = u.iter().map(|z| z.conj()).collect();
        let local = g.local_positions();
        // row index occupies the high n bits, column index the low n bits
        let row_bits: Vec<usize> = local.iter().map(|q| q + n).collect();
        apply_matrix(&mut self.data, &row_bits, u);
        apply_matrix(&mut self.data, &local, &u_conj);
        Ok(())
    }

    /// Depolarizing channel on `qubits`:
    /// `ρ → (1−t)ρ + t · (I/2^k ⊗ Tr_qubits ρ)`.
    pub fn apply_depolarizing(&mut self, qubits: &[usize], t: f64) -> Result<()> {
        self.check_qubits(qubits)?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Precondition(format!("depolarizing rate {t} outside [0, 1]")));
        }
        if t == 0.0 || qubits.is_empty() {
            return Ok(());
        }
        let n = self.n_qubits;
        let k = qubits.len();
        let d = 1usize << k;
        let mut positions: Vec<usize> = qubits.to_vec();
        positions.extend(qubits.iter().map(|q| q + n));
        let keep = 1.0 - t;
        let mix = t / d as f64;
        for_each_group(&mut self.data, &positions, |buf| {
            // local index = column part | row part << k
            let trace: Complex64 = (0..d).map(|a| buf[a | a << k]).sum();
            for (i, v) in buf.iter_mut().enumerate() {
                *v *= keep;
                if i & (d - 1) == i >> k {
                    *v += trace * mix;
                }
            }
        });
        Ok(())
    }

    /// Computational-basis probabilities of `measured` (bit `j` of an outcome
    /// is qubit `measured[j]`), over all `2^k` outcomes in index order.
    pub fn measurement_distribution(&self, measured: &[usize]) -> Result<OutcomeDistribution<BitString>> {
        self.check_qubits(measured)?;
        let diag: Vec<f64> = (0..self.dim()).map(|i| self.entry(i, i).re).collect();
        marginal_distribution(&diag, measured)
    }
}

pub(crate) fn marginal_distribution(full: &[f64], measured: &[usize]) -> Result<OutcomeDistribution<BitString>> {
    let k = measured.len();
    let mut probs = vec![0.0; 1 << k];
    for (i, p) in full.iter().enumerate() {
        let key = measured
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, &q)| acc | ((i >> q) & 1) << j);
        probs[key] += p;
    }
    let keys = (0..1u64 << k).map(|value| BitString { value, width: k }).collect();
    OutcomeDistribution::new(keys, probs)
}

/// Runs `c` under site-resolved noise. Per cycle each gate acts and is
/// followed by depolarizing on its targets at that gate's rate; then every
/// qubit is depolarized at its own rate.
pub fn run_circuit_density_resolved(c: &Circuit, noise: &ResolvedNoise) -> Result<(DensityMatrix, OutcomeDistribution<BitString>)> {
    let mut rho = DensityMatrix::zero_state(c.n_qubits())?;
    for (cycle, rates) in c.cycles().iter().zip(&noise.gate) {
        for (g, &t) in cycle.iter().zip(rates) {
            rho.apply_gate(g)?;
            rho.apply_depolarizing(g.targets(), t)?;
        }
        for (q, &t) in noise.qubit.iter().enumerate() {
            rho.apply_depolarizing(&[q], t)?;
        }
    }
    let out = rho.measurement_distribution(c.measured())?;
    Ok((rho, out))
}

pub fn run_circuit_density(c: &Circuit, nm: &NoiseModel) -> Result<(DensityMatrix, OutcomeDistribution<BitString>)> {
    nm.validate()?;
    run_circuit_density_resolved(c, &nm.resolve(c))
}
