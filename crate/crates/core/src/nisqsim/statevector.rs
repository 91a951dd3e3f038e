use num_complex::Complex64;

use super::circuit::Gate;
use super::kernel::{apply_matrix, for_each_group};
use crate::error::{size_cap, Error, Result};
use crate::matcore::RandomSource;

/// Largest register simulated as a pure state.
pub const MAX_STATE_QUBITS: usize = 20;

/// Pure state of `n` qubits; qubit `q` is bit `q` of an amplitude index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_STATE_QUBITS {
            return Err(size_cap("state-vector qubits", n_qubits as u64, MAX_STATE_QUBITS as u64));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
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

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        self.check_qubits(g.targets())?;
        apply_matrix(&mut self.amps, &g.local_positions(), g.matrix().as_slice());
        Ok(())
    }

    /// Applies a `2^k × 2^k` unitary in the `|q0 q1 …⟩` basis order
    /// (first qubit most significant), as for gates.
    pub fn apply_unitary(&mut self, qubits: &[usize], u: &[Complex64]) -> Result<()> {
        self.check_qubits(qubits)?;
        let d = 1usize << qubits.len();
        if u.len() != d * d {
            return Err(Error::Dimension(format!("{} matrix entries for {} qubits", u.len(), qubits.len())));
        }
        let local: Vec<usize> = qubits.iter().rev().copied().collect();
        apply_matrix(&mut self.amps, &local, u);
        Ok(())
    }

    /// Measures `qubits` in the computational basis, collapses and
    /// renormalises. Bit `j` of the result is the outcome of `qubits[j]`.
    pub fn measure(&mut self, qubits: &[usize], rng: &mut RandomSource) -> Result<u64> {
        self.check_qubits(qubits)?;
        let k = qubits.len();
        let mut probs = vec![0.0; 1 << k];
        for (i, a) in self.amps.iter().enumerate() {
            probs[local_key(i, qubits)] += a.norm_sqr();
        }
        let total: f64 = probs.iter().sum();
        let mut u = rng.uniform() * total;
        let mut pick = probs.len() - 1;
        for (o, &p) in probs.iter().enumerate() {
            if u < p {
                pick = o;
                break;
            }
            u -= p;
        }
        // guard against landing on an exact zero through rounding
        if probs[pick] == 0.0 {
            pick = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        }
        let scale = 1.0 / probs[pick].sqrt();
        let mask: Vec<usize> = qubits.iter().rev().copied().collect();
        let want: usize = (0..k).map(|j| ((pick >> j) & 1) << (k - 1 - j)).sum();
        for_each_group(&mut self.amps, &mask, |buf| {
            for (i, v) in buf.iter_mut().enumerate() {
                *v = if i == want { *v * scale } else { Complex64::new(0.0, 0.0) };
            }
        });
        Ok(pick as u64)
    }

    /// Draws a full basis index from `|ψ|²` without collapsing.
    pub fn sample_index(&self, rng: &mut RandomSource) -> usize {
        let mut u = rng.uniform() * self.norm_sqr();
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if u < p {
                return i;
            }
            u -= p;
        }
        self.amps.iter().rposition(|a| a.norm_sqr() > 0.0).unwrap_or(0)
    }
}

/// Outcome key of basis index `i` restricted to `qubits`.
pub(crate) fn local_key(i: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .fold(0usize, |acc, (j, &q)| acc | ((i >> q) & 1) << j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nisqsim::circuit::GateKind;

    #[test]
    fn bell_state_measurement_collapses_both() {
        let mut rng = RandomSource::new(5);
        let mut counts = [0usize; 4];
        for _ in 0..2000 {
            let mut psi = StateVector::zero_state(2).unwrap();
            psi.apply_gate(&Gate::new(GateKind::H, &[0]).unwrap()).unwrap();
            psi.apply_gate(&Gate::new(GateKind::Cnot, &[0, 1]).unwrap()).unwrap();
            let a = psi.measure(&[0], &mut rng).unwrap();
            let b = psi.measure(&[1], &mut rng).unwrap();
            assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
            counts[(a | b << 1) as usize] += 1;
        }
        assert_eq!(counts[1] + counts[2], 0);
        assert!(counts[0] > 900 && counts[3] > 900);
    }

    #[test]
    fn measure_multiple_bit_order() {
        let mut psi = StateVector::zero_state(3).unwrap();
        psi.apply_gate(&Gate::new(GateKind::X, &[2]).unwrap()).unwrap();
        let out = psi.measure(&[2, 0], &mut RandomSource::new(0)).unwrap();
        assert_eq!(out, 0b01);
        assert_eq!(psi.amplitudes()[4], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn apply_unitary_matches_gate() {
        let g = Gate::new(GateKind::Cnot, &[2, 0]).unwrap();
        let mut a = StateVector::zero_state(3).unwrap();
        a.apply_gate(&Gate::new(GateKind::H, &[2]).unwrap()).unwrap();
        let mut b = a.clone();
        a.apply_gate(&g).unwrap();
        b.apply_unitary(&[2, 0], g.matrix().as_slice()).unwrap();
        assert_eq!(a, b);
        assert!((a.amplitudes()[0b101].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn caps() {
        assert!(StateVector::zero_state(21).is_err());
        let mut psi = StateVector::zero_state(2).unwrap();
        assert!(psi.apply_gate(&Gate::new(GateKind::X, &[2]).unwrap()).is_err());
    }
}
