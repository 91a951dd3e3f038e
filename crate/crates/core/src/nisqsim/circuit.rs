use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, MatrixLiteral, RandomSource};

/// Unitarity tolerance for registered gates.
pub const UNITARITY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    T,
    /// Arbitrary unitary on one or two qubits; the matrix travels with the gate.
    U,
    Cnot,
    Cz,
}

/// A gate applied to one or two qubits.
///
/// Two-qubit matrices use the basis order `|t0 t1⟩` with the first target as
/// the most significant bit, so `CNOT` with targets `[control, target]` is
/// the textbook matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    kind: GateKind,
    targets: Vec<usize>,
    matrix: ComplexMatrix,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn fixed_matrix(kind: GateKind) -> Option<ComplexMatrix> {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let h = c(FRAC_1_SQRT_2, 0.0);
    let data = match kind {
        GateKind::H => vec![h, h, h, -h],
        GateKind::X => vec![z, o, o, z],
        GateKind::Y => vec![z, c(0.0, -1.0), c(0.0, 1.0), z],
        GateKind::Z => vec![o, z, z, -o],
        GateKind::S => vec![o, z, z, c(0.0, 1.0)],
        GateKind::T => vec![o, z, z, c(FRAC_1_SQRT_2, FRAC_1_SQRT_2)],
        GateKind::Cnot => vec![o, z, z, z, z, o, z, z, z, z, z, o, z, z, o, z],
        GateKind::Cz => vec![o, z, z, z, z, o, z, z, z, z, o, z, z, z, z, -o],
        GateKind::U => return None,
    };
    let d = if data.len() == 4 { 2 } else { 4 };
    Some(ComplexMatrix::new(d, d, data).expect("fixed gate shape"))
}

fn unitarity_error(m: &ComplexMatrix) -> f64 {
    let prod = m.matmul(&m.adjoint()).expect("square");
    prod.max_abs_diff(&ComplexMatrix::identity(m.rows())).expect("same shape")
}

impl Gate {
    /// A gate from the fixed set.
    pub fn new(kind: GateKind, targets: &[usize]) -> Result<Self> {
        let matrix = fixed_matrix(kind)
            .ok_or_else(|| Error::Precondition("gate U needs an explicit matrix; use Gate::unitary".into()))?;
        Self::build(kind, targets.to_vec(), matrix)
    }

    /// Arbitrary one- or two-qubit unitary.
    pub fn unitary(targets: &[usize], matrix: ComplexMatrix) -> Result<Self> {
        Self::build(GateKind::U, targets.to_vec(), matrix)
    }

    fn build(kind: GateKind, targets: Vec<usize>, matrix: ComplexMatrix) -> Result<Self> {
        if targets.is_empty() || targets.len() > 2 {
            return Err(Error::Dimension(format!("gates act on 1 or 2 qubits, got {}", targets.len())));
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(Error::Dimension(format!("repeated target qubit {}", targets[0])));
        }
        let d = 1 << targets.len();
        if matrix.rows() != d || matrix.cols() != d {
            return Err(Error::Dimension(format!(
                "{}x{} matrix for a {}-qubit gate",
                matrix.rows(),
                matrix.cols(),
                targets.len()
            )));
        }
        let err = unitarity_error(&matrix);
        if err > UNITARITY_TOLERANCE {
            return Err(Error::Precondition(format!("gate matrix is not unitary (error {err:.3e})")));
        }
        Ok(Self { kind, targets, matrix })
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Targets in the kernel's local-bit order (local bit 0 first).
    pub(crate) fn local_positions(&self) -> Vec<usize> {
        self.targets.iter().rev().copied().collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateJson {
    gate: GateKind,
    targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<MatrixLiteral>,
}

impl Serialize for Gate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GateJson {
            gate: self.kind,
            targets: self.targets.clone(),
            matrix: (self.kind == GateKind::U).then(|| MatrixLiteral::from(&self.matrix)),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Gate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let g = GateJson::deserialize(d)?;
        match (g.gate, g.matrix) {
            (GateKind::U, Some(lit)) => {
                let m = ComplexMatrix::try_from(lit).map_err(D::Error::custom)?;
                Gate::unitary(&g.targets, m).map_err(D::Error::custom)
            }
            (GateKind::U, None) => Err(D::Error::custom("gate U requires a matrix")),
            (kind, None) => Gate::new(kind, &g.targets).map_err(D::Error::custom),
            (_, Some(_)) => Err(D::Error::custom("only gate U takes a matrix")),
        }
    }
}

/// Gates grouped into cycles of non-overlapping gates, plus the measured
/// qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitJson", into = "CircuitJson")]
pub struct Circuit {
    n_qubits: usize,
    cycles: Vec<Vec<Gate>>,
    measured: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitJson {
    n_qubits: usize,
    cycles: Vec<Vec<Gate>>,
    measured: Vec<usize>,
}

impl TryFrom<CircuitJson> for Circuit {
    type Error = Error;

    fn try_from(c: CircuitJson) -> Result<Self> {
        Circuit::new(c.n_qubits, c.cycles, c.measured)
    }
}

impl From<Circuit> for CircuitJson {
    fn from(c: Circuit) -> Self {
        CircuitJson {
            n_qubits: c.n_qubits,
            cycles: c.cycles,
            measured: c.measured,
        }
    }
}

impl Circuit {
    pub fn new(n_qubits: usize, cycles: Vec<Vec<Gate>>, measured: Vec<usize>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 63 {
            return Err(Error::Dimension(format!("unsupported qubit count {n_qubits}")));
        }
        for (ci, cycle) in cycles.iter().enumerate() {
            let mut used = 0u64;
            for g in cycle {
                for &q in g.targets() {
                    if q >= n_qubits {
                        return Err(Error::Dimension(format!("cycle {ci}: qubit {q} out of range")));
                    }
                    if used >> q & 1 == 1 {
                        return Err(Error::Precondition(format!("cycle {ci}: qubit {q} used by two gates")));
                    }
                    used |= 1 << q;
                }
            }
        }
        let mut seen = 0u64;
        for &q in &measured {
            if q >= n_qubits || seen >> q & 1 == 1 {
                return Err(Error::Dimension(format!("invalid measured qubit {q}")));
            }
            seen |= 1 << q;
        }
        Ok(Self {
            n_qubits,
            cycles,
            measured,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn cycles(&self) -> &[Vec<Gate>] {
        &self.cycles
    }

    pub fn depth(&self) -> usize {
        self.cycles.len()
    }

    pub fn measured(&self) -> &[usize] {
        &self.measured
    }

    pub fn gate_count(&self) -> usize {
        self.cycles.iter().map(Vec::len).sum()
    }
}

/// `(|00⟩ + |11⟩)/√2` preparation: H on qubit 0, then CNOT 0→1; both measured.
pub fn cat_circuit() -> Circuit {
    Circuit::new(
        2,
        vec![
            vec![Gate::new(GateKind::H, &[0]).expect("valid")],
            vec![Gate::new(GateKind::Cnot, &[0, 1]).expect("valid")],
        ],
        vec![0, 1],
    )
    .expect("valid circuit")
}

/// Brickwork random circuit: `depth` repetitions of a cycle of Haar-random
/// single-qubit gates on every qubit followed by a cycle of CZ gates on
/// pairs `(i, i+1)` starting at `i = layer mod 2`. All qubits are measured.
pub fn random_circuit(n: usize, depth: usize, rng: &mut RandomSource) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::Precondition(format!("random circuits need at least 2 qubits, got {n}")));
    }
    let mut cycles = Vec::with_capacity(2 * depth);
    for layer in 0..depth {
        let singles = (0..n)
            .map(|q| Gate::unitary(&[q], crate::matcore::haar_unitary(2, rng)?))
            .collect::<Result<Vec<_>>>()?;
        cycles.push(singles);
        let pairs = (layer % 2..n - 1)
            .step_by(2)
            .map(|i| Gate::new(GateKind::Cz, &[i, i + 1]))
            .collect::<Result<Vec<_>>>()?;
        cycles.push(pairs);
    }
    Circuit::new(n, cycles, (0..n).collect())
}

/// Depolarizing noise: every qubit is hit with probability `t_qubit` in each
/// cycle and every gate with probability `t_gate` after it acts. `jitter` is
/// the relative spread used by the chaos probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub t_qubit: f64,
    pub t_gate: f64,
    #[serde(default)]
    pub jitter: Option<f64>,
}

impl NoiseModel {
    pub fn new(t_qubit: f64, t_gate: f64) -> Result<Self> {
        let nm = Self {
            t_qubit,
            t_gate,
            jitter: None,
        };
        nm.validate()?;
        Ok(nm)
    }

    pub fn noiseless() -> Self {
        Self {
            t_qubit: 0.0,
            t_gate: 0.0,
            jitter: None,
        }
    }

    pub fn with_jitter(mut self, r: f64) -> Result<Self> {
        self.jitter = Some(r);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("t_qubit", self.t_qubit), ("t_gate", self.t_gate)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Precondition(format!("{name} = {t} outside [0, 1]")));
            }
        }
        if let Some(r) = self.jitter {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::Precondition(format!("jitter {r} must be a non-negative number")));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, c: &Circuit) -> ResolvedNoise {
        ResolvedNoise {
            qubit: vec![self.t_qubit; c.n_qubits()],
            gate: c.cycles().iter().map(|cy| vec![self.t_gate; cy.len()]).collect(),
        }
    }

    /// Rates multiplied site by site by independent mean-one lognormal
    /// factors `exp(r·Z − r²/2)`, clamped to 1.
    pub fn jittered(&self, c: &Circuit, rng: &mut RandomSource) -> Result<ResolvedNoise> {
        let r = self
            .jitter
            .ok_or_else(|| Error::Precondition("noise model has no jitter".into()))?;
        let mut factor = |t: f64| (t * (r * rng.normal() - 0.5 * r * r).exp()).min(1.0);
        let qubit = (0..c.n_qubits()).map(|_| factor(self.t_qubit)).collect();
        let gate = c
            .cycles()
            .iter()
            .map(|cy| cy.iter().map(|_| factor(self.t_gate)).collect())
            .collect();
        Ok(ResolvedNoise { qubit, gate })
    }
}

/// Site-resolved rates: one per qubit (applied every cycle) and one per gate.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedNoise {
    pub qubit: Vec<f64>,
    pub gate: Vec<Vec<f64>>,
}

impl ResolvedNoise {
    pub fn is_noiseless(&self) -> bool {
        self.qubit.iter().all(|&t| t == 0.0) && self.gate.iter().flatten().all(|&t| t == 0.0)
    }
}
