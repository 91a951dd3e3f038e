//! Fourier analysis of Boolean functions on `{−1, +1}ⁿ`.
//!
//! Conventions: TRUE is `+1` and FALSE is `−1`, for inputs and outputs alike.
//! A truth table is indexed by `idx ∈ 0..2ⁿ` whose bit `i` holds variable
//! `x_{i+1}` as a `{0,1}` bit, so `x_{i+1} = 2·bit − 1`. Subsets `S ⊆ [n]` are
//! bitmasks in the same bit order, and the characters are
//! `χ_S(x) = Π_{i∈S} x_i`.

mod io;

pub use io::{read_spectrum_csv, write_spectrum_csv};

use serde::{Deserialize, Serialize};

use crate::error::{size_cap, Error, Result};
use crate::matcore::RandomSource;
use crate::par;

/// Largest number of variables with a dense truth table.
pub const MAX_VARS: usize = 24;
/// Tolerance used when deciding whether a table is `±1`-valued.
const BOOLEAN_TOLERANCE: f64 = 1e-12;
// Butterfly stages on tables at least this long run in parallel.
const PARALLEL_MIN_LEN: usize = 1 << 14;

/// A real function on `{−1,+1}ⁿ` given by its truth table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TruthTable", into = "TruthTable")]
pub struct BooleanFunction {
    n: usize,
    table: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TruthTable {
    n: usize,
    table: Vec<f64>,
}

impl TryFrom<TruthTable> for BooleanFunction {
    type Error = Error;

    fn try_from(t: TruthTable) -> Result<Self> {
        BooleanFunction::new(t.n, t.table)
    }
}

impl From<BooleanFunction> for TruthTable {
    fn from(f: BooleanFunction) -> Self {
        TruthTable { n: f.n, table: f.table }
    }
}

fn check_vars(n: usize) -> Result<()> {
    if n > MAX_VARS {
        return Err(size_cap("number of Boolean variables", n as u64, MAX_VARS as u64));
    }
    Ok(())
}

impl BooleanFunction {
    pub fn new(n: usize, table: Vec<f64>) -> Result<Self> {
        check_vars(n)?;
        if table.len() != 1 << n {
            return Err(Error::Dimension(format!(
                "truth table of {} entries for {n} variables (expected {})",
                table.len(),
                1usize << n
            )));
        }
        Ok(Self { n, table })
    }

    /// Tabulates `f` on `±1` input vectors.
    pub fn from_fn(n: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        check_vars(n)?;
        let mut x = vec![0.0; n];
        let table = (0..1usize << n)
            .map(|idx| {
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi = if idx >> i & 1 == 1 { 1.0 } else { -1.0 };
                }
                f(&x)
            })
            .collect();
        Ok(Self { n, table })
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// True when every entry is `±1`.
    pub fn is_boolean(&self) -> bool {
        self.table
            .iter()
            .all(|v| (v - 1.0).abs() <= BOOLEAN_TOLERANCE || (v + 1.0).abs() <= BOOLEAN_TOLERANCE)
    }

    /// Index of a `±1` input vector.
    pub fn index_of(x: &[f64]) -> usize {
        x.iter()
            .enumerate()
            .fold(0, |acc, (i, &v)| if v > 0.0 { acc | 1 << i } else { acc })
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::Dimension(format!("{} inputs for {} variables", x.len(), self.n)));
        }
        Ok(self.table[Self::index_of(x)])
    }

    pub fn walsh_transform(&self) -> FourierSpectrum {
        walsh_transform(self)
    }
}

/// Walsh–Fourier coefficients `f̂(S) = E_x[f(x)·χ_S(x)]`, indexed by bitmask.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSpectrum {
    n: usize,
    coeffs: Vec<f64>,
}

impl FourierSpectrum {
    pub fn new(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_vars(n)?;
        if coeffs.len() != 1 << n {
            return Err(Error::Dimension(format!("{} coefficients for {n} variables", coeffs.len())));
        }
        Ok(Self { n, coeffs })
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, subset: usize) -> f64 {
        self.coeffs[subset]
    }

    /// `Σ_S f̂(S)²`
    pub fn total_mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Recovers the truth table.
    pub fn inverse(&self) -> BooleanFunction {
        let mut data: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(s, &c)| if s.count_ones() % 2 == 1 { -c } else { c })
            .collect();
        butterfly(&mut data);
        BooleanFunction { n: self.n, table: data }
    }
}

/// Unnormalised in-place Walsh–Hadamard butterfly:
/// `out[S] = Σ_idx in[idx]·(−1)^{|S ∧ idx|}`.
fn butterfly(data: &mut [f64]) {
    let len = data.len();
    let mut h = 1;
    while h < len {
        stage(data, h);
        h *= 2;
    }
}

fn stage_block(block: &mut [f64], h: usize) {
    let (lo, hi) = block.split_at_mut(h);
    for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = x + y;
        *b = x - y;
    }
}

#[cfg(feature = "parallel")]
fn stage(data: &mut [f64], h: usize) {
    use rayon::prelude::*;
    if data.len() < PARALLEL_MIN_LEN || par::mode() == par::Mode::Sequential {
        data.chunks_mut(2 * h).for_each(|b| stage_block(b, h));
    } else if data.len() / (2 * h) >= 64 {
        data.par_chunks_mut(2 * h).for_each(|b| stage_block(b, h));
    } else {
        for block in data.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            lo.par_iter_mut().zip(hi.par_iter_mut()).with_min_len(4096).for_each(|(a, b)| {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            });
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn stage(data: &mut [f64], h: usize) {
    let _ = PARALLEL_MIN_LEN;
    data.chunks_mut(2 * h).for_each(|b| stage_block(b, h));
}

/// Fast Walsh–Fourier transform in `O(n·2ⁿ)`.
pub fn walsh_transform(f: &BooleanFunction) -> FourierSpectrum {
    let mut data = f.table.clone();
    butterfly(&mut data);
    let scale = 1.0 / data.len() as f64;
    for (s, c) in data.iter_mut().enumerate() {
        *c *= if s.count_ones() % 2 == 1 { -scale } else { scale };
    }
    FourierSpectrum { n: f.n, coeffs: data }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::Precondition(format!("correlation rho = {rho} outside [-1, 1]")));
    }
    Ok(())
}

/// Correlation `ρ = 1 − 2ε` of a per-bit flip probability `ε`.
pub fn rho_from_flip_probability(eps: f64) -> f64 {
    1.0 - 2.0 * eps
}

/// Per-bit flip probability `ε = (1 − ρ)/2`.
pub fn flip_probability_from_rho(rho: f64) -> f64 {
    (1.0 - rho) / 2.0
}

/// The noise operator `T_ρ`: multiplies `f̂(S)` by `ρ^{|S|}`.
pub fn noise_operator(spec: &FourierSpectrum, rho: f64) -> Result<FourierSpectrum> {
    check_rho(rho)?;
    let powers: Vec<f64> = (0..=spec.n as i32).map(|k| rho.powi(k)).collect();
    let coeffs = spec
        .coeffs
        .iter()
        .enumerate()
        .map(|(s, c)| c * powers[s.count_ones() as usize])
        .collect();
    Ok(FourierSpectrum { n: spec.n, coeffs })
}

/// `Stab_ρ(f) = Σ_S ρ^{|S|} f̂(S)²`.
pub fn noise_stability(f: &BooleanFunction, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    if !f.is_boolean() {
        return Err(Error::Precondition("noise stability needs a ±1-valued function".into()));
    }
    let spec = walsh_transform(f);
    let profile = degree_profile(&spec);
    Ok(profile
        .masses
        .iter()
        .enumerate()
        .map(|(k, m)| rho.powi(k as i32) * m)
        .sum())
}

/// Monte Carlo `E[f(x)f(y)]` with `x` uniform and `y` obtained by flipping
/// each bit of `x` independently with probability `(1−ρ)/2`. Returns the
/// estimate and its standard error.
pub fn empirical_stability(f: &BooleanFunction, rho: f64, shots: usize, rng: &mut RandomSource) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Precondition(format!("rho = {rho} outside [0, 1]")));
    }
    if shots == 0 {
        return Err(Error::Precondition("need at least one shot".into()));
    }
    let eps = flip_probability_from_rho(rho);
    let n = f.n;
    let mask = if n == 0 { 0 } else { u64::MAX >> (64 - n) };
    let base = RandomSource::new(rand::RngCore::next_u64(rng));
    let parts = par::map_chunks(shots, 1 << 14, |start, end| {
        let mut r = base.fork(start as u64);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in start..end {
            let x = rand::RngCore::next_u64(&mut r) & mask;
            let mut y = x;
            for i in 0..n {
                if r.bernoulli(eps) {
                    y ^= 1 << i;
                }
            }
            let v = f.table[x as usize] * f.table[y as usize];
            sum += v;
            sum_sq += v * v;
        }
        vec![sum, sum_sq]
    });
    let tot = par::pairwise_sum(parts).expect("at least one chunk");
    let nf = shots as f64;
    let mean = tot[0] / nf;
    let se = if shots > 1 {
        (((tot[1] - nf * mean * mean) / (nf - 1.0)).max(0.0) / nf).sqrt()
    } else {
        f64::INFINITY
    };
    Ok((mean, se))
}

/// Keeps the coefficients of degree at most `d`. Returns the truncated
/// (real-valued) function and the discarded mass `Σ_{|S|>d} f̂(S)²`, which
/// equals the squared L² distance between `f` and the truncation.
pub fn low_degree_truncate(spec: &FourierSpectrum, d: usize) -> Result<(BooleanFunction, f64)> {
    if d > spec.n {
        return Err(Error::Precondition(format!("degree {d} exceeds {} variables", spec.n)));
    }
    let mut tail = 0.0;
    let coeffs = spec
        .coeffs
        .iter()
        .enumerate()
        .map(|(s, &c)| {
            if s.count_ones() as usize > d {
                tail += c * c;
                0.0
            } else {
                c
            }
        })
        .collect();
    Ok((FourierSpectrum { n: spec.n, coeffs }.inverse(), tail))
}

/// Squared Fourier mass per degree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeProfile {
    pub masses: Vec<f64>,
}

impl DegreeProfile {
    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Mass strictly above degree `d`.
    pub fn mass_above(&self, d: usize) -> f64 {
        self.masses.iter().skip(d + 1).sum()
    }
}

pub fn degree_profile(spec: &FourierSpectrum) -> DegreeProfile {
    let mut masses = vec![0.0; spec.n + 1];
    for (s, c) in spec.coeffs.iter().enumerate() {
        masses[s.count_ones() as usize] += c * c;
    }
    DegreeProfile { masses }
}

fn from_bool_fn(n: usize, f: impl Fn(usize) -> bool) -> Result<BooleanFunction> {
    check_vars(n)?;
    let table = (0..1usize << n).map(|idx| if f(idx) { 1.0 } else { -1.0 }).collect();
    Ok(BooleanFunction { n, table })
}

/// TRUE when more than half of the `n` (odd) inputs are TRUE.
pub fn make_majority(n: usize) -> Result<BooleanFunction> {
    if n % 2 == 0 {
        return Err(Error::Precondition(format!("majority needs an odd number of inputs, got {n}")));
    }
    from_bool_fn(n, |idx| 2 * idx.count_ones() as usize > n)
}

/// `χ_[n](x) = Π_i x_i`.
pub fn make_parity(n: usize) -> Result<BooleanFunction> {
    from_bool_fn(n, |idx| (n - idx.count_ones() as usize) % 2 == 0)
}

/// `f(x) = x_{i+1}` (zero-based variable index `i`).
pub fn make_dictator(n: usize, i: usize) -> Result<BooleanFunction> {
    if i >= n {
        return Err(Error::Dimension(format!("variable {i} out of range for {n} inputs")));
    }
    from_bool_fn(n, |idx| idx >> i & 1 == 1)
}

/// OR of `s` ANDs over consecutive disjoint blocks of `w` variables.
pub fn make_tribes(w: usize, s: usize) -> Result<BooleanFunction> {
    let n = w * s;
    if n > MAX_VARS {
        return Err(size_cap("tribes width × count", n as u64, MAX_VARS as u64));
    }
    let block = if w == 0 { 0 } else { (1usize << w) - 1 };
    from_bool_fn(n, |idx| (0..s).any(|t| (idx >> (t * w)) & block == block))
}

/// Probability that majority decoding of `L` (odd) repeated bits fails
/// under independent flips with probability `p`:
/// `Σ_{k>L/2} C(L,k) p^k (1−p)^{L−k}`.
pub fn repetition_majority_logical_error(l: usize, p: f64) -> Result<f64> {
    if l % 2 == 0 {
        return Err(Error::Precondition(format!("repetition length must be odd, got {l}")));
    }
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::Precondition(format!("flip probability {p} outside [0, 1/2]")));
    }
    let mut total = 0.0;
    let mut binom = 1.0f64;
    for k in 0..=l {
        if k > 0 {
            binom = binom * (l - k + 1) as f64 / k as f64;
        }
        if 2 * k > l {
            total += binom * p.powi(k as i32) * (1.0 - p).powi((l - k) as i32);
        }
    }
    Ok(total)
}

/// Monte Carlo estimate (with standard error) of majority-decoding failure.
pub fn repetition_majority_monte_carlo(l: usize, p: f64, shots: usize, rng: &mut RandomSource) -> Result<(f64, f64)> {
    repetition_majority_logical_error(l, p)?;
    if shots == 0 {
        return Err(Error::Precondition("need at least one shot".into()));
    }
    let base = RandomSource::new(rand::RngCore::next_u64(rng));
    let fails: u64 = par::map_chunks(shots, 1 << 14, |start, end| {
        let mut r = base.fork(start as u64);
        (start..end)
            .filter(|_| {
                let flips = (0..l).filter(|_| r.bernoulli(p)).count();
                2 * flips > l
            })
            .count() as u64
    })
    .into_iter()
    .sum();
    let est = fails as f64 / shots as f64;
    Ok((est, (est * (1.0 - est) / shots as f64).sqrt()))
}
