//! Exact boson- and fermion-sampling output distributions.
//!
//! For an `n×m` matrix `X` with orthonormal rows, `n` bosons in `m` modes
//! land in occupation pattern `S` with probability `|Per(X_S)|² / Π_j S_j!`,
//! where `X_S` repeats column `j` of `X` `S_j` times. Fermions occupy
//! `n`-subsets with probability `|det(X_S)|²`.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::distribution::{ModeSubset, OccupationVector, OutcomeDistribution, OutcomeKey, NORMALIZATION_TOLERANCE};
use crate::error::{size_cap, Error, Result};
use crate::matcore::{determinant, permanent_ryser, ComplexMatrix, RandomSource};
use crate::par;

/// Largest outcome space that will be enumerated.
pub const MAX_OUTCOMES: u128 = 1_000_000;
/// Row-orthonormality tolerance demanded at the API boundary.
pub const ORTHONORMALITY_TOLERANCE: f64 = 1e-8;

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

/// Number of occupation patterns of `n` bosons in `m` modes, `C(n+m−1, n)`.
pub fn boson_outcome_count(n: usize, m: usize) -> u128 {
    if m == 0 {
        return u128::from(n == 0);
    }
    binomial((n + m - 1) as u64, n as u64)
}

/// All occupation patterns of `n` bosons in `m` modes, in lexicographic
/// order from the most bunched in mode 0 down: `(n,0,…), (n−1,1,…), …`.
pub fn enumerate_boson_outcomes(n: usize, m: usize) -> Result<Vec<OccupationVector>> {
    if m == 0 {
        return Err(Error::Dimension("need at least one mode".into()));
    }
    let count = boson_outcome_count(n, m);
    if count > MAX_OUTCOMES {
        return Err(size_cap("boson outcome count", count, MAX_OUTCOMES));
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut current = vec![0u32; m];
    fill_occupations(0, n as u32, &mut current, &mut out);
    Ok(out)
}

fn fill_occupations(mode: usize, left: u32, current: &mut Vec<u32>, out: &mut Vec<OccupationVector>) {
    if mode + 1 == current.len() {
        current[mode] = left;
        out.push(OccupationVector(current.clone()));
        return;
    }
    for k in (0..=left).rev() {
        current[mode] = k;
        fill_occupations(mode + 1, left - k, current, out);
    }
    current[mode] = 0;
}

/// `n`-element subsets of `0..m` in lexicographic order.
pub fn enumerate_fermion_outcomes(n: usize, m: usize) -> Result<Vec<ModeSubset>> {
    let count = binomial(m as u64, n as u64);
    if count > MAX_OUTCOMES {
        return Err(size_cap("fermion outcome count", count, MAX_OUTCOMES));
    }
    if n > m {
        return Err(Error::Dimension(format!("{n} fermions do not fit in {m} modes")));
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        out.push(ModeSubset(idx.clone()));
        // advance to the next combination
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if idx[i] < m - n + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Square matrix whose columns are column `j` of `x` repeated `s[j]` times.
pub fn boson_submatrix(x: &ComplexMatrix, s: &OccupationVector) -> Result<ComplexMatrix> {
    if s.modes() != x.cols() {
        return Err(Error::Dimension(format!(
            "occupation vector has {} modes but the matrix has {} columns",
            s.modes(),
            x.cols()
        )));
    }
    if s.total() as usize != x.rows() {
        return Err(Error::Dimension(format!(
            "occupation vector holds {} bosons but the matrix has {} rows",
            s.total(),
            x.rows()
        )));
    }
    let cols: Vec<usize> = s
        .counts()
        .iter()
        .enumerate()
        .flat_map(|(j, &k)| std::iter::repeat_n(j, k as usize))
        .collect();
    let rows: Vec<usize> = (0..x.rows()).collect();
    Ok(x.permuted(&rows, &cols))
}

fn subset_submatrix(x: &ComplexMatrix, s: &ModeSubset) -> ComplexMatrix {
    let rows: Vec<usize> = (0..x.rows()).collect();
    x.permuted(&rows, &s.0)
}

fn require_orthonormal(x: &ComplexMatrix) -> Result<()> {
    let err = x.row_orthonormality_error();
    if err > ORTHONORMALITY_TOLERANCE {
        return Err(Error::Precondition(format!(
            "rows are not orthonormal (max |XX† − I| = {err:.3e})"
        )));
    }
    Ok(())
}

/// Ideal boson-sampling distribution of a row-orthonormal `x`, computed one
/// Ryser permanent per outcome.
pub fn boson_distribution(x: &ComplexMatrix) -> Result<OutcomeDistribution<OccupationVector>> {
    require_orthonormal(x)?;
    let outcomes = enumerate_boson_outcomes(x.rows(), x.cols())?;
    let probs = par::map_range(outcomes.len(), |i| {
        let s = &outcomes[i];
        let sub = boson_submatrix(x, s).expect("outcome shape matches matrix");
        let per = permanent_ryser(&sub).expect("order within cap");
        per.norm_sqr() / s.factorial_product()
    });
    OutcomeDistribution::new(outcomes, probs)
}

/// Fermion-sampling distribution: `|det(X_S)|²` over `n`-subsets.
pub fn fermion_distribution(x: &ComplexMatrix) -> Result<OutcomeDistribution<ModeSubset>> {
    require_orthonormal(x)?;
    let outcomes = enumerate_fermion_outcomes(x.rows(), x.cols())?;
    let probs = par::map_range(outcomes.len(), |i| {
        determinant(&subset_submatrix(x, &outcomes[i]))
            .expect("square submatrix")
            .norm_sqr()
    });
    OutcomeDistribution::new(outcomes, probs)
}

/// Inverse-CDF draw over the stored outcome order.
pub fn sample_outcome<K: OutcomeKey>(dist: &OutcomeDistribution<K>, rng: &mut RandomSource) -> Result<K> {
    if !dist.is_normalized() {
        return Err(Error::Precondition(format!(
            "distribution sums to {} (tolerance {NORMALIZATION_TOLERANCE})",
            dist.total()
        )));
    }
    let u = rng.uniform();
    let mut cum = 0.0;
    let mut last = None;
    for (i, p) in dist.probs().iter().enumerate() {
        if *p > 0.0 {
            last = Some(i);
        }
        cum += p;
        if u < cum {
            return Ok(dist.outcomes()[i].clone());
        }
    }
    // round-off left u above the final cumulative sum
    Ok(dist.outcomes()[last.expect("normalized distribution has mass")].clone())
}

/// Unnormalised boson weights `|Per(M_S)|² / Π S_j!` for arbitrary `n×m`
/// matrices, computed from the generating polynomial.
///
/// The coefficient of `z^S` in `Π_i (Σ_j M_ij z_j)` equals
/// `Per(M_S) / Π_j S_j!`, so multiplying in one linear form per row yields
/// every outcome's permanent at a total cost of roughly
/// `m · C(n+m−2, n−1)` complex multiply-adds instead of one `O(n·2ⁿ)`
/// permanent per outcome. Index tables are built once per `(n, m)` and
/// reused across matrices.
#[derive(Clone, Debug)]
pub struct BosonWeights {
    n: usize,
    m: usize,
    outcomes: Vec<OccupationVector>,
    factorials: Vec<f64>,
    // transitions[k][idx * m + j]: index in level k+1 of (monomial idx of level k) · z_j
    transitions: Vec<Vec<u32>>,
}

impl BosonWeights {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        let outcomes = enumerate_boson_outcomes(n, m)?;
        let mut levels: Vec<Vec<OccupationVector>> = (0..n)
            .map(|k| enumerate_boson_outcomes(k, m))
            .collect::<Result<_>>()?;
        levels.push(outcomes.clone());
        let mut transitions = Vec::with_capacity(n);
        for k in 0..n {
            let lookup: HashMap<&[u32], u32> = levels[k + 1]
                .iter()
                .enumerate()
                .map(|(i, s)| (s.counts(), i as u32))
                .collect();
            let mut table = Vec::with_capacity(levels[k].len() * m);
            for s in &levels[k] {
                let mut counts = s.counts().to_vec();
                for j in 0..m {
                    counts[j] += 1;
                    table.push(lookup[counts.as_slice()]);
                    counts[j] -= 1;
                }
            }
            transitions.push(table);
        }
        let factorials = outcomes.iter().map(|s| s.factorial_product()).collect();
        Ok(Self {
            n,
            m,
            outcomes,
            factorials,
            transitions,
        })
    }

    pub fn outcomes(&self) -> &[OccupationVector] {
        &self.outcomes
    }

    /// `Per(M_S)/Π S_j!` for every outcome, in outcome order.
    pub fn coefficients(&self, mat: &ComplexMatrix) -> Result<Vec<Complex64>> {
        if mat.rows() != self.n || mat.cols() != self.m {
            return Err(Error::Dimension(format!(
                "expected a {}x{} matrix, got {}x{}",
                self.n,
                self.m,
                mat.rows(),
                mat.cols()
            )));
        }
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for (k, table) in self.transitions.iter().enumerate() {
            let row = mat.row(k);
            let next_len = if k + 1 == self.n {
                self.outcomes.len()
            } else {
                boson_outcome_count(k + 1, self.m) as usize
            };
            let mut next = vec![Complex64::new(0.0, 0.0); next_len];
            for (idx, c) in coeffs.iter().enumerate() {
                let targets = &table[idx * self.m..(idx + 1) * self.m];
                for (t, a) in targets.iter().zip(row) {
                    next[*t as usize] += c * a;
                }
            }
            coeffs = next;
        }
        Ok(coeffs)
    }

    /// `|Per(M_S)|² / Π S_j!` for every outcome.
    pub fn weights(&self, mat: &ComplexMatrix) -> Result<Vec<f64>> {
        let coeffs = self.coefficients(mat)?;
        Ok(coeffs
            .iter()
            .zip(&self.factorials)
            .map(|(c, f)| c.norm_sqr() * f)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{gaussian_matrix, haar_orthonormal_rows, permanent_naive};

    fn hadamard() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_real_rows(&[&[s, s], &[s, -s]]).unwrap()
    }

    fn occ(v: &[u32]) -> OccupationVector {
        OccupationVector(v.to_vec())
    }

    #[test]
    fn enumeration_order_and_counts() {
        assert_eq!(
            enumerate_boson_outcomes(1, 3).unwrap(),
            vec![occ(&[1, 0, 0]), occ(&[0, 1, 0]), occ(&[0, 0, 1])]
        );
        assert_eq!(
            enumerate_boson_outcomes(2, 2).unwrap(),
            vec![occ(&[2, 0]), occ(&[1, 1]), occ(&[0, 2])]
        );
        assert_eq!(enumerate_boson_outcomes(3, 5).unwrap().len(), binomial(7, 3) as usize);
        assert_eq!(binomial(7, 3), 35);
        assert!(matches!(enumerate_boson_outcomes(10, 30), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn fermion_subsets_lexicographic() {
        let subs = enumerate_fermion_outcomes(2, 4).unwrap();
        let expect: Vec<Vec<usize>> = vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]];
        assert_eq!(subs.into_iter().map(|s| s.0).collect::<Vec<_>>(), expect);
        assert_eq!(enumerate_fermion_outcomes(0, 3).unwrap().len(), 1);
    }

    #[test]
    fn submatrix_examples() {
        let x = ComplexMatrix::from_fn(3, 3, |r, c| Complex64::new((3 * r + c) as f64, 0.0));
        assert_eq!(boson_submatrix(&x, &occ(&[1, 1, 1])).unwrap(), x);
        let i2 = ComplexMatrix::identity(2);
        let expect = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert_eq!(boson_submatrix(&i2, &occ(&[2, 0])).unwrap(), expect);
        let y = ComplexMatrix::from_fn(2, 3, |r, c| Complex64::new((3 * r + c) as f64, 0.0));
        let sub = boson_submatrix(&y, &occ(&[0, 1, 1])).unwrap();
        assert_eq!(sub.column(0), y.column(1));
        assert_eq!(sub.column(1), y.column(2));
        assert!(matches!(boson_submatrix(&y, &occ(&[1, 1])), Err(Error::Dimension(_))));
    }

    #[test]
    fn identity_and_hadamard_bosons() {
        let d = boson_distribution(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(d.probs(), &[0.0, 1.0, 0.0]);
        let d = boson_distribution(&hadamard()).unwrap();
        // Per([[s,s],[s,s]]) = 2s² = 1 → 1/2!; Per(H) = -s² + s² = 0
        let by_naive = permanent_naive(&boson_submatrix(&hadamard(), &occ(&[2, 0])).unwrap()).unwrap();
        assert!((by_naive.norm_sqr() / 2.0 - 0.5).abs() < 1e-15);
        assert!(d.prob_of(&occ(&[1, 1])).unwrap() <= 1e-12);
        assert!((d.prob_of(&occ(&[2, 0])).unwrap() - 0.5).abs() <= 1e-12);
        assert!((d.prob_of(&occ(&[0, 2])).unwrap() - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn fermion_examples() {
        let d = fermion_distribution(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(d.probs(), &[1.0]);
        let d = fermion_distribution(&hadamard()).unwrap();
        assert!((d.probs()[0] - 1.0).abs() < 1e-15);
        let x = haar_orthonormal_rows(2, 5, &mut RandomSource::new(5)).unwrap();
        assert!((fermion_distribution(&x).unwrap().total() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_boson_is_modulus_squared() {
        let x = haar_orthonormal_rows(1, 5, &mut RandomSource::new(8)).unwrap();
        let b = boson_distribution(&x).unwrap();
        let f = fermion_distribution(&x).unwrap();
        for j in 0..5 {
            let p = x[(0, j)].norm_sqr();
            // outcome order: mode 0 first for bosons and fermions alike
            assert!((b.probs()[j] - p).abs() < 1e-15);
            assert!((f.probs()[j] - p).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_orthonormal() {
        let x = gaussian_matrix(2, 3, &mut RandomSource::new(1)).unwrap();
        assert!(matches!(boson_distribution(&x), Err(Error::Precondition(_))));
        assert!(matches!(fermion_distribution(&x), Err(Error::Precondition(_))));
    }

    #[test]
    fn generating_polynomial_matches_permanents() {
        for (n, m, seed) in [(1, 3, 1), (2, 4, 2), (3, 5, 3), (4, 6, 4)] {
            let mat = gaussian_matrix(n, m, &mut RandomSource::new(seed)).unwrap();
            let engine = BosonWeights::new(n, m).unwrap();
            let w = engine.weights(&mat).unwrap();
            for (s, wi) in engine.outcomes().iter().zip(&w) {
                let per = permanent_naive(&boson_submatrix(&mat, s).unwrap()).unwrap();
                let expect = per.norm_sqr() / s.factorial_product();
                assert!((wi - expect).abs() <= 1e-12 * expect.max(1.0), "{s}: {wi} vs {expect}");
            }
        }
    }

    #[test]
    fn sampling() {
        let point = OutcomeDistribution::new(vec![occ(&[2, 0]), occ(&[1, 1])], vec![0.0, 1.0]).unwrap();
        let mut rng = RandomSource::new(1);
        for _ in 0..100 {
            assert_eq!(sample_outcome(&point, &mut rng).unwrap(), occ(&[1, 1]));
        }
        let fair = OutcomeDistribution::new(vec!['A', 'B'], vec![0.5, 0.5]).unwrap();
        let n = 100_000;
        let a = (0..n).filter(|_| sample_outcome(&fair, &mut rng).unwrap() == 'A').count();
        let freq = a as f64 / n as f64;
        assert!((0.49..=0.51).contains(&freq));
        let draws = |seed| {
            let mut r = RandomSource::new(seed);
            (0..50).map(|_| sample_outcome(&fair, &mut r).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draws(7), draws(7));
        let bad = OutcomeDistribution::new(vec!['A'], vec![0.5]).unwrap();
        assert!(matches!(sample_outcome(&bad, &mut rng), Err(Error::Precondition(_))));
    }
}
