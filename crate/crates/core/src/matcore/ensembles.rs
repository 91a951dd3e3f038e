use num_complex::Complex64;

use super::{ComplexMatrix, RandomSource};
use crate::error::{Error, Result};

/// First `n` rows of a Haar-random `m×m` unitary.
///
/// Draws an `n×m` complex Ginibre matrix and orthonormalises its rows with
/// modified Gram–Schmidt (two passes). This is the QR construction applied
/// to the transpose with the triangular factor's diagonal made real positive,
/// which is the phase correction that makes the result exactly Haar.
pub fn haar_orthonormal_rows(n: usize, m: usize, rng: &mut RandomSource) -> Result<ComplexMatrix> {
    if n > m {
        return Err(Error::Dimension(format!("cannot fit {n} orthonormal rows in dimension {m}")));
    }
    let mut rows: Vec<Vec<Complex64>> = (0..n)
        .map(|_| (0..m).map(|_| rng.complex_normal(1.0)).collect())
        .collect();
    for i in 0..n {
        let (done, rest) = rows.split_at_mut(i);
        let v = &mut rest[0];
        for _pass in 0..2 {
            for q in done.iter() {
                let proj: Complex64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (x, a) in v.iter_mut().zip(q) {
                    *x -= proj * a;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 1e-300) {
            return Err(Error::Numerical("degenerate Ginibre draw".into()));
        }
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    ComplexMatrix::new(n, m, rows.into_iter().flatten().collect())
}

/// Haar-random `d×d` unitary.
pub fn haar_unitary(d: usize, rng: &mut RandomSource) -> Result<ComplexMatrix> {
    haar_orthonormal_rows(d, d, rng)
}

/// I.i.d. circularly symmetric complex Gaussian entries with variance `1/m`,
/// so every row has expected squared norm 1.
pub fn gaussian_matrix(n: usize, m: usize, rng: &mut RandomSource) -> Result<ComplexMatrix> {
    if n == 0 || m == 0 {
        return Err(Error::Dimension(format!("gaussian matrix needs positive shape, got {n}x{m}")));
    }
    let var = 1.0 / m as f64;
    let data = (0..n * m).map(|_| rng.complex_normal(var)).collect();
    ComplexMatrix::new(n, m, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row_is_unit_vector() {
        let x = haar_orthonormal_rows(1, 4, &mut RandomSource::new(3)).unwrap();
        let norm: f64 = x.row(0).iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn haar_rows_orthonormal_and_deterministic() {
        for (n, m) in [(2, 4), (3, 9), (5, 25), (8, 8)] {
            let x = haar_orthonormal_rows(n, m, &mut RandomSource::new(n as u64)).unwrap();
            assert!(x.row_orthonormality_error() < 1e-12);
        }
        let a = haar_orthonormal_rows(2, 4, &mut RandomSource::new(42)).unwrap();
        let b = haar_orthonormal_rows(2, 4, &mut RandomSource::new(42)).unwrap();
        assert_eq!(a, b);
        assert!(haar_orthonormal_rows(5, 4, &mut RandomSource::new(1)).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = RandomSource::new(11);
        let m = gaussian_matrix(100_000, 4, &mut rng).unwrap();
        // entry mean: each of re, im has variance 1/8 per entry
        let n_entries = 400_000.0;
        let mean: Complex64 = m.as_slice().iter().sum::<Complex64>() / n_entries;
        let se = (0.125f64 / n_entries).sqrt();
        assert!(mean.re.abs() < 3.0 * se && mean.im.abs() < 3.0 * se);
        // squared row norms: mean 1, variance 1/m for a Gamma(m, 1/m)
        let norms: Vec<f64> = (0..100_000).map(|r| m.row(r).iter().map(|z| z.norm_sqr()).sum()).collect();
        let mean_norm = norms.iter().sum::<f64>() / norms.len() as f64;
        let var = norms.iter().map(|x| (x - mean_norm).powi(2)).sum::<f64>() / (norms.len() - 1) as f64;
        assert!((mean_norm - 1.0).abs() < 3.0 * (var / norms.len() as f64).sqrt());

        let m8 = gaussian_matrix(20_000, 8, &mut rng).unwrap();
        let vals: Vec<f64> = m8.as_slice().iter().map(|z| z.norm_sqr()).collect();
        let v_mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let v_var = vals.iter().map(|x| (x - v_mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
        // E|z|² estimates the per-entry variance 1/8
        assert!((v_mean - 0.125).abs() < 3.0 * (v_var / vals.len() as f64).sqrt());
    }
}
