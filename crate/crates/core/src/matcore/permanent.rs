use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{size_cap, Error, Result};
use crate::par;

/// Largest order accepted by [`permanent_ryser`].
pub const RYSER_MAX_N: usize = 30;
/// Largest order accepted by [`permanent_naive`].
pub const NAIVE_MAX_N: usize = 8;

// Gray-code steps per parallel work unit; orders below this run as one unit.
const RYSER_CHUNK_LOG2: usize = 14;

fn require_square(m: &ComplexMatrix) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(m.rows())
}

/// Permanent by Ryser's inclusion-exclusion formula
///
/// `Per(M) = (-1)^n Σ_{S ⊆ cols} (-1)^{|S|} Π_i Σ_{j∈S} m_ij`,
///
/// visiting the column subsets in Gray-code order so that each step adds or
/// removes a single column from the running row sums. Cost is `O(n·2ⁿ)`.
pub fn permanent_ryser(m: &ComplexMatrix) -> Result<Complex64> {
    let n = require_square(m)?;
    if n > RYSER_MAX_N {
        return Err(size_cap("permanent order", n as u64, RYSER_MAX_N as u64));
    }
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let steps: u64 = 1 << n;
    let chunk: u64 = 1 << RYSER_CHUNK_LOG2.min(n);
    let n_chunks = (steps / chunk) as usize;
    let partials = par::map_range(n_chunks, |c| ryser_range(m, c as u64 * chunk, (c as u64 + 1) * chunk));
    let total: Complex64 = partials.into_iter().sum();
    Ok(if n % 2 == 0 { total } else { -total })
}

/// Signed Ryser terms for Gray-code positions `start..end` (position 0 is the
/// empty subset and contributes nothing).
fn ryser_range(m: &ComplexMatrix, start: u64, end: u64) -> Complex64 {
    let n = m.rows();
    let mut row_sums = [Complex64::new(0.0, 0.0); RYSER_MAX_N];
    let row_sums = &mut row_sums[..n];
    let first = start.max(1);
    // Row sums for the subset preceding `first`.
    let prev = (first - 1) ^ ((first - 1) >> 1);
    for (i, s) in row_sums.iter_mut().enumerate() {
        let row = m.row(i);
        for (j, z) in row.iter().enumerate() {
            if prev >> j & 1 == 1 {
                *s += z;
            }
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for k in first..end {
        let j = k.trailing_zeros() as usize;
        let gray = k ^ (k >> 1);
        if gray >> j & 1 == 1 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += m[(i, j)];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= m[(i, j)];
            }
        }
        let prod = row_sums.iter().fold(Complex64::new(1.0, 0.0), |p, s| p * s);
        if gray.count_ones() % 2 == 1 {
            acc -= prod;
        } else {
            acc += prod;
        }
    }
    acc
}

/// Permanent as the plain sum over all `n!` permutations.
pub fn permanent_naive(m: &ComplexMatrix) -> Result<Complex64> {
    let n = require_square(m)?;
    if n > NAIVE_MAX_N {
        return Err(size_cap("naive permanent order", n as u64, NAIVE_MAX_N as u64));
    }
    fn rec(m: &ComplexMatrix, row: usize, used: u32, prefix: Complex64) -> Complex64 {
        let n = m.rows();
        if row == n {
            return prefix;
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for j in 0..n {
            if used >> j & 1 == 0 {
                sum += rec(m, row + 1, used | 1 << j, prefix * m[(row, j)]);
            }
        }
        sum
    }
    Ok(rec(m, 0, 0, Complex64::new(1.0, 0.0)))
}

/// Determinant by LU factorisation with partial pivoting.
pub fn determinant(m: &ComplexMatrix) -> Result<Complex64> {
    let n = require_square(m)?;
    let mut a: Vec<Complex64> = m.as_slice().to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&x, &y| a[x * n + k].norm().total_cmp(&a[y * n + k].norm()))
            .expect("non-empty pivot range");
        if a[pivot * n + k].norm() == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if pivot != k {
            for c in 0..n {
                a.swap(k * n + c, pivot * n + c);
            }
            det = -det;
        }
        let p = a[k * n + k];
        det *= p;
        for r in k + 1..n {
            let f = a[r * n + k] / p;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in k + 1..n {
                let v = a[k * n + c];
                a[r * n + c] -= f * v;
            }
        }
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{gaussian_matrix, RandomSource};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Laplace expansion along the first row; independent of the LU path.
    fn cofactor_det(m: &ComplexMatrix) -> Complex64 {
        let n = m.rows();
        if n == 0 {
            return c(1.0);
        }
        if n == 1 {
            return m[(0, 0)];
        }
        let mut sum = c(0.0);
        for j in 0..n {
            let rows: Vec<usize> = (1..n).collect();
            let cols: Vec<usize> = (0..n).filter(|&x| x != j).collect();
            let minor = m.permuted(&rows, &cols);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sum += m[(0, j)] * cofactor_det(&minor) * sign;
        }
        sum
    }

    #[test]
    fn identity_and_all_ones() {
        assert_eq!(permanent_ryser(&ComplexMatrix::identity(3)).unwrap(), c(1.0));
        let ones = ComplexMatrix::from_fn(3, 3, |_, _| c(1.0));
        assert!((permanent_ryser(&ones).unwrap() - c(6.0)).norm() < 1e-12);
        assert_eq!(permanent_naive(&ComplexMatrix::identity(2)).unwrap(), c(1.0));
        let swap = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert_eq!(permanent_naive(&swap).unwrap(), c(1.0));
        let ones4 = ComplexMatrix::from_fn(4, 4, |_, _| c(1.0));
        assert_eq!(permanent_naive(&ones4).unwrap(), c(24.0));
    }

    #[test]
    fn ryser_matches_naive_on_seeded_gaussian() {
        let m = gaussian_matrix(4, 4, &mut RandomSource::new(4)).unwrap();
        let r = permanent_ryser(&m).unwrap();
        let n = permanent_naive(&m).unwrap();
        assert!((r - n).norm() < 1e-10);
    }

    #[test]
    fn chunked_ryser_matches_single_pass() {
        // order 16 spans several work units
        let m = gaussian_matrix(16, 16, &mut RandomSource::new(16)).unwrap();
        let chunked = permanent_ryser(&m).unwrap();
        let whole = ryser_range(&m, 0, 1 << 16);
        assert!((chunked - whole).norm() <= 1e-9 * whole.norm().max(1.0));
    }

    #[test]
    fn size_and_shape_errors() {
        assert!(matches!(permanent_ryser(&ComplexMatrix::zeros(2, 3)), Err(Error::Dimension(_))));
        assert!(matches!(permanent_ryser(&ComplexMatrix::identity(31)), Err(Error::SizeCap { .. })));
        assert!(matches!(permanent_naive(&ComplexMatrix::identity(9)), Err(Error::SizeCap { .. })));
        assert!(matches!(determinant(&ComplexMatrix::zeros(1, 2)), Err(Error::Dimension(_))));
    }

    #[test]
    fn empty_matrix_conventions() {
        assert_eq!(permanent_ryser(&ComplexMatrix::zeros(0, 0)).unwrap(), c(1.0));
        assert_eq!(determinant(&ComplexMatrix::zeros(0, 0)).unwrap(), c(1.0));
    }

    #[test]
    fn determinant_examples() {
        assert!((determinant(&ComplexMatrix::identity(5)).unwrap() - c(1.0)).norm() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = ComplexMatrix::from_real_rows(&[&[s, s], &[s, -s]]).unwrap();
        // 2x2 formula: ad - bc = -1/2 - 1/2
        let formula = h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)];
        assert!((formula - c(-1.0)).norm() < 1e-15);
        assert!((determinant(&h).unwrap() - c(-1.0)).norm() < 1e-15);
        let m = gaussian_matrix(5, 5, &mut RandomSource::new(55)).unwrap();
        let oracle = cofactor_det(&m);
        assert!((determinant(&m).unwrap() - oracle).norm() < 1e-9);
    }

    #[test]
    fn singular_determinant_is_zero() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(determinant(&m).unwrap().norm() < 1e-15);
    }
}
