//! Local operations on vectors of `2^bits` complex amplitudes.

use num_complex::Complex64;

use crate::par::{self, SharedSlice};

const MAX_GROUP: usize = 16;
const PARALLEL_MIN_GROUPS: usize = 1 << 11;

fn insert_zero_bits(mut g: usize, sorted_positions: &[usize]) -> usize {
    for &p in sorted_positions {
        let low = g & ((1 << p) - 1);
        g = low | ((g >> p) << (p + 1));
    }
    g
}

/// Calls `f` on every group of `2^k` entries that differ only in the bits at
/// `positions`. Inside a group, local index bit `j` is global bit
/// `positions[j]`.
pub(crate) fn for_each_group<F>(data: &mut [Complex64], positions: &[usize], f: F)
where
    F: Fn(&mut [Complex64]) + Sync + Send,
{
    let k = positions.len();
    let d = 1usize << k;
    assert!(d <= MAX_GROUP, "group of {k} bits is too large");
    let mut sorted = positions.to_vec();
    sorted.sort_unstable();
    debug_assert!(sorted.windows(2).all(|w| w[0] != w[1]), "positions must be distinct");
    let offsets: Vec<usize> = (0..d)
        .map(|a| (0..k).map(|j| ((a >> j) & 1) << positions[j]).sum())
        .collect();
    let groups = data.len() >> k;
    let shared = SharedSlice::new(data);
    par::for_each_index(groups, PARALLEL_MIN_GROUPS, |g| {
        let base = insert_zero_bits(g, &sorted);
        let mut buf = [Complex64::new(0.0, 0.0); MAX_GROUP];
        // SAFETY: distinct `g` address disjoint groups of indices.
        unsafe {
            for (b, off) in buf.iter_mut().zip(&offsets) {
                *b = shared.read(base + off);
            }
        }
        f(&mut buf[..d]);
        unsafe {
            for (b, off) in buf.iter().zip(&offsets) {
                shared.write(base + off, *b);
            }
        }
    });
}

/// Multiplies every group by the `2^k × 2^k` row-major matrix `mat`.
pub(crate) fn apply_matrix(data: &mut [Complex64], positions: &[usize], mat: &[Complex64]) {
    let d = 1usize << positions.len();
    assert_eq!(mat.len(), d * d);
    for_each_group(data, positions, |buf| {
        let mut out = [Complex64::new(0.0, 0.0); MAX_GROUP];
        for (r, o) in out.iter_mut().enumerate().take(d) {
            *o = mat[r * d..(r + 1) * d].iter().zip(buf.iter()).map(|(m, v)| m * v).sum();
        }
        buf.copy_from_slice(&out[..d]);
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_bits() {
        assert_eq!(insert_zero_bits(0b11, &[1]), 0b101);
        assert_eq!(insert_zero_bits(0b111, &[0, 2]), 0b11010);
    }

    #[test]
    fn x_on_middle_bit() {
        let mut v: Vec<Complex64> = (0..8).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let x = [0.0, 1.0, 1.0, 0.0].map(|r| Complex64::new(r, 0.0));
        apply_matrix(&mut v, &[1], &x);
        let got: Vec<f64> = v.iter().map(|z| z.re).collect();
        assert_eq!(got, vec![2.0, 3.0, 0.0, 1.0, 6.0, 7.0, 4.0, 5.0]);
    }
}
