//! Finite probability distributions over canonical outcome keys.

use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};

/// Probabilities below `-NEGATIVE_TOLERANCE` are rejected.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;
/// Allowed deviation of the total from 1 for a normalized distribution.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-8;

/// A key that labels one outcome of a distribution.
pub trait OutcomeKey: Clone + PartialEq + fmt::Display + Send + Sync {}

impl<T: Clone + PartialEq + fmt::Display + Send + Sync> OutcomeKey for T {}

/// Bosons per mode; counts sum to the number of bosons.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationVector(pub Vec<u32>);

impl OccupationVector {
    pub fn new(counts: Vec<u32>) -> Self {
        Self(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    /// `Π_j counts[j]!`
    pub fn factorial_product(&self) -> f64 {
        self.0
            .iter()
            .map(|&k| (1..=k).map(f64::from).product::<f64>())
            .product()
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(f, self.0.iter())
    }
}

/// Sorted set of occupied modes (fermion outcomes).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeSubset(pub Vec<usize>);

impl fmt::Display for ModeSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(f, self.0.iter())
    }
}

fn write_joined<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: impl Iterator<Item = T>) -> fmt::Result {
    for (i, x) in items.enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

/// A measured `width`-bit string. Bit `j` of `value` is the `j`-th measured
/// qubit and is printed as the `j`-th character.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BitString {
    pub value: u64,
    pub width: usize,
}

impl BitString {
    pub fn bit(&self, j: usize) -> bool {
        self.value >> j & 1 == 1
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.width {
            f.write_str(if self.bit(j) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Probabilities attached to an ordered list of outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution<K> {
    outcomes: Vec<K>,
    probs: Vec<f64>,
}

impl<K: OutcomeKey> OutcomeDistribution<K> {
    /// Checks lengths and non-negativity; tiny negative round-off (within
    /// [`NEGATIVE_TOLERANCE`]) is clamped to zero.
    pub fn new(outcomes: Vec<K>, probs: Vec<f64>) -> Result<Self> {
        if outcomes.len() != probs.len() {
            return Err(Error::Dimension(format!(
                "{} outcomes but {} probabilities",
                outcomes.len(),
                probs.len()
            )));
        }
        let mut probs = probs;
        for (k, p) in outcomes.iter().zip(probs.iter_mut()) {
            if !p.is_finite() || *p < -NEGATIVE_TOLERANCE || *p > 1.0 + NORMALIZATION_TOLERANCE {
                return Err(Error::Precondition(format!("probability {p} for outcome {k} is out of range")));
            }
            *p = p.clamp(0.0, 1.0);
        }
        Ok(Self { outcomes, probs })
    }

    /// Divides by the total mass.
    pub fn from_weights(outcomes: Vec<K>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Numerical(format!("cannot normalise weights with total {total}")));
        }
        Self::new(outcomes, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn outcomes(&self) -> &[K] {
        &self.outcomes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total() - 1.0).abs() <= NORMALIZATION_TOLERANCE
    }

    pub fn prob_of(&self, key: &K) -> Option<f64> {
        self.outcomes.iter().position(|k| k == key).map(|i| self.probs[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, f64)> {
        self.outcomes.iter().zip(self.probs.iter().copied())
    }

    /// Fails unless `other` has the same outcomes in the same order.
    pub fn check_same_support(&self, other: &Self) -> Result<()> {
        if self.outcomes.len() != other.outcomes.len() {
            return Err(Error::Key(format!(
                "outcome sets differ in size ({} vs {})",
                self.outcomes.len(),
                other.outcomes.len()
            )));
        }
        if let Some((a, b)) = self.outcomes.iter().zip(&other.outcomes).find(|(a, b)| a != b) {
            return Err(Error::Key(format!("outcome {a} does not match {b}")));
        }
        Ok(())
    }

    /// Total-variation distance `½ Σ |p − q|`.
    pub fn tvd(&self, other: &Self) -> Result<f64> {
        self.check_same_support(other)?;
        Ok(0.5 * self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }

    /// Writes `outcome,probability` rows; probabilities carry 17 significant
    /// digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "outcome,probability")?;
        for (k, p) in self.iter() {
            writeln!(w, "\"{k}\",{}", fmt_f64(p))?;
        }
        Ok(())
    }
}

/// Locale-independent 17-significant-digit rendering.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_and_mismatched() {
        assert!(OutcomeDistribution::new(vec![1, 2], vec![0.5]).is_err());
        assert!(OutcomeDistribution::new(vec![1, 2], vec![1.1, -0.1]).is_err());
        let d = OutcomeDistribution::new(vec![1, 2], vec![1.0, -1e-13]).unwrap();
        assert_eq!(d.probs(), &[1.0, 0.0]);
    }

    #[test]
    fn displays() {
        assert_eq!(OccupationVector(vec![2, 0, 1]).to_string(), "2,0,1");
        assert_eq!(ModeSubset(vec![0, 3]).to_string(), "0,3");
        assert_eq!(BitString { value: 0b01, width: 3 }.to_string(), "100");
        assert_eq!(OccupationVector(vec![2, 0, 3]).factorial_product(), 12.0);
    }

    #[test]
    fn csv_output() {
        let d = OutcomeDistribution::new(vec![OccupationVector(vec![1, 1])], vec![1.0]).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "outcome,probability\n\"1,1\",1.0000000000000000e0\n");
    }

    #[test]
    fn tvd_and_support_check() {
        let p = OutcomeDistribution::new(vec![0, 1], vec![0.5, 0.5]).unwrap();
        let q = OutcomeDistribution::new(vec![0, 1], vec![1.0, 0.0]).unwrap();
        assert_eq!(p.tvd(&q).unwrap(), 0.5);
        let r = OutcomeDistribution::new(vec![0, 2], vec![1.0, 0.0]).unwrap();
        assert!(matches!(p.tvd(&r), Err(Error::Key(_))));
    }
}
