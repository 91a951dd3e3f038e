//! Noisy boson sampling by Gaussian mixing.
//!
//! The noisy model averages boson-sampling distributions over the random
//! matrices `√(1−t)·A + √t·G`, where `G` has i.i.d. complex Gaussian entries
//! of variance `1/m`. Mixed matrices are not row-orthonormal, so each noise
//! sample's weights `|Per(M_S)|²/Π S_j!` are normalised over the full outcome
//! set before averaging.
//!
//! Monte Carlo work is split into a fixed number of batches; batch sums are
//! combined in order and reused as bootstrap units for correlation error bars.

use std::io::Write;

use num_complex::Complex64;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bosonsampler::{boson_distribution, boson_submatrix, BosonWeights};
use crate::distribution::{fmt_f64, OccupationVector, OutcomeDistribution, OutcomeKey};
use crate::error::{Error, Result};
use crate::matcore::{gaussian_matrix, haar_orthonormal_rows, permanent_ryser, ComplexMatrix, RandomSource};
use crate::{par, stats};

/// Upper bound on the number of Monte Carlo batches.
pub const MAX_BATCHES: usize = 64;
/// Bootstrap resamples behind correlation error bars.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Noise rate `t ∈ [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct NoiseRate(f64);

impl NoiseRate {
    pub fn new(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Precondition(format!("noise rate {t} outside [0, 1]")));
        }
        Ok(Self(t))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Signal amplitude `√(1−t)`.
    pub fn signal(self) -> f64 {
        (1.0 - self.0).sqrt()
    }

    /// Noise amplitude `√t`.
    pub fn noise(self) -> f64 {
        self.0.sqrt()
    }

    /// Rate of applying `self` then `other`: `1 − (1−t₁)(1−t₂)`.
    pub fn compose(self, other: Self) -> Self {
        Self((1.0 - (1.0 - self.0) * (1.0 - other.0)).clamp(0.0, 1.0))
    }
}

impl TryFrom<f64> for NoiseRate {
    type Error = Error;

    fn try_from(t: f64) -> Result<Self> {
        Self::new(t)
    }
}

impl From<NoiseRate> for f64 {
    fn from(t: NoiseRate) -> f64 {
        t.0
    }
}

/// Settings for one noisy-distribution estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisyBsConfig {
    pub t: NoiseRate,
    pub mc_samples: usize,
    pub seed: u64,
}

impl NoisyBsConfig {
    pub fn new(t: f64, mc_samples: usize, seed: u64) -> Result<Self> {
        if mc_samples == 0 {
            return Err(Error::Precondition("mc_samples must be at least 1".into()));
        }
        Ok(Self {
            t: NoiseRate::new(t)?,
            mc_samples,
            seed,
        })
    }

    pub fn run(&self, a: &ComplexMatrix) -> Result<NoisyBosonEstimate> {
        noisy_boson_distribution(a, self.t, self.mc_samples, &mut RandomSource::new(self.seed))
    }
}

/// Entrywise `√(1−t)·A + √t·G`.
pub fn mix_matrix(a: &ComplexMatrix, g: &ComplexMatrix, t: NoiseRate) -> Result<ComplexMatrix> {
    a.check_same_shape(g)?;
    let (s, w) = (t.signal(), t.noise());
    let data = a
        .as_slice()
        .iter()
        .zip(g.as_slice())
        .map(|(x, y)| x * s + y * w)
        .collect();
    ComplexMatrix::new(a.rows(), a.cols(), data)
}

/// Monte Carlo estimate of a noise-averaged boson distribution.
#[derive(Clone, Debug)]
pub struct NoisyBosonEstimate {
    pub dist: OutcomeDistribution<OccupationVector>,
    /// Per-outcome standard error of the averaged probability.
    pub std_err: Vec<f64>,
    pub used_samples: usize,
    /// Samples whose weights were all zero.
    pub skipped: usize,
    batch_sums: Vec<Vec<f64>>,
    batch_counts: Vec<usize>,
}

impl NoisyBosonEstimate {
    /// Distribution obtained by pooling the given batches (with repetition).
    fn pooled(&self, picks: &[usize]) -> Vec<f64> {
        let mut acc = vec![0.0; self.dist.len()];
        let mut count = 0usize;
        for &b in picks {
            count += self.batch_counts[b];
            for (a, x) in acc.iter_mut().zip(&self.batch_sums[b]) {
                *a += x;
            }
        }
        if count > 0 {
            acc.iter_mut().for_each(|a| *a /= count as f64);
        }
        acc
    }

    pub fn n_batches(&self) -> usize {
        self.batch_sums.len()
    }
}

struct BatchAccumulator {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    used: usize,
    skipped: usize,
}

fn sample_rng(base_seed: u64, index: usize) -> RandomSource {
    RandomSource::new(base_seed).fork(index as u64)
}

/// Averages per-sample-normalised boson weights of the matrices produced by
/// `draw`.
fn average_over_noise<F>(engine: &BosonWeights, mc_samples: usize, rng: &mut RandomSource, draw: F) -> Result<NoisyBosonEstimate>
where
    F: Fn(&mut RandomSource) -> Result<ComplexMatrix> + Sync + Send,
{
    if mc_samples == 0 {
        return Err(Error::Precondition("mc_samples must be at least 1".into()));
    }
    let base_seed = rng.next_u64();
    let len = engine.outcomes().len();
    let n_batches = mc_samples.min(MAX_BATCHES);
    let batches: Vec<Result<BatchAccumulator>> = par::map_range(n_batches, |b| {
        let start = b * mc_samples / n_batches;
        let end = (b + 1) * mc_samples / n_batches;
        let mut acc = BatchAccumulator {
            sum: vec![0.0; len],
            sum_sq: vec![0.0; len],
            used: 0,
            skipped: 0,
        };
        for s in start..end {
            let mut r = sample_rng(base_seed, s);
            let m = draw(&mut r)?;
            let w = engine.weights(&m)?;
            let total: f64 = w.iter().sum();
            if !(total > 0.0) || !total.is_finite() {
                acc.skipped += 1;
                continue;
            }
            acc.used += 1;
            for ((a, q), x) in acc.sum.iter_mut().zip(acc.sum_sq.iter_mut()).zip(&w) {
                let p = x / total;
                *a += p;
                *q += p * p;
            }
        }
        Ok(acc)
    });
    let batches: Vec<BatchAccumulator> = batches.into_iter().collect::<Result<_>>()?;
    let used: usize = batches.iter().map(|b| b.used).sum();
    let skipped: usize = batches.iter().map(|b| b.skipped).sum();
    if used == 0 {
        return Err(Error::Numerical(format!("all {skipped} noise samples were degenerate")));
    }
    let batch_counts: Vec<usize> = batches.iter().map(|b| b.used).collect();
    let (batch_sums, batch_sq): (Vec<Vec<f64>>, Vec<Vec<f64>>) = batches.into_iter().map(|b| (b.sum, b.sum_sq)).unzip();
    let sum = par::pairwise_sum(batch_sums.clone()).expect("at least one batch");
    let sum_sq = par::pairwise_sum(batch_sq).expect("at least one batch");
    let nf = used as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / nf).collect();
    let std_err = mean
        .iter()
        .zip(&sum_sq)
        .map(|(m, q)| {
            if used < 2 {
                f64::INFINITY
            } else {
                (((q - nf * m * m) / (nf - 1.0)).max(0.0) / nf).sqrt()
            }
        })
        .collect();
    Ok(NoisyBosonEstimate {
        dist: OutcomeDistribution::new(engine.outcomes().to_vec(), mean)?,
        std_err,
        used_samples: used,
        skipped,
        batch_sums,
        batch_counts,
    })
}

fn require_orthonormal(a: &ComplexMatrix) -> Result<()> {
    let err = a.row_orthonormality_error();
    if err > crate::bosonsampler::ORTHONORMALITY_TOLERANCE {
        return Err(Error::Precondition(format!("rows are not orthonormal (error {err:.3e})")));
    }
    Ok(())
}

/// Noise-averaged boson distribution of the row-orthonormal `a` at rate `t`.
pub fn noisy_boson_distribution(a: &ComplexMatrix, t: NoiseRate, mc_samples: usize, rng: &mut RandomSource) -> Result<NoisyBosonEstimate> {
    require_orthonormal(a)?;
    let engine = BosonWeights::new(a.rows(), a.cols())?;
    average_over_noise(&engine, mc_samples, rng, |r| {
        let g = gaussian_matrix(a.rows(), a.cols(), r)?;
        mix_matrix(a, &g, t)
    })
}

/// Pearson correlation of two probability vectors over the same outcomes;
/// 0 when either is constant.
pub fn distribution_correlation<K: OutcomeKey>(p: &OutcomeDistribution<K>, q: &OutcomeDistribution<K>) -> Result<f64> {
    p.check_same_support(q)?;
    Ok(stats::pearson(p.probs(), q.probs()))
}

/// Monte Carlo mean of `Per(M_S)` against its analytic value.
#[derive(Clone, Copy, Debug)]
pub struct AttenuationCheck {
    pub estimate: Complex64,
    /// `(1−t)^{n/2} · Per(A_S)`
    pub target: Complex64,
    pub std_err: f64,
}

impl AttenuationCheck {
    /// `|estimate − target|` in units of the standard error.
    pub fn z_score(&self) -> f64 {
        let d = (self.estimate - self.target).norm();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_err
        }
    }
}

/// Estimates `E_G[Per(mix(A, G, t)_S)]`. The permanent is multilinear in the
/// rows and the noise is independent with zero mean, so the expectation is
/// `Per(E[M]_S) = (1−t)^{n/2} · Per(A_S)`.
pub fn mean_attenuation_check(
    a: &ComplexMatrix,
    s: &OccupationVector,
    t: NoiseRate,
    mc_samples: usize,
    rng: &mut RandomSource,
) -> Result<AttenuationCheck> {
    let sub = boson_submatrix(a, s)?;
    let n = a.rows();
    let target = permanent_ryser(&sub)? * (1.0 - t.value()).powf(n as f64 / 2.0);
    if mc_samples == 0 {
        return Err(Error::Precondition("mc_samples must be at least 1".into()));
    }
    let base_seed = rng.next_u64();
    let n_batches = mc_samples.min(MAX_BATCHES);
    let parts: Vec<Result<[f64; 4]>> = par::map_range(n_batches, |b| {
        let mut acc = [0.0; 4];
        for k in b * mc_samples / n_batches..(b + 1) * mc_samples / n_batches {
            let mut r = sample_rng(base_seed, k);
            let g = gaussian_matrix(a.rows(), a.cols(), &mut r)?;
            let per = permanent_ryser(&boson_submatrix(&mix_matrix(a, &g, t)?, s)?)?;
            acc[0] += per.re;
            acc[1] += per.im;
            acc[2] += per.re * per.re;
            acc[3] += per.im * per.im;
        }
        Ok(acc)
    });
    let parts: Vec<Vec<f64>> = parts.into_iter().map(|p| p.map(|a| a.to_vec())).collect::<Result<_>>()?;
    let tot = par::pairwise_sum(parts).expect("at least one batch");
    let nf = mc_samples as f64;
    let estimate = Complex64::new(tot[0] / nf, tot[1] / nf);
    let std_err = if mc_samples < 2 {
        f64::INFINITY
    } else {
        let var_re = (tot[2] - nf * estimate.re * estimate.re) / (nf - 1.0);
        let var_im = (tot[3] - nf * estimate.im * estimate.im) / (nf - 1.0);
        ((var_re + var_im).max(0.0) / nf).sqrt()
    };
    Ok(AttenuationCheck {
        estimate,
        target,
        std_err,
    })
}

/// Two-stage against one-stage noisy distributions.
#[derive(Clone, Debug)]
pub struct SemigroupCheck {
    pub two_stage: NoisyBosonEstimate,
    pub one_stage: NoisyBosonEstimate,
}

impl SemigroupCheck {
    /// Largest per-outcome gap measured in combined standard errors.
    pub fn max_gap_in_std_errors(&self) -> f64 {
        self.two_stage
            .dist
            .probs()
            .iter()
            .zip(self.one_stage.dist.probs())
            .zip(self.two_stage.std_err.iter().zip(&self.one_stage.std_err))
            .map(|((p, q), (a, b))| {
                let gap = (p - q).abs();
                if gap == 0.0 {
                    0.0
                } else {
                    gap / (a * a + b * b).sqrt()
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Mixes with fresh noise at `t1` and then at `t2`, and compares against a
/// single mix at `1 − (1−t1)(1−t2)`. Gaussian stability makes the two
/// matrix laws identical.
pub fn noise_semigroup_check(
    a: &ComplexMatrix,
    t1: NoiseRate,
    t2: NoiseRate,
    mc_samples: usize,
    rng: &mut RandomSource,
) -> Result<SemigroupCheck> {
    require_orthonormal(a)?;
    let engine = BosonWeights::new(a.rows(), a.cols())?;
    let two_stage = average_over_noise(&engine, mc_samples, rng, |r| {
        let g1 = gaussian_matrix(a.rows(), a.cols(), r)?;
        let g2 = gaussian_matrix(a.rows(), a.cols(), r)?;
        mix_matrix(&mix_matrix(a, &g1, t1)?, &g2, t2)
    })?;
    let t = t1.compose(t2);
    let one_stage = average_over_noise(&engine, mc_samples, rng, |r| {
        let g = gaussian_matrix(a.rows(), a.cols(), r)?;
        mix_matrix(a, &g, t)
    })?;
    Ok(SemigroupCheck { two_stage, one_stage })
}

/// Correlation of a noisy estimate with an ideal distribution plus its
/// bootstrap standard error over Monte Carlo batches.
pub fn bootstrap_correlation(
    ideal: &OutcomeDistribution<OccupationVector>,
    noisy: &NoisyBosonEstimate,
    resamples: usize,
    rng: &mut RandomSource,
) -> Result<(f64, f64)> {
    let corr = distribution_correlation(ideal, &noisy.dist)?;
    let b = noisy.n_batches();
    if b < 2 || resamples < 2 {
        return Ok((corr, f64::INFINITY));
    }
    let base_seed = rng.next_u64();
    let boots = par::map_range(resamples, |r| {
        let mut src = sample_rng(base_seed, r);
        let picks: Vec<usize> = (0..b).map(|_| src.index(b)).collect();
        stats::pearson(ideal.probs(), &noisy.pooled(&picks))
    });
    Ok((corr, stats::mean_std(&boots).1))
}

/// One row of a correlation-decay table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayPoint {
    pub n: usize,
    pub m: usize,
    pub t: f64,
    pub corr: f64,
    pub std_err: f64,
    pub tvd: f64,
}

/// Parameters of a correlation-decay sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    pub t_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub mc_samples: usize,
    pub seed: u64,
}

/// For each `n`, draws a Haar input of width `m_rule(n)` and correlates its
/// ideal distribution with the noisy one at each `t`.
pub fn correlation_decay_curve(
    n_list: &[usize],
    m_rule: impl Fn(usize) -> usize,
    t_list: &[f64],
    mc_samples: usize,
    rng: &mut RandomSource,
) -> Result<Vec<DecayPoint>> {
    let rates: Vec<NoiseRate> = t_list.iter().map(|&t| NoiseRate::new(t)).collect::<Result<_>>()?;
    for &n in n_list {
        let m = m_rule(n);
        let count = crate::bosonsampler::boson_outcome_count(n, m);
        if count > crate::bosonsampler::MAX_OUTCOMES {
            return Err(crate::error::size_cap("boson outcome count", count, crate::bosonsampler::MAX_OUTCOMES));
        }
    }
    let base = RandomSource::new(rng.next_u64());
    let mut rows = Vec::with_capacity(n_list.len() * t_list.len());
    for (i, &n) in n_list.iter().enumerate() {
        let m = m_rule(n);
        let stream = base.fork(i as u64);
        let a = haar_orthonormal_rows(n, m, &mut stream.fork(0))?;
        let ideal = boson_distribution(&a)?;
        for (j, &t) in rates.iter().enumerate() {
            let mut noise_rng = stream.fork(2 * j as u64 + 1);
            let mut boot_rng = stream.fork(2 * j as u64 + 2);
            let noisy = noisy_boson_distribution(&a, t, mc_samples, &mut noise_rng)?;
            let (corr, std_err) = bootstrap_correlation(&ideal, &noisy, BOOTSTRAP_RESAMPLES, &mut boot_rng)?;
            rows.push(DecayPoint {
                n,
                m,
                t: t.value(),
                corr,
                std_err,
                tvd: ideal.tvd(&noisy.dist)?,
            });
        }
    }
    Ok(rows)
}

/// Writes the decay table with header `n,m,t,corr,std_err,tvd`.
pub fn write_decay_csv<W: Write>(rows: &[DecayPoint], mut w: W) -> Result<()> {
    writeln!(w, "n,m,t,corr,std_err,tvd")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.n,
            r.m,
            fmt_f64(r.t),
            fmt_f64(r.corr),
            fmt_f64(r.std_err),
            fmt_f64(r.tvd)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rate(t: f64) -> NoiseRate {
        NoiseRate::new(t).unwrap()
    }

    #[test]
    fn rate_validation() {
        assert!(NoiseRate::new(-0.1).is_err());
        assert!(NoiseRate::new(1.5).is_err());
        assert!((rate(0.2).compose(rate(0.2)).value() - 0.36).abs() < 1e-15);
        assert!(NoisyBsConfig::new(0.1, 0, 1).is_err());
    }

    #[test]
    fn mix_endpoints() {
        let mut rng = RandomSource::new(3);
        let a = haar_orthonormal_rows(2, 3, &mut rng).unwrap();
        let g = gaussian_matrix(2, 3, &mut rng).unwrap();
        assert_eq!(mix_matrix(&a, &g, rate(0.0)).unwrap(), a);
        assert_eq!(mix_matrix(&a, &g, rate(1.0)).unwrap(), g);
        let wrong = gaussian_matrix(3, 3, &mut rng).unwrap();
        assert!(matches!(mix_matrix(&a, &wrong, rate(0.5)), Err(Error::Dimension(_))));
    }

    #[test]
    fn mix_preserves_expected_row_norm() {
        let mut rng = RandomSource::new(21);
        let a = haar_orthonormal_rows(2, 4, &mut rng).unwrap();
        let t = rate(0.4);
        let norms: Vec<f64> = (0..100_000)
            .map(|_| {
                let g = gaussian_matrix(2, 4, &mut rng).unwrap();
                let m = mix_matrix(&a, &g, t).unwrap();
                m.row(0).iter().map(|z| z.norm_sqr()).sum()
            })
            .collect();
        let (mean, sd) = stats::mean_std(&norms);
        assert!((mean - 1.0).abs() < 3.0 * sd / (norms.len() as f64).sqrt());
    }

    #[test]
    fn zero_noise_reproduces_ideal() {
        let a = haar_orthonormal_rows(3, 5, &mut RandomSource::new(2)).unwrap();
        let ideal = boson_distribution(&a).unwrap();
        let est = noisy_boson_distribution(&a, rate(0.0), 3, &mut RandomSource::new(1)).unwrap();
        for (p, q) in ideal.probs().iter().zip(est.dist.probs()) {
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn full_noise_single_boson_is_uniform() {
        let a = haar_orthonormal_rows(1, 2, &mut RandomSource::new(5)).unwrap();
        let est = noisy_boson_distribution(&a, rate(1.0), 20_000, &mut RandomSource::new(6)).unwrap();
        for (p, se) in est.dist.probs().iter().zip(&est.std_err) {
            assert!((p - 0.5).abs() <= 3.0 * se, "{p} ± {se}");
        }
    }

    #[test]
    fn seeds_agree_statistically_but_not_bitwise() {
        let a = haar_orthonormal_rows(2, 4, &mut RandomSource::new(8)).unwrap();
        let x = noisy_boson_distribution(&a, rate(0.5), 4_000, &mut RandomSource::new(1)).unwrap();
        let y = noisy_boson_distribution(&a, rate(0.5), 4_000, &mut RandomSource::new(2)).unwrap();
        let z = noisy_boson_distribution(&a, rate(0.5), 4_000, &mut RandomSource::new(1)).unwrap();
        assert_ne!(x.dist.probs(), y.dist.probs());
        assert_eq!(x.dist.probs(), z.dist.probs());
        for i in 0..x.dist.len() {
            let se = (x.std_err[i].powi(2) + y.std_err[i].powi(2)).sqrt();
            assert!((x.dist.probs()[i] - y.dist.probs()[i]).abs() <= 4.0 * se);
        }
    }

    #[test]
    fn correlation_examples() {
        let keys = vec![0, 1, 2];
        let p = OutcomeDistribution::new(keys.clone(), vec![0.5, 0.3, 0.2]).unwrap();
        assert!((distribution_correlation(&p, &p).unwrap() - 1.0).abs() < 1e-15);
        let u = OutcomeDistribution::new(keys.clone(), vec![1.0 / 3.0; 3]).unwrap();
        assert_eq!(distribution_correlation(&u, &p).unwrap(), 0.0);
        let e1 = OutcomeDistribution::new(keys.clone(), vec![1.0, 0.0, 0.0]).unwrap();
        let e2 = OutcomeDistribution::new(keys, vec![0.0, 1.0, 0.0]).unwrap();
        assert!((distribution_correlation(&e1, &e2).unwrap() + 0.5).abs() < 1e-15);
        let other = OutcomeDistribution::new(vec![0, 1, 3], vec![1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(distribution_correlation(&e1, &other), Err(Error::Key(_))));
    }

    #[test]
    fn attenuation_endpoints() {
        let mut rng = RandomSource::new(12);
        let a = haar_orthonormal_rows(2, 4, &mut rng).unwrap();
        let s = OccupationVector(vec![1, 0, 1, 0]);
        let c0 = mean_attenuation_check(&a, &s, rate(0.0), 10, &mut rng).unwrap();
        assert_eq!(c0.estimate, c0.target);
        assert_eq!(c0.target, permanent_ryser(&boson_submatrix(&a, &s).unwrap()).unwrap());
        let c1 = mean_attenuation_check(&a, &s, rate(1.0), 20_000, &mut rng).unwrap();
        assert_eq!(c1.target, Complex64::new(0.0, 0.0));
        assert!(c1.z_score() <= 3.0);
    }

    #[test]
    fn semigroup_with_identity_first_stage() {
        let a = haar_orthonormal_rows(2, 3, &mut RandomSource::new(30)).unwrap();
        let chk = noise_semigroup_check(&a, rate(0.0), rate(0.3), 10_000, &mut RandomSource::new(31)).unwrap();
        assert!(chk.max_gap_in_std_errors() <= 4.0);
    }

    #[test]
    fn decay_csv_format() {
        let rows = correlation_decay_curve(&[2], |n| n * n, &[0.0, 0.5], 200, &mut RandomSource::new(4)).unwrap();
        assert_eq!(rows.len(), 2);
        assert!((rows[0].corr - 1.0).abs() < 1e-10);
        let mut buf = Vec::new();
        write_decay_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,m,t,corr,std_err,tvd\n2,4,"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn decay_rejects_oversized() {
        let err = correlation_decay_curve(&[8], |n| n * n, &[0.1], 10, &mut RandomSource::new(1));
        assert!(matches!(err, Err(Error::SizeCap { .. })));
    }
}
