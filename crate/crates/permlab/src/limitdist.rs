//! Limit laws and goodness-of-fit distances.
//!
//! The three limit laws in play are `N(0, v)`, the shifted law `Z + mu`, and
//! the compound law `Z + sY` with `Z ~ N(0, 1-s^2)` independent of
//! `Y ~ Pois(1)`.

use crate::{Error, Result};

/// Poisson(1) truncation: tail mass beyond this index is below 1e-12.
const POISSON_CUTOFF: usize = 24;

/// Parametric limit distribution.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum LimitLaw {
    /// `N(0, variance)`; variance 0 degenerates to a point mass at 0.
    Gaussian { variance: f64 },
    /// `N(shift, variance)`.
    ShiftedGaussian { variance: f64, shift: f64 },
    /// `Z + sY` with `Z ~ N(0, 1-s^2)`, `Y ~ Pois(1)`; requires `s^2 <= 1`.
    PoissonGaussian { s: f64 },
}

impl LimitLaw {
    pub fn gaussian(variance: f64) -> Result<Self> {
        if variance < 0.0 {
            return Err(Error::NegativeVariance(variance));
        }
        Ok(LimitLaw::Gaussian { variance })
    }

    pub fn shifted_gaussian(variance: f64, shift: f64) -> Result<Self> {
        if variance < 0.0 {
            return Err(Error::NegativeVariance(variance));
        }
        Ok(LimitLaw::ShiftedGaussian { variance, shift })
    }

    pub fn poisson_gaussian(s: f64) -> Result<Self> {
        if !(s * s <= 1.0) {
            return Err(Error::ShiftOutOfRange(s));
        }
        Ok(LimitLaw::PoissonGaussian { s })
    }
}

/// CDF of `N(0, variance)` at `x`, evaluated via the complementary error
/// function. Variance 0 yields the step function at 0.
pub fn normal_cdf(x: f64, variance: f64) -> Result<f64> {
    if variance < 0.0 {
        return Err(Error::NegativeVariance(variance));
    }
    if variance == 0.0 {
        return Ok(if x < 0.0 { 0.0 } else { 1.0 });
    }
    Ok(0.5 * libm::erfc(-x / (2.0 * variance).sqrt()))
}

/// Poisson(1) probability mass `e^{-1} / f!`.
pub fn poisson_pmf(f: usize) -> f64 {
    let mut mass = (-1.0f64).exp();
    for k in 1..=f {
        mass /= k as f64;
    }
    mass
}

/// CDF of a [`LimitLaw`] at `x`.
///
/// The compound case is the Poisson mixture
/// `sum_{f >= 0} e^{-1}/f! * Phi((x - f s) / sqrt(1 - s^2))`, truncated once
/// the remaining Poisson tail mass drops below 1e-12. The degenerate case
/// `s^2 = 1` reduces to the pure Poisson step function.
pub fn limit_cdf(law: &LimitLaw, x: f64) -> f64 {
    match *law {
        LimitLaw::Gaussian { variance } => normal_cdf(x, variance).expect("validated"),
        LimitLaw::ShiftedGaussian { variance, shift } => {
            normal_cdf(x - shift, variance).expect("validated")
        }
        LimitLaw::PoissonGaussian { s } => {
            let variance = (1.0 - s * s).max(0.0);
            let mut cdf = 0.0;
            let mut total = 0.0;
            for f in 0..=POISSON_CUTOFF {
                let mass = poisson_pmf(f);
                cdf += mass * normal_cdf(x - f as f64 * s, variance).expect("validated");
                total += mass;
                if 1.0 - total < 1e-12 {
                    break;
                }
            }
            // Renormalize by the truncated mass so the mixture stays an
            // exact probability distribution (e.g. s = 0 gives Phi(x)).
            (cdf / total).clamp(0.0, 1.0)
        }
    }
}

/// Sorted empirical sample.
#[derive(Debug, Clone)]
pub struct EmpiricalDistribution {
    values: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Sorts the sample; rejects empty or non-finite input.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteEntry);
        }
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        Ok(EmpiricalDistribution { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Kolmogorov-Smirnov distance between an empirical sample and a limit law:
/// `sup_i max(|i/N - F(x_i)|, |(i-1)/N - F(x_i)|)`.
pub fn ks_distance(emp: &EmpiricalDistribution, law: &LimitLaw) -> f64 {
    let n = emp.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in emp.values().iter().enumerate() {
        let f = limit_cdf(law, x);
        let upper = ((i + 1) as f64 / n - f).abs();
        let lower = (i as f64 / n - f).abs();
        sup = sup.max(upper).max(lower);
    }
    sup
}

/// Total variation distance between an integer histogram over `{0, .., F}`
/// plus an overflow bucket and the Poisson(1) law:
/// half the L1 gap, with the overflow bucket compared against the tail mass.
pub fn total_variation_poisson(counts: &[u64], overflow: u64) -> f64 {
    let total: u64 = counts.iter().sum::<u64>() + overflow;
    if total == 0 {
        return 0.0;
    }
    let tf = total as f64;
    let mut gap = 0.0;
    let mut tail = 1.0;
    for (f, &c) in counts.iter().enumerate() {
        let mass = poisson_pmf(f);
        gap += (c as f64 / tf - mass).abs();
        tail -= mass;
    }
    gap += (overflow as f64 / tf - tail.max(0.0)).abs();
    0.5 * gap
}

/// Builds the histogram for [`total_variation_poisson`] from integer-valued
/// samples (values are rounded to the nearest integer; negatives are
/// clamped into the overflow bucket only if any appear, which a fixed-point
/// count never does).
pub fn poisson_histogram(samples: &[f64], cutoff: usize) -> (Vec<u64>, u64) {
    let mut counts = vec![0u64; cutoff + 1];
    let mut overflow = 0u64;
    for &v in samples {
        let k = v.round();
        if (0.0..=cutoff as f64).contains(&k) {
            counts[k as usize] += 1;
        } else {
            overflow += 1;
        }
    }
    (counts, overflow)
}

/// Quantile by bisection on the CDF; used to draw synthetic samples from a
/// law in validation code.
pub fn quantile(law: &LimitLaw, p: f64) -> f64 {
    let (mut lo, mut hi) = (-1e3, 1e3);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if limit_cdf(law, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
