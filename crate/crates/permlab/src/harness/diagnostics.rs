//! Numeric diagnostics that sit beside the main experiment runner: the
//! cycle-count CLT check, the Lyapunov fourth-moment scaling probe, and the
//! exact-vs-empirical increment variance comparison.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{build_coefficient, CoefficientFamily};
use crate::limitdist::{ks_distance, EmpiricalDistribution, LimitLaw};
use crate::sampling::{derive_stream, haar_stiefel, uniform_permutation, Seed};
use crate::statistic::{first_increment, variance_prediction};
use crate::{Error, Result};

/// Summary of the cycle-count central limit theorem check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoncharovReport {
    pub n: usize,
    pub replicates: usize,
    /// Empirical mean of the cycle count; close to `H_n = sum 1/k`.
    pub mean_cycles: f64,
    pub var_cycles: f64,
    pub harmonic: f64,
    /// Fraction of replicates with more than `2 log n` cycles.
    pub frac_above_2log: f64,
    /// KS distance of `(K_n - log n)/sqrt(log n)` against `N(0, 1)`.
    pub ks_normalized: f64,
}

/// One point of the Lyapunov scaling probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovPoint {
    pub n: usize,
    /// Monte Carlo estimate of `E[X_{n,1}^4]`.
    pub fourth_moment: f64,
    pub standard_error: f64,
}

/// Empirical versus exact second moment of the first increment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub n: usize,
    pub replicates: usize,
    pub empirical: f64,
    pub exact: f64,
    /// Standard error of the empirical variance estimate.
    pub standard_error: f64,
}

fn parallel_samples<F>(replicates: usize, seed: Seed, f: F) -> Result<Vec<f64>>
where
    F: Fn(&mut crate::sampling::RngStream) -> Result<f64> + Sync,
{
    (0..replicates)
        .into_par_iter()
        .map(|i| {
            let mut stream = derive_stream(seed, i as u64);
            f(&mut stream)
        })
        .collect()
}

/// Monte Carlo check of the cycle-count CLT for uniform permutations.
pub fn goncharov_check(n: usize, replicates: usize, seed: Seed) -> Result<GoncharovReport> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("n must be at least 2, got {n}")));
    }
    if replicates < 2 {
        return Err(Error::TooFewReplicates { need: 2, got: replicates });
    }
    let samples = parallel_samples(replicates, seed, |stream| {
        Ok(uniform_permutation(n, stream)?.cycle_count() as f64)
    })?;
    let nf = replicates as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let log_n = (n as f64).ln();
    let frac = samples.iter().filter(|&&v| v > 2.0 * log_n).count() as f64 / nf;
    let normalized: Vec<f64> = samples.iter().map(|&k| (k - log_n) / log_n.sqrt()).collect();
    let ks = ks_distance(
        &EmpiricalDistribution::new(normalized)?,
        &LimitLaw::gaussian(1.0)?,
    );
    let harmonic = (1..=n).map(|k| 1.0 / k as f64).sum();
    Ok(GoncharovReport {
        n,
        replicates,
        mean_cycles: mean,
        var_cycles: var,
        harmonic,
        frac_above_2log: frac,
        ks_normalized: ks,
    })
}

/// Estimates `E[X_{n,1}^4]` for one coefficient family across several `n`.
///
/// The fourth moment of the first martingale increment should decay like
/// `n^{-2}`, which is what makes the Lyapunov ratio vanish.
pub fn lyapunov_diagnostic(
    family: &CoefficientFamily,
    ns: &[usize],
    replicates: usize,
    seed: Seed,
) -> Result<Vec<LyapunovPoint>> {
    if replicates < 2 {
        return Err(Error::TooFewReplicates { need: 2, got: replicates });
    }
    let mut points = Vec::with_capacity(ns.len());
    for &n in ns {
        if n < 2 {
            return Err(Error::InvalidConfig(format!("n must be at least 2, got {n}")));
        }
        let coef = build_coefficient(family, n, seed)?;
        let samples = parallel_samples(replicates, seed, |stream| {
            let cols = haar_stiefel(n, 2, stream)?;
            Ok(first_increment(&coef, &cols[0], &cols[1])?.powi(4))
        })?;
        let nf = replicates as f64;
        let mean = samples.iter().sum::<f64>() / nf;
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
        points.push(LyapunovPoint {
            n,
            fourth_moment: mean,
            standard_error: (var / nf).sqrt(),
        });
    }
    Ok(points)
}

/// Compares the empirical variance of the first increment with the exact
/// Weingarten prediction.
pub fn variance_check(
    family: &CoefficientFamily,
    n: usize,
    replicates: usize,
    seed: Seed,
) -> Result<VarianceReport> {
    if replicates < 2 {
        return Err(Error::TooFewReplicates { need: 2, got: replicates });
    }
    let coef = build_coefficient(family, n, seed)?;
    let exact = variance_prediction(&coef, n)?;
    let samples = parallel_samples(replicates, seed, |stream| {
        let cols = haar_stiefel(n, 2, stream)?;
        first_increment(&coef, &cols[0], &cols[1])
    })?;
    let nf = replicates as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let m2 = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let m4 = samples.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / nf;
    // Standard error of a sample variance: sqrt((m4 - m2^2)/N).
    let se = ((m4 - m2 * m2).max(0.0) / nf).sqrt();
    Ok(VarianceReport {
        n,
        replicates,
        empirical: m2,
        exact,
        standard_error: se,
    })
}
