use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{build_coefficient, ExperimentConfig, ScenarioKind};
use crate::limitdist::{
    ks_distance, poisson_histogram, total_variation_poisson, EmpiricalDistribution, LimitLaw,
};
use crate::sampling::{
    canonical_permutation, derive_stream, haar_orthogonal, haar_stiefel, uniform_permutation,
    CycleType, Permutation, RngStream, Seed,
};
use crate::statistic::{entry_statistic_from_rows, first_increment, variance_prediction, CoefficientMatrix};
use crate::weingarten::MomentSpec;
use crate::{Error, Result};

/// Histogram width used when comparing integer-valued samples to Poisson(1).
const HISTOGRAM_CUTOFF: usize = 30;

/// Below this value of `1 - s_n^2` the compound law is treated as the pure
/// Poisson step function and measured in total variation instead of KS.
const DEGENERATE_VARIANCE_TOL: f64 = 1e-9;

/// Result record of one experiment, serialized as `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSummary {
    pub scenario: ScenarioKind,
    pub n: usize,
    pub replicates: usize,
    pub seed: Seed,
    pub mean: f64,
    pub variance: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ks: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tv: Option<f64>,
    pub limit: Option<LimitLaw>,
    pub s_n: f64,
    pub c_n: f64,
    /// `None` in contexts that demand byte-identical output across runs.
    pub elapsed_seconds: Option<f64>,
}

/// Per-replicate evaluation plan, resolved once from the config.
enum Plan {
    /// 0-based entry indices.
    SingleEntry { a: usize, b: usize },
    Trace { perm: Option<Permutation> },
    CycleCount,
    FixedPointCount,
    FirstIncrement,
    /// 0-based matrix indices.
    MomentProduct { rows: Vec<usize>, cols: Vec<usize> },
}

fn index_param(value: Option<usize>, name: &str, n: usize) -> Result<usize> {
    let v = value
        .ok_or_else(|| Error::InvalidConfig(format!("scenario requires parameter '{name}'")))?;
    if v == 0 || v > n {
        return Err(Error::InvalidConfig(format!(
            "parameter '{name}' = {v} outside 1..={n}"
        )));
    }
    Ok(v - 1)
}

fn index_list(value: &Option<Vec<usize>>, name: &str, n: usize) -> Result<Vec<usize>> {
    let list = value
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig(format!("scenario requires parameter '{name}'")))?;
    list.iter()
        .map(|&v| {
            if v == 0 || v > n {
                Err(Error::InvalidConfig(format!(
                    "parameter '{name}' contains {v}, outside 1..={n}"
                )))
            } else {
                Ok(v - 1)
            }
        })
        .collect()
}

fn build_plan(config: &ExperimentConfig) -> Result<Plan> {
    let n = config.n;
    let params = &config.scenario_params;
    Ok(match config.scenario {
        ScenarioKind::SingleEntry => Plan::SingleEntry {
            a: index_param(params.a, "a", n)?,
            b: index_param(params.b, "b", n)?,
        },
        ScenarioKind::CycleTrace => Plan::Trace {
            perm: Some(canonical_permutation(&CycleType::new(vec![n])?)),
        },
        ScenarioKind::FixedCycleType => {
            let parts = params.cycle_type.clone().ok_or_else(|| {
                Error::InvalidConfig("scenario requires parameter 'cycle_type'".into())
            })?;
            let ct = CycleType::new(parts)?;
            if ct.n() != n {
                return Err(Error::InvalidConfig(format!(
                    "cycle_type sums to {}, expected n = {n}",
                    ct.n()
                )));
            }
            Plan::Trace {
                perm: Some(canonical_permutation(&ct)),
            }
        }
        ScenarioKind::UniformPermTrace => Plan::Trace { perm: None },
        ScenarioKind::Goncharov => Plan::CycleCount,
        ScenarioKind::FixedPoints => Plan::FixedPointCount,
        ScenarioKind::LyapunovScaling | ScenarioKind::VarianceCheck => Plan::FirstIncrement,
        ScenarioKind::MomentCheck => {
            let raw_rows = params.rows.clone().ok_or_else(|| {
                Error::InvalidConfig("scenario requires parameter 'rows'".into())
            })?;
            let raw_cols = params.cols.clone().ok_or_else(|| {
                Error::InvalidConfig("scenario requires parameter 'cols'".into())
            })?;
            // Structural validation first (equal even length <= 8), then the
            // oracle precondition n >= 2r, then index ranges.
            let spec = MomentSpec::new(raw_rows, raw_cols)?;
            if n < 2 * spec.order() {
                return Err(Error::BelowInvertibilityRegime { n, r: spec.order() });
            }
            let rows = index_list(&params.rows, "rows", n)?;
            let cols = index_list(&params.cols, "cols", n)?;
            Plan::MomentProduct { rows, cols }
        }
    })
}

/// `Tr(A M P Mᵀ) = sum_k m_kᵀ A m_{sigma(k)}` through a single matrix
/// product `C = A M`: `sum_{i,k} M[i,k] C[i, sigma(k)]`.
fn trace_general(coef: &CoefficientMatrix, m: &crate::sampling::Matrix, p: &Permutation) -> Result<f64> {
    let n = coef.n();
    let c = coef.matrix().matmul(m)?;
    let mut sum = 0.0;
    for i in 0..n {
        let crow = c.row(i);
        let mrow = m.row(i);
        for k in 0..n {
            sum += mrow[k] * crow[p.apply(k)];
        }
    }
    Ok(sum)
}

/// Evaluates one replicate. The sampling order is part of the reproducibility
/// contract: the orthogonal matrix (or its sampled rows/columns) is drawn
/// first, then the permutation if the scenario needs one.
fn eval_replicate(
    plan: &Plan,
    coef: &CoefficientMatrix,
    n: usize,
    stream: &mut RngStream,
) -> Result<f64> {
    match plan {
        Plan::SingleEntry { a, b } => {
            // Mᵀ is Haar when M is, so k sampled orthonormal columns serve
            // as the k needed rows of M.
            let k = if a == b { 1 } else { 2 };
            let rows = haar_stiefel(n, k, stream)?;
            let p = uniform_permutation(n, stream)?;
            let row_a = &rows[0];
            let row_b = &rows[k - 1];
            entry_statistic_from_rows(row_a, row_b, &p)
        }
        Plan::Trace { perm } => {
            if coef.is_diagonal() {
                // Only rows with a nonzero diagonal entry contribute:
                // Tr = sum_i a_ii sum_k M[i, sigma(k)] M[i, k].
                let idx: Vec<usize> =
                    (0..n).filter(|&i| coef.matrix().get(i, i) != 0.0).collect();
                let rows = haar_stiefel(n, idx.len(), stream)?;
                let p = match perm {
                    Some(p) => p.clone(),
                    None => uniform_permutation(n, stream)?,
                };
                let mut sum = 0.0;
                for (j, &i) in idx.iter().enumerate() {
                    let row = &rows[j];
                    let inner: f64 = (0..n).map(|k| row[p.apply(k)] * row[k]).sum();
                    sum += coef.matrix().get(i, i) * inner;
                }
                Ok(sum)
            } else {
                let m = haar_orthogonal(n, stream)?;
                let p = match perm {
                    Some(p) => p.clone(),
                    None => uniform_permutation(n, stream)?,
                };
                trace_general(coef, &m, &p)
            }
        }
        Plan::CycleCount => Ok(uniform_permutation(n, stream)?.cycle_count() as f64),
        Plan::FixedPointCount => Ok(uniform_permutation(n, stream)?.fixed_points() as f64),
        Plan::FirstIncrement => {
            let cols = haar_stiefel(n, 2, stream)?;
            first_increment(coef, &cols[0], &cols[1])
        }
        Plan::MomentProduct { rows, cols } => {
            let m = haar_orthogonal(n, stream)?;
            let mut prod = 1.0;
            for (&i, &j) in rows.iter().zip(cols) {
                prod *= m.get(i, j);
            }
            Ok(prod)
        }
    }
}

fn sample_mean_variance(samples: &[f64]) -> (f64, f64) {
    let nf = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let variance = if samples.len() > 1 {
        samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0)
    } else {
        0.0
    };
    (mean, variance)
}

/// Picks the limit law and the goodness-of-fit measure for a scenario.
///
/// For `goncharov` the KS value refers to the normalized cycle count
/// `(K_n - log n) / sqrt(log n)` against `N(0, 1)`, not to the raw samples.
fn fit_limit(
    scenario: ScenarioKind,
    coef: &CoefficientMatrix,
    n: usize,
    samples: &[f64],
    shift: f64,
) -> Result<(Option<LimitLaw>, Option<f64>, Option<f64>)> {
    let s_n = coef.s_n();
    let c_n = coef.c_n();
    Ok(match scenario {
        ScenarioKind::SingleEntry => {
            let law = LimitLaw::gaussian(1.0)?;
            let emp = EmpiricalDistribution::new(samples.to_vec())?;
            (Some(law), Some(ks_distance(&emp, &law)), None)
        }
        ScenarioKind::CycleTrace => {
            let law = LimitLaw::gaussian((1.0 - c_n).max(0.0))?;
            let emp = EmpiricalDistribution::new(samples.to_vec())?;
            (Some(law), Some(ks_distance(&emp, &law)), None)
        }
        ScenarioKind::FixedCycleType => {
            let law = LimitLaw::shifted_gaussian((1.0 - s_n * s_n).max(0.0), shift)?;
            let emp = EmpiricalDistribution::new(samples.to_vec())?;
            (Some(law), Some(ks_distance(&emp, &law)), None)
        }
        ScenarioKind::UniformPermTrace => {
            let s = s_n.clamp(-1.0, 1.0);
            let law = LimitLaw::poisson_gaussian(s)?;
            if 1.0 - s * s < DEGENERATE_VARIANCE_TOL {
                let (counts, overflow) = poisson_histogram(samples, HISTOGRAM_CUTOFF);
                (Some(law), None, Some(total_variation_poisson(&counts, overflow)))
            } else {
                let emp = EmpiricalDistribution::new(samples.to_vec())?;
                (Some(law), Some(ks_distance(&emp, &law)), None)
            }
        }
        ScenarioKind::Goncharov => {
            let log_n = (n as f64).ln();
            let normalized: Vec<f64> =
                samples.iter().map(|&k| (k - log_n) / log_n.sqrt()).collect();
            let law = LimitLaw::gaussian(1.0)?;
            let emp = EmpiricalDistribution::new(normalized)?;
            (Some(law), Some(ks_distance(&emp, &law)), None)
        }
        ScenarioKind::FixedPoints => {
            let (counts, overflow) = poisson_histogram(samples, HISTOGRAM_CUTOFF);
            (None, None, Some(total_variation_poisson(&counts, overflow)))
        }
        ScenarioKind::LyapunovScaling | ScenarioKind::VarianceCheck => {
            let law = if n >= 4 {
                Some(LimitLaw::gaussian(variance_prediction(coef, n)?.max(0.0))?)
            } else {
                None
            };
            (law, None, None)
        }
        ScenarioKind::MomentCheck => (None, None, None),
    })
}

/// Runs the Monte Carlo experiment without touching the filesystem.
///
/// Replicate `i` always uses `derive_stream(seed, i)`, so the sample vector
/// is byte-identical at any rayon thread count.
pub fn simulate(config: &ExperimentConfig) -> Result<(Vec<f64>, EmpiricalSummary)> {
    config.validate()?;
    let n = config.n;
    let coef = build_coefficient(&config.coefficient, n, config.seed)?;
    let plan = build_plan(config)?;
    if matches!(plan, Plan::CycleCount | Plan::FixedPointCount)
        && config.coefficient != super::config::CoefficientFamily::Identity
    {
        eprintln!(
            "note: scenario '{}' is a pure permutation statistic; the coefficient matrix is ignored",
            config.scenario.name()
        );
    }
    let start = Instant::now();
    let samples: Vec<f64> = (0..config.replicates)
        .into_par_iter()
        .map(|i| {
            let mut stream = derive_stream(config.seed, i as u64);
            eval_replicate(&plan, &coef, n, &mut stream)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, variance) = sample_mean_variance(&samples);
    // The conditioned-cycle-type limit is shifted by s_n times the number of
    // fixed points of the conditioning permutation.
    let shift = match &plan {
        Plan::Trace { perm: Some(p) } => coef.s_n() * p.fixed_points() as f64,
        _ => 0.0,
    };
    let (limit, ks, tv) = fit_limit(config.scenario, &coef, n, &samples, shift)?;
    let summary = EmpiricalSummary {
        scenario: config.scenario,
        n,
        replicates: config.replicates,
        seed: config.seed,
        mean,
        variance,
        ks,
        tv,
        limit,
        s_n: coef.s_n(),
        c_n: coef.c_n(),
        elapsed_seconds: Some(start.elapsed().as_secs_f64()),
    };
    Ok((samples, summary))
}

/// Runs the experiment and persists `samples.csv`, `summary.json` and
/// `coefficient.csv` in the configured output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<EmpiricalSummary> {
    let (samples, summary) = simulate(config)?;
    let coef = build_coefficient(&config.coefficient, config.n, config.seed)?;
    persist(&config.output_dir, &summary, &samples)?;
    write_atomic(
        &config.output_dir.join("coefficient.csv"),
        &coefficient_csv(&coef),
    )?;
    Ok(summary)
}

/// Formats a sample with 17 significant digits, enough to round-trip f64.
pub fn format_sample(v: f64) -> String {
    format!("{v:.16e}")
}

fn samples_csv(samples: &[f64]) -> String {
    let mut out = String::with_capacity(samples.len() * 26 + 16);
    out.push_str("replicate,value\n");
    for (i, &v) in samples.iter().enumerate() {
        out.push_str(&i.to_string());
        out.push(',');
        out.push_str(&format_sample(v));
        out.push('\n');
    }
    out
}

fn coefficient_csv(coef: &CoefficientMatrix) -> String {
    let n = coef.n();
    let mut out = String::new();
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format_sample(coef.matrix().get(i, j))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut file = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        file.write_all(content.as_bytes()).map_err(|e| Error::io(&tmp, e))?;
        file.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Writes `samples.csv` and `summary.json` atomically (temp file + rename).
pub fn persist(dir: &Path, summary: &EmpiricalSummary, samples: &[f64]) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let samples_path = dir.join("samples.csv");
    let summary_path = dir.join("summary.json");
    write_atomic(&samples_path, &samples_csv(samples))?;
    let mut json = serde_json::to_string_pretty(summary)?;
    json.push('\n');
    write_atomic(&summary_path, &json)?;
    Ok((samples_path, summary_path))
}

/// Reads a `samples.csv` produced by [`persist`] back into memory.
pub fn read_samples_csv(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some("replicate,value") => {}
        _ => {
            return Err(Error::MalformedCsv {
                path: path.to_path_buf(),
                reason: "missing 'replicate,value' header".into(),
            })
        }
    }
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (_, value) = line.split_once(',').ok_or_else(|| Error::MalformedCsv {
            path: path.to_path_buf(),
            reason: format!("line {}: expected 'replicate,value'", lineno + 2),
        })?;
        let v: f64 = value.trim().parse().map_err(|_| Error::MalformedCsv {
            path: path.to_path_buf(),
            reason: format!("line {}: cannot parse '{}'", lineno + 2, value.trim()),
        })?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(out)
}
