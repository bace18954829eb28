//! Python bindings: samplers, the exact moment oracle, limit-law CDFs, the
//! central statistics and the experiment runner.
//!
//! Index conventions match the Rust core: permutations and matrix indices
//! are 0-based here; only the CLI and config files use 1-based indices.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use permlab::harness::{self, ExperimentConfig};
use permlab::limitdist::{self, EmpiricalDistribution, LimitLaw};
use permlab::sampling::{derive_stream, haar_orthogonal, uniform_permutation, Matrix, Permutation, Seed};
use permlab::statistic::{make_coefficient, variance_prediction};
use permlab::weingarten::{self, MomentSpec};

fn err<T>(e: permlab::Error) -> PyResult<T> {
    Err(PyValueError::new_err(e.to_string()))
}

fn matrix_from_rows(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    let n = rows.len();
    let mut data = Vec::with_capacity(n * n);
    for row in &rows {
        if row.len() != n {
            return Err(PyValueError::new_err("matrix rows must form a square"));
        }
        data.extend_from_slice(row);
    }
    Matrix::from_data(n, data).or_else(err)
}

fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.n()).map(|i| m.row(i).to_vec()).collect()
}

/// Sample an n x n Haar orthogonal matrix as a list of rows.
#[pyfunction]
fn haar_sample(n: usize, seed: u64, stream: u64) -> PyResult<Vec<Vec<f64>>> {
    let mut s = derive_stream(Seed(seed), stream);
    haar_orthogonal(n, &mut s).map(|m| matrix_to_rows(&m)).or_else(err)
}

/// Sample a uniform permutation of {0, .., n-1} in one-line notation.
#[pyfunction]
fn perm_sample(n: usize, seed: u64, stream: u64) -> PyResult<Vec<usize>> {
    let mut s = derive_stream(Seed(seed), stream);
    uniform_permutation(n, &mut s).map(|p| p.map().to_vec()).or_else(err)
}

/// Exact Haar moment E[prod M[rows[k], cols[k]]] as (fraction string, float).
/// Index labels are arbitrary; only their coincidence pattern matters.
#[pyfunction]
fn haar_moment(rows: Vec<usize>, cols: Vec<usize>, n: usize) -> PyResult<(String, f64)> {
    let spec = MomentSpec::new(rows, cols).or_else(err)?;
    let exact = weingarten::haar_moment(&spec, n).or_else(err)?;
    Ok((
        weingarten::format_rational(&exact),
        weingarten::rational_to_f64(&exact),
    ))
}

/// The exponent d with E[prod] = Theta(n^d), or None for an exactly zero moment.
#[pyfunction]
fn moment_order(rows: Vec<usize>, cols: Vec<usize>) -> PyResult<Option<i64>> {
    let spec = MomentSpec::new(rows, cols).or_else(err)?;
    weingarten::moment_order(&spec).or_else(err)
}

/// CDF of N(0, variance) at x.
#[pyfunction]
fn normal_cdf(x: f64, variance: f64) -> PyResult<f64> {
    limitdist::normal_cdf(x, variance).or_else(err)
}

/// CDF of the compound law Z + sY, Z ~ N(0, 1-s^2), Y ~ Pois(1).
#[pyfunction]
fn poisson_gaussian_cdf(x: f64, s: f64) -> PyResult<f64> {
    let law = LimitLaw::poisson_gaussian(s).or_else(err)?;
    Ok(limitdist::limit_cdf(&law, x))
}

/// Tr(A M P Mt) for coefficient rows `a`, orthogonal rows `m` and a
/// permutation in one-line notation (0-based).
#[pyfunction]
fn trace_statistic(a: Vec<Vec<f64>>, m: Vec<Vec<f64>>, perm: Vec<usize>) -> PyResult<f64> {
    let coef = make_coefficient(matrix_from_rows(a)?, false).or_else(err)?;
    let matrix = matrix_from_rows(m)?;
    let p = Permutation::new(perm).or_else(err)?;
    permlab::statistic::trace_statistic(&coef, &matrix, &p).or_else(err)
}

/// Exact variance of one martingale increment for a coefficient matrix.
#[pyfunction]
fn increment_variance(a: Vec<Vec<f64>>) -> PyResult<f64> {
    let matrix = matrix_from_rows(a)?;
    let n = matrix.n();
    let coef = make_coefficient(matrix, true).or_else(err)?;
    variance_prediction(&coef, n).or_else(err)
}

/// KS distance between samples and N(shift, variance).
#[pyfunction]
fn ks_gaussian(samples: Vec<f64>, variance: f64, shift: f64) -> PyResult<f64> {
    let law = LimitLaw::shifted_gaussian(variance, shift).or_else(err)?;
    let emp = EmpiricalDistribution::new(samples).or_else(err)?;
    Ok(limitdist::ks_distance(&emp, &law))
}

/// KS distance between samples and the compound law Z + sY.
#[pyfunction]
fn ks_poisson_gaussian(samples: Vec<f64>, s: f64) -> PyResult<f64> {
    let law = LimitLaw::poisson_gaussian(s).or_else(err)?;
    let emp = EmpiricalDistribution::new(samples).or_else(err)?;
    Ok(limitdist::ks_distance(&emp, &law))
}

/// Run an experiment from a JSON config string; returns the summary as JSON.
/// Artifacts are written to the configured output directory.
#[pyfunction]
fn run_experiment(config_json: &str) -> PyResult<String> {
    let config = ExperimentConfig::from_json(config_json).or_else(err)?;
    let summary = harness::run_experiment(&config).or_else(err)?;
    serde_json::to_string_pretty(&summary).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn permlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(haar_sample, m)?)?;
    m.add_function(wrap_pyfunction!(perm_sample, m)?)?;
    m.add_function(wrap_pyfunction!(haar_moment, m)?)?;
    m.add_function(wrap_pyfunction!(moment_order, m)?)?;
    m.add_function(wrap_pyfunction!(normal_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_gaussian_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(trace_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(increment_variance, m)?)?;
    m.add_function(wrap_pyfunction!(ks_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(ks_poisson_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
