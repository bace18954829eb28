use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::sampling::{derive_stream, Matrix, Seed};
use crate::statistic::{make_coefficient, CoefficientMatrix};
use crate::{Error, Result};

/// Stream index reserved for deterministic coefficient construction;
/// replicate indices are always far below this.
pub(crate) const COEFFICIENT_STREAM_INDEX: u64 = u64::MAX;

/// Experiment scenario. Each maps to one limit statement: a single entry,
/// the n-cycle trace, a conditioned cycle type, the uniform-permutation
/// trace, the cycle-count CLT, the fixed-point Poisson limit, and the three
/// numeric diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    SingleEntry,
    CycleTrace,
    FixedCycleType,
    UniformPermTrace,
    Goncharov,
    FixedPoints,
    LyapunovScaling,
    VarianceCheck,
    MomentCheck,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::SingleEntry => "single_entry",
            ScenarioKind::CycleTrace => "cycle_trace",
            ScenarioKind::FixedCycleType => "fixed_cycle_type",
            ScenarioKind::UniformPermTrace => "uniform_perm_trace",
            ScenarioKind::Goncharov => "goncharov",
            ScenarioKind::FixedPoints => "fixed_points",
            ScenarioKind::LyapunovScaling => "lyapunov_scaling",
            ScenarioKind::VarianceCheck => "variance_check",
            ScenarioKind::MomentCheck => "moment_check",
        }
    }
}

/// Scenario-specific parameters. Indices (`a`, `b`, `rows`, `cols`) are
/// 1-based in the config file, matching the usual matrix-entry notation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle_type: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cols: Option<Vec<usize>>,
}

/// Declarative coefficient-matrix family. `single_entry(a, b)` places
/// `sqrt(n)` at matrix position `(b, a)` so that the trace statistic picks
/// out entry `(a, b)` of `M P Mᵀ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientFamily {
    Identity,
    SingleEntry { a: usize, b: usize },
    DiagonalAlpha { alpha: f64 },
    ZeroDiagonalRandom,
    Csv { path: PathBuf },
}

/// Declarative, reproducible Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioKind,
    #[serde(default)]
    pub scenario_params: ScenarioParams,
    pub n: usize,
    pub replicates: usize,
    pub seed: Seed,
    pub coefficient: CoefficientFamily,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(json)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!(
                "n must be at least 2, got {}",
                self.n
            )));
        }
        if self.replicates < 1 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        Ok(())
    }
}

/// Parses an `n x n` coefficient matrix from plain CSV: `n` rows of `n`
/// comma-separated decimals, no header.
pub fn load_coefficient_csv(path: &Path, n: usize) -> Result<Matrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut data = Vec::with_capacity(n * n);
    let mut rows = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n {
            return Err(Error::MalformedCsv {
                path: path.to_path_buf(),
                reason: format!("line {}: expected {} fields, got {}", lineno + 1, n, fields.len()),
            });
        }
        for f in fields {
            let v: f64 = f.trim().parse().map_err(|_| Error::MalformedCsv {
                path: path.to_path_buf(),
                reason: format!("line {}: cannot parse '{}'", lineno + 1, f.trim()),
            })?;
            data.push(v);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::MalformedCsv {
            path: path.to_path_buf(),
            reason: format!("expected {} rows, got {}", n, rows),
        });
    }
    Matrix::from_data(n, data)
}

/// Builds and normalizes the coefficient matrix of a family at dimension `n`.
///
/// The `zero_diagonal_random` family derives its entries from a dedicated
/// stream of `seed`, so it is reproducible and independent of the
/// replicate streams.
pub fn build_coefficient(
    family: &CoefficientFamily,
    n: usize,
    seed: Seed,
) -> Result<CoefficientMatrix> {
    let matrix = match family {
        CoefficientFamily::Identity => Matrix::identity(n),
        CoefficientFamily::SingleEntry { a, b } => {
            for &idx in [a, b].iter() {
                if *idx == 0 || *idx > n {
                    return Err(Error::InvalidCoefficient {
                        n,
                        reason: format!("single_entry index {idx} outside 1..={n}"),
                    });
                }
            }
            let mut m = Matrix::zeros(n);
            m.set(b - 1, a - 1, (n as f64).sqrt());
            m
        }
        CoefficientFamily::DiagonalAlpha { alpha } => {
            if !(*alpha > 0.0 && *alpha <= 1.0) {
                return Err(Error::InvalidCoefficient {
                    n,
                    reason: format!("alpha must lie in (0, 1], got {alpha}"),
                });
            }
            // Non-integral alpha*n is rounded to the nearest entry count and
            // the entries rescaled so Tr(A Aᵀ) = n stays exact.
            let k = ((alpha * n as f64).round() as usize).clamp(1, n);
            let value = (n as f64 / k as f64).sqrt();
            let mut m = Matrix::zeros(n);
            for i in 0..k {
                m.set(i, i, value);
            }
            m
        }
        CoefficientFamily::ZeroDiagonalRandom => {
            let mut stream = derive_stream(seed, COEFFICIENT_STREAM_INDEX);
            let mut m = Matrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        m.set(i, j, stream.standard_gaussian());
                    }
                }
            }
            m
        }
        CoefficientFamily::Csv { path } => load_coefficient_csv(path, n)?,
    };
    make_coefficient(matrix, true)
}
