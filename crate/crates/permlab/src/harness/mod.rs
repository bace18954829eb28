//! Experiment orchestration: declarative configs, the deterministic Monte
//! Carlo runner with its scenario-specific sampling shortcuts, result
//! persistence, and the standalone diagnostics.

mod config;
mod diagnostics;
mod run;

pub use config::{
    build_coefficient, load_coefficient_csv, CoefficientFamily, ExperimentConfig, ScenarioKind,
    ScenarioParams,
};
pub use diagnostics::{
    goncharov_check, lyapunov_diagnostic, variance_check, GoncharovReport, LyapunovPoint,
    VarianceReport,
};
pub use run::{
    format_sample, persist, read_samples_csv, run_experiment, simulate, EmpiricalSummary,
};
