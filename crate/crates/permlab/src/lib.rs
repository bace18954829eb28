//! Simulation and exact-computation laboratory for the entries of random
//! permutation matrices conjugated by Haar orthogonal matrices.
//!
//! The crate is organized around five subsystems:
//!
//! * [`sampling`] — seed-reproducible generation of Gaussian matrices, Haar
//!   orthogonal matrices and uniform permutations, plus cycle utilities.
//! * [`statistic`] — coefficient-matrix bookkeeping and evaluation of the
//!   central statistics `Tr(A M P Mᵀ)`, single entries and martingale
//!   increments.
//! * [`weingarten`] — an exact rational oracle for Haar orthogonal moments
//!   via pair partitions and Gram-matrix inversion.
//! * [`limitdist`] — limit-law CDFs (Gaussian, shifted Gaussian, compound
//!   Poisson-Gaussian) and goodness-of-fit distances.
//! * [`harness`] — declarative, reproducible Monte Carlo experiments with
//!   CSV/JSON persistence.

pub mod error;
pub mod harness;
pub mod limitdist;
pub mod sampling;
pub mod statistic;
pub mod weingarten;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
