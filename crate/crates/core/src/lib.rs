//! Finite-grid discretization of two-mode continuous-variable density
//! matrices, renormalized cut maps, and entanglement measures for the
//! two-mode squeezed vacuum evolving in a parametric amplifier.
//!
//! The numerical path (sample the position kernel, normalize, reduce,
//! diagonalize) is always paired with a closed-form reference path so that
//! every number produced here can be checked against its analytic value.
//!
//! Module map:
//!
//! - [`densmat`]: hermitian matrices, density matrices, partial trace and transpose
//! - [`gaussian_state`]: amplifier parameters, the amplitude `eta(t)` and the wavefunction
//! - [`discretizer`]: the kernel-to-matrix map and island checks
//! - [`cutmap`]: projector cut maps, odd/even maps, preservation diagnostics
//! - [`measures`]: entropies, logarithmic negativity, closed forms
//! - [`covariance`]: finite-difference covariance estimators and a quadrature oracle
//! - [`experiment`]: configuration, sweeps, CSV output and the validation runner

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod covariance;
pub mod cutmap;
pub mod densmat;
pub mod discretizer;
mod error;
pub mod experiment;
pub mod gaussian_state;
pub mod measures;

pub use error::{Error, Result};

pub use num_complex::Complex64;
