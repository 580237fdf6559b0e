//! Hypervolume- and R2-based expected improvement for Bayesian multiobjective
//! optimization.
//!
//! The crate is organized bottom-up:
//!
//! * [`geometry`]: dominance, Pareto filtering, dominated-region boxes,
//!   hypervolume and its cone / desirability-weighted variants.
//! * [`gaussian`]: normal CDF/PDF and the scalar expected-improvement kernels.
//! * [`ehvi`]: expected hypervolume improvement through the coordinate-wise EI
//!   transform, with weighted, cone and truncated variants and Monte-Carlo
//!   oracles.
//! * [`r2`]: Tchebycheff scalarizations, envelopes, discrete and integral R2,
//!   shadows and simplex quadrature.
//! * [`er2i`]: expected R2 improvement acquisitions.
//! * [`gp`]: a small scalar Gaussian-process regressor.
//! * [`bo`]: the sequential optimization loops.
//!
//! All objective vectors are handled internally in minimization orientation.

// `!(x > 0.0)` style guards are there to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bo;
pub mod ehvi;
pub mod er2i;
pub mod error;
pub mod gaussian;
pub mod geometry;
pub mod gp;
pub mod quad;
pub mod r2;
pub mod sampling;

pub use error::{Error, Result};
