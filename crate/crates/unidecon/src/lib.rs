//! Nonparametric maximum likelihood estimation in the uniform deconvolution
//! problem.
//!
//! One observes sums S = U + V where U has the unknown distribution function
//! F0 on the nonnegative reals and V is uniform noise — either Uniform(0,1)
//! (the *fixed* model) or Uniform(0,E) with an observable random exposure
//! length E (the *mixed* model). The crate provides:
//!
//! * [`dist`] — distribution models, samplers, and the convolution densities
//!   of the observed sums;
//! * [`censor`] — the transforms carrying deconvolution samples to interval
//!   censoring data (current status and case m), and the support/boundary
//!   structure of the maximum likelihood class;
//! * [`mle`] — the one-step cusum/PAVA estimator for the current-status case,
//!   the iterative convex minorant solver for the general case, and the
//!   Fenchel optimality certificate;
//! * [`smoothfn`] — score-function machinery for smooth functionals (mean,
//!   kernel density, smoothed CDF) with plug-in and theoretical variances;
//! * [`mc`] — a deterministic, data-parallel Monte Carlo engine producing the
//!   scaled variance curves and rate diagnostics that compare the competing
//!   asymptotic descriptions of the estimator;
//! * [`io`] — the CSV formats shared with the command line tool.
//!
//! Parallel execution of Monte Carlo replications is enabled by the default
//! `parallel` feature. Disabling it removes the rayon dependency; results are
//! bit-identical either way.

// Validation guards use negated comparisons (`!(x > 0.0)`) on purpose: they
// reject NaN parameters, which the suggested direct comparison would let
// through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod censor;
pub mod dist;
pub mod io;
pub mod isotonic;
pub mod mc;
pub mod mle;
pub mod quad;
pub mod smoothfn;
pub mod step;

pub use dist::{DistributionModel, ModelKind, ObservationSet, SeedSpec};
pub use step::StepDistribution;
