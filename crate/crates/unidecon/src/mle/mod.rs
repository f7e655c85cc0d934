//! Nonparametric maximum likelihood solvers.
//!
//! Two routes to the same estimator: the one-step cusum/PAVA solution of the
//! current-status reduction (valid when every sum lies in [0, 2]), and the
//! iterative convex minorant solver with line search for the general fixed
//! and mixed models, certified by the Fenchel optimality conditions.

mod brute;
mod fenchel;
mod icm;
mod pava;
mod problem;

pub use brute::brute_force_mle;
pub use fenchel::{fenchel_check, w_process, WProcess};
pub use icm::{icm_solve_fixed, icm_solve_mixed, IcmSolution};
pub use pava::cusum_pava_mle;

use thiserror::Error;

use crate::censor::CensorError;
use crate::dist::{ModelKind, ObservationSet};
use crate::step::{StepDistribution, StepError};

#[derive(Debug, Error)]
pub enum MleError {
    #[error(transparent)]
    Censor(#[from] CensorError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error("operation requires a {expected:?}-model sample")]
    WrongModelKind { expected: ModelKind },
    #[error("degenerate likelihood: censoring interval ending at S = {at} has probability below the value floor")]
    DegenerateLikelihood { at: f64 },
    #[error("brute force refuses {count} free points (maximum {max})")]
    TooManyFreePoints { count: usize, max: usize },
    #[error("current-status data is empty")]
    EmptyData,
    #[error("invalid solver configuration: {reason}")]
    BadConfig { reason: String },
}

/// Tuning of the iterative convex minorant solver. Defaults follow the
/// backtracking line-search scheme with an Armijo-type sufficient-increase
/// condition.
#[derive(Debug, Clone, PartialEq)]
pub struct IcmConfig {
    /// Certificate tolerance: both Fenchel residuals must fall below this.
    pub fenchel_tolerance: f64,
    pub max_iterations: usize,
    /// Multiplicative step shrink per backtrack, in (0, 1).
    pub line_search_shrink: f64,
    /// Sufficient-increase slope parameter, in (0, 1).
    pub line_search_slope: f64,
    /// Free values are kept inside [floor, 1 - floor] during iteration so
    /// log terms stay finite; the final certificate uses the values as-is.
    pub value_floor: f64,
}

impl Default for IcmConfig {
    fn default() -> Self {
        IcmConfig {
            fenchel_tolerance: 1e-8,
            max_iterations: 500,
            line_search_shrink: 0.5,
            line_search_slope: 1e-4,
            value_floor: 1e-10,
        }
    }
}

impl IcmConfig {
    pub fn validate(&self) -> Result<(), MleError> {
        let ok = self.fenchel_tolerance > 0.0
            && self.max_iterations > 0
            && (0.0..1.0).contains(&self.line_search_shrink)
            && self.line_search_shrink > 0.0
            && (0.0..1.0).contains(&self.line_search_slope)
            && self.line_search_slope > 0.0
            && self.value_floor > 0.0
            && self.value_floor < self.fenchel_tolerance;
        if ok {
            Ok(())
        } else {
            Err(MleError::BadConfig { reason: format!("{self:?}") })
        }
    }
}

/// Residuals of the two optimality conditions characterizing the maximum
/// likelihood estimator: the largest tail sum of the score process (must be
/// <= 0 up to tolerance) and the inner product of F with the score jumps
/// (must vanish).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FenchelReport {
    pub max_tail_sum: f64,
    pub inner_product: f64,
    pub tolerance: f64,
    pub satisfied: bool,
}

impl FenchelReport {
    pub(crate) fn from_residuals(max_tail_sum: f64, inner_product: f64, tolerance: f64) -> Self {
        FenchelReport {
            max_tail_sum,
            inner_product,
            tolerance,
            satisfied: max_tail_sum <= tolerance && inner_product.abs() <= tolerance,
        }
    }
}

/// Mean-form log likelihood of the fixed model:
/// n^{-1} Σ_i log{F(S_i) - F(S_i - 1)}, or -inf if any term is nonpositive.
pub fn loglik_fixed(f: &StepDistribution, obs: &ObservationSet) -> f64 {
    assert_eq!(obs.kind(), ModelKind::Fixed, "loglik_fixed needs a fixed-model sample");
    let n = obs.len() as f64;
    let mut acc = 0.0;
    for &s in obs.s_values() {
        let term = f.evaluate(s) - f.evaluate(s - 1.0);
        if term <= 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += term.ln();
    }
    acc / n
}

/// Mean-form log likelihood of the mixed model:
/// n^{-1} Σ_i log{F(S_i) - F(S_i - E_i)}. The exposure factor e^{-1} of the
/// convolution density does not depend on F and is omitted.
pub fn loglik_mixed(f: &StepDistribution, obs: &ObservationSet) -> f64 {
    assert_eq!(obs.kind(), ModelKind::Mixed, "loglik_mixed needs a mixed-model sample");
    let n = obs.len() as f64;
    let mut acc = 0.0;
    for (&e, &s) in obs.e_values().iter().zip(obs.s_values()) {
        let term = f.evaluate(s) - f.evaluate(s - e);
        if term <= 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += term.ln();
    }
    acc / n
}
