//! The score process of the censored-data likelihood and the Fenchel
//! optimality certificate.
//!
//! For a candidate F the process W_{n,F} is a pure-jump function with jumps
//! only at support points; the jump at a free point is the partial
//! derivative of the empirical log likelihood with respect to F's value
//! there. For a fixed-model observation S the three regions contribute
//! +1/F(S) at S when S <= 1, the pair ±1/{F(S)-F(S-1)} at S and S-1 when
//! 1 < S <= m_n, and -1/{1-F(S-1)} at S-1 when S > 1 ∨ m_n; the mixed model
//! replaces unit shifts by the observed exposures. Forced points are not
//! perturbable and carry no jump. The estimator is optimal iff every tail
//! sum of the jumps is nonpositive and the inner product Σ F(t) dW(t)
//! vanishes.

use crate::censor::SupportSet;
use crate::dist::ObservationSet;
use crate::mle::problem::{Problem, END_ONE, END_ZERO};
use crate::mle::{FenchelReport, MleError};
use crate::step::StepDistribution;

/// Interval probabilities below this are reported as degenerate.
const W_VALUE_FLOOR: f64 = 1e-10;

/// The score process: jump sizes at the support's candidate points.
#[derive(Debug, Clone, PartialEq)]
pub struct WProcess {
    points: Vec<f64>,
    jumps: Vec<f64>,
}

impl WProcess {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    /// W(t): sum of jumps at points <= t. Zero below all support points.
    pub fn evaluate(&self, t: f64) -> f64 {
        self.points.iter().zip(&self.jumps).filter(|(&p, _)| p <= t).map(|(_, &j)| j).sum()
    }

    /// Largest over support points t of the tail sum ∫_{[t, ∞)} dW.
    pub fn max_tail_sum(&self) -> f64 {
        if self.jumps.is_empty() {
            return 0.0;
        }
        let mut tail = 0.0;
        let mut max_tail = f64::NEG_INFINITY;
        for j in self.jumps.iter().rev() {
            tail += j;
            max_tail = max_tail.max(tail);
        }
        max_tail
    }

    /// ∫ F dW: sum of F-value times jump over the support points.
    pub fn inner_product(&self, f: &StepDistribution) -> f64 {
        self.points.iter().zip(&self.jumps).map(|(&p, &j)| f.evaluate(p) * j).sum()
    }
}

/// Computes W_{n,F} for an arbitrary step distribution over the given
/// support structure. Errors when some censoring interval has probability
/// below the value floor under F.
pub fn w_process(
    f: &StepDistribution,
    obs: &ObservationSet,
    support: &SupportSet,
) -> Result<WProcess, MleError> {
    let problem = Problem::new(&obs.intervals(), support.clone());
    w_process_impl(&problem, &problem.free_values_of(f))
}

pub(crate) fn w_process_impl(problem: &Problem, x: &[f64]) -> Result<WProcess, MleError> {
    let support = &problem.support;
    let (free_lo, _) = support.free_range();
    let points = support.candidate_points().to_vec();
    let mut jumps = vec![0.0; points.len()];
    for iv in &problem.intervals {
        let hi = if iv.hi == END_ONE { 1.0 } else { x[iv.hi as usize] };
        let lo = if iv.lo == END_ZERO { 0.0 } else { x[iv.lo as usize] };
        let v = hi - lo;
        if v < W_VALUE_FLOOR {
            return Err(MleError::DegenerateLikelihood { at: iv.rep_s });
        }
        let inv = iv.weight / v;
        if iv.hi != END_ONE {
            jumps[free_lo + iv.hi as usize] += inv;
        }
        if iv.lo != END_ZERO {
            jumps[free_lo + iv.lo as usize] -= inv;
        }
    }
    Ok(WProcess { points, jumps })
}

/// Evaluates the two optimality conditions for F on the support structure
/// derived from the sample (fixed or mixed).
pub fn fenchel_check(
    f: &StepDistribution,
    obs: &ObservationSet,
    tol: f64,
) -> Result<FenchelReport, MleError> {
    let support = SupportSet::from_intervals(&obs.intervals())?;
    let w = w_process(f, obs, &support)?;
    Ok(FenchelReport::from_residuals(w.max_tail_sum(), w.inner_product(f), tol))
}
