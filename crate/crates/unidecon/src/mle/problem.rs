//! Internal representation of the censored-data likelihood over the free
//! values of the support set.
//!
//! Every observation is a censoring interval (l, r]; after boundary forcing
//! its probability is val(r) - val(l), where val is 1 at forced-one points,
//! 0 at forced-zero points (and below all candidates), and an optimization
//! variable at free points. Duplicate intervals are merged with their
//! multiplicity carried in the weight, so the likelihood integrates against
//! the empirical measure.

use std::collections::HashMap;

use crate::censor::{PointClass, SupportSet};
use crate::mle::MleError;
use crate::step::StepDistribution;

/// Sentinel endpoint codes; anything else is an index into the free values.
pub(crate) const END_ZERO: u32 = u32::MAX;
pub(crate) const END_ONE: u32 = u32::MAX - 1;

#[derive(Debug, Clone, Copy)]
pub(crate) struct MergedInterval {
    pub lo: u32,
    pub hi: u32,
    /// Multiplicity / n.
    pub weight: f64,
    /// A representative right endpoint, for error reporting.
    pub rep_s: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Problem {
    pub support: SupportSet,
    pub intervals: Vec<MergedInterval>,
}

impl Problem {
    pub fn new(raw_intervals: &[(f64, f64)], support: SupportSet) -> Self {
        let n = raw_intervals.len() as f64;
        let (free_lo, _) = support.free_range();
        let mut merged: HashMap<(u32, u32), (f64, f64)> = HashMap::new();
        for &(l, r) in raw_intervals {
            let hi_idx = support
                .find_index(r)
                .expect("right endpoints are support candidates by construction");
            let hi = match support.classify_index(hi_idx) {
                PointClass::ForcedOne => END_ONE,
                PointClass::Free => (hi_idx - free_lo) as u32,
                PointClass::ForcedZero => {
                    unreachable!("right endpoints are never below the smallest observation")
                }
            };
            let lo = if l <= 0.0 {
                END_ZERO
            } else {
                let lo_idx = support
                    .find_index(l)
                    .expect("positive left endpoints are support candidates by construction");
                match support.classify_index(lo_idx) {
                    PointClass::ForcedZero => END_ZERO,
                    PointClass::Free => (lo_idx - free_lo) as u32,
                    PointClass::ForcedOne => {
                        unreachable!("left endpoints never exceed the largest left endpoint")
                    }
                }
            };
            let entry = merged.entry((lo, hi)).or_insert((0.0, r));
            entry.0 += 1.0 / n;
        }
        let mut intervals: Vec<MergedInterval> = merged
            .into_iter()
            .map(|((lo, hi), (weight, rep_s))| MergedInterval { lo, hi, weight, rep_s })
            .collect();
        // Deterministic iteration order regardless of hash state.
        intervals.sort_by_key(|iv| (iv.lo, iv.hi));
        Problem { support, intervals }
    }

    pub fn free_count(&self) -> usize {
        self.support.free_count()
    }

    /// Mean-form log likelihood at the free values `x`.
    pub fn loglik(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for iv in &self.intervals {
            let hi = if iv.hi == END_ONE { 1.0 } else { x[iv.hi as usize] };
            let lo = if iv.lo == END_ZERO { 0.0 } else { x[iv.lo as usize] };
            let v = hi - lo;
            if v <= 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += iv.weight * v.ln();
        }
        acc
    }

    /// Gradient of the log likelihood and the diagonal curvature surrogate
    /// (per-interval weights 1/(F(r) - F(l))^2 summed per free point).
    /// Fails when an interval probability drops below `floor`.
    pub fn gradient_and_curvature(
        &self,
        x: &[f64],
        floor: f64,
        grad: &mut [f64],
        curv: &mut [f64],
    ) -> Result<(), MleError> {
        grad.fill(0.0);
        curv.fill(0.0);
        for iv in &self.intervals {
            let hi = if iv.hi == END_ONE { 1.0 } else { x[iv.hi as usize] };
            let lo = if iv.lo == END_ZERO { 0.0 } else { x[iv.lo as usize] };
            let v = hi - lo;
            if v <= floor {
                return Err(MleError::DegenerateLikelihood { at: iv.rep_s });
            }
            let inv = iv.weight / v;
            let inv2 = inv / v;
            if iv.hi != END_ONE {
                grad[iv.hi as usize] += inv;
                curv[iv.hi as usize] += inv2;
            }
            if iv.lo != END_ZERO {
                grad[iv.lo as usize] -= inv;
                curv[iv.lo as usize] += inv2;
            }
        }
        Ok(())
    }

    /// Free values of an arbitrary step distribution, evaluated at the free
    /// points (for certifying candidate estimators that were not produced by
    /// the solver).
    pub fn free_values_of(&self, f: &StepDistribution) -> Vec<f64> {
        self.support.free_points().iter().map(|&t| f.evaluate(t)).collect()
    }

    /// Assembles the full step distribution from free values: forced zeros,
    /// the free values, forced ones.
    pub fn assemble(&self, x: &[f64]) -> Result<StepDistribution, MleError> {
        let points = self.support.candidate_points().to_vec();
        let (free_lo, free_hi) = self.support.free_range();
        let mut values = Vec::with_capacity(points.len());
        for idx in 0..points.len() {
            if idx < free_lo {
                values.push(0.0);
            } else if idx < free_hi {
                values.push(x[idx - free_lo]);
            } else {
                values.push(1.0);
            }
        }
        Ok(StepDistribution::new(points, values)?)
    }

    /// Largest tail sum of the score jumps over the free points and the
    /// inner product Σ x_k g_k.
    pub fn fenchel_residuals(&self, x: &[f64], grad: &[f64]) -> (f64, f64) {
        if grad.is_empty() {
            return (0.0, 0.0);
        }
        let mut tail = 0.0;
        let mut max_tail = f64::NEG_INFINITY;
        for g in grad.iter().rev() {
            tail += g;
            max_tail = max_tail.max(tail);
        }
        let inner: f64 = x.iter().zip(grad).map(|(a, b)| a * b).sum();
        (max_tail, inner)
    }
}
