//! Nondecreasing right-continuous step functions on a finite point set —
//! the output type of every solver in this crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StepError {
    #[error("points and values must have equal nonzero length (got {points} points, {values} values)")]
    LengthMismatch { points: usize, values: usize },
    #[error("points must be strictly increasing and finite (violation near index {index})")]
    PointsNotSorted { index: usize },
    #[error("values must be nondecreasing within [0, 1] (violation at index {index}: {value})")]
    ValuesNotMonotone { index: usize, value: f64 },
}

/// A discrete distribution function: value 0 left of the first point,
/// right-continuous, nondecreasing, bounded by 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDistribution {
    points: Vec<f64>,
    values: Vec<f64>,
}

impl StepDistribution {
    pub fn new(points: Vec<f64>, values: Vec<f64>) -> Result<Self, StepError> {
        if points.is_empty() || points.len() != values.len() {
            return Err(StepError::LengthMismatch { points: points.len(), values: values.len() });
        }
        for (i, w) in points.windows(2).enumerate() {
            if !(w[0] < w[1]) || !w[1].is_finite() {
                return Err(StepError::PointsNotSorted { index: i + 1 });
            }
        }
        if !points[0].is_finite() {
            return Err(StepError::PointsNotSorted { index: 0 });
        }
        let mut prev = 0.0;
        for (i, &v) in values.iter().enumerate() {
            if !(v >= prev - 1e-12) || !(v <= 1.0 + 1e-12) || v.is_nan() {
                return Err(StepError::ValuesNotMonotone { index: i, value: v });
            }
            prev = prev.max(v);
        }
        Ok(StepDistribution { points, values })
    }

    /// Unit jump at a single point.
    pub fn point_mass(at: f64) -> Self {
        StepDistribution { points: vec![at], values: vec![1.0] }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// F(x): the value at the largest point <= x, or 0 below all points.
    pub fn evaluate(&self, x: f64) -> f64 {
        let idx = self.points.partition_point(|&p| p <= x);
        if idx == 0 {
            0.0
        } else {
            self.values[idx - 1]
        }
    }

    /// Total mass, i.e. the final value.
    pub fn total_mass(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Largest point carrying positive mass (the upper support point).
    pub fn upper_support_point(&self) -> f64 {
        let mut prev = 0.0;
        let mut upper = self.points[0];
        for (&p, &v) in self.points.iter().zip(&self.values) {
            if v > prev {
                upper = p;
            }
            prev = v;
        }
        upper
    }

    /// Jumps (point, mass) with zero-mass points skipped.
    pub fn jumps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mut prev = 0.0;
        self.points.iter().zip(&self.values).filter_map(move |(&p, &v)| {
            let mass = v - prev;
            prev = v;
            if mass > 0.0 {
                Some((p, mass))
            } else {
                None
            }
        })
    }

    /// Generalized inverse: inf{x : F(x) >= p}. For p above the total mass
    /// returns the last point.
    pub fn quantile(&self, p: f64) -> f64 {
        let idx = self.values.partition_point(|&v| v < p);
        if idx >= self.points.len() {
            *self.points.last().unwrap()
        } else {
            self.points[idx]
        }
    }
}
