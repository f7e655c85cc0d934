//! Transforms from deconvolution samples to interval censoring data, and the
//! support/boundary structure of the maximum likelihood class.
//!
//! A fixed-model sum S carries the same information as the current-status
//! pair (Y, Δ) with Δ = 1{S <= 1}, Y = S if Δ = 1 and Y = S - 1 otherwise;
//! more generally S maps to case-m interval censoring data whose inspection
//! times sit at unit distance, Y_j = S - ⌊S⌋ + j - 1.

use thiserror::Error;

use crate::dist::{ModelKind, ObservationSet};

/// Support points within this distance are treated as the same jump point.
/// Keeps near-duplicate points (S_i - 1 vs S_k) from destabilizing the
/// convex minorant solver.
pub const SUPPORT_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CensorError {
    #[error("operation requires a fixed-model sample")]
    NotFixedModel,
    #[error("all observations lie in the unit interval; use the current-status path")]
    AllMassInUnitInterval,
    #[error("m = {m} is too small: observation S = {s} needs bucket {needed} > m + 1")]
    BucketCountTooSmall { m: usize, s: f64, needed: usize },
    #[error("sample is empty")]
    EmptySample,
}

/// Current-status (interval censoring case 1) data: inspection times y with
/// status indicators, sorted ascending by y with stable tie order.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentStatusData {
    y: Vec<f64>,
    delta: Vec<u8>,
    inconsistent: usize,
}

impl CurrentStatusData {
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn delta(&self) -> &[u8] {
        &self.delta
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Number of observations with S > 2, which are inconsistent with the
    /// F0(1) = 1 regime this transform is meant for. Warning-level only.
    pub fn inconsistent_count(&self) -> usize {
        self.inconsistent
    }
}

/// Case-m interval censoring data induced by the deconvolution structure:
/// per subject the first inspection time y1 in (0,1) and the index of the
/// interval (bucket) containing the hidden variable. The full inspection
/// vector is recoverable as Y_j = y1 + j - 1.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalCensoredData {
    y1: Vec<f64>,
    bucket: Vec<usize>,
    m: usize,
    integer_s_rows: Vec<usize>,
}

impl IntervalCensoredData {
    pub fn y1(&self) -> &[f64] {
        &self.y1
    }

    pub fn bucket(&self) -> &[usize] {
        &self.bucket
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Rows whose S was exactly an integer, mapped to y1 = 0 by convention.
    pub fn integer_s_rows(&self) -> &[usize] {
        &self.integer_s_rows
    }
}

/// Classification of a support point by the boundary rules of the maximum
/// likelihood class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    ForcedZero,
    Free,
    ForcedOne,
}

/// Candidate mass points of the maximum likelihood class together with the
/// boundary forcing derived from the data: points below min_j S_j carry
/// F = 0, points strictly above m_n = max{S_j - 1 : S_j > 1} carry F = 1,
/// and the free points T_1 < ... < T_m in between carry 0 < F < 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportSet {
    candidate_points: Vec<f64>,
    forced_one_from: f64,
    forced_zero_below: f64,
    free_lo: usize,
    free_hi: usize, // exclusive
}

impl SupportSet {
    /// Builds the support set from censoring intervals (l_i, r_i]. Left
    /// endpoints at or below zero carry no candidate point. `forced_one_from`
    /// is the largest positive left endpoint (m_n); if none exists every
    /// candidate is forced to one and the class is a single function.
    pub fn from_intervals(intervals: &[(f64, f64)]) -> Result<Self, CensorError> {
        if intervals.is_empty() {
            return Err(CensorError::EmptySample);
        }
        let mut raw: Vec<f64> = Vec::with_capacity(2 * intervals.len());
        let mut m_n = f64::NEG_INFINITY;
        let mut min_s = f64::INFINITY;
        for &(l, r) in intervals {
            raw.push(r);
            min_s = min_s.min(r);
            if l > 0.0 {
                raw.push(l);
                m_n = m_n.max(l);
            }
        }
        raw.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut candidates: Vec<f64> = Vec::with_capacity(raw.len());
        for v in raw {
            match candidates.last() {
                Some(&last) if v - last <= SUPPORT_TIE_TOLERANCE => {}
                _ => candidates.push(v),
            }
        }
        let has_upper = m_n.is_finite();
        let forced_one_from = if has_upper { m_n } else { f64::INFINITY };
        // Forced zero strictly below min S; forced one strictly above m_n.
        // The point m_n itself stays free: it is the left endpoint of the
        // widest interval and F(m_n) = 1 would zero that likelihood term.
        let free_lo = candidates.partition_point(|&p| p < min_s - SUPPORT_TIE_TOLERANCE);
        let free_hi = if has_upper {
            candidates.partition_point(|&p| p <= forced_one_from + SUPPORT_TIE_TOLERANCE)
        } else {
            candidates.len()
        };
        let free_hi = free_hi.max(free_lo);
        Ok(SupportSet {
            candidate_points: candidates,
            forced_one_from,
            forced_zero_below: min_s,
            free_lo,
            free_hi,
        })
    }

    pub fn candidate_points(&self) -> &[f64] {
        &self.candidate_points
    }

    /// m_n of the class definition; infinite when no interval has a positive
    /// left endpoint (no upper forcing).
    pub fn forced_one_from(&self) -> f64 {
        self.forced_one_from
    }

    pub fn forced_zero_below(&self) -> f64 {
        self.forced_zero_below
    }

    pub fn free_points(&self) -> &[f64] {
        &self.candidate_points[self.free_lo..self.free_hi]
    }

    pub fn free_count(&self) -> usize {
        self.free_hi - self.free_lo
    }

    /// Index range of the free points within `candidate_points`.
    pub fn free_range(&self) -> (usize, usize) {
        (self.free_lo, self.free_hi)
    }

    pub fn classify_index(&self, idx: usize) -> PointClass {
        if idx < self.free_lo {
            PointClass::ForcedZero
        } else if idx < self.free_hi {
            PointClass::Free
        } else {
            PointClass::ForcedOne
        }
    }

    /// Locates a support point up to the tie tolerance.
    pub fn find_index(&self, p: f64) -> Option<usize> {
        let idx = self.candidate_points.partition_point(|&c| c < p - SUPPORT_TIE_TOLERANCE);
        if idx < self.candidate_points.len()
            && (self.candidate_points[idx] - p).abs() <= SUPPORT_TIE_TOLERANCE
        {
            Some(idx)
        } else {
            None
        }
    }
}

/// Translates a fixed-model sample to current-status pairs per the unit-noise
/// structure: Δ = 1{S <= 1}, Y = S on Δ = 1 and Y = S - 1 on Δ = 0.
pub fn to_current_status(obs: &ObservationSet) -> Result<CurrentStatusData, CensorError> {
    if obs.kind() != ModelKind::Fixed {
        return Err(CensorError::NotFixedModel);
    }
    let mut rows: Vec<(f64, u8)> = obs
        .s_values()
        .iter()
        .map(|&s| if s <= 1.0 { (s, 1) } else { (s - 1.0, 0) })
        .collect();
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let inconsistent = obs.s_values().iter().filter(|&&s| s > 2.0).count();
    let (y, delta) = rows.into_iter().unzip();
    Ok(CurrentStatusData { y, delta, inconsistent })
}

/// Translates a fixed-model sample to case-m interval censoring data:
/// bucket j with S in (j-1, j], first inspection time y1 = S - ⌊S⌋.
/// Integer-valued S maps to y1 = 0 and is flagged.
pub fn to_interval_censoring(
    obs: &ObservationSet,
    m: usize,
) -> Result<IntervalCensoredData, CensorError> {
    if obs.kind() != ModelKind::Fixed {
        return Err(CensorError::NotFixedModel);
    }
    let mut y1 = Vec::with_capacity(obs.len());
    let mut bucket = Vec::with_capacity(obs.len());
    let mut integer_s_rows = Vec::new();
    for (i, &s) in obs.s_values().iter().enumerate() {
        let b = (s.ceil() as usize).max(1);
        if b > m + 1 {
            return Err(CensorError::BucketCountTooSmall { m, s, needed: b });
        }
        let frac = s - s.floor();
        if frac == 0.0 {
            integer_s_rows.push(i);
        }
        y1.push(frac);
        bucket.push(b);
    }
    Ok(IntervalCensoredData { y1, bucket, m, integer_s_rows })
}

/// m_n = max over observations with S_j > 1 of S_j - 1. Errors when every
/// observation lies in the unit interval, signalling the current-status path.
pub fn compute_m_n(obs: &ObservationSet) -> Result<f64, CensorError> {
    let m_n = obs
        .s_values()
        .iter()
        .filter(|&&s| s > 1.0)
        .map(|&s| s - 1.0)
        .fold(f64::NEG_INFINITY, f64::max);
    if m_n.is_finite() {
        Ok(m_n)
    } else {
        Err(CensorError::AllMassInUnitInterval)
    }
}

/// Support set of the fixed-model maximum likelihood class: candidate points
/// are the union of {S_i} and {S_i - 1 : S_i - 1 > 0}, deduplicated, with
/// multiplicities carried by the likelihood weights.
pub fn build_support_set(obs: &ObservationSet) -> Result<SupportSet, CensorError> {
    if obs.kind() != ModelKind::Fixed {
        return Err(CensorError::NotFixedModel);
    }
    compute_m_n(obs)?;
    SupportSet::from_intervals(&obs.intervals())
}
