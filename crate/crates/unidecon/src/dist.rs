//! Distribution models for the hidden variable and the exposure length,
//! inverse-CDF samplers for the fixed and mixed observation models, and the
//! convolution densities of the observed sum.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::step::StepDistribution;

#[derive(Debug, Error)]
pub enum DistError {
    #[error("invalid parameters for {kind}: {reason}")]
    InvalidParameters { kind: &'static str, reason: String },
    #[error("noise length must be positive (got {e})")]
    NonPositiveNoiseLength { e: f64 },
    #[error("exposure distribution must be supported away from zero (lower support point {lower})")]
    ExposureTouchesZero { lower: f64 },
    #[error("model kind {kind} has no density")]
    NoDensity { kind: &'static str },
    #[error("sample size must be at least 1")]
    EmptySample,
    #[error("observations must be finite and nonnegative (offending value {value} at row {index})")]
    BadObservation { value: f64, index: usize },
    #[error("mixed observations need one exposure per sum ({e} exposures, {s} sums)")]
    PairedLengthMismatch { e: usize, s: usize },
    #[error("unrecognized distribution spec `{spec}`")]
    BadSpec { spec: String },
}

/// Distribution model with known support, evaluatable CDF / density /
/// quantile. Used both for the hidden-variable distribution and for the
/// exposure-length distribution of the mixed model.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionModel {
    /// Standard exponential truncated to [0, upper]:
    /// F(x) = (1 - exp(-x)) / (1 - exp(-upper)) on the support.
    TruncatedExponential { upper: f64 },
    /// Uniform on [lower, upper].
    Uniform { lower: f64, upper: f64 },
    /// Point mass at `at`.
    Degenerate { at: f64 },
    /// Discrete distribution given by a step function with total mass 1.
    EmpiricalStep(StepDistribution),
}

impl DistributionModel {
    pub fn truncated_exponential(upper: f64) -> Result<Self, DistError> {
        if !(upper > 0.0) || !upper.is_finite() {
            return Err(DistError::InvalidParameters {
                kind: "truncexp",
                reason: format!("upper support point must be positive and finite, got {upper}"),
            });
        }
        Ok(DistributionModel::TruncatedExponential { upper })
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self, DistError> {
        if !(upper > lower) || !lower.is_finite() || !upper.is_finite() {
            return Err(DistError::InvalidParameters {
                kind: "uniform",
                reason: format!("need lower < upper, got [{lower}, {upper}]"),
            });
        }
        Ok(DistributionModel::Uniform { lower, upper })
    }

    pub fn degenerate(at: f64) -> Result<Self, DistError> {
        if !at.is_finite() {
            return Err(DistError::InvalidParameters {
                kind: "degenerate",
                reason: format!("point must be finite, got {at}"),
            });
        }
        Ok(DistributionModel::Degenerate { at })
    }

    pub fn empirical(step: StepDistribution) -> Result<Self, DistError> {
        if (step.total_mass() - 1.0).abs() > 1e-9 {
            return Err(DistError::InvalidParameters {
                kind: "empirical",
                reason: format!("total mass must be 1, got {}", step.total_mass()),
            });
        }
        Ok(DistributionModel::EmpiricalStep(step))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            DistributionModel::TruncatedExponential { .. } => "truncexp",
            DistributionModel::Uniform { .. } => "uniform",
            DistributionModel::Degenerate { .. } => "degenerate",
            DistributionModel::EmpiricalStep(_) => "empirical",
        }
    }

    /// Upper support point M.
    pub fn upper_support_point(&self) -> f64 {
        match self {
            DistributionModel::TruncatedExponential { upper } => *upper,
            DistributionModel::Uniform { upper, .. } => *upper,
            DistributionModel::Degenerate { at } => *at,
            DistributionModel::EmpiricalStep(step) => step.upper_support_point(),
        }
    }

    /// Lower support point.
    pub fn lower_support_point(&self) -> f64 {
        match self {
            DistributionModel::TruncatedExponential { .. } => 0.0,
            DistributionModel::Uniform { lower, .. } => *lower,
            DistributionModel::Degenerate { at } => *at,
            DistributionModel::EmpiricalStep(step) => step.points()[0],
        }
    }

    /// F(x), clamped to 0 below the support and to 1 from the upper support
    /// point on. Never extrapolated.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            DistributionModel::TruncatedExponential { upper } => {
                if x <= 0.0 {
                    0.0
                } else if x >= *upper {
                    1.0
                } else {
                    (-(-x).exp_m1()) / (-(-upper).exp_m1())
                }
            }
            DistributionModel::Uniform { lower, upper } => {
                ((x - lower) / (upper - lower)).clamp(0.0, 1.0)
            }
            DistributionModel::Degenerate { at } => {
                if x >= *at {
                    1.0
                } else {
                    0.0
                }
            }
            DistributionModel::EmpiricalStep(step) => step.evaluate(x),
        }
    }

    /// Density f(x) for the absolutely continuous kinds.
    pub fn density(&self, x: f64) -> Result<f64, DistError> {
        match self {
            DistributionModel::TruncatedExponential { upper } => {
                if x < 0.0 || x > *upper {
                    Ok(0.0)
                } else {
                    Ok((-x).exp() / (-(-upper).exp_m1()))
                }
            }
            DistributionModel::Uniform { lower, upper } => {
                if x < *lower || x > *upper {
                    Ok(0.0)
                } else {
                    Ok(1.0 / (upper - lower))
                }
            }
            other => Err(DistError::NoDensity { kind: other.kind_name() }),
        }
    }

    /// Quantile F^{-1}(p) for p in [0, 1); generalized inverse for the
    /// discrete kinds.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match self {
            DistributionModel::TruncatedExponential { upper } => {
                let scale = -(-upper).exp_m1();
                -(-p * scale).ln_1p()
            }
            DistributionModel::Uniform { lower, upper } => lower + p * (upper - lower),
            DistributionModel::Degenerate { at } => *at,
            DistributionModel::EmpiricalStep(step) => step.quantile(p),
        }
    }

    /// Parses a compact spec like `truncexp:0:2`, `uniform:0.5:1.5`,
    /// `degenerate:1`. The truncated exponential requires lower bound 0.
    pub fn parse_spec(spec: &str) -> Result<Self, DistError> {
        let parts: Vec<&str> = spec.split(':').collect();
        let num = |s: &str| -> Result<f64, DistError> {
            s.parse::<f64>().map_err(|_| DistError::BadSpec { spec: spec.to_string() })
        };
        match parts.as_slice() {
            ["truncexp", lo, hi] => {
                let lo = num(lo)?;
                if lo != 0.0 {
                    return Err(DistError::InvalidParameters {
                        kind: "truncexp",
                        reason: format!("lower support point is fixed at 0, got {lo}"),
                    });
                }
                DistributionModel::truncated_exponential(num(hi)?)
            }
            ["uniform", lo, hi] => DistributionModel::uniform(num(lo)?, num(hi)?),
            ["degenerate", at] => DistributionModel::degenerate(num(at)?),
            _ => Err(DistError::BadSpec { spec: spec.to_string() }),
        }
    }

    /// Renders the compact spec form parsed by [`parse_spec`].
    ///
    /// [`parse_spec`]: DistributionModel::parse_spec
    pub fn spec_string(&self) -> String {
        match self {
            DistributionModel::TruncatedExponential { upper } => format!("truncexp:0:{upper}"),
            DistributionModel::Uniform { lower, upper } => format!("uniform:{lower}:{upper}"),
            DistributionModel::Degenerate { at } => format!("degenerate:{at}"),
            DistributionModel::EmpiricalStep(_) => "empirical".to_string(),
        }
    }

    /// Parses the key=value block form:
    ///
    /// ```text
    /// kind=uniform
    /// lower=0
    /// upper=2
    /// ```
    pub fn parse_kv_block(block: &str) -> Result<Self, DistError> {
        let mut kind = None;
        let mut lower = None;
        let mut upper = None;
        let mut at = None;
        for line in block.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| DistError::BadSpec { spec: line.to_string() })?;
            let value = value.trim();
            match key.trim() {
                "kind" => kind = Some(value.to_string()),
                "lower" => lower = value.parse::<f64>().ok(),
                "upper" => upper = value.parse::<f64>().ok(),
                "at" => at = value.parse::<f64>().ok(),
                _ => return Err(DistError::BadSpec { spec: line.to_string() }),
            }
        }
        match kind.as_deref() {
            Some("truncexp") => {
                if lower.unwrap_or(0.0) != 0.0 {
                    return Err(DistError::InvalidParameters {
                        kind: "truncexp",
                        reason: "lower support point is fixed at 0".to_string(),
                    });
                }
                DistributionModel::truncated_exponential(
                    upper.ok_or_else(|| DistError::BadSpec { spec: block.to_string() })?,
                )
            }
            Some("uniform") => DistributionModel::uniform(
                lower.ok_or_else(|| DistError::BadSpec { spec: block.to_string() })?,
                upper.ok_or_else(|| DistError::BadSpec { spec: block.to_string() })?,
            ),
            Some("degenerate") => DistributionModel::degenerate(
                at.ok_or_else(|| DistError::BadSpec { spec: block.to_string() })?,
            ),
            _ => Err(DistError::BadSpec { spec: block.to_string() }),
        }
    }
}

/// Convolution density of the fixed model: g(s) = F0(s) - F0(s-1).
pub fn convolution_density_fixed(f0: &DistributionModel, s: f64) -> f64 {
    f0.cdf(s) - f0.cdf(s - 1.0)
}

/// Convolution density of the mixed model at exposure e:
/// q(e, s) = {F0(s) - F0(s-e)} / e.
pub fn convolution_density_mixed(
    f0: &DistributionModel,
    e: f64,
    s: f64,
) -> Result<f64, DistError> {
    if !(e > 0.0) {
        return Err(DistError::NonPositiveNoiseLength { e });
    }
    Ok((f0.cdf(s) - f0.cdf(s - e)) / e)
}

/// Identifies which observation model a sample came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Fixed,
    Mixed,
}

/// A sample: sums S_1..S_n for the fixed model, or pairs (E_i, S_i) for the
/// mixed model.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    kind: ModelKind,
    s: Vec<f64>,
    e: Vec<f64>,
}

impl ObservationSet {
    pub fn fixed(s: Vec<f64>) -> Result<Self, DistError> {
        if s.is_empty() {
            return Err(DistError::EmptySample);
        }
        for (i, &v) in s.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(DistError::BadObservation { value: v, index: i });
            }
        }
        Ok(ObservationSet { kind: ModelKind::Fixed, s, e: Vec::new() })
    }

    pub fn mixed(e: Vec<f64>, s: Vec<f64>) -> Result<Self, DistError> {
        if s.is_empty() {
            return Err(DistError::EmptySample);
        }
        if e.len() != s.len() {
            return Err(DistError::PairedLengthMismatch { e: e.len(), s: s.len() });
        }
        for (i, &v) in s.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(DistError::BadObservation { value: v, index: i });
            }
        }
        for (i, &v) in e.iter().enumerate() {
            if !v.is_finite() || v <= 0.0 {
                return Err(DistError::BadObservation { value: v, index: i });
            }
        }
        Ok(ObservationSet { kind: ModelKind::Mixed, s, e })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn s_values(&self) -> &[f64] {
        &self.s
    }

    /// Exposure lengths; empty for the fixed model.
    pub fn e_values(&self) -> &[f64] {
        &self.e
    }

    /// Censoring intervals (S_i - E_i, S_i], with E_i == 1 in the fixed model.
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        match self.kind {
            ModelKind::Fixed => self.s.iter().map(|&s| (s - 1.0, s)).collect(),
            ModelKind::Mixed => {
                self.e.iter().zip(&self.s).map(|(&e, &s)| (s - e, s)).collect()
            }
        }
    }
}

/// Deterministic per-stream generator derivation: the generator is a pure
/// function of (master_seed, stream_index), so replications are reproducible
/// independent of execution order and thread count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        SeedSpec { master_seed, stream_index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Draws S_i = U_i + V_i with U_i ~ F0 (inverse-CDF) and V_i ~ Uniform(0,1).
pub fn sample_fixed(
    f0: &DistributionModel,
    n: usize,
    seed: SeedSpec,
) -> Result<ObservationSet, DistError> {
    if n == 0 {
        return Err(DistError::EmptySample);
    }
    let mut rng = seed.rng();
    let mut s = Vec::with_capacity(n);
    for _ in 0..n {
        let u = f0.quantile(rng.random::<f64>());
        let v: f64 = rng.random();
        s.push(u + v);
    }
    ObservationSet::fixed(s)
}

/// Draws pairs (E_i, S_i): E_i ~ FE, V_i | E_i ~ Uniform(0, E_i),
/// U_i ~ F0, S_i = U_i + V_i. FE must be supported away from zero.
pub fn sample_mixed(
    f0: &DistributionModel,
    fe: &DistributionModel,
    n: usize,
    seed: SeedSpec,
) -> Result<ObservationSet, DistError> {
    if n == 0 {
        return Err(DistError::EmptySample);
    }
    let lower = fe.lower_support_point();
    if lower <= 0.0 {
        return Err(DistError::ExposureTouchesZero { lower });
    }
    let mut rng = seed.rng();
    let mut e = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for _ in 0..n {
        let ei = fe.quantile(rng.random::<f64>());
        let u = f0.quantile(rng.random::<f64>());
        let v = ei * rng.random::<f64>();
        e.push(ei);
        s.push(u + v);
    }
    ObservationSet::mixed(e, s)
}
