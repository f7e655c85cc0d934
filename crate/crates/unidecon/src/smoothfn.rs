//! Smooth-functional machinery: the score-function recursion, the mean
//! functional with its asymptotic and plug-in variances, and kernel-smoothed
//! density / distribution estimators built on the maximum likelihood step
//! function.
//!
//! A functional of the hidden distribution with derivative ψ induces a score
//! function θ_F in the observation space. On [0, 1] it is
//! θ_F(x) = -Σ_{i=0}^{m-1} {1 - F(x+i)} ψ(x+i) with m the ceiling of the
//! upper support point, and it extends by θ_F(x+i) = θ_F(x+i-1) + ψ(x+i-1).
//! Together with φ_F(x) = F(x) θ_F(x) this solves the score equation
//! {φ(x+1)-φ(x)}/{F(x+1)-F(x)} - {φ(x)-φ(x-1)}/{F(x)-F(x-1)} = ψ(x), which
//! is what makes √n estimation of such functionals possible despite the
//! cube-root rate of the pointwise estimator.

use thiserror::Error;

use crate::dist::DistributionModel;
use crate::quad::{self, QuadError};
use crate::step::StepDistribution;

#[derive(Debug, Error)]
pub enum SmoothError {
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("functional derivative undefined at {at} (domain ends at {domain_end})")]
    PsiOutOfDomain { at: f64, domain_end: f64 },
    #[error("score function evaluated outside [0, {max}] at {at}")]
    ThetaOutOfRange { at: f64, max: f64 },
    #[error("vanishing denominator F({hi}) - F({lo}) in the score equation")]
    VanishingDenominator { lo: f64, hi: f64 },
    #[error("bandwidth must be positive, got {h}")]
    BadBandwidth { h: f64 },
    #[error("window [{lo}, {hi}] must stay inside one unit interval")]
    WindowCrossesInteger { lo: f64, hi: f64 },
}

/// Anything that evaluates like a right-continuous distribution function.
pub trait Cdf {
    fn cdf_at(&self, x: f64) -> f64;
}

impl Cdf for DistributionModel {
    fn cdf_at(&self, x: f64) -> f64 {
        self.cdf(x)
    }
}

impl Cdf for StepDistribution {
    fn cdf_at(&self, x: f64) -> f64 {
        self.evaluate(x)
    }
}

/// A smooth functional of the hidden distribution, represented by the
/// derivative ψ of its defining map and the right end of ψ's domain.
pub struct SmoothFunctional<'a> {
    derivative: Box<dyn Fn(f64) -> f64 + 'a>,
    domain_end: f64,
}

impl<'a> SmoothFunctional<'a> {
    pub fn new(derivative: impl Fn(f64) -> f64 + 'a, domain_end: f64) -> Self {
        SmoothFunctional { derivative: Box::new(derivative), domain_end }
    }

    /// The mean functional F ↦ ∫ x dF(x), with ψ ≡ 1 everywhere.
    pub fn mean() -> SmoothFunctional<'static> {
        SmoothFunctional { derivative: Box::new(|_| 1.0), domain_end: f64::INFINITY }
    }

    fn eval(&self, x: f64) -> Result<f64, SmoothError> {
        if x > self.domain_end + 1e-12 {
            return Err(SmoothError::PsiOutOfDomain { at: x, domain_end: self.domain_end });
        }
        Ok((self.derivative)(x))
    }
}

/// The score function θ_F on [0, m+1], built lazily from a distribution
/// function and a functional derivative.
pub struct ScoreFunction<'a> {
    cdf: Box<dyn Fn(f64) -> f64 + 'a>,
    psi: SmoothFunctional<'a>,
    /// Number of unit segments covering the support: m = ⌈M⌉.
    m: usize,
}

/// Builds the score function for the functional with derivative ψ on the
/// distribution F with upper support point M.
pub fn score_theta<'a, C: Cdf + ?Sized>(
    f: &'a C,
    psi: SmoothFunctional<'a>,
    upper_support: f64,
) -> ScoreFunction<'a> {
    let m = (upper_support.ceil() as usize).max(1);
    ScoreFunction { cdf: Box::new(move |x| f.cdf_at(x)), psi, m }
}

impl ScoreFunction<'_> {
    pub fn m(&self) -> usize {
        self.m
    }

    /// θ(x) for x in [0, m+1].
    pub fn evaluate(&self, x: f64) -> Result<f64, SmoothError> {
        let max = (self.m + 1) as f64;
        if !(0.0..=max + 1e-9).contains(&x) {
            return Err(SmoothError::ThetaOutOfRange { at: x, max });
        }
        let shift = (x.floor() as usize).min(self.m + 1);
        let r = x - shift as f64;
        let mut theta = self.base(r)?;
        for k in 0..shift {
            theta += self.psi.eval(r + k as f64)?;
        }
        Ok(theta)
    }

    /// φ(x) = ∫_{[0,x]} a dF in observation-space form: F(x)θ(x) on [0, 1],
    /// extended by φ(x+i) - φ(x+i-1) = {F(x+i) - F(x+i-1)} θ(x+i). Zero for
    /// negative arguments.
    pub fn phi(&self, x: f64) -> Result<f64, SmoothError> {
        if x < 0.0 {
            return Ok(0.0);
        }
        let shift = (x.floor() as usize).min(self.m + 1);
        let r = x - shift as f64;
        let mut theta = self.base(r)?;
        let mut phi = (self.cdf)(r) * theta;
        for k in 1..=shift {
            theta += self.psi.eval(r + (k - 1) as f64)?;
            let y = r + k as f64;
            phi += ((self.cdf)(y) - (self.cdf)(y - 1.0)) * theta;
        }
        Ok(phi)
    }

    // Base segment on [0, 1]. Terms with F(x+i) = 1 vanish and their ψ value
    // is never requested, so ψ only needs to cover [0, M].
    fn base(&self, r: f64) -> Result<f64, SmoothError> {
        let mut acc = 0.0;
        for i in 0..self.m {
            let y = r + i as f64;
            let tail = 1.0 - (self.cdf)(y);
            if tail != 0.0 {
                acc -= tail * self.psi.eval(y)?;
            }
        }
        Ok(acc)
    }
}

/// Largest over the grid of |score equation residual|, certifying that the
/// recursion solves the φ-equation for this F and ψ. Denominators must be
/// positive at each grid point.
pub fn score_residual<C: Cdf + ?Sized>(
    f: &C,
    theta: &ScoreFunction<'_>,
    grid: &[f64],
) -> Result<f64, SmoothError> {
    let mut worst: f64 = 0.0;
    for &x in grid {
        let num_hi = theta.phi(x + 1.0)? - theta.phi(x)?;
        let den_hi = f.cdf_at(x + 1.0) - f.cdf_at(x);
        let num_lo = theta.phi(x)? - theta.phi(x - 1.0)?;
        let den_lo = f.cdf_at(x) - f.cdf_at(x - 1.0);
        if den_hi <= 0.0 {
            return Err(SmoothError::VanishingDenominator { lo: x, hi: x + 1.0 });
        }
        if den_lo <= 0.0 {
            return Err(SmoothError::VanishingDenominator { lo: x - 1.0, hi: x });
        }
        let lhs = num_hi / den_hi - num_lo / den_lo;
        worst = worst.max((lhs - theta.psi.eval(x)?).abs());
    }
    Ok(worst)
}

/// Mean of the estimated distribution, Σ_j x_j ΔF(x_j) over the jump points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub value: f64,
    pub total_mass: f64,
    /// Set when the input had total mass below 1 - 1e-9; the value is then
    /// computed on normalized masses.
    pub renormalized: bool,
}

pub fn mean_estimate(mle: &StepDistribution) -> MeanEstimate {
    let total = mle.total_mass();
    let renormalized = total < 1.0 - 1e-9;
    let raw: f64 = mle.jumps().map(|(x, mass)| x * mass).sum();
    let value = if renormalized { raw / total } else { raw };
    MeanEstimate { value, total_mass: total, renormalized }
}

fn variance_integrand<'a>(
    theta: &'a ScoreFunction<'_>,
    f: &'a dyn Cdf,
) -> impl Fn(f64) -> f64 + 'a {
    move |x: f64| {
        let t = theta.evaluate(x).expect("score evaluation inside [0, m+1]");
        t * t * (f.cdf_at(x) - f.cdf_at(x - 1.0))
    }
}

/// Asymptotic variance of √n times the mean of the estimator:
/// ∫_0^{M+1} θ_{F0}(x)^2 {F0(x) - F0(x-1)} dx by adaptive quadrature.
pub fn smooth_variance_mean(f0: &DistributionModel) -> Result<f64, SmoothError> {
    smooth_variance_mean_tol(f0, 1e-8)
}

pub(crate) fn smooth_variance_mean_tol(
    f0: &DistributionModel,
    tol: f64,
) -> Result<f64, SmoothError> {
    let upper = f0.upper_support_point();
    let theta = score_theta(f0, SmoothFunctional::mean(), upper);
    let hi = upper + 1.0;
    let mut cuts: Vec<f64> = (0..=(hi.ceil() as usize)).map(|k| k as f64).collect();
    cuts.push(upper);
    cuts.push(hi);
    cuts.push(f0.lower_support_point());
    cuts.push(f0.lower_support_point() + 1.0);
    let integrand = variance_integrand(&theta, f0);
    Ok(quad::integrate_with_breakpoints(&integrand, 0.0, hi, &cuts, tol)?)
}

/// Plug-in variance estimate: the same integral with the step estimator in
/// place of F0. The integrand is piecewise constant between unit shifts of
/// the jump points, so the integral is computed exactly piece by piece.
pub fn plugin_variance_mean(mle: &StepDistribution) -> f64 {
    let upper = mle.upper_support_point();
    let m = (upper.ceil() as usize).max(1);
    let theta = score_theta(mle, SmoothFunctional::mean(), upper);
    let hi = upper + 1.0;
    let mut cuts: Vec<f64> = vec![0.0, hi];
    for &p in mle.points() {
        for z in -(m as i64)..=(m as i64 + 1) {
            let b = p + z as f64;
            if b > 0.0 && b < hi {
                cuts.push(b);
            }
        }
    }
    for k in 1..=(m + 1) {
        let b = k as f64;
        if b < hi {
            cuts.push(b);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let t = theta.evaluate(mid).expect("score evaluation inside [0, m+1]");
        acc += t * t * (mle.evaluate(mid) - mle.evaluate(mid - 1.0)) * (w[1] - w[0]);
    }
    acc
}

/// Symmetric smoothing kernels with compact support [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// K(u) = 35/32 (1 - u^2)^3 on [-1, 1].
    Triweight,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub bandwidth: f64,
}

impl KernelSpec {
    pub fn triweight(bandwidth: f64) -> Result<Self, SmoothError> {
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(SmoothError::BadBandwidth { h: bandwidth });
        }
        Ok(KernelSpec { kind: KernelKind::Triweight, bandwidth })
    }

    /// K(u).
    pub fn k(&self, u: f64) -> f64 {
        if u.abs() > 1.0 {
            return 0.0;
        }
        let w = 1.0 - u * u;
        35.0 / 32.0 * w * w * w
    }

    /// K'(u).
    pub fn k_prime(&self, u: f64) -> f64 {
        if u.abs() > 1.0 {
            return 0.0;
        }
        let w = 1.0 - u * u;
        -105.0 / 16.0 * u * w * w
    }

    /// Integrated kernel IK(u) = ∫_{-∞}^u K, a polynomial on [-1, 1] clipped
    /// to {0, 1} outside.
    pub fn ik(&self, u: f64) -> f64 {
        if u <= -1.0 {
            0.0
        } else if u >= 1.0 {
            1.0
        } else {
            let u2 = u * u;
            35.0 / 32.0 * (u - u2 * u + 0.6 * u2 * u2 * u - u2 * u2 * u2 * u / 7.0 + 16.0 / 35.0)
        }
    }

    /// Scaled kernel K_h(u) = K(u/h)/h.
    pub fn k_h(&self, u: f64) -> f64 {
        self.k(u / self.bandwidth) / self.bandwidth
    }

    /// Derivative of the scaled kernel, K'(u/h)/h².
    pub fn k_h_prime(&self, u: f64) -> f64 {
        self.k_prime(u / self.bandwidth) / (self.bandwidth * self.bandwidth)
    }
}

/// Kernel density estimate Σ_j K_h(t - x_j) ΔF(x_j).
pub fn kernel_density_estimate(mle: &StepDistribution, k: &KernelSpec, t: f64) -> f64 {
    mle.jumps().map(|(x, mass)| k.k_h(t - x) * mass).sum()
}

/// Kernel-smoothed distribution estimate Σ_j IK((t - x_j)/h) ΔF(x_j).
pub fn kernel_cdf_estimate(mle: &StepDistribution, k: &KernelSpec, t: f64) -> f64 {
    mle.jumps().map(|(x, mass)| k.ik((t - x) / k.bandwidth) * mass).sum()
}

/// (∫ K², ∫ (K')²) computed by quadrature. For the triweight these equal
/// 350/429 and 35/11.
pub fn kernel_constants(k: &KernelSpec) -> (f64, f64) {
    let int_k2 = quad::fixed_gl20(&|u| k.k(u) * k.k(u), -1.0, 1.0);
    let int_kp2 = quad::fixed_gl20(&|u| k.k_prime(u) * k.k_prime(u), -1.0, 1.0);
    (int_k2, int_kp2)
}

/// Which kernel-smoothed estimator a variance refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothTarget {
    Density,
    Cdf,
}

/// Asymptotic variance of the kernel-smoothed estimators at an interior t:
/// F0(t){1-F0(t)} ∫(K')² for the density (scale (nh³)^{1/2}) and
/// F0(t){1-F0(t)} ∫K² for the distribution function (scale (nh)^{1/2}).
pub fn asymp_variance_kernel(
    f0: &DistributionModel,
    t: f64,
    which: SmoothTarget,
    k: &KernelSpec,
) -> f64 {
    let bernoulli = f0.cdf(t) * (1.0 - f0.cdf(t));
    let (int_k2, int_kp2) = kernel_constants(k);
    match which {
        SmoothTarget::Density => bernoulli * int_kp2,
        SmoothTarget::Cdf => bernoulli * int_k2,
    }
}

/// Both sides of the telescoping identity behind the density-estimator
/// variance: the full score-form integral
/// h³ ∫ θ_{h,t,F0}(x)² {F0(x) - F0(x-1)} dx with ψ(u) = -K_h'(t-u), and the
/// collapsed form h³ ∫ K_h'(t-x)² F0(x){1-F0(x)} dx. They agree whenever
/// [t-h, t+h] stays strictly inside one unit interval.
pub fn telescoping_variance_check(
    f0: &DistributionModel,
    t: f64,
    h: f64,
) -> Result<(f64, f64), SmoothError> {
    let k = KernelSpec::triweight(h)?;
    if (t - h).floor() != (t + h).floor() || t - h <= 0.0 {
        return Err(SmoothError::WindowCrossesInteger { lo: t - h, hi: t + h });
    }
    let upper = f0.upper_support_point();
    let m = (upper.ceil() as usize).max(1);
    let hi = m as f64 + 1.0;
    let psi = SmoothFunctional::new(move |u: f64| -k.k_h_prime(t - u), f64::INFINITY);
    let theta = score_theta(f0, psi, upper);
    let mut cuts: Vec<f64> = (0..=(hi.ceil() as usize)).map(|z| z as f64).collect();
    for z in -(m as i64 + 1)..=(m as i64 + 1) {
        cuts.push(t - h + z as f64);
        cuts.push(t + h + z as f64);
    }
    cuts.push(upper);
    // The raw integrals scale like h^{-3}; request accuracy so the scaled
    // results carry ~1e-12 absolute error.
    let h3 = h * h * h;
    let tol = 1e-12 / h3;
    let integrand = variance_integrand(&theta, f0);
    let full = quad::integrate_with_breakpoints(&integrand, 0.0, hi, &cuts, tol)?;
    let simplified = quad::integrate_with_breakpoints(
        &|x: f64| {
            let kp = k.k_h_prime(t - x);
            kp * kp * f0.cdf(x) * (1.0 - f0.cdf(x))
        },
        t - h,
        t + h,
        &[],
        tol,
    )?;
    Ok((h3 * full, h3 * simplified))
}
