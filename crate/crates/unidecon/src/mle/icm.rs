//! Iterative convex minorant solver with backtracking line search.
//!
//! At the current iterate the local quadratic model with diagonal curvature
//! surrogate 1/(F(r)-F(l))^2 per interval is minimized over nondecreasing
//! vectors — a weighted isotonic regression solved by pool-adjacent-violators
//! — and the resulting full step is damped by backtracking until an
//! Armijo-type sufficient-increase condition on the log likelihood holds.
//! Iteration stops when the Fenchel certificate passes at tolerance.

use crate::censor::{build_support_set, SupportSet};
use crate::dist::{ModelKind, ObservationSet};
use crate::isotonic::weighted_isotonic;
use crate::mle::problem::Problem;
use crate::mle::{FenchelReport, IcmConfig, MleError};
use crate::step::StepDistribution;

/// Result of an iterative convex minorant run. `converged` mirrors
/// `fenchel.satisfied`; a non-converged run still carries its best iterate.
#[derive(Debug, Clone)]
pub struct IcmSolution {
    pub distribution: StepDistribution,
    pub fenchel: FenchelReport,
    pub iterations: usize,
    pub converged: bool,
    /// Mean-form log likelihood of the final iterate.
    pub loglik: f64,
    /// Log likelihood after each accepted step (ascent by construction).
    pub loglik_trace: Vec<f64>,
}

/// Maximum likelihood estimator for a fixed-model sample with at least one
/// observation above 1. Samples entirely inside the unit interval route to
/// the current-status path instead (signalled by the support-set error).
pub fn icm_solve_fixed(obs: &ObservationSet, cfg: &IcmConfig) -> Result<IcmSolution, MleError> {
    if obs.kind() != ModelKind::Fixed {
        return Err(MleError::WrongModelKind { expected: ModelKind::Fixed });
    }
    cfg.validate()?;
    let support = build_support_set(obs)?;
    solve(obs.intervals(), support, cfg)
}

/// Maximum likelihood estimator for a mixed-model sample; intervals
/// (S_i - E_i, S_i] replace the unit-length intervals throughout. With unit
/// exposures the output is identical to the fixed solver's.
pub fn icm_solve_mixed(obs: &ObservationSet, cfg: &IcmConfig) -> Result<IcmSolution, MleError> {
    if obs.kind() != ModelKind::Mixed {
        return Err(MleError::WrongModelKind { expected: ModelKind::Mixed });
    }
    cfg.validate()?;
    let intervals = obs.intervals();
    let support = SupportSet::from_intervals(&intervals)?;
    if support.forced_one_from().is_infinite() {
        // No interval has a positive left endpoint: the likelihood is
        // Σ log F(S_i), maximized by the fully forced F = 1 from min S on.
        let points = support.candidate_points().to_vec();
        let values = vec![1.0; points.len()];
        let distribution = StepDistribution::new(points, values)?;
        return Ok(IcmSolution {
            distribution,
            fenchel: FenchelReport::from_residuals(0.0, 0.0, cfg.fenchel_tolerance),
            iterations: 0,
            converged: true,
            loglik: 0.0,
            loglik_trace: vec![0.0],
        });
    }
    solve(intervals, support, cfg)
}

fn solve(
    intervals: Vec<(f64, f64)>,
    support: SupportSet,
    cfg: &IcmConfig,
) -> Result<IcmSolution, MleError> {
    let problem = Problem::new(&intervals, support);
    let m = problem.free_count();
    if m == 0 {
        // Fully forced class: a single candidate function, optimal by
        // construction; both certificate residuals are empty sums.
        let distribution = problem.assemble(&[])?;
        let loglik = problem.loglik(&[]);
        return Ok(IcmSolution {
            distribution,
            fenchel: FenchelReport::from_residuals(0.0, 0.0, cfg.fenchel_tolerance),
            iterations: 0,
            converged: true,
            loglik,
            loglik_trace: vec![loglik],
        });
    }

    // Strictly interior nondecreasing start: k/(m+1) at the k-th free point.
    let mut x: Vec<f64> = (1..=m).map(|k| k as f64 / (m + 1) as f64).collect();
    let mut grad = vec![0.0; m];
    let mut curv = vec![0.0; m];
    let mut target = vec![0.0; m];
    let mut trial = vec![0.0; m];
    let mut loglik = problem.loglik(&x);
    let mut trace = vec![loglik];
    let mut report;
    let mut iterations = 0;
    let mut stalled = false;

    loop {
        // Accepted iterates keep the likelihood finite, so every interval
        // probability is positive here; the zero floor only guards against
        // exact collapse.
        problem.gradient_and_curvature(&x, 0.0, &mut grad, &mut curv)?;
        let (max_tail, inner) = problem.fenchel_residuals(&x, &grad);
        report = FenchelReport::from_residuals(max_tail, inner, cfg.fenchel_tolerance);
        if report.satisfied || iterations >= cfg.max_iterations {
            break;
        }
        if stalled {
            // The damped step can no longer make progress the line search
            // can measure (likelihood changes below f64 resolution). What
            // remains is to zero the per-block gradient sums; do that on
            // the pooled block representation, where the Newton correction
            // is not drowned by intra-block rounding noise.
            let moved = pooled_polish(&problem, cfg, &mut x, &mut grad, &mut curv);
            problem.gradient_and_curvature(&x, 0.0, &mut grad, &mut curv)?;
            let (max_tail, inner) = problem.fenchel_residuals(&x, &grad);
            report = FenchelReport::from_residuals(max_tail, inner, cfg.fenchel_tolerance);
            loglik = problem.loglik(&x);
            if !moved || report.satisfied {
                break;
            }
            stalled = false;
        }
        iterations += 1;

        for k in 0..m {
            target[k] = x[k] + grad[k] / curv[k];
        }
        let mut proposal = weighted_isotonic(&target, &curv);
        for v in proposal.iter_mut() {
            *v = v.clamp(cfg.value_floor, 1.0 - cfg.value_floor);
        }
        let descent: f64 =
            grad.iter().zip(&proposal).zip(&x).map(|((g, p), x)| g * (p - x)).sum();
        if descent <= 0.0 {
            stalled = true;
            continue;
        }

        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-16 {
            for k in 0..m {
                trial[k] = x[k] + lambda * (proposal[k] - x[k]);
            }
            let cand = problem.loglik(&trial);
            if cand >= loglik + cfg.line_search_slope * lambda * descent {
                stalled = cand - loglik <= 1e-14 * (1.0 + loglik.abs());
                x.copy_from_slice(&trial);
                loglik = cand;
                trace.push(cand);
                accepted = true;
                break;
            }
            lambda *= cfg.line_search_shrink;
        }
        if !accepted {
            stalled = true;
        }
    }

    let distribution = problem.assemble(&x)?;
    Ok(IcmSolution {
        distribution,
        converged: report.satisfied,
        fenchel: report,
        iterations,
        loglik,
        loglik_trace: trace,
    })
}

/// Newton passes on the pooled block values of the current iterate: blocks
/// are maximal runs of equal value; each pass projects the pooled Newton
/// targets back onto the monotone cone. Returns whether the iterate moved.
/// A pass that would lower the likelihood beyond rounding is rejected.
fn pooled_polish(
    problem: &Problem,
    cfg: &IcmConfig,
    x: &mut Vec<f64>,
    grad: &mut [f64],
    curv: &mut [f64],
) -> bool {
    let m = x.len();
    let mut moved = false;
    let mut loglik = problem.loglik(x);
    for _ in 0..50 {
        if problem.gradient_and_curvature(x, 0.0, grad, curv).is_err() {
            return moved;
        }
        let (max_tail, inner) = problem.fenchel_residuals(x, grad);
        if max_tail <= cfg.fenchel_tolerance && inner.abs() <= cfg.fenchel_tolerance {
            return moved;
        }
        let mut block_target = Vec::new();
        let mut block_w = Vec::new();
        let mut block_len = Vec::new();
        let mut i = 0;
        while i < m {
            let mut j = i;
            let mut g_sum = 0.0;
            let mut w_sum = 0.0;
            while j < m && x[j] == x[i] {
                g_sum += grad[j];
                w_sum += curv[j];
                j += 1;
            }
            block_target.push(x[i] + g_sum / w_sum);
            block_w.push(w_sum);
            block_len.push(j - i);
            i = j;
        }
        let fitted = weighted_isotonic(&block_target, &block_w);
        let mut candidate = Vec::with_capacity(m);
        for (b, &len) in fitted.iter().zip(&block_len) {
            let v = b.clamp(cfg.value_floor, 1.0 - cfg.value_floor);
            for _ in 0..len {
                candidate.push(v);
            }
        }
        if candidate == *x {
            return moved;
        }
        let cand_ll = problem.loglik(&candidate);
        if cand_ll < loglik - 1e-11 * (1.0 + loglik.abs()) {
            return moved;
        }
        *x = candidate;
        loglik = cand_ll;
        moved = true;
    }
    moved
}
