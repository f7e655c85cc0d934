//! Grid-search oracle for small instances: exhaustive enumeration of
//! monotone value vectors on the free points at a coarse resolution,
//! followed by local grid refinement around the incumbent (the likelihood
//! is concave, so the coarse argmax brackets the maximizer). Intended for
//! tests against the iterative solver.

use crate::censor::SupportSet;
use crate::dist::ObservationSet;
use crate::mle::problem::Problem;
use crate::mle::MleError;
use crate::step::StepDistribution;

const MAX_FREE_POINTS: usize = 4;
const COARSE_STEP: f64 = 1.0 / 64.0;
const REFINE_FACTOR: f64 = 8.0;

pub fn brute_force_mle(
    obs: &ObservationSet,
    grid_step: f64,
) -> Result<StepDistribution, MleError> {
    if !(grid_step >= 1e-4) {
        return Err(MleError::BadConfig {
            reason: format!("brute force grid_step must be at least 1e-4, got {grid_step}"),
        });
    }
    let intervals = obs.intervals();
    let support = SupportSet::from_intervals(&intervals)?;
    let problem = Problem::new(&intervals, support);
    let m = problem.free_count();
    if m == 0 {
        return problem.assemble(&[]);
    }
    if m > MAX_FREE_POINTS {
        return Err(MleError::TooManyFreePoints { count: m, max: MAX_FREE_POINTS });
    }

    // Full enumeration on the coarse grid.
    let coarse: Vec<f64> = (0..=(1.0 / COARSE_STEP) as usize)
        .map(|j| j as f64 * COARSE_STEP)
        .collect();
    let grids: Vec<&[f64]> = vec![&coarse[..]; m];
    let mut best = vec![0.5; m];
    let mut best_ll = f64::NEG_INFINITY;
    enumerate(&problem, &grids, &mut vec![0.0; m], 0, &mut best, &mut best_ll);

    // Local refinement: shrink the window around the incumbent until the
    // spacing reaches the requested resolution. The incumbent itself stays
    // on every finer grid, so the objective never decreases.
    let mut step = COARSE_STEP;
    while step > grid_step {
        let fine = step / REFINE_FACTOR;
        let windows: Vec<Vec<f64>> = best
            .iter()
            .map(|&b| {
                let lo = (b - step).max(0.0);
                let hi = (b + step).min(1.0);
                let k = ((hi - lo) / fine).round() as usize;
                (0..=k).map(|j| (lo + j as f64 * fine).min(hi)).collect()
            })
            .collect();
        let grids: Vec<&[f64]> = windows.iter().map(|w| w.as_slice()).collect();
        enumerate(&problem, &grids, &mut vec![0.0; m], 0, &mut best, &mut best_ll);
        step = fine;
    }

    problem.assemble(&best)
}

fn enumerate(
    problem: &Problem,
    grids: &[&[f64]],
    current: &mut Vec<f64>,
    depth: usize,
    best: &mut Vec<f64>,
    best_ll: &mut f64,
) {
    if depth == grids.len() {
        let ll = problem.loglik(current);
        if ll > *best_ll {
            *best_ll = ll;
            best.copy_from_slice(current);
        }
        return;
    }
    let floor = if depth == 0 { f64::NEG_INFINITY } else { current[depth - 1] };
    for &v in grids[depth] {
        if v < floor {
            continue;
        }
        current[depth] = v;
        enumerate(problem, grids, current, depth + 1, best, best_ll);
    }
}
