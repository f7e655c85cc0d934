//! One-step estimator for current-status data: the left derivative of the
//! greatest convex minorant of the cusum diagram of the status indicators,
//! i.e. isotonic regression of the Δ's. Values are local averages and
//! therefore rational.

use crate::censor::CurrentStatusData;
use crate::isotonic::weighted_isotonic;
use crate::mle::MleError;
use crate::step::StepDistribution;

pub fn cusum_pava_mle(data: &CurrentStatusData) -> Result<StepDistribution, MleError> {
    if data.is_empty() {
        return Err(MleError::EmptyData);
    }
    let y = data.y();
    let delta = data.delta();
    // Tied inspection times carry one point with a pooled Bernoulli mean.
    let mut points = Vec::new();
    let mut means = Vec::new();
    let mut weights = Vec::new();
    let mut i = 0;
    while i < y.len() {
        let mut j = i;
        let mut sum = 0.0;
        while j < y.len() && y[j] == y[i] {
            sum += delta[j] as f64;
            j += 1;
        }
        points.push(y[i]);
        means.push(sum / (j - i) as f64);
        weights.push((j - i) as f64);
        i = j;
    }
    let fitted = weighted_isotonic(&means, &weights);
    Ok(StepDistribution::new(points, fitted)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::censor::to_current_status;
    use crate::dist::ObservationSet;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn cs(y: &[f64], delta: &[u8]) -> CurrentStatusData {
        // Build through the public transform to keep one construction path:
        // S = y on delta = 1, S = y + 1 on delta = 0.
        let s: Vec<f64> =
            y.iter().zip(delta).map(|(&y, &d)| if d == 1 { y } else { y + 1.0 }).collect();
        to_current_status(&ObservationSet::fixed(s).unwrap()).unwrap()
    }

    #[test]
    fn monotone_data_is_untouched() {
        let est = cusum_pava_mle(&cs(&[0.2, 0.8], &[0, 1])).unwrap();
        assert_eq!(est.values(), &[0.0, 1.0]);
    }

    #[test]
    fn single_violation_pools_to_half() {
        // Oracle: maximize t^δ1 (1-t)^δ2 pooled Bernoulli likelihood over
        // monotone pairs on a fine grid.
        let est = cusum_pava_mle(&cs(&[0.2, 0.8], &[1, 0])).unwrap();
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for i in 0..=1000 {
            for j in i..=1000 {
                let (a, b) = (i as f64 / 1000.0, j as f64 / 1000.0);
                let ll = a.max(1e-300).ln() + (1.0 - b).max(1e-300).ln();
                if ll > best.0 {
                    best = (ll, a, b);
                }
            }
        }
        assert_abs_diff_eq!(est.values()[0], best.1, epsilon = 1e-3);
        assert_abs_diff_eq!(est.values()[1], best.2, epsilon = 1e-3);
        assert_eq!(est.values()[0], 0.5);
        assert_eq!(est.values()[1], 0.5);
    }

    #[test]
    fn two_ones_then_zero_pools_to_two_thirds() {
        let est = cusum_pava_mle(&cs(&[0.1, 0.4, 0.9], &[1, 1, 0])).unwrap();
        for &v in est.values() {
            assert_abs_diff_eq!(v, 2.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn tied_inspection_times_are_pooled() {
        let est = cusum_pava_mle(&cs(&[0.5, 0.5, 0.9], &[1, 0, 1])).unwrap();
        assert_eq!(est.points().len(), 2);
        assert_eq!(est.evaluate(0.5), 0.5);
        assert_eq!(est.evaluate(0.9), 1.0);
    }

    proptest! {
        #[test]
        fn values_are_block_means_of_indicators(
            rows in proptest::collection::vec((0.001f64..0.999, 0u8..2), 1..60)
        ) {
            let y: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let d: Vec<u8> = rows.iter().map(|r| r.1).collect();
            let data = cs(&y, &d);
            let est = cusum_pava_mle(&data).unwrap();
            // Direct block scan: runs of equal fitted value must average the
            // sorted indicators exactly.
            let fit: Vec<f64> = data.y().iter().map(|&t| est.evaluate(t)).collect();
            let mut i = 0;
            while i < fit.len() {
                let mut j = i;
                let mut sum = 0.0;
                while j < fit.len() && fit[j] == fit[i] {
                    sum += data.delta()[j] as f64;
                    j += 1;
                }
                let mean = sum / (j - i) as f64;
                prop_assert!((fit[i] - mean).abs() < 1e-12);
                i = j;
            }
            for w in fit.windows(2) {
                prop_assert!(w[0] <= w[1] + 1e-12);
            }
        }
    }
}
