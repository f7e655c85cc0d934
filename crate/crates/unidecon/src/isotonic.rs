//! Weighted isotonic regression by pool-adjacent-violators.
//!
//! This is the projection step shared by the cusum/PAVA estimator for
//! current-status data and the inner quadratic subproblem of the iterative
//! convex minorant solver. Values are read off as left derivatives of the
//! greatest convex minorant of the cusum diagram; pooling is leftmost-first,
//! so collinear segments merge into the larger left block.

/// Least-squares fit of a nondecreasing vector to `values` with positive
/// `weights`. Returns the fitted vector, same length.
///
/// Each fitted value is the weighted mean of a pooled block of inputs.
pub fn weighted_isotonic(values: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), weights.len());
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    // Block stack: (mean, total weight, block length).
    let mut mean = Vec::with_capacity(n);
    let mut wsum = Vec::with_capacity(n);
    let mut len = Vec::with_capacity(n);
    for i in 0..n {
        mean.push(values[i]);
        wsum.push(weights[i]);
        len.push(1usize);
        while mean.len() > 1 && mean[mean.len() - 2] > mean[mean.len() - 1] {
            let (m1, w1) = (mean.pop().unwrap(), wsum.pop().unwrap());
            let l1 = len.pop().unwrap();
            let k = mean.len() - 1;
            let w = wsum[k] + w1;
            mean[k] = (wsum[k] * mean[k] + w1 * m1) / w;
            wsum[k] = w;
            len[k] += l1;
        }
    }
    let mut out = Vec::with_capacity(n);
    for (m, l) in mean.iter().zip(&len) {
        for _ in 0..*l {
            out.push(*m);
        }
    }
    out
}

/// Unweighted convenience wrapper.
pub fn isotonic(values: &[f64]) -> Vec<f64> {
    weighted_isotonic(values, &vec![1.0; values.len()])
}
