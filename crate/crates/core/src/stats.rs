//! Order-fixed reductions for Monte Carlo estimates.
//!
//! Sums are pairwise trees over the sample index, so results are bit-identical
//! no matter how many threads produced the samples.

/// Pairwise tree sum of `values[lo..hi)` through an accessor.
fn tree_sum<F: Fn(usize) -> f64 + Copy>(lo: usize, hi: usize, get: F) -> f64 {
    match hi - lo {
        0 => 0.0,
        1 => get(lo),
        2 => get(lo) + get(lo + 1),
        len => {
            let mid = lo + len / 2;
            tree_sum(lo, mid, get) + tree_sum(mid, hi, get)
        }
    }
}

/// Pairwise tree sum of a slice.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    tree_sum(0, values.len(), |i| values[i])
}

/// Pairwise tree sum of `f(i)` for `i` in `0..n`.
pub(crate) fn pairwise_sum_by<F: Fn(usize) -> f64 + Copy>(n: usize, f: F) -> f64 {
    tree_sum(0, n, f)
}

/// Sample mean and standard error of the mean (`s / sqrt(n)`), `n >= 2`.
pub(crate) fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    debug_assert!(n >= 2);
    let mean = pairwise_sum(values) / n as f64;
    let ss = pairwise_sum_by(n, |i| {
        let d = values[i] - mean;
        d * d
    });
    let var = ss / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}
