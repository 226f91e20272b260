//! Shared scalar statistics: mean, population standard deviation and
//! linearly interpolated quantiles.
//!
//! Everything in this crate uses the population convention (divide by `n`)
//! and the linear quantile rule (interpolate between order statistics at
//! position `q * (n - 1)`), so summaries, fences and the scaler all agree.

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation, `sqrt(sum((x - mean)^2) / n)`.
pub fn population_std(values: &[f64], mean: f64) -> f64 {
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    var.sqrt()
}

/// Quantile of an ascending-sorted slice, linearly interpolating between
/// order statistics. `q` must be in `[0, 1]` and the slice non-empty.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!((0.0..=1.0).contains(&q));
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Sorts a copy of `values` and returns the requested quantile.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    quantile_sorted(&sorted, q)
}
