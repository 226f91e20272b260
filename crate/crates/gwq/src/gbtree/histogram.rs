//! Quantile binning of feature matrices for histogram-based split search.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::stats;

/// Per-feature bin edges plus the binned matrix, stored feature-major.
///
/// A value lands in bin `b` where `b` counts the edges strictly below it,
/// so bin 0 is `(-inf, edges[0]]` and the last bin is `(edges[last], inf)`.
/// Binning is monotone by construction. A feature with no edges has a
/// single bin and can never be split.
#[derive(Debug, Clone)]
pub struct BinnedMatrix {
    pub edges: Vec<Vec<f64>>,
    /// `bins[feature][row]`
    pub bins: Vec<Vec<u16>>,
    pub n_rows: usize,
}

impl BinnedMatrix {
    pub fn n_features(&self) -> usize {
        self.edges.len()
    }

    /// Number of bins a feature was cut into.
    pub fn n_bins(&self, feature: usize) -> usize {
        self.edges[feature].len() + 1
    }
}

/// Cuts every feature at its `i / n_bins` quantiles (linear interpolation),
/// dropping edges that separate nothing, and bins all values.
pub fn build_histograms(x: &Matrix, n_bins: usize) -> Result<BinnedMatrix> {
    if x.n_rows() == 0 || x.n_cols() == 0 {
        return Err(Error::EmptyInput("binning needs a non-empty matrix"));
    }
    if n_bins < 2 {
        return Err(Error::InvalidInput(format!("n_bins must be >= 2, got {n_bins}")));
    }
    let mut edges = Vec::with_capacity(x.n_cols());
    let mut bins = Vec::with_capacity(x.n_cols());
    for feature in 0..x.n_cols() {
        let mut sorted = x.column(feature);
        for v in &sorted {
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "feature {feature} contains non-finite value {v}"
                )));
            }
        }
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        let max = sorted[sorted.len() - 1];

        let mut feature_edges: Vec<f64> = Vec::with_capacity(n_bins - 1);
        for i in 1..n_bins {
            let e = stats::quantile_sorted(&sorted, i as f64 / n_bins as f64);
            // An edge only earns its keep if something lies on each side.
            if e < max && feature_edges.last().map_or(true, |prev| e > *prev) {
                feature_edges.push(e);
            }
        }

        let feature_bins = (0..x.n_rows())
            .map(|row| feature_edges.partition_point(|e| *e < x.get(row, feature)) as u16)
            .collect();
        edges.push(feature_edges);
        bins.push(feature_bins);
    }
    Ok(BinnedMatrix { edges, bins, n_rows: x.n_rows() })
}
