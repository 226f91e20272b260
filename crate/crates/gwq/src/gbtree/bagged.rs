//! Bagged regression trees: the bootstrap-aggregation baseline.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::growth::{grow_leafwise, GrowContext};
use super::histogram::build_histograms;
use super::tree::RegressionTree;
use super::Hyperparams;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// An ensemble of independently grown trees whose prediction is the
/// unweighted mean of the per-tree outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggedModel {
    n_features: usize,
    bin_edges: Vec<Vec<f64>>,
    trees: Vec<RegressionTree>,
}

impl BaggedModel {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    /// Each tree's predictions, one vector per tree.
    pub fn tree_predictions(&self, x: &Matrix) -> Result<Vec<Vec<f64>>> {
        if x.n_cols() != self.n_features {
            return Err(Error::FeatureMismatch { expected: self.n_features, found: x.n_cols() });
        }
        Ok(self
            .trees
            .iter()
            .map(|tree| x.rows().map(|row| tree.predict_row(row)).collect())
            .collect())
    }

    /// Arithmetic mean of the per-tree predictions.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.n_cols() != self.n_features {
            return Err(Error::FeatureMismatch { expected: self.n_features, found: x.n_cols() });
        }
        let m = self.trees.len() as f64;
        Ok(x.rows()
            .map(|row| self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / m)
            .collect())
    }
}

/// Fits `n_trees` trees, each on a bootstrap resample of size n (with
/// replacement). Tree shape comes from `params` (depth, leaves, colsample,
/// regularizers); subsampling and shrinkage do not apply here.
pub fn fit_bagged(
    x: &Matrix,
    y: &[f64],
    n_trees: usize,
    params: &Hyperparams,
    seed: u64,
) -> Result<BaggedModel> {
    fit_bagged_opts(x, y, n_trees, params, seed, true)
}

/// [`fit_bagged`] with the bootstrap optional; `bootstrap = false` grows
/// every tree on the full data, as scikit-learn's `bootstrap=False` does.
pub fn fit_bagged_opts(
    x: &Matrix,
    y: &[f64],
    n_trees: usize,
    params: &Hyperparams,
    seed: u64,
    bootstrap: bool,
) -> Result<BaggedModel> {
    if n_trees < 1 {
        return Err(Error::InvalidInput("bagging needs n_trees >= 1".into()));
    }
    if x.n_rows() != y.len() {
        return Err(Error::LengthMismatch { expected: x.n_rows(), found: y.len() });
    }
    if x.n_rows() < 2 {
        return Err(Error::EmptyInput("bagging needs at least 2 rows"));
    }

    let binned = build_histograms(x, params.n_bins)?;
    let n = x.n_rows();
    // Trees regress on y directly: with all predictions at 0 the gradient
    // is -y, so the optimal leaf weight is the (regularized) leaf mean.
    let grads: Vec<f64> = y.iter().map(|v| -v).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trees = Vec::with_capacity(n_trees);

    for _ in 0..n_trees {
        let mut rows: Vec<u32> = if bootstrap {
            (0..n).map(|_| rng.random_range(0..n) as u32).collect()
        } else {
            (0..n as u32).collect()
        };
        rows.sort_unstable();
        let features = if params.colsample >= 1.0 {
            (0..x.n_cols()).collect()
        } else {
            super::sample_fraction(&mut rng, x.n_cols(), params.colsample)
        };
        let ctx = GrowContext {
            binned: &binned,
            grads: &grads,
            lambda: params.l2_leaf_reg,
            gamma: params.min_split_gain,
        };
        trees.push(RegressionTree::LeafWise(grow_leafwise(
            &ctx,
            rows,
            &features,
            params.max_depth,
            params.num_leaves,
        )));
    }
    Ok(BaggedModel { n_features: x.n_cols(), bin_edges: binned.edges, trees })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;
    use rand::Rng;

    fn regression_data(n: usize, seed: u64) -> (Matrix, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let y = rows.iter().map(|r| 2.0 * r[0] - r[1]).collect();
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    fn tree_params() -> Hyperparams {
        Hyperparams {
            n_estimators: 1,
            max_depth: 6,
            num_leaves: 31,
            l2_leaf_reg: 0.0,
            ..Hyperparams::leafwise_defaults()
        }
    }

    #[test]
    fn single_tree_without_bootstrap_is_that_tree() {
        let (x, y) = regression_data(80, 21);
        let model = fit_bagged_opts(&x, &y, 1, &tree_params(), 0, false).unwrap();
        let mean_pred = model.predict(&x).unwrap();
        let per_tree = model.tree_predictions(&x).unwrap();
        assert_eq!(per_tree.len(), 1);
        assert_eq!(mean_pred, per_tree[0]);
    }

    #[test]
    fn constant_target_predicts_the_constant() {
        let (x, _) = regression_data(40, 22);
        let y = vec![3.5; 40];
        let model = fit_bagged(&x, &y, 7, &tree_params(), 1).unwrap();
        for p in model.predict(&x).unwrap() {
            assert!((p - 3.5).abs() < 1e-12);
        }
    }

    #[test]
    fn prediction_is_mean_of_tree_predictions() {
        let (x, y) = regression_data(60, 23);
        let model = fit_bagged(&x, &y, 9, &tree_params(), 2).unwrap();
        let combined = model.predict(&x).unwrap();
        let per_tree = model.tree_predictions(&x).unwrap();
        for (i, &p) in combined.iter().enumerate() {
            let mean = stats::mean(&per_tree.iter().map(|t| t[i]).collect::<Vec<_>>());
            assert!((p - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn bagging_is_seed_deterministic() {
        let (x, y) = regression_data(50, 24);
        let a = fit_bagged(&x, &y, 5, &tree_params(), 7).unwrap();
        let b = fit_bagged(&x, &y, 5, &tree_params(), 7).unwrap();
        assert_eq!(a, b);
        let c = fit_bagged(&x, &y, 5, &tree_params(), 8).unwrap();
        assert_ne!(a.predict(&x).unwrap(), c.predict(&x).unwrap());
    }

    #[test]
    fn bagged_fit_learns_a_linear_target_roughly() {
        let (x, y) = regression_data(400, 25);
        let model = fit_bagged(&x, &y, 30, &tree_params(), 3).unwrap();
        let pred = model.predict(&x).unwrap();
        let r2 = super::super::tests::r2(&y, &pred);
        assert!(r2 > 0.9, "R2 = {r2}");
    }
}
