//! Gradient-boosted regression trees, written from scratch.
//!
//! The engine fits an additive ensemble on squared loss: gradients are
//! `prediction - target`, hessians are 1. Each round grows one tree on
//! quantile-binned features. Two growth strategies share the machinery:
//!
//! * leaf-wise: repeatedly split the leaf with the globally best gain,
//!   bounded by a leaf budget and a depth cap;
//! * symmetric (oblivious): every node at one depth shares a single
//!   (feature, threshold), chosen to maximize the summed gain.
//!
//! Split quality is the regularized squared-loss improvement
//! `1/2 [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - (G_L+G_R)^2/(H_L+H_R+lambda)] - gamma`
//! and the optimal leaf weight is `-G/(H+lambda)`. Splits are accepted only
//! at strictly positive gain. A bagged-trees baseline reuses the leaf-wise
//! grower on bootstrap resamples.

mod bagged;
mod growth;
mod histogram;
mod tree;

pub use bagged::{fit_bagged, fit_bagged_opts, BaggedModel};
pub use histogram::{build_histograms, BinnedMatrix};
pub use tree::{LeafWiseTree, LevelSplit, Node, RegressionTree, SymmetricTree};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::stats;
use growth::{grow_leafwise, grow_symmetric, GrowContext};

/// Knobs for one boosted fit.
///
/// [`Hyperparams::symmetric_defaults`] and [`Hyperparams::leafwise_defaults`]
/// reproduce the reference configuration for the two model families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Number of boosting rounds.
    pub n_estimators: usize,
    /// Shrinkage applied to every tree's contribution.
    pub learning_rate: f64,
    /// Maximum tree depth; 0 permits only the root.
    pub max_depth: usize,
    /// Leaf budget for leaf-wise growth (ignored by symmetric growth).
    pub num_leaves: usize,
    /// Fraction of rows drawn (without replacement) per round.
    pub subsample: f64,
    /// Fraction of features drawn per round.
    pub colsample: f64,
    /// L2 penalty on leaf weights (lambda).
    pub l2_leaf_reg: f64,
    /// Flat cost per split (gamma); splits must clear it strictly.
    pub min_split_gain: f64,
    /// Histogram bins per feature.
    pub n_bins: usize,
    pub seed: u64,
}

impl Hyperparams {
    /// Reference configuration for the symmetric-tree family:
    /// 300 rounds, learning rate 0.03, depth 6, l2_leaf_reg 3, seed 42.
    pub fn symmetric_defaults() -> Hyperparams {
        Hyperparams {
            n_estimators: 300,
            learning_rate: 0.03,
            max_depth: 6,
            num_leaves: 64,
            subsample: 1.0,
            colsample: 1.0,
            l2_leaf_reg: 3.0,
            min_split_gain: 0.0,
            n_bins: 64,
            seed: 42,
        }
    }

    /// Reference configuration for the leaf-wise family: 300 rounds,
    /// learning rate 0.03, depth 4, 31 leaves, subsample 0.7, colsample 0.8.
    pub fn leafwise_defaults() -> Hyperparams {
        Hyperparams {
            n_estimators: 300,
            learning_rate: 0.03,
            max_depth: 4,
            num_leaves: 31,
            subsample: 0.7,
            colsample: 0.8,
            l2_leaf_reg: 0.0,
            min_split_gain: 0.0,
            n_bins: 64,
            seed: 42,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_estimators < 1 {
            return Err(Error::InvalidInput("n_estimators must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "learning_rate must be in (0, 1], got {}",
                self.learning_rate
            )));
        }
        if self.num_leaves < 1 {
            return Err(Error::InvalidInput("num_leaves must be >= 1".into()));
        }
        for (name, v) in [("subsample", self.subsample), ("colsample", self.colsample)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidInput(format!("{name} must be in (0, 1], got {v}")));
            }
        }
        if self.l2_leaf_reg < 0.0 || self.min_split_gain < 0.0 {
            return Err(Error::InvalidInput("regularizers must be >= 0".into()));
        }
        if self.n_bins < 2 {
            return Err(Error::InvalidInput("n_bins must be >= 2".into()));
        }
        Ok(())
    }
}

/// Tree-growth strategy tag carried by fitted models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthStyle {
    LeafWise,
    Symmetric,
}

/// Split gain of the regularized squared-loss objective. Sides with no
/// mass (`H + lambda = 0`) contribute nothing.
pub fn split_gain(g_l: f64, h_l: f64, g_r: f64, h_r: f64, lambda: f64, gamma: f64) -> f64 {
    fn term(g: f64, denom: f64) -> f64 {
        if denom > 0.0 {
            g * g / denom
        } else {
            0.0
        }
    }
    0.5 * (term(g_l, h_l + lambda) + term(g_r, h_r + lambda)
        - term(g_l + g_r, h_l + h_r + lambda))
        - gamma
}

/// Optimal leaf weight `-G / (H + lambda)`. Errors when `H + lambda` is 0.
pub fn leaf_weight(g: f64, h: f64, lambda: f64) -> Result<f64> {
    if h + lambda <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "leaf weight undefined for H + lambda = {}",
            h + lambda
        )));
    }
    Ok(-g / (h + lambda))
}

/// Leaf weight that treats an empty leaf as 0; growers use this so empty
/// symmetric slots stay inert.
pub(crate) fn weight_or_zero(g: f64, h: f64, lambda: f64) -> f64 {
    if h + lambda > 0.0 {
        -g / (h + lambda)
    } else {
        0.0
    }
}

/// An additive ensemble of regression trees. Immutable once fitted;
/// prediction is `base_score + shrinkage * sum(tree outputs)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    style: GrowthStyle,
    base_score: f64,
    shrinkage: f64,
    n_features: usize,
    bin_edges: Vec<Vec<f64>>,
    trees: Vec<RegressionTree>,
}

impl BoostedModel {
    pub fn style(&self) -> GrowthStyle {
        self.style
    }

    pub fn base_score(&self) -> f64 {
        self.base_score
    }

    pub fn shrinkage(&self) -> f64 {
        self.shrinkage
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub fn bin_edges(&self) -> &[Vec<f64>] {
        &self.bin_edges
    }

    pub fn n_splits(&self) -> usize {
        self.trees.iter().map(RegressionTree::n_splits).sum()
    }

    /// True when at least one tree found a split. A model that never split
    /// predicts its base score everywhere.
    pub fn has_splits(&self) -> bool {
        self.n_splits() > 0
    }

    /// Predicts one row, accumulating tree by tree in training order so the
    /// result is bit-identical to the value reached during fitting.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut acc = self.base_score;
        for tree in &self.trees {
            acc += self.shrinkage * tree.predict_row(row);
        }
        acc
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.n_cols() != self.n_features {
            return Err(Error::FeatureMismatch { expected: self.n_features, found: x.n_cols() });
        }
        Ok(x.rows().map(|row| self.predict_row(row)).collect())
    }

    /// Total split gain per feature, normalized to percentages that sum
    /// to 100. Errors on a model with no splits.
    pub fn feature_importance(&self) -> Result<Vec<f64>> {
        let mut totals = vec![0.0; self.n_features];
        for tree in &self.trees {
            tree.accumulate_gain(&mut totals);
        }
        let sum: f64 = totals.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::NoSplits);
        }
        Ok(totals.into_iter().map(|t| t * 100.0 / sum).collect())
    }
}

/// Draws `round(fraction * n)` (at least 1) indices without replacement,
/// ascending. A fraction of 1 returns everything and consumes no
/// randomness, so disabling sampling keeps the rest of the stream intact.
fn sample_fraction(rng: &mut ChaCha8Rng, n: usize, fraction: f64) -> Vec<usize> {
    if fraction >= 1.0 {
        return (0..n).collect();
    }
    let k = ((fraction * n as f64).round() as usize).clamp(1, n);
    let mut indices: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        indices.swap(i, j);
    }
    let mut chosen = indices[..k].to_vec();
    chosen.sort_unstable();
    chosen
}

fn fit_boosted(x: &Matrix, y: &[f64], params: &Hyperparams, style: GrowthStyle) -> Result<BoostedModel> {
    params.validate()?;
    if x.n_rows() != y.len() {
        return Err(Error::LengthMismatch { expected: x.n_rows(), found: y.len() });
    }
    if x.n_rows() < 2 {
        return Err(Error::EmptyInput("boosting needs at least 2 rows"));
    }
    for &v in y {
        if !v.is_finite() {
            return Err(Error::InvalidInput(format!("target contains non-finite value {v}")));
        }
    }

    let binned = build_histograms(x, params.n_bins)?;
    let base_score = stats::mean(y);
    let n = x.n_rows();
    let mut preds = vec![base_score; n];
    let mut grads = vec![0.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut trees = Vec::with_capacity(params.n_estimators);

    for _round in 0..params.n_estimators {
        for i in 0..n {
            grads[i] = preds[i] - y[i];
        }
        // Fixed draw order per round: rows, then features.
        let rows: Vec<u32> =
            sample_fraction(&mut rng, n, params.subsample).into_iter().map(|i| i as u32).collect();
        let features = sample_fraction(&mut rng, x.n_cols(), params.colsample);
        let ctx = GrowContext {
            binned: &binned,
            grads: &grads,
            lambda: params.l2_leaf_reg,
            gamma: params.min_split_gain,
        };
        let tree = match style {
            GrowthStyle::LeafWise => RegressionTree::LeafWise(grow_leafwise(
                &ctx,
                rows,
                &features,
                params.max_depth,
                params.num_leaves,
            )),
            GrowthStyle::Symmetric => {
                RegressionTree::Symmetric(grow_symmetric(&ctx, rows, &features, params.max_depth))
            }
        };
        for i in 0..n {
            preds[i] += params.learning_rate * tree.predict_row(x.row(i));
        }
        trees.push(tree);
    }

    Ok(BoostedModel {
        style,
        base_score,
        shrinkage: params.learning_rate,
        n_features: x.n_cols(),
        bin_edges: binned.edges,
        trees,
    })
}

/// Fits a leaf-wise (best-first) boosted ensemble.
pub fn fit_leafwise(x: &Matrix, y: &[f64], params: &Hyperparams) -> Result<BoostedModel> {
    fit_boosted(x, y, params, GrowthStyle::LeafWise)
}

/// Fits a symmetric-tree (oblivious) boosted ensemble.
pub fn fit_symmetric(x: &Matrix, y: &[f64], params: &Hyperparams) -> Result<BoostedModel> {
    fit_boosted(x, y, params, GrowthStyle::Symmetric)
}
