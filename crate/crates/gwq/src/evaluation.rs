//! Regression metrics, k-fold cross-validation and blended importances.
//!
//! Cross-validation follows the leakage rules strictly: imputation
//! statistics and the scaler are fitted on each training fold alone and
//! applied to the held-out fold; blend weights are fitted on training-fold
//! predictions. Quality-index targets are computed from raw (unscaled)
//! indicator values, since the WHO limits live in physical units.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::de::DeConfig;
use crate::error::{Error, Result};
use crate::fusion::{self, FusionWeights};
use crate::gbtree::{self, BoostedModel, Hyperparams};
use crate::gwqi::{self, WhoLimits};
use crate::preprocess::{impute_with_means, Scaler};
use crate::stats;
use crate::table::{SampleTable, CORE_INDICATORS};

/// The four regression metrics. `r2` is `None` when the true values are
/// constant, which leaves it undefined; the other metrics still apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub rmse: f64,
    pub mse: f64,
    pub mae: f64,
    pub r2: Option<f64>,
}

/// RMSE, MSE, MAE and R^2 against the mean baseline.
pub fn metrics(y_true: &[f64], y_pred: &[f64]) -> Result<MetricSet> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch { expected: y_true.len(), found: y_pred.len() });
    }
    if y_true.is_empty() {
        return Err(Error::EmptyInput("metrics need at least one sample"));
    }
    let n = y_true.len() as f64;
    let mut sq = 0.0;
    let mut abs = 0.0;
    for (t, p) in y_true.iter().zip(y_pred) {
        let d = t - p;
        sq += d * d;
        abs += d.abs();
    }
    let mse = sq / n;
    let mean = stats::mean(y_true);
    let ss_tot: f64 = y_true.iter().map(|t| (t - mean) * (t - mean)).sum();
    let r2 = if ss_tot > 0.0 { Some(1.0 - sq / ss_tot) } else { None };
    Ok(MetricSet { rmse: mse.sqrt(), mse, mae: abs / n, r2 })
}

/// Seeded k-fold assignment over `0..n`: the ids are shuffled, the first
/// `n % k` validation folds take `ceil(n / k)` ids and the rest take
/// `floor(n / k)`; each fold's training side is the complement.
pub fn kfold_split(
    n: usize,
    k: usize,
    seed: u64,
    shuffle: bool,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 || k > n {
        return Err(Error::InvalidInput(format!("k must satisfy 2 <= k <= n, got k={k}, n={n}")));
    }
    let mut ids: Vec<usize> = (0..n).collect();
    if shuffle {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ids.shuffle(&mut rng);
    }
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        let validation: Vec<usize> = ids[start..start + size].to_vec();
        let train: Vec<usize> =
            ids[..start].iter().chain(&ids[start + size..]).copied().collect();
        folds.push((train, validation));
        start += size;
    }
    Ok(folds)
}

/// Per-fold metrics for the three models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub train: MetricSet,
    pub validation: MetricSet,
}

/// Metrics keyed by model family: `cat` is the symmetric-tree booster,
/// `lgb` the leaf-wise booster and `fusion` their weighted blend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetrics {
    pub cat: SplitMetrics,
    pub lgb: SplitMetrics,
    pub fusion: SplitMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_ids: Vec<usize>,
    pub validation_ids: Vec<usize>,
    pub models: ModelMetrics,
    pub fusion_weights: FusionWeights,
}

/// Full cross-validation report. Aggregates are arithmetic means of the
/// per-fold values; importances are the blended per-feature percentages
/// averaged over folds (each fold's vector sums to 100, so the mean does
/// too).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldReport>,
    pub aggregates: ModelMetrics,
    pub importances: BTreeMap<String, f64>,
}

impl CvReport {
    /// Flat per-fold metric table: `fold,model,split,rmse,mse,mae,r2`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("fold,model,split,rmse,mse,mae,r2\n");
        for fold in &self.folds {
            for (model, split_metrics) in
                [("cat", &fold.models.cat), ("lgb", &fold.models.lgb), ("fusion", &fold.models.fusion)]
            {
                for (split, m) in
                    [("train", &split_metrics.train), ("validation", &split_metrics.validation)]
                {
                    let r2 = m.r2.map(|v| v.to_string()).unwrap_or_default();
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        fold.fold, model, split, m.rmse, m.mse, m.mae, r2
                    ));
                }
            }
        }
        out
    }
}

fn mean_metric_sets(sets: &[MetricSet]) -> MetricSet {
    let n = sets.len() as f64;
    let r2 = if sets.iter().all(|m| m.r2.is_some()) {
        Some(sets.iter().map(|m| m.r2.unwrap()).sum::<f64>() / n)
    } else {
        None
    };
    MetricSet {
        rmse: sets.iter().map(|m| m.rmse).sum::<f64>() / n,
        mse: sets.iter().map(|m| m.mse).sum::<f64>() / n,
        mae: sets.iter().map(|m| m.mae).sum::<f64>() / n,
        r2,
    }
}

/// Blends the two models' gain importances as
/// `(w_cat * I_cat + w_lgb * I_lgb) / (w_cat + w_lgb)`; each side is
/// normalized to sum to 100 first, so the output does too.
pub fn fused_importance(
    model_cat: &BoostedModel,
    model_lgb: &BoostedModel,
    w: &FusionWeights,
) -> Result<Vec<f64>> {
    if model_cat.n_features() != model_lgb.n_features() {
        return Err(Error::FeatureMismatch {
            expected: model_cat.n_features(),
            found: model_lgb.n_features(),
        });
    }
    let denom = w.w_cat + w.w_lgb;
    if denom == 0.0 {
        return Err(Error::InvalidInput("fused importance undefined for w_cat + w_lgb = 0".into()));
    }
    let cat = model_cat.feature_importance()?;
    let lgb = model_lgb.feature_importance()?;
    Ok(cat
        .iter()
        .zip(&lgb)
        .map(|(c, l)| (w.w_cat * c + w.w_lgb * l) / denom)
        .collect())
}

/// Runs k-fold cross-validation of both boosted models and their blend on
/// a cleaned table. `seed` drives the fold shuffle; fold `f` fits its blend
/// with DE seed `seed + f`.
pub fn cross_validate(
    table: &SampleTable,
    limits: &WhoLimits,
    params_cat: &Hyperparams,
    params_lgb: &Hyperparams,
    de: &DeConfig,
    k: usize,
    seed: u64,
) -> Result<CvReport> {
    let n = table.n_rows();
    if k < 2 || n < 2 * k {
        return Err(Error::InvalidInput(format!(
            "cross-validation needs 2 <= k and n >= 2k, got k={k}, n={n}"
        )));
    }
    // Targets come from raw indicator values; the limits are in physical
    // units, so scaling must not touch them.
    let targets = gwqi::compute_targets(table, limits)?;
    let folds = kfold_split(n, k, seed, true)?;
    let feature_columns: Vec<&str> = CORE_INDICATORS.to_vec();

    let mut fold_reports = Vec::with_capacity(k);
    let mut importance_acc = vec![0.0; feature_columns.len()];

    for (fold, (train_ids, validation_ids)) in folds.into_iter().enumerate() {
        let train_rows: Vec<_> = train_ids.iter().map(|&i| table.rows()[i].clone()).collect();
        let val_rows: Vec<_> = validation_ids.iter().map(|&i| table.rows()[i].clone()).collect();
        let train_table = table.with_rows(train_rows);
        let val_table = table.with_rows(val_rows);

        // Fold-local preprocessing: training-fold statistics everywhere.
        let train_table = impute_with_means(&train_table, &train_table)?;
        let val_table = impute_with_means(&train_table, &val_table)?;
        let scaler = Scaler::fit(&train_table, &feature_columns)?;
        let x_train = scaler.transform(&train_table)?;
        let x_val = scaler.transform(&val_table)?;

        let y_train: Vec<f64> = train_ids.iter().map(|&i| targets[i]).collect();
        let y_val: Vec<f64> = validation_ids.iter().map(|&i| targets[i]).collect();
        let y_mean = stats::mean(&y_train);
        if stats::population_std(&y_train, y_mean) == 0.0 {
            return Err(Error::InvalidInput(format!(
                "fold {fold}: training targets are constant"
            )));
        }

        let model_cat = gbtree::fit_symmetric(&x_train, &y_train, params_cat)?;
        let model_lgb = gbtree::fit_leafwise(&x_train, &y_train, params_lgb)?;

        let cat_train = model_cat.predict(&x_train)?;
        let lgb_train = model_lgb.predict(&x_train)?;
        let cat_val = model_cat.predict(&x_val)?;
        let lgb_val = model_lgb.predict(&x_val)?;

        let fold_de = DeConfig { seed: seed + fold as u64, ..de.clone() };
        let weights = fusion::fit_fusion(&y_train, &cat_train, &lgb_train, &fold_de)?;
        let fusion_train = fusion::fuse_predict(&weights, &cat_train, &lgb_train)?;
        let fusion_val = fusion::fuse_predict(&weights, &cat_val, &lgb_val)?;

        let models = ModelMetrics {
            cat: SplitMetrics {
                train: metrics(&y_train, &cat_train)?,
                validation: metrics(&y_val, &cat_val)?,
            },
            lgb: SplitMetrics {
                train: metrics(&y_train, &lgb_train)?,
                validation: metrics(&y_val, &lgb_val)?,
            },
            fusion: SplitMetrics {
                train: metrics(&y_train, &fusion_train)?,
                validation: metrics(&y_val, &fusion_val)?,
            },
        };

        for (slot, value) in
            importance_acc.iter_mut().zip(fused_importance(&model_cat, &model_lgb, &weights)?)
        {
            *slot += value;
        }
        fold_reports.push(FoldReport {
            fold,
            train_ids,
            validation_ids,
            models,
            fusion_weights: weights,
        });
    }

    let collect = |pick: fn(&ModelMetrics) -> &SplitMetrics| SplitMetrics {
        train: mean_metric_sets(
            &fold_reports.iter().map(|f| pick(&f.models).train).collect::<Vec<_>>(),
        ),
        validation: mean_metric_sets(
            &fold_reports.iter().map(|f| pick(&f.models).validation).collect::<Vec<_>>(),
        ),
    };
    let aggregates = ModelMetrics {
        cat: collect(|m| &m.cat),
        lgb: collect(|m| &m.lgb),
        fusion: collect(|m| &m.fusion),
    };
    let importances = feature_columns
        .iter()
        .zip(&importance_acc)
        .map(|(name, total)| (name.to_string(), total / k as f64))
        .collect();

    Ok(CvReport { k, seed, folds: fold_reports, aggregates, importances })
}
