//! Deployable model bundles: scaler, both boosted models and the blend
//! weights in one versioned JSON document. Loading a bundle reproduces
//! predictions bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::de::DeConfig;
use crate::error::{Error, Result};
use crate::fusion::{self, FusionWeights};
use crate::gbtree::{self, BoostedModel, Hyperparams};
use crate::gwqi::{self, WhoLimits};
use crate::preprocess::Scaler;
use crate::table::{SampleTable, CORE_INDICATORS};

/// Version written into every bundle; load refuses other versions.
pub const BUNDLE_VERSION: u32 = 1;

/// Everything needed to score new tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub version: u32,
    pub feature_columns: Vec<String>,
    pub scaler: Scaler,
    pub model_cat: BoostedModel,
    pub model_lgb: BoostedModel,
    pub fusion: FusionWeights,
}

impl ModelBundle {
    /// Fits the full stack on one table: targets from `limits`, scaler on
    /// all rows, both boosted models, then DE-fitted blend weights.
    pub fn train(
        table: &SampleTable,
        limits: &WhoLimits,
        params_cat: &Hyperparams,
        params_lgb: &Hyperparams,
        de: &DeConfig,
    ) -> Result<ModelBundle> {
        let targets = gwqi::compute_targets(table, limits)?;
        let feature_columns: Vec<&str> = CORE_INDICATORS.to_vec();
        let scaler = Scaler::fit(table, &feature_columns)?;
        let x = scaler.transform(table)?;
        let model_cat = gbtree::fit_symmetric(&x, &targets, params_cat)?;
        let model_lgb = gbtree::fit_leafwise(&x, &targets, params_lgb)?;
        let cat_pred = model_cat.predict(&x)?;
        let lgb_pred = model_lgb.predict(&x)?;
        let fusion = fusion::fit_fusion(&targets, &cat_pred, &lgb_pred, de)?;
        Ok(ModelBundle {
            version: BUNDLE_VERSION,
            feature_columns: feature_columns.iter().map(|s| s.to_string()).collect(),
            scaler,
            model_cat,
            model_lgb,
            fusion,
        })
    }

    /// Scores every row of a table carrying the bundle's feature columns.
    pub fn predict(&self, table: &SampleTable) -> Result<Vec<f64>> {
        let x = self.scaler.transform(table)?;
        let cat = self.model_cat.predict(&x)?;
        let lgb = self.model_lgb.predict(&x)?;
        fusion::fuse_predict(&self.fusion, &cat, &lgb)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string()?)
            .map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
    }

    pub fn from_json_str(json: &str) -> Result<ModelBundle> {
        let bundle: ModelBundle = serde_json::from_str(json)?;
        if bundle.version != BUNDLE_VERSION {
            return Err(Error::BundleVersion {
                found: bundle.version,
                supported: BUNDLE_VERSION,
            });
        }
        Ok(bundle)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ModelBundle> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        Self::from_json_str(&text)
    }
}
