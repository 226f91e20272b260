//! Table cleaning and feature preparation.
//!
//! Order of operations in the standard pipeline: impute, deduplicate,
//! remove outliers with Tukey fences, then fit a Z-score scaler on training
//! data only and apply it everywhere. All functions are pure: they return
//! new tables and never mutate their inputs.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::stats;
use crate::table::SampleTable;

/// Fills missing cells. Numeric columns take the column mean over present
/// values; the categorical district column takes the mode, ties broken by
/// first appearance. A numeric column with no values at all is an error.
/// Districts are only imputed when at least one row carries one.
pub fn impute(table: &SampleTable) -> Result<SampleTable> {
    let mut means = Vec::with_capacity(table.columns().len());
    for name in table.columns() {
        let present = table.column_present(name)?;
        if present.is_empty() {
            return Err(Error::EmptyColumn(name.clone()));
        }
        means.push(stats::mean(&present));
    }
    let district_mode = mode(table.rows().iter().filter_map(|r| r.district.as_deref()));

    let rows = table
        .rows()
        .iter()
        .map(|row| {
            let mut row = row.clone();
            for (value, mean) in row.values.iter_mut().zip(&means) {
                if value.is_none() {
                    *value = Some(*mean);
                }
            }
            if row.district.is_none() {
                row.district = district_mode.clone();
            }
            row
        })
        .collect();
    Ok(table.with_rows(rows))
}

fn mode<'a>(values: impl Iterator<Item = &'a str>) -> Option<String> {
    let mut order: Vec<(&str, usize)> = Vec::new();
    for v in values {
        match order.iter_mut().find(|(name, _)| *name == v) {
            Some((_, count)) => *count += 1,
            None => order.push((v, 1)),
        }
    }
    // max_by_key keeps the last maximum, so scan in reverse to prefer the
    // first-seen value on ties.
    order.iter().rev().max_by_key(|(_, c)| *c).map(|(name, _)| name.to_string())
}

/// Collapses rows that are identical across every column and metadata field
/// (row ids excluded) to their first occurrence, preserving order.
pub fn dedup(table: &SampleTable) -> SampleTable {
    let mut seen = HashSet::new();
    let rows = table
        .rows()
        .iter()
        .filter(|row| seen.insert(row.content_key()))
        .cloned()
        .collect();
    table.with_rows(rows)
}

/// Per-column Tukey fences and the rows they rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnFences {
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub lower_fence: f64,
    pub upper_fence: f64,
    /// Row ids whose value in this column falls strictly outside the fences.
    pub removed_row_ids: Vec<usize>,
}

/// Outcome of [`iqr_filter`]: fences per monitored column, serializable to
/// JSON for the CLI report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutlierReport {
    pub k: f64,
    pub columns: Vec<(String, ColumnFences)>,
}

impl OutlierReport {
    /// Union of all per-column removals, ascending.
    pub fn removed_row_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> =
            self.columns.iter().flat_map(|(_, f)| f.removed_row_ids.iter().copied()).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

/// Removes whole rows whose value in any monitored column falls strictly
/// outside `[Q1 - k*IQR, Q3 + k*IQR]`, quartiles interpolated linearly.
/// Fences are computed once, on the input table.
pub fn iqr_filter(
    table: &SampleTable,
    columns: &[&str],
    k: f64,
) -> Result<(SampleTable, OutlierReport)> {
    if !(k > 0.0) {
        return Err(Error::InvalidInput(format!("IQR multiplier k must be > 0, got {k}")));
    }
    let mut fences = Vec::with_capacity(columns.len());
    for &name in columns {
        let values = table.column_dense(name)?;
        if values.is_empty() {
            return Err(Error::EmptyColumn(name.to_string()));
        }
        let q1 = stats::quantile(&values, 0.25);
        let q3 = stats::quantile(&values, 0.75);
        let iqr = q3 - q1;
        fences.push((
            name,
            ColumnFences {
                q1,
                q3,
                iqr,
                lower_fence: q1 - k * iqr,
                upper_fence: q3 + k * iqr,
                removed_row_ids: Vec::new(),
            },
        ));
    }

    let mut kept = Vec::new();
    for row in table.rows() {
        let mut keep = true;
        for (name, fence) in fences.iter_mut() {
            let idx = table.column_position(name)?;
            let v = row.values[idx].expect("checked dense above");
            if v < fence.lower_fence || v > fence.upper_fence {
                fence.removed_row_ids.push(row.row_id);
                keep = false;
            }
        }
        if keep {
            kept.push(row.clone());
        }
    }
    let report =
        OutlierReport { k, columns: fences.into_iter().map(|(n, f)| (n.to_string(), f)).collect() };
    Ok((table.with_rows(kept), report))
}

/// Z-score scaler: stores per-column mean and population standard deviation
/// from the table it was fitted on. Columns with zero variance are flagged
/// and transform to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    columns: Vec<String>,
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Scaler {
    /// Fits on the given columns of `table`. Requires at least two rows and
    /// fully imputed columns.
    pub fn fit(table: &SampleTable, columns: &[&str]) -> Result<Scaler> {
        if table.n_rows() < 2 {
            return Err(Error::EmptyInput("scaler fitting needs at least 2 rows"));
        }
        let mut means = Vec::with_capacity(columns.len());
        let mut stds = Vec::with_capacity(columns.len());
        for &name in columns {
            let values = table.column_dense(name)?;
            let mean = stats::mean(&values);
            means.push(mean);
            stds.push(stats::population_std(&values, mean));
        }
        Ok(Scaler { columns: columns.iter().map(|s| s.to_string()).collect(), means, stds })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn mean(&self, column: &str) -> Option<f64> {
        self.columns.iter().position(|c| c == column).map(|i| self.means[i])
    }

    pub fn std(&self, column: &str) -> Option<f64> {
        self.columns.iter().position(|c| c == column).map(|i| self.stds[i])
    }

    /// Columns flagged as zero-variance at fit time.
    pub fn degenerate_columns(&self) -> Vec<&str> {
        self.columns
            .iter()
            .zip(&self.stds)
            .filter(|(_, s)| **s == 0.0)
            .map(|(c, _)| c.as_str())
            .collect()
    }

    /// Applies `(x - mean) / std` using the statistics stored at fit time,
    /// so held-out tables are scaled by training statistics. Zero-variance
    /// columns map to 0.
    pub fn transform(&self, table: &SampleTable) -> Result<Matrix> {
        let positions: Vec<usize> = self
            .columns
            .iter()
            .map(|c| table.column_position(c))
            .collect::<Result<_>>()?;
        let mut data = Vec::with_capacity(table.n_rows() * self.columns.len());
        for (row_idx, row) in table.rows().iter().enumerate() {
            for (slot, &pos) in positions.iter().enumerate() {
                let v = row.values[pos].ok_or(Error::MissingValue {
                    row: row_idx,
                    column: self.columns[slot].clone(),
                })?;
                let std = self.stds[slot];
                data.push(if std == 0.0 { 0.0 } else { (v - self.means[slot]) / std });
            }
        }
        Matrix::new(table.n_rows(), self.columns.len(), data)
    }
}

/// Seeded shuffle followed by a `round(n*(1-f))` / remainder partition.
/// Row order within each side follows the original table.
pub fn split_train_test(
    table: &SampleTable,
    test_fraction: f64,
    seed: u64,
) -> Result<(SampleTable, SampleTable)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidInput(format!(
            "test_fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let n = table.n_rows();
    if n < 2 {
        return Err(Error::EmptyInput("splitting needs at least 2 rows"));
    }
    let train_n = (n as f64 * (1.0 - test_fraction)).round() as usize;
    if train_n == 0 || train_n == n {
        return Err(Error::InvalidInput(format!(
            "cannot split {n} rows with test_fraction {test_fraction}: one side would be empty"
        )));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let mut train_idx = indices[..train_n].to_vec();
    let mut test_idx = indices[train_n..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    let pick = |idx: &[usize]| idx.iter().map(|&i| table.rows()[i].clone()).collect();
    Ok((table.with_rows(pick(&train_idx)), table.with_rows(pick(&test_idx))))
}

/// Pearson correlation matrix over the named columns. Every column must be
/// imputed and non-constant.
pub fn correlation_matrix(table: &SampleTable, columns: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut centered = Vec::with_capacity(columns.len());
    let mut norms = Vec::with_capacity(columns.len());
    for &name in columns {
        let values = table.column_dense(name)?;
        if values.is_empty() {
            return Err(Error::EmptyColumn(name.to_string()));
        }
        let mean = stats::mean(&values);
        let dev: Vec<f64> = values.iter().map(|v| v - mean).collect();
        let norm = dev.iter().map(|d| d * d).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidInput(format!(
                "column {name:?} is constant; correlation undefined"
            )));
        }
        centered.push(dev);
        norms.push(norm);
    }
    let m = columns.len();
    let mut out = vec![vec![0.0; m]; m];
    for i in 0..m {
        out[i][i] = 1.0;
        for j in (i + 1)..m {
            let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
            let r = (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0);
            out[i][j] = r;
            out[j][i] = r;
        }
    }
    Ok(out)
}

/// In-fold imputation helper: fills holes in `apply` using column means
/// computed from `fit` rows only. Used by cross-validation so validation
/// folds never contribute statistics.
pub fn impute_with_means(fit: &SampleTable, apply: &SampleTable) -> Result<SampleTable> {
    let mut means = Vec::with_capacity(fit.columns().len());
    for name in fit.columns() {
        let present = fit.column_present(name)?;
        if present.is_empty() {
            return Err(Error::EmptyColumn(name.clone()));
        }
        means.push(stats::mean(&present));
    }
    let positions: Vec<usize> = fit
        .columns()
        .iter()
        .map(|c| apply.column_position(c))
        .collect::<Result<_>>()?;
    let rows = apply
        .rows()
        .iter()
        .map(|row| {
            let mut row = row.clone();
            for (&pos, mean) in positions.iter().zip(&means) {
                if row.values[pos].is_none() {
                    row.values[pos] = Some(*mean);
                }
            }
            row
        })
        .collect();
    Ok(apply.with_rows(rows))
}
