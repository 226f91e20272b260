//! Groundwater quality index: sub-indices against WHO limits, root-sum-square
//! aggregation, and quality-band classification.
//!
//! Each indicator value maps to a sub-index on a 0 to 100 scale: 100 inside
//! the acceptable range, `value / std_min * 100` below it and
//! `std_max / value * 100` above it. Row scores are the root sum of squares
//! of the sub-indices, so with the nine default indicators the score lives
//! in `[0, 300]`.
//!
//! Note one quirk of this convention, preserved here exactly as specified:
//! a fully compliant sample scores 100 on every sub-index and therefore 300
//! overall, which the band table files under its worst label. The index and
//! the band table embody opposite orientations; this library implements
//! both as written and leaves interpretation to the caller. The score is
//! primarily a deterministic regression target for the model pipeline.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::SampleTable;

/// Acceptable range for one indicator, in the indicator's own units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Limit {
    pub std_min: f64,
    pub std_max: f64,
}

/// Per-indicator acceptable ranges. The defaults are the WHO drinking-water
/// limits for the nine core indicators: pH 6.5 to 8.5, and upper limits of
/// 1500 for EC, 300 for TH, 75 for Ca, 50 for Mg, 200 for Na, 12 for K,
/// 1.5 for F and 250 for Cl, each with a lower limit of 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhoLimits {
    limits: Vec<(String, Limit)>,
}

impl Default for WhoLimits {
    fn default() -> Self {
        let table: [(&str, f64, f64); 9] = [
            ("pH", 6.5, 8.5),
            ("EC", 1.0, 1500.0),
            ("TH", 1.0, 300.0),
            ("Ca", 1.0, 75.0),
            ("Mg", 1.0, 50.0),
            ("Na", 1.0, 200.0),
            ("K", 1.0, 12.0),
            ("F", 1.0, 1.5),
            ("Cl", 1.0, 250.0),
        ];
        WhoLimits {
            limits: table
                .iter()
                .map(|&(name, std_min, std_max)| (name.to_string(), Limit { std_min, std_max }))
                .collect(),
        }
    }
}

impl WhoLimits {
    /// Builds a limit set from explicit entries, validating each range.
    pub fn new(entries: Vec<(String, Limit)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput("limit set needs at least one indicator"));
        }
        for (name, limit) in &entries {
            validate_limit(name, limit)?;
        }
        Ok(WhoLimits { limits: entries })
    }

    /// Parses a JSON object of `{"indicator": {"std_min": .., "std_max": ..}}`
    /// entries and merges it over the defaults. Entries for new indicators
    /// extend the set; entries for known ones replace them.
    pub fn from_json_str(json: &str) -> Result<Self> {
        let overrides: BTreeMap<String, Limit> = serde_json::from_str(json)?;
        let mut base = WhoLimits::default();
        for (name, limit) in overrides {
            validate_limit(&name, &limit)?;
            match base.limits.iter_mut().find(|(n, _)| *n == name) {
                Some((_, slot)) => *slot = limit,
                None => base.limits.push((name, limit)),
            }
        }
        Ok(base)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        Self::from_json_str(&text)
    }

    /// Replaces the whole indicator set instead of merging over defaults.
    pub fn from_entries_json_str(json: &str) -> Result<Self> {
        let entries: BTreeMap<String, Limit> = serde_json::from_str(json)?;
        Self::new(entries.into_iter().collect())
    }

    pub fn indicators(&self) -> impl Iterator<Item = &str> {
        self.limits.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, indicator: &str) -> Option<Limit> {
        self.limits.iter().find(|(n, _)| n == indicator).map(|(_, l)| *l)
    }

    pub fn len(&self) -> usize {
        self.limits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.limits.is_empty()
    }
}

fn validate_limit(name: &str, limit: &Limit) -> Result<()> {
    if !limit.std_min.is_finite() || !limit.std_max.is_finite() || limit.std_min <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "limits for {name:?} must be finite with std_min > 0, got ({}, {})",
            limit.std_min, limit.std_max
        )));
    }
    if limit.std_min >= limit.std_max {
        return Err(Error::InvalidInput(format!(
            "limits for {name:?} must satisfy std_min < std_max, got ({}, {})",
            limit.std_min, limit.std_max
        )));
    }
    Ok(())
}

/// Sub-index of one indicator value on the 0 to 100 scale.
///
/// In-range values score 100; below-range values score
/// `value / std_min * 100`; above-range values score
/// `std_max / value * 100`. The result is clamped to `[0, 100]`.
/// Negative or non-finite values are an error.
pub fn sub_index(value: f64, limit: Limit) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::InvalidInput(format!("indicator value must be finite, got {value}")));
    }
    if value < 0.0 {
        return Err(Error::InvalidInput(format!("indicator value must be >= 0, got {value}")));
    }
    let si = if value < limit.std_min {
        value / limit.std_min * 100.0
    } else if value > limit.std_max {
        limit.std_max / value * 100.0
    } else {
        100.0
    };
    Ok(si.clamp(0.0, 100.0))
}

/// Root sum of squares of the sub-indices. Every element must lie in
/// `[0, 100]` and the list must be non-empty.
pub fn aggregate(sub_indices: &[f64]) -> Result<f64> {
    if sub_indices.is_empty() {
        return Err(Error::EmptyInput("aggregate needs at least one sub-index"));
    }
    for &si in sub_indices {
        if !si.is_finite() || !(0.0..=100.0).contains(&si) {
            return Err(Error::InvalidInput(format!("sub-index {si} outside [0, 100]")));
        }
    }
    Ok(sub_indices.iter().map(|si| si * si).sum::<f64>().sqrt())
}

/// Quality band labels, in increasing-score order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QualityBand {
    Excellent,
    Good,
    Poor,
    VeryPoor,
    Unsuitable,
}

impl QualityBand {
    pub fn label(self) -> &'static str {
        match self {
            QualityBand::Excellent => "Excellent",
            QualityBand::Good => "Good",
            QualityBand::Poor => "Poor",
            QualityBand::VeryPoor => "Very Poor",
            QualityBand::Unsuitable => "Unsuitable",
        }
    }
}

impl fmt::Display for QualityBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A classified score. `beyond_scale` marks scores above 400, which the
/// band table does not cover; they are filed under [`QualityBand::Unsuitable`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub band: QualityBand,
    pub beyond_scale: bool,
}

/// Maps a score onto its band. Bands are half-open: `[0, 50)` Excellent,
/// `[50, 100)` Good, `[100, 200)` Poor, `[200, 300)` Very Poor and
/// `[300, 400]` Unsuitable, so a boundary value belongs to the upper band.
pub fn classify(score: f64) -> Result<Classification> {
    if !score.is_finite() || score < 0.0 {
        return Err(Error::InvalidInput(format!("score must be finite and >= 0, got {score}")));
    }
    let band = match score {
        s if s < 50.0 => QualityBand::Excellent,
        s if s < 100.0 => QualityBand::Good,
        s if s < 200.0 => QualityBand::Poor,
        s if s < 300.0 => QualityBand::VeryPoor,
        _ => QualityBand::Unsuitable,
    };
    Ok(Classification { band, beyond_scale: score > 400.0 })
}

/// Computes the quality index for every row of a table: the sub-index of
/// each indicator named in `limits`, aggregated by root sum of squares.
/// Indicator columns must be present and imputed.
pub fn compute_targets(table: &SampleTable, limits: &WhoLimits) -> Result<Vec<f64>> {
    let mut columns = Vec::with_capacity(limits.len());
    for indicator in limits.indicators() {
        let position = table.column_position(indicator)?;
        let limit = limits.get(indicator).expect("iterating own indicators");
        columns.push((indicator.to_string(), position, limit));
    }
    let mut out = Vec::with_capacity(table.n_rows());
    let mut sis = vec![0.0; columns.len()];
    for (row_idx, row) in table.rows().iter().enumerate() {
        for (slot, (name, position, limit)) in columns.iter().enumerate() {
            let value = row.values[*position].ok_or(Error::MissingValue {
                row: row_idx,
                column: name.clone(),
            })?;
            sis[slot] = sub_index(value, *limit)?;
        }
        out.push(aggregate(&sis)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::testutil::table_from_columns;
    use crate::table::CORE_INDICATORS;

    #[test]
    fn default_limits_match_the_who_table() {
        let limits = WhoLimits::default();
        let expected: [(&str, f64, f64); 9] = [
            ("pH", 6.5, 8.5),
            ("EC", 1.0, 1500.0),
            ("TH", 1.0, 300.0),
            ("Ca", 1.0, 75.0),
            ("Mg", 1.0, 50.0),
            ("Na", 1.0, 200.0),
            ("K", 1.0, 12.0),
            ("F", 1.0, 1.5),
            ("Cl", 1.0, 250.0),
        ];
        for (name, lo, hi) in expected {
            let l = limits.get(name).unwrap();
            assert_eq!(l.std_min, lo, "{name} std_min");
            assert_eq!(l.std_max, hi, "{name} std_max");
        }
        assert_eq!(limits.len(), 9);
        for core in CORE_INDICATORS {
            assert!(limits.get(core).is_some());
        }
    }

    #[test]
    fn json_overrides_merge_over_defaults() {
        let limits =
            WhoLimits::from_json_str(r#"{"F": {"std_min": 0.5, "std_max": 2.0}}"#).unwrap();
        assert_eq!(limits.get("F").unwrap(), Limit { std_min: 0.5, std_max: 2.0 });
        assert_eq!(limits.get("pH").unwrap(), Limit { std_min: 6.5, std_max: 8.5 });
    }

    #[test]
    fn invalid_limit_ranges_are_rejected() {
        assert!(WhoLimits::from_json_str(r#"{"F": {"std_min": 2.0, "std_max": 1.0}}"#).is_err());
        assert!(WhoLimits::from_json_str(r#"{"F": {"std_min": 0.0, "std_max": 1.0}}"#).is_err());
    }

    #[test]
    fn sub_index_in_range_is_100() {
        let ph = WhoLimits::default().get("pH").unwrap();
        assert_eq!(sub_index(7.0, ph).unwrap(), 100.0);
    }

    #[test]
    fn sub_index_below_range_scales_by_std_min() {
        let ph = WhoLimits::default().get("pH").unwrap();
        assert!((sub_index(5.2, ph).unwrap() - 80.0).abs() < 1e-12);
    }

    #[test]
    fn sub_index_above_range_scales_by_std_max() {
        let ec = WhoLimits::default().get("EC").unwrap();
        assert!((sub_index(3000.0, ec).unwrap() - 50.0).abs() < 1e-12);
        let f = WhoLimits::default().get("F").unwrap();
        assert!((sub_index(4.68, f).unwrap() - 32.05128205128205).abs() < 1e-9);
    }

    #[test]
    fn sub_index_of_zero_concentration_is_zero() {
        let ec = WhoLimits::default().get("EC").unwrap();
        assert_eq!(sub_index(0.0, ec).unwrap(), 0.0);
    }

    #[test]
    fn sub_index_rejects_negative_and_non_finite() {
        let ec = WhoLimits::default().get("EC").unwrap();
        assert!(sub_index(-1.0, ec).is_err());
        assert!(sub_index(f64::NAN, ec).is_err());
    }

    #[test]
    fn sub_index_monotone_outside_the_range() {
        let ec = WhoLimits::default().get("EC").unwrap();
        // Decreasing above std_max.
        let mut last = 100.0;
        for v in [1501.0, 1600.0, 2000.0, 3000.0, 10000.0] {
            let si = sub_index(v, ec).unwrap();
            assert!(si <= last);
            last = si;
        }
        // Increasing below std_min (use pH where std_min is 6.5).
        let ph = WhoLimits::default().get("pH").unwrap();
        let mut last = 0.0;
        for v in [0.5, 2.0, 4.0, 6.0, 6.4] {
            let si = sub_index(v, ph).unwrap();
            assert!(si >= last);
            last = si;
        }
    }

    #[test]
    fn aggregate_single_element_is_identity() {
        assert_eq!(aggregate(&[42.0]).unwrap(), 42.0);
    }

    #[test]
    fn aggregate_matches_hand_computation() {
        assert!((aggregate(&[60.0, 80.0]).unwrap() - 100.0).abs() < 1e-12);
        assert!((aggregate(&[100.0; 9]).unwrap() - 300.0).abs() < 1e-12);
    }

    #[test]
    fn aggregate_rejects_bad_elements() {
        assert!(aggregate(&[]).is_err());
        assert!(aggregate(&[101.0]).is_err());
        assert!(aggregate(&[-0.1]).is_err());
    }

    #[test]
    fn aggregate_is_monotone_and_permutation_invariant() {
        let a = aggregate(&[10.0, 50.0, 90.0]).unwrap();
        let b = aggregate(&[90.0, 10.0, 50.0]).unwrap();
        assert_eq!(a, b);
        let c = aggregate(&[10.0, 60.0, 90.0]).unwrap();
        assert!(c > a);
    }

    #[test]
    fn classify_maps_bands_per_half_open_rule() {
        assert_eq!(classify(30.0).unwrap().band, QualityBand::Excellent);
        assert_eq!(classify(150.0).unwrap().band, QualityBand::Poor);
        assert_eq!(classify(250.0).unwrap().band, QualityBand::VeryPoor);
        assert_eq!(classify(350.0).unwrap().band, QualityBand::Unsuitable);
        // Boundaries belong to the upper band.
        assert_eq!(classify(50.0).unwrap().band, QualityBand::Good);
        assert_eq!(classify(100.0).unwrap().band, QualityBand::Poor);
        assert_eq!(classify(200.0).unwrap().band, QualityBand::VeryPoor);
        assert_eq!(classify(300.0).unwrap().band, QualityBand::Unsuitable);
    }

    #[test]
    fn classify_flags_scores_beyond_the_table() {
        let c = classify(450.0).unwrap();
        assert_eq!(c.band, QualityBand::Unsuitable);
        assert!(c.beyond_scale);
        assert!(!classify(400.0).unwrap().beyond_scale);
    }

    #[test]
    fn classify_rejects_negative_scores() {
        assert!(classify(-1.0).is_err());
    }

    #[test]
    fn targets_for_all_compliant_row() {
        // Values chosen mid-range for every indicator.
        let t = table_from_columns(&[
            ("pH", vec![Some(7.0)]),
            ("EC", vec![Some(700.0)]),
            ("TH", vec![Some(150.0)]),
            ("Ca", vec![Some(40.0)]),
            ("Mg", vec![Some(25.0)]),
            ("Na", vec![Some(100.0)]),
            ("K", vec![Some(6.0)]),
            ("F", vec![Some(1.2)]),
            ("Cl", vec![Some(120.0)]),
        ]);
        let scores = compute_targets(&t, &WhoLimits::default()).unwrap();
        assert!((scores[0] - 300.0).abs() < 1e-12);
    }

    #[test]
    fn targets_with_one_high_fluoride_row() {
        let t = table_from_columns(&[
            ("pH", vec![Some(7.0)]),
            ("EC", vec![Some(700.0)]),
            ("TH", vec![Some(150.0)]),
            ("Ca", vec![Some(40.0)]),
            ("Mg", vec![Some(25.0)]),
            ("Na", vec![Some(100.0)]),
            ("K", vec![Some(6.0)]),
            ("F", vec![Some(3.0)]),
            ("Cl", vec![Some(120.0)]),
        ]);
        let scores = compute_targets(&t, &WhoLimits::default()).unwrap();
        let expected = (8.0 * 100.0f64 * 100.0 + 50.0 * 50.0).sqrt();
        assert!((scores[0] - expected).abs() < 1e-9);
        assert!((scores[0] - 287.22813232690143).abs() < 1e-9);
    }

    #[test]
    fn targets_of_empty_table_are_empty() {
        let t = table_from_columns(&[("pH", vec![])]);
        assert_eq!(compute_targets(&t, &WhoLimits::default()).unwrap().len(), 0);
    }

    #[test]
    fn targets_error_on_missing_indicator_column() {
        let t = table_from_columns(&[("pH", vec![Some(7.0)])]);
        let defaults = WhoLimits::default();
        let mut entries: Vec<(String, Limit)> =
            defaults.indicators().map(|n| (n.to_string(), defaults.get(n).unwrap())).collect();
        entries.push(("As".to_string(), Limit { std_min: 1.0, std_max: 10.0 }));
        let limits = WhoLimits::new(entries).unwrap();
        assert!(matches!(
            compute_targets(&t, &limits),
            Err(Error::MissingColumn(c)) if c == "As"
        ));
    }

    #[test]
    fn single_indicator_limit_set_gives_that_sub_index() {
        let t = table_from_columns(&[("F", vec![Some(3.0)])]);
        let limits = WhoLimits::new(vec![(
            "F".to_string(),
            Limit { std_min: 1.0, std_max: 1.5 },
        )])
        .unwrap();
        let scores = compute_targets(&t, &limits).unwrap();
        assert!((scores[0] - 50.0).abs() < 1e-12);
    }
}
