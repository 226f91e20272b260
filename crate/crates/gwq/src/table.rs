//! Columnar water-sample tables: the currency every pipeline stage trades in.
//!
//! A [`SampleTable`] holds an ordered list of [`WaterSample`] rows over a
//! fixed set of numeric columns. The nine core indicators are always present
//! as columns; individual cells may be missing until imputation runs.
//! Identity and category metadata (well id, district, coordinates, year)
//! ride along with each row but are not part of the numeric grid.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

/// The nine indicators every table must carry. pH is dimensionless, EC is
/// in uS/cm, the rest are concentrations in mg/L.
pub const CORE_INDICATORS: [&str; 9] = ["pH", "EC", "TH", "Ca", "Mg", "Na", "K", "F", "Cl"];

/// Optional extra columns recognized by the default CSV schema.
pub const EXTRA_COLUMNS: [&str; 6] = ["CO3", "HCO3", "SO4", "NO3", "PO4", "SiO2"];

/// Maps canonical column names to the header names found in a CSV file.
///
/// The defaults match the field survey export this pipeline was built for:
/// metadata headers `Well_id`, `District`, `Latitude`, `Longitude`, `Year`
/// and indicator headers equal to their canonical names.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvSchema {
    pub well_id: String,
    pub district: String,
    pub latitude: String,
    pub longitude: String,
    pub year: String,
    /// canonical indicator name -> CSV header
    pub indicators: Vec<(String, String)>,
    /// canonical extra-column name -> CSV header
    pub extras: Vec<(String, String)>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            well_id: "Well_id".into(),
            district: "District".into(),
            latitude: "Latitude".into(),
            longitude: "Longitude".into(),
            year: "Year".into(),
            indicators: CORE_INDICATORS.iter().map(|n| (n.to_string(), n.to_string())).collect(),
            extras: EXTRA_COLUMNS.iter().map(|n| (n.to_string(), n.to_string())).collect(),
        }
    }
}

/// One sampled well. `values` is aligned with the owning table's columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaterSample {
    /// Position of the row in the table it was loaded or generated into.
    /// Survives filtering, so reports can point back at source rows.
    pub row_id: usize,
    pub well_id: Option<String>,
    pub district: Option<String>,
    pub latitude: Option<f64>,
    pub longitude: Option<f64>,
    pub year: Option<i64>,
    pub values: Vec<Option<f64>>,
}

impl WaterSample {
    /// Content equality ignoring `row_id`, mirroring what deduplication
    /// keys on.
    #[cfg(test)]
    pub(crate) fn same_content(&self, other: &WaterSample) -> bool {
        self.well_id == other.well_id
            && self.district == other.district
            && bits(self.latitude) == bits(other.latitude)
            && bits(self.longitude) == bits(other.longitude)
            && self.year == other.year
            && self.values.len() == other.values.len()
            && self.values.iter().zip(&other.values).all(|(a, b)| bits(*a) == bits(*b))
    }

    pub(crate) fn content_key(&self) -> (Option<String>, Option<String>, Option<u64>, Option<u64>, Option<i64>, Vec<Option<u64>>) {
        (
            self.well_id.clone(),
            self.district.clone(),
            bits(self.latitude),
            bits(self.longitude),
            self.year,
            self.values.iter().map(|v| bits(*v)).collect(),
        )
    }
}

fn bits(v: Option<f64>) -> Option<u64> {
    v.map(f64::to_bits)
}

/// Immutable table of water samples over a fixed column set.
#[derive(Debug, Clone)]
pub struct SampleTable {
    columns: Vec<String>,
    column_index: HashMap<String, usize>,
    rows: Vec<WaterSample>,
}

impl SampleTable {
    /// Builds a table, validating that every row matches the column set,
    /// the nine core indicators are present, all values are finite and
    /// concentrations (every column except pH) are non-negative.
    pub fn new(columns: Vec<String>, rows: Vec<WaterSample>) -> Result<Self> {
        for core in CORE_INDICATORS {
            if !columns.iter().any(|c| c == core) {
                return Err(Error::MissingColumn(core.to_string()));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.values.len() != columns.len() {
                return Err(Error::LengthMismatch { expected: columns.len(), found: row.values.len() });
            }
            for (col, value) in columns.iter().zip(&row.values) {
                if let Some(v) = value {
                    if !v.is_finite() {
                        return Err(Error::InvalidInput(format!(
                            "row {i}, column {col:?}: non-finite value {v}"
                        )));
                    }
                    if col != "pH" && *v < 0.0 {
                        return Err(Error::InvalidInput(format!(
                            "row {i}, column {col:?}: negative concentration {v}"
                        )));
                    }
                }
            }
        }
        let column_index = columns.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        Ok(SampleTable { columns, column_index, rows })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[WaterSample] {
        &self.rows
    }

    /// Index of a column by name. Unknown names are an error, never a default.
    pub fn column_position(&self, name: &str) -> Result<usize> {
        self.column_index.get(name).copied().ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    /// All cells of a column, missing values included.
    pub fn column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let idx = self.column_position(name)?;
        Ok(self.rows.iter().map(|r| r.values[idx]).collect())
    }

    /// The present (non-missing) values of a column.
    pub fn column_present(&self, name: &str) -> Result<Vec<f64>> {
        Ok(self.column(name)?.into_iter().flatten().collect())
    }

    /// A column that must be fully imputed; any hole is an error.
    pub fn column_dense(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.column_position(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(row, r)| {
                r.values[idx].ok_or(Error::MissingValue { row, column: name.to_string() })
            })
            .collect()
    }

    /// Rebuilds a table with the same columns from filtered or edited rows.
    pub(crate) fn with_rows(&self, rows: Vec<WaterSample>) -> SampleTable {
        SampleTable {
            columns: self.columns.clone(),
            column_index: self.column_index.clone(),
            rows,
        }
    }

    /// Loads a CSV file. Empty cells become missing values; any other cell
    /// that fails to parse as a number is an error naming its row and
    /// column. Metadata columns are optional; mapped indicator columns are
    /// required.
    pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<SampleTable> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| match e.kind() {
                csv::ErrorKind::Io(_) => Error::Io {
                    path: path.to_path_buf(),
                    source: std::io::Error::new(std::io::ErrorKind::Other, e.to_string()),
                },
                _ => Error::Csv(e),
            })?;

        let headers: Vec<String> =
            reader.headers().map_err(Error::Csv)?.iter().map(str::to_string).collect();
        let find = |h: &str| headers.iter().position(|x| x == h);

        let mut columns = Vec::new();
        let mut sources = Vec::new();
        for (canonical, header) in &schema.indicators {
            let pos = find(header).ok_or_else(|| Error::MissingColumn(header.clone()))?;
            columns.push(canonical.clone());
            sources.push(pos);
        }
        for (canonical, header) in &schema.extras {
            if let Some(pos) = find(header) {
                columns.push(canonical.clone());
                sources.push(pos);
            }
        }
        let well_idx = find(&schema.well_id);
        let district_idx = find(&schema.district);
        let lat_idx = find(&schema.latitude);
        let lon_idx = find(&schema.longitude);
        let year_idx = find(&schema.year);

        let mut rows = Vec::new();
        for (row_id, record) in reader.records().enumerate() {
            let record = record.map_err(Error::Csv)?;
            let get = |idx: Option<usize>| idx.and_then(|i| record.get(i)).map(str::trim);
            let opt_string = |idx| get(idx).filter(|s: &&str| !s.is_empty()).map(str::to_string);

            let mut values = Vec::with_capacity(columns.len());
            for (&src, col) in sources.iter().zip(&columns) {
                values.push(parse_cell(record.get(src).unwrap_or(""), row_id + 1, col)?);
            }
            rows.push(WaterSample {
                row_id,
                well_id: opt_string(well_idx),
                district: opt_string(district_idx),
                latitude: parse_meta_f64(get(lat_idx), row_id + 1, &schema.latitude)?,
                longitude: parse_meta_f64(get(lon_idx), row_id + 1, &schema.longitude)?,
                year: parse_meta_i64(get(year_idx), row_id + 1, &schema.year)?,
                values,
            });
        }
        SampleTable::new(columns, rows)
    }

    /// Writes the table back to CSV with the same conventions `load_csv`
    /// reads: metadata columns first, then the numeric columns, missing
    /// cells empty. Loading the output reproduces the values exactly.
    pub fn save_csv(&self, path: impl AsRef<Path>, schema: &CsvSchema) -> Result<()> {
        let path = path.as_ref();
        let io_err = |e: std::io::Error| Error::Io { path: path.to_path_buf(), source: e };
        let file = std::fs::File::create(path).map_err(io_err)?;
        let mut writer = csv::Writer::from_writer(file);

        let header_for = |canonical: &str| -> String {
            schema
                .indicators
                .iter()
                .chain(&schema.extras)
                .find(|(c, _)| c == canonical)
                .map(|(_, h)| h.clone())
                .unwrap_or_else(|| canonical.to_string())
        };
        let mut header = vec![
            schema.well_id.clone(),
            schema.district.clone(),
            schema.latitude.clone(),
            schema.longitude.clone(),
            schema.year.clone(),
        ];
        header.extend(self.columns.iter().map(|c| header_for(c)));
        writer.write_record(&header).map_err(Error::Csv)?;

        for row in &self.rows {
            let mut record = vec![
                row.well_id.clone().unwrap_or_default(),
                row.district.clone().unwrap_or_default(),
                row.latitude.map(|v| v.to_string()).unwrap_or_default(),
                row.longitude.map(|v| v.to_string()).unwrap_or_default(),
                row.year.map(|v| v.to_string()).unwrap_or_default(),
            ];
            record.extend(row.values.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            writer.write_record(&record).map_err(Error::Csv)?;
        }
        writer.flush().map_err(io_err)
    }
}

fn parse_cell(raw: &str, row: usize, column: &str) -> Result<Option<f64>> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse::<f64>().map(Some).map_err(|_| Error::CellParse {
        row,
        column: column.to_string(),
        value: raw.to_string(),
    })
}

fn parse_meta_f64(raw: Option<&str>, row: usize, column: &str) -> Result<Option<f64>> {
    match raw {
        None | Some("") => Ok(None),
        Some(s) => s.parse::<f64>().map(Some).map_err(|_| Error::CellParse {
            row,
            column: column.to_string(),
            value: s.to_string(),
        }),
    }
}

fn parse_meta_i64(raw: Option<&str>, row: usize, column: &str) -> Result<Option<i64>> {
    match raw {
        None | Some("") => Ok(None),
        Some(s) => s.parse::<i64>().map(Some).map_err(|_| Error::CellParse {
            row,
            column: column.to_string(),
            value: s.to_string(),
        }),
    }
}

/// Descriptive statistics of one column over its non-missing values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub max: f64,
}

/// Per-column descriptive statistics, in table column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub columns: Vec<(String, ColumnStats)>,
}

impl StatsSummary {
    pub fn get(&self, name: &str) -> Option<&ColumnStats> {
        self.columns.iter().find(|(c, _)| c == name).map(|(_, s)| s)
    }

    /// Renders the summary as a CSV with one row per statistic and one
    /// column per indicator.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("stat");
        for (name, _) in &self.columns {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        let rows: [(&str, fn(&ColumnStats) -> f64); 8] = [
            ("count", |s| s.count as f64),
            ("mean", |s| s.mean),
            ("std", |s| s.std),
            ("min", |s| s.min),
            ("25%", |s| s.q25),
            ("50%", |s| s.q50),
            ("75%", |s| s.q75),
            ("max", |s| s.max),
        ];
        for (label, pick) in rows {
            out.push_str(label);
            for (_, s) in &self.columns {
                out.push(',');
                out.push_str(&pick(s).to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Per-column count, mean, population std and linear-interpolation
/// quantiles over non-missing values.
///
/// Errors on an empty table or on a column with no values at all.
pub fn summarize(table: &SampleTable) -> Result<StatsSummary> {
    if table.is_empty() {
        return Err(Error::EmptyInput("summarize needs at least one row"));
    }
    let mut columns = Vec::with_capacity(table.columns().len());
    for name in table.columns() {
        let mut values = table.column_present(name)?;
        if values.is_empty() {
            return Err(Error::EmptyColumn(name.clone()));
        }
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        let mean = stats::mean(&values);
        columns.push((
            name.clone(),
            ColumnStats {
                count: values.len(),
                mean,
                std: stats::population_std(&values, mean),
                min: values[0],
                q25: stats::quantile_sorted(&values, 0.25),
                q50: stats::quantile_sorted(&values, 0.50),
                q75: stats::quantile_sorted(&values, 0.75),
                max: values[values.len() - 1],
            },
        ));
    }
    Ok(StatsSummary { columns })
}

/// Test-only constructors shared by the module tests in this crate.
#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    /// Builds a table from named columns, padding any core indicator that
    /// is not named with a constant in-range column so the table invariant
    /// holds. Row count comes from the first named column.
    pub(crate) fn table_from_columns(cols: &[(&str, Vec<Option<f64>>)]) -> SampleTable {
        let n = cols.first().map_or(0, |(_, v)| v.len());
        let mut names: Vec<String> = cols.iter().map(|(n, _)| n.to_string()).collect();
        let mut grid: Vec<Vec<Option<f64>>> = cols.iter().map(|(_, v)| v.clone()).collect();
        for core in CORE_INDICATORS {
            if !names.iter().any(|c| c == core) {
                names.push(core.to_string());
                grid.push(vec![Some(7.0); n]);
            }
        }
        let rows = (0..n)
            .map(|i| WaterSample {
                row_id: i,
                well_id: None,
                district: None,
                latitude: None,
                longitude: None,
                year: None,
                values: grid.iter().map(|v| v[i]).collect(),
            })
            .collect();
        SampleTable::new(names, rows).unwrap()
    }

    /// A tiny dense table over just the nine core indicators.
    pub(crate) fn small_core_table(n: usize) -> SampleTable {
        let cols: Vec<(&str, Vec<Option<f64>>)> = CORE_INDICATORS
            .iter()
            .enumerate()
            .map(|(c, name)| {
                let values = (0..n).map(|i| Some(1.0 + c as f64 + i as f64 * 0.5)).collect();
                (*name, values)
            })
            .collect();
        table_from_columns(&cols)
    }
}
