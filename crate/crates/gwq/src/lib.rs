//! Groundwater quality modeling.
//!
//! This crate reproduces a complete groundwater-quality workflow on tabular
//! well samples:
//!
//! * [`table`] loads, validates, summarizes and serializes sample tables.
//! * [`synth`] generates schema-compatible synthetic tables calibrated to a
//!   published survey summary, for use where the original data cannot ship.
//! * [`preprocess`] cleans tables: mean/mode imputation, deduplication,
//!   Tukey-fence outlier removal, Z-score scaling, splitting, correlation.
//! * [`gwqi`] turns indicator concentrations into a scalar quality index
//!   against WHO limits and maps scores onto quality bands.
//! * [`gbtree`] is a from-scratch gradient-boosted regression tree engine
//!   with two growth strategies (leaf-wise and level-symmetric) plus a
//!   bagged-trees baseline.
//! * [`de`] is a rand/1/bin differential-evolution optimizer over boxes.
//! * [`fusion`] blends the two boosted models with DE-fitted weights.
//! * [`evaluation`] provides regression metrics, k-fold cross-validation
//!   and blended feature-importance reports.
//! * [`bundle`] packages the trained models for save/load deployment.
//!
//! The `gwq` binary in this workspace wires these stages into a CLI; the
//! book under `book/` walks through each stage with runnable examples.

pub mod bundle;
pub mod de;
pub mod error;
pub mod evaluation;
pub mod fusion;
pub mod gbtree;
pub mod gwqi;
pub mod matrix;
pub mod preprocess;
pub mod stats;
pub mod synth;
pub mod table;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use table::{CsvSchema, SampleTable, StatsSummary, WaterSample, CORE_INDICATORS};
