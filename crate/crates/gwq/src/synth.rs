//! Synthetic sample tables calibrated to a target summary.
//!
//! The survey data this pipeline was designed around is not redistributable,
//! so tests and demos run on generated tables instead. Each column is drawn
//! from a piecewise inverse CDF anchored at the target's min, quartiles and
//! max. The two tail segments use power-law shapes solved so that the
//! column's expected value matches the target mean; the middle segments
//! interpolate linearly between quartiles. EC, TH and Cl share a latent
//! Gaussian factor so the strong positive correlations seen in real surveys
//! carry over.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::table::{ColumnStats, SampleTable, StatsSummary, WaterSample, CORE_INDICATORS};

/// Columns tied together through the shared latent factor.
const CORRELATED: [&str; 3] = ["EC", "TH", "Cl"];
/// Loading of the shared factor; pairwise latent correlation is its square.
const FACTOR_LOADING: f64 = 0.9;

/// Summary statistics of a 1989-sample groundwater survey of Odisha wells
/// (2019 to 2022). These are the default calibration targets for
/// [`synth_generate`].
pub fn reference_summary() -> StatsSummary {
    // (name, mean, std, min, q25, q50, q75, max), count 1989 throughout.
    let rows: [(&str, f64, f64, f64, f64, f64, f64, f64); 9] = [
        ("pH", 7.844, 0.389, 4.990, 7.660, 7.900, 8.100, 8.850),
        ("EC", 681.356, 471.700, 35.0, 350.0, 570.0, 890.0, 3650.0),
        ("TH", 220.059, 144.709, 6.0, 113.0, 192.0, 291.0, 1235.0),
        ("Ca", 45.870, 28.911, 1.0, 26.0, 40.0, 59.0, 263.0),
        ("Mg", 26.922, 22.488, 0.0, 11.0, 22.0, 38.0, 196.0),
        ("Na", 48.880, 53.802, 1.0, 17.0, 32.0, 60.0, 708.0),
        ("K", 10.901, 22.542, 0.0, 1.600, 3.600, 10.100, 345.0),
        ("F", 0.385, 0.393, 0.0, 0.140, 0.270, 0.480, 4.680),
        ("Cl", 77.419, 81.407, 2.0, 25.0, 51.0, 98.0, 739.0),
    ];
    StatsSummary {
        columns: rows
            .iter()
            .map(|&(name, mean, std, min, q25, q50, q75, max)| {
                (
                    name.to_string(),
                    ColumnStats { count: 1989, mean, std, min, q25, q50, q75, max },
                )
            })
            .collect(),
    }
}

/// One tail segment `[lo, hi]` of a column model with a power shape over
/// `t in [0, 1]`. The power always sits at the segment's outer end, never
/// against a quartile, so the density at the quartile junctions stays
/// finite and sample quantiles land on target.
#[derive(Debug, Clone, Copy)]
struct Tail {
    lo: f64,
    hi: f64,
    exponent: f64,
    /// Shape `hi - (hi - lo) * (1 - t)^e` instead of `lo + (hi - lo) * t^e`.
    anchored_high: bool,
}

impl Tail {
    /// Solves the shape whose mean over uniform `t` equals `target_mean`,
    /// picking the orientation that keeps the exponent at least 1.
    fn for_mean(lo: f64, hi: f64, target_mean: f64) -> Tail {
        let width = hi - lo;
        if width <= 0.0 {
            return Tail { lo, hi: lo, exponent: 1.0, anchored_high: false };
        }
        let midpoint = (lo + hi) / 2.0;
        if target_mean <= midpoint {
            // E = lo + width / (e + 1)
            let exponent = (width / (target_mean - lo) - 1.0).max(1.0);
            Tail { lo, hi, exponent, anchored_high: false }
        } else {
            // E = hi - width / (e + 1)
            let exponent = (width / (hi - target_mean) - 1.0).max(1.0);
            Tail { lo, hi, exponent, anchored_high: true }
        }
    }

    fn value(&self, t: f64) -> f64 {
        if self.anchored_high {
            self.hi - (self.hi - self.lo) * (1.0 - t).powf(self.exponent)
        } else {
            self.lo + (self.hi - self.lo) * t.powf(self.exponent)
        }
    }
}

/// Piecewise inverse CDF for one column: linear between quartiles, power
/// tails below q25 and above q75 with exponents chosen to hit the mean.
#[derive(Debug, Clone, Copy)]
struct ColumnModel {
    min: f64,
    q25: f64,
    q50: f64,
    q75: f64,
    max: f64,
    lower: Tail,
    upper: Tail,
}

impl ColumnModel {
    fn from_stats(name: &str, s: &ColumnStats) -> Result<ColumnModel> {
        if !(s.max > s.min) {
            return Err(Error::InvalidInput(format!(
                "degenerate targets for {name:?}: max ({}) must exceed min ({})",
                s.max, s.min
            )));
        }
        let ordered = s.min <= s.q25 && s.q25 <= s.q50 && s.q50 <= s.q75 && s.q75 <= s.max;
        if !ordered {
            return Err(Error::InvalidInput(format!(
                "targets for {name:?} violate min <= q25 <= q50 <= q75 <= max"
            )));
        }

        // Segment means needed so the overall expectation equals s.mean.
        // The two middle segments are linear, so their means are fixed;
        // the tails absorb the remainder, clamped to what a power shape
        // can reach.
        let mid = (s.q25 + s.q50) / 2.0 + (s.q50 + s.q75) / 2.0;
        let needed = 4.0 * s.mean - mid;
        let lo_span = (s.q25 - s.min) / 2.0;
        let hi_span = (s.max - s.q75) / 2.0;
        let lo_center = (s.min + s.q25) / 2.0;
        let hi_center = (s.q75 + s.max) / 2.0;
        let excess = needed - lo_center - hi_center;
        // Share the excess between the tails in proportion to headroom.
        let total_head = lo_span + hi_span;
        let (mut e_lo, mut e_hi) = if total_head > 0.0 {
            (lo_center + excess * lo_span / total_head, hi_center + excess * hi_span / total_head)
        } else {
            (lo_center, hi_center)
        };
        e_lo = clamp_tail(e_lo, s.min, s.q25);
        e_hi = clamp_tail(e_hi, s.q75, s.max);
        // Give any remainder lost to clamping to the other tail.
        let residual = needed - e_lo - e_hi;
        if residual.abs() > 0.0 {
            e_hi = clamp_tail(e_hi + residual, s.q75, s.max);
            let residual = needed - e_lo - e_hi;
            e_lo = clamp_tail(e_lo + residual, s.min, s.q25);
        }

        Ok(ColumnModel {
            min: s.min,
            q25: s.q25,
            q50: s.q50,
            q75: s.q75,
            max: s.max,
            lower: Tail::for_mean(s.min, s.q25, e_lo),
            upper: Tail::for_mean(s.q75, s.max, e_hi),
        })
    }

    /// Maps a uniform draw to a value; output always lies in [min, max].
    fn inverse_cdf(&self, u: f64) -> f64 {
        let v = if u < 0.25 {
            self.lower.value(u / 0.25)
        } else if u < 0.5 {
            self.q25 + (self.q50 - self.q25) * (u - 0.25) / 0.25
        } else if u < 0.75 {
            self.q50 + (self.q75 - self.q50) * (u - 0.5) / 0.25
        } else {
            self.upper.value((u - 0.75) / 0.25)
        };
        v.clamp(self.min, self.max)
    }
}

/// Keeps a tail mean strictly inside its segment so the exponent stays
/// positive and finite.
fn clamp_tail(e: f64, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    e.clamp(lo + 0.02 * width, hi - 0.02 * width)
}

/// Error function, Abramowitz and Stegun 7.1.26 (|error| < 1.5e-7).
fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592 + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    sign * (1.0 - poly * (-x * x).exp())
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

/// Generates `n` synthetic rows matching `targets`. Deterministic for a
/// given seed; every generated value is clipped to the target's [min, max];
/// column means land within a few percent of the target mean for large `n`.
///
/// `targets` must cover the nine core indicators; extra columns in the
/// summary are generated too.
pub fn synth_generate(targets: &StatsSummary, n: usize, seed: u64) -> Result<SampleTable> {
    if n < 1 {
        return Err(Error::InvalidInput("synthetic table needs n >= 1 rows".into()));
    }
    for core in CORE_INDICATORS {
        if targets.get(core).is_none() {
            return Err(Error::MissingColumn(core.to_string()));
        }
    }
    let mut columns = Vec::with_capacity(targets.columns.len());
    let mut models = Vec::with_capacity(targets.columns.len());
    for (name, stats) in &targets.columns {
        columns.push(name.clone());
        models.push((ColumnModel::from_stats(name, stats)?, CORRELATED.contains(&name.as_str())));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cofactor = (1.0 - FACTOR_LOADING * FACTOR_LOADING).sqrt();
    let mut rows = Vec::with_capacity(n);
    for row_id in 0..n {
        // Draw order is fixed: one shared factor per row, then one draw per
        // column in table order. Determinism depends on this.
        let shared: f64 = rng.sample(StandardNormal);
        let values = models
            .iter()
            .map(|(model, correlated)| {
                let u = if *correlated {
                    let own: f64 = rng.sample(StandardNormal);
                    normal_cdf(FACTOR_LOADING * shared + cofactor * own)
                } else {
                    rng.random::<f64>()
                };
                Some(model.inverse_cdf(u))
            })
            .collect();
        rows.push(WaterSample {
            row_id,
            well_id: None,
            district: None,
            latitude: None,
            longitude: None,
            year: None,
            values,
        });
    }
    SampleTable::new(columns, rows)
}
