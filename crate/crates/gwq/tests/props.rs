//! Property tests for the cross-cutting invariants: permutation laws,
//! partition laws, clipping contracts and round-trip identities.

use proptest::prelude::*;

use gwq::de::{optimize, DeConfig};
use gwq::evaluation::kfold_split;
use gwq::fusion::{fuse_predict, FusionWeights};
use gwq::gwqi::aggregate;
use gwq::preprocess::{impute, iqr_filter, Scaler};
use gwq::synth::{reference_summary, synth_generate};
use gwq::table::{summarize, SampleTable, WaterSample, CORE_INDICATORS};

fn core_table(grid: Vec<Vec<f64>>) -> SampleTable {
    let columns: Vec<String> = CORE_INDICATORS.iter().map(|s| s.to_string()).collect();
    let rows = grid
        .into_iter()
        .enumerate()
        .map(|(row_id, values)| WaterSample {
            row_id,
            well_id: None,
            district: None,
            latitude: None,
            longitude: None,
            year: None,
            values: values.into_iter().map(Some).collect(),
        })
        .collect();
    SampleTable::new(columns, rows).unwrap()
}

fn row_strategy() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..1000.0, 9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn summarize_is_permutation_invariant(
        mut grid in proptest::collection::vec(row_strategy(), 1..40),
        seed in 0u64..1000,
    ) {
        let a = summarize(&core_table(grid.clone())).unwrap();
        // Deterministic pseudo-shuffle.
        let n = grid.len();
        for i in (1..n).rev() {
            let j = (seed as usize).wrapping_mul(31).wrapping_add(i * 7) % (i + 1);
            grid.swap(i, j);
        }
        let b = summarize(&core_table(grid)).unwrap();
        for ((name_a, stat_a), (name_b, stat_b)) in a.columns.iter().zip(&b.columns) {
            prop_assert_eq!(name_a, name_b);
            prop_assert_eq!(stat_a.count, stat_b.count);
            prop_assert!((stat_a.mean - stat_b.mean).abs() < 1e-9);
            prop_assert_eq!(stat_a.min, stat_b.min);
            prop_assert_eq!(stat_a.max, stat_b.max);
            prop_assert!((stat_a.q50 - stat_b.q50).abs() < 1e-9);
        }
    }

    #[test]
    fn synthetic_tables_never_escape_target_extremes(
        n in 1usize..300,
        seed in 0u64..50,
    ) {
        let targets = reference_summary();
        let table = synth_generate(&targets, n, seed).unwrap();
        let got = summarize(&table).unwrap();
        for (name, want) in &targets.columns {
            let have = got.get(name).unwrap();
            prop_assert!(have.min >= want.min, "{}: {} < {}", name, have.min, want.min);
            prop_assert!(have.max <= want.max, "{}: {} > {}", name, have.max, want.max);
        }
    }

    #[test]
    fn aggregate_is_permutation_invariant_and_monotone(
        mut sis in proptest::collection::vec(0.0f64..=100.0, 1..12),
        bump_idx in 0usize..12,
    ) {
        let base = aggregate(&sis).unwrap();
        sis.reverse();
        let reversed = aggregate(&sis).unwrap();
        prop_assert!((base - reversed).abs() < 1e-12);

        let idx = bump_idx % sis.len();
        if sis[idx] < 100.0 {
            let old = sis[idx];
            sis[idx] = (old + 1.0).min(100.0);
            let bumped = aggregate(&sis).unwrap();
            prop_assert!(bumped >= reversed);
        }
    }

    #[test]
    fn kfold_validation_sets_partition_the_ids(
        n in 4usize..200,
        k_raw in 2usize..12,
        seed in 0u64..1000,
    ) {
        let k = k_raw.min(n);
        let folds = kfold_split(n, k, seed, true).unwrap();
        let mut seen = vec![false; n];
        for (train, validation) in &folds {
            prop_assert_eq!(train.len() + validation.len(), n);
            for &i in validation {
                prop_assert!(!seen[i]);
                seen[i] = true;
            }
            let mut union: Vec<usize> = train.iter().chain(validation).copied().collect();
            union.sort_unstable();
            prop_assert_eq!(union, (0..n).collect::<Vec<_>>());
        }
        prop_assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn de_results_are_deterministic_and_in_bounds(
        seed in 0u64..200,
        dims in 1usize..4,
    ) {
        let config = DeConfig {
            population_size: 8,
            scaling_factor: 0.9,
            crossover_rate: 0.8,
            max_iterations: 10,
            bounds: vec![(-3.0, 7.0); dims],
            seed,
        };
        let objective = |x: &[f64]| x.iter().map(|v| (v - 1.0) * (v - 1.0)).sum::<f64>();
        let a = optimize(objective, &config).unwrap();
        let b = optimize(objective, &config).unwrap();
        prop_assert_eq!(&a, &b);
        for v in &a.best_point {
            prop_assert!((-3.0..=7.0).contains(v));
        }
        for w in a.fitness_history.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn fusion_is_linear_in_predictions_when_bias_is_zero(
        y1 in proptest::collection::vec(-100.0f64..100.0, 1..20),
        scale in 0.1f64..10.0,
        w_cat in -2.0f64..2.0,
        w_lgb in -2.0f64..2.0,
    ) {
        let y2: Vec<f64> = y1.iter().map(|v| v * 0.5 + 1.0).collect();
        let w = FusionWeights { w_cat, w_lgb, bias: 0.0 };
        let scaled_in: Vec<f64> = y1.iter().map(|v| v * scale).collect();
        let scaled_in2: Vec<f64> = y2.iter().map(|v| v * scale).collect();
        let direct = fuse_predict(&w, &scaled_in, &scaled_in2).unwrap();
        let scaled_out: Vec<f64> =
            fuse_predict(&w, &y1, &y2).unwrap().iter().map(|v| v * scale).collect();
        for (a, b) in direct.iter().zip(&scaled_out) {
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn imputation_is_idempotent_on_random_holes(
        grid in proptest::collection::vec(row_strategy(), 2..30),
        holes in proptest::collection::vec((0usize..30, 0usize..9), 0..20),
    ) {
        let n = grid.len();
        let mut table_rows: Vec<Vec<Option<f64>>> =
            grid.into_iter().map(|r| r.into_iter().map(Some).collect()).collect();
        for (row, col) in holes {
            table_rows[row % n][col] = None;
        }
        // Keep at least one value per column.
        for col in 0..9 {
            if table_rows.iter().all(|r| r[col].is_none()) {
                table_rows[0][col] = Some(1.0);
            }
        }
        let columns: Vec<String> = CORE_INDICATORS.iter().map(|s| s.to_string()).collect();
        let rows = table_rows
            .into_iter()
            .enumerate()
            .map(|(row_id, values)| WaterSample {
                row_id,
                well_id: None,
                district: None,
                latitude: None,
                longitude: None,
                year: None,
                values,
            })
            .collect();
        let table = SampleTable::new(columns, rows).unwrap();
        let once = impute(&table).unwrap();
        let twice = impute(&once).unwrap();
        for (a, b) in once.rows().iter().zip(twice.rows()) {
            prop_assert_eq!(&a.values, &b.values);
        }
    }

    #[test]
    fn kept_rows_respect_their_fences(
        grid in proptest::collection::vec(row_strategy(), 4..60),
        k_times_ten in 5u32..40,
    ) {
        let k = k_times_ten as f64 / 10.0;
        let table = core_table(grid);
        let (kept, report) = iqr_filter(&table, &["EC", "K", "F"], k).unwrap();
        for (name, fence) in &report.columns {
            prop_assert!(fence.iqr >= 0.0);
            prop_assert!(fence.lower_fence <= fence.upper_fence);
            for v in kept.column_dense(name).unwrap() {
                prop_assert!(v >= fence.lower_fence && v <= fence.upper_fence);
            }
        }
    }

    #[test]
    fn scaler_standardizes_its_fitting_table(
        grid in proptest::collection::vec(row_strategy(), 2..50),
    ) {
        let table = core_table(grid);
        let scaler = Scaler::fit(&table, &["pH", "EC", "Cl"]).unwrap();
        let m = scaler.transform(&table).unwrap();
        for col in 0..m.n_cols() {
            let values = m.column(col);
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            prop_assert!(mean.abs() < 1e-9);
            let std = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / values.len() as f64)
                .sqrt();
            if scaler.std(&scaler.columns()[col].clone()).unwrap() > 0.0 {
                prop_assert!((std - 1.0).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn csv_round_trip_is_identity_on_values() {
    // One deterministic end-to-end value check; the CSV writer formats with
    // shortest-round-trip floats, so reloading reproduces bits.
    let table = synth_generate(&reference_summary(), 64, 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let schema = gwq::CsvSchema::default();
    table.save_csv(&path, &schema).unwrap();
    let loaded = SampleTable::load_csv(&path, &schema).unwrap();
    assert_eq!(table.columns(), loaded.columns());
    for (a, b) in table.rows().iter().zip(loaded.rows()) {
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_eq!(x.map(f64::to_bits), y.map(f64::to_bits));
        }
    }
}
