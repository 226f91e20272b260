//! Weighted blending of the two boosted models.
//!
//! The fused predictor is `w_cat * y_cat + w_lgb * y_lgb + b`. The weights
//! are fitted by differential evolution, minimizing the RMSE against the
//! training targets inside the box `w_cat, w_lgb in [0.4, 1.0]`,
//! `b in [-5, 5]`. The box constrains fitting only; `fuse_predict` accepts
//! any real weights.

use serde::{Deserialize, Serialize};

use crate::de::{self, DeConfig};
use crate::error::{Error, Result};

/// The fitting box: both model weights in [0.4, 1.0], bias in [-5, 5].
pub const WEIGHT_BOX: [(f64, f64); 3] = [(0.4, 1.0), (0.4, 1.0), (-5.0, 5.0)];

/// Blend coefficients for the symmetric-style ("cat") and leaf-wise
/// ("lgb") model predictions, plus a bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionWeights {
    pub w_cat: f64,
    pub w_lgb: f64,
    pub bias: f64,
}

impl FusionWeights {
    pub fn as_array(&self) -> [f64; 3] {
        [self.w_cat, self.w_lgb, self.bias]
    }

    /// True when the weights lie inside the fitting box.
    pub fn in_box(&self) -> bool {
        let [w1, w2, b] = self.as_array();
        WEIGHT_BOX[0].0 <= w1
            && w1 <= WEIGHT_BOX[0].1
            && WEIGHT_BOX[1].0 <= w2
            && w2 <= WEIGHT_BOX[1].1
            && WEIGHT_BOX[2].0 <= b
            && b <= WEIGHT_BOX[2].1
    }
}

/// DE settings used for weight fitting: NP = 30, F = 0.8, CR = 0.9,
/// 50 generations over the weight box.
pub fn fusion_de_config(seed: u64) -> DeConfig {
    DeConfig {
        population_size: 30,
        scaling_factor: 0.8,
        crossover_rate: 0.9,
        max_iterations: 50,
        bounds: WEIGHT_BOX.to_vec(),
        seed,
    }
}

/// Elementwise `w_cat * y_cat + w_lgb * y_lgb + bias`.
pub fn fuse_predict(w: &FusionWeights, y_cat: &[f64], y_lgb: &[f64]) -> Result<Vec<f64>> {
    if y_cat.len() != y_lgb.len() {
        return Err(Error::LengthMismatch { expected: y_cat.len(), found: y_lgb.len() });
    }
    Ok(y_cat
        .iter()
        .zip(y_lgb)
        .map(|(c, l)| w.w_cat * c + w.w_lgb * l + w.bias)
        .collect())
}

/// Fits the blend weights by differential evolution, minimizing
/// `RMSE(y_true, w_cat * y_cat + w_lgb * y_lgb + b)` over the weight box.
/// The box always comes from [`WEIGHT_BOX`]; population size, rates,
/// iteration budget and seed come from `de`.
pub fn fit_fusion(
    y_true: &[f64],
    y_cat: &[f64],
    y_lgb: &[f64],
    de: &DeConfig,
) -> Result<FusionWeights> {
    if y_true.len() != y_cat.len() {
        return Err(Error::LengthMismatch { expected: y_true.len(), found: y_cat.len() });
    }
    if y_true.len() != y_lgb.len() {
        return Err(Error::LengthMismatch { expected: y_true.len(), found: y_lgb.len() });
    }
    if y_true.len() < 2 {
        return Err(Error::EmptyInput("fusion fitting needs at least 2 samples"));
    }
    let config = DeConfig { bounds: WEIGHT_BOX.to_vec(), ..de.clone() };
    let objective = |w: &[f64]| {
        let n = y_true.len() as f64;
        let sum: f64 = y_true
            .iter()
            .zip(y_cat)
            .zip(y_lgb)
            .map(|((t, c), l)| {
                let p = w[0] * c + w[1] * l + w[2];
                (t - p) * (t - p)
            })
            .sum();
        (sum / n).sqrt()
    };
    let result = de::optimize(objective, &config)?;
    Ok(FusionWeights {
        w_cat: result.best_point[0],
        w_lgb: result.best_point[1],
        bias: result.best_point[2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rmse(y_true: &[f64], y_pred: &[f64]) -> f64 {
        let n = y_true.len() as f64;
        (y_true.iter().zip(y_pred).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n).sqrt()
    }

    #[test]
    fn identity_weights_return_one_branch() {
        let w = FusionWeights { w_cat: 1.0, w_lgb: 0.0, bias: 0.0 };
        let out = fuse_predict(&w, &[1.0, 2.0, 3.0], &[9.0, 9.0, 9.0]).unwrap();
        assert_eq!(out, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn blending_matches_hand_arithmetic() {
        let w = FusionWeights { w_cat: 0.5, w_lgb: 0.5, bias: 0.0 };
        assert_eq!(fuse_predict(&w, &[2.0], &[4.0]).unwrap(), vec![3.0]);
        let w = FusionWeights { w_cat: 0.4, w_lgb: 0.4, bias: 1.0 };
        let out = fuse_predict(&w, &[10.0], &[10.0]).unwrap();
        assert!((out[0] - 9.0).abs() < 1e-12);
    }

    #[test]
    fn fuse_predict_rejects_length_mismatch() {
        let w = FusionWeights { w_cat: 1.0, w_lgb: 1.0, bias: 0.0 };
        assert!(fuse_predict(&w, &[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn fuse_predict_is_linear_with_zero_bias() {
        let w = FusionWeights { w_cat: 0.7, w_lgb: 0.5, bias: 0.0 };
        let y1 = [1.0, -2.0, 3.0];
        let y2 = [0.5, 4.0, -1.0];
        let direct = fuse_predict(&w, &y1.map(|v| 3.0 * v), &y2.map(|v| 3.0 * v)).unwrap();
        let scaled: Vec<f64> =
            fuse_predict(&w, &y1, &y2).unwrap().iter().map(|v| 3.0 * v).collect();
        for (a, b) in direct.iter().zip(&scaled) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_agreement_reaches_zero_rmse() {
        // The zero-residual set is a whole line (w_cat + w_lgb = 1, b = 0),
        // so localization along it is slow; a deeper iteration budget pins
        // the residual down. The pipeline default of 50 generations is
        // exercised by the oracle-tolerance tests instead.
        let y: Vec<f64> = vec![1.0, 2.0, 3.0];
        let de = DeConfig { max_iterations: 200, ..fusion_de_config(42) };
        let w = fit_fusion(&y, &y, &y, &de).unwrap();
        let fitted = rmse(&y, &fuse_predict(&w, &y, &y).unwrap());
        assert!(fitted < 1e-6, "rmse = {fitted}");
        assert!(w.in_box());
    }

    #[test]
    fn planted_optimum_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let y_cat: Vec<f64> = (0..200).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y_lgb: Vec<f64> = (0..200).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y_true: Vec<f64> = y_cat
            .iter()
            .zip(&y_lgb)
            .map(|(c, l)| 0.6 * c + 0.4 * l + 2.0)
            .collect();
        let w = fit_fusion(&y_true, &y_cat, &y_lgb, &fusion_de_config(42)).unwrap();
        assert!((w.w_cat - 0.6).abs() < 0.05, "w_cat = {}", w.w_cat);
        assert!((w.w_lgb - 0.4).abs() < 0.05, "w_lgb = {}", w.w_lgb);
        assert!((w.bias - 2.0).abs() < 0.05, "bias = {}", w.bias);
        let fitted = rmse(&y_true, &fuse_predict(&w, &y_cat, &y_lgb).unwrap());
        assert!(fitted < 1e-4, "rmse = {fitted}");
    }

    #[test]
    fn fitted_weights_always_satisfy_the_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for seed in 0..5 {
            let y_cat: Vec<f64> = (0..50).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y_lgb: Vec<f64> = (0..50).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y_true: Vec<f64> = (0..50).map(|_| rng.random_range(-1.0..1.0)).collect();
            let w = fit_fusion(&y_true, &y_cat, &y_lgb, &fusion_de_config(seed)).unwrap();
            assert!(w.in_box(), "{w:?} escaped the box");
        }
    }

    #[test]
    fn beats_a_coarse_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let y_cat: Vec<f64> = (0..120).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y_lgb: Vec<f64> =
            y_cat.iter().map(|c| 0.8 * c + rng.random_range(-0.5..0.5)).collect();
        let y_true: Vec<f64> = y_cat
            .iter()
            .zip(&y_lgb)
            .map(|(c, l)| 0.55 * c + 0.45 * l + rng.random_range(-0.2..0.2))
            .collect();

        let w = fit_fusion(&y_true, &y_cat, &y_lgb, &fusion_de_config(42)).unwrap();
        let fitted = rmse(&y_true, &fuse_predict(&w, &y_cat, &y_lgb).unwrap());

        // 13 x 13 x 21 grid over the box.
        let mut grid_best = f64::INFINITY;
        for i in 0..13 {
            for j in 0..13 {
                for k in 0..21 {
                    let w = FusionWeights {
                        w_cat: 0.4 + 0.6 * i as f64 / 12.0,
                        w_lgb: 0.4 + 0.6 * j as f64 / 12.0,
                        bias: -5.0 + 10.0 * k as f64 / 20.0,
                    };
                    let r = rmse(&y_true, &fuse_predict(&w, &y_cat, &y_lgb).unwrap());
                    grid_best = grid_best.min(r);
                }
            }
        }
        assert!(fitted <= grid_best + 1e-6, "fitted {fitted} vs grid {grid_best}");
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let de = fusion_de_config(1);
        assert!(fit_fusion(&[1.0], &[1.0], &[1.0], &de).is_err());
        assert!(fit_fusion(&[1.0, 2.0], &[1.0], &[1.0, 2.0], &de).is_err());
    }
}
