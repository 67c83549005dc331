//! Linear SVM trained by stochastic subgradient descent.
//!
//! Hinge loss with an L1 penalty on the weights (bias unregularized),
//! learning rate η_t = η0 / (1 + t) on a global step counter, and a
//! seeded reshuffle of the training order every epoch. The returned
//! weights are the average of the iterates visited during the final
//! quarter of all steps, which damps the oscillation SGD never loses.
//! For monitoring, the objective of the running average over *all* steps
//! so far is recorded at every epoch end.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};
use crate::nn::sigmoid;

#[derive(Debug, Clone, PartialEq)]
pub struct SvmConfig {
    /// L1 penalty coefficient λ.
    pub regularization_strength: f64,
    pub epochs: usize,
    /// Initial learning rate η0.
    pub eta0: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            regularization_strength: 1e-4,
            epochs: 50,
            eta0: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Objective of the cumulative iterate average, one entry per epoch.
    pub objective_history: Vec<f64>,
}

impl SvmModel {
    pub fn score_row(&self, row: &[f64]) -> f64 {
        let margin: f64 = self
            .weights
            .iter()
            .zip(row)
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + self.bias;
        sigmoid(margin)
    }
}

pub fn fit_svm(m: &FeatureMatrix, cfg: &SvmConfig, seed: u64) -> Result<SvmModel> {
    if cfg.epochs == 0 || !(cfg.eta0 > 0.0) || !(cfg.regularization_strength >= 0.0) {
        return Err(Error::Argument(
            "svm needs epochs >= 1, eta0 > 0 and a non-negative penalty".into(),
        ));
    }
    let (benign, malware) = m.class_counts();
    if benign == 0 || malware == 0 {
        return Err(Error::DegenerateData(
            "svm training needs both classes present".into(),
        ));
    }

    let n = m.n_rows();
    let d = m.n_cols();
    let lambda = cfg.regularization_strength;
    // y' in {-1, +1}.
    let signed: Vec<f64> = m
        .labels()
        .iter()
        .map(|&y| if y == 1 { 1.0 } else { -1.0 })
        .collect();

    let total_steps = cfg.epochs * n;
    let tail_window = (total_steps / 4).max(1);
    let tail_start = total_steps - tail_window; // accumulate once step > tail_start

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut cum_w = vec![0.0; d];
    let mut cum_b = 0.0;
    let mut tail_w = vec![0.0; d];
    let mut tail_b = 0.0;
    let mut step = 0usize;
    let mut objective_history = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let eta = cfg.eta0 / (1.0 + step as f64);
            step += 1;
            let x = m.row(i);
            let yp = signed[i];
            let margin = yp * (dot(&w, x) + b);
            let active = margin < 1.0;
            for j in 0..d {
                let hinge = if active { -yp * x[j] } else { 0.0 };
                w[j] -= eta * (hinge + lambda * sign(w[j]));
            }
            if active {
                b += eta * yp;
            }
            for j in 0..d {
                cum_w[j] += w[j];
                if step > tail_start {
                    tail_w[j] += w[j];
                }
            }
            cum_b += b;
            if step > tail_start {
                tail_b += b;
            }
        }
        let steps_so_far = step as f64;
        let avg_w: Vec<f64> = cum_w.iter().map(|v| v / steps_so_far).collect();
        objective_history.push(objective(m, &signed, &avg_w, cum_b / steps_so_far, lambda));
    }

    let span = tail_window as f64;
    Ok(SvmModel {
        weights: tail_w.into_iter().map(|v| v / span).collect(),
        bias: tail_b / span,
        objective_history,
    })
}

/// Mean hinge loss plus the L1 penalty.
fn objective(m: &FeatureMatrix, signed: &[f64], w: &[f64], b: f64, lambda: f64) -> f64 {
    let hinge: f64 = (0..m.n_rows())
        .map(|i| (1.0 - signed[i] * (dot(w, m.row(i)) + b)).max(0.0))
        .sum();
    hinge / m.n_rows() as f64 + lambda * w.iter().map(|v| v.abs()).sum::<f64>()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Subgradient of |w|, with sign(0) = 0 so exact zeros stay put.
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}
