//! AdaBoost over depth-1 trees, real-valued (SAMME.R) variant.
//!
//! Every round fits a stump that minimizes *weighted* Gini impurity on
//! the current sample weights, converts its leaf malware fractions into
//! half-log-odds contributions h(x) = ½·(ln p₁ − ln p₀), reweights each
//! sample by exp(−y'·h(x)) with y' ∈ {−1, +1}, and renormalizes the
//! weights back to a probability distribution. Leaf probabilities are
//! clipped away from 0 and 1 so pure leaves keep finite contributions.
//! A round whose stump has weighted misclassification error ≥ 0.5 is
//! discarded and boosting halts: such a stump is no better than the
//! weighted coin, and reweighting through it would amplify noise. The
//! whole procedure is deterministic — no RNG is involved.

use crate::classify::tree::{grow_tree, DecisionTree, TreeParams};
use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};
use crate::nn::sigmoid;

/// Leaf probabilities are clipped to [CLIP, 1 - CLIP].
const CLIP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct AdaBoostConfig {
    pub n_estimators: usize,
    /// Scales every stump's contribution.
    pub learning_rate: f64,
}

impl Default for AdaBoostConfig {
    fn default() -> Self {
        AdaBoostConfig {
            n_estimators: 50,
            learning_rate: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaBoostModel {
    pub stumps: Vec<DecisionTree>,
    pub learning_rate: f64,
    /// Weighted misclassification error of each kept stump.
    pub stump_errors: Vec<f64>,
    /// Sample-weight sum after each round's renormalization.
    pub weight_sum_history: Vec<f64>,
}

impl AdaBoostModel {
    /// σ(2·Σ h_t(x)): the ensemble's decision function squashed to (0, 1).
    pub fn score_row(&self, row: &[f64]) -> f64 {
        let total: f64 = self
            .stumps
            .iter()
            .map(|s| contribution(s.score_row(row), self.learning_rate))
            .sum();
        sigmoid(2.0 * total)
    }
}

/// Half-log-odds of a clipped leaf probability.
fn contribution(p1: f64, learning_rate: f64) -> f64 {
    let p1 = p1.clamp(CLIP, 1.0 - CLIP);
    0.5 * (p1.ln() - (1.0 - p1).ln()) * learning_rate
}

pub fn fit_adaboost(m: &FeatureMatrix, cfg: &AdaBoostConfig) -> Result<AdaBoostModel> {
    if cfg.n_estimators == 0 || !(cfg.learning_rate > 0.0) {
        return Err(Error::Argument(
            "adaboost needs n_estimators >= 1 and learning_rate > 0".into(),
        ));
    }
    let n = m.n_rows();
    let indices: Vec<usize> = (0..n).collect();
    let params = TreeParams {
        min_samples_leaf: 1,
        max_depth: Some(1),
        mtry: None,
    };
    let mut weights = vec![1.0 / n as f64; n];
    let mut model = AdaBoostModel {
        stumps: Vec::new(),
        learning_rate: cfg.learning_rate,
        stump_errors: Vec::new(),
        weight_sum_history: Vec::new(),
    };

    for _ in 0..cfg.n_estimators {
        let stump = grow_tree(m, &indices, &weights, &params, None, None);
        let mut error = 0.0;
        for i in 0..n {
            let predicted = u8::from(stump.score_row(m.row(i)) >= 0.5);
            if predicted != m.labels()[i] {
                error += weights[i];
            }
        }
        if error >= 0.5 {
            break; // no better than the weighted coin; discard and stop
        }
        for i in 0..n {
            let h = contribution(stump.score_row(m.row(i)), cfg.learning_rate);
            let y_signed = if m.labels()[i] == 1 { 1.0 } else { -1.0 };
            weights[i] *= (-y_signed * h).exp();
        }
        let sum: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= sum;
        }
        model.stump_errors.push(error);
        model.weight_sum_history.push(weights.iter().sum());
        model.stumps.push(stump);
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::tree::Node;

    fn matrix(values: Vec<f64>, labels: Vec<u8>, d: usize) -> FeatureMatrix {
        let n = labels.len();
        FeatureMatrix::new(
            values,
            labels,
            (0..d).map(|j| format!("f{j}")).collect(),
            (0..n).map(|i| format!("r{i}")).collect(),
        )
        .unwrap()
    }

    /// Six rows where the label is feature-0 OR feature-1: no single
    /// stump separates it, but an additive pair of stumps does.
    fn six_rows() -> FeatureMatrix {
        matrix(
            vec![
                0.0, 0.0, //
                0.0, 0.0, //
                0.0, 1.0, //
                1.0, 0.0, //
                1.0, 1.0, //
                1.0, 1.0,
            ],
            vec![0, 0, 1, 1, 1, 1],
            2,
        )
    }

    /// Brute-force the best first-round stump: every feature, every
    /// midpoint threshold, weighted Gini decrease, lowest feature then
    /// lowest threshold on ties.
    fn oracle_best_stump(m: &FeatureMatrix, weights: &[f64]) -> (usize, f64) {
        let gini = |w1: f64, w: f64| {
            if w <= 0.0 {
                return 0.0;
            }
            let p1 = w1 / w;
            1.0 - p1 * p1 - (1.0 - p1) * (1.0 - p1)
        };
        let w_total: f64 = weights.iter().sum();
        let w1_total: f64 = (0..m.n_rows())
            .filter(|&i| m.labels()[i] == 1)
            .map(|i| weights[i])
            .sum();
        let parent = gini(w1_total, w_total);
        let mut best: Option<(usize, f64, f64)> = None;
        for feature in 0..m.n_cols() {
            let mut vals: Vec<f64> = (0..m.n_rows()).map(|i| m.get(i, feature)).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            for pair in vals.windows(2) {
                let thr = pair[0] + (pair[1] - pair[0]) / 2.0;
                let mut wl = 0.0;
                let mut w1l = 0.0;
                for i in 0..m.n_rows() {
                    if m.get(i, feature) <= thr {
                        wl += weights[i];
                        if m.labels()[i] == 1 {
                            w1l += weights[i];
                        }
                    }
                }
                let wr = w_total - wl;
                let decrease = parent
                    - (wl / w_total) * gini(w1l, wl)
                    - (wr / w_total) * gini(w1_total - w1l, wr);
                if best.as_ref().map_or(true, |b| decrease > b.2) {
                    best = Some((feature, thr, decrease));
                }
            }
        }
        let (f, t, _) = best.unwrap();
        (f, t)
    }

    #[test]
    fn first_round_stump_matches_the_exhaustive_oracle() {
        let m = six_rows();
        let n = m.n_rows();
        let (want_f, want_t) = oracle_best_stump(&m, &vec![1.0 / n as f64; n]);
        let model = fit_adaboost(&m, &AdaBoostConfig::default()).unwrap();
        match &model.stumps[0].nodes[0] {
            Node::Split {
                feature, threshold, ..
            } => {
                assert_eq!(*feature, want_f);
                assert!((threshold - want_t).abs() < 1e-12);
            }
            other => panic!("expected a split root, got {other:?}"),
        }
        assert!(model.stump_errors[0] < 0.5);
    }

    #[test]
    fn weights_stay_a_probability_distribution() {
        let m = six_rows();
        let model = fit_adaboost(&m, &AdaBoostConfig::default()).unwrap();
        assert!(!model.weight_sum_history.is_empty());
        for (round, sum) in model.weight_sum_history.iter().enumerate() {
            assert!((sum - 1.0).abs() < 1e-9, "round {round}: weight sum {sum}");
        }
        for err in &model.stump_errors {
            assert!(*err < 0.5);
        }
    }

    #[test]
    fn boosting_beats_its_own_first_stump() {
        let m = six_rows();
        let model = fit_adaboost(&m, &AdaBoostConfig::default()).unwrap();
        let accuracy = |score: &dyn Fn(&[f64]) -> f64| {
            (0..m.n_rows())
                .filter(|&i| u8::from(score(m.row(i)) >= 0.5) == m.labels()[i])
                .count() as f64
                / m.n_rows() as f64
        };
        let stump = model.stumps[0].clone();
        let stump_acc = accuracy(&|row| stump.score_row(row));
        let ensemble_acc = accuracy(&|row| model.score_row(row));
        assert!(
            ensemble_acc >= stump_acc,
            "ensemble {ensemble_acc} < stump {stump_acc}"
        );
        assert_eq!(ensemble_acc, 1.0);
    }

    #[test]
    fn unsplittable_balanced_data_halts_with_no_stumps() {
        // One constant feature, balanced labels: the stump is a bare leaf
        // scoring 0.5, misclassifying half the weight.
        let m = matrix(vec![1.0, 1.0, 1.0, 1.0], vec![0, 0, 1, 1], 1);
        let model = fit_adaboost(&m, &AdaBoostConfig::default()).unwrap();
        assert!(model.stumps.is_empty());
        assert_eq!(model.score_row(&[1.0]), 0.5);
    }

    #[test]
    fn pure_leaves_keep_finite_contributions() {
        // Separable data: round-1 leaves are pure, so clipping is what
        // keeps the half-log-odds finite.
        let m = matrix(vec![0.0, 0.0, 1.0, 1.0], vec![0, 0, 1, 1], 1);
        let model = fit_adaboost(&m, &AdaBoostConfig::default()).unwrap();
        let score = model.score_row(&[1.0]);
        assert!(score.is_finite());
        assert!(score > 0.99);
        assert!(model.score_row(&[0.0]) < 0.01);
    }

    #[test]
    fn single_class_data_is_permitted() {
        let m = matrix(vec![0.0, 0.5, 1.0], vec![1, 1, 1], 1);
        let model = fit_adaboost(&m, &AdaBoostConfig::default()).unwrap();
        assert!(model.score_row(&[0.7]) > 0.99);
    }

    #[test]
    fn bad_config_is_rejected() {
        let m = six_rows();
        let cfg = AdaBoostConfig {
            n_estimators: 0,
            ..AdaBoostConfig::default()
        };
        assert!(matches!(fit_adaboost(&m, &cfg), Err(Error::Argument(_))));
    }
}
