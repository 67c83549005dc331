//! k-nearest-neighbour voting.
//!
//! Fitting just memorizes the training rows. Scoring sorts neighbours by
//! (Euclidean distance, training-row index) and votes over the first `k`
//! plus every neighbour exactly tied with the k-th distance, so ties at
//! the boundary never depend on sort noise.

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub k: usize,
    pub values: Vec<f64>,
    pub n_cols: usize,
    pub labels: Vec<u8>,
}

pub fn fit_knn(m: &FeatureMatrix, k: usize) -> Result<KnnModel> {
    if k == 0 {
        return Err(Error::Argument("knn requires k >= 1".into()));
    }
    Ok(KnnModel {
        k,
        values: m.values().to_vec(),
        n_cols: m.n_cols(),
        labels: m.labels().to_vec(),
    })
}

impl KnnModel {
    fn n_rows(&self) -> usize {
        self.labels.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    /// Fraction of malware labels among the voting neighbours.
    pub fn score_row(&self, query: &[f64]) -> f64 {
        let mut order: Vec<(f64, usize)> = (0..self.n_rows())
            .map(|i| (squared_distance(self.row(i), query), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let k = self.k.min(order.len());
        let kth = order[k - 1].0;
        let voters = order.iter().take_while(|(d, _)| *d <= kth);
        let mut n = 0usize;
        let mut ones = 0usize;
        for (_, i) in voters {
            n += 1;
            if self.labels[*i] == 1 {
                ones += 1;
            }
        }
        ones as f64 / n as f64
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn unanimous_neighbourhood_scores_one() {
        // Five malware points clustered at 1.0, five benign at 0.0; a query
        // next to the cluster has five unanimous neighbours.
        let mut values = Vec::new();
        let mut labels = Vec::new();
        for i in 0..5 {
            values.push(1.0 + f64::from(i) * 1e-3);
            labels.push(1);
        }
        for i in 0..5 {
            values.push(0.0 + f64::from(i) * 1e-3);
            labels.push(0);
        }
        let model = fit_knn(&matrix(values, labels, 1), 5).unwrap();
        assert_eq!(model.score_row(&[1.0]), 1.0);
        assert_eq!(model.score_row(&[0.0]), 0.0);
    }

    #[test]
    fn k_one_memorizes_distinct_points() {
        let m = matrix(vec![0.0, 1.0, 2.0, 3.0], vec![0, 1, 0, 1], 1);
        let model = fit_knn(&m, 1).unwrap();
        for i in 0..4 {
            let score = model.score_row(m.row(i));
            assert_eq!(u8::from(score >= 0.5), m.labels()[i]);
        }
    }

    #[test]
    fn distance_ties_at_the_kth_neighbour_all_vote() {
        // Query at the origin; four points all at distance 1 with labels
        // [1, 1, 1, 0]. k = 2 must include all four tied voters: 3/4.
        let m = matrix(
            vec![
                1.0, 0.0, //
                -1.0, 0.0, //
                0.0, 1.0, //
                0.0, -1.0,
            ],
            vec![1, 1, 1, 0],
            2,
        );
        let model = fit_knn(&m, 2).unwrap();
        assert_eq!(model.score_row(&[0.0, 0.0]), 0.75);
    }

    #[test]
    fn k_larger_than_training_set_uses_everyone() {
        let m = matrix(vec![0.0, 1.0, 2.0], vec![0, 1, 1], 1);
        let model = fit_knn(&m, 10).unwrap();
        let score = model.score_row(&[5.0]);
        assert!((score - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_k_is_rejected() {
        let m = matrix(vec![0.0, 1.0], vec![0, 1], 1);
        assert!(matches!(fit_knn(&m, 0), Err(Error::Argument(_))));
    }
}
