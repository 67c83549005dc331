//! Variance-threshold feature selection.

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};

use super::column_variances;

/// A fitted variance threshold: keeps the columns whose population variance
/// strictly exceeds the threshold, ranked by descending variance.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceThresholdModel {
    pub threshold: f64,
    /// Per-column variance of the fitted matrix (full width).
    pub variances: Vec<f64>,
    /// Selected column indices, descending variance (ties by ascending
    /// index).
    pub selected: Vec<usize>,
    /// Names of the selected columns, same order as `selected`.
    pub selected_names: Vec<String>,
}

impl VarianceThresholdModel {
    pub fn input_width(&self) -> usize {
        self.variances.len()
    }

    /// Keeps exactly the selected columns, in the model's ranked order.
    pub fn apply(&self, m: &FeatureMatrix) -> Result<FeatureMatrix> {
        if m.n_cols() != self.input_width() {
            return Err(Error::Shape(format!(
                "matrix width {} does not match fitted width {}",
                m.n_cols(),
                self.input_width()
            )));
        }
        if self.selected.is_empty() {
            return Err(Error::DegenerateData(
                "variance threshold selected no columns".into(),
            ));
        }
        m.select_columns(&self.selected)
    }
}

/// Ranks columns by variance and keeps those strictly above `threshold`.
///
/// Strict inequality means zero-variance columns are dropped even at
/// threshold 0 — constant permissions can never inform a classifier.
pub fn fit_variance_threshold(m: &FeatureMatrix, threshold: f64) -> Result<VarianceThresholdModel> {
    if !m.is_binary() {
        return Err(Error::Argument(
            "variance threshold expects a binary matrix".into(),
        ));
    }
    if !(threshold >= 0.0) {
        return Err(Error::Argument(format!("threshold {threshold} below 0")));
    }
    let variances = column_variances(m);
    let mut selected: Vec<usize> = (0..m.n_cols())
        .filter(|&j| variances[j] > threshold)
        .collect();
    selected.sort_by(|&a, &b| variances[b].total_cmp(&variances[a]).then(a.cmp(&b)));
    let selected_names = selected
        .iter()
        .map(|&j| m.feature_names()[j].clone())
        .collect();
    Ok(VarianceThresholdModel {
        threshold,
        variances,
        selected,
        selected_names,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(values: Vec<f64>, d: usize) -> FeatureMatrix {
        let n = values.len() / d;
        FeatureMatrix::new(
            values,
            (0..n).map(|i| (i % 2) as u8).collect(),
            (0..d).map(|j| format!("f{j}")).collect(),
            (0..n).map(|i| format!("r{i}")).collect(),
        )
        .unwrap()
    }

    /// 8 rows whose columns have variance 0, 0.1875, 0.25.
    fn graded() -> FeatureMatrix {
        let mut values = Vec::new();
        for i in 0..8 {
            values.push(1.0); // constant -> 0
            values.push(f64::from(i < 2)); // p = 0.25 -> 0.1875
            values.push(f64::from(i < 4)); // p = 0.5 -> 0.25
        }
        matrix(values, 3)
    }

    #[test]
    fn threshold_is_a_strict_inequality() {
        let m = graded();
        let model = fit_variance_threshold(&m, 0.0).unwrap();
        // The constant column has variance 0, which is not > 0.
        assert_eq!(model.selected, vec![2, 1]);
    }

    #[test]
    fn selection_is_ranked_by_descending_variance() {
        let m = graded();
        let model = fit_variance_threshold(&m, 0.10).unwrap();
        assert_eq!(model.selected, vec![2, 1]);
        assert_eq!(model.selected_names, vec!["f2", "f1"]);
        assert_eq!(model.variances, vec![0.0, 0.1875, 0.25]);
        let reduced = model.apply(&m).unwrap();
        assert_eq!(reduced.n_cols(), 2);
        assert_eq!(reduced.feature_names(), ["f2", "f1"]);
    }

    #[test]
    fn raising_the_threshold_never_adds_a_column() {
        let m = graded();
        let mut prev: Option<Vec<usize>> = None;
        for threshold in [0.0, 0.05, 0.1875, 0.2, 0.25, 0.3] {
            let sel = fit_variance_threshold(&m, threshold).unwrap().selected;
            if let Some(prev) = &prev {
                assert!(
                    sel.iter().all(|j| prev.contains(j)),
                    "threshold {threshold}"
                );
                assert!(sel.len() <= prev.len());
            }
            prev = Some(sel);
        }
    }

    #[test]
    fn apply_checks_width_and_nonempty_selection() {
        let m = graded();
        let model = fit_variance_threshold(&m, 0.10).unwrap();
        let narrow = matrix(vec![1.0, 0.0], 1);
        assert!(matches!(model.apply(&narrow), Err(Error::Shape(_))));
        let all_dropped = fit_variance_threshold(&m, 0.5).unwrap();
        assert!(all_dropped.selected.is_empty());
        assert!(matches!(
            all_dropped.apply(&m),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn non_binary_input_is_rejected() {
        let m = FeatureMatrix::new(
            vec![0.5, 1.0],
            vec![0, 1],
            vec!["f0".into()],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        assert!(matches!(
            fit_variance_threshold(&m, 0.1),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            fit_variance_threshold(&graded(), -0.1),
            Err(Error::Argument(_))
        ));
    }
}
