//! Principal component analysis.
//!
//! Fitted by eigendecomposition of the D×D population covariance matrix —
//! cheap at permission-catalog widths — rather than an SVD of the data.
//! Eigenpairs are ordered by descending eigenvalue, and each component's
//! sign is fixed so its largest-magnitude entry is positive, making the
//! fitted model deterministic across platforms.

use nalgebra::DMatrix;

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};

/// A fitted PCA projection.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    /// Per-column mean of the fitted matrix.
    pub mean: Vec<f64>,
    /// k rows of length D: the principal axes, orthonormal.
    pub components: Vec<Vec<f64>>,
    /// Population variance along each axis, non-increasing and ≥ 0.
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn input_width(&self) -> usize {
        self.mean.len()
    }

    /// Projects rows onto the principal axes: scores = (x - mean) · Wᵀ.
    pub fn apply(&self, m: &FeatureMatrix) -> Result<FeatureMatrix> {
        if m.n_cols() != self.input_width() {
            return Err(Error::Shape(format!(
                "matrix width {} does not match fitted width {}",
                m.n_cols(),
                self.input_width()
            )));
        }
        let k = self.components.len();
        let mut values = Vec::with_capacity(m.n_rows() * k);
        let mut centered = vec![0.0; m.n_cols()];
        for i in 0..m.n_rows() {
            for (c, (&x, &mu)) in m.row(i).iter().zip(&self.mean).enumerate() {
                centered[c] = x - mu;
            }
            for comp in &self.components {
                values.push(comp.iter().zip(&centered).map(|(w, x)| w * x).sum());
            }
        }
        let names = (0..k).map(|c| format!("pc_{c:02}")).collect();
        FeatureMatrix::new(values, m.labels().to_vec(), names, m.row_ids().to_vec())
    }
}

/// Fits a k-component PCA on `m`. Requires 1 ≤ k ≤ min(N-1, D).
pub fn fit_pca(m: &FeatureMatrix, k: usize) -> Result<PcaModel> {
    let (n, d) = (m.n_rows(), m.n_cols());
    let limit = (n - 1).min(d);
    if k == 0 || k > limit {
        return Err(Error::Argument(format!(
            "k = {k} outside [1, min(N-1, D)] = [1, {limit}]"
        )));
    }

    let mut mean = vec![0.0; d];
    for i in 0..n {
        for (j, &v) in m.row(i).iter().enumerate() {
            mean[j] += v;
        }
    }
    mean.iter_mut().for_each(|mu| *mu /= n as f64);

    // Population covariance: C = (1/N) Σ (x - mean)(x - mean)ᵀ.
    let mut cov = DMatrix::<f64>::zeros(d, d);
    let mut centered = vec![0.0; d];
    for i in 0..n {
        for (j, (&x, &mu)) in m.row(i).iter().zip(&mean).enumerate() {
            centered[j] = x - mu;
        }
        for a in 0..d {
            let ca = centered[a];
            if ca != 0.0 {
                for b in a..d {
                    cov[(a, b)] += ca * centered[b];
                }
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            let v = cov[(a, b)] / n as f64;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }

    let eigen = cov.symmetric_eigen();
    // Sort eigenpairs by descending eigenvalue; ties keep the solver's
    // original order for determinism.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .total_cmp(&eigen.eigenvalues[a])
            .then(a.cmp(&b))
    });

    let mut components = Vec::with_capacity(k);
    let mut explained_variance = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let col = eigen.eigenvectors.column(idx);
        let mut axis: Vec<f64> = col.iter().copied().collect();
        // Sign convention: the entry with the largest magnitude is positive.
        let mut dominant = 0;
        for (j, v) in axis.iter().enumerate() {
            if v.abs() > axis[dominant].abs() {
                dominant = j;
            }
        }
        if axis[dominant] < 0.0 {
            axis.iter_mut().for_each(|v| *v = -*v);
        }
        components.push(axis);
        // Tiny negative eigenvalues are numerical noise on a PSD matrix.
        explained_variance.push(eigen.eigenvalues[idx].max(0.0));
    }

    Ok(PcaModel {
        mean,
        components,
        explained_variance,
    })
}
