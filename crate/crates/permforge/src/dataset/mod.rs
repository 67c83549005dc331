//! Labeled feature matrices: construction from manifests, persistence,
//! train/test splitting, and synthetic corpus generation.
//!
//! The central type is [`FeatureMatrix`]: an N×D row-major matrix of
//! `f64` values with one label, one row id per row and one name per column.
//! Matrices built by [`vectorize`] or [`synth::generate_synthetic`] are
//! binary (every cell 0.0 or 1.0); matrices produced by feature reduction
//! are real-valued. Matrices are immutable after construction.
//!
//! ```
//! use permforge::catalog::PermissionCatalog;
//! use permforge::dataset::{generate_synthetic, split_train_test, SynthConfig};
//!
//! let catalog = PermissionCatalog::builtin();
//! let cfg = SynthConfig::with_default_profile(20, 7, &catalog);
//! let m = generate_synthetic(&cfg, &catalog).unwrap();
//! assert_eq!((m.n_rows(), m.n_cols()), (40, 197));
//! assert!(m.is_binary());
//!
//! let split = split_train_test(&m, 0.8, 7, true).unwrap();
//! assert_eq!(split.train.n_rows(), 32);
//! assert_eq!(split.test.n_rows(), 8);
//! ```

mod io;
pub mod synth;

pub use io::{load_csv, load_csv_path, save_csv, save_csv_path};
pub use synth::{default_class_probs, generate_synthetic, SynthConfig};

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::catalog::PermissionCatalog;
use crate::error::{Error, Result};
use crate::manifest::ManifestInfo;

/// An immutable N×D labeled feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_rows: usize,
    n_cols: usize,
    /// Row-major storage: cell (i, j) lives at `i * n_cols + j`.
    values: Vec<f64>,
    /// Per-row class label: 0 = benign, 1 = malware.
    labels: Vec<u8>,
    feature_names: Vec<String>,
    row_ids: Vec<String>,
}

impl FeatureMatrix {
    /// Builds a matrix, validating shape coherence, label range, and value
    /// finiteness.
    pub fn new(
        values: Vec<f64>,
        labels: Vec<u8>,
        feature_names: Vec<String>,
        row_ids: Vec<String>,
    ) -> Result<FeatureMatrix> {
        let n_rows = labels.len();
        let n_cols = feature_names.len();
        if n_rows == 0 {
            return Err(Error::Shape("matrix must have at least one row".into()));
        }
        if n_cols == 0 {
            return Err(Error::Shape("matrix must have at least one column".into()));
        }
        if row_ids.len() != n_rows {
            return Err(Error::Shape(format!(
                "{} row ids for {} rows",
                row_ids.len(),
                n_rows
            )));
        }
        if values.len() != n_rows * n_cols {
            return Err(Error::Shape(format!(
                "{} values for a {n_rows}x{n_cols} matrix",
                values.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::Shape(format!("label {bad} outside {{0, 1}}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("matrix contains a non-finite value".into()));
        }
        Ok(FeatureMatrix {
            n_rows,
            n_cols,
            values,
            labels,
            feature_names,
            row_ids,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.n_rows && col < self.n_cols);
        self.values[row * self.n_cols + col]
    }

    /// Row `i` as a slice of length `n_cols`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    /// True when every cell is exactly 0.0 or 1.0.
    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// (benign, malware) row counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let malware = self.labels.iter().filter(|&&l| l == 1).count();
        (self.n_rows - malware, malware)
    }

    /// New matrix holding the given rows, in the given order. Indices may
    /// repeat (bootstrap resampling relies on this).
    pub fn select_rows(&self, indices: &[usize]) -> Result<FeatureMatrix> {
        if indices.is_empty() {
            return Err(Error::Shape("row selection is empty".into()));
        }
        let mut values = Vec::with_capacity(indices.len() * self.n_cols);
        let mut labels = Vec::with_capacity(indices.len());
        let mut row_ids = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.n_rows {
                return Err(Error::Shape(format!(
                    "row index {i} out of range for {} rows",
                    self.n_rows
                )));
            }
            values.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
            row_ids.push(self.row_ids[i].clone());
        }
        FeatureMatrix::new(values, labels, self.feature_names.clone(), row_ids)
    }

    /// New matrix holding the given columns, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> Result<FeatureMatrix> {
        if indices.is_empty() {
            return Err(Error::Shape("column selection is empty".into()));
        }
        let mut names = Vec::with_capacity(indices.len());
        for &j in indices {
            if j >= self.n_cols {
                return Err(Error::Shape(format!(
                    "column index {j} out of range for {} columns",
                    self.n_cols
                )));
            }
            names.push(self.feature_names[j].clone());
        }
        let mut values = Vec::with_capacity(indices.len() * self.n_rows);
        for i in 0..self.n_rows {
            let row = self.row(i);
            values.extend(indices.iter().map(|&j| row[j]));
        }
        FeatureMatrix::new(values, self.labels.clone(), names, self.row_ids.clone())
    }
}

/// A disjoint train/test partition of a source matrix.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub train: FeatureMatrix,
    pub test: FeatureMatrix,
    pub seed: u64,
    pub ratio: f64,
}

/// The result of [`vectorize`]: the matrix plus a summary of requested
/// permissions that matched nothing in the catalog.
#[derive(Debug, Clone)]
pub struct Vectorized {
    pub matrix: FeatureMatrix,
    /// Total ignored occurrences across all manifests.
    pub ignored_total: usize,
    /// Distinct ignored names with occurrence counts, sorted by name.
    pub ignored_names: BTreeMap<String, usize>,
}

/// Resolves one requested permission name to a catalog column.
///
/// Exact full-string match wins; otherwise the name's final dot-separated
/// segment is matched (manifests request `android.permission.INTERNET`
/// while the catalog names the bare `INTERNET`).
fn resolve_permission(name: &str, catalog: &PermissionCatalog) -> Option<usize> {
    if let Some(i) = catalog.index_of(name) {
        return Some(i);
    }
    let last = name.rsplit('.').next().unwrap_or(name);
    catalog.index_of(last)
}

/// Builds a binary matrix: cell (i, j) is 1 iff manifest i requests catalog
/// entry j. Permissions that resolve to no catalog entry are ignored and
/// tallied in the returned summary.
pub fn vectorize(
    manifests: &[ManifestInfo],
    labels: &[u8],
    row_ids: &[String],
    catalog: &PermissionCatalog,
) -> Result<Vectorized> {
    if manifests.is_empty() {
        return Err(Error::Argument("no manifests to vectorize".into()));
    }
    if manifests.len() != labels.len() || manifests.len() != row_ids.len() {
        return Err(Error::Argument(format!(
            "{} manifests, {} labels, {} row ids",
            manifests.len(),
            labels.len(),
            row_ids.len()
        )));
    }
    let d = catalog.len();
    let mut values = vec![0.0; manifests.len() * d];
    let mut ignored_total = 0usize;
    let mut ignored_names: BTreeMap<String, usize> = BTreeMap::new();
    for (i, manifest) in manifests.iter().enumerate() {
        for name in &manifest.requested_permissions {
            match resolve_permission(name, catalog) {
                Some(j) => values[i * d + j] = 1.0,
                None => {
                    ignored_total += 1;
                    *ignored_names.entry(name.clone()).or_insert(0) += 1;
                }
            }
        }
    }
    let matrix = FeatureMatrix::new(
        values,
        labels.to_vec(),
        catalog.feature_names(),
        row_ids.to_vec(),
    )?;
    Ok(Vectorized {
        matrix,
        ignored_total,
        ignored_names,
    })
}

/// Splits a matrix into train and test partitions.
///
/// The train size is `round(ratio * N)` clamped to `[1, N-1]`. With
/// `stratified` set, that total is apportioned across classes by largest
/// remainder, so each class's train share matches `ratio` to within one
/// sample. Row order within each partition follows source order; the
/// selection is a seeded shuffle, identical for identical seeds.
pub fn split_train_test(
    m: &FeatureMatrix,
    ratio: f64,
    seed: u64,
    stratified: bool,
) -> Result<DatasetSplit> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Argument(format!(
            "split ratio {ratio} outside (0, 1)"
        )));
    }
    if m.n_rows() < 2 {
        return Err(Error::Argument("need at least 2 rows to split".into()));
    }
    let n = m.n_rows();
    let total_train = ((ratio * n as f64).round() as usize).clamp(1, n - 1);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_idx: Vec<usize> = Vec::with_capacity(total_train);
    let mut test_idx: Vec<usize> = Vec::with_capacity(n - total_train);

    if stratified {
        let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for (i, &l) in m.labels().iter().enumerate() {
            by_class[l as usize].push(i);
        }
        let quotas = apportion(total_train, &[by_class[0].len(), by_class[1].len()], n);
        for (class, indices) in by_class.iter_mut().enumerate() {
            indices.shuffle(&mut rng);
            let take = quotas[class];
            train_idx.extend_from_slice(&indices[..take]);
            test_idx.extend_from_slice(&indices[take..]);
        }
    } else {
        let mut indices: Vec<usize> = (0..n).collect();
        indices.shuffle(&mut rng);
        train_idx.extend_from_slice(&indices[..total_train]);
        test_idx.extend_from_slice(&indices[total_train..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    Ok(DatasetSplit {
        train: m.select_rows(&train_idx)?,
        test: m.select_rows(&test_idx)?,
        seed,
        ratio,
    })
}

/// Largest-remainder apportionment of `total` across class sizes; ties in
/// the fractional part go to the lower class index.
fn apportion(total: usize, class_sizes: &[usize], n: usize) -> Vec<usize> {
    let mut quotas: Vec<usize> = Vec::with_capacity(class_sizes.len());
    let mut fractions: Vec<(usize, f64)> = Vec::with_capacity(class_sizes.len());
    let mut assigned = 0usize;
    for (c, &size) in class_sizes.iter().enumerate() {
        let exact = total as f64 * size as f64 / n as f64;
        let floor = exact.floor() as usize;
        quotas.push(floor);
        assigned += floor;
        fractions.push((c, exact - floor as f64));
    }
    fractions.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    for &(c, _) in fractions.iter().take(total - assigned) {
        quotas[c] += 1;
    }
    quotas
}
