//! Exploratory analysis and feature reduction.
//!
//! Analysis: per-class permission frequencies, Pearson correlation (the phi
//! coefficient on binary columns), and population column variances.
//!
//! Reduction: a common fit/apply interface over four strategies — the
//! original data untouched (OD), variance thresholding (VT), principal
//! component analysis (PCA), and two autoencoder shapes (AE-1L, AE-3L).
//! Models are fitted on training data only and then applied to any matrix
//! of matching width.
//!
//! ```
//! use permforge::catalog::PermissionCatalog;
//! use permforge::dataset::{generate_synthetic, SynthConfig};
//! use permforge::features::{fit_reduction, apply_reduction, ReductionConfig, ReductionKind};
//!
//! let catalog = PermissionCatalog::builtin();
//! let m = generate_synthetic(&SynthConfig::with_default_profile(60, 5, &catalog), &catalog).unwrap();
//! let cfg = ReductionConfig::default();
//! let model = fit_reduction(ReductionKind::VarianceThreshold, &m, &cfg, 5).unwrap();
//! let reduced = apply_reduction(&model, &m).unwrap();
//! assert_eq!(reduced.n_cols(), 16); // the planted high-variance columns
//! ```

mod autoencoder;
mod pca;
mod variance;

pub use autoencoder::{fit_autoencoder, AeArch, AutoencoderModel};
pub use pca::{fit_pca, PcaModel};
pub use variance::{fit_variance_threshold, VarianceThresholdModel};

use std::fmt;
use std::str::FromStr;

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};

/// Per-class permission frequencies: the fraction of each class's rows
/// with a 1 in each column.
#[derive(Debug, Clone)]
pub struct ClassFrequency {
    pub benign: Vec<f64>,
    pub malware: Vec<f64>,
}

/// Computes [`ClassFrequency`]; both classes must be present.
pub fn class_frequency(m: &FeatureMatrix) -> Result<ClassFrequency> {
    let (n_benign, n_malware) = m.class_counts();
    if n_benign == 0 || n_malware == 0 {
        return Err(Error::Argument(
            "class frequency needs both classes present".into(),
        ));
    }
    let d = m.n_cols();
    let mut counts = [vec![0usize; d], vec![0usize; d]];
    for i in 0..m.n_rows() {
        let class = m.labels()[i] as usize;
        for (j, &v) in m.row(i).iter().enumerate() {
            if v == 1.0 {
                counts[class][j] += 1;
            }
        }
    }
    let freq = |counts: &[usize], n: usize| counts.iter().map(|&c| c as f64 / n as f64).collect();
    Ok(ClassFrequency {
        benign: freq(&counts[0], n_benign),
        malware: freq(&counts[1], n_malware),
    })
}

/// Population (1/N) variance of every column.
pub fn column_variances(m: &FeatureMatrix) -> Vec<f64> {
    let (n, d) = (m.n_rows(), m.n_cols());
    let mut means = vec![0.0; d];
    for i in 0..n {
        for (j, &v) in m.row(i).iter().enumerate() {
            means[j] += v;
        }
    }
    means.iter_mut().for_each(|mu| *mu /= n as f64);
    let mut vars = vec![0.0; d];
    for i in 0..n {
        for (j, &v) in m.row(i).iter().enumerate() {
            let c = v - means[j];
            vars[j] += c * c;
        }
    }
    vars.iter_mut().for_each(|v| *v /= n as f64);
    vars
}

/// Pearson correlation matrix of the selected columns, optionally
/// restricted to rows of one class.
///
/// Returns a |cols|×|cols| matrix: symmetric, unit diagonal, entries in
/// [-1, 1]. A column that is constant over the filtered rows has no
/// defined correlation and is reported as an error naming the column.
pub fn pearson_correlation(
    m: &FeatureMatrix,
    cols: &[usize],
    row_filter: Option<u8>,
) -> Result<Vec<Vec<f64>>> {
    if cols.is_empty() {
        return Err(Error::Argument(
            "no columns selected for correlation".into(),
        ));
    }
    let rows: Vec<usize> = (0..m.n_rows())
        .filter(|&i| row_filter.map_or(true, |c| m.labels()[i] == c))
        .collect();
    if rows.len() < 2 {
        return Err(Error::Argument(format!(
            "correlation needs at least 2 rows, have {}",
            rows.len()
        )));
    }
    let n = rows.len() as f64;

    // Centered columns once; constant columns surface here.
    let mut centered: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    let mut norms: Vec<f64> = Vec::with_capacity(cols.len());
    for &j in cols {
        if j >= m.n_cols() {
            return Err(Error::Shape(format!(
                "column index {j} out of range for {} columns",
                m.n_cols()
            )));
        }
        let vals: Vec<f64> = rows.iter().map(|&i| m.get(i, j)).collect();
        let mean = vals.iter().sum::<f64>() / n;
        let col: Vec<f64> = vals.iter().map(|v| v - mean).collect();
        let ss: f64 = col.iter().map(|c| c * c).sum();
        if ss == 0.0 {
            return Err(Error::UndefinedCorrelation(m.feature_names()[j].clone()));
        }
        norms.push(ss.sqrt());
        centered.push(col);
    }

    let k = cols.len();
    let mut out = vec![vec![0.0; k]; k];
    for a in 0..k {
        out[a][a] = 1.0;
        for b in (a + 1)..k {
            let dot: f64 = centered[a]
                .iter()
                .zip(&centered[b])
                .map(|(x, y)| x * y)
                .sum();
            let r = (dot / (norms[a] * norms[b])).clamp(-1.0, 1.0);
            out[a][b] = r;
            out[b][a] = r;
        }
    }
    Ok(out)
}

/// The five reduction strategies of the evaluation grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReductionKind {
    /// Original data: no reduction at all.
    Original,
    VarianceThreshold,
    Pca,
    Ae1L,
    Ae3L,
}

impl ReductionKind {
    pub const ALL: [ReductionKind; 5] = [
        ReductionKind::Original,
        ReductionKind::VarianceThreshold,
        ReductionKind::Pca,
        ReductionKind::Ae1L,
        ReductionKind::Ae3L,
    ];

    /// Short stable tag used in seeds and file formats.
    pub fn tag(self) -> &'static str {
        match self {
            ReductionKind::Original => "od",
            ReductionKind::VarianceThreshold => "vt",
            ReductionKind::Pca => "pca",
            ReductionKind::Ae1L => "ae1l",
            ReductionKind::Ae3L => "ae3l",
        }
    }
}

impl fmt::Display for ReductionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReductionKind::Original => "OD",
            ReductionKind::VarianceThreshold => "VT",
            ReductionKind::Pca => "PCA",
            ReductionKind::Ae1L => "AE-1L",
            ReductionKind::Ae3L => "AE-3L",
        })
    }
}

impl FromStr for ReductionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<ReductionKind> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "od" | "original" => Ok(ReductionKind::Original),
            "vt" | "variancethreshold" => Ok(ReductionKind::VarianceThreshold),
            "pca" => Ok(ReductionKind::Pca),
            "ae1l" => Ok(ReductionKind::Ae1L),
            "ae3l" => Ok(ReductionKind::Ae3L),
            _ => Err(Error::Argument(format!("unknown reduction {s:?}"))),
        }
    }
}

/// Tunables for [`fit_reduction`].
#[derive(Debug, Clone)]
pub struct ReductionConfig {
    /// Variance threshold; columns must exceed it strictly.
    pub vt_threshold: f64,
    /// Number of principal components kept.
    pub pca_components: usize,
}

impl Default for ReductionConfig {
    fn default() -> ReductionConfig {
        ReductionConfig {
            vt_threshold: 0.10,
            pca_components: 16,
        }
    }
}

/// A fitted reduction, ready to transform matrices of the fitted width.
#[derive(Debug, Clone, PartialEq)]
pub enum ReductionModel {
    Original { width: usize },
    VarianceThreshold(VarianceThresholdModel),
    Pca(PcaModel),
    Autoencoder(AutoencoderModel),
}

impl ReductionModel {
    pub fn kind(&self) -> ReductionKind {
        match self {
            ReductionModel::Original { .. } => ReductionKind::Original,
            ReductionModel::VarianceThreshold(_) => ReductionKind::VarianceThreshold,
            ReductionModel::Pca(_) => ReductionKind::Pca,
            ReductionModel::Autoencoder(m) => match m.arch {
                AeArch::Ae1L => ReductionKind::Ae1L,
                AeArch::Ae3L => ReductionKind::Ae3L,
            },
        }
    }

    /// Width of matrices this model accepts.
    pub fn input_width(&self) -> usize {
        match self {
            ReductionModel::Original { width } => *width,
            ReductionModel::VarianceThreshold(m) => m.input_width(),
            ReductionModel::Pca(m) => m.input_width(),
            ReductionModel::Autoencoder(m) => m.input_width(),
        }
    }

    /// Width of matrices this model produces.
    pub fn output_width(&self) -> usize {
        match self {
            ReductionModel::Original { width } => *width,
            ReductionModel::VarianceThreshold(m) => m.selected.len(),
            ReductionModel::Pca(m) => m.components.len(),
            ReductionModel::Autoencoder(m) => m.code_width(),
        }
    }
}

/// Fits the chosen reduction on `train`.
pub fn fit_reduction(
    kind: ReductionKind,
    train: &FeatureMatrix,
    cfg: &ReductionConfig,
    seed: u64,
) -> Result<ReductionModel> {
    match kind {
        ReductionKind::Original => Ok(ReductionModel::Original {
            width: train.n_cols(),
        }),
        ReductionKind::VarianceThreshold => Ok(ReductionModel::VarianceThreshold(
            fit_variance_threshold(train, cfg.vt_threshold)?,
        )),
        ReductionKind::Pca => Ok(ReductionModel::Pca(fit_pca(train, cfg.pca_components)?)),
        ReductionKind::Ae1L => Ok(ReductionModel::Autoencoder(fit_autoencoder(
            train,
            AeArch::Ae1L,
            seed,
        )?)),
        ReductionKind::Ae3L => Ok(ReductionModel::Autoencoder(fit_autoencoder(
            train,
            AeArch::Ae3L,
            seed,
        )?)),
    }
}

/// Applies a fitted reduction to a matrix of matching width.
pub fn apply_reduction(model: &ReductionModel, m: &FeatureMatrix) -> Result<FeatureMatrix> {
    match model {
        ReductionModel::Original { width } => {
            if m.n_cols() != *width {
                return Err(Error::Shape(format!(
                    "matrix width {} does not match fitted width {width}",
                    m.n_cols()
                )));
            }
            Ok(m.clone())
        }
        ReductionModel::VarianceThreshold(vt) => vt.apply(m),
        ReductionModel::Pca(pca) => pca.apply(m),
        ReductionModel::Autoencoder(ae) => ae.encode(m),
    }
}
