//! The eight malware classifiers behind one fit/predict surface.
//!
//! Every classifier consumes a [`FeatureMatrix`](crate::dataset::FeatureMatrix)
//! and produces malware scores in [0, 1], thresholded into labels with
//! [`predict_labels`]. Three are deterministic regardless of seed
//! (decision tree, kNN, AdaBoost); the SVM, random forest, and the
//! neural networks consume the seed for shuffling, bootstrapping, and
//! weight initialization. Single-class training data is allowed where
//! the algorithm degrades gracefully to a constant predictor (tree,
//! forest, kNN, AdaBoost) and rejected where the optimizer's loss
//! becomes vacuous (SVM, DNN).
//!
//! ```
//! use permforge::catalog::PermissionCatalog;
//! use permforge::classify::{self, ClassifierConfig, ClassifierKind};
//! use permforge::dataset::{generate_synthetic, SynthConfig};
//!
//! let catalog = PermissionCatalog::builtin();
//! let data = generate_synthetic(&SynthConfig::with_default_profile(30, 7, &catalog), &catalog)?;
//! let config = ClassifierConfig::default_for(ClassifierKind::DecisionTree);
//! let model = classify::fit(&config, &data, 7)?;
//! let scores = classify::predict_scores(&model, &data)?;
//! let labels = classify::predict_labels(&scores, 0.5)?;
//! let correct = labels.iter().zip(data.labels()).filter(|(a, b)| a == b).count();
//! assert!(correct >= 50);
//! # Ok::<(), permforge::Error>(())
//! ```

pub mod adaboost;
pub mod dnn;
pub mod forest;
pub mod knn;
pub mod svm;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};

pub use adaboost::{fit_adaboost, AdaBoostConfig, AdaBoostModel};
pub use dnn::{fit_dnn, DnnArch, DnnConfig, DnnModel};
pub use forest::{fit_forest, ForestConfig, ForestModel};
pub use knn::{fit_knn, KnnModel};
pub use svm::{fit_svm, SvmConfig, SvmModel};
pub use tree::{grow_tree, DecisionTree, Node, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassifierKind {
    DecisionTree,
    Knn,
    LinearSvm,
    RandomForest,
    AdaBoost,
    Dnn2L,
    Dnn4L,
    Dnn7L,
}

impl ClassifierKind {
    /// Canonical evaluation order.
    pub const ALL: [ClassifierKind; 8] = [
        ClassifierKind::DecisionTree,
        ClassifierKind::Knn,
        ClassifierKind::LinearSvm,
        ClassifierKind::RandomForest,
        ClassifierKind::AdaBoost,
        ClassifierKind::Dnn2L,
        ClassifierKind::Dnn4L,
        ClassifierKind::Dnn7L,
    ];

    /// Short lowercase identifier used in seeds, file formats and CLIs.
    pub fn tag(self) -> &'static str {
        match self {
            ClassifierKind::DecisionTree => "dt",
            ClassifierKind::Knn => "knn",
            ClassifierKind::LinearSvm => "svm",
            ClassifierKind::RandomForest => "rf",
            ClassifierKind::AdaBoost => "adaboost",
            ClassifierKind::Dnn2L => "dnn2l",
            ClassifierKind::Dnn4L => "dnn4l",
            ClassifierKind::Dnn7L => "dnn7l",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ClassifierKind::DecisionTree => "DT",
            ClassifierKind::Knn => "kNN",
            ClassifierKind::LinearSvm => "LinearSVM",
            ClassifierKind::RandomForest => "RF",
            ClassifierKind::AdaBoost => "AdaBoost",
            ClassifierKind::Dnn2L => "DNN-2L",
            ClassifierKind::Dnn4L => "DNN-4L",
            ClassifierKind::Dnn7L => "DNN-7L",
        };
        f.write_str(name)
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    /// Case-insensitive; dashes and underscores are ignored, and a few
    /// long-form names are accepted.
    fn from_str(s: &str) -> Result<Self> {
        let folded: String = s
            .chars()
            .filter(|c| *c != '-' && *c != '_')
            .collect::<String>()
            .to_ascii_lowercase();
        match folded.as_str() {
            "dt" | "decisiontree" | "tree" => Ok(ClassifierKind::DecisionTree),
            "knn" => Ok(ClassifierKind::Knn),
            "svm" | "linearsvm" => Ok(ClassifierKind::LinearSvm),
            "rf" | "randomforest" | "forest" => Ok(ClassifierKind::RandomForest),
            "adaboost" => Ok(ClassifierKind::AdaBoost),
            "dnn2l" => Ok(ClassifierKind::Dnn2L),
            "dnn4l" => Ok(ClassifierKind::Dnn4L),
            "dnn7l" => Ok(ClassifierKind::Dnn7L),
            _ => Err(Error::Argument(format!("unknown classifier '{s}'"))),
        }
    }
}

/// Hyperparameters for one classifier, defaulting to the values used
/// throughout the evaluation grid.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierConfig {
    DecisionTree { min_samples_leaf: usize },
    Knn { k: usize },
    LinearSvm(SvmConfig),
    RandomForest(ForestConfig),
    AdaBoost(AdaBoostConfig),
    Dnn(DnnConfig),
}

impl ClassifierConfig {
    pub fn default_for(kind: ClassifierKind) -> Self {
        match kind {
            ClassifierKind::DecisionTree => ClassifierConfig::DecisionTree {
                min_samples_leaf: 5,
            },
            ClassifierKind::Knn => ClassifierConfig::Knn { k: 5 },
            ClassifierKind::LinearSvm => ClassifierConfig::LinearSvm(SvmConfig::default()),
            ClassifierKind::RandomForest => ClassifierConfig::RandomForest(ForestConfig::default()),
            ClassifierKind::AdaBoost => ClassifierConfig::AdaBoost(AdaBoostConfig::default()),
            ClassifierKind::Dnn2L => ClassifierConfig::Dnn(DnnConfig::default_for(DnnArch::Dnn2L)),
            ClassifierKind::Dnn4L => ClassifierConfig::Dnn(DnnConfig::default_for(DnnArch::Dnn4L)),
            ClassifierKind::Dnn7L => ClassifierConfig::Dnn(DnnConfig::default_for(DnnArch::Dnn7L)),
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierConfig::DecisionTree { .. } => ClassifierKind::DecisionTree,
            ClassifierConfig::Knn { .. } => ClassifierKind::Knn,
            ClassifierConfig::LinearSvm(_) => ClassifierKind::LinearSvm,
            ClassifierConfig::RandomForest(_) => ClassifierKind::RandomForest,
            ClassifierConfig::AdaBoost(_) => ClassifierKind::AdaBoost,
            ClassifierConfig::Dnn(cfg) => match cfg.arch {
                DnnArch::Dnn2L => ClassifierKind::Dnn2L,
                DnnArch::Dnn4L => ClassifierKind::Dnn4L,
                DnnArch::Dnn7L => ClassifierKind::Dnn7L,
            },
        }
    }
}

/// Algorithm-specific fitted parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Tree(DecisionTree),
    Knn(KnnModel),
    Svm(SvmModel),
    Forest(ForestModel),
    AdaBoost(AdaBoostModel),
    Dnn(DnnModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub kind: ClassifierKind,
    pub feature_width: usize,
    pub seed: u64,
    pub params: ModelParams,
}

impl TrainedModel {
    pub fn score_row(&self, row: &[f64]) -> f64 {
        match &self.params {
            ModelParams::Tree(t) => t.score_row(row),
            ModelParams::Knn(k) => k.score_row(row),
            ModelParams::Svm(s) => s.score_row(row),
            ModelParams::Forest(f) => f.score_row(row),
            ModelParams::AdaBoost(a) => a.score_row(row),
            ModelParams::Dnn(d) => d.score_row(row),
        }
    }
}

/// Fits `config` on `train`. The seed feeds the stochastic learners and
/// is recorded on the model either way.
pub fn fit(config: &ClassifierConfig, train: &FeatureMatrix, seed: u64) -> Result<TrainedModel> {
    let params = match config {
        ClassifierConfig::DecisionTree { min_samples_leaf } => {
            if *min_samples_leaf == 0 {
                return Err(Error::Argument("min_samples_leaf must be >= 1".into()));
            }
            let indices: Vec<usize> = (0..train.n_rows()).collect();
            let tree_params = TreeParams {
                min_samples_leaf: *min_samples_leaf,
                max_depth: None,
                mtry: None,
            };
            let weights = vec![1.0; train.n_rows()];
            ModelParams::Tree(grow_tree(
                train,
                &indices,
                &weights,
                &tree_params,
                None,
                None,
            ))
        }
        ClassifierConfig::Knn { k } => ModelParams::Knn(fit_knn(train, *k)?),
        ClassifierConfig::LinearSvm(cfg) => ModelParams::Svm(fit_svm(train, cfg, seed)?),
        ClassifierConfig::RandomForest(cfg) => ModelParams::Forest(fit_forest(train, cfg, seed)?),
        ClassifierConfig::AdaBoost(cfg) => ModelParams::AdaBoost(fit_adaboost(train, cfg)?),
        ClassifierConfig::Dnn(cfg) => ModelParams::Dnn(fit_dnn(train, cfg, seed)?),
    };
    Ok(TrainedModel {
        kind: config.kind(),
        feature_width: train.n_cols(),
        seed,
        params,
    })
}

/// Malware scores in [0, 1], one per row of `m`.
pub fn predict_scores(model: &TrainedModel, m: &FeatureMatrix) -> Result<Vec<f64>> {
    if m.n_cols() != model.feature_width {
        return Err(Error::Shape(format!(
            "model expects {} features, matrix has {}",
            model.feature_width,
            m.n_cols()
        )));
    }
    Ok((0..m.n_rows()).map(|i| model.score_row(m.row(i))).collect())
}

/// Thresholds scores into labels: score ≥ threshold ⇒ malware (1).
pub fn predict_labels(scores: &[f64], threshold: f64) -> Result<Vec<u8>> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Argument(format!(
            "threshold must lie in [0, 1], got {threshold}"
        )));
    }
    Ok(scores.iter().map(|&s| u8::from(s >= threshold)).collect())
}

/// The random forest's normalized mean-decrease-in-Gini importances.
/// Any other model kind is an error.
pub fn rf_feature_importance(model: &TrainedModel) -> Result<Vec<f64>> {
    match &model.params {
        ModelParams::Forest(f) => Ok(f.importance.clone()),
        _ => Err(Error::Argument(format!(
            "feature importance is only defined for RF, not {}",
            model.kind
        ))),
    }
}
