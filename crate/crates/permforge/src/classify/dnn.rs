//! Feed-forward binary classifiers over the neural-network engine.
//!
//! Three fixed architectures, named for their hidden-layer counts:
//! DNN-2L with widths [64], DNN-4L with [128, 32, 8], and DNN-7L with
//! [128, 64, 32, 16, 8, 4]. Hidden layers are ReLU with dropout 0.4;
//! the single output unit is a sigmoid trained with binary cross-entropy
//! under Adam. Training runs a fixed 150 epochs with no early stopping
//! and no validation split.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};
use crate::nn::{self, Activation, Loss, Network, Rows, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DnnArch {
    Dnn2L,
    Dnn4L,
    Dnn7L,
}

impl DnnArch {
    pub fn hidden_widths(self) -> &'static [usize] {
        match self {
            DnnArch::Dnn2L => &[64],
            DnnArch::Dnn4L => &[128, 32, 8],
            DnnArch::Dnn7L => &[128, 64, 32, 16, 8, 4],
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            DnnArch::Dnn2L => "dnn2l",
            DnnArch::Dnn4L => "dnn4l",
            DnnArch::Dnn7L => "dnn7l",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DnnConfig {
    pub arch: DnnArch,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub dropout: f64,
}

impl DnnConfig {
    pub fn default_for(arch: DnnArch) -> Self {
        DnnConfig {
            arch,
            learning_rate: 0.1,
            epochs: 150,
            batch_size: 64,
            dropout: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DnnModel {
    pub arch: DnnArch,
    pub net: Network,
    /// Mean training loss at each epoch end.
    pub loss_history: Vec<f64>,
}

impl DnnModel {
    pub fn score_row(&self, row: &[f64]) -> f64 {
        self.net.forward(row)[0]
    }
}

pub fn fit_dnn(m: &FeatureMatrix, cfg: &DnnConfig, seed: u64) -> Result<DnnModel> {
    let (benign, malware) = m.class_counts();
    if benign == 0 || malware == 0 {
        return Err(Error::DegenerateData(
            "dnn training needs both classes present".into(),
        ));
    }

    let hidden = cfg.arch.hidden_widths();
    let mut dims = Vec::with_capacity(hidden.len() + 2);
    dims.push(m.n_cols());
    dims.extend_from_slice(hidden);
    dims.push(1);
    let mut activations = vec![Activation::Relu; hidden.len()];
    activations.push(Activation::Sigmoid);
    let mut dropout_after = vec![true; hidden.len()];
    dropout_after.push(false);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Network::new(&dims, activations, dropout_after, cfg.dropout, &mut rng)?;
    let targets: Vec<f64> = m.labels().iter().map(|&y| f64::from(y)).collect();
    let history = nn::train(
        &mut net,
        Rows::new(m.values(), m.n_rows(), m.n_cols()),
        Rows::new(&targets, m.n_rows(), 1),
        &TrainConfig {
            epochs: cfg.epochs,
            batch_size: cfg.batch_size,
            learning_rate: cfg.learning_rate,
            loss: Loss::Bce,
        },
        None,
        &mut rng,
    )?;

    Ok(DnnModel {
        arch: cfg.arch,
        net,
        loss_history: history.train_loss,
    })
}
