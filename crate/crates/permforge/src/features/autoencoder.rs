//! Autoencoder reducers.
//!
//! Two fixed shapes. AE-1L is input-64-input: a single sigmoid code layer
//! of width 64 plus a sigmoid output layer. AE-3L is
//! input-64-16-64-input: ReLU hidden layers around a sigmoid code layer of
//! width 16, with a sigmoid output. Dropout of 0.4 follows every layer
//! except the output. Training reconstructs the input under MSE with Adam
//! (step 0.001) for 80 epochs at batch 64, holding out a fifth of the rows
//! to track validation loss. The encoder half — everything up to and
//! including the code layer — becomes the reduction.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};
use crate::nn::{self, Activation, Loss, Network, Rows, TrainConfig};

const DROPOUT_RATE: f64 = 0.4;
const EPOCHS: usize = 80;
const BATCH_SIZE: usize = 64;
const LEARNING_RATE: f64 = 1e-3;
const VAL_FRACTION: f64 = 0.2;

/// The two autoencoder architectures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AeArch {
    /// One hidden layer: dims input-64-input, 64-wide code.
    Ae1L,
    /// Three hidden layers: dims input-64-16-64-input, 16-wide code.
    Ae3L,
}

impl AeArch {
    pub fn tag(self) -> &'static str {
        match self {
            AeArch::Ae1L => "ae1l",
            AeArch::Ae3L => "ae3l",
        }
    }

    /// Full network dims for an input of width `d`.
    pub fn dims(self, d: usize) -> Vec<usize> {
        match self {
            AeArch::Ae1L => vec![d, 64, d],
            AeArch::Ae3L => vec![d, 64, 16, 64, d],
        }
    }

    /// ReLU everywhere except the sigmoid code and output layers.
    fn activations(self) -> Vec<Activation> {
        match self {
            AeArch::Ae1L => vec![Activation::Sigmoid, Activation::Sigmoid],
            AeArch::Ae3L => vec![
                Activation::Relu,
                Activation::Sigmoid,
                Activation::Relu,
                Activation::Sigmoid,
            ],
        }
    }

    /// Dropout after every layer except the output.
    fn dropout_schedule(self) -> Vec<bool> {
        match self {
            AeArch::Ae1L => vec![true, false],
            AeArch::Ae3L => vec![true, true, true, false],
        }
    }
}

/// A fitted autoencoder; only the encoder half is used for reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderModel {
    pub arch: AeArch,
    /// Full layer widths, `dims[0]` the input and fitted width.
    pub dims: Vec<usize>,
    pub net: Network,
    /// Mean training MSE at each epoch end (dropout off).
    pub train_loss: Vec<f64>,
    /// Mean held-out MSE at each epoch end.
    pub val_loss: Vec<f64>,
    pub seed: u64,
}

impl AutoencoderModel {
    pub fn input_width(&self) -> usize {
        self.dims[0]
    }

    /// Number of layers in the encoder half.
    fn code_layers(&self) -> usize {
        (self.dims.len() - 1) / 2
    }

    /// Width of the code layer: 64 for AE-1L, 16 for AE-3L.
    pub fn code_width(&self) -> usize {
        self.dims[self.code_layers()]
    }

    /// Encodes a matrix into the latent space; deterministic (dropout is a
    /// training-only device). Code values are in [0, 1] — the code layer
    /// is a sigmoid.
    pub fn encode(&self, m: &FeatureMatrix) -> Result<FeatureMatrix> {
        if m.n_cols() != self.input_width() {
            return Err(Error::Shape(format!(
                "matrix width {} does not match fitted width {}",
                m.n_cols(),
                self.input_width()
            )));
        }
        let k = self.code_width();
        let mut values = Vec::with_capacity(m.n_rows() * k);
        for i in 0..m.n_rows() {
            let mut a = m.row(i).to_vec();
            let mut z = Vec::new();
            for (layer, &act) in self
                .net
                .layers
                .iter()
                .zip(&self.net.activations)
                .take(self.code_layers())
            {
                z.clear();
                for o in 0..layer.n_out {
                    let row = &layer.w[o * layer.n_in..(o + 1) * layer.n_in];
                    let dot: f64 = row.iter().zip(&a).map(|(w, x)| w * x).sum();
                    z.push(act.apply(dot + layer.b[o]));
                }
                std::mem::swap(&mut a, &mut z);
            }
            values.extend_from_slice(&a);
        }
        let names = (0..k)
            .map(|c| format!("{}_{c:02}", self.arch.tag()))
            .collect();
        FeatureMatrix::new(values, m.labels().to_vec(), names, m.row_ids().to_vec())
    }
}

/// Trains an autoencoder on `m` (labels are ignored; reconstruction is
/// unsupervised).
pub fn fit_autoencoder(m: &FeatureMatrix, arch: AeArch, seed: u64) -> Result<AutoencoderModel> {
    if m.n_rows() < 2 {
        return Err(Error::DegenerateData(
            "autoencoder training needs at least 2 rows".into(),
        ));
    }
    let d = m.n_cols();
    let dims = arch.dims(d);

    // RNG order: validation split first, then weight init, then training.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..m.n_rows()).collect();
    order.shuffle(&mut rng);
    let n_val = ((VAL_FRACTION * m.n_rows() as f64).round() as usize).clamp(1, m.n_rows() - 1);
    let gather = |idx: &[usize]| -> Vec<f64> {
        let mut v = Vec::with_capacity(idx.len() * d);
        for &i in idx {
            v.extend_from_slice(m.row(i));
        }
        v
    };
    let val_values = gather(&order[..n_val]);
    let train_values = gather(&order[n_val..]);
    let n_train = m.n_rows() - n_val;

    let mut net = Network::new(
        &dims,
        arch.activations(),
        arch.dropout_schedule(),
        DROPOUT_RATE,
        &mut rng,
    )?;
    let cfg = TrainConfig {
        epochs: EPOCHS,
        batch_size: BATCH_SIZE,
        learning_rate: LEARNING_RATE,
        loss: Loss::Mse,
    };
    let train_rows = Rows::new(&train_values, n_train, d);
    let val_rows = Rows::new(&val_values, n_val, d);
    let hist = nn::train(
        &mut net,
        train_rows,
        train_rows,
        &cfg,
        Some((val_rows, val_rows)),
        &mut rng,
    )?;

    Ok(AutoencoderModel {
        arch,
        dims,
        net,
        train_loss: hist.train_loss,
        val_loss: hist.val_loss,
        seed,
    })
}
