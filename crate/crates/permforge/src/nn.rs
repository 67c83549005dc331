//! A minimal seeded feed-forward network engine.
//!
//! This is the shared machinery under the autoencoder reducers and the DNN
//! classifiers: dense layers, ReLU/sigmoid activations, inverted dropout,
//! Adam, and two losses (MSE and binary cross-entropy). Everything is plain
//! `f64` with no hidden threading, so a fit is a pure function of
//! (architecture, data, seed).
//!
//! Binary cross-entropy is evaluated from pre-sigmoid logits with the
//! softplus identity `bce = softplus(z) - y·z`, and its output-layer
//! gradient is the fused `sigmoid(z) - y`; both are finite for any logit,
//! so no probability clipping is needed anywhere.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Adam moment decay and stabilizer constants.
const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => sigmoid(z),
        }
    }

    /// Derivative, taking both the pre-activation and the activated value
    /// (each form is natural for one of the functions).
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    /// Mean squared error, averaged over batch rows and output units.
    Mse,
    /// Binary cross-entropy, averaged the same way. Requires a sigmoid
    /// output layer.
    Bce,
}

/// One dense layer, `n_out × n_in` weights in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub n_in: usize,
    pub n_out: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Dense {
    fn forward_into(&self, x: &[f64], z: &mut Vec<f64>) {
        z.clear();
        for o in 0..self.n_out {
            let row = &self.w[o * self.n_in..(o + 1) * self.n_in];
            let dot: f64 = row.iter().zip(x).map(|(w, x)| w * x).sum();
            z.push(dot + self.b[o]);
        }
    }
}

/// A feed-forward network: `layers[i]` followed by `activations[i]`, with
/// inverted dropout after activation `i` wherever `dropout_after[i]` is set
/// (training only).
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub layers: Vec<Dense>,
    pub activations: Vec<Activation>,
    pub dropout_after: Vec<bool>,
    pub dropout_rate: f64,
}

impl Network {
    /// Builds a network with `dims.len() - 1` layers. Weights draw from
    /// U(-1/√fan_in, +1/√fan_in) in layer order; biases start at zero.
    pub fn new(
        dims: &[usize],
        activations: Vec<Activation>,
        dropout_after: Vec<bool>,
        dropout_rate: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Network> {
        if dims.len() < 2 || dims.iter().any(|&d| d == 0) {
            return Err(Error::Argument(format!("bad layer dims {dims:?}")));
        }
        let n_layers = dims.len() - 1;
        if activations.len() != n_layers || dropout_after.len() != n_layers {
            return Err(Error::Argument(format!(
                "{} layers but {} activations / {} dropout flags",
                n_layers,
                activations.len(),
                dropout_after.len()
            )));
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(Error::Argument(format!(
                "dropout rate {dropout_rate} outside [0, 1)"
            )));
        }
        let mut layers = Vec::with_capacity(n_layers);
        for i in 0..n_layers {
            let (n_in, n_out) = (dims[i], dims[i + 1]);
            let bound = 1.0 / (n_in as f64).sqrt();
            let w = (0..n_in * n_out)
                .map(|_| rng.random_range(-bound..bound))
                .collect();
            layers.push(Dense {
                n_in,
                n_out,
                w,
                b: vec![0.0; n_out],
            });
        }
        Ok(Network {
            layers,
            activations,
            dropout_after,
            dropout_rate,
        })
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].n_in
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().unwrap().n_out
    }

    /// Inference forward pass: no dropout.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.input_width());
        let mut a = x.to_vec();
        let mut z = Vec::new();
        for (layer, &act) in self.layers.iter().zip(&self.activations) {
            layer.forward_into(&a, &mut z);
            a.clear();
            a.extend(z.iter().map(|&v| act.apply(v)));
        }
        a
    }

    /// Total parameter count (weights + biases, all layers).
    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Flat parameter access in (layer 0 weights, layer 0 biases, layer 1
    /// weights, ...) order. Used by the finite-difference gradient check.
    pub fn get_param(&self, mut i: usize) -> f64 {
        for l in &self.layers {
            if i < l.w.len() {
                return l.w[i];
            }
            i -= l.w.len();
            if i < l.b.len() {
                return l.b[i];
            }
            i -= l.b.len();
        }
        panic!("parameter index out of range");
    }

    pub fn set_param(&mut self, mut i: usize, v: f64) {
        for l in &mut self.layers {
            if i < l.w.len() {
                l.w[i] = v;
                return;
            }
            i -= l.w.len();
            if i < l.b.len() {
                l.b[i] = v;
                return;
            }
            i -= l.b.len();
        }
        panic!("parameter index out of range");
    }

    /// Mean loss over a dataset, dropout off.
    pub fn mean_loss(&self, inputs: Rows<'_>, targets: Rows<'_>, loss: Loss) -> f64 {
        let mut acc = 0.0;
        let mut z = Vec::new();
        let mut a = Vec::new();
        for i in 0..inputs.n_rows {
            self.forward_keeping_last_z(inputs.row(i), &mut z, &mut a);
            acc += row_loss(loss, &z, &a, targets.row(i));
        }
        acc / (inputs.n_rows as f64 * self.output_width() as f64)
    }

    /// Forward pass that leaves the *last layer's* pre-activations in `z`
    /// and its activated outputs in `a`.
    fn forward_keeping_last_z(&self, x: &[f64], z: &mut Vec<f64>, a: &mut Vec<f64>) {
        a.clear();
        a.extend_from_slice(x);
        for (layer, &act) in self.layers.iter().zip(&self.activations) {
            layer.forward_into(a, z);
            a.clear();
            a.extend(z.iter().map(|&v| act.apply(v)));
        }
    }
}

/// Borrowed row-major matrix view for training data.
#[derive(Clone, Copy)]
pub struct Rows<'a> {
    pub values: &'a [f64],
    pub n_rows: usize,
    pub n_cols: usize,
}

impl<'a> Rows<'a> {
    pub fn new(values: &'a [f64], n_rows: usize, n_cols: usize) -> Rows<'a> {
        assert_eq!(values.len(), n_rows * n_cols);
        Rows {
            values,
            n_rows,
            n_cols,
        }
    }

    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }
}

/// Per-sample loss summed over output units (caller divides by rows×units).
fn row_loss(loss: Loss, z: &[f64], a: &[f64], target: &[f64]) -> f64 {
    match loss {
        Loss::Mse => a.iter().zip(target).map(|(a, t)| (a - t) * (a - t)).sum(),
        Loss::Bce => z
            .iter()
            .zip(target)
            .map(|(&z, &y)| softplus(z) - y * z)
            .sum(),
    }
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub loss: Loss,
}

/// Per-epoch loss curves from [`train`], measured at epoch end with dropout
/// off over the full respective sets.
#[derive(Debug, Clone)]
pub struct TrainHistory {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u32,
}

impl AdamState {
    fn new(n: usize) -> AdamState {
        AdamState {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }
}

/// Gradients in the same per-layer layout as the network.
struct Grads {
    w: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
}

impl Grads {
    fn zeros(net: &Network) -> Grads {
        Grads {
            w: net.layers.iter().map(|l| vec![0.0; l.w.len()]).collect(),
            b: net.layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
        }
    }

    fn clear(&mut self) {
        for g in self.w.iter_mut().chain(self.b.iter_mut()) {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
    }
}

/// Accumulates one sample's gradient contribution into `grads`.
///
/// `scale` is the loss-mean factor 1/(batch rows × output units). `masks`
/// carries the batch's dropout mask per layer (empty slice = no dropout on
/// that layer); masked units contribute nothing and their activations were
/// scaled by 1/(1-rate) on the way forward.
fn backprop_sample(
    net: &Network,
    x: &[f64],
    target: &[f64],
    loss: Loss,
    masks: &[Vec<f64>],
    scale: f64,
    grads: &mut Grads,
) {
    let n_layers = net.layers.len();
    // Forward, keeping every layer's pre-activation and (dropout-scaled)
    // activation.
    let mut zs: Vec<Vec<f64>> = Vec::with_capacity(n_layers);
    let mut acts: Vec<Vec<f64>> = Vec::with_capacity(n_layers + 1);
    acts.push(x.to_vec());
    for (i, (layer, &act)) in net.layers.iter().zip(&net.activations).enumerate() {
        let mut z = Vec::new();
        layer.forward_into(acts.last().unwrap(), &mut z);
        let mut a: Vec<f64> = z.iter().map(|&v| act.apply(v)).collect();
        if !masks[i].is_empty() {
            for (av, mv) in a.iter_mut().zip(&masks[i]) {
                *av *= mv;
            }
        }
        zs.push(z);
        acts.push(a);
    }

    // Output delta = dL/dz for the final layer.
    let last = n_layers - 1;
    let mut delta: Vec<f64> = match loss {
        // Fused sigmoid + BCE: dL/dz = sigmoid(z) - y.
        Loss::Bce => zs[last]
            .iter()
            .zip(target)
            .map(|(&z, &y)| (sigmoid(z) - y) * scale)
            .collect(),
        Loss::Mse => zs[last]
            .iter()
            .zip(target)
            .enumerate()
            .map(|(j, (&z, &t))| {
                let a = acts[last + 1][j];
                2.0 * (a - t) * net.activations[last].derivative(z, a) * scale
            })
            .collect(),
    };

    for i in (0..n_layers).rev() {
        let layer = &net.layers[i];
        let input = &acts[i];
        for o in 0..layer.n_out {
            let d = delta[o];
            if d != 0.0 {
                let grow = &mut grads.w[i][o * layer.n_in..(o + 1) * layer.n_in];
                for (g, &xv) in grow.iter_mut().zip(input.iter()) {
                    *g += d * xv;
                }
                grads.b[i][o] += d;
            }
        }
        if i == 0 {
            break;
        }
        // Propagate to the previous layer's activations, then through its
        // dropout mask and activation derivative.
        let prev = i - 1;
        let mut next_delta = vec![0.0; layer.n_in];
        for o in 0..layer.n_out {
            let d = delta[o];
            if d != 0.0 {
                let row = &layer.w[o * layer.n_in..(o + 1) * layer.n_in];
                for (nd, &w) in next_delta.iter_mut().zip(row) {
                    *nd += d * w;
                }
            }
        }
        let act = net.activations[prev];
        for j in 0..layer.n_in {
            if !masks[prev].is_empty() {
                next_delta[j] *= masks[prev][j];
            }
            // The stored activation includes the dropout scaling; recompute
            // the raw activation for the derivative.
            let raw_a = act.apply(zs[prev][j]);
            next_delta[j] *= act.derivative(zs[prev][j], raw_a);
        }
        delta = next_delta;
    }
}

/// Loss and flat analytic gradient over the given rows, dropout off.
///
/// The gradient layout matches [`Network::get_param`]; the loss is the same
/// batch-and-unit mean that [`train`] descends, so central finite
/// differences of this function validate the backpropagation.
pub fn loss_and_grads(
    net: &Network,
    inputs: Rows<'_>,
    targets: Rows<'_>,
    loss: Loss,
) -> (f64, Vec<f64>) {
    let masks: Vec<Vec<f64>> = vec![Vec::new(); net.layers.len()];
    let scale = 1.0 / (inputs.n_rows as f64 * net.output_width() as f64);
    let mut grads = Grads::zeros(net);
    for i in 0..inputs.n_rows {
        backprop_sample(
            net,
            inputs.row(i),
            targets.row(i),
            loss,
            &masks,
            scale,
            &mut grads,
        );
    }
    let mut flat = Vec::with_capacity(net.n_params());
    for i in 0..net.layers.len() {
        flat.extend_from_slice(&grads.w[i]);
        flat.extend_from_slice(&grads.b[i]);
    }
    (net.mean_loss(inputs, targets, loss), flat)
}

/// Trains `net` in place with Adam.
///
/// RNG consumption order is fixed: one shuffle per epoch, then per batch
/// one dropout mask per dropout-enabled layer. Loss curves are recorded at
/// each epoch's end (dropout off); `val` supplies an optional held-out set
/// for the second curve.
pub fn train(
    net: &mut Network,
    inputs: Rows<'_>,
    targets: Rows<'_>,
    cfg: &TrainConfig,
    val: Option<(Rows<'_>, Rows<'_>)>,
    rng: &mut ChaCha8Rng,
) -> Result<TrainHistory> {
    if inputs.n_rows == 0 || inputs.n_rows != targets.n_rows {
        return Err(Error::Shape(format!(
            "{} input rows vs {} target rows",
            inputs.n_rows, targets.n_rows
        )));
    }
    if inputs.n_cols != net.input_width() || targets.n_cols != net.output_width() {
        return Err(Error::Shape(format!(
            "data is {}->{} but network is {}->{}",
            inputs.n_cols,
            targets.n_cols,
            net.input_width(),
            net.output_width()
        )));
    }
    if cfg.batch_size == 0 || cfg.epochs == 0 || cfg.learning_rate <= 0.0 {
        return Err(Error::Argument(
            "epochs, batch size, and learning rate must be positive".into(),
        ));
    }
    if cfg.loss == Loss::Bce && *net.activations.last().unwrap() != Activation::Sigmoid {
        return Err(Error::Argument(
            "binary cross-entropy requires a sigmoid output layer".into(),
        ));
    }

    let mut adam = AdamState::new(net.n_params());
    let mut grads = Grads::zeros(net);
    let mut order: Vec<usize> = (0..inputs.n_rows).collect();
    let mut masks: Vec<Vec<f64>> = vec![Vec::new(); net.layers.len()];
    let mut history = TrainHistory {
        train_loss: Vec::with_capacity(cfg.epochs),
        val_loss: Vec::new(),
    };

    for _epoch in 0..cfg.epochs {
        order.shuffle(rng);
        for batch in order.chunks(cfg.batch_size) {
            // One inverted-dropout mask per enabled layer, shared by the
            // batch: 0 with probability `rate`, else 1/(1-rate).
            for (i, layer) in net.layers.iter().enumerate() {
                masks[i].clear();
                if net.dropout_after[i] {
                    let keep_scale = 1.0 / (1.0 - net.dropout_rate);
                    masks[i].extend((0..layer.n_out).map(|_| {
                        if rng.random::<f64>() < net.dropout_rate {
                            0.0
                        } else {
                            keep_scale
                        }
                    }));
                }
            }
            grads.clear();
            let scale = 1.0 / (batch.len() as f64 * net.output_width() as f64);
            for &row in batch {
                backprop_sample(
                    net,
                    inputs.row(row),
                    targets.row(row),
                    cfg.loss,
                    &masks,
                    scale,
                    &mut grads,
                );
            }
            adam.t += 1;
            adam_step(net, &grads, &mut adam, cfg.learning_rate);
        }
        history
            .train_loss
            .push(net.mean_loss(inputs, targets, cfg.loss));
        if let Some((vx, vt)) = val {
            history.val_loss.push(net.mean_loss(vx, vt, cfg.loss));
        }
    }
    Ok(history)
}

fn adam_step(net: &mut Network, grads: &Grads, adam: &mut AdamState, lr: f64) {
    let bc1 = 1.0 - BETA1.powi(adam.t as i32);
    let bc2 = 1.0 - BETA2.powi(adam.t as i32);
    let mut k = 0usize;
    for (i, layer) in net.layers.iter_mut().enumerate() {
        for (p, &g) in layer
            .w
            .iter_mut()
            .chain(layer.b.iter_mut())
            .zip(grads.w[i].iter().chain(grads.b[i].iter()))
        {
            adam.m[k] = BETA1 * adam.m[k] + (1.0 - BETA1) * g;
            adam.v[k] = BETA2 * adam.v[k] + (1.0 - BETA2) * g * g;
            let m_hat = adam.m[k] / bc1;
            let v_hat = adam.v[k] / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + EPSILON);
            k += 1;
        }
    }
}
