//! Versioned text serialization for fitted models.
//!
//! Every saved model is a whitespace-tokenized text document starting
//! with the header `permforge-model v1 <kind>`, where the kind tag is
//! one of the reductions `vt | pca | ae1l | ae3l` or the classifiers
//! `dt | rf | knn | svm | adaboost | dnn2l | dnn4l | dnn7l`. Floats are
//! written with 17 significant digits, which round-trips every finite
//! f64 bit-exactly, so a reloaded model scores identically to the one
//! that was saved. Training curves (loss/objective/error histories) are
//! diagnostics of the fitting run, not parameters, and are deliberately
//! not serialized. The identity reduction has no parameters and is not
//! saveable.
//!
//! Tree nodes are stored one per line in arena order, `split <feature>
//! <threshold> <left> <right>` or `leaf <score>`, and loading validates
//! that children always point forward so a corrupted file can never
//! produce an unterminated prediction walk.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::classify::{
    AdaBoostModel, ClassifierKind, DecisionTree, DnnArch, DnnModel, ForestModel, KnnModel,
    ModelParams, Node, SvmModel, TrainedModel,
};
use crate::error::{Error, Result};
use crate::features::{AeArch, AutoencoderModel, ReductionModel};
use crate::nn::{Activation, Dense, Network};

const MAGIC: &str = "permforge-model";
const VERSION: &str = "v1";

/// Any model the text container can hold.
#[derive(Debug, Clone, PartialEq)]
pub enum SavedModel {
    Reduction(ReductionModel),
    Classifier(TrainedModel),
}

fn float(v: f64) -> String {
    format!("{v:.17e}")
}

fn err(msg: impl Into<String>) -> Error {
    Error::ModelFormat(msg.into())
}

/// Serializes a model into the text container format.
pub fn save_model(model: &SavedModel) -> Result<String> {
    let mut out = String::new();
    match model {
        SavedModel::Reduction(ReductionModel::Original { .. }) => {
            return Err(Error::Argument(
                "the identity reduction has no parameters to save".into(),
            ));
        }
        SavedModel::Reduction(ReductionModel::VarianceThreshold(vt)) => {
            writeln!(out, "{MAGIC} {VERSION} vt").unwrap();
            writeln!(out, "threshold {}", float(vt.threshold)).unwrap();
            write_floats(&mut out, "variances", &vt.variances);
            write!(out, "selected {}", vt.selected.len()).unwrap();
            for i in &vt.selected {
                write!(out, " {i}").unwrap();
            }
            out.push('\n');
            write!(out, "names {}", vt.selected_names.len()).unwrap();
            for name in &vt.selected_names {
                if name.chars().any(char::is_whitespace) {
                    return Err(err(format!("feature name '{name}' contains whitespace")));
                }
                write!(out, " {name}").unwrap();
            }
            out.push('\n');
        }
        SavedModel::Reduction(ReductionModel::Pca(pca)) => {
            writeln!(out, "{MAGIC} {VERSION} pca").unwrap();
            write_floats(&mut out, "mean", &pca.mean);
            write_floats(&mut out, "explained_variance", &pca.explained_variance);
            writeln!(
                out,
                "components {} {}",
                pca.components.len(),
                pca.mean.len()
            )
            .unwrap();
            for row in &pca.components {
                let mut first = true;
                for v in row {
                    if !first {
                        out.push(' ');
                    }
                    first = false;
                    out.push_str(&float(*v));
                }
                out.push('\n');
            }
        }
        SavedModel::Reduction(ReductionModel::Autoencoder(ae)) => {
            writeln!(out, "{MAGIC} {VERSION} {}", ae.arch.tag()).unwrap();
            writeln!(out, "seed {}", ae.seed).unwrap();
            write!(out, "dims {}", ae.dims.len()).unwrap();
            for d in &ae.dims {
                write!(out, " {d}").unwrap();
            }
            out.push('\n');
            write_network(&mut out, &ae.net);
        }
        SavedModel::Classifier(tm) => {
            writeln!(out, "{MAGIC} {VERSION} {}", tm.kind.tag()).unwrap();
            writeln!(out, "feature_width {}", tm.feature_width).unwrap();
            writeln!(out, "seed {}", tm.seed).unwrap();
            match &tm.params {
                ModelParams::Tree(t) => write_tree(&mut out, t),
                ModelParams::Forest(f) => {
                    match f.oob_score {
                        Some(v) => writeln!(out, "oob {}", float(v)).unwrap(),
                        None => writeln!(out, "oob none").unwrap(),
                    }
                    write_floats(&mut out, "importance", &f.importance);
                    writeln!(out, "trees {}", f.trees.len()).unwrap();
                    for t in &f.trees {
                        write_tree(&mut out, t);
                    }
                }
                ModelParams::Knn(k) => {
                    writeln!(out, "k {}", k.k).unwrap();
                    write!(out, "labels {}", k.labels.len()).unwrap();
                    for y in &k.labels {
                        write!(out, " {y}").unwrap();
                    }
                    out.push('\n');
                    write_floats(&mut out, "values", &k.values);
                }
                ModelParams::Svm(s) => {
                    writeln!(out, "bias {}", float(s.bias)).unwrap();
                    write_floats(&mut out, "weights", &s.weights);
                }
                ModelParams::AdaBoost(a) => {
                    writeln!(out, "learning_rate {}", float(a.learning_rate)).unwrap();
                    writeln!(out, "stumps {}", a.stumps.len()).unwrap();
                    for s in &a.stumps {
                        write_tree(&mut out, s);
                    }
                }
                ModelParams::Dnn(d) => write_network(&mut out, &d.net),
            }
        }
    }
    Ok(out)
}

fn write_floats(out: &mut String, keyword: &str, values: &[f64]) {
    write!(out, "{keyword} {}", values.len()).unwrap();
    for v in values {
        out.push(' ');
        out.push_str(&float(*v));
    }
    out.push('\n');
}

fn write_tree(out: &mut String, tree: &DecisionTree) {
    writeln!(out, "tree {} {}", tree.nodes.len(), tree.n_features).unwrap();
    for node in &tree.nodes {
        match node {
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => writeln!(out, "split {feature} {} {left} {right}", float(*threshold)).unwrap(),
            Node::Leaf { score } => writeln!(out, "leaf {}", float(*score)).unwrap(),
        }
    }
}

fn write_network(out: &mut String, net: &Network) {
    writeln!(
        out,
        "network {} dropout_rate {}",
        net.layers.len(),
        float(net.dropout_rate)
    )
    .unwrap();
    for (i, layer) in net.layers.iter().enumerate() {
        let act = match net.activations[i] {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
        };
        let dropped = u8::from(net.dropout_after[i]);
        writeln!(out, "layer {} {} {act} {dropped}", layer.n_in, layer.n_out).unwrap();
        write_floats(out, "weights", &layer.w);
        write_floats(out, "biases", &layer.b);
    }
}

/// Pull-based token stream over the model text.
struct TokenReader<'a> {
    tokens: std::str::SplitWhitespace<'a>,
}

impl<'a> TokenReader<'a> {
    fn new(text: &'a str) -> Self {
        TokenReader {
            tokens: text.split_whitespace(),
        }
    }

    fn next(&mut self) -> Result<&'a str> {
        self.tokens
            .next()
            .ok_or_else(|| err("unexpected end of model data"))
    }

    fn expect(&mut self, keyword: &str) -> Result<()> {
        let token = self.next()?;
        if token == keyword {
            Ok(())
        } else {
            Err(err(format!("expected '{keyword}', found '{token}'")))
        }
    }

    fn parse<T: FromStr>(&mut self, what: &str) -> Result<T> {
        let token = self.next()?;
        token
            .parse()
            .map_err(|_| err(format!("invalid {what}: '{token}'")))
    }

    /// Length-prefixed float array introduced by `keyword`.
    fn floats(&mut self, keyword: &str) -> Result<Vec<f64>> {
        self.expect(keyword)?;
        let n: usize = self.parse("array length")?;
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(self.parse::<f64>("float")?);
        }
        Ok(values)
    }

    fn finish(mut self) -> Result<()> {
        match self.tokens.next() {
            None => Ok(()),
            Some(token) => Err(err(format!("trailing data after model: '{token}'"))),
        }
    }
}

/// Parses a model in the text container format.
pub fn load_model(text: &str) -> Result<SavedModel> {
    let mut r = TokenReader::new(text);
    r.expect(MAGIC)
        .map_err(|_| err("not a permforge model file"))?;
    let version = r.next()?;
    if version != VERSION {
        return Err(err(format!("unsupported model version '{version}'")));
    }
    let kind = r.next()?;
    let model = match kind {
        "vt" => read_vt(&mut r)?,
        "pca" => read_pca(&mut r)?,
        "ae1l" => read_autoencoder(&mut r, AeArch::Ae1L)?,
        "ae3l" => read_autoencoder(&mut r, AeArch::Ae3L)?,
        "dt" | "rf" | "knn" | "svm" | "adaboost" | "dnn2l" | "dnn4l" | "dnn7l" => {
            read_classifier(&mut r, kind)?
        }
        other => return Err(err(format!("unknown model kind '{other}'"))),
    };
    r.finish()?;
    Ok(model)
}

fn read_vt(r: &mut TokenReader) -> Result<SavedModel> {
    use crate::features::VarianceThresholdModel;
    r.expect("threshold")?;
    let threshold: f64 = r.parse("threshold")?;
    let variances = r.floats("variances")?;
    r.expect("selected")?;
    let n: usize = r.parse("selection length")?;
    let mut selected = Vec::with_capacity(n);
    for _ in 0..n {
        let i: usize = r.parse("column index")?;
        if i >= variances.len() {
            return Err(err(format!("selected column {i} out of range")));
        }
        selected.push(i);
    }
    r.expect("names")?;
    let n_names: usize = r.parse("name count")?;
    if n_names != n {
        return Err(err("selected/name counts disagree"));
    }
    let mut selected_names = Vec::with_capacity(n_names);
    for _ in 0..n_names {
        selected_names.push(r.next()?.to_string());
    }
    Ok(SavedModel::Reduction(ReductionModel::VarianceThreshold(
        VarianceThresholdModel {
            threshold,
            variances,
            selected,
            selected_names,
        },
    )))
}

fn read_pca(r: &mut TokenReader) -> Result<SavedModel> {
    use crate::features::PcaModel;
    let mean = r.floats("mean")?;
    let explained_variance = r.floats("explained_variance")?;
    r.expect("components")?;
    let k: usize = r.parse("component count")?;
    let d: usize = r.parse("component width")?;
    if d != mean.len() || k != explained_variance.len() {
        return Err(err("pca dimensions disagree"));
    }
    let mut components = Vec::with_capacity(k);
    for _ in 0..k {
        let mut row = Vec::with_capacity(d);
        for _ in 0..d {
            row.push(r.parse::<f64>("component entry")?);
        }
        components.push(row);
    }
    Ok(SavedModel::Reduction(ReductionModel::Pca(PcaModel {
        mean,
        components,
        explained_variance,
    })))
}

fn read_autoencoder(r: &mut TokenReader, arch: AeArch) -> Result<SavedModel> {
    r.expect("seed")?;
    let seed: u64 = r.parse("seed")?;
    r.expect("dims")?;
    let n: usize = r.parse("dims length")?;
    let mut dims = Vec::with_capacity(n);
    for _ in 0..n {
        dims.push(r.parse::<usize>("dimension")?);
    }
    let net = read_network(r)?;
    let layer_dims: Vec<usize> = std::iter::once(net.layers[0].n_in)
        .chain(net.layers.iter().map(|l| l.n_out))
        .collect();
    if layer_dims != dims {
        return Err(err("autoencoder dims disagree with its network"));
    }
    Ok(SavedModel::Reduction(ReductionModel::Autoencoder(
        AutoencoderModel {
            arch,
            dims,
            net,
            train_loss: Vec::new(),
            val_loss: Vec::new(),
            seed,
        },
    )))
}

fn read_classifier(r: &mut TokenReader, tag: &str) -> Result<SavedModel> {
    r.expect("feature_width")?;
    let feature_width: usize = r.parse("feature width")?;
    r.expect("seed")?;
    let seed: u64 = r.parse("seed")?;
    let (kind, params) = match tag {
        "dt" => {
            let tree = read_tree(r)?;
            (ClassifierKind::DecisionTree, ModelParams::Tree(tree))
        }
        "rf" => {
            r.expect("oob")?;
            let token = r.next()?;
            let oob_score = if token == "none" {
                None
            } else {
                Some(
                    token
                        .parse::<f64>()
                        .map_err(|_| err(format!("invalid oob score: '{token}'")))?,
                )
            };
            let importance = r.floats("importance")?;
            r.expect("trees")?;
            let n: usize = r.parse("tree count")?;
            if n == 0 {
                return Err(err("forest needs at least one tree"));
            }
            let mut trees = Vec::with_capacity(n);
            for _ in 0..n {
                trees.push(read_tree(r)?);
            }
            (
                ClassifierKind::RandomForest,
                ModelParams::Forest(ForestModel {
                    trees,
                    oob_score,
                    importance,
                }),
            )
        }
        "knn" => {
            r.expect("k")?;
            let k: usize = r.parse("k")?;
            r.expect("labels")?;
            let n: usize = r.parse("label count")?;
            let mut labels = Vec::with_capacity(n);
            for _ in 0..n {
                let y: u8 = r.parse("label")?;
                if y > 1 {
                    return Err(err(format!("label {y} is not binary")));
                }
                labels.push(y);
            }
            let values = r.floats("values")?;
            if values.len() != n * feature_width {
                return Err(err("knn value count disagrees with rows × width"));
            }
            (
                ClassifierKind::Knn,
                ModelParams::Knn(KnnModel {
                    k,
                    values,
                    n_cols: feature_width,
                    labels,
                }),
            )
        }
        "svm" => {
            r.expect("bias")?;
            let bias: f64 = r.parse("bias")?;
            let weights = r.floats("weights")?;
            (
                ClassifierKind::LinearSvm,
                ModelParams::Svm(SvmModel {
                    weights,
                    bias,
                    objective_history: Vec::new(),
                }),
            )
        }
        "adaboost" => {
            r.expect("learning_rate")?;
            let learning_rate: f64 = r.parse("learning rate")?;
            r.expect("stumps")?;
            let n: usize = r.parse("stump count")?;
            let mut stumps = Vec::with_capacity(n);
            for _ in 0..n {
                stumps.push(read_tree(r)?);
            }
            (
                ClassifierKind::AdaBoost,
                ModelParams::AdaBoost(AdaBoostModel {
                    stumps,
                    learning_rate,
                    stump_errors: Vec::new(),
                    weight_sum_history: Vec::new(),
                }),
            )
        }
        "dnn2l" | "dnn4l" | "dnn7l" => {
            let arch = match tag {
                "dnn2l" => DnnArch::Dnn2L,
                "dnn4l" => DnnArch::Dnn4L,
                _ => DnnArch::Dnn7L,
            };
            let kind = match arch {
                DnnArch::Dnn2L => ClassifierKind::Dnn2L,
                DnnArch::Dnn4L => ClassifierKind::Dnn4L,
                DnnArch::Dnn7L => ClassifierKind::Dnn7L,
            };
            let net = read_network(r)?;
            (
                kind,
                ModelParams::Dnn(DnnModel {
                    arch,
                    net,
                    loss_history: Vec::new(),
                }),
            )
        }
        _ => unreachable!("caller dispatches only known classifier tags"),
    };
    Ok(SavedModel::Classifier(TrainedModel {
        kind,
        feature_width,
        seed,
        params,
    }))
}

fn read_tree(r: &mut TokenReader) -> Result<DecisionTree> {
    r.expect("tree")?;
    let n_nodes: usize = r.parse("node count")?;
    let n_features: usize = r.parse("feature count")?;
    if n_nodes == 0 {
        return Err(err("tree needs at least one node"));
    }
    let mut nodes = Vec::with_capacity(n_nodes);
    for id in 0..n_nodes {
        match r.next()? {
            "split" => {
                let feature: usize = r.parse("split feature")?;
                let threshold: f64 = r.parse("split threshold")?;
                let left: usize = r.parse("left child")?;
                let right: usize = r.parse("right child")?;
                if feature >= n_features {
                    return Err(err(format!("split feature {feature} out of range")));
                }
                // Children must point forward in the arena, which rules
                // out cycles and guarantees prediction terminates.
                if left <= id || right <= id || left >= n_nodes || right >= n_nodes {
                    return Err(err(format!("node {id} has invalid children")));
                }
                nodes.push(Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                });
            }
            "leaf" => {
                let score: f64 = r.parse("leaf score")?;
                nodes.push(Node::Leaf { score });
            }
            other => return Err(err(format!("unknown node kind '{other}'"))),
        }
    }
    Ok(DecisionTree { nodes, n_features })
}

fn read_network(r: &mut TokenReader) -> Result<Network> {
    r.expect("network")?;
    let n_layers: usize = r.parse("layer count")?;
    if n_layers == 0 {
        return Err(err("network needs at least one layer"));
    }
    r.expect("dropout_rate")?;
    let dropout_rate: f64 = r.parse("dropout rate")?;
    let mut layers = Vec::with_capacity(n_layers);
    let mut activations = Vec::with_capacity(n_layers);
    let mut dropout_after = Vec::with_capacity(n_layers);
    for i in 0..n_layers {
        r.expect("layer")?;
        let n_in: usize = r.parse("layer input width")?;
        let n_out: usize = r.parse("layer output width")?;
        if n_in == 0 || n_out == 0 {
            return Err(err("layer widths must be positive"));
        }
        if layers.last().is_some_and(|prev: &Dense| prev.n_out != n_in) {
            return Err(err(format!("layer {i} width breaks the chain")));
        }
        activations.push(match r.next()? {
            "relu" => Activation::Relu,
            "sigmoid" => Activation::Sigmoid,
            other => return Err(err(format!("unknown activation '{other}'"))),
        });
        dropout_after.push(match r.next()? {
            "0" => false,
            "1" => true,
            other => return Err(err(format!("invalid dropout flag '{other}'"))),
        });
        let w = r.floats("weights")?;
        if w.len() != n_in * n_out {
            return Err(err(format!("layer {i} weight count disagrees")));
        }
        let b = r.floats("biases")?;
        if b.len() != n_out {
            return Err(err(format!("layer {i} bias count disagrees")));
        }
        layers.push(Dense { n_in, n_out, w, b });
    }
    Ok(Network {
        layers,
        activations,
        dropout_after,
        dropout_rate,
    })
}

/// Saves a model to a file.
pub fn save_model_path(model: &SavedModel, path: impl AsRef<Path>) -> Result<()> {
    let text = save_model(model)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Loads a model from a file.
pub fn load_model_path(path: impl AsRef<Path>) -> Result<SavedModel> {
    let text = std::fs::read_to_string(path)?;
    load_model(&text)
}
