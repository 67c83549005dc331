//! Random forest of CART trees.
//!
//! Each tree trains on a bootstrap sample (n draws with replacement) and
//! considers only ⌊√D⌋ features at every split node. Tree `t` derives its
//! RNG from `seed + t`, so trees are independent of each other and of the
//! forest size: growing a bigger forest never changes the earlier trees.
//! Out-of-bag rows double as a free validation set, and split-quality
//! bookkeeping yields a normalized mean-decrease-in-Gini feature
//! importance.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classify::tree::{grow_tree, DecisionTree, TreeParams};
use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub min_samples_leaf: usize,
    /// None picks ⌊√D⌋ (at least 1) from the training width.
    pub features_per_split: Option<usize>,
    /// Compute the out-of-bag accuracy estimate while fitting.
    pub oob: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            min_samples_leaf: 5,
            features_per_split: None,
            oob: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    /// Accuracy of out-of-bag majority votes, when requested and defined.
    pub oob_score: Option<f64>,
    /// Mean decrease in Gini per feature, normalized to sum 1 (all zeros
    /// if no tree ever split).
    pub importance: Vec<f64>,
}

impl ForestModel {
    /// Mean of the per-tree leaf scores.
    pub fn score_row(&self, row: &[f64]) -> f64 {
        let total: f64 = self.trees.iter().map(|t| t.score_row(row)).sum();
        total / self.trees.len() as f64
    }
}

pub fn fit_forest(m: &FeatureMatrix, cfg: &ForestConfig, seed: u64) -> Result<ForestModel> {
    if cfg.n_trees == 0 || cfg.min_samples_leaf == 0 {
        return Err(Error::Argument(
            "forest needs n_trees >= 1 and min_samples_leaf >= 1".into(),
        ));
    }
    let n = m.n_rows();
    let d = m.n_cols();
    let mtry = match cfg.features_per_split {
        Some(0) => {
            return Err(Error::Argument("features_per_split must be >= 1".into()));
        }
        Some(k) => k.min(d),
        None => ((d as f64).sqrt().floor() as usize).max(1),
    };
    let params = TreeParams {
        min_samples_leaf: cfg.min_samples_leaf,
        max_depth: None,
        mtry: Some(mtry),
    };
    let weights = vec![1.0; n];

    let mut trees = Vec::with_capacity(cfg.n_trees);
    let mut importance = vec![0.0; d];
    // Per-row sums of out-of-bag tree scores and how many trees were OOB.
    let mut oob_sum = vec![0.0; n];
    let mut oob_count = vec![0usize; n];

    for t in 0..cfg.n_trees {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
        let mut in_bag = vec![false; n];
        let boot: Vec<usize> = (0..n)
            .map(|_| {
                let i = rng.random_range(0..n);
                in_bag[i] = true;
                i
            })
            .collect();
        let tree = grow_tree(
            m,
            &boot,
            &weights,
            &params,
            Some(&mut rng),
            Some(&mut importance),
        );
        if cfg.oob {
            for i in 0..n {
                if !in_bag[i] {
                    oob_sum[i] += tree.score_row(m.row(i));
                    oob_count[i] += 1;
                }
            }
        }
        trees.push(tree);
    }

    let total: f64 = importance.iter().sum();
    if total > 0.0 {
        for v in &mut importance {
            *v /= total;
        }
    }

    let oob_score = if cfg.oob {
        let mut seen = 0usize;
        let mut correct = 0usize;
        for i in 0..n {
            if oob_count[i] == 0 {
                continue; // row never left out of any bootstrap
            }
            seen += 1;
            let vote = u8::from(oob_sum[i] / oob_count[i] as f64 >= 0.5);
            if vote == m.labels()[i] {
                correct += 1;
            }
        }
        (seen > 0).then(|| correct as f64 / seen as f64)
    } else {
        None
    };

    Ok(ForestModel {
        trees,
        oob_score,
        importance,
    })
}
