//! CART decision trees with Gini impurity.
//!
//! One grower serves three callers: full decision trees, the random
//! forest's per-tree fits (feature subsampling at every node), and
//! AdaBoost's depth-1 stumps (sample weights). Candidate thresholds are
//! midpoints between consecutive distinct sorted values — for binary
//! permission data that collapses to the single threshold 0.5. Ties
//! between equally good splits resolve to the lowest feature index, then
//! the lowest threshold, making growth deterministic.

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;

use crate::dataset::FeatureMatrix;

/// Minimum Gini decrease for a split to count as an improvement at all.
const MIN_DECREASE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        /// Child for rows with value ≤ threshold.
        left: usize,
        right: usize,
    },
    Leaf {
        /// Weighted fraction of malware (label 1) training rows.
        score: f64,
    },
}

/// A grown tree; `nodes[0]` is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    pub n_features: usize,
}

impl DecisionTree {
    pub fn score_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { score } => return *score,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone)]
pub struct TreeParams {
    /// Minimum unweighted sample count in each child.
    pub min_samples_leaf: usize,
    /// None = grow until pure or too small.
    pub max_depth: Option<usize>,
    /// Features considered per node: None = all, Some(m) = m sampled
    /// without replacement (requires an RNG).
    pub mtry: Option<usize>,
}

/// Everything a growth run needs, bundled to keep recursion signatures
/// readable.
struct Grower<'a> {
    m: &'a FeatureMatrix,
    weights: &'a [f64],
    params: &'a TreeParams,
    rng: Option<&'a mut ChaCha8Rng>,
    /// Per-feature accumulated weighted Gini decrease, if requested.
    importance: Option<&'a mut Vec<f64>>,
    total_weight: f64,
    nodes: Vec<Node>,
}

/// Grows a tree on the rows `indices` of `m` (duplicates allowed —
/// bootstrap samples pass them directly). `weights` are per-row of `m`;
/// uniform weights give plain CART. When `importance` is given it must be
/// feature-width and receives each split's weighted impurity decrease.
pub fn grow_tree(
    m: &FeatureMatrix,
    indices: &[usize],
    weights: &[f64],
    params: &TreeParams,
    rng: Option<&mut ChaCha8Rng>,
    importance: Option<&mut Vec<f64>>,
) -> DecisionTree {
    assert_eq!(weights.len(), m.n_rows());
    assert!(!indices.is_empty());
    assert!(params.min_samples_leaf >= 1);
    let total_weight = indices.iter().map(|&i| weights[i]).sum();
    let mut grower = Grower {
        m,
        weights,
        params,
        rng,
        importance,
        total_weight,
        nodes: Vec::new(),
    };
    let mut indices = indices.to_vec();
    grower.grow(&mut indices, 0);
    DecisionTree {
        nodes: grower.nodes,
        n_features: m.n_cols(),
    }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    decrease: f64,
    /// Node's indices sorted by the feature, and how many go left.
    sorted: Vec<usize>,
    n_left: usize,
}

impl Grower<'_> {
    fn grow(&mut self, indices: &mut [usize], depth: usize) -> usize {
        let (w1, w) = self.label_weight(indices);
        let score = w1 / w;

        let splittable = indices.len() >= 2 * self.params.min_samples_leaf
            && score != 0.0
            && score != 1.0
            && self.params.max_depth.map_or(true, |d| depth < d);
        let best = if splittable {
            self.find_split(indices)
        } else {
            None
        };

        let Some(best) = best else {
            self.nodes.push(Node::Leaf { score });
            return self.nodes.len() - 1;
        };

        if let Some(imp) = self.importance.as_deref_mut() {
            imp[best.feature] += best.decrease * (w / self.total_weight);
        }
        let id = self.nodes.len();
        // Placeholder; patched after both children exist.
        self.nodes.push(Node::Leaf { score });
        let mut sorted = best.sorted;
        let (left_rows, right_rows) = sorted.split_at_mut(best.n_left);
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    /// (weighted label-1 mass, total weight) over the rows.
    fn label_weight(&self, indices: &[usize]) -> (f64, f64) {
        let mut w1 = 0.0;
        let mut w = 0.0;
        for &i in indices {
            w += self.weights[i];
            if self.m.labels()[i] == 1 {
                w1 += self.weights[i];
            }
        }
        (w1, w)
    }

    /// Exhaustive best-split search over candidate features.
    fn find_split(&mut self, indices: &[usize]) -> Option<BestSplit> {
        let d = self.m.n_cols();
        let candidates: Vec<usize> = match (self.params.mtry, self.rng.as_deref_mut()) {
            (Some(mtry), Some(rng)) if mtry < d => {
                let mut picked = sample(rng, d, mtry).into_vec();
                picked.sort_unstable();
                picked
            }
            _ => (0..d).collect(),
        };

        let (w1_total, w_total) = self.label_weight(indices);
        let parent_gini = gini(w1_total, w_total);
        let min_leaf = self.params.min_samples_leaf;

        let mut best: Option<BestSplit> = None;
        let mut sorted = indices.to_vec();
        for &feature in &candidates {
            sorted.sort_by(|&a, &b| self.m.get(a, feature).total_cmp(&self.m.get(b, feature)));
            // Walk boundaries between distinct values, tracking the left
            // side's weighted label mass.
            let mut w1_left = 0.0;
            let mut w_left = 0.0;
            for t in 1..sorted.len() {
                let prev = sorted[t - 1];
                w_left += self.weights[prev];
                if self.m.labels()[prev] == 1 {
                    w1_left += self.weights[prev];
                }
                let lo = self.m.get(prev, feature);
                let hi = self.m.get(sorted[t], feature);
                if lo == hi {
                    continue; // not a value boundary
                }
                if t < min_leaf || sorted.len() - t < min_leaf {
                    continue;
                }
                let w_right = w_total - w_left;
                let decrease = parent_gini
                    - (w_left / w_total) * gini(w1_left, w_left)
                    - (w_right / w_total) * gini(w1_total - w1_left, w_right);
                if decrease <= MIN_DECREASE {
                    continue;
                }
                // Strictly-better-only replacement keeps the first
                // (lowest feature, lowest threshold) of any tie.
                if best.as_ref().map_or(true, |b| decrease > b.decrease) {
                    best = Some(BestSplit {
                        feature,
                        threshold: lo + (hi - lo) / 2.0,
                        decrease,
                        sorted: sorted.clone(),
                        n_left: t,
                    });
                }
            }
        }
        best
    }
}

fn gini(w1: f64, w: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let p1 = w1 / w;
    let p0 = 1.0 - p1;
    1.0 - p0 * p0 - p1 * p1
}
