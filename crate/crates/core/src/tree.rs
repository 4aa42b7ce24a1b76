//! CART-style regression trees with axis-aligned threshold splits.
//!
//! Fitting greedily picks, at each node, the (feature, threshold) pair that
//! maximizes the reduction in the sum of squared deviations of the target.
//! Candidate thresholds are midpoints between consecutive distinct sorted
//! values; rows with `feature <= threshold` go left, `> threshold` go right.
//! Fitting is exhaustive and fully deterministic.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("cannot fit a tree on an empty training set")]
    EmptyTrainingSet,
    #[error("max_depth must be at least 1, got {0}")]
    BadMaxDepth(usize),
    #[error("max_depth must be at most {max}, got {got}")]
    DepthTooLarge { got: usize, max: usize },
    #[error("min_leaf must be at least 1")]
    BadMinLeaf,
    #[error("training set has {rows} rows but needs at least 2 * min_leaf = {need}")]
    TooFewRows { rows: usize, need: usize },
    #[error("row has {got} features, tree was fit on {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("feature `{0}` in tree document not found among feature names")]
    UnknownFeature(String),
    #[error("non-finite feature value in training data: {0}")]
    NonFiniteData(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid tree document: {0}")]
    BadDocument(String),
}

/// Hard ceiling on tree depth.
pub const MAX_DEPTH_LIMIT: usize = 32;

/// A node of a fitted regression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Internal {
        feature_index: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        /// Arithmetic mean of the targets routed to this leaf.
        mean: f64,
        n_samples: usize,
        /// Sum of squared deviations of those targets around the mean.
        sum_sq_dev: f64,
    },
}

/// The direction of one path condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitOp {
    /// Feature value `<=` threshold (left branch).
    Le,
    /// Feature value `>` threshold (right branch).
    Gt,
}

/// One comparison on a root-to-leaf path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathStep {
    pub feature_index: usize,
    pub op: SplitOp,
    pub threshold: f64,
}

/// A leaf together with the full path of conditions that reaches it.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafDescriptor {
    pub mean: f64,
    pub n_samples: usize,
    pub path: Vec<PathStep>,
}

/// A fitted regression tree plus the metadata needed to interpret it.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    root: TreeNode,
    max_depth: usize,
    min_leaf: usize,
    feature_names: Vec<String>,
    n_leaves: usize,
}

impl RegressionTree {
    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn min_leaf(&self) -> usize {
        self.min_leaf
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    /// Routes a row to its leaf and returns the leaf mean.
    pub fn predict(&self, row: &[f64]) -> Result<f64, TreeError> {
        if row.len() != self.feature_names.len() {
            return Err(TreeError::DimensionMismatch {
                got: row.len(),
                expected: self.feature_names.len(),
            });
        }
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { mean, .. } => return Ok(*mean),
                TreeNode::Internal { feature_index, threshold, left, right } => {
                    node = if row[*feature_index] <= *threshold { left } else { right };
                }
            }
        }
    }

    /// Depth-first left-to-right leaf enumeration, each with its root-to-leaf
    /// path of conditions.
    pub fn leaves(&self) -> Vec<LeafDescriptor> {
        let mut out = Vec::with_capacity(self.n_leaves);
        let mut path = Vec::new();
        collect_leaves(&self.root, &mut path, &mut out);
        out
    }

    /// Serializes the tree to a nested JSON document with feature names at
    /// the split nodes. [`load_tree`] reverses this exactly.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TreeError> {
        let path = path.as_ref();
        let doc = TreeDoc::from_tree(self);
        let json = serde_json::to_string_pretty(&doc)
            .map_err(|e| TreeError::BadDocument(e.to_string()))?;
        std::fs::write(path, json)
            .map_err(|source| TreeError::Io { path: path.display().to_string(), source })
    }
}

fn collect_leaves(node: &TreeNode, path: &mut Vec<PathStep>, out: &mut Vec<LeafDescriptor>) {
    match node {
        TreeNode::Leaf { mean, n_samples, .. } => out.push(LeafDescriptor {
            mean: *mean,
            n_samples: *n_samples,
            path: path.clone(),
        }),
        TreeNode::Internal { feature_index, threshold, left, right } => {
            path.push(PathStep { feature_index: *feature_index, op: SplitOp::Le, threshold: *threshold });
            collect_leaves(left, path, out);
            path.pop();
            path.push(PathStep { feature_index: *feature_index, op: SplitOp::Gt, threshold: *threshold });
            collect_leaves(right, path, out);
            path.pop();
        }
    }
}

/// Running sums for a set of target values; SSE is derived as
/// `sum_sq - sum^2 / n`, clamped at zero against rounding.
#[derive(Clone, Copy, Default)]
struct TargetStats {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl TargetStats {
    fn add(&mut self, y: f64) {
        self.n += 1;
        self.sum += y;
        self.sum_sq += y * y;
    }

    fn sse(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        (self.sum_sq - self.sum * self.sum / self.n as f64).max(0.0)
    }

    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }
}

struct BestSplit {
    feature_index: usize,
    threshold: f64,
    reduction: f64,
}

/// Fits a regression tree of depth at most `max_depth` with every leaf
/// holding at least `min_leaf` training rows.
///
/// Splitting stops at the depth cap, when a node has fewer than
/// `2 * min_leaf` rows, when the node target is constant, or when no split
/// yields a positive SSE reduction. Ties break toward the lowest feature
/// index and then the smallest threshold.
pub fn fit_tree(
    train: &Dataset,
    max_depth: usize,
    min_leaf: usize,
) -> Result<RegressionTree, TreeError> {
    if train.n_rows() == 0 {
        return Err(TreeError::EmptyTrainingSet);
    }
    if max_depth < 1 {
        return Err(TreeError::BadMaxDepth(max_depth));
    }
    if max_depth > MAX_DEPTH_LIMIT {
        return Err(TreeError::DepthTooLarge { got: max_depth, max: MAX_DEPTH_LIMIT });
    }
    if min_leaf < 1 {
        return Err(TreeError::BadMinLeaf);
    }
    if train.n_rows() < 2 * min_leaf {
        return Err(TreeError::TooFewRows { rows: train.n_rows(), need: 2 * min_leaf });
    }
    train
        .require_complete()
        .map_err(|e| TreeError::NonFiniteData(e.to_string()))?;

    let rows: Vec<usize> = (0..train.n_rows()).collect();
    let root = build_node(train, &rows, 0, max_depth, min_leaf);
    let n_leaves = count_leaves(&root);
    Ok(RegressionTree {
        root,
        max_depth,
        min_leaf,
        feature_names: train.feature_names().to_vec(),
        n_leaves,
    })
}

fn count_leaves(node: &TreeNode) -> usize {
    match node {
        TreeNode::Leaf { .. } => 1,
        TreeNode::Internal { left, right, .. } => count_leaves(left) + count_leaves(right),
    }
}

fn build_node(
    train: &Dataset,
    rows: &[usize],
    depth: usize,
    max_depth: usize,
    min_leaf: usize,
) -> TreeNode {
    let mut stats = TargetStats::default();
    for &i in rows {
        stats.add(train.target()[i]);
    }
    let make_leaf = || TreeNode::Leaf {
        mean: stats.mean(),
        n_samples: stats.n,
        sum_sq_dev: stats.sse(),
    };

    if depth >= max_depth || rows.len() < 2 * min_leaf {
        return make_leaf();
    }
    let first = train.target()[rows[0]];
    if rows.iter().all(|&i| train.target()[i] == first) {
        return make_leaf();
    }

    let best = find_best_split(train, rows, stats, min_leaf);
    let Some(best) = best else {
        return make_leaf();
    };

    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&i| train.row(i)[best.feature_index] <= best.threshold);
    let left = build_node(train, &left_rows, depth + 1, max_depth, min_leaf);
    let right = build_node(train, &right_rows, depth + 1, max_depth, min_leaf);
    TreeNode::Internal {
        feature_index: best.feature_index,
        threshold: best.threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

/// Exhaustive scan over every feature and every midpoint threshold between
/// consecutive distinct sorted values, returning the split with the largest
/// positive SSE reduction (first-found wins ties, which realizes the lowest
/// feature index / smallest threshold tie-break).
fn find_best_split(
    train: &Dataset,
    rows: &[usize],
    parent: TargetStats,
    min_leaf: usize,
) -> Option<BestSplit> {
    let parent_sse = parent.sse();
    let mut best: Option<BestSplit> = None;
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(rows.len());
    for feature_index in 0..train.n_cols() {
        pairs.clear();
        pairs.extend(rows.iter().map(|&i| (train.row(i)[feature_index], train.target()[i])));
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        let mut left = TargetStats::default();
        let mut right = parent;
        for k in 0..pairs.len() - 1 {
            let (value, y) = pairs[k];
            left.add(y);
            right.n -= 1;
            right.sum -= y;
            right.sum_sq -= y * y;
            let next_value = pairs[k + 1].0;
            if value == next_value {
                continue;
            }
            if left.n < min_leaf || right.n < min_leaf {
                continue;
            }
            let reduction = parent_sse - left.sse() - right.sse();
            let improves = match &best {
                None => reduction > 0.0,
                Some(b) => reduction > b.reduction,
            };
            if improves {
                best = Some(BestSplit {
                    feature_index,
                    threshold: value + (next_value - value) / 2.0,
                    reduction,
                });
            }
        }
    }
    best
}

// --- serialization -----------------------------------------------------------

/// On-disk form of a node: split nodes carry the feature *name* so the
/// document is self-describing.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum NodeDoc {
    Split {
        feature: String,
        threshold: f64,
        left: Box<NodeDoc>,
        right: Box<NodeDoc>,
    },
    Leaf {
        mean: f64,
        n_samples: usize,
        sum_sq_dev: f64,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct TreeDoc {
    max_depth: usize,
    min_leaf: usize,
    feature_names: Vec<String>,
    root: NodeDoc,
}

impl TreeDoc {
    fn from_tree(tree: &RegressionTree) -> Self {
        fn encode(node: &TreeNode, names: &[String]) -> NodeDoc {
            match node {
                TreeNode::Leaf { mean, n_samples, sum_sq_dev } => NodeDoc::Leaf {
                    mean: *mean,
                    n_samples: *n_samples,
                    sum_sq_dev: *sum_sq_dev,
                },
                TreeNode::Internal { feature_index, threshold, left, right } => NodeDoc::Split {
                    feature: names[*feature_index].clone(),
                    threshold: *threshold,
                    left: Box::new(encode(left, names)),
                    right: Box::new(encode(right, names)),
                },
            }
        }
        TreeDoc {
            max_depth: tree.max_depth,
            min_leaf: tree.min_leaf,
            feature_names: tree.feature_names.clone(),
            root: encode(&tree.root, &tree.feature_names),
        }
    }

    fn into_tree(self) -> Result<RegressionTree, TreeError> {
        fn decode(doc: NodeDoc, names: &[String]) -> Result<TreeNode, TreeError> {
            match doc {
                NodeDoc::Leaf { mean, n_samples, sum_sq_dev } => {
                    Ok(TreeNode::Leaf { mean, n_samples, sum_sq_dev })
                }
                NodeDoc::Split { feature, threshold, left, right } => {
                    let feature_index = names
                        .iter()
                        .position(|n| *n == feature)
                        .ok_or_else(|| TreeError::UnknownFeature(feature.clone()))?;
                    Ok(TreeNode::Internal {
                        feature_index,
                        threshold,
                        left: Box::new(decode(*left, names)?),
                        right: Box::new(decode(*right, names)?),
                    })
                }
            }
        }
        let root = decode(self.root, &self.feature_names)?;
        let n_leaves = count_leaves(&root);
        Ok(RegressionTree {
            root,
            max_depth: self.max_depth,
            min_leaf: self.min_leaf,
            feature_names: self.feature_names,
            n_leaves,
        })
    }
}

/// Reloads a tree saved with [`RegressionTree::save`].
pub fn load_tree(path: impl AsRef<Path>) -> Result<RegressionTree, TreeError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| TreeError::Io { path: path.display().to_string(), source })?;
    let doc: TreeDoc =
        serde_json::from_str(&text).map_err(|e| TreeError::BadDocument(e.to_string()))?;
    doc.into_tree()
}
