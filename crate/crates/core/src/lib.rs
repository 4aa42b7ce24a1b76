//! Origin-destination (OD) travel demand prediction that combines decision-tree
//! rule features with a feed-forward neural network regressor.
//!
//! The pipeline has five stages, each usable on its own:
//!
//! 1. [`data`] — load OD flow tables from CSV, impute missing values with
//!    column medians, z-score numeric columns, and drop multicollinear
//!    features via an iterative VIF filter.
//! 2. [`tree`] — fit CART-style regression trees of bounded depth.
//! 3. [`rules`] — turn every root-to-leaf path into an if-then rule over
//!    per-feature intervals, encode rules as 0/1 indicator columns, and
//!    filter rules by indicator variance.
//! 4. [`nn`] — train a small multilayer perceptron with minibatch Adam and
//!    from-scratch backpropagation on base features, rule indicators, or both.
//! 5. [`metrics`] — evaluate predictions with MAE, R², and CPC
//!    (Sørensen-Dice overlap of flows), optionally normalized per rule.
//!
//! [`experiment`] drives the full matrix of dataset variants (base features,
//! rules only, combined, and variance-filtered combinations across tree
//! depths) and writes CSV/SVG reports. [`synth`] generates a synthetic OD
//! dataset with a known piecewise ground truth for demos and benchmarks.

pub mod data;
pub mod experiment;
pub mod metrics;
pub mod nn;
pub mod rules;
pub mod synth;
pub mod tree;
