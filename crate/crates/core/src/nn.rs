//! A small feed-forward regressor trained from scratch.
//!
//! Hidden layers use the rectifier, the output layer is affine with a single
//! unit. Gradients come from reverse-mode backpropagation over the
//! mean-squared-error objective and are cross-checked against central finite
//! differences in the tests. Optimization is minibatch Adam with bias
//! correction, an optional early stop on a validation holdout carved from
//! the training split, and optional target z-scoring whose inverse is
//! applied automatically at prediction time.
//!
//! Everything is deterministic given the seed: parameter init, the
//! validation carve, and the per-epoch batch shuffles all draw from
//! ChaCha streams.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("layer width must be at least 1")]
    ZeroWidthLayer,
    #[error("input has {got} features, model expects {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("batch is empty")]
    EmptyBatch,
    #[error("non-finite input at row {0}")]
    NonFiniteInput(usize),
    #[error("training diverged: non-finite loss at epoch {epoch}, batch {batch}")]
    Divergence { epoch: usize, batch: usize },
    #[error("epochs must be at least 1")]
    BadEpochs,
    #[error("batch_size must be at least 1")]
    BadBatchSize,
    #[error("learning_rate must be positive and finite, got {0}")]
    BadLearningRate(f64),
    #[error("moment decays must lie in (0, 1), got ({0}, {1})")]
    BadDecays(f64, f64),
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid model checkpoint: {0}")]
    BadCheckpoint(String),
}

/// z-score parameters applied to the target during training; predictions
/// are mapped back through `y = out * sd + mean`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetScaling {
    pub mean: f64,
    pub sd: f64,
}

/// Feed-forward network: rectifier hidden layers, affine scalar output.
///
/// `weights[l]` has shape `layer_dims[l + 1] x layer_dims[l]` stored
/// row-major; `biases[l]` has length `layer_dims[l + 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_dims: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    /// Present when the model was trained with target standardization.
    pub target_scaling: Option<TargetScaling>,
}

/// Training hyperparameters. `adaptive_moment_decays` are the first and
/// second moment decay rates of the Adam update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub adaptive_moment_decays: (f64, f64),
    /// Epochs without validation improvement before stopping; `None`
    /// disables the validation holdout entirely.
    pub early_stop_patience: Option<usize>,
    pub target_standardize: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 256,
            learning_rate: 1e-3,
            seed: 0,
            adaptive_moment_decays: (0.9, 0.999),
            early_stop_patience: Some(20),
            target_standardize: true,
        }
    }
}

/// Fraction of the training split held out for validation when early
/// stopping is enabled.
const VALIDATION_FRACTION: f64 = 0.1;

/// Numerical stabilizer in the Adam denominator.
const ADAM_EPSILON: f64 = 1e-8;

/// Per-epoch loss curves. Validation losses are present only when a
/// holdout was carved (early stopping enabled and enough rows).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainHistory {
    pub train_losses: Vec<f64>,
    pub val_losses: Vec<f64>,
}

impl MlpModel {
    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    /// Total number of trainable parameters.
    pub fn n_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// Single-row forward pass in model (possibly standardized) space.
    pub fn forward(&self, x: &[f64]) -> Result<f64, NnError> {
        if x.len() != self.input_dim() {
            return Err(NnError::DimensionMismatch { got: x.len(), expected: self.input_dim() });
        }
        let mut activation = x.to_vec();
        for l in 0..self.n_layers() {
            activation = self.layer_forward(l, &activation);
            if l + 1 < self.n_layers() {
                for v in &mut activation {
                    *v = v.max(0.0);
                }
            }
        }
        Ok(activation[0])
    }

    fn layer_forward(&self, l: usize, input: &[f64]) -> Vec<f64> {
        let n_in = self.layer_dims[l];
        let n_out = self.layer_dims[l + 1];
        let w = &self.weights[l];
        let mut out = self.biases[l].clone();
        for (o, out_v) in out.iter_mut().enumerate().take(n_out) {
            let row = &w[o * n_in..(o + 1) * n_in];
            *out_v += row.iter().zip(input).map(|(wi, xi)| wi * xi).sum::<f64>();
        }
        out
    }

    /// Forward over every dataset row, mapping outputs back through the
    /// stored target scaling when present.
    pub fn predict_batch(&self, ds: &Dataset) -> Result<Vec<f64>, NnError> {
        if ds.n_rows() > 0 && ds.n_cols() != self.input_dim() {
            return Err(NnError::DimensionMismatch {
                got: ds.n_cols(),
                expected: self.input_dim(),
            });
        }
        let mut out = Vec::with_capacity(ds.n_rows());
        for i in 0..ds.n_rows() {
            let raw = self.forward(ds.row(i))?;
            out.push(match self.target_scaling {
                Some(ts) => raw * ts.sd + ts.mean,
                None => raw,
            });
        }
        Ok(out)
    }

    /// Serializes the checkpoint as JSON; [`load_model`] reverses exactly.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), NnError> {
        let path = path.as_ref();
        let doc = CheckpointDoc {
            hidden_activation: "relu".into(),
            output_activation: "identity".into(),
            model: self.clone(),
        };
        let json = serde_json::to_string_pretty(&doc)
            .map_err(|e| NnError::BadCheckpoint(e.to_string()))?;
        std::fs::write(path, json)
            .map_err(|source| NnError::Io { path: path.display().to_string(), source })
    }
}

#[derive(Serialize, Deserialize)]
struct CheckpointDoc {
    hidden_activation: String,
    output_activation: String,
    model: MlpModel,
}

/// Reloads a checkpoint saved with [`MlpModel::save`].
pub fn load_model(path: impl AsRef<Path>) -> Result<MlpModel, NnError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| NnError::Io { path: path.display().to_string(), source })?;
    let doc: CheckpointDoc =
        serde_json::from_str(&text).map_err(|e| NnError::BadCheckpoint(e.to_string()))?;
    if doc.hidden_activation != "relu" || doc.output_activation != "identity" {
        return Err(NnError::BadCheckpoint(format!(
            "unsupported activations {} / {}",
            doc.hidden_activation, doc.output_activation
        )));
    }
    Ok(doc.model)
}

/// Initializes a network with hidden widths `hidden_dims` and a single
/// output unit. Weights draw from the scaled-uniform scheme
/// `U(-a, a), a = sqrt(6 / (fan_in + fan_out))`; biases start at zero.
pub fn init_mlp(input_dim: usize, hidden_dims: &[usize], seed: u64) -> Result<MlpModel, NnError> {
    if input_dim == 0 || hidden_dims.iter().any(|&h| h == 0) {
        return Err(NnError::ZeroWidthLayer);
    }
    let mut layer_dims = Vec::with_capacity(hidden_dims.len() + 2);
    layer_dims.push(input_dim);
    layer_dims.extend_from_slice(hidden_dims);
    layer_dims.push(1);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Vec::with_capacity(layer_dims.len() - 1);
    let mut biases = Vec::with_capacity(layer_dims.len() - 1);
    for l in 0..layer_dims.len() - 1 {
        let fan_in = layer_dims[l];
        let fan_out = layer_dims[l + 1];
        let scale = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let w: Vec<f64> = (0..fan_in * fan_out).map(|_| rng.random_range(-scale..scale)).collect();
        weights.push(w);
        biases.push(vec![0.0; fan_out]);
    }
    Ok(MlpModel { layer_dims, weights, biases, target_scaling: None })
}

/// Per-parameter gradients with the same shapes as the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// Mean-squared-error loss of a batch and its gradients by reverse-mode
/// backpropagation. Targets are taken as-is (standardization, when used,
/// happens in [`train`]).
pub fn loss_and_gradients(
    model: &MlpModel,
    rows: &[&[f64]],
    targets: &[f64],
) -> Result<(f64, Gradients), NnError> {
    if rows.is_empty() {
        return Err(NnError::EmptyBatch);
    }
    debug_assert_eq!(rows.len(), targets.len());
    for (i, row) in rows.iter().enumerate() {
        if row.len() != model.input_dim() {
            return Err(NnError::DimensionMismatch {
                got: row.len(),
                expected: model.input_dim(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) || !targets[i].is_finite() {
            return Err(NnError::NonFiniteInput(i));
        }
    }

    let n_layers = model.n_layers();
    let batch = rows.len() as f64;
    let mut grad_w: Vec<Vec<f64>> = model.weights.iter().map(|w| vec![0.0; w.len()]).collect();
    let mut grad_b: Vec<Vec<f64>> = model.biases.iter().map(|b| vec![0.0; b.len()]).collect();
    let mut loss = 0.0;

    for (row, &target) in rows.iter().zip(targets) {
        // Forward, keeping pre-activations and activations per layer.
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(n_layers + 1);
        activations.push(row.to_vec());
        let mut preacts: Vec<Vec<f64>> = Vec::with_capacity(n_layers);
        for l in 0..n_layers {
            let z = model.layer_forward(l, &activations[l]);
            let a = if l + 1 < n_layers {
                z.iter().map(|v| v.max(0.0)).collect()
            } else {
                z.clone()
            };
            preacts.push(z);
            activations.push(a);
        }
        let prediction = activations[n_layers][0];
        let err = prediction - target;
        loss += err * err;

        // Backward: dL/dz for the output unit of this sample.
        let mut delta = vec![2.0 * err / batch];
        for l in (0..n_layers).rev() {
            let n_in = model.layer_dims[l];
            let n_out = model.layer_dims[l + 1];
            let input = &activations[l];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                grad_b[l][o] += d;
                let g_row = &mut grad_w[l][o * n_in..(o + 1) * n_in];
                for (g, x) in g_row.iter_mut().zip(input) {
                    *g += d * x;
                }
            }
            if l == 0 {
                break;
            }
            // delta for the previous layer, through the rectifier gate.
            let mut prev = vec![0.0; n_in];
            let w = &model.weights[l];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let w_row = &w[o * n_in..(o + 1) * n_in];
                for (p, wi) in prev.iter_mut().zip(w_row) {
                    *p += d * wi;
                }
            }
            let z_prev = &preacts[l - 1];
            for (p, z) in prev.iter_mut().zip(z_prev) {
                if *z <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
    }

    loss /= batch;
    if !loss.is_finite() {
        return Err(NnError::Divergence { epoch: 0, batch: 0 });
    }
    Ok((loss, Gradients { weights: grad_w, biases: grad_b }))
}

/// Adam state for one parameter tensor group.
struct AdamState {
    m_w: Vec<Vec<f64>>,
    v_w: Vec<Vec<f64>>,
    m_b: Vec<Vec<f64>>,
    v_b: Vec<Vec<f64>>,
    step: u32,
}

impl AdamState {
    fn new(model: &MlpModel) -> Self {
        Self {
            m_w: model.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            v_w: model.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            m_b: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            v_b: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            step: 0,
        }
    }

    fn update(&mut self, model: &mut MlpModel, grads: &Gradients, lr: f64, b1: f64, b2: f64) {
        self.step += 1;
        let t = self.step as i32;
        let lr_t = lr * (1.0 - b2.powi(t)).sqrt() / (1.0 - b1.powi(t));
        for l in 0..model.weights.len() {
            adam_apply(&mut model.weights[l], &grads.weights[l], &mut self.m_w[l], &mut self.v_w[l], lr_t, b1, b2);
            adam_apply(&mut model.biases[l], &grads.biases[l], &mut self.m_b[l], &mut self.v_b[l], lr_t, b1, b2);
        }
    }
}

fn adam_apply(params: &mut [f64], grads: &[f64], m: &mut [f64], v: &mut [f64], lr_t: f64, b1: f64, b2: f64) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = b1 * m[i] + (1.0 - b1) * g;
        v[i] = b2 * v[i] + (1.0 - b2) * g * g;
        params[i] -= lr_t * m[i] / (v[i].sqrt() + ADAM_EPSILON);
    }
}

/// MSE over a set of rows in model space.
fn mse(model: &MlpModel, rows: &[&[f64]], targets: &[f64]) -> Result<f64, NnError> {
    let mut total = 0.0;
    for (row, &t) in rows.iter().zip(targets) {
        let p = model.forward(row)?;
        total += (p - t) * (p - t);
    }
    Ok(total / rows.len() as f64)
}

/// Trains a copy of `model` on `train` with minibatch Adam.
///
/// When `cfg.target_standardize` is set the targets are z-scored (population
/// convention) for the optimization and the returned model carries the
/// inverse transform, which [`MlpModel::predict_batch`] applies. With early
/// stopping enabled a 10% validation holdout is carved from the training
/// rows by the seeded generator, and the parameters from the best validation
/// epoch are returned.
pub fn train(
    model: &MlpModel,
    train_ds: &Dataset,
    cfg: &TrainConfig,
) -> Result<(MlpModel, TrainHistory), NnError> {
    if train_ds.n_rows() == 0 {
        return Err(NnError::EmptyTrainingSet);
    }
    if train_ds.n_cols() != model.input_dim() {
        return Err(NnError::DimensionMismatch {
            got: train_ds.n_cols(),
            expected: model.input_dim(),
        });
    }
    if cfg.epochs == 0 {
        return Err(NnError::BadEpochs);
    }
    if cfg.batch_size == 0 {
        return Err(NnError::BadBatchSize);
    }
    if !(cfg.learning_rate >= 0.0 && cfg.learning_rate.is_finite()) {
        return Err(NnError::BadLearningRate(cfg.learning_rate));
    }
    let (b1, b2) = cfg.adaptive_moment_decays;
    if !(0.0 < b1 && b1 < 1.0 && 0.0 < b2 && b2 < 1.0) {
        return Err(NnError::BadDecays(b1, b2));
    }

    let n = train_ds.n_rows();
    let rows: Vec<&[f64]> = (0..n).map(|i| train_ds.row(i)).collect();
    for (i, row) in rows.iter().enumerate() {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(NnError::NonFiniteInput(i));
        }
    }

    // Target standardization over the full provided training split.
    let scaling = if cfg.target_standardize {
        let mean = train_ds.target().iter().sum::<f64>() / n as f64;
        let var = train_ds.target().iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        Some(TargetScaling { mean, sd: if sd > 0.0 { sd } else { 1.0 } })
    } else {
        None
    };
    let targets: Vec<f64> = match scaling {
        Some(ts) => train_ds.target().iter().map(|t| (t - ts.mean) / ts.sd).collect(),
        None => train_ds.target().to_vec(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // Validation carve: only when early stopping is requested and there are
    // enough rows for both sides to be nonempty.
    let mut indices: Vec<usize> = (0..n).collect();
    let (fit_idx, val_idx): (Vec<usize>, Vec<usize>) = match cfg.early_stop_patience {
        Some(_) => {
            indices.shuffle(&mut rng);
            let n_val = ((n as f64 * VALIDATION_FRACTION).round() as usize).min(n - 1);
            if n_val == 0 {
                (indices.clone(), Vec::new())
            } else {
                let (val, fit) = indices.split_at(n_val);
                (fit.to_vec(), val.to_vec())
            }
        }
        None => (indices.clone(), Vec::new()),
    };
    let patience = cfg.early_stop_patience.filter(|_| !val_idx.is_empty());

    let mut current = model.clone();
    current.target_scaling = scaling;
    let mut adam = AdamState::new(&current);
    let mut history = TrainHistory::default();
    let mut best: Option<(f64, MlpModel)> = None;
    let mut epochs_since_best = 0usize;

    let mut order = fit_idx.clone();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut seen = 0usize;
        for (batch_no, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let batch_rows: Vec<&[f64]> = chunk.iter().map(|&i| rows[i]).collect();
            let batch_targets: Vec<f64> = chunk.iter().map(|&i| targets[i]).collect();
            let (loss, grads) = loss_and_gradients(&current, &batch_rows, &batch_targets)?;
            if !loss.is_finite() {
                return Err(NnError::Divergence { epoch, batch: batch_no });
            }
            epoch_loss += loss * chunk.len() as f64;
            seen += chunk.len();
            if cfg.learning_rate > 0.0 {
                adam.update(&mut current, &grads, cfg.learning_rate, b1, b2);
            }
        }
        let train_loss = epoch_loss / seen as f64;
        if !train_loss.is_finite() {
            return Err(NnError::Divergence { epoch, batch: 0 });
        }
        history.train_losses.push(train_loss);

        if !val_idx.is_empty() {
            let val_rows: Vec<&[f64]> = val_idx.iter().map(|&i| rows[i]).collect();
            let val_targets: Vec<f64> = val_idx.iter().map(|&i| targets[i]).collect();
            let val_loss = mse(&current, &val_rows, &val_targets)?;
            history.val_losses.push(val_loss);
            let improved = best.as_ref().map_or(true, |(b, _)| val_loss < *b);
            if improved {
                best = Some((val_loss, current.clone()));
                epochs_since_best = 0;
            } else {
                epochs_since_best += 1;
                if let Some(p) = patience {
                    if epochs_since_best >= p {
                        break;
                    }
                }
            }
        }
    }

    let final_model = match best {
        Some((_, m)) => m,
        None => current,
    };
    Ok((final_model, history))
}
