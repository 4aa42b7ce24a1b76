//! The experiment matrix: every combination of dataset variant and tree
//! depth from the study design, run end to end with shared preprocessing
//! and per-cell seeding.
//!
//! The default matrix holds 61 cells: one baseline run on the preprocessed
//! features alone, and for each of twelve tree depths a rules-only run, a
//! rules-plus-base run, and one combined run per variance threshold
//! (0.01, 0.001, 0.0001). Any depth list works; thirteen depths give the
//! 66-cell variant. All cells share one train/test split and one fitted
//! tree per depth; each cell trains a fresh network from a seed derived
//! from `(global_seed, depth, dataset_type)`, so results are byte-identical
//! regardless of execution order or parallelism.

mod config;
mod reports;
mod svg;

pub use config::{ConfigError, NnSettings, RunConfig, TreeSettings};
pub use reports::{emit_reports, ReportOptions};

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::data::{self, Dataset, SplitPair};
use crate::metrics::{self, EvalVectors, MetricsReport};
use crate::nn::{self, TrainConfig};
use crate::rules::{self, RuleSet};
use crate::tree;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("depth list is empty")]
    EmptyDepths,
    #[error("variance thresholds must be strictly descending, got {0:?}")]
    ThresholdsNotDescending(Vec<f64>),
    #[error("dataset type `{0}` requires a tree depth")]
    MissingDepth(String),
    #[error("dataset type `final` must not carry a tree depth")]
    UnexpectedDepth,
    #[error("cell `{label}`{} failed: {message}", fmt_depth(.depth))]
    Cell { label: String, depth: Option<usize>, message: String },
    #[error("cell `{0}` assembled an empty feature set; nothing to train on")]
    EmptyFeatureSet(String),
    #[error("no results to report")]
    NoResults,
    #[error("failed to write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Data(#[from] data::DataError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

fn fmt_depth(depth: &Option<usize>) -> String {
    match depth {
        Some(d) => format!(" (depth {d})"),
        None => String::new(),
    }
}

/// Which feature set a cell trains on.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetType {
    /// Preprocessed base features only.
    Final,
    /// Indicator columns of every extracted rule.
    RulesOnly,
    /// Base features plus every rule indicator.
    RulesPlusFinal,
    /// Base features plus the rules surviving the variance threshold.
    VarRulesPlusFinal { threshold: f64 },
}

impl DatasetType {
    /// Stable label used in seeds, report rows, and error messages, e.g.
    /// `var_0.01_plus_final`.
    pub fn label(&self) -> String {
        match self {
            DatasetType::Final => "final".into(),
            DatasetType::RulesOnly => "rules_only".into(),
            DatasetType::RulesPlusFinal => "rules_plus_final".into(),
            DatasetType::VarRulesPlusFinal { threshold } => {
                format!("var_{threshold}_plus_final")
            }
        }
    }

    pub fn variance_threshold(&self) -> Option<f64> {
        match self {
            DatasetType::VarRulesPlusFinal { threshold } => Some(*threshold),
            _ => None,
        }
    }

    fn needs_depth(&self) -> bool {
        !matches!(self, DatasetType::Final)
    }
}

/// Settings shared by every cell: network shape and training
/// hyperparameters plus the tree leaf floor.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSettings {
    pub hidden_dims: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub patience: Option<usize>,
    pub target_standardize: bool,
    pub min_leaf: usize,
}

impl Default for CellSettings {
    fn default() -> Self {
        Self {
            hidden_dims: vec![64, 32],
            learning_rate: 1e-3,
            epochs: 200,
            batch_size: 256,
            patience: Some(20),
            target_standardize: true,
            min_leaf: 20,
        }
    }
}

/// One cell of the experiment matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset_type: DatasetType,
    /// Tree depth; `None` exactly for the `final` baseline.
    pub depth: Option<usize>,
    /// Seed for network init and batch shuffling, derived from the global
    /// seed and the cell identity.
    pub seed: u64,
    pub settings: CellSettings,
}

/// Outcome of a successful cell.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub n_rules_all: usize,
    pub n_rules_selected: usize,
    pub metrics: MetricsReport,
    pub wall_time: Duration,
}

/// A failed cell, annotated with its identity.
#[derive(Debug, Clone)]
pub struct CellFailure {
    pub label: String,
    pub depth: Option<usize>,
    pub variance_threshold: Option<f64>,
    pub message: String,
}

pub type CellOutcome = Result<ExperimentResult, CellFailure>;

/// Deterministic per-cell seed: FNV-1a over the global seed, depth marker,
/// and dataset-type label, finished with a splitmix64 mix. Stable across
/// platforms and releases.
pub fn cell_seed(global_seed: u64, depth: Option<usize>, label: &str) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = FNV_OFFSET;
    let mut feed = |h: &mut u64, bytes: &[u8]| {
        for &b in bytes {
            *h ^= b as u64;
            *h = h.wrapping_mul(FNV_PRIME);
        }
    };
    feed(&mut h, &global_seed.to_le_bytes());
    match depth {
        Some(d) => feed(&mut h, &(d as u64).to_le_bytes()),
        None => feed(&mut h, &[0xff]),
    }
    feed(&mut h, label.as_bytes());

    let mut z = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Builds the experiment matrix: the `final` baseline first, then for each
/// depth (ascending) a `rules_only` cell, a `rules_plus_final` cell, and one
/// `var_<t>_plus_final` cell per threshold in the given (descending) order.
///
/// Twelve depths with the three standard thresholds produce the 61-cell
/// matrix: 1 final + 12 * (2 + 3).
pub fn build_matrix(
    depths: &[usize],
    thresholds: &[f64],
    global_seed: u64,
    settings: &CellSettings,
) -> Result<Vec<ExperimentConfig>, ExperimentError> {
    if depths.is_empty() {
        return Err(ExperimentError::EmptyDepths);
    }
    for pair in thresholds.windows(2) {
        if pair[0] <= pair[1] {
            return Err(ExperimentError::ThresholdsNotDescending(thresholds.to_vec()));
        }
    }
    let mut sorted_depths = depths.to_vec();
    sorted_depths.sort_unstable();
    sorted_depths.dedup();

    let mut matrix = Vec::with_capacity(1 + sorted_depths.len() * (2 + thresholds.len()));
    matrix.push(ExperimentConfig {
        dataset_type: DatasetType::Final,
        depth: None,
        seed: cell_seed(global_seed, None, "final"),
        settings: settings.clone(),
    });
    for &depth in &sorted_depths {
        let mut types = vec![DatasetType::RulesOnly, DatasetType::RulesPlusFinal];
        types.extend(
            thresholds
                .iter()
                .map(|&threshold| DatasetType::VarRulesPlusFinal { threshold }),
        );
        for dataset_type in types {
            matrix.push(ExperimentConfig {
                seed: cell_seed(global_seed, Some(depth), &dataset_type.label()),
                dataset_type,
                depth: Some(depth),
                settings: settings.clone(),
            });
        }
    }
    Ok(matrix)
}

/// Rule features of one depth, shared by every cell of that depth.
struct DepthArtifacts {
    ruleset: RuleSet,
    train_rules: Dataset,
    test_rules: Dataset,
}

fn build_depth_artifacts(
    base: &SplitPair,
    depth: usize,
    min_leaf: usize,
) -> Result<DepthArtifacts, String> {
    let fitted = tree::fit_tree(&base.train, depth, min_leaf).map_err(|e| e.to_string())?;
    let ruleset = rules::extract_rules(&fitted, &base.train).map_err(|e| e.to_string())?;
    let train_rules = rules::encode(&ruleset, &base.train).map_err(|e| e.to_string())?;
    let test_rules = rules::encode(&ruleset, &base.test).map_err(|e| e.to_string())?;
    Ok(DepthArtifacts { ruleset, train_rules, test_rules })
}

/// The assembled feature sets and rule counts of one cell.
struct CellInputs {
    n_rules_all: usize,
    n_rules_selected: usize,
    train_x: Dataset,
    test_x: Dataset,
}

fn assemble_inputs(
    cfg: &ExperimentConfig,
    base: &SplitPair,
    artifacts: Option<&DepthArtifacts>,
) -> Result<CellInputs, ExperimentError> {
    let label = cfg.dataset_type.label();
    if cfg.dataset_type.needs_depth() && cfg.depth.is_none() {
        return Err(ExperimentError::MissingDepth(label));
    }
    if !cfg.dataset_type.needs_depth() && cfg.depth.is_some() {
        return Err(ExperimentError::UnexpectedDepth);
    }

    let cell_err = |message: String| ExperimentError::Cell {
        label: label.clone(),
        depth: cfg.depth,
        message,
    };

    let inputs = match &cfg.dataset_type {
        DatasetType::Final => CellInputs {
            n_rules_all: 0,
            n_rules_selected: 0,
            train_x: base.train.clone(),
            test_x: base.test.clone(),
        },
        other => {
            let depth = cfg.depth.expect("checked above");
            let owned;
            let arts = match artifacts {
                Some(a) => a,
                None => {
                    owned = build_depth_artifacts(base, depth, cfg.settings.min_leaf)
                        .map_err(&cell_err)?;
                    &owned
                }
            };
            let n_all = arts.ruleset.len();
            match other {
                DatasetType::RulesOnly => CellInputs {
                    n_rules_all: n_all,
                    n_rules_selected: n_all,
                    train_x: arts.train_rules.clone(),
                    test_x: arts.test_rules.clone(),
                },
                DatasetType::RulesPlusFinal => CellInputs {
                    n_rules_all: n_all,
                    n_rules_selected: n_all,
                    train_x: base.train.hstack(&arts.train_rules).map_err(|e| cell_err(e.to_string()))?,
                    test_x: base.test.hstack(&arts.test_rules).map_err(|e| cell_err(e.to_string()))?,
                },
                DatasetType::VarRulesPlusFinal { threshold } => {
                    let filtered = rules::filter_by_variance(&arts.ruleset, *threshold)
                        .map_err(|e| cell_err(e.to_string()))?;
                    let selected: Vec<usize> =
                        filtered.rules.iter().map(|r| r.index).collect();
                    let (train_x, test_x) = if selected.is_empty() {
                        (base.train.clone(), base.test.clone())
                    } else {
                        // Positions in the full encoding coincide with rule
                        // indices because extraction numbers leaves 0..n.
                        let train_sel = arts
                            .train_rules
                            .select_columns(&selected)
                            .map_err(|e| cell_err(e.to_string()))?;
                        let test_sel = arts
                            .test_rules
                            .select_columns(&selected)
                            .map_err(|e| cell_err(e.to_string()))?;
                        (
                            base.train.hstack(&train_sel).map_err(|e| cell_err(e.to_string()))?,
                            base.test.hstack(&test_sel).map_err(|e| cell_err(e.to_string()))?,
                        )
                    };
                    CellInputs {
                        n_rules_all: n_all,
                        n_rules_selected: selected.len(),
                        train_x,
                        test_x,
                    }
                }
                DatasetType::Final => unreachable!(),
            }
        }
    };

    if inputs.train_x.n_cols() == 0 {
        return Err(ExperimentError::EmptyFeatureSet(label));
    }
    Ok(inputs)
}

/// Runs one cell end to end: assemble the feature set (fitting the depth's
/// tree when none is shared), train a fresh network from the cell seed, and
/// evaluate on the test split. MAE and R² use the raw predictions; CPC sees
/// them clamped at zero, matching its nonnegative-flow domain.
pub fn run_cell(
    cfg: &ExperimentConfig,
    base: &SplitPair,
) -> Result<ExperimentResult, ExperimentError> {
    run_cell_inner(cfg, base, None)
}

fn run_cell_inner(
    cfg: &ExperimentConfig,
    base: &SplitPair,
    artifacts: Option<&DepthArtifacts>,
) -> Result<ExperimentResult, ExperimentError> {
    let start = Instant::now();
    let label = cfg.dataset_type.label();
    let cell_err = |message: String| ExperimentError::Cell {
        label: label.clone(),
        depth: cfg.depth,
        message,
    };

    let inputs = assemble_inputs(cfg, base, artifacts)?;

    let model = nn::init_mlp(inputs.train_x.n_cols(), &cfg.settings.hidden_dims, cfg.seed)
        .map_err(|e| cell_err(e.to_string()))?;
    let train_cfg = TrainConfig {
        epochs: cfg.settings.epochs,
        batch_size: cfg.settings.batch_size,
        learning_rate: cfg.settings.learning_rate,
        seed: cfg.seed.wrapping_add(1),
        adaptive_moment_decays: (0.9, 0.999),
        early_stop_patience: cfg.settings.patience,
        target_standardize: cfg.settings.target_standardize,
    };
    let (fitted, _history) =
        nn::train(&model, &inputs.train_x, &train_cfg).map_err(|e| cell_err(e.to_string()))?;

    let predictions = fitted
        .predict_batch(&inputs.test_x)
        .map_err(|e| cell_err(e.to_string()))?;
    let actual = inputs.test_x.target().to_vec();

    let raw = EvalVectors::new(actual.clone(), predictions.clone())
        .map_err(|e| cell_err(e.to_string()))?;
    let mae = metrics::mae(&raw).map_err(|e| cell_err(e.to_string()))?;
    let r2 = metrics::r_squared(&raw).map_err(|e| cell_err(e.to_string()))?;
    let clamped: Vec<f64> = predictions.iter().map(|p| p.max(0.0)).collect();
    let nonneg = EvalVectors::new(actual, clamped).map_err(|e| cell_err(e.to_string()))?;
    let cpc = metrics::cpc(&nonneg).map_err(|e| cell_err(e.to_string()))?;

    let mut report = MetricsReport::new(mae, r2, cpc);
    if inputs.n_rules_selected > 0 {
        report = metrics::per_rule(&report, inputs.n_rules_selected)
            .map_err(|e| cell_err(e.to_string()))?;
    }

    Ok(ExperimentResult {
        config: cfg.clone(),
        n_rules_all: inputs.n_rules_all,
        n_rules_selected: inputs.n_rules_selected,
        metrics: report,
        wall_time: start.elapsed(),
    })
}

/// Runs every cell of the matrix, up to `parallelism` at a time, sharing
/// one tree (and its rule encodings) per depth. Failures are isolated: a
/// failed cell yields an error record and the rest keep running. The
/// result order matches the matrix order and the numbers are independent
/// of the parallelism degree.
pub fn run_all(
    matrix: &[ExperimentConfig],
    base: &SplitPair,
    parallelism: usize,
) -> Vec<CellOutcome> {
    use rayon::prelude::*;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .expect("thread pool construction");

    pool.install(|| {
        // One artifact set per distinct (depth, min_leaf).
        let mut keys: Vec<(usize, usize)> = matrix
            .iter()
            .filter_map(|cfg| cfg.depth.map(|d| (d, cfg.settings.min_leaf)))
            .collect();
        keys.sort_unstable();
        keys.dedup();
        let artifacts: HashMap<(usize, usize), Result<Arc<DepthArtifacts>, String>> = keys
            .par_iter()
            .map(|&(depth, min_leaf)| {
                let built = build_depth_artifacts(base, depth, min_leaf).map(Arc::new);
                ((depth, min_leaf), built)
            })
            .collect();

        matrix
            .par_iter()
            .map(|cfg| {
                let failure = |message: String| CellFailure {
                    label: cfg.dataset_type.label(),
                    depth: cfg.depth,
                    variance_threshold: cfg.dataset_type.variance_threshold(),
                    message,
                };
                let shared = match cfg.depth {
                    Some(d) => match &artifacts[&(d, cfg.settings.min_leaf)] {
                        Ok(a) => Some(a.as_ref()),
                        Err(message) => return Err(failure(message.clone())),
                    },
                    None => None,
                };
                run_cell_inner(cfg, base, shared).map_err(|e| failure(e.to_string()))
            })
            .collect()
    })
}

/// Everything produced by a full `run-matrix` invocation.
pub struct RunSummary {
    pub outcomes: Vec<CellOutcome>,
    pub files: Vec<std::path::PathBuf>,
}

/// Loads the input CSV, prepares the shared base split, runs the full
/// matrix, and writes the report files into `config.out_dir`.
pub fn run_matrix(config: &RunConfig) -> Result<RunSummary, ExperimentError> {
    let raw = data::load_csv(&config.input_csv, &config.target_column)?;
    let (base, _prep) = data::preprocess_pipeline(
        &raw,
        config.split_ratio,
        config.global_seed,
        config.vif_threshold,
    )?;
    let settings = config.cell_settings();
    let matrix = build_matrix(
        &config.depths,
        &config.variance_thresholds,
        config.global_seed,
        &settings,
    )?;
    let outcomes = run_all(&matrix, &base, config.parallelism);
    let options = ReportOptions {
        thresholds: config.variance_thresholds.clone(),
        emit_plots: config.emit_plots,
    };
    let files = emit_reports(&outcomes, &config.out_dir, &options)?;
    Ok(RunSummary { outcomes, files })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn small_settings() -> CellSettings {
        CellSettings {
            hidden_dims: vec![8],
            learning_rate: 3e-3,
            epochs: 4,
            batch_size: 64,
            patience: None,
            target_standardize: true,
            min_leaf: 5,
        }
    }

    fn small_base() -> SplitPair {
        let raw = synth::generate(400, 11);
        let (base, _) = data::preprocess_pipeline(&raw, 0.8, 11, 10.0).unwrap();
        base
    }

    #[test]
    fn twelve_depth_matrix_has_61_cells_with_per_type_counts() {
        let depths: Vec<usize> = (3..=14).collect();
        let matrix =
            build_matrix(&depths, &[0.01, 0.001, 0.0001], 0, &small_settings()).unwrap();
        assert_eq!(matrix.len(), 61);
        let count = |label: &str| {
            matrix.iter().filter(|c| c.dataset_type.label().starts_with(label)).count()
        };
        assert_eq!(count("final"), 1);
        assert_eq!(count("rules_only"), 12);
        assert_eq!(count("rules_plus_final"), 12);
        assert_eq!(count("var_0.01_"), 12);
        assert_eq!(count("var_0.001_"), 12);
        assert_eq!(count("var_0.0001_"), 12);
        // Ordering: final first, then depth-major in type order.
        assert_eq!(matrix[0].dataset_type, DatasetType::Final);
        assert_eq!(matrix[1].depth, Some(3));
        assert_eq!(matrix[1].dataset_type, DatasetType::RulesOnly);
        assert_eq!(matrix[2].dataset_type, DatasetType::RulesPlusFinal);
        assert_eq!(matrix[5].dataset_type, DatasetType::VarRulesPlusFinal { threshold: 0.0001 });
        assert_eq!(matrix[6].depth, Some(4));
    }

    #[test]
    fn thirteen_depth_matrix_has_66_cells() {
        let depths: Vec<usize> = (3..=15).collect();
        let matrix =
            build_matrix(&depths, &[0.01, 0.001, 0.0001], 0, &small_settings()).unwrap();
        assert_eq!(matrix.len(), 66);
    }

    #[test]
    fn single_depth_matrix_counts() {
        let matrix = build_matrix(&[3], &[0.01, 0.001, 0.0001], 0, &small_settings()).unwrap();
        assert_eq!(matrix.len(), 6);
    }

    #[test]
    fn no_threshold_matrix_counts() {
        let depths: Vec<usize> = (3..=14).collect();
        let matrix = build_matrix(&depths, &[], 0, &small_settings()).unwrap();
        assert_eq!(matrix.len(), 25);
    }

    #[test]
    fn build_matrix_validates_inputs() {
        assert!(matches!(
            build_matrix(&[], &[0.01], 0, &small_settings()),
            Err(ExperimentError::EmptyDepths)
        ));
        assert!(matches!(
            build_matrix(&[3], &[0.001, 0.01], 0, &small_settings()),
            Err(ExperimentError::ThresholdsNotDescending(_))
        ));
    }

    #[test]
    fn cell_seed_is_stable_and_distinct() {
        let a = cell_seed(42, Some(3), "rules_only");
        assert_eq!(a, cell_seed(42, Some(3), "rules_only"));
        assert_ne!(a, cell_seed(42, Some(4), "rules_only"));
        assert_ne!(a, cell_seed(42, Some(3), "rules_plus_final"));
        assert_ne!(a, cell_seed(43, Some(3), "rules_only"));
    }

    #[test]
    fn final_cell_trains_on_base_features_only() {
        let base = small_base();
        let cfg = ExperimentConfig {
            dataset_type: DatasetType::Final,
            depth: None,
            seed: 1,
            settings: small_settings(),
        };
        let result = run_cell(&cfg, &base).unwrap();
        assert_eq!(result.n_rules_all, 0);
        assert_eq!(result.n_rules_selected, 0);
        assert!(result.metrics.mae_per_rule.is_none());
    }

    #[test]
    fn rules_only_cell_width_equals_selected_rules() {
        let base = small_base();
        let cfg = ExperimentConfig {
            dataset_type: DatasetType::RulesOnly,
            depth: Some(3),
            seed: 2,
            settings: small_settings(),
        };
        let result = run_cell(&cfg, &base).unwrap();
        assert!(result.n_rules_all >= 1);
        assert_eq!(result.n_rules_selected, result.n_rules_all);
        let fitted = tree::fit_tree(&base.train, 3, small_settings().min_leaf).unwrap();
        assert_eq!(result.n_rules_all, fitted.n_leaves());
        assert_eq!(result.metrics.n_rules, result.n_rules_selected);
    }

    #[test]
    fn depth_validation_in_run_cell() {
        let base = small_base();
        let missing = ExperimentConfig {
            dataset_type: DatasetType::RulesOnly,
            depth: None,
            seed: 0,
            settings: small_settings(),
        };
        assert!(matches!(run_cell(&missing, &base), Err(ExperimentError::MissingDepth(_))));
        let extra = ExperimentConfig {
            dataset_type: DatasetType::Final,
            depth: Some(3),
            seed: 0,
            settings: small_settings(),
        };
        assert!(matches!(run_cell(&extra, &base), Err(ExperimentError::UnexpectedDepth)));
    }

    #[test]
    fn run_all_matches_run_cell_and_isolates_failures() {
        let base = small_base();
        let matrix = build_matrix(&[3, 4], &[0.01], 5, &small_settings()).unwrap();
        let outcomes = run_all(&matrix, &base, 2);
        assert_eq!(outcomes.len(), matrix.len());
        for (cfg, outcome) in matrix.iter().zip(&outcomes) {
            let direct = run_cell(cfg, &base).unwrap();
            let shared = outcome.as_ref().unwrap();
            assert_eq!(shared.metrics, direct.metrics);
            assert_eq!(shared.n_rules_all, direct.n_rules_all);
        }

        // A base split too small for the leaf floor poisons every tree cell
        // but leaves the baseline cell running.
        let tiny_raw = synth::generate(40, 3);
        let (tiny, _) = data::preprocess_pipeline(&tiny_raw, 0.8, 3, 10.0).unwrap();
        let mut strict = small_settings();
        strict.min_leaf = 30;
        let matrix = build_matrix(&[3], &[0.01], 5, &strict).unwrap();
        let outcomes = run_all(&matrix, &tiny, 2);
        assert!(outcomes[0].is_ok(), "final cell should survive");
        for outcome in &outcomes[1..] {
            let failure = outcome.as_ref().unwrap_err();
            assert!(failure.message.contains("min_leaf"), "got: {}", failure.message);
        }
    }

    #[test]
    fn parallelism_degree_does_not_change_results() {
        let base = small_base();
        let matrix = build_matrix(&[3, 5], &[0.01, 0.001], 7, &small_settings()).unwrap();
        let serial = run_all(&matrix, &base, 1);
        let parallel = run_all(&matrix, &base, 8);
        assert_eq!(serial.len(), parallel.len());
        for (a, b) in serial.iter().zip(&parallel) {
            let (a, b) = (a.as_ref().unwrap(), b.as_ref().unwrap());
            assert_eq!(a.metrics, b.metrics);
            assert_eq!(a.n_rules_all, b.n_rules_all);
            assert_eq!(a.n_rules_selected, b.n_rules_selected);
        }
    }

    #[test]
    fn empty_feature_set_is_an_explicit_error() {
        let base = small_base();
        // Zero-width assembly is unreachable through the public dataset
        // types, so drive the guard directly.
        let empty_train = Dataset::new(vec![], vec![], base.train.target().to_vec(), "pop_flows")
            .unwrap();
        let empty_test = Dataset::new(vec![], vec![], base.test.target().to_vec(), "pop_flows")
            .unwrap();
        let pair = SplitPair { train: empty_train, test: empty_test, seed: 0, ratio: 0.8 };
        let cfg = ExperimentConfig {
            dataset_type: DatasetType::Final,
            depth: None,
            seed: 0,
            settings: small_settings(),
        };
        assert!(matches!(run_cell(&cfg, &pair), Err(ExperimentError::EmptyFeatureSet(_))));
    }
}
