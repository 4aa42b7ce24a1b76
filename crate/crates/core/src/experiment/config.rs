//! Run configuration for the experiment matrix, read from a TOML file.
//!
//! Validation is collective: every missing, unknown, or ill-typed key is
//! gathered into one error so a bad config is fixable in a single pass.

use std::fmt;
use std::path::PathBuf;

use toml::Value;

use super::CellSettings;

/// All problems found while validating a config file.
#[derive(Debug)]
pub struct ConfigError {
    pub issues: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config: {}", self.issues.join("; "))
    }
}

impl std::error::Error for ConfigError {}

/// Network subsection of the config.
#[derive(Debug, Clone, PartialEq)]
pub struct NnSettings {
    pub hidden_dims: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// 0 disables early stopping.
    pub patience: usize,
}

impl Default for NnSettings {
    fn default() -> Self {
        Self { hidden_dims: vec![64, 32], learning_rate: 1e-3, epochs: 200, batch_size: 256, patience: 20 }
    }
}

/// Tree subsection of the config.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeSettings {
    pub min_leaf: usize,
}

impl Default for TreeSettings {
    fn default() -> Self {
        Self { min_leaf: 20 }
    }
}

/// A full `run-matrix` configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input_csv: PathBuf,
    pub target_column: String,
    pub split_ratio: f64,
    pub global_seed: u64,
    pub depths: Vec<usize>,
    pub variance_thresholds: Vec<f64>,
    pub vif_threshold: f64,
    pub parallelism: usize,
    pub out_dir: PathBuf,
    pub emit_plots: bool,
    pub nn: NnSettings,
    pub tree: TreeSettings,
}

impl RunConfig {
    /// Defaults for everything except the two required paths.
    pub fn with_paths(input_csv: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            input_csv: input_csv.into(),
            target_column: "pop_flows".into(),
            split_ratio: 0.8,
            global_seed: 42,
            depths: (3..15).collect(),
            variance_thresholds: vec![0.01, 0.001, 0.0001],
            vif_threshold: 10.0,
            parallelism: default_parallelism(),
            out_dir: out_dir.into(),
            emit_plots: false,
            nn: NnSettings::default(),
            tree: TreeSettings::default(),
        }
    }

    /// Parses and validates a TOML document. `input_csv` and `out_dir` are
    /// required; everything else falls back to the defaults above.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let value: Value = text
            .parse()
            .map_err(|e| ConfigError { issues: vec![format!("toml syntax: {e}")] })?;
        let Some(table) = value.as_table() else {
            return Err(ConfigError { issues: vec!["config root must be a table".into()] });
        };

        let mut issues = Vec::new();
        const KNOWN: [&str; 10] = [
            "input_csv",
            "target_column",
            "split_ratio",
            "global_seed",
            "depths",
            "variance_thresholds",
            "vif_threshold",
            "parallelism",
            "out_dir",
            "emit_plots",
        ];
        for key in table.keys() {
            if !KNOWN.contains(&key.as_str()) && key != "nn" && key != "tree" {
                issues.push(format!("unknown key `{key}`"));
            }
        }

        let mut get_str = |key: &str, required: bool| -> Option<String> {
            match table.get(key) {
                Some(Value::String(s)) => Some(s.clone()),
                Some(_) => {
                    issues.push(format!("`{key}` must be a string"));
                    None
                }
                None => {
                    if required {
                        issues.push(format!("missing required key `{key}`"));
                    }
                    None
                }
            }
        };
        let input_csv = get_str("input_csv", true);
        let out_dir = get_str("out_dir", true);
        let target_column = get_str("target_column", false).unwrap_or_else(|| "pop_flows".into());

        let split_ratio = match table.get("split_ratio") {
            Some(v) => match v.as_float().or_else(|| v.as_integer().map(|i| i as f64)) {
                Some(r) if 0.0 < r && r < 1.0 => r,
                _ => {
                    issues.push("`split_ratio` must be a number strictly between 0 and 1".into());
                    0.8
                }
            },
            None => 0.8,
        };

        let global_seed = match table.get("global_seed") {
            Some(v) => match v.as_integer() {
                Some(s) if s >= 0 => s as u64,
                _ => {
                    issues.push("`global_seed` must be a nonnegative integer".into());
                    42
                }
            },
            None => 42,
        };

        let depths = match table.get("depths") {
            Some(v) => match usize_list(v) {
                Some(list) if !list.is_empty() && list.iter().all(|&d| (1..=32).contains(&d)) => {
                    list
                }
                _ => {
                    issues.push("`depths` must be a nonempty array of integers in 1..=32".into());
                    (3..15).collect()
                }
            },
            None => (3..15).collect(),
        };

        let variance_thresholds = match table.get("variance_thresholds") {
            Some(v) => match f64_list(v) {
                Some(list)
                    if list.iter().all(|t| *t >= 0.0)
                        && list.windows(2).all(|w| w[0] > w[1]) =>
                {
                    list
                }
                _ => {
                    issues.push(
                        "`variance_thresholds` must be a strictly descending array of nonnegative numbers"
                            .into(),
                    );
                    vec![0.01, 0.001, 0.0001]
                }
            },
            None => vec![0.01, 0.001, 0.0001],
        };

        let vif_threshold = match table.get("vif_threshold") {
            Some(v) => match v.as_float().or_else(|| v.as_integer().map(|i| i as f64)) {
                Some(t) if t >= 1.0 => t,
                _ => {
                    issues.push("`vif_threshold` must be a number >= 1".into());
                    10.0
                }
            },
            None => 10.0,
        };

        let parallelism = match table.get("parallelism") {
            Some(v) => match v.as_integer() {
                Some(p) if p >= 1 => p as usize,
                _ => {
                    issues.push("`parallelism` must be a positive integer".into());
                    default_parallelism()
                }
            },
            None => default_parallelism(),
        };

        let emit_plots = match table.get("emit_plots") {
            Some(Value::Boolean(b)) => *b,
            Some(_) => {
                issues.push("`emit_plots` must be a boolean".into());
                false
            }
            None => false,
        };

        let nn = parse_nn(table.get("nn"), &mut issues);
        let tree = parse_tree(table.get("tree"), &mut issues);

        if !issues.is_empty() {
            return Err(ConfigError { issues });
        }
        Ok(RunConfig {
            input_csv: PathBuf::from(input_csv.expect("validated above")),
            target_column,
            split_ratio,
            global_seed,
            depths,
            variance_thresholds,
            vif_threshold,
            parallelism,
            out_dir: PathBuf::from(out_dir.expect("validated above")),
            emit_plots,
            nn,
            tree,
        })
    }

    /// Reads and parses the file at `path`.
    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            issues: vec![format!("cannot read {}: {e}", path.display())],
        })?;
        Self::from_toml_str(&text)
    }

    /// The per-cell settings this config implies.
    pub fn cell_settings(&self) -> CellSettings {
        CellSettings {
            hidden_dims: self.nn.hidden_dims.clone(),
            learning_rate: self.nn.learning_rate,
            epochs: self.nn.epochs,
            batch_size: self.nn.batch_size,
            patience: if self.nn.patience == 0 { None } else { Some(self.nn.patience) },
            target_standardize: true,
            min_leaf: self.tree.min_leaf,
        }
    }
}

fn default_parallelism() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn usize_list(v: &Value) -> Option<Vec<usize>> {
    let arr = v.as_array()?;
    arr.iter()
        .map(|e| e.as_integer().filter(|&i| i >= 0).map(|i| i as usize))
        .collect()
}

fn f64_list(v: &Value) -> Option<Vec<f64>> {
    let arr = v.as_array()?;
    arr.iter()
        .map(|e| e.as_float().or_else(|| e.as_integer().map(|i| i as f64)))
        .collect()
}

fn parse_nn(section: Option<&Value>, issues: &mut Vec<String>) -> NnSettings {
    let mut nn = NnSettings::default();
    let Some(value) = section else { return nn };
    let Some(table) = value.as_table() else {
        issues.push("`nn` must be a table".into());
        return nn;
    };
    for key in table.keys() {
        if !["hidden_dims", "learning_rate", "epochs", "batch_size", "patience"]
            .contains(&key.as_str())
        {
            issues.push(format!("unknown key `nn.{key}`"));
        }
    }
    if let Some(v) = table.get("hidden_dims") {
        match usize_list(v) {
            Some(dims) if !dims.is_empty() && dims.iter().all(|&d| d >= 1) => nn.hidden_dims = dims,
            _ => issues.push("`nn.hidden_dims` must be a nonempty array of positive integers".into()),
        }
    }
    if let Some(v) = table.get("learning_rate") {
        match v.as_float().or_else(|| v.as_integer().map(|i| i as f64)) {
            Some(lr) if lr > 0.0 && lr.is_finite() => nn.learning_rate = lr,
            _ => issues.push("`nn.learning_rate` must be a positive number".into()),
        }
    }
    for (key, slot) in [("epochs", &mut nn.epochs), ("batch_size", &mut nn.batch_size)] {
        if let Some(v) = table.get(key) {
            match v.as_integer() {
                Some(n) if n >= 1 => *slot = n as usize,
                _ => issues.push(format!("`nn.{key}` must be a positive integer")),
            }
        }
    }
    if let Some(v) = table.get("patience") {
        match v.as_integer() {
            Some(p) if p >= 0 => nn.patience = p as usize,
            _ => issues.push("`nn.patience` must be a nonnegative integer (0 disables)".into()),
        }
    }
    nn
}

fn parse_tree(section: Option<&Value>, issues: &mut Vec<String>) -> TreeSettings {
    let mut tree = TreeSettings::default();
    let Some(value) = section else { return tree };
    let Some(table) = value.as_table() else {
        issues.push("`tree` must be a table".into());
        return tree;
    };
    for key in table.keys() {
        if key != "min_leaf" {
            issues.push(format!("unknown key `tree.{key}`"));
        }
    }
    if let Some(v) = table.get("min_leaf") {
        match v.as_integer() {
            Some(m) if m >= 1 => tree.min_leaf = m as usize,
            _ => issues.push("`tree.min_leaf` must be a positive integer".into()),
        }
    }
    tree
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::from_toml_str(
            "input_csv = \"data.csv\"\nout_dir = \"out\"\n",
        )
        .unwrap();
        assert_eq!(cfg.target_column, "pop_flows");
        assert_eq!(cfg.split_ratio, 0.8);
        assert_eq!(cfg.depths, (3..15).collect::<Vec<_>>());
        assert_eq!(cfg.depths.len(), 12);
        assert_eq!(cfg.variance_thresholds, vec![0.01, 0.001, 0.0001]);
        assert_eq!(cfg.vif_threshold, 10.0);
        assert_eq!(cfg.nn.hidden_dims, vec![64, 32]);
        assert_eq!(cfg.tree.min_leaf, 20);
        assert!(!cfg.emit_plots);
    }

    #[test]
    fn full_config_round_trip() {
        let text = r#"
input_csv = "flows.csv"
target_column = "flow"
split_ratio = 0.75
global_seed = 9
depths = [3, 4, 5]
variance_thresholds = [0.01, 0.0001]
vif_threshold = 5.0
parallelism = 2
out_dir = "results"
emit_plots = true

[nn]
hidden_dims = [32, 16]
learning_rate = 0.01
epochs = 50
batch_size = 128
patience = 0

[tree]
min_leaf = 40
"#;
        let cfg = RunConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.target_column, "flow");
        assert_eq!(cfg.depths, vec![3, 4, 5]);
        assert_eq!(cfg.nn.patience, 0);
        assert_eq!(cfg.cell_settings().patience, None);
        assert_eq!(cfg.tree.min_leaf, 40);
        assert!(cfg.emit_plots);
    }

    #[test]
    fn missing_required_keys_are_all_reported() {
        let err = RunConfig::from_toml_str("split_ratio = 0.5\n").unwrap_err();
        assert!(err.issues.iter().any(|i| i.contains("input_csv")), "{err}");
        assert!(err.issues.iter().any(|i| i.contains("out_dir")), "{err}");
    }

    #[test]
    fn every_offending_key_is_listed_at_once() {
        let text = r#"
input_csv = 7
out_dir = "ok"
split_ratio = 3.5
depths = []
bogus = 1

[nn]
learning_rate = -1
mystery = true
"#;
        let err = RunConfig::from_toml_str(text).unwrap_err();
        let all = err.issues.join("\n");
        for needle in ["input_csv", "split_ratio", "depths", "bogus", "learning_rate", "mystery"] {
            assert!(all.contains(needle), "missing `{needle}` in: {all}");
        }
    }

    #[test]
    fn descending_threshold_order_is_enforced() {
        let text = "input_csv = \"a\"\nout_dir = \"b\"\nvariance_thresholds = [0.0001, 0.01]\n";
        let err = RunConfig::from_toml_str(text).unwrap_err();
        assert!(err.issues.iter().any(|i| i.contains("variance_thresholds")));
    }
}
