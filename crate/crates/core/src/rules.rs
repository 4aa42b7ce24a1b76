//! If-then rules extracted from regression trees.
//!
//! Every root-to-leaf path becomes one rule: the path's comparisons on each
//! feature are merged into a single half-open interval `(lower, upper]`, and
//! the rule carries the leaf mean as its prediction. Rules are encoded as
//! 0/1 indicator columns (1 when every condition holds) and can be filtered
//! by the population variance `p * (1 - p)` of that indicator on the
//! training split.
//!
//! For an unfiltered rule set the indicators partition the feature space:
//! every row matches exactly one rule, and the indicator dot product with
//! the leaf means reproduces the tree prediction exactly.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::tree::{RegressionTree, SplitOp};

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("tree features {tree:?} do not match dataset features {data:?}")]
    ColumnMismatch { tree: Vec<String>, data: Vec<String> },
    #[error("feature `{0}` referenced by a rule is missing from the dataset")]
    MissingFeature(String),
    #[error("variance threshold must be nonnegative, got {0}")]
    NegativeThreshold(f64),
    #[error("condition on `{feature}` has empty interval ({lower}, {upper}]")]
    EmptyInterval { feature: String, lower: f64, upper: f64 },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid rule document: {0}")]
    BadDocument(String),
    #[error(transparent)]
    Data(#[from] crate::data::DataError),
}

/// One merged interval condition: the row matches iff
/// `lower < value <= upper`. Unbounded ends use `-inf` / `+inf` in memory
/// and `null` in the JSON document (JSON has no infinity literal).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub feature: String,
    #[serde(with = "lower_bound")]
    pub lower: f64,
    #[serde(with = "upper_bound")]
    pub upper: f64,
}

macro_rules! bound_serde {
    ($module:ident, $unbounded:expr) => {
        mod $module {
            use serde::{Deserialize, Deserializer, Serializer};

            pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
                if v.is_finite() {
                    s.serialize_some(v)
                } else {
                    s.serialize_none()
                }
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
                Ok(Option::<f64>::deserialize(d)?.unwrap_or($unbounded))
            }
        }
    };
}

bound_serde!(lower_bound, f64::NEG_INFINITY);
bound_serde!(upper_bound, f64::INFINITY);

impl Condition {
    pub fn matches(&self, value: f64) -> bool {
        self.lower < value && value <= self.upper
    }
}

/// A conjunction of interval conditions with the leaf statistics of the
/// path that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    /// Depth-first position of the source leaf; stable across filtering so
    /// indicator column names survive as join keys.
    pub index: usize,
    /// At most one condition per feature.
    pub conditions: Vec<Condition>,
    /// Mean flow of the training rows on this leaf.
    pub leaf_mean: f64,
    /// Number of training rows matching the rule.
    pub support: usize,
    /// `p * (1 - p)` with `p = support / n_train`.
    pub indicator_variance: f64,
}

impl Rule {
    /// Evaluates the conjunction against a row described by `feature_names`.
    pub fn matches(&self, feature_names: &[String], row: &[f64]) -> Result<bool, RuleError> {
        for cond in &self.conditions {
            let idx = feature_names
                .iter()
                .position(|n| *n == cond.feature)
                .ok_or_else(|| RuleError::MissingFeature(cond.feature.clone()))?;
            if !cond.matches(row[idx]) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// An ordered set of rules from one tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
    /// `max_depth` of the source tree; part of indicator column names.
    pub source_depth: usize,
    pub n_train_rows: usize,
    /// True when the set is all leaves of one tree, unfiltered, so the
    /// indicators partition the feature space.
    pub complete_partition: bool,
    feature_names: Vec<String>,
}

impl RuleSet {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Indicator column name for rule `r`: `rule_<depth>_<index>`.
    pub fn column_name(&self, rule: &Rule) -> String {
        format!("rule_{}_{}", self.source_depth, rule.index)
    }

    /// Writes the machine-readable JSON document. [`load_rules`] reverses
    /// this exactly.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), RuleError> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| RuleError::BadDocument(e.to_string()))?;
        std::fs::write(path, json)
            .map_err(|source| RuleError::Io { path: path.display().to_string(), source })
    }

    /// Human-readable listing: one formatted rule per line with mean,
    /// support, and indicator variance.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for rule in &self.rules {
            let _ = writeln!(
                out,
                "{}: {} (support={}, variance={})",
                self.column_name(rule),
                format_rule(rule),
                rule.support,
                rule.indicator_variance
            );
        }
        out
    }
}

/// Reloads a rule set saved with [`RuleSet::save`].
pub fn load_rules(path: impl AsRef<Path>) -> Result<RuleSet, RuleError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| RuleError::Io { path: path.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|e| RuleError::BadDocument(e.to_string()))
}

/// Extracts one rule per leaf of `tree`, in depth-first leaf order.
///
/// Conditions on the same feature along a path are merged into a single
/// interval: `<=` steps tighten the upper bound, `>` steps tighten the
/// lower bound. Support and indicator variance are computed against
/// `train`, which must have the same columns the tree was fit on.
pub fn extract_rules(tree: &RegressionTree, train: &Dataset) -> Result<RuleSet, RuleError> {
    if tree.feature_names() != train.feature_names() {
        return Err(RuleError::ColumnMismatch {
            tree: tree.feature_names().to_vec(),
            data: train.feature_names().to_vec(),
        });
    }
    let names = tree.feature_names();
    let n_train = train.n_rows();
    let mut rules = Vec::with_capacity(tree.n_leaves());
    for (index, leaf) in tree.leaves().into_iter().enumerate() {
        // Merge per-feature bounds, remembering first-touch order so the
        // printed form follows the path like the tree does.
        let mut order: Vec<usize> = Vec::new();
        let mut bounds: HashMap<usize, (f64, f64)> = HashMap::new();
        for step in &leaf.path {
            let entry = bounds.entry(step.feature_index).or_insert_with(|| {
                order.push(step.feature_index);
                (f64::NEG_INFINITY, f64::INFINITY)
            });
            match step.op {
                SplitOp::Le => entry.1 = entry.1.min(step.threshold),
                SplitOp::Gt => entry.0 = entry.0.max(step.threshold),
            }
        }
        let mut conditions = Vec::with_capacity(order.len());
        for feature_index in order {
            let (lower, upper) = bounds[&feature_index];
            if lower >= upper {
                return Err(RuleError::EmptyInterval {
                    feature: names[feature_index].clone(),
                    lower,
                    upper,
                });
            }
            conditions.push(Condition { feature: names[feature_index].clone(), lower, upper });
        }
        rules.push(Rule {
            index,
            conditions,
            leaf_mean: leaf.mean,
            support: 0,
            indicator_variance: 0.0,
        });
    }

    // Support counted by evaluating the merged conditions on the training
    // rows; for a tree fit on the same data this equals the leaf sample
    // count, which the tests assert.
    let name_to_idx: HashMap<&str, usize> =
        names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    for rule in &mut rules {
        let mut support = 0usize;
        for i in 0..n_train {
            let row = train.row(i);
            if rule
                .conditions
                .iter()
                .all(|c| c.matches(row[name_to_idx[c.feature.as_str()]]))
            {
                support += 1;
            }
        }
        let p = support as f64 / n_train as f64;
        rule.support = support;
        rule.indicator_variance = p * (1.0 - p);
    }

    Ok(RuleSet {
        rules,
        source_depth: tree.max_depth(),
        n_train_rows: n_train,
        complete_partition: true,
        feature_names: names.to_vec(),
    })
}

/// Encodes every rule as a 0/1 column of a new dataset, in rule-set order,
/// named `rule_<depth>_<index>`. The target is carried over from `ds`.
pub fn encode(ruleset: &RuleSet, ds: &Dataset) -> Result<Dataset, RuleError> {
    // Resolve referenced features once.
    let mut resolved: Vec<Vec<(usize, f64, f64)>> = Vec::with_capacity(ruleset.rules.len());
    for rule in &ruleset.rules {
        let mut conds = Vec::with_capacity(rule.conditions.len());
        for c in &rule.conditions {
            let idx = ds
                .column_index(&c.feature)
                .ok_or_else(|| RuleError::MissingFeature(c.feature.clone()))?;
            conds.push((idx, c.lower, c.upper));
        }
        resolved.push(conds);
    }
    let n_rules = ruleset.rules.len();
    let mut features = vec![0.0; ds.n_rows() * n_rules];
    for i in 0..ds.n_rows() {
        let row = ds.row(i);
        for (r, conds) in resolved.iter().enumerate() {
            let matched = conds.iter().all(|&(idx, lower, upper)| {
                let v = row[idx];
                lower < v && v <= upper
            });
            if matched {
                features[i * n_rules + r] = 1.0;
            }
        }
    }
    let names = ruleset.rules.iter().map(|r| ruleset.column_name(r)).collect();
    Ok(Dataset::new(names, features, ds.target().to_vec(), ds.target_name())?)
}

/// Keeps exactly the rules with `indicator_variance >= threshold`,
/// preserving order. The result is only a complete partition if nothing
/// was removed.
pub fn filter_by_variance(ruleset: &RuleSet, threshold: f64) -> Result<RuleSet, RuleError> {
    if threshold < 0.0 {
        return Err(RuleError::NegativeThreshold(threshold));
    }
    let rules: Vec<Rule> = ruleset
        .rules
        .iter()
        .filter(|r| r.indicator_variance >= threshold)
        .cloned()
        .collect();
    let unchanged = rules.len() == ruleset.rules.len();
    Ok(RuleSet {
        rules,
        source_depth: ruleset.source_depth,
        n_train_rows: ruleset.n_train_rows,
        complete_partition: ruleset.complete_partition && unchanged,
        feature_names: ruleset.feature_names.clone(),
    })
}

/// Renders a rule's conditions as `a < f <= b` / `f <= b` / `f > a` joined
/// by ` AND `, followed by the leaf mean to two decimals. An empty
/// conjunction renders as `TRUE`.
pub fn format_rule(rule: &Rule) -> String {
    let conds = if rule.conditions.is_empty() {
        "TRUE".to_string()
    } else {
        rule.conditions
            .iter()
            .map(|c| match (c.lower.is_infinite(), c.upper.is_infinite()) {
                (true, false) => format!("{} <= {}", c.feature, c.upper),
                (false, true) => format!("{} > {}", c.feature, c.lower),
                (false, false) => format!("{} < {} <= {}", c.lower, c.feature, c.upper),
                (true, true) => format!("{} is anything", c.feature),
            })
            .collect::<Vec<_>>()
            .join(" AND ")
    };
    format!("{conds} => {:.2}", rule.leaf_mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::tree::fit_tree;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_dataset(rng: &mut ChaCha8Rng, n_rows: usize, n_cols: usize) -> Dataset {
        let features: Vec<f64> = (0..n_rows * n_cols).map(|_| rng.random_range(0.0..1.0)).collect();
        let target: Vec<f64> = (0..n_rows).map(|_| rng.random_range(0.0..100.0)).collect();
        let names = (0..n_cols).map(|j| format!("f{j}")).collect();
        Dataset::new(names, features, target, "pop_flows").unwrap()
    }

    fn cond(feature: &str, lower: f64, upper: f64) -> Condition {
        Condition { feature: feature.into(), lower, upper }
    }

    #[test]
    fn extraction_merges_same_feature_conditions() {
        let d = Dataset::new(
            vec!["x".into()],
            vec![0.0, 2.0, 4.0, 6.0],
            vec![0.0, 10.0, 90.0, 100.0],
            "pop_flows",
        )
        .unwrap();
        let tree = fit_tree(&d, 3, 1).unwrap();
        let rules = extract_rules(&tree, &d).unwrap();
        assert_eq!(rules.len(), tree.n_leaves());
        // A single-feature tree must still produce at most one condition per
        // rule after merging.
        for rule in &rules.rules {
            assert!(rule.conditions.len() <= 1);
        }
        // Interior leaves get genuine two-sided intervals.
        let two_sided = rules
            .rules
            .iter()
            .filter(|r| r.conditions.iter().any(|c| c.lower.is_finite() && c.upper.is_finite()))
            .count();
        assert!(two_sided >= 1, "expected at least one merged two-sided interval");
    }

    #[test]
    fn merged_interval_is_the_intersection() {
        // x <= 5 and x <= 3 and x > 1 must collapse to 1 < x <= 3.
        let steps = [(SplitOp::Le, 5.0), (SplitOp::Le, 3.0), (SplitOp::Gt, 1.0)];
        let mut lower = f64::NEG_INFINITY;
        let mut upper = f64::INFINITY;
        for (op, t) in steps {
            match op {
                SplitOp::Le => upper = upper.min(t),
                SplitOp::Gt => lower = lower.max(t),
            }
        }
        assert_eq!((lower, upper), (1.0, 3.0));
    }

    #[test]
    fn single_leaf_tree_yields_one_vacuous_rule() {
        let d = Dataset::new(
            vec!["x".into()],
            vec![1.0, 2.0, 3.0],
            vec![5.0, 5.0, 5.0],
            "pop_flows",
        )
        .unwrap();
        let tree = fit_tree(&d, 3, 1).unwrap();
        let rules = extract_rules(&tree, &d).unwrap();
        assert_eq!(rules.len(), 1);
        assert!(rules.rules[0].conditions.is_empty());
        assert_eq!(rules.rules[0].support, 3);
        assert_eq!(rules.rules[0].indicator_variance, 0.0);
        assert!(rules.complete_partition);
    }

    #[test]
    fn extraction_rejects_column_mismatch() {
        let d = random_dataset(&mut ChaCha8Rng::seed_from_u64(1), 50, 2);
        let tree = fit_tree(&d, 2, 2).unwrap();
        let other = Dataset::new(
            vec!["a".into(), "b".into()],
            (0..d.n_rows()).flat_map(|i| d.row(i).to_vec()).collect(),
            d.target().to_vec(),
            "pop_flows",
        )
        .unwrap();
        assert!(matches!(extract_rules(&tree, &other), Err(RuleError::ColumnMismatch { .. })));
    }

    #[test]
    fn boundary_convention_is_lower_exclusive_upper_inclusive() {
        let rule = Rule {
            index: 0,
            conditions: vec![cond("x", 1.0, 3.0)],
            leaf_mean: 0.0,
            support: 0,
            indicator_variance: 0.0,
        };
        let names = vec!["x".to_string()];
        assert!(rule.matches(&names, &[3.0]).unwrap());
        assert!(!rule.matches(&names, &[1.0]).unwrap());
        assert!(!rule.matches(&names, &[3.0001]).unwrap());
    }

    #[test]
    fn empty_rule_matches_everything() {
        let rule = Rule {
            index: 0,
            conditions: vec![],
            leaf_mean: 1.0,
            support: 0,
            indicator_variance: 0.0,
        };
        assert!(rule.matches(&["x".to_string()], &[123.0]).unwrap());
    }

    // Hand evaluation of a three-condition depth-3 rule:
    // distance <= 46.08 AND pois_destination > 323 AND pois_origin > 307
    // must match (40, 400, 400).
    #[test]
    fn three_condition_rule_hand_evaluation() {
        let rule = Rule {
            index: 0,
            conditions: vec![
                cond("distance_miles", f64::NEG_INFINITY, 46.08),
                cond("pois_destination", 323.0, f64::INFINITY),
                cond("pois_origin", 307.0, f64::INFINITY),
            ],
            leaf_mean: 31867.81,
            support: 0,
            indicator_variance: 0.0,
        };
        let names = vec![
            "distance_miles".to_string(),
            "pois_destination".to_string(),
            "pois_origin".to_string(),
        ];
        assert!(rule.matches(&names, &[40.0, 400.0, 400.0]).unwrap());
        assert!(!rule.matches(&names, &[50.0, 400.0, 400.0]).unwrap());
        assert!(!rule.matches(&names, &[40.0, 300.0, 400.0]).unwrap());
    }

    #[test]
    fn matches_errors_on_missing_feature() {
        let rule = Rule {
            index: 0,
            conditions: vec![cond("zzz", 0.0, 1.0)],
            leaf_mean: 0.0,
            support: 0,
            indicator_variance: 0.0,
        };
        assert!(matches!(
            rule.matches(&["x".to_string()], &[0.5]),
            Err(RuleError::MissingFeature(f)) if f == "zzz"
        ));
    }

    #[test]
    fn complete_encoding_is_one_hot() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = random_dataset(&mut rng, 200, 3);
        let tree = fit_tree(&d, 3, 5).unwrap();
        let rules = extract_rules(&tree, &d).unwrap();
        let other = random_dataset(&mut rng, 97, 3);
        let encoded = encode(&rules, &other).unwrap();
        assert_eq!(encoded.n_cols(), rules.len());
        assert_eq!(encoded.n_rows(), other.n_rows());
        for i in 0..encoded.n_rows() {
            let sum: f64 = encoded.row(i).iter().sum();
            assert_eq!(sum, 1.0, "row {i} not one-hot");
        }
    }

    #[test]
    fn filtered_encoding_rows_sum_at_most_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = random_dataset(&mut rng, 300, 3);
        let tree = fit_tree(&d, 4, 5).unwrap();
        let rules = extract_rules(&tree, &d).unwrap();
        let filtered = filter_by_variance(&rules, 0.05).unwrap();
        assert!(filtered.len() < rules.len());
        assert!(!filtered.complete_partition);
        let encoded = encode(&filtered, &d).unwrap();
        for i in 0..encoded.n_rows() {
            let sum: f64 = encoded.row(i).iter().sum();
            assert!(sum == 0.0 || sum == 1.0, "row {i} sums to {sum}");
        }
    }

    #[test]
    fn training_encoding_column_sums_equal_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d = random_dataset(&mut rng, 150, 2);
        let tree = fit_tree(&d, 3, 4).unwrap();
        let rules = extract_rules(&tree, &d).unwrap();
        let encoded = encode(&rules, &d).unwrap();
        for (r, rule) in rules.rules.iter().enumerate() {
            let sum: f64 = encoded.column(r).iter().sum();
            assert_eq!(sum as usize, rule.support);
        }
    }

    #[test]
    fn support_equals_leaf_sample_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let d = random_dataset(&mut rng, 180, 3);
        let tree = fit_tree(&d, 4, 4).unwrap();
        let rules = extract_rules(&tree, &d).unwrap();
        for (rule, leaf) in rules.rules.iter().zip(tree.leaves()) {
            assert_eq!(rule.support, leaf.n_samples);
        }
    }

    #[test]
    fn encode_errors_on_missing_feature() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = random_dataset(&mut rng, 60, 2);
        let tree = fit_tree(&d, 2, 2).unwrap();
        let rules = extract_rules(&tree, &d).unwrap();
        let other = Dataset::new(vec!["zzz".into()], vec![0.0; 10], vec![0.0; 10], "pop_flows")
            .unwrap();
        if rules.rules.iter().any(|r| !r.conditions.is_empty()) {
            assert!(matches!(encode(&rules, &other), Err(RuleError::MissingFeature(_))));
        }
    }

    #[test]
    fn filter_zero_threshold_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let d = random_dataset(&mut rng, 90, 2);
        let tree = fit_tree(&d, 3, 3).unwrap();
        let rules = extract_rules(&tree, &d).unwrap();
        let filtered = filter_by_variance(&rules, 0.0).unwrap();
        assert_eq!(filtered, rules);
        assert!(filtered.complete_partition);
    }

    #[test]
    fn filter_excludes_full_support_rule_at_any_positive_threshold() {
        let d = Dataset::new(
            vec!["x".into()],
            vec![1.0, 2.0, 3.0],
            vec![5.0, 5.0, 5.0],
            "pop_flows",
        )
        .unwrap();
        let tree = fit_tree(&d, 2, 1).unwrap();
        let rules = extract_rules(&tree, &d).unwrap();
        assert_eq!(rules.rules[0].support, 3);
        let filtered = filter_by_variance(&rules, 1e-9).unwrap();
        assert!(filtered.is_empty());
    }

    // p = 5000/100000 = 0.05 gives variance 0.05 * 0.95 = 0.0475, which
    // survives all three thresholds of the filtering scheme.
    #[test]
    fn moderate_support_rule_survives_all_thresholds() {
        let p: f64 = 5_000.0 / 100_000.0;
        let variance = p * (1.0 - p);
        assert_eq!(variance, 0.0475);
        for threshold in [0.01, 0.001, 0.0001] {
            assert!(variance >= threshold);
        }
    }

    #[test]
    fn filter_rejects_negative_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let d = random_dataset(&mut rng, 40, 2);
        let tree = fit_tree(&d, 2, 2).unwrap();
        let rules = extract_rules(&tree, &d).unwrap();
        assert!(matches!(
            filter_by_variance(&rules, -0.1),
            Err(RuleError::NegativeThreshold(_))
        ));
    }

    #[test]
    fn format_rule_renders_table_style_intervals() {
        let rule = Rule {
            index: 3,
            conditions: vec![cond("distance_miles", 46.08, 58.77)],
            leaf_mean: 2728.7,
            support: 0,
            indicator_variance: 0.0,
        };
        assert_eq!(format_rule(&rule), "46.08 < distance_miles <= 58.77 => 2728.70");

        let le_only = Rule { conditions: vec![cond("x", f64::NEG_INFINITY, 2.5)], ..rule.clone() };
        assert_eq!(format_rule(&le_only), "x <= 2.5 => 2728.70");

        let gt_only = Rule { conditions: vec![cond("x", 2.5, f64::INFINITY)], ..rule.clone() };
        assert_eq!(format_rule(&gt_only), "x > 2.5 => 2728.70");

        let vacuous = Rule { conditions: vec![], ..rule };
        assert_eq!(format_rule(&vacuous), "TRUE => 2728.70");
    }

    #[test]
    fn save_load_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let d = random_dataset(&mut rng, 120, 3);
        let tree = fit_tree(&d, 4, 3).unwrap();
        let rules = extract_rules(&tree, &d).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rules.json");
        rules.save(&path).unwrap();
        let reloaded = load_rules(&path).unwrap();
        assert_eq!(rules, reloaded);
    }

    #[test]
    fn variance_threshold_selection_is_nested() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let d = random_dataset(&mut rng, 400, 3);
        let tree = fit_tree(&d, 6, 4).unwrap();
        let rules = extract_rules(&tree, &d).unwrap();
        let s01 = filter_by_variance(&rules, 0.01).unwrap();
        let s001 = filter_by_variance(&rules, 0.001).unwrap();
        let s0001 = filter_by_variance(&rules, 0.0001).unwrap();
        assert!(s01.len() <= s001.len());
        assert!(s001.len() <= s0001.len());
        assert!(s0001.len() <= rules.len());
        // Nesting of the selected index sets, not just the counts.
        let idx = |rs: &RuleSet| rs.rules.iter().map(|r| r.index).collect::<Vec<_>>();
        let i01 = idx(&s01);
        let i001 = idx(&s001);
        assert!(i01.iter().all(|i| i001.contains(i)));
    }

    /// Evaluates a leaf's raw path conditions sequentially, without merging.
    fn raw_path_matches(path: &[crate::tree::PathStep], row: &[f64]) -> bool {
        path.iter().all(|s| match s.op {
            SplitOp::Le => row[s.feature_index] <= s.threshold,
            SplitOp::Gt => row[s.feature_index] > s.threshold,
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn partition_one_hot_for_random_trees(seed in 0u64..1000, depth in 1usize..=6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n_rows = rng.random_range(40..160);
            let d = random_dataset(&mut rng, n_rows, 3);
            let tree = fit_tree(&d, depth, 2).unwrap();
            let rules = extract_rules(&tree, &d).unwrap();
            let probe = random_dataset(&mut rng, 60, 3);
            let encoded = encode(&rules, &probe).unwrap();
            for i in 0..encoded.n_rows() {
                let sum: f64 = encoded.row(i).iter().sum();
                prop_assert_eq!(sum, 1.0);
            }
        }

        #[test]
        fn rule_dot_product_reproduces_tree_prediction(seed in 0u64..1000, depth in 1usize..=6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(31));
            let n_rows = rng.random_range(40..160);
            let d = random_dataset(&mut rng, n_rows, 3);
            let tree = fit_tree(&d, depth, 2).unwrap();
            let rules = extract_rules(&tree, &d).unwrap();
            let probe = random_dataset(&mut rng, 50, 3);
            let encoded = encode(&rules, &probe).unwrap();
            for i in 0..probe.n_rows() {
                let dot: f64 = encoded
                    .row(i)
                    .iter()
                    .zip(&rules.rules)
                    .map(|(ind, rule)| ind * rule.leaf_mean)
                    .sum();
                let direct = tree.predict(probe.row(i)).unwrap();
                prop_assert_eq!(dot, direct, "row {}", i);
            }
        }

        #[test]
        fn merged_conditions_equal_raw_path(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(77));
            let d = random_dataset(&mut rng, 120, 3);
            let tree = fit_tree(&d, 5, 2).unwrap();
            let rules = extract_rules(&tree, &d).unwrap();
            let leaves = tree.leaves();
            let probe = random_dataset(&mut rng, 40, 3);
            for (rule, leaf) in rules.rules.iter().zip(&leaves) {
                for i in 0..probe.n_rows() {
                    let row = probe.row(i);
                    let merged = rule.matches(probe.feature_names(), row).unwrap();
                    prop_assert_eq!(merged, raw_path_matches(&leaf.path, row));
                }
            }
        }

        #[test]
        fn indicator_variance_is_bounded(support in 0usize..=500, n in 1usize..=500) {
            prop_assume!(support <= n);
            let p = support as f64 / n as f64;
            let v = p * (1.0 - p);
            prop_assert!((0.0..=0.25).contains(&v));
        }
    }
}
