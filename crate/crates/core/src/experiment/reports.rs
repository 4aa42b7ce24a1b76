//! Report emission: one results row per cell, the per-depth rule-count
//! table, long-format metric series for external plotting, and optional
//! SVG line charts.
//!
//! Every file is derived purely from the cell outcomes, so two runs with
//! identical configs produce byte-identical output regardless of timing or
//! parallelism.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{svg, CellOutcome, DatasetType, ExperimentError, ExperimentResult};

/// Options controlling report layout.
#[derive(Debug, Clone)]
pub struct ReportOptions {
    /// Variance thresholds in descending order: the rule-count table gets
    /// one column per threshold.
    pub thresholds: Vec<f64>,
    /// Also write SVG line charts.
    pub emit_plots: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { thresholds: vec![0.01, 0.001, 0.0001], emit_plots: false }
    }
}

const METRIC_NAMES: [&str; 6] =
    ["mae", "r2", "cpc", "mae_per_rule", "r2_per_rule", "cpc_per_rule"];

fn metric_value(result: &ExperimentResult, metric: &str) -> Option<f64> {
    let m = &result.metrics;
    match metric {
        "mae" => Some(m.mae),
        "r2" => Some(m.r2),
        "cpc" => Some(m.cpc),
        "mae_per_rule" => m.mae_per_rule,
        "r2_per_rule" => m.r2_per_rule,
        "cpc_per_rule" => m.cpc_per_rule,
        _ => None,
    }
}

fn opt_num<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

/// Writes `results.csv`, `rule_counts.csv`, one `series_<metric>.csv` per
/// metric, and (optionally) `plot_<metric>.svg` files into `out_dir`.
/// Returns the paths written.
pub fn emit_reports(
    outcomes: &[CellOutcome],
    out_dir: impl AsRef<Path>,
    options: &ReportOptions,
) -> Result<Vec<PathBuf>, ExperimentError> {
    if outcomes.is_empty() {
        return Err(ExperimentError::NoResults);
    }
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|source| ExperimentError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let write = |name: &str, contents: &str| -> Result<PathBuf, ExperimentError> {
        let path = out_dir.join(name);
        std::fs::write(&path, contents).map_err(|source| ExperimentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(path)
    };

    let mut files = Vec::new();
    files.push(write("results.csv", &results_csv(outcomes))?);
    files.push(write("rule_counts.csv", &rule_counts_csv(outcomes, &options.thresholds))?);
    for metric in METRIC_NAMES {
        files.push(write(&format!("series_{metric}.csv"), &series_csv(outcomes, metric))?);
    }
    if options.emit_plots {
        for metric in METRIC_NAMES {
            let chart = svg::line_chart(&plot_series(outcomes, metric), metric, "tree depth");
            files.push(write(&format!("plot_{metric}.svg"), &chart)?);
        }
    }
    Ok(files)
}

/// One row per cell, in matrix order. Failed cells keep their identity
/// columns, leave the metric fields empty, and carry the error in `status`.
fn results_csv(outcomes: &[CellOutcome]) -> String {
    let mut out = String::new();
    out.push_str(
        "dataset_type,depth,variance_threshold,n_rules,mae,r2,cpc,mae_per_rule,r2_per_rule,cpc_per_rule,status\n",
    );
    for outcome in outcomes {
        match outcome {
            Ok(r) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},ok",
                    r.config.dataset_type.label(),
                    opt_num(r.config.depth),
                    opt_num(r.config.dataset_type.variance_threshold()),
                    r.n_rules_selected,
                    r.metrics.mae,
                    r.metrics.r2,
                    r.metrics.cpc,
                    opt_num(r.metrics.mae_per_rule),
                    opt_num(r.metrics.r2_per_rule),
                    opt_num(r.metrics.cpc_per_rule),
                );
            }
            Err(f) => {
                let _ = writeln!(
                    out,
                    "{},{},{},,,,,,,,error: {}",
                    f.label,
                    opt_num(f.depth),
                    opt_num(f.variance_threshold),
                    f.message.replace(',', ";").replace('\n', " "),
                );
            }
        }
    }
    out
}

/// Depth-by-threshold rule counts in the layout of the study's summary
/// table: one row per depth, `all_rules` from the unfiltered extraction,
/// then the surviving count per variance threshold.
fn rule_counts_csv(outcomes: &[CellOutcome], thresholds: &[f64]) -> String {
    let mut depths: Vec<usize> =
        outcomes.iter().filter_map(|o| o.as_ref().ok().and_then(|r| r.config.depth)).collect();
    depths.sort_unstable();
    depths.dedup();

    let mut out = String::from("depth,all_rules");
    for t in thresholds {
        let _ = write!(out, ",var_{t}");
    }
    out.push('\n');

    for depth in depths {
        let all = outcomes.iter().find_map(|o| match o {
            Ok(r) if r.config.depth == Some(depth) => Some(r.n_rules_all),
            _ => None,
        });
        let _ = write!(out, "{depth},{}", opt_num(all));
        for &t in thresholds {
            let selected = outcomes.iter().find_map(|o| match o {
                Ok(r)
                    if r.config.depth == Some(depth)
                        && r.config.dataset_type.variance_threshold() == Some(t) =>
                {
                    Some(r.n_rules_selected)
                }
                _ => None,
            });
            let _ = write!(out, ",{}", opt_num(selected));
        }
        out.push('\n');
    }
    out
}

/// Long-format series for one metric: `depth,dataset_type,value`, one row
/// per successful cell carrying that metric. The depth field is empty for
/// the `final` baseline.
fn series_csv(outcomes: &[CellOutcome], metric: &str) -> String {
    let mut out = String::from("depth,dataset_type,value\n");
    for outcome in outcomes.iter().flatten() {
        if let Some(value) = metric_value(outcome, metric) {
            let _ = writeln!(
                out,
                "{},{},{}",
                opt_num(outcome.config.depth),
                outcome.config.dataset_type.label(),
                value,
            );
        }
    }
    out
}

/// Chart series per dataset type. The depthless baseline becomes a flat
/// line spanning the plotted depth range.
fn plot_series(outcomes: &[CellOutcome], metric: &str) -> Vec<(String, Vec<(f64, f64)>)> {
    let results: Vec<&ExperimentResult> = outcomes.iter().flatten().collect();
    let depths: Vec<usize> = {
        let mut d: Vec<usize> = results.iter().filter_map(|r| r.config.depth).collect();
        d.sort_unstable();
        d.dedup();
        d
    };
    let mut labels: Vec<String> = Vec::new();
    for r in &results {
        let label = r.config.dataset_type.label();
        if !labels.contains(&label) {
            labels.push(label);
        }
    }
    let mut series = Vec::new();
    for label in labels {
        let mut points: Vec<(f64, f64)> = Vec::new();
        for r in &results {
            if r.config.dataset_type.label() != label {
                continue;
            }
            let Some(value) = metric_value(r, metric) else { continue };
            match r.config.depth {
                Some(d) => points.push((d as f64, value)),
                None => {
                    // Flat baseline across the depth axis.
                    for &d in &depths {
                        points.push((d as f64, value));
                    }
                    if depths.is_empty() {
                        points.push((0.0, value));
                    }
                }
            }
        }
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if !points.is_empty() {
            series.push((label, points));
        }
    }
    series
}
