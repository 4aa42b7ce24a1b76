//! Tabular OD-flow datasets: CSV loading, median imputation, z-score
//! standardization, VIF-based multicollinearity filtering, and seeded
//! train/test splits.
//!
//! A [`Dataset`] is an immutable row-major matrix of named feature columns
//! plus a nonnegative target vector (flow counts). Missing feature cells are
//! represented as `NaN` until [`impute_median`] runs; targets are always
//! finite. All operations return new datasets.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Errors produced while loading, validating, or transforming datasets.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("target column `{0}` not found in header")]
    MissingTargetColumn(String),
    #[error("duplicate column name `{0}` in header")]
    DuplicateColumn(String),
    #[error("empty dataset: no data rows")]
    EmptyDataset,
    #[error("row {row} has {got} cells, expected {expected}")]
    MalformedRow { row: usize, got: usize, expected: usize },
    #[error("cell at row {row}, column `{column}` does not parse as a number: `{value}`")]
    UnparseableCell { row: usize, column: String, value: String },
    #[error("target at row {row} is missing or non-finite")]
    MissingTarget { row: usize },
    #[error("target at row {row} is negative ({value}); flows are counts")]
    NegativeTarget { row: usize, value: f64 },
    #[error("column `{0}` has no present values; cannot impute")]
    AllMissingColumn(String),
    #[error("column `{0}` is constant; R² is undefined")]
    ConstantColumn(String),
    #[error("column `{0}` not found in dataset")]
    UnknownColumn(String),
    #[error("dataset has {rows} rows but {cols} feature columns; need rows > cols for VIF")]
    TooFewRows { rows: usize, cols: usize },
    #[error("non-finite value in column `{column}` at row {row}")]
    NonFiniteValue { column: String, row: usize },
    #[error("non-finite scaling stats for column `{0}`")]
    NonFiniteStats(String),
    #[error("split ratio {0} must be strictly between 0 and 1")]
    BadRatio(f64),
    #[error("split would leave an empty {0} side")]
    EmptySplit(&'static str),
    #[error("need at least 2 rows to split, got {0}")]
    TooFewRowsToSplit(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Token(s) treated as a missing cell in input CSVs: the empty string or `NA`.
fn is_missing_token(s: &str) -> bool {
    s.is_empty() || s == "NA"
}

/// A named feature matrix with a nonnegative flow target.
///
/// Rows correspond to (origin, destination, day) records; `features` is
/// row-major with `n_rows * n_cols` entries. Feature cells may be `NaN`
/// (missing) until imputation; targets are validated finite and `>= 0` at
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    features: Vec<f64>,
    target: Vec<f64>,
    target_name: String,
    n_rows: usize,
    n_cols: usize,
}

impl Dataset {
    /// Builds a dataset, validating shapes, unique column names, and the
    /// target invariants (finite, nonnegative).
    pub fn new(
        feature_names: Vec<String>,
        features: Vec<f64>,
        target: Vec<f64>,
        target_name: impl Into<String>,
    ) -> Result<Self, DataError> {
        let n_cols = feature_names.len();
        let n_rows = target.len();
        if features.len() != n_rows * n_cols {
            return Err(DataError::DimensionMismatch(format!(
                "features has {} entries, expected {} rows x {} cols",
                features.len(),
                n_rows,
                n_cols
            )));
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(DataError::DuplicateColumn(name.clone()));
            }
        }
        for (row, &t) in target.iter().enumerate() {
            if !t.is_finite() {
                return Err(DataError::MissingTarget { row });
            }
            if t < 0.0 {
                return Err(DataError::NegativeTarget { row, value: t });
            }
        }
        Ok(Self {
            feature_names,
            features,
            target,
            target_name: target_name.into(),
            n_rows,
            n_cols,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    /// One feature row as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_cols..(i + 1) * self.n_cols]
    }

    /// Copies feature column `j` out of the row-major store.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.features[i * self.n_cols + j]).collect()
    }

    /// Index of the named column, if present.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// True when no feature cell is missing or non-finite.
    pub fn is_complete(&self) -> bool {
        self.features.iter().all(|v| v.is_finite())
    }

    /// Errors with the offending location if any feature cell is non-finite.
    pub fn require_complete(&self) -> Result<(), DataError> {
        for i in 0..self.n_rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                if !v.is_finite() {
                    return Err(DataError::NonFiniteValue {
                        column: self.feature_names[j].clone(),
                        row: i,
                    });
                }
            }
        }
        Ok(())
    }

    /// True when every present value of column `j` is 0 or 1. Binary
    /// indicator columns are excluded from standardization so their 0/1
    /// semantics survive preprocessing.
    pub fn is_binary_column(&self, j: usize) -> bool {
        (0..self.n_rows).all(|i| {
            let v = self.features[i * self.n_cols + j];
            v.is_nan() || v == 0.0 || v == 1.0
        })
    }

    /// New dataset keeping only the feature columns at `indices`, in the
    /// given order. Target is carried over unchanged.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self, DataError> {
        for &j in indices {
            if j >= self.n_cols {
                return Err(DataError::DimensionMismatch(format!(
                    "column index {} out of range ({} columns)",
                    j, self.n_cols
                )));
            }
        }
        let names = indices.iter().map(|&j| self.feature_names[j].clone()).collect();
        let mut features = Vec::with_capacity(self.n_rows * indices.len());
        for i in 0..self.n_rows {
            let row = self.row(i);
            features.extend(indices.iter().map(|&j| row[j]));
        }
        Dataset::new(names, features, self.target.clone(), self.target_name.clone())
    }

    /// New dataset keeping only the rows at `indices`, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self, DataError> {
        let mut features = Vec::with_capacity(indices.len() * self.n_cols);
        let mut target = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.n_rows {
                return Err(DataError::DimensionMismatch(format!(
                    "row index {} out of range ({} rows)",
                    i, self.n_rows
                )));
            }
            features.extend_from_slice(self.row(i));
            target.push(self.target[i]);
        }
        Dataset::new(self.feature_names.clone(), features, target, self.target_name.clone())
    }

    /// Concatenates the feature columns of `self` and `other` (same rows and
    /// targets required). Used to build "base + rules" datasets.
    pub fn hstack(&self, other: &Dataset) -> Result<Self, DataError> {
        if self.n_rows != other.n_rows {
            return Err(DataError::DimensionMismatch(format!(
                "row counts differ: {} vs {}",
                self.n_rows, other.n_rows
            )));
        }
        if self.target != other.target {
            return Err(DataError::DimensionMismatch(
                "targets differ between stacked datasets".into(),
            ));
        }
        let mut names = self.feature_names.clone();
        names.extend(other.feature_names.iter().cloned());
        let mut features = Vec::with_capacity(self.n_rows * (self.n_cols + other.n_cols));
        for i in 0..self.n_rows {
            features.extend_from_slice(self.row(i));
            features.extend_from_slice(other.row(i));
        }
        Dataset::new(names, features, self.target.clone(), self.target_name.clone())
    }

    /// Writes the dataset back to CSV with the same conventions as
    /// [`load_csv`]: header row, feature columns in order, target last.
    /// Floats are printed with the shortest representation that reparses to
    /// the identical value, so a write/load round trip is exact.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), DataError> {
        let path = path.as_ref();
        let io_err = |source| DataError::Io { path: path.display().to_string(), source };
        let file = std::fs::File::create(path).map_err(io_err)?;
        let mut w = std::io::BufWriter::new(file);
        let mut header: Vec<&str> = self.feature_names.iter().map(|s| s.as_str()).collect();
        header.push(&self.target_name);
        writeln!(w, "{}", header.join(",")).map_err(io_err)?;
        let mut line = String::new();
        for i in 0..self.n_rows {
            line.clear();
            for &v in self.row(i) {
                if v.is_nan() {
                    line.push_str("NA");
                } else {
                    line.push_str(&format!("{v}"));
                }
                line.push(',');
            }
            line.push_str(&format!("{}", self.target[i]));
            writeln!(w, "{line}").map_err(io_err)?;
        }
        w.flush().map_err(io_err)
    }
}

/// Loads a CSV file with a header row into a [`Dataset`].
///
/// The column named `target_column` becomes the target; every other column
/// becomes a feature, preserving header order. Empty cells and the literal
/// `NA` are recorded as missing (`NaN`) for later imputation. Missing or
/// non-finite target cells are errors.
pub fn load_csv(path: impl AsRef<Path>, target_column: &str) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let file = std::fs::File::open(path)
        .map_err(|source| DataError::Io { path: path_str.clone(), source })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);

    let headers = reader
        .headers()
        .map_err(|source| DataError::Csv { path: path_str.clone(), source })?
        .clone();
    let header: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
    let target_idx = header
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| DataError::MissingTargetColumn(target_column.to_string()))?;

    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != target_idx)
        .map(|(_, h)| h.clone())
        .collect();
    let n_cols = feature_names.len();

    let mut features = Vec::new();
    let mut target = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|source| DataError::Csv { path: path_str.clone(), source })?;
        if record.len() != header.len() {
            return Err(DataError::MalformedRow {
                row: row_idx,
                got: record.len(),
                expected: header.len(),
            });
        }
        for (col_idx, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            let value = if is_missing_token(cell) {
                f64::NAN
            } else {
                let v: f64 = cell.parse().map_err(|_| DataError::UnparseableCell {
                    row: row_idx,
                    column: header[col_idx].clone(),
                    value: cell.to_string(),
                })?;
                if !v.is_finite() && col_idx != target_idx {
                    return Err(DataError::UnparseableCell {
                        row: row_idx,
                        column: header[col_idx].clone(),
                        value: cell.to_string(),
                    });
                }
                v
            };
            if col_idx == target_idx {
                if !value.is_finite() {
                    return Err(DataError::MissingTarget { row: row_idx });
                }
                target.push(value);
            } else {
                features.push(value);
            }
        }
    }
    if target.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    debug_assert_eq!(features.len(), target.len() * n_cols);
    Dataset::new(feature_names, features, target, target_column)
}

/// Median of a nonempty sorted slice: the middle value for odd counts, the
/// mean of the two middle order statistics for even counts.
fn sorted_median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Replaces every missing cell of each column with the median of that
/// column's present values. Present cells pass through untouched; a column
/// with no present values is an error.
pub fn impute_median(ds: &Dataset) -> Result<Dataset, DataError> {
    let mut features = ds.features.clone();
    for j in 0..ds.n_cols {
        let mut present: Vec<f64> = ds.column(j).into_iter().filter(|v| !v.is_nan()).collect();
        if present.len() == ds.n_rows {
            continue;
        }
        if present.is_empty() {
            return Err(DataError::AllMissingColumn(ds.feature_names[j].clone()));
        }
        present.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sorted_median(&present);
        for i in 0..ds.n_rows {
            let cell = &mut features[i * ds.n_cols + j];
            if cell.is_nan() {
                *cell = median;
            }
        }
    }
    Dataset::new(ds.feature_names.clone(), features, ds.target.clone(), ds.target_name.clone())
}

/// Per-column z-score parameters fit on training data.
///
/// Columns with zero variance are flagged constant and pass through both
/// [`apply_standardizer`] and [`invert_standardizer`] unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingStats {
    columns: Vec<ColumnStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnStats {
    pub name: String,
    pub mean: f64,
    /// Population standard deviation (divide-by-n); 0.0 when constant.
    pub sd: f64,
    pub constant: bool,
}

impl ScalingStats {
    pub fn columns(&self) -> &[ColumnStats] {
        &self.columns
    }
}

/// Population mean and standard deviation of a slice.
fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Fits z-score parameters for the named columns. Call on the training split
/// only; the same stats are then applied to train and test alike.
pub fn fit_standardizer(ds: &Dataset, columns: &[String]) -> Result<ScalingStats, DataError> {
    ds.require_complete()?;
    let mut stats = Vec::with_capacity(columns.len());
    for name in columns {
        let j = ds
            .column_index(name)
            .ok_or_else(|| DataError::UnknownColumn(name.clone()))?;
        let (mean, sd) = mean_sd(&ds.column(j));
        if !mean.is_finite() || !sd.is_finite() {
            return Err(DataError::NonFiniteStats(name.clone()));
        }
        stats.push(ColumnStats { name: name.clone(), mean, sd, constant: sd == 0.0 });
    }
    Ok(ScalingStats { columns: stats })
}

/// Applies `(x - mean) / sd` to each column covered by `stats`. Constant
/// columns pass through; columns absent from the dataset are errors.
pub fn apply_standardizer(ds: &Dataset, stats: &ScalingStats) -> Result<Dataset, DataError> {
    let mut features = ds.features.clone();
    for col in &stats.columns {
        if !col.mean.is_finite() || !col.sd.is_finite() {
            return Err(DataError::NonFiniteStats(col.name.clone()));
        }
        let j = ds
            .column_index(&col.name)
            .ok_or_else(|| DataError::UnknownColumn(col.name.clone()))?;
        if col.constant {
            continue;
        }
        for i in 0..ds.n_rows {
            let cell = &mut features[i * ds.n_cols + j];
            *cell = (*cell - col.mean) / col.sd;
        }
    }
    Dataset::new(ds.feature_names.clone(), features, ds.target.clone(), ds.target_name.clone())
}

/// Undoes [`apply_standardizer`] with the same stats: `x * sd + mean`.
pub fn invert_standardizer(ds: &Dataset, stats: &ScalingStats) -> Result<Dataset, DataError> {
    let mut features = ds.features.clone();
    for col in &stats.columns {
        let j = ds
            .column_index(&col.name)
            .ok_or_else(|| DataError::UnknownColumn(col.name.clone()))?;
        if col.constant {
            continue;
        }
        for i in 0..ds.n_rows {
            let cell = &mut features[i * ds.n_cols + j];
            *cell = *cell * col.sd + col.mean;
        }
    }
    Dataset::new(ds.feature_names.clone(), features, ds.target.clone(), ds.target_name.clone())
}

/// R² of regressing `y` on the columns of `x` plus an intercept, solved by a
/// singular-value decomposition so rank-deficient designs produce residuals
/// of (numerically) zero instead of garbage coefficients.
fn ols_r_squared(x: &DMatrix<f64>, y: &[f64]) -> f64 {
    let n = y.len();
    let k = x.ncols();
    // Design matrix with a leading intercept column.
    let mut design = DMatrix::zeros(n, k + 1);
    for i in 0..n {
        design[(i, 0)] = 1.0;
        for j in 0..k {
            design[(i, j + 1)] = x[(i, j)];
        }
    }
    let rhs = DMatrix::from_column_slice(n, 1, y);
    let svd = design.clone().svd(true, true);
    let beta = svd
        .solve(&rhs, 1e-12)
        .expect("svd solve with computed U/V cannot fail");
    let fitted = design * beta;
    let ss_res: f64 = (0..n).map(|i| (y[i] - fitted[(i, 0)]).powi(2)).sum();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
    1.0 - ss_res / ss_tot
}

/// Relative residual variance below which a regression is treated as an
/// exact fit and the VIF reported as infinite.
const VIF_SINGULAR_TOL: f64 = 1e-12;

/// Variance inflation factor of every feature: `1 / (1 - R²_j)` where `R²_j`
/// regresses column `j` on all other columns plus an intercept. Perfectly
/// collinear columns report `f64::INFINITY`.
pub fn compute_vif(ds: &Dataset) -> Result<Vec<f64>, DataError> {
    ds.require_complete()?;
    if ds.n_rows <= ds.n_cols {
        return Err(DataError::TooFewRows { rows: ds.n_rows, cols: ds.n_cols });
    }
    for j in 0..ds.n_cols {
        let col = ds.column(j);
        if col.iter().all(|&v| v == col[0]) {
            return Err(DataError::ConstantColumn(ds.feature_names[j].clone()));
        }
    }
    let mut vifs = Vec::with_capacity(ds.n_cols);
    for j in 0..ds.n_cols {
        let y = ds.column(j);
        let mut x = DMatrix::zeros(ds.n_rows, ds.n_cols - 1);
        let mut out_col = 0;
        for c in 0..ds.n_cols {
            if c == j {
                continue;
            }
            for i in 0..ds.n_rows {
                x[(i, out_col)] = ds.features[i * ds.n_cols + c];
            }
            out_col += 1;
        }
        let r2 = if ds.n_cols == 1 { 0.0 } else { ols_r_squared(&x, &y) };
        let remainder = 1.0 - r2;
        vifs.push(if remainder < VIF_SINGULAR_TOL { f64::INFINITY } else { 1.0 / remainder });
    }
    Ok(vifs)
}

/// One removal step recorded by [`vif_filter`].
#[derive(Debug, Clone, PartialEq)]
pub struct VifRemoval {
    pub column: String,
    pub vif: f64,
}

/// Report of a [`vif_filter`] run: removal order plus the surviving VIFs.
#[derive(Debug, Clone, PartialEq)]
pub struct VifReport {
    pub removed: Vec<VifRemoval>,
    pub surviving: Vec<(String, f64)>,
    pub threshold: f64,
}

impl fmt::Display for VifReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vif filter (threshold {})", self.threshold)?;
        if self.removed.is_empty() {
            writeln!(f, "removed: none")?;
        } else {
            for (step, r) in self.removed.iter().enumerate() {
                writeln!(f, "removed[{}]: {} (vif {})", step, r.column, r.vif)?;
            }
        }
        writeln!(f, "surviving:")?;
        for (name, vif) in &self.surviving {
            writeln!(f, "  {name}: {vif}")?;
        }
        Ok(())
    }
}

/// Iteratively drops the highest-VIF feature until every remaining feature
/// has VIF at or below `threshold`. Ties for the maximum drop the
/// higher-indexed column, so the earliest occurrence of a duplicated feature
/// survives.
pub fn vif_filter(ds: &Dataset, threshold: f64) -> Result<(Dataset, VifReport), DataError> {
    let mut current = ds.clone();
    let mut removed = Vec::new();
    loop {
        let vifs = compute_vif(&current)?;
        let mut worst: Option<(usize, f64)> = None;
        for (j, &v) in vifs.iter().enumerate() {
            let beats = match worst {
                None => true,
                Some((_, best)) => v >= best,
            };
            if v > threshold && beats {
                worst = Some((j, v));
            }
        }
        match worst {
            Some((j, v)) => {
                removed.push(VifRemoval { column: current.feature_names[j].clone(), vif: v });
                let keep: Vec<usize> = (0..current.n_cols()).filter(|&c| c != j).collect();
                current = current.select_columns(&keep)?;
            }
            None => {
                let surviving = current
                    .feature_names
                    .iter()
                    .cloned()
                    .zip(vifs)
                    .collect();
                return Ok((current, VifReport { removed, surviving, threshold }));
            }
        }
    }
}

/// A disjoint train/test row partition of one source dataset.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    pub seed: u64,
    pub ratio: f64,
}

/// Partitions rows uniformly at random with a seeded generator. The train
/// side receives `round(ratio * n_rows)` rows; identical `(seed, ratio, row
/// count)` always reproduce the identical partition. Row order within each
/// side is ascending by source index.
pub fn train_test_split(ds: &Dataset, ratio: f64, seed: u64) -> Result<SplitPair, DataError> {
    if !(0.0 < ratio && ratio < 1.0) {
        return Err(DataError::BadRatio(ratio));
    }
    if ds.n_rows < 2 {
        return Err(DataError::TooFewRowsToSplit(ds.n_rows));
    }
    let n_train = (ratio * ds.n_rows as f64).round() as usize;
    if n_train == 0 {
        return Err(DataError::EmptySplit("train"));
    }
    if n_train >= ds.n_rows {
        return Err(DataError::EmptySplit("test"));
    }
    let mut indices: Vec<usize> = (0..ds.n_rows).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let (train_idx, test_idx) = indices.split_at(n_train);
    let mut train_idx = train_idx.to_vec();
    let mut test_idx = test_idx.to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok(SplitPair {
        train: ds.select_rows(&train_idx)?,
        test: ds.select_rows(&test_idx)?,
        seed,
        ratio,
    })
}

/// Everything recorded while preparing a base split: the fitted scaling
/// stats and the VIF removal trace.
#[derive(Debug, Clone)]
pub struct PreprocessReport {
    pub scaling: ScalingStats,
    pub vif: VifReport,
}

/// The full preprocessing chain: median imputation, seeded train/test
/// split, z-scoring fit on the training side only (binary 0/1 columns pass
/// through), then an iterative VIF filter decided on the training side and
/// applied to both.
pub fn preprocess_pipeline(
    raw: &Dataset,
    ratio: f64,
    seed: u64,
    vif_threshold: f64,
) -> Result<(SplitPair, PreprocessReport), DataError> {
    let imputed = impute_median(raw)?;
    let split = train_test_split(&imputed, ratio, seed)?;

    let numeric: Vec<String> = split
        .train
        .feature_names()
        .iter()
        .enumerate()
        .filter(|(j, _)| !split.train.is_binary_column(*j))
        .map(|(_, name)| name.clone())
        .collect();
    let scaling = fit_standardizer(&split.train, &numeric)?;
    let train_scaled = apply_standardizer(&split.train, &scaling)?;
    let test_scaled = apply_standardizer(&split.test, &scaling)?;

    let (train_filtered, vif) = vif_filter(&train_scaled, vif_threshold)?;
    let keep: Vec<usize> = train_filtered
        .feature_names()
        .iter()
        .map(|name| {
            test_scaled
                .column_index(name)
                .ok_or_else(|| DataError::UnknownColumn(name.clone()))
        })
        .collect::<Result<_, _>>()?;
    let test_filtered = test_scaled.select_columns(&keep)?;

    Ok((
        SplitPair { train: train_filtered, test: test_filtered, seed, ratio },
        PreprocessReport { scaling, vif },
    ))
}
