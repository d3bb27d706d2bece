//! Dataset loading, min-max normalization, one-hot encoding, seeded splits,
//! and the two synthetic generators used by the bench suites.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Regression,
    Classification,
}

/// Per-column (min, max) recorded when a dataset is normalized, so test data
/// can reuse train statistics and predictions can be mapped back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormMeta {
    pub feature_ranges: Vec<(f64, f64)>,
    /// Empty for classification: one-hot targets are left untouched.
    pub target_ranges: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub x: Matrix,
    pub t: Matrix,
    pub task: Task,
    /// Sorted distinct labels, classification only; fixes one-hot column order.
    pub class_labels: Option<Vec<String>>,
    pub norm_meta: Option<NormMeta>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_count: usize,
    pub test_count: usize,
    pub shuffle_seed: u64,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn d(&self) -> usize {
        self.x.cols()
    }

    pub fn m(&self) -> usize {
        self.t.cols()
    }
}

fn column_range(m: &Matrix, j: usize) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m.rows() {
        lo = lo.min(m[(i, j)]);
        hi = hi.max(m[(i, j)]);
    }
    (lo, hi)
}

fn scale_column(m: &mut Matrix, j: usize, (lo, hi): (f64, f64)) {
    let span = hi - lo;
    for i in 0..m.rows() {
        m[(i, j)] = if span == 0.0 {
            0.0
        } else {
            (m[(i, j)] - lo) / span
        };
    }
}

impl NormMeta {
    /// Records per-column min/max of features, and of targets for regression.
    pub fn fit(ds: &Dataset) -> Result<NormMeta> {
        if ds.n() < 2 {
            return Err(Error::RejectedInput(
                "normalization needs at least 2 rows".into(),
            ));
        }
        let feature_ranges = (0..ds.d()).map(|j| column_range(&ds.x, j)).collect();
        let target_ranges = match ds.task {
            Task::Regression => (0..ds.m()).map(|j| column_range(&ds.t, j)).collect(),
            Task::Classification => Vec::new(),
        };
        Ok(NormMeta {
            feature_ranges,
            target_ranges,
        })
    }
}

/// Maps each feature column (and regression target column) to [0,1] with the
/// given statistics; constant columns map to 0.
pub fn apply_normalization(ds: &Dataset, meta: &NormMeta) -> Result<Dataset> {
    if meta.feature_ranges.len() != ds.d() {
        return Err(Error::DimensionMismatch(
            "normalization metadata does not match feature count".into(),
        ));
    }
    let mut x = ds.x.clone();
    for (j, r) in meta.feature_ranges.iter().enumerate() {
        scale_column(&mut x, j, *r);
    }
    let mut t = ds.t.clone();
    if ds.task == Task::Regression {
        if meta.target_ranges.len() != ds.m() {
            return Err(Error::DimensionMismatch(
                "normalization metadata does not match target count".into(),
            ));
        }
        for (j, r) in meta.target_ranges.iter().enumerate() {
            scale_column(&mut t, j, *r);
        }
    }
    Ok(Dataset {
        x,
        t,
        task: ds.task,
        class_labels: ds.class_labels.clone(),
        norm_meta: Some(meta.clone()),
    })
}

/// Fits statistics on `ds` itself and applies them.
pub fn minmax_normalize(ds: &Dataset) -> Result<Dataset> {
    let meta = NormMeta::fit(ds)?;
    apply_normalization(ds, &meta)
}

/// Inverse of `apply_normalization` on the target columns (regression only).
pub fn denormalize_targets(t: &Matrix, meta: &NormMeta) -> Result<Matrix> {
    if meta.target_ranges.len() != t.cols() {
        return Err(Error::DimensionMismatch(
            "denormalize: metadata does not match target count".into(),
        ));
    }
    let mut out = t.clone();
    for (j, (lo, hi)) in meta.target_ranges.iter().enumerate() {
        for i in 0..out.rows() {
            out[(i, j)] = lo + out[(i, j)] * (hi - lo);
        }
    }
    Ok(out)
}

/// One-hot matrix over the sorted distinct labels; returns the label order used.
pub fn one_hot_encode(labels: &[String]) -> Result<(Matrix, Vec<String>)> {
    if labels.is_empty() {
        return Err(Error::RejectedInput("no labels to encode".into()));
    }
    let mut distinct: Vec<String> = labels.to_vec();
    distinct.sort();
    distinct.dedup();
    let m = distinct.len();
    let mut out = Matrix::zeros(labels.len(), m);
    for (i, label) in labels.iter().enumerate() {
        let j = distinct.binary_search(label).expect("label in distinct set");
        out[(i, j)] = 1.0;
    }
    Ok((out, distinct))
}

fn take_rows(ds: &Dataset, idx: &[usize]) -> Dataset {
    let mut x = Matrix::zeros(idx.len(), ds.d());
    let mut t = Matrix::zeros(idx.len(), ds.m());
    for (out_i, &src_i) in idx.iter().enumerate() {
        for j in 0..ds.d() {
            x[(out_i, j)] = ds.x[(src_i, j)];
        }
        for j in 0..ds.m() {
            t[(out_i, j)] = ds.t[(src_i, j)];
        }
    }
    Dataset {
        x,
        t,
        task: ds.task,
        class_labels: ds.class_labels.clone(),
        norm_meta: ds.norm_meta.clone(),
    }
}

/// Seeded shuffle, then the first `train_count` rows train and the next
/// `test_count` rows test.
pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    if spec.train_count + spec.test_count > ds.n() {
        return Err(Error::RejectedInput(format!(
            "split wants {}+{} rows but dataset has {}",
            spec.train_count,
            spec.test_count,
            ds.n()
        )));
    }
    let mut idx: Vec<usize> = (0..ds.n()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.shuffle_seed);
    idx.shuffle(&mut rng);
    let train = take_rows(ds, &idx[..spec.train_count]);
    let test = take_rows(ds, &idx[spec.train_count..spec.train_count + spec.test_count]);
    Ok((train, test))
}

/// Loads a comma-separated file; the trailing `target_cols` columns are targets.
/// For classification the single target column holds class labels (numeric or
/// not) which are one-hot encoded in sorted label order.
pub fn load_csv(
    path: &Path,
    target_cols: usize,
    has_header: bool,
    task: Task,
) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let pathstr = path.display().to_string();
    if task == Task::Classification && target_cols != 1 {
        return Err(Error::Config(
            "classification expects exactly one target column of labels".into(),
        ));
    }
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    if has_header {
        lines.next();
    }

    let mut width: Option<usize> = None;
    let mut features: Vec<Vec<f64>> = Vec::new();
    let mut numeric_targets: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();

    for (line_no, line) in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let w = *width.get_or_insert(cells.len());
        if cells.len() != w {
            return Err(Error::Load {
                path: pathstr,
                row: line_no + 1,
                col: cells.len(),
                message: format!("expected {w} columns, found {}", cells.len()),
            });
        }
        if w <= target_cols {
            return Err(Error::Load {
                path: pathstr,
                row: line_no + 1,
                col: w,
                message: format!("{w} columns cannot hold {target_cols} targets plus features"),
            });
        }
        let d = w - target_cols;
        let mut row = Vec::with_capacity(d);
        for (j, cell) in cells[..d].iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Load {
                path: pathstr.clone(),
                row: line_no + 1,
                col: j + 1,
                message: format!("non-numeric feature cell '{cell}'"),
            })?;
            row.push(v);
        }
        features.push(row);
        match task {
            Task::Regression => {
                let mut trow = Vec::with_capacity(target_cols);
                for (j, cell) in cells[d..].iter().enumerate() {
                    let v: f64 = cell.parse().map_err(|_| Error::Load {
                        path: pathstr.clone(),
                        row: line_no + 1,
                        col: d + j + 1,
                        message: format!("non-numeric target cell '{cell}'"),
                    })?;
                    trow.push(v);
                }
                numeric_targets.push(trow);
            }
            Task::Classification => labels.push(cells[d].to_string()),
        }
    }
    if features.is_empty() {
        return Err(Error::Load {
            path: pathstr,
            row: 0,
            col: 0,
            message: "empty file".into(),
        });
    }
    let x = Matrix::from_rows(&features)?;
    match task {
        Task::Regression => Ok(Dataset {
            x,
            t: Matrix::from_rows(&numeric_targets)?,
            task,
            class_labels: None,
            norm_meta: None,
        }),
        Task::Classification => {
            let (t, order) = one_hot_encode(&labels)?;
            Ok(Dataset {
                x,
                t,
                task,
                class_labels: Some(order),
                norm_meta: None,
            })
        }
    }
}

/// y(x) = 0.2 e^{-(10x-4)^2} + 0.5 e^{-(80x-40)^2} + 0.3 e^{-(80x-20)^2}
pub fn scalar_function(x: f64) -> f64 {
    0.2 * (-(10.0 * x - 4.0).powi(2)).exp()
        + 0.5 * (-(80.0 * x - 40.0).powi(2)).exp()
        + 0.3 * (-(80.0 * x - 20.0).powi(2)).exp()
}

/// n seeded samples of the single-input spiky regression target, x ~ U[0,1].
pub fn gen_scalar_function(n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::RejectedInput("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Matrix::zeros(n, 1);
    let mut t = Matrix::zeros(n, 1);
    for i in 0..n {
        let xi: f64 = rng.random_range(0.0..1.0);
        x[(i, 0)] = xi;
        t[(i, 0)] = scalar_function(xi);
    }
    Ok(Dataset {
        x,
        t,
        task: Task::Regression,
        class_labels: None,
        norm_meta: None,
    })
}

/// The two-input, two-output target pair used for the multi-output bench.
pub fn multi_output_targets(x1: f64, x2: f64) -> (f64, f64) {
    let x3 = x1 + x2;
    let x4 = x1 - x2;
    let y1 = (2.0 * x1 * (std::f64::consts::PI * x4).sin() + (x2 * x3).sin()).exp();
    let y2 = (2.0 * x2 * (std::f64::consts::PI * x3).cos() + (x1 * x4).cos()).exp();
    (y1, y2)
}

/// n seeded samples with x1, x2 ~ N(-0.5, variance 0.2).
pub fn gen_multi_output(n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::RejectedInput("need at least one sample".into()));
    }
    let normal = Normal::new(-0.5, 0.2f64.sqrt()).expect("valid normal parameters");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Matrix::zeros(n, 2);
    let mut t = Matrix::zeros(n, 2);
    for i in 0..n {
        let x1 = normal.sample(&mut rng);
        let x2 = normal.sample(&mut rng);
        let (y1, y2) = multi_output_targets(x1, x2);
        x[(i, 0)] = x1;
        x[(i, 1)] = x2;
        t[(i, 0)] = y1;
        t[(i, 1)] = y2;
    }
    Ok(Dataset {
        x,
        t,
        task: Task::Regression,
        class_labels: None,
        norm_meta: None,
    })
}
