//! Multi-trial experiment execution: seeded trial fan-out, AVE/DEV
//! aggregation, and per-sample prediction variance across trials.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Task};
use crate::error::Result;
use crate::harness::config::AlgorithmSpec;
use crate::irvfln::train_irvfln;
use crate::linalg::Matrix;
use crate::metrics::{accuracy, rmse};
use crate::network::NetworkModel;
use crate::oscn::train_oscn;
use crate::report::TrialReport;
use crate::scn::train_scn;

/// Mean and population standard deviation over trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub ave: f64,
    pub dev: f64,
}

pub fn stats(values: &[f64]) -> Stats {
    if values.is_empty() {
        return Stats { ave: 0.0, dev: 0.0 };
    }
    let n = values.len() as f64;
    let ave = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - ave).powi(2)).sum::<f64>() / n;
    Stats {
        ave,
        dev: var.sqrt(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricSummary {
    pub nodes: Stats,
    pub train_rmse: Stats,
    pub test_rmse: Stats,
    pub train_accuracy: Option<Stats>,
    pub test_accuracy: Option<Stats>,
    /// Per-output test RMSE statistics (multi-output regression).
    pub test_rmse_per_output: Vec<Stats>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteResult {
    pub algorithm: String,
    pub trials: usize,
    pub base_seed: u64,
    pub failed_trials: usize,
    pub summary: MetricSummary,
    /// Variance across successful trials of each test-set prediction entry.
    pub per_sample_variance: Matrix,
    pub reports: Vec<TrialReport>,
}

fn rmse_per_output(pred: &Matrix, target: &Matrix) -> Result<Vec<f64>> {
    (0..target.cols())
        .map(|q| {
            let p = Matrix::from_columns(&[pred.column(q)])?;
            let t = Matrix::from_columns(&[target.column(q)])?;
            rmse(&p, &t)
        })
        .collect()
}

/// Runs one trial of the given algorithm and fills in test-side metrics.
pub fn run_single_trial(
    train: &Dataset,
    test: &Dataset,
    spec: &AlgorithmSpec,
) -> Result<(NetworkModel, TrialReport)> {
    let (model, mut report) = match spec {
        AlgorithmSpec::Irvfln(c) => train_irvfln(train, c)?,
        AlgorithmSpec::Scn(c) => train_scn(train, c)?,
        AlgorithmSpec::Oscn(c) => {
            let run = train_oscn(train, c)?;
            (run.model, run.report)
        }
    };
    let test_pred = model.predict(&test.x)?;
    report.test_rmse = Some(rmse(&test_pred, &test.t)?);
    report.test_rmse_per_output = rmse_per_output(&test_pred, &test.t)?;
    if train.task == Task::Classification {
        let train_pred = model.predict(&train.x)?;
        report.train_accuracy = Some(accuracy(&train_pred, &train.t)?);
        report.test_accuracy = Some(accuracy(&test_pred, &test.t)?);
    }
    Ok((model, report))
}

/// Trial t uses seed base_seed + t. Failed trials (flagged) are excluded from
/// AVE/DEV and the variance matrix but stay in the report list.
pub fn run_trials(
    train: &Dataset,
    test: &Dataset,
    spec: &AlgorithmSpec,
    trials: usize,
    base_seed: u64,
) -> Result<SuiteResult> {
    let mut reports = Vec::with_capacity(trials);
    let n = test.n();
    let m = test.m();
    let mut sum = Matrix::zeros(n, m);
    let mut sum_sq = Matrix::zeros(n, m);
    let mut ok_count = 0usize;
    for t in 0..trials {
        let seeded = spec.with_seed(base_seed + t as u64);
        let (model, report) = run_single_trial(train, test, &seeded)?;
        if !report.failed() {
            let pred = model.predict(&test.x)?;
            for i in 0..n {
                for j in 0..m {
                    let p = pred[(i, j)];
                    sum[(i, j)] += p;
                    sum_sq[(i, j)] += p * p;
                }
            }
            ok_count += 1;
        }
        reports.push(report);
    }
    let mut variance = Matrix::zeros(n, m);
    if ok_count > 0 {
        let k = ok_count as f64;
        for i in 0..n {
            for j in 0..m {
                let mean = sum[(i, j)] / k;
                variance[(i, j)] = (sum_sq[(i, j)] / k - mean * mean).max(0.0);
            }
        }
    }
    let summary = summarize(&reports);
    Ok(SuiteResult {
        algorithm: spec.name().to_string(),
        trials,
        base_seed,
        failed_trials: trials - ok_count,
        summary,
        per_sample_variance: variance,
        reports,
    })
}

/// Recomputes AVE/DEV from the per-trial report list (used both to build
/// SuiteResult and to verify shipped files are internally consistent).
pub fn summarize(reports: &[TrialReport]) -> MetricSummary {
    let ok: Vec<&TrialReport> = reports.iter().filter(|r| !r.failed()).collect();
    let collect = |f: &dyn Fn(&TrialReport) -> f64| -> Vec<f64> { ok.iter().map(|r| f(r)).collect() };
    let nodes = stats(&collect(&|r| r.nodes_used as f64));
    let train_rmse = stats(&collect(&|r| r.train_rmse));
    let test_rmse = stats(&collect(&|r| r.test_rmse.unwrap_or(f64::NAN)));
    let train_accuracy = ok
        .iter()
        .all(|r| r.train_accuracy.is_some())
        .then(|| stats(&collect(&|r| r.train_accuracy.unwrap())));
    let test_accuracy = ok
        .iter()
        .all(|r| r.test_accuracy.is_some())
        .then(|| stats(&collect(&|r| r.test_accuracy.unwrap())));
    let outputs = ok
        .first()
        .map(|r| r.test_rmse_per_output.len())
        .unwrap_or(0);
    let test_rmse_per_output = (0..outputs)
        .map(|q| stats(&collect(&|r| r.test_rmse_per_output[q])))
        .collect();
    MetricSummary {
        nodes,
        train_rmse,
        test_rmse,
        train_accuracy,
        test_accuracy,
        test_rmse_per_output,
    }
}

/// Grows to exactly `node_count` nodes (stop RMSE disabled); flags the report
/// if configuration failures end the run short.
pub fn run_fixed_nodes(
    train: &Dataset,
    test: &Dataset,
    spec: &AlgorithmSpec,
    node_count: usize,
    seed: u64,
) -> Result<(NetworkModel, TrialReport)> {
    let pinned = spec.with_fixed_nodes(node_count).with_seed(seed);
    let (model, mut report) = run_single_trial(train, test, &pinned)?;
    if report.nodes_used < node_count && report.flags.is_empty() {
        report
            .flags
            .push(format!("stopped at {} of {node_count} nodes", report.nodes_used));
    }
    Ok((model, report))
}

/// Residual histories as CSV, one row per trial, for external plotting.
pub fn residual_history_csv(result: &SuiteResult) -> String {
    let mut out = String::new();
    for report in &result.reports {
        let row: Vec<String> = report
            .residual_history
            .iter()
            .map(|v| format!("{v}"))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
