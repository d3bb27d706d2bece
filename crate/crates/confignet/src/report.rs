//! Per-trial training record shared by all three trainers.

use serde::{Deserialize, Serialize};

/// One training run's record: residual trajectory, final metrics, and any
/// failure annotations. Wall-clock time is kept for display but excluded from
/// serialized reports so report files are byte-reproducible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialReport {
    pub algorithm: String,
    pub seed: u64,
    pub nodes_used: usize,
    /// Training RMSE after each accepted node.
    pub residual_history: Vec<f64>,
    pub train_rmse: f64,
    pub test_rmse: Option<f64>,
    /// Test RMSE split by output column (empty until evaluated on a test set).
    #[serde(default)]
    pub test_rmse_per_output: Vec<f64>,
    pub train_accuracy: Option<f64>,
    pub test_accuracy: Option<f64>,
    /// Scope value whose candidate won, per accepted node (SCN/OSCN).
    pub accepted_lambdas: Vec<f64>,
    /// Residual-bound ceiling trace, valid while no escalation occurred (OSCN).
    pub bound_trace: Vec<f64>,
    pub escalation_events: usize,
    pub flags: Vec<String>,
    /// Diagnostics that do not fail the trial (e.g. bound-trace exceedances).
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub wall_time_seconds: f64,
}

impl TrialReport {
    pub fn new(algorithm: &str, seed: u64) -> Self {
        TrialReport {
            algorithm: algorithm.to_string(),
            seed,
            nodes_used: 0,
            residual_history: Vec::new(),
            train_rmse: 0.0,
            test_rmse: None,
            test_rmse_per_output: Vec::new(),
            train_accuracy: None,
            test_accuracy: None,
            accepted_lambdas: Vec::new(),
            bound_trace: Vec::new(),
            escalation_events: 0,
            flags: Vec::new(),
            warnings: Vec::new(),
            wall_time_seconds: 0.0,
        }
    }

    pub fn failed(&self) -> bool {
        !self.flags.is_empty()
    }
}
