//! Incremental RVFLN baseline: one random node per step, accepted
//! unconditionally. Earlier output weights stay frozen; only the new node's
//! weights are computed, by projecting the current residual onto its
//! activation vector.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::inner;
use crate::metrics::residual_rmse;
use crate::network::{hidden_output, Activation, HiddenNode, NetworkModel};
use crate::report::TrialReport;
use crate::scn::draw_node;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IrvflnConfig {
    pub l_max: usize,
    /// Stop RMSE; 0 disables the stop and trains to l_max.
    pub epsilon: f64,
    /// Single fixed scope for weight and bias draws.
    pub lambda: f64,
    pub seed: u64,
}

impl IrvflnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lambda <= 0.0 {
            return Err(Error::Config("lambda must be positive".into()));
        }
        if self.epsilon < 0.0 {
            return Err(Error::Config("epsilon must be non-negative".into()));
        }
        Ok(())
    }
}

pub fn train_irvfln(ds: &Dataset, config: &IrvflnConfig) -> Result<(NetworkModel, TrialReport)> {
    config.validate()?;
    let start = std::time::Instant::now();
    let mut report = TrialReport::new("irvfln", config.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut nodes: Vec<HiddenNode> = Vec::new();
    let mut beta: Vec<Vec<f64>> = Vec::new();
    let mut residual = ds.t.clone();
    let mut rmse = residual_rmse(&residual);
    while nodes.len() < config.l_max && rmse > config.epsilon {
        let node = draw_node(&mut rng, ds.d(), config.lambda);
        let h = hidden_output(&node, &ds.x, Activation::Sigmoid)?;
        let hh = inner(&h, &h)?;
        let beta_row: Vec<f64> = if hh > 0.0 {
            (0..ds.m())
                .map(|q| inner(&residual.column(q), &h).map(|eh| eh / hh))
                .collect::<Result<_>>()?
        } else {
            vec![0.0; ds.m()]
        };
        residual.sub_outer(&h, &beta_row)?;
        nodes.push(node);
        beta.push(beta_row);
        rmse = residual_rmse(&residual);
        report.residual_history.push(rmse);
        report.accepted_lambdas.push(config.lambda);
    }
    report.nodes_used = nodes.len();
    report.train_rmse = rmse;
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    let model = NetworkModel {
        d: ds.d(),
        m: ds.m(),
        activation: Activation::Sigmoid,
        nodes,
        beta,
    };
    Ok((model, report))
}
