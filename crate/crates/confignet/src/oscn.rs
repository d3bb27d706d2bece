//! Orthogonalized stochastic configuration: candidates are Gram-Schmidt
//! orthogonalized against the accepted basis, near-collinear ones are
//! discarded by a norm threshold, survivors are scored by the
//! instrumental-variable test under adaptively tightening construction
//! parameters, and output weights come from the constructive projection
//! update, which on an orthogonal basis equals the global least-squares fit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{inner, ColumnVector, Matrix};
use crate::metrics::residual_rmse;
use crate::network::{finalize, hidden_output, Activation, HiddenNode, NetworkModel, OrthoState};
use crate::report::TrialReport;
use crate::scn::{draw_node, sc_xi};

/// How the scope-escalation increment is drawn when no candidate passes:
/// uniformly from the interval [(1-r)/2, 1-r), or from the two endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EscalationSampler {
    #[default]
    Interval,
    TwoPoint,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OscnConfig {
    pub l_max: usize,
    pub t_max: usize,
    /// Stop RMSE; 0 disables the stop and trains to l_max.
    pub epsilon: f64,
    /// Minimum orthogonalized norm below which a candidate is discarded.
    /// Compared against the unnormalized |v|, so it scales with sqrt(N).
    pub sigma: f64,
    pub lambda_grid: Vec<f64>,
    pub seed: u64,
    pub max_r_retries: usize,
    pub escalation: EscalationSampler,
}

impl OscnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sigma <= 0.0 {
            return Err(Error::Config("sigma must be positive".into()));
        }
        if self.epsilon < 0.0 {
            return Err(Error::Config("epsilon must be non-negative".into()));
        }
        if self.lambda_grid.is_empty() || self.lambda_grid.iter().any(|l| *l <= 0.0) {
            return Err(Error::Config("lambda grid must be non-empty positive".into()));
        }
        if self.t_max == 0 {
            return Err(Error::Config("t_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// Construction parameters in force while configuring node L.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveParams {
    pub l: usize,
    pub r: f64,
    pub mu: f64,
    pub tau: f64,
}

/// r = L/(L+1), mu = 1/(L+1)^2, tau = r + mu.
pub fn adaptive_params(l: usize) -> Result<AdaptiveParams> {
    if l == 0 {
        return Err(Error::RejectedInput("node index must be at least 1".into()));
    }
    let lf = l as f64;
    let r = lf / (lf + 1.0);
    let mu = 1.0 / ((lf + 1.0) * (lf + 1.0));
    Ok(AdaptiveParams {
        l,
        r,
        mu,
        tau: r + mu,
    })
}

/// Single classical Gram-Schmidt pass of h against the stored basis; returns
/// the orthogonal component and the projection coefficients in column order.
pub fn orthogonalize(h: &ColumnVector, basis: &[ColumnVector]) -> Result<(ColumnVector, Vec<f64>)> {
    let mut v = h.clone();
    let mut coeffs = Vec::with_capacity(basis.len());
    for u in basis {
        let uu = inner(u, u)?;
        if uu == 0.0 {
            return Err(Error::Inconsistent("stored basis vector has zero norm".into()));
        }
        let c = inner(u, h)? / uu;
        v.axpy_sub(c, u);
        coeffs.push(c);
    }
    Ok((v, coeffs))
}

/// One extra projection pass of v alone, applied when rounding has let the
/// new vector drift out of orthogonality with the stored basis.
fn reorthogonalize(v: &mut ColumnVector, coeffs: &mut [f64], basis: &[ColumnVector]) -> Result<()> {
    for (u, c) in basis.iter().zip(coeffs.iter_mut()) {
        let correction = inner(u, v)? / inner(u, u)?;
        v.axpy_sub(correction, u);
        *c += correction;
    }
    Ok(())
}

fn max_cos_against(v: &ColumnVector, basis: &[ColumnVector]) -> f64 {
    let vn = v.norm();
    if vn == 0.0 {
        return 0.0;
    }
    basis
        .iter()
        .map(|u| {
            let un = u.norm();
            if un == 0.0 {
                0.0
            } else {
                (inner(u, v).expect("equal lengths") / (un * vn)).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Instrumental-variable score of an orthogonalized candidate.
pub fn xi_score(
    v: &ColumnVector,
    residual: &Matrix,
    params: &AdaptiveParams,
) -> Result<(Vec<f64>, f64)> {
    sc_xi(v, residual, params.r, params.mu)
}

/// Constructive weight row: beta_q = <e_q, v> / <v, v>.
pub fn beta_update(residual: &Matrix, v: &ColumnVector) -> Result<Vec<f64>> {
    let vv = inner(v, v)?;
    if vv == 0.0 {
        return Err(Error::RejectedInput("zero orthogonal vector".into()));
    }
    (0..residual.cols())
        .map(|q| inner(&residual.column(q), v).map(|ev| ev / vv))
        .collect()
}

/// Residual-energy ceiling after L supervised steps:
/// (2/(L+2)) exp(L/(L+1)) * |e_0|^2.
pub fn error_bound(l: usize, e0_sq: f64) -> f64 {
    let lf = l as f64;
    2.0 / (lf + 2.0) * (lf / (lf + 1.0)).exp() * e0_sq
}

/// A configured node accepted by the supervisory mechanism.
#[derive(Debug, Clone)]
pub struct AcceptedNode {
    pub node: HiddenNode,
    pub v: ColumnVector,
    pub coeffs: Vec<f64>,
    pub lambda: f64,
    pub xi_total: f64,
    /// Parameters actually in force at acceptance (after any escalation).
    pub params: AdaptiveParams,
    pub escalations: usize,
}

/// Draws and orthogonalizes candidates over the scope grid, keeping those with
/// |v| >= sigma and min_q xi_q >= 0, and returns the xi-total maximizer.
/// When the pool is empty the contraction rate r is escalated and the grid is
/// retried, up to `max_r_retries` times.
pub fn configure_node_oscn(
    x: &Matrix,
    state: &OrthoState,
    config: &OscnConfig,
    params: AdaptiveParams,
    rng: &mut ChaCha8Rng,
) -> Result<AcceptedNode> {
    let mut params = params;
    let mut attempts = 0;
    let mut best_xi_seen = f64::NEG_INFINITY;
    let mut best_v_norm = 0.0f64;
    let mut escalations = 0;
    loop {
        let mut best: Option<AcceptedNode> = None;
        for &lambda in &config.lambda_grid {
            for _ in 0..config.t_max {
                attempts += 1;
                let node = draw_node(rng, x.cols(), lambda);
                let h = hidden_output(&node, x, Activation::Sigmoid)?;
                let (mut v, mut coeffs) = orthogonalize(&h, state.basis())?;
                if max_cos_against(&v, state.basis()) > 1e-10 {
                    reorthogonalize(&mut v, &mut coeffs, state.basis())?;
                }
                let vnorm = v.norm();
                best_v_norm = best_v_norm.max(vnorm);
                if vnorm < config.sigma {
                    continue; // redundant / low-quality direction
                }
                let (xi_per_output, xi_total) = xi_score(&v, state.residual(), &params)?;
                let xi_min = xi_per_output.iter().cloned().fold(f64::INFINITY, f64::min);
                best_xi_seen = best_xi_seen.max(xi_min);
                if xi_min >= 0.0 && best.as_ref().is_none_or(|b| xi_total > b.xi_total) {
                    best = Some(AcceptedNode {
                        node,
                        v,
                        coeffs,
                        lambda,
                        xi_total,
                        params,
                        escalations,
                    });
                }
            }
        }
        if let Some(found) = best {
            return Ok(found);
        }
        if escalations >= config.max_r_retries {
            return Err(Error::ConfigurationFailure {
                attempts,
                best_xi: best_xi_seen,
                best_v_norm,
            });
        }
        // escalate r and retry the full grid
        let gap = 1.0 - params.r;
        let step = match config.escalation {
            EscalationSampler::Interval => rng.random_range(gap / 2.0..gap),
            EscalationSampler::TwoPoint => {
                if rng.random_bool(0.5) {
                    gap / 2.0
                } else {
                    gap
                }
            }
        };
        params.r = (params.r + step).min(1.0 - 1e-12);
        params.mu = (1.0 - params.r) / (params.l as f64 + 1.0);
        params.tau = params.r + params.mu;
        escalations += 1;
    }
}

/// One finished training run: the deployable model, the per-trial record, and
/// the orthogonal training state kept for inspection.
#[derive(Debug, Clone)]
pub struct OscnRun {
    pub model: NetworkModel,
    pub report: TrialReport,
    pub state: OrthoState,
    pub nodes: Vec<HiddenNode>,
}

/// Full construction loop: configure, weight, update residual, audit the
/// orthogonality/contraction invariants, and finalize into raw-basis weights.
pub fn train_oscn(ds: &Dataset, config: &OscnConfig) -> Result<OscnRun> {
    config.validate()?;
    let start = std::time::Instant::now();
    let mut report = TrialReport::new("oscn", config.seed);
    let mut state = OrthoState::new(ds.t.clone());
    let mut nodes: Vec<HiddenNode> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let e0_sq = state.residual().frob_norm().powi(2);
    let mut rmse = residual_rmse(state.residual());
    while state.len() < config.l_max && rmse > config.epsilon {
        let params = adaptive_params(state.len() + 1)?;
        match configure_node_oscn(&ds.x, &state, config, params, &mut rng) {
            Ok(acc) => {
                let prev_sq = state.residual().frob_norm().powi(2);
                let beta_row = beta_update(state.residual(), &acc.v)?;
                let worst_cos = max_cos_against(&acc.v, state.basis());
                state.push(acc.v, acc.coeffs, beta_row)?;
                nodes.push(acc.node);
                let cur_sq = state.residual().frob_norm().powi(2);
                report.escalation_events += acc.escalations;
                // Eq.-style contraction with the in-force parameters
                if cur_sq > acc.params.tau * prev_sq + 1e-12 * prev_sq.max(1.0) {
                    report.flags.push(format!(
                        "contraction violated at node {}: {cur_sq:.6e} > {:.6e}",
                        state.len(),
                        acc.params.tau * prev_sq
                    ));
                }
                if worst_cos > 1e-9 {
                    report.flags.push(format!(
                        "basis orthogonality violated at node {}: cos {worst_cos:.3e}",
                        state.len()
                    ));
                }
                let bound = error_bound(state.len(), e0_sq);
                report.bound_trace.push(bound);
                if report.escalation_events == 0 && cur_sq > bound * (1.0 + 1e-9) {
                    report.warnings.push(format!(
                        "residual bound exceeded at node {}: {cur_sq:.6e} > {bound:.6e}",
                        state.len()
                    ));
                }
                report.accepted_lambdas.push(acc.lambda);
                rmse = residual_rmse(state.residual());
                report.residual_history.push(rmse);
            }
            Err(Error::ConfigurationFailure {
                attempts,
                best_xi,
                best_v_norm,
            }) => {
                report.flags.push(format!(
                    "configuration failure at node {} after {attempts} candidates (best xi {best_xi:.3e}, best |v| {best_v_norm:.3e})",
                    state.len() + 1
                ));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if state.max_residual_cos() > 1e-8 {
        report.flags.push(format!(
            "residual-to-basis orthogonality violated: cos {:.3e}",
            state.max_residual_cos()
        ));
    }
    report.nodes_used = state.len();
    report.train_rmse = rmse;
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    let model = finalize(&state, &nodes, Activation::Sigmoid, ds.d(), ds.m())?;
    Ok(OscnRun {
        model,
        report,
        state,
        nodes,
    })
}
