//! Baseline stochastic configuration training: supervised candidate
//! acceptance on raw activation vectors and the three output-weight schemes
//! (new-node-only, sliding-window refit, global refit).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{inner, lstsq_pinv, ColumnVector, Matrix};
use crate::metrics::residual_rmse;
use crate::network::{hidden_output, Activation, HiddenNode, NetworkModel};
use crate::report::TrialReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Sc1,
    Sc2,
    Sc3,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScnConfig {
    pub l_max: usize,
    /// Candidates drawn per scope value.
    pub t_max: usize,
    /// Stop RMSE; 0 disables the stop and trains to l_max.
    pub epsilon: f64,
    pub lambda_grid: Vec<f64>,
    pub r: f64,
    pub scheme: Scheme,
    /// Sliding-window size, Sc2 only.
    pub window: usize,
    pub seed: u64,
}

impl ScnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.r && self.r < 1.0) {
            return Err(Error::Config(format!("r must be in (0,1), got {}", self.r)));
        }
        if self.lambda_grid.is_empty() || self.lambda_grid.iter().any(|l| *l <= 0.0) {
            return Err(Error::Config("lambda grid must be non-empty positive".into()));
        }
        if self.epsilon < 0.0 {
            return Err(Error::Config("epsilon must be non-negative".into()));
        }
        if self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        if self.t_max == 0 {
            return Err(Error::Config("t_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// A candidate that passed the supervisory test.
#[derive(Debug, Clone)]
pub struct CandidateRecord {
    pub node: HiddenNode,
    pub h: ColumnVector,
    pub lambda: f64,
    pub xi_per_output: Vec<f64>,
    pub xi_total: f64,
    pub xi_min: f64,
}

/// Draws one random node: d weight entries then the bias, each uniform on
/// [-lambda, lambda]. This draw order is fixed so runs are reproducible.
pub fn draw_node(rng: &mut ChaCha8Rng, d: usize, lambda: f64) -> HiddenNode {
    let w = (0..d).map(|_| rng.random_range(-lambda..=lambda)).collect();
    let b = rng.random_range(-lambda..=lambda);
    HiddenNode { w, b }
}

/// Instrumental-variable score of a raw candidate activation against the
/// current residual: xi_q = <e_q,h>^2/<h,h> - (1-r-mu) <e_q,e_q>.
pub fn sc_xi(h: &ColumnVector, residual: &Matrix, r: f64, mu: f64) -> Result<(Vec<f64>, f64)> {
    let hh = inner(h, h)?;
    if hh == 0.0 {
        return Err(Error::RejectedInput("zero candidate activation".into()));
    }
    if h.len() != residual.rows() {
        return Err(Error::DimensionMismatch(
            "candidate length does not match residual rows".into(),
        ));
    }
    let threshold = 1.0 - r - mu;
    let mut per_output = Vec::with_capacity(residual.cols());
    for q in 0..residual.cols() {
        let e_q = residual.column(q);
        let eh = inner(&e_q, h)?;
        let ee = inner(&e_q, &e_q)?;
        per_output.push(eh * eh / hh - threshold * ee);
    }
    let total = per_output.iter().sum();
    Ok((per_output, total))
}

/// Incremental SCN training state: accepted nodes, their raw activation
/// columns, output weights, and the running residual.
#[derive(Debug, Clone)]
pub struct ScnState {
    pub nodes: Vec<HiddenNode>,
    pub h_cols: Vec<ColumnVector>,
    pub beta: Vec<Vec<f64>>,
    pub residual: Matrix,
    targets: Matrix,
}

impl ScnState {
    pub fn new(targets: Matrix) -> Self {
        ScnState {
            nodes: Vec::new(),
            h_cols: Vec::new(),
            beta: Vec::new(),
            residual: targets.clone(),
            targets,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn targets(&self) -> &Matrix {
        &self.targets
    }
}

/// Draws candidates over the full scope grid and returns the passing one with
/// the largest xi total (first maximum wins on ties).
pub fn configure_node_scn(
    x: &Matrix,
    state: &ScnState,
    config: &ScnConfig,
    rng: &mut ChaCha8Rng,
) -> Result<CandidateRecord> {
    let l = state.len() + 1;
    let mu = (1.0 - config.r) / (l as f64 + 1.0);
    let mut best: Option<CandidateRecord> = None;
    let mut best_xi_seen = f64::NEG_INFINITY;
    let mut best_h_norm = 0.0f64;
    let mut attempts = 0;
    for &lambda in &config.lambda_grid {
        for _ in 0..config.t_max {
            attempts += 1;
            let node = draw_node(rng, x.cols(), lambda);
            let h = hidden_output(&node, x, Activation::Sigmoid)?;
            let (xi_per_output, xi_total) = sc_xi(&h, &state.residual, config.r, mu)?;
            let xi_min = xi_per_output.iter().cloned().fold(f64::INFINITY, f64::min);
            best_xi_seen = best_xi_seen.max(xi_min);
            best_h_norm = best_h_norm.max(h.norm());
            if xi_min >= 0.0 && best.as_ref().is_none_or(|b| xi_total > b.xi_total) {
                best = Some(CandidateRecord {
                    node,
                    h,
                    lambda,
                    xi_per_output,
                    xi_total,
                    xi_min,
                });
            }
        }
    }
    best.ok_or(Error::ConfigurationFailure {
        attempts,
        best_xi: best_xi_seen,
        best_v_norm: best_h_norm,
    })
}

/// SC-I: weight only the new column by projection, prior rows untouched.
pub fn update_weights_sc1(state: &mut ScnState, cand: CandidateRecord) -> Result<()> {
    let hh = inner(&cand.h, &cand.h)?;
    let beta_row: Vec<f64> = (0..state.residual.cols())
        .map(|q| inner(&state.residual.column(q), &cand.h).map(|eh| eh / hh))
        .collect::<Result<_>>()?;
    state.residual.sub_outer(&cand.h, &beta_row)?;
    state.nodes.push(cand.node);
    state.h_cols.push(cand.h);
    state.beta.push(beta_row);
    Ok(())
}

/// SC-II: least-squares refit of the last min(window, L) columns against the
/// residual left by the frozen older nodes.
pub fn update_weights_sc2(state: &mut ScnState, cand: CandidateRecord, window: usize) -> Result<()> {
    state.nodes.push(cand.node);
    state.h_cols.push(cand.h);
    state.beta.push(vec![0.0; state.targets.cols()]);
    let l = state.len();
    let k = window.min(l);
    let frozen = l - k;
    let mut partial = state.targets.clone();
    for j in 0..frozen {
        partial.sub_outer(&state.h_cols[j], &state.beta[j].clone())?;
    }
    let h_win = Matrix::from_columns(&state.h_cols[frozen..])?;
    let beta_win = lstsq_pinv(&h_win, &partial)?;
    for j in 0..k {
        state.beta[frozen + j] = beta_win.row(j).to_vec();
    }
    state.residual = partial.sub(&h_win.matmul(&beta_win)?)?;
    Ok(())
}

/// SC-III: global least-squares refit over all accepted columns.
pub fn update_weights_sc3(state: &mut ScnState, cand: CandidateRecord) -> Result<()> {
    state.nodes.push(cand.node);
    state.h_cols.push(cand.h);
    let h_all = Matrix::from_columns(&state.h_cols)?;
    let beta = lstsq_pinv(&h_all, &state.targets)?;
    state.beta = (0..beta.rows()).map(|i| beta.row(i).to_vec()).collect();
    state.residual = state.targets.sub(&h_all.matmul(&beta)?)?;
    Ok(())
}

fn apply_scheme(state: &mut ScnState, cand: CandidateRecord, config: &ScnConfig) -> Result<()> {
    match config.scheme {
        Scheme::Sc1 => update_weights_sc1(state, cand),
        Scheme::Sc2 => update_weights_sc2(state, cand, config.window),
        Scheme::Sc3 => update_weights_sc3(state, cand),
    }
}

/// Configure/update loop until RMSE <= epsilon or l_max nodes.
pub fn train_scn(ds: &Dataset, config: &ScnConfig) -> Result<(NetworkModel, TrialReport)> {
    config.validate()?;
    let start = std::time::Instant::now();
    let scheme_name = match config.scheme {
        Scheme::Sc1 => "sc1",
        Scheme::Sc2 => "sc2",
        Scheme::Sc3 => "sc3",
    };
    let mut report = TrialReport::new(scheme_name, config.seed);
    let mut state = ScnState::new(ds.t.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rmse = residual_rmse(&state.residual);
    while state.len() < config.l_max && rmse > config.epsilon {
        match configure_node_scn(&ds.x, &state, config, &mut rng) {
            Ok(cand) => {
                report.accepted_lambdas.push(cand.lambda);
                apply_scheme(&mut state, cand, config)?;
                rmse = residual_rmse(&state.residual);
                report.residual_history.push(rmse);
            }
            Err(Error::ConfigurationFailure {
                attempts,
                best_xi,
                best_v_norm: _,
            }) => {
                report.flags.push(format!(
                    "configuration failure at node {} after {attempts} candidates (best xi {best_xi:.3e})",
                    state.len() + 1
                ));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    report.nodes_used = state.len();
    report.train_rmse = rmse;
    if ds.task == crate::dataset::Task::Classification {
        report.train_accuracy = None; // filled by the harness from predictions
    }
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    let model = NetworkModel {
        d: ds.d(),
        m: ds.m(),
        activation: Activation::Sigmoid,
        nodes: state.nodes.clone(),
        beta: state.beta.clone(),
    };
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Task;

    fn cv(v: &[f64]) -> ColumnVector {
        ColumnVector::from_vec(v.to_vec()).unwrap()
    }

    fn col_matrix(v: &[f64]) -> Matrix {
        Matrix::from_columns(&[cv(v)]).unwrap()
    }

    #[test]
    fn xi_direct_evaluation() {
        // e=[1,0], h=[1,0], r=0.5, mu=0.25 -> xi = 1 - 0.25 = 0.75
        let (per, total) = sc_xi(&cv(&[1.0, 0.0]), &col_matrix(&[1.0, 0.0]), 0.5, 0.25).unwrap();
        assert!((per[0] - 0.75).abs() < 1e-15);
        assert!((total - 0.75).abs() < 1e-15);
    }

    #[test]
    fn xi_orthogonal_candidate_fails() {
        let (per, _) = sc_xi(&cv(&[0.0, 1.0]), &col_matrix(&[1.0, 0.0]), 0.5, 0.1).unwrap();
        assert!((per[0] + 0.4).abs() < 1e-15);
        assert!(per[0] < 0.0);
    }

    #[test]
    fn xi_collinear_candidate_passes() {
        let (per, _) = sc_xi(&cv(&[2.0, 4.0]), &col_matrix(&[1.0, 2.0]), 0.5, 0.1).unwrap();
        // e = c h: xi = (r+mu) ||e||^2
        assert!((per[0] - 0.6 * 5.0).abs() < 1e-12);
    }

    #[test]
    fn xi_rejects_zero_candidate() {
        assert!(sc_xi(&cv(&[0.0, 0.0]), &col_matrix(&[1.0, 0.0]), 0.5, 0.1).is_err());
    }

    #[test]
    fn xi_matches_inequality_form() {
        // the xi >= 0 test must agree with the raw inequality
        // <e,h>^2 >= (1-r-mu) ||h||^2 ||e||^2 on accepted and rejected draws
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let n = 8;
            let h = cv(&(0..n)
                .map(|_| rng.random_range(0.01..1.0))
                .collect::<Vec<_>>());
            let e = cv(&(0..n)
                .map(|_| rng.random_range(-1.0..1.0))
                .collect::<Vec<_>>());
            let res = Matrix::from_columns(std::slice::from_ref(&e)).unwrap();
            let r = rng.random_range(0.1..0.99);
            let mu = rng.random_range(0.0..(1.0 - r));
            let (per, _) = sc_xi(&h, &res, r, mu).unwrap();
            let lhs = inner(&e, &h).unwrap().powi(2);
            let rhs = (1.0 - r - mu) * inner(&h, &h).unwrap() * inner(&e, &e).unwrap();
            assert_eq!(per[0] >= 0.0, lhs >= rhs || (lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn mu_sequence_decreases() {
        let r = 0.999;
        let mut prev = f64::INFINITY;
        for l in 1..1000 {
            let mu = (1.0 - r) / (l as f64 + 1.0);
            assert!(mu < prev && mu > 0.0);
            prev = mu;
        }
    }

    #[test]
    fn sc1_exact_fit_and_orthogonal_noop() {
        let mut state = ScnState::new(col_matrix(&[2.0, 0.0]));
        let cand = CandidateRecord {
            node: HiddenNode {
                w: vec![0.0],
                b: 0.0,
            },
            h: cv(&[1.0, 0.0]),
            lambda: 1.0,
            xi_per_output: vec![1.0],
            xi_total: 1.0,
            xi_min: 1.0,
        };
        update_weights_sc1(&mut state, cand).unwrap();
        assert!((state.beta[0][0] - 2.0).abs() < 1e-15);
        assert!(state.residual.frob_norm() < 1e-15);

        let mut state = ScnState::new(col_matrix(&[0.0, 3.0]));
        let cand = CandidateRecord {
            node: HiddenNode {
                w: vec![0.0],
                b: 0.0,
            },
            h: cv(&[1.0, 0.0]),
            lambda: 1.0,
            xi_per_output: vec![0.0],
            xi_total: 0.0,
            xi_min: 0.0,
        };
        update_weights_sc1(&mut state, cand).unwrap();
        assert_eq!(state.beta[0][0], 0.0);
        assert!((state.residual.frob_norm() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn sc1_residual_orthogonal_to_new_column_and_nonincreasing() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 20;
        let t = Matrix::from_vec(n, 2, (0..2 * n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .unwrap();
        let mut state = ScnState::new(t);
        let mut prev = state.residual.frob_norm();
        for step in 0..100 {
            let h = cv(&(0..n)
                .map(|_| rng.random_range(0.01..1.0))
                .collect::<Vec<_>>());
            let cand = CandidateRecord {
                node: HiddenNode {
                    w: vec![step as f64],
                    b: 0.0,
                },
                h: h.clone(),
                lambda: 1.0,
                xi_per_output: vec![],
                xi_total: 0.0,
                xi_min: 0.0,
            };
            update_weights_sc1(&mut state, cand).unwrap();
            let cur = state.residual.frob_norm();
            assert!(cur <= prev + 1e-12);
            prev = cur;
            for q in 0..2 {
                let ip = inner(&state.residual.column(q), &h).unwrap();
                assert!(ip.abs() <= 1e-9 * cur.max(1.0) * h.norm());
            }
        }
    }

    // Replays the same accepted column sequence through all three schemes.
    fn replay_schemes(seed: u64, l: usize) -> (f64, f64, f64, ScnState, ScnState, ScnState) {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 30;
        let t = Matrix::from_vec(n, 1, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .unwrap();
        let mut s1 = ScnState::new(t.clone());
        let mut s2 = ScnState::new(t.clone());
        let mut s3 = ScnState::new(t);
        for step in 0..l {
            let h = cv(&(0..n)
                .map(|_| rng.random_range(0.01..1.0))
                .collect::<Vec<_>>());
            let mk = || CandidateRecord {
                node: HiddenNode {
                    w: vec![step as f64],
                    b: 0.0,
                },
                h: h.clone(),
                lambda: 1.0,
                xi_per_output: vec![],
                xi_total: 0.0,
                xi_min: 0.0,
            };
            update_weights_sc1(&mut s1, mk()).unwrap();
            update_weights_sc2(&mut s2, mk(), 5).unwrap();
            update_weights_sc3(&mut s3, mk()).unwrap();
        }
        (
            s1.residual.frob_norm(),
            s2.residual.frob_norm(),
            s3.residual.frob_norm(),
            s1,
            s2,
            s3,
        )
    }

    #[test]
    fn scheme_dominance_on_shared_columns() {
        for seed in 0..20 {
            let (r1, r2, r3, ..) = replay_schemes(seed, 12);
            assert!(r3 <= r2 + 1e-9, "seed {seed}: sc3 {r3} > sc2 {r2}");
            assert!(r2 <= r1 + 1e-9, "seed {seed}: sc2 {r2} > sc1 {r1}");
        }
    }

    #[test]
    fn sc2_window_extremes_match_sc1_and_sc3() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 15;
        let t = Matrix::from_vec(n, 1, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .unwrap();
        let mut a = ScnState::new(t.clone());
        let mut b = ScnState::new(t.clone());
        let mut c = ScnState::new(t.clone());
        let mut d = ScnState::new(t);
        for step in 0..6 {
            let h = cv(&(0..n)
                .map(|_| rng.random_range(0.01..1.0))
                .collect::<Vec<_>>());
            let mk = || CandidateRecord {
                node: HiddenNode {
                    w: vec![step as f64],
                    b: 0.0,
                },
                h: h.clone(),
                lambda: 1.0,
                xi_per_output: vec![],
                xi_total: 0.0,
                xi_min: 0.0,
            };
            // window covering everything behaves as the global refit
            update_weights_sc2(&mut a, mk(), 100).unwrap();
            update_weights_sc3(&mut b, mk()).unwrap();
            // window of one behaves as the constructive update
            update_weights_sc2(&mut c, mk(), 1).unwrap();
            update_weights_sc1(&mut d, mk()).unwrap();
        }
        assert!(a.residual.sub(&b.residual).unwrap().frob_norm() < 1e-9);
        assert!(c.residual.sub(&d.residual).unwrap().frob_norm() < 1e-9);
    }

    #[test]
    fn sc3_pinv_oracle_is_column_order_invariant() {
        let (_, _, r3, _, _, s3) = replay_schemes(3, 8);
        // recompute the global fit on shuffled column order
        let mut cols = s3.h_cols.clone();
        cols.reverse();
        let h = Matrix::from_columns(&cols).unwrap();
        let beta = lstsq_pinv(&h, s3.targets()).unwrap();
        let res = s3
            .targets()
            .sub(&h.matmul(&beta).unwrap())
            .unwrap()
            .frob_norm();
        assert!((res - r3).abs() <= 1e-9 * (1.0 + r3));
    }

    #[test]
    fn duplicate_column_leaves_sc3_residual_unchanged() {
        let (_, _, _, _, _, mut s3) = replay_schemes(9, 4);
        let before = s3.residual.frob_norm();
        let dup = s3.h_cols[1].clone();
        let cand = CandidateRecord {
            node: HiddenNode {
                w: vec![99.0],
                b: 0.0,
            },
            h: dup,
            lambda: 1.0,
            xi_per_output: vec![],
            xi_total: 0.0,
            xi_min: 0.0,
        };
        update_weights_sc3(&mut s3, cand).unwrap();
        assert!((s3.residual.frob_norm() - before).abs() < 1e-9);
    }

    fn planted_dataset() -> Dataset {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 60;
        let x = Matrix::from_vec(n, 1, (0..n).map(|_| rng.random_range(0.0..1.0)).collect())
            .unwrap();
        let node = HiddenNode {
            w: vec![5.0],
            b: -2.5,
        };
        let h = hidden_output(&node, &x, Activation::Sigmoid).unwrap();
        let t = Matrix::from_columns(&[cv(&h.data().iter().map(|v| 2.0 * v).collect::<Vec<_>>())])
            .unwrap();
        Dataset {
            x,
            t,
            task: Task::Regression,
            class_labels: None,
            norm_meta: None,
        }
    }

    #[test]
    fn planted_node_is_recovered() {
        let ds = planted_dataset();
        let config = ScnConfig {
            l_max: 5,
            t_max: 50,
            epsilon: 0.02,
            lambda_grid: vec![5.0, 10.0],
            r: 0.999,
            scheme: Scheme::Sc3,
            window: 10,
            seed: 1,
        };
        let state = ScnState::new(ds.t.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let cand = configure_node_scn(&ds.x, &state, &config, &mut rng).unwrap();
        assert!(cand.xi_total > 0.0);
    }

    #[test]
    fn vanishing_threshold_accepts_correlated_candidates() {
        // as r -> 1 the threshold (1-r-mu) <= 0, so any candidate with
        // nonzero <e,h> passes
        let e = col_matrix(&[1.0, 2.0, -0.5]);
        let h = cv(&[0.3, 0.1, 0.9]);
        let r = 1.0 - 1e-12;
        let mu = (1.0 - r) / 2.0;
        let (per, _) = sc_xi(&h, &e, r, mu).unwrap();
        assert!(per[0] >= 0.0);
    }

    #[test]
    fn zero_target_returns_empty_model() {
        let ds = Dataset {
            x: Matrix::from_rows(&[vec![0.1], vec![0.2]]).unwrap(),
            t: Matrix::zeros(2, 1),
            task: Task::Regression,
            class_labels: None,
            norm_meta: None,
        };
        let config = ScnConfig {
            l_max: 10,
            t_max: 5,
            epsilon: 0.05,
            lambda_grid: vec![1.0],
            r: 0.999,
            scheme: Scheme::Sc1,
            window: 10,
            seed: 0,
        };
        let (model, report) = train_scn(&ds, &config).unwrap();
        assert_eq!(model.node_count(), 0);
        assert_eq!(report.nodes_used, 0);
        assert!(report.flags.is_empty());
    }

    #[test]
    fn training_residual_history_is_nonincreasing() {
        let ds = planted_dataset();
        for scheme in [Scheme::Sc1, Scheme::Sc3] {
            let config = ScnConfig {
                l_max: 15,
                t_max: 10,
                epsilon: 1e-6,
                lambda_grid: vec![2.0, 5.0, 10.0],
                r: 0.999,
                scheme,
                window: 10,
                seed: 3,
            };
            let (_, report) = train_scn(&ds, &config).unwrap();
            for w in report.residual_history.windows(2) {
                assert!(w[1] <= w[0] + 1e-12);
            }
        }
    }

    #[test]
    fn training_is_deterministic() {
        let ds = planted_dataset();
        let config = ScnConfig {
            l_max: 8,
            t_max: 10,
            epsilon: 1e-4,
            lambda_grid: vec![2.0, 5.0],
            r: 0.999,
            scheme: Scheme::Sc3,
            window: 10,
            seed: 13,
        };
        let (m1, r1) = train_scn(&ds, &config).unwrap();
        let (m2, r2) = train_scn(&ds, &config).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(r1.residual_history, r2.residual_history);
    }
}
