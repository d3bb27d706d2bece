//! Acceptance gate: ten criteria, one pass/fail line each.
//!
//! Criteria 1-5 are statistical (50 seeded trials each); 6-10 are exact or
//! tolerance-bounded properties. Heavy shared runs are computed once.

use std::path::Path;
use std::sync::OnceLock;

use confignet::dataset::{
    apply_normalization, gen_multi_output, gen_scalar_function, load_csv, minmax_normalize,
    split, Dataset, NormMeta, SplitSpec, Task,
};
use confignet::harness::config::{parse_scope, AlgorithmSpec};
use confignet::harness::suites::{run_suite, BenchOptions};
use confignet::harness::trials::{run_trials, SuiteResult};
use confignet::irvfln::IrvflnConfig;
use confignet::linalg::{lstsq_pinv, Matrix};
use confignet::network::{activation_matrix, Activation, NetworkModel};
use confignet::oscn::{error_bound, train_oscn, EscalationSampler, OscnConfig};
use confignet::scn::{Scheme, ScnConfig};

const TRIALS: usize = 50;
const BASE_SEED: u64 = 0;

fn verdict(criterion: usize, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn oscn_config(l_max: usize, t_max: usize, epsilon: f64, sigma: f64, grid: &str) -> OscnConfig {
    OscnConfig {
        l_max,
        t_max,
        epsilon,
        sigma,
        lambda_grid: parse_scope(grid).unwrap(),
        seed: 0,
        max_r_retries: 8,
        escalation: EscalationSampler::Interval,
    }
}

fn scn_config(l_max: usize, t_max: usize, epsilon: f64, grid: &str) -> ScnConfig {
    ScnConfig {
        l_max,
        t_max,
        epsilon,
        lambda_grid: parse_scope(grid).unwrap(),
        r: 0.999,
        scheme: Scheme::Sc3,
        window: 10,
        seed: 0,
    }
}

fn normalized_pair(ds: &Dataset, train: usize, test: usize, seed: u64) -> (Dataset, Dataset) {
    let (tr, te) = split(
        ds,
        &SplitSpec {
            train_count: train,
            test_count: test,
            shuffle_seed: seed,
        },
    )
    .unwrap();
    let meta = NormMeta::fit(&tr).unwrap();
    (
        apply_normalization(&tr, &meta).unwrap(),
        apply_normalization(&te, &meta).unwrap(),
    )
}

struct ScalarStudy {
    irvfln: SuiteResult,
    scn: SuiteResult,
    oscn: SuiteResult,
}

fn scalar_study() -> &'static ScalarStudy {
    static STUDY: OnceLock<ScalarStudy> = OnceLock::new();
    STUDY.get_or_init(|| {
        let ds = gen_scalar_function(1000, BASE_SEED).unwrap();
        let (train, test) = normalized_pair(&ds, 800, 200, BASE_SEED);
        let grid = "150:10:200";
        let irvfln = run_trials(
            &train,
            &test,
            &AlgorithmSpec::Irvfln(IrvflnConfig {
                l_max: 100,
                epsilon: 0.05,
                lambda: 150.0,
                seed: 0,
            }),
            TRIALS,
            BASE_SEED,
        )
        .unwrap();
        let scn = run_trials(
            &train,
            &test,
            &AlgorithmSpec::Scn(scn_config(100, 20, 0.05, grid)),
            TRIALS,
            BASE_SEED,
        )
        .unwrap();
        let oscn = run_trials(
            &train,
            &test,
            &AlgorithmSpec::Oscn(oscn_config(100, 20, 0.05, 1e-6, grid)),
            TRIALS,
            BASE_SEED,
        )
        .unwrap();
        ScalarStudy { irvfln, scn, oscn }
    })
}

#[test]
fn criterion_01_node_economy() {
    let s = scalar_study();
    let oscn_nodes = s.oscn.summary.nodes.ave;
    let scn_nodes = s.scn.summary.nodes.ave;
    let pass = oscn_nodes < scn_nodes && oscn_nodes <= 22.0 && s.oscn.failed_trials == 0;
    verdict(
        1,
        pass,
        &format!(
            "mean nodes oscn {oscn_nodes:.2} vs scn {scn_nodes:.2} (need oscn < scn and oscn <= 22)"
        ),
    );
}

#[test]
fn criterion_02_error_level() {
    let s = scalar_study();
    let tr = s.oscn.summary.train_rmse.ave;
    let te = s.oscn.summary.test_rmse.ave;
    let in_band = |v: f64| (0.035..=0.05).contains(&v);
    verdict(
        2,
        in_band(tr) && in_band(te),
        &format!("oscn rmse ave train {tr:.4} test {te:.4} (need both in [0.035, 0.05])"),
    );
}

#[test]
fn criterion_03_baseline_failure_mode() {
    let s = scalar_study();
    let tr = s.irvfln.summary.train_rmse.ave;
    verdict(
        3,
        tr >= 0.09,
        &format!("irvfln train rmse ave {tr:.4} (need >= 0.09)"),
    );
}

#[test]
fn criterion_04_fixed_node_ordering() {
    let ds = gen_multi_output(1000, BASE_SEED).unwrap();
    let (train, test) = normalized_pair(&ds, 600, 400, BASE_SEED);
    let grid = "10:5:50";
    let scn = run_trials(
        &train,
        &test,
        &AlgorithmSpec::Scn(scn_config(1, 10, 0.0, grid)).with_fixed_nodes(8),
        TRIALS,
        BASE_SEED,
    )
    .unwrap();
    let oscn = run_trials(
        &train,
        &test,
        &AlgorithmSpec::Oscn(oscn_config(1, 10, 0.0, 1e-8, grid)).with_fixed_nodes(8),
        TRIALS,
        BASE_SEED,
    )
    .unwrap();
    let o = &oscn.summary.test_rmse_per_output;
    let s = &scn.summary.test_rmse_per_output;
    let pass = o.len() == 2 && s.len() == 2 && o[0].ave < s[0].ave && o[1].ave < s[1].ave;
    verdict(
        4,
        pass,
        &format!(
            "test rmse ave at 8 nodes: oscn ({:.4}, {:.4}) vs scn ({:.4}, {:.4})",
            o[0].ave, o[1].ave, s[0].ave, s[1].ave
        ),
    );
}

#[test]
fn criterion_05_iris_accuracy() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/iris.csv");
    let ds = load_csv(&path, 1, false, Task::Classification).unwrap();
    let (train, test) = normalized_pair(&ds, 120, 30, BASE_SEED);
    let oscn = run_trials(
        &train,
        &test,
        &AlgorithmSpec::Oscn(oscn_config(10, 10, 0.0, 1e-6, "0.5:0.5:10")),
        TRIALS,
        BASE_SEED,
    )
    .unwrap();
    let acc = oscn.summary.test_accuracy.expect("classification run");
    verdict(
        5,
        acc.ave >= 0.90,
        &format!("iris test accuracy ave {:.4} +- {:.4} (need >= 0.90)", acc.ave, acc.dev),
    );
}

fn random_small_instance(seed: u64) -> (Dataset, OscnConfig) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(10..=60);
    let d = rng.random_range(1..=5);
    let m = rng.random_range(1..=3);
    let l = rng.random_range(1..=10);
    let x = Matrix::from_rows(
        &(0..n)
            .map(|_| (0..d).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let t = Matrix::from_rows(
        &(0..n)
            .map(|_| (0..m).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let ds = Dataset {
        x,
        t,
        task: Task::Regression,
        class_labels: None,
        norm_meta: None,
    };
    let mut config = oscn_config(l, 20, 0.0, 1e-10, "1:1:10");
    config.seed = seed;
    (ds, config)
}

#[test]
fn criterion_06_constructive_equals_global_ls() {
    let mut worst_v = 0.0f64;
    let mut worst_h = 0.0f64;
    for i in 0..100 {
        let (ds, config) = random_small_instance(1000 + i);
        let run = train_oscn(&ds, &config).unwrap();
        if run.state.is_empty() {
            continue;
        }
        let constructive = run.state.residual().frob_norm();
        let scale = ds.t.frob_norm().max(1e-12);

        let v_mat = Matrix::from_columns(run.state.basis()).unwrap();
        let beta_v = lstsq_pinv(&v_mat, &ds.t).unwrap();
        let oracle_v = ds.t.sub(&v_mat.matmul(&beta_v).unwrap()).unwrap().frob_norm();
        worst_v = worst_v.max((constructive - oracle_v).abs() / scale);

        let h_mat = activation_matrix(&run.nodes, &ds.x, Activation::Sigmoid).unwrap();
        let beta_h = lstsq_pinv(&h_mat, &ds.t).unwrap();
        let oracle_h = ds.t.sub(&h_mat.matmul(&beta_h).unwrap()).unwrap().frob_norm();
        worst_h = worst_h.max((constructive - oracle_h).abs() / scale);
    }
    verdict(
        6,
        worst_v <= 1e-8 && worst_h <= 1e-7,
        &format!(
            "worst relative residual-norm gap: basis route {worst_v:.2e} (<= 1e-8), \
             raw-column route {worst_h:.2e} (<= 1e-7)"
        ),
    );
}

#[test]
fn criterion_07_orthogonality_across_bench() {
    // The trainer audits pairwise and residual-to-basis orthogonality on every
    // run and flags violations; sweep the synthetic suites plus iris and count.
    let data_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let opts = BenchOptions {
        data_dir,
        trials: 5,
        base_seed: BASE_SEED,
    };
    let mut violations = 0usize;
    let mut runs = 0usize;
    for suite in ["table1", "table2", "classification"] {
        let report = run_suite(suite, &opts).unwrap();
        for entry in report.entries.iter().filter(|e| e.algorithm == "oscn") {
            let Some(res) = &entry.result else { continue };
            for r in &res.reports {
                runs += 1;
                violations += r
                    .flags
                    .iter()
                    .filter(|f| f.contains("orthogonality"))
                    .count();
            }
        }
    }
    verdict(
        7,
        runs > 0 && violations == 0,
        &format!("{violations} orthogonality violations across {runs} bench runs"),
    );
}

#[test]
fn criterion_08_contraction_and_bound() {
    // Contraction with in-force parameters is audited inside training and
    // flagged on violation; independently recheck the no-escalation ceiling.
    let ds = minmax_normalize(&gen_scalar_function(400, 3).unwrap()).unwrap();
    let mut contraction_flags = 0usize;
    let mut ceiling_ok = true;
    let mut checked_runs = 0usize;
    for seed in 0..20 {
        let mut config = oscn_config(10, 200, 1e-4, 1e-6, "150:10:200");
        config.seed = seed;
        let run = train_oscn(&ds, &config).unwrap();
        contraction_flags += run
            .report
            .flags
            .iter()
            .filter(|f| f.contains("contraction"))
            .count();
        if run.report.escalation_events == 0 {
            checked_runs += 1;
            let e0_sq = ds.t.frob_norm().powi(2);
            let nm = (ds.t.rows() * ds.t.cols()) as f64;
            for (l, rmse) in run.report.residual_history.iter().enumerate() {
                let e_sq = rmse * rmse * nm;
                if e_sq > error_bound(l + 1, e0_sq) * (1.0 + 1e-9) {
                    ceiling_ok = false;
                }
            }
        }
    }
    verdict(
        8,
        contraction_flags == 0 && ceiling_ok && checked_runs > 0,
        &format!(
            "{contraction_flags} contraction violations over 20 runs; \
             residual ceiling held on {checked_runs} escalation-free runs"
        ),
    );
}

#[test]
fn criterion_09_finalization_fidelity() {
    let ds = minmax_normalize(&gen_scalar_function(300, 9).unwrap()).unwrap();
    let mut worst_final = 0.0f64;
    let mut worst_roundtrip = 0.0f64;
    for seed in 0..10 {
        let mut config = oscn_config(15, 20, 0.02, 1e-6, "150:10:200");
        config.seed = seed;
        let run = train_oscn(&ds, &config).unwrap();
        let from_raw = run.model.predict(&ds.x).unwrap();
        let from_ortho = run.state.fitted().unwrap();
        let scale = from_ortho.frob_norm().max(1e-12);
        worst_final = worst_final.max(from_raw.sub(&from_ortho).unwrap().frob_norm() / scale);

        let reloaded = NetworkModel::from_json(&run.model.to_json().unwrap()).unwrap();
        let re_pred = reloaded.predict(&ds.x).unwrap();
        worst_roundtrip = worst_roundtrip.max(re_pred.sub(&from_raw).unwrap().frob_norm() / scale);
    }
    verdict(
        9,
        worst_final <= 1e-8 && worst_roundtrip <= 1e-12,
        &format!(
            "raw-vs-orthogonal prediction gap {worst_final:.2e} (<= 1e-8), \
             serialization roundtrip gap {worst_roundtrip:.2e} (<= 1e-12)"
        ),
    );
}

#[test]
fn criterion_10_bench_determinism() {
    let data_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let mut pass = true;
    let mut detail = String::new();
    for (suite, trials) in [("table1", 3), ("table2", 2), ("classification", 3)] {
        let opts = BenchOptions {
            data_dir: data_dir.clone(),
            trials,
            base_seed: 42,
        };
        let a = serde_json::to_string(&run_suite(suite, &opts).unwrap()).unwrap();
        let b = serde_json::to_string(&run_suite(suite, &opts).unwrap()).unwrap();
        let same = a == b;
        pass &= same;
        detail.push_str(&format!("{suite} {} ", if same { "identical" } else { "DIFFERS" }));
    }
    verdict(10, pass, &format!("repeated bench JSON: {detail}"));
}
