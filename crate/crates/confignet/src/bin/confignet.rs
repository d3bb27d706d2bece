use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use confignet::dataset::{gen_multi_output, gen_scalar_function, Dataset};
use confignet::harness::suites::{run_suite, BenchOptions, BenchReport};
use confignet::harness::trials::{residual_history_csv, run_trials, SuiteResult};
use confignet::harness::ExperimentConfig;
use confignet::linalg::Matrix;
use confignet::{Error, NetworkModel};

#[derive(Parser)]
#[command(name = "confignet", version, about = "Incremental randomized network trainers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train per a JSON experiment config and write reports.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a prebuilt comparison suite.
    Bench {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value = ".")]
        data_dir: PathBuf,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic dataset CSV.
    Synth {
        #[arg(long)]
        which: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict with a saved model over a feature CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read_to_string(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn dataset_csv(ds: &Dataset) -> String {
    let mut out = String::new();
    for i in 0..ds.n() {
        let mut fields: Vec<String> = (0..ds.d()).map(|j| format!("{}", ds.x[(i, j)])).collect();
        for q in 0..ds.m() {
            fields.push(format!("{}", ds.t[(i, q)]));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn matrix_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let fields: Vec<String> = (0..m.cols()).map(|j| format!("{}", m[(i, j)])).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn load_features(path: &Path, d: usize) -> Result<Matrix, Error> {
    let text = read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < d {
            return Err(Error::Load {
                path: path.display().to_string(),
                row: i,
                col: fields.len(),
                message: format!("expected at least {d} feature columns"),
            });
        }
        let mut row = Vec::with_capacity(d);
        for (j, f) in fields.iter().take(d).enumerate() {
            row.push(f.trim().parse::<f64>().map_err(|_| Error::Load {
                path: path.display().to_string(),
                row: i,
                col: j,
                message: format!("bad number '{f}'"),
            })?);
        }
        rows.push(row);
    }
    Matrix::from_rows(&rows)
}

fn summary_line(name: &str, algo: &str, nodes: Option<usize>, res: &SuiteResult) -> String {
    let s = &res.summary;
    let pin = nodes.map(|n| format!(" @{n}")).unwrap_or_default();
    let acc = s
        .test_accuracy
        .map(|a| format!("  test_acc {:.4}±{:.4}", a.ave, a.dev))
        .unwrap_or_default();
    let wall: f64 = res.reports.iter().map(|r| r.wall_time_seconds).sum();
    format!(
        "{name}{pin:<4} {algo:<7} nodes {:6.2}±{:5.2}  train {:.4}±{:.4}  test {:.4}±{:.4}{acc}  failed {}  wall {:.2}s",
        s.nodes.ave, s.nodes.dev, s.train_rmse.ave, s.train_rmse.dev, s.test_rmse.ave,
        s.test_rmse.dev, res.failed_trials, wall
    )
}

fn print_bench(report: &BenchReport) {
    println!("suite {}  trials {}  base_seed {}", report.suite, report.trials, report.base_seed);
    for e in &report.entries {
        match (&e.result, &e.note) {
            (Some(res), note) => {
                println!("{}", summary_line(&e.name, &e.algorithm, e.node_count, res));
                if let Some(n) = note {
                    println!("  note: {n}");
                }
            }
            (None, Some(note)) => println!("{} {:<7} {}", e.name, e.algorithm, note),
            (None, None) => {}
        }
    }
}

fn cmd_train(config_path: &Path, out: Option<&Path>) -> Result<bool, Error> {
    let cfg = ExperimentConfig::from_json(&read_to_string(config_path)?)?;
    let base_dir = config_path.parent().unwrap_or(Path::new("."));
    let (train, test) = cfg.build_datasets(base_dir)?;
    let spec = cfg.algorithm_spec()?;
    let result = run_trials(&train, &test, &spec, cfg.trials, cfg.base_seed)?;
    for (i, r) in result.reports.iter().enumerate() {
        let status = if r.failed() { "FAILED" } else { "ok" };
        println!(
            "trial {i:3} seed {:4} nodes {:4} train {:.5} test {:.5} wall {:.3}s [{status}]",
            r.seed,
            r.nodes_used,
            r.train_rmse,
            r.test_rmse.unwrap_or(f64::NAN),
            r.wall_time_seconds
        );
        for f in &r.flags {
            println!("      flag: {f}");
        }
    }
    println!("{}", summary_line("result", spec.name(), None, &result));
    if let Some(dir) = out {
        write_file(&dir.join("report.json"), &serde_json::to_string_pretty(&result)?)?;
        write_file(&dir.join("residual_history.csv"), &residual_history_csv(&result))?;
        write_file(&dir.join("variance.csv"), &matrix_csv(&result.per_sample_variance))?;
        if cfg.trials == 1 && !result.reports[0].failed() {
            let (model, _) =
                confignet::harness::trials::run_single_trial(&train, &test, &spec.with_seed(cfg.base_seed))?;
            write_file(&dir.join("model.json"), &model.to_json()?)?;
        }
    }
    Ok(result.failed_trials > 0)
}

fn cmd_bench(
    suite: &str,
    data_dir: &Path,
    trials: usize,
    base_seed: u64,
    out: Option<&Path>,
) -> Result<bool, Error> {
    let opts = BenchOptions {
        data_dir: data_dir.to_path_buf(),
        trials,
        base_seed,
    };
    let report = run_suite(suite, &opts)?;
    print_bench(&report);
    if let Some(dir) = out {
        write_file(
            &dir.join(format!("{suite}_report.json")),
            &serde_json::to_string_pretty(&report)?,
        )?;
    }
    let any_failed = report
        .entries
        .iter()
        .filter_map(|e| e.result.as_ref())
        .any(|r| r.failed_trials > 0);
    Ok(any_failed)
}

fn cmd_synth(which: &str, n: usize, seed: u64, out: &Path) -> Result<(), Error> {
    let ds = match which {
        "eq26" => gen_scalar_function(n, seed)?,
        "eq27" => gen_multi_output(n, seed)?,
        other => return Err(Error::Config(format!("unknown synth dataset '{other}'"))),
    };
    write_file(out, &dataset_csv(&ds))?;
    println!("wrote {} rows to {}", ds.n(), out.display());
    Ok(())
}

fn cmd_predict(model_path: &Path, data_path: &Path, out: &Path) -> Result<(), Error> {
    let model = NetworkModel::from_json(&read_to_string(model_path)?)?;
    let x = load_features(data_path, model.d)?;
    let pred = model.predict(&x)?;
    write_file(out, &matrix_csv(&pred))?;
    println!("wrote {} predictions to {}", pred.rows(), out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Train { config, out } => cmd_train(&config, out.as_deref()),
        Command::Bench { suite, data_dir, trials, base_seed, out } => {
            cmd_bench(&suite, &data_dir, trials, base_seed, out.as_deref())
        }
        Command::Synth { which, n, seed, out } => cmd_synth(&which, n, seed, &out).map(|_| false),
        Command::Predict { model, data, out } => cmd_predict(&model, &data, &out).map(|_| false),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(false) => ExitCode::from(0),
        Ok(true) => {
            eprintln!("one or more trials flagged as failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
