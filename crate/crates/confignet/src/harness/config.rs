//! JSON experiment configuration and the scope-grid grammar.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{
    apply_normalization, gen_multi_output, gen_scalar_function, load_csv, split, Dataset,
    NormMeta, SplitSpec, Task,
};
use crate::error::{Error, Result};
use crate::irvfln::IrvflnConfig;
use crate::oscn::{EscalationSampler, OscnConfig};
use crate::scn::{Scheme, ScnConfig};

/// Scope grid: either an explicit list or a MATLAB-style "a:s:b" string,
/// inclusive of both ends when (b-a) is an integer multiple of s.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaGrid {
    Range(String),
    List(Vec<f64>),
}

/// Parses "a:s:b" (or a bare number) into an inclusive grid.
pub fn parse_scope(text: &str) -> Result<Vec<f64>> {
    let trimmed = text.trim().trim_start_matches('{').trim_end_matches('}');
    let parts: Vec<&str> = trimmed.split(':').map(str::trim).collect();
    let parse = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::Config(format!("bad scope number '{s}' in '{text}'")))
    };
    match parts.as_slice() {
        [single] => Ok(vec![parse(single)?]),
        [a, s, b] => {
            let (a, s, b) = (parse(a)?, parse(s)?, parse(b)?);
            if s <= 0.0 || b < a {
                return Err(Error::Config(format!("bad scope range '{text}'")));
            }
            let mut grid = Vec::new();
            let steps = ((b - a) / s + 1e-9).floor() as usize;
            for k in 0..=steps {
                grid.push(a + s * k as f64);
            }
            Ok(grid)
        }
        _ => Err(Error::Config(format!(
            "scope must be 'a:s:b' or a number, got '{text}'"
        ))),
    }
}

impl LambdaGrid {
    pub fn resolve(&self) -> Result<Vec<f64>> {
        match self {
            LambdaGrid::Range(text) => parse_scope(text),
            LambdaGrid::List(list) => {
                if list.is_empty() {
                    return Err(Error::Config("empty scope list".into()));
                }
                Ok(list.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitConfig {
    pub train: usize,
    pub test: usize,
    pub seed: u64,
}

/// Where the data comes from: a CSV file or one of the synthetic generators.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetConfig {
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// "eq26" (single-output) or "eq27" (two-output) synthetic data.
    #[serde(default)]
    pub synth: Option<String>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub data_seed: Option<u64>,
    #[serde(default)]
    pub target_cols: Option<usize>,
    #[serde(default)]
    pub task: Option<Task>,
    #[serde(default)]
    pub has_header: Option<bool>,
    pub split: SplitConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// "irvfln" | "sc1" | "sc2" | "sc3" | "oscn"
    pub algorithm: String,
    pub dataset: DatasetConfig,
    pub l_max: usize,
    #[serde(default = "default_t_max")]
    pub t_max: usize,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    pub lambda_grid: LambdaGrid,
    #[serde(default = "default_r")]
    pub r: f64,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
}

fn default_t_max() -> usize {
    10
}
fn default_sigma() -> f64 {
    1e-6
}
fn default_r() -> f64 {
    0.999
}
fn default_window() -> usize {
    10
}
fn default_trials() -> usize {
    1
}

/// Per-trial algorithm settings; the trial runner swaps in the derived seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AlgorithmSpec {
    Irvfln(IrvflnConfig),
    Scn(ScnConfig),
    Oscn(OscnConfig),
}

impl AlgorithmSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmSpec::Irvfln(_) => "irvfln",
            AlgorithmSpec::Scn(c) => match c.scheme {
                Scheme::Sc1 => "sc1",
                Scheme::Sc2 => "sc2",
                Scheme::Sc3 => "sc3",
            },
            AlgorithmSpec::Oscn(_) => "oscn",
        }
    }

    pub fn with_seed(&self, seed: u64) -> AlgorithmSpec {
        let mut spec = self.clone();
        match &mut spec {
            AlgorithmSpec::Irvfln(c) => c.seed = seed,
            AlgorithmSpec::Scn(c) => c.seed = seed,
            AlgorithmSpec::Oscn(c) => c.seed = seed,
        }
        spec
    }

    /// Rebuilds the spec for a fixed-node-count run: stop RMSE disabled and
    /// node budget pinned.
    pub fn with_fixed_nodes(&self, node_count: usize) -> AlgorithmSpec {
        let mut spec = self.clone();
        match &mut spec {
            AlgorithmSpec::Irvfln(c) => {
                c.epsilon = 0.0;
                c.l_max = node_count;
            }
            AlgorithmSpec::Scn(c) => {
                c.epsilon = 0.0;
                c.l_max = node_count;
            }
            AlgorithmSpec::Oscn(c) => {
                c.epsilon = 0.0;
                c.l_max = node_count;
            }
        }
        spec
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn algorithm_spec(&self) -> Result<AlgorithmSpec> {
        let grid = self.lambda_grid.resolve()?;
        match self.algorithm.as_str() {
            "irvfln" => Ok(AlgorithmSpec::Irvfln(IrvflnConfig {
                l_max: self.l_max,
                epsilon: self.epsilon,
                lambda: grid[0],
                seed: self.base_seed,
            })),
            "sc1" | "sc2" | "sc3" => Ok(AlgorithmSpec::Scn(ScnConfig {
                l_max: self.l_max,
                t_max: self.t_max,
                epsilon: self.epsilon,
                lambda_grid: grid,
                r: self.r,
                scheme: match self.algorithm.as_str() {
                    "sc1" => Scheme::Sc1,
                    "sc2" => Scheme::Sc2,
                    _ => Scheme::Sc3,
                },
                window: self.window,
                seed: self.base_seed,
            })),
            "oscn" => Ok(AlgorithmSpec::Oscn(OscnConfig {
                l_max: self.l_max,
                t_max: self.t_max,
                epsilon: self.epsilon,
                sigma: self.sigma,
                lambda_grid: grid,
                seed: self.base_seed,
                max_r_retries: 8,
                escalation: EscalationSampler::Interval,
            })),
            other => Err(Error::Config(format!("unknown algorithm '{other}'"))),
        }
    }

    /// Builds the train/test pair: load or synthesize, split, then normalize
    /// both with statistics fitted on the training portion.
    pub fn build_datasets(&self, base_dir: &Path) -> Result<(Dataset, Dataset)> {
        let ds = match (&self.dataset.path, self.dataset.synth.as_deref()) {
            (Some(path), None) => {
                let full = if path.is_absolute() {
                    path.clone()
                } else {
                    base_dir.join(path)
                };
                load_csv(
                    &full,
                    self.dataset.target_cols.unwrap_or(1),
                    self.dataset.has_header.unwrap_or(false),
                    self.dataset.task.unwrap_or(Task::Regression),
                )?
            }
            (None, Some(which)) => {
                let n = self.dataset.n.unwrap_or(1000);
                let seed = self.dataset.data_seed.unwrap_or(0);
                match which {
                    "eq26" => gen_scalar_function(n, seed)?,
                    "eq27" => gen_multi_output(n, seed)?,
                    other => {
                        return Err(Error::Config(format!("unknown synth dataset '{other}'")))
                    }
                }
            }
            _ => {
                return Err(Error::Config(
                    "dataset needs exactly one of 'path' or 'synth'".into(),
                ))
            }
        };
        let spec = SplitSpec {
            train_count: self.dataset.split.train,
            test_count: self.dataset.split.test,
            shuffle_seed: self.dataset.split.seed,
        };
        let (train, test) = split(&ds, &spec)?;
        let meta = NormMeta::fit(&train)?;
        Ok((
            apply_normalization(&train, &meta)?,
            apply_normalization(&test, &meta)?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scope_range_inclusive_ends() {
        assert_eq!(
            parse_scope("150:10:200").unwrap(),
            vec![150.0, 160.0, 170.0, 180.0, 190.0, 200.0]
        );
        assert_eq!(parse_scope("{1:0.5:2}").unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(parse_scope("7").unwrap(), vec![7.0]);
        // end not on the lattice stays excluded
        assert_eq!(parse_scope("1:1:2.5").unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn scope_rejects_garbage() {
        assert!(parse_scope("1:0:5").is_err());
        assert!(parse_scope("5:1:1").is_err());
        assert!(parse_scope("a:b").is_err());
    }

    #[test]
    fn experiment_config_parses_and_resolves() {
        let text = r#"{
            "algorithm": "oscn",
            "dataset": {"synth": "eq26", "n": 1000, "data_seed": 1,
                        "split": {"train": 800, "test": 200, "seed": 2}},
            "l_max": 100, "t_max": 20, "epsilon": 0.05,
            "lambda_grid": "150:10:200", "trials": 50, "base_seed": 7
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        match cfg.algorithm_spec().unwrap() {
            AlgorithmSpec::Oscn(c) => {
                assert_eq!(c.lambda_grid.len(), 6);
                assert_eq!(c.sigma, 1e-6);
            }
            _ => panic!("expected oscn"),
        }
        let (train, test) = cfg.build_datasets(Path::new(".")).unwrap();
        assert_eq!(train.n(), 800);
        assert_eq!(test.n(), 200);
        // train targets normalized to [0,1]
        let col = train.t.column(0);
        let max = col.data().iter().cloned().fold(f64::MIN, f64::max);
        assert!((max - 1.0).abs() < 1e-12);
    }
}
