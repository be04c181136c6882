//! Experiment configuration as flat `key = value` text.
//!
//! Keys are dotted (`train.lr = 1e-3`); a `[train]` line prefixes the keys
//! that follow it. `#` starts a comment. Every key has a default, and keys
//! outside the list below are rejected.
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `seeds` | `1` | comma list; each seed is one run per depth |
//! | `data.source` | `synth` | `synth`, `csv` or `idx` |
//! | `data.target` | `sin:k=1` | synthetic target kind |
//! | `data.n` | `200` | synthetic sample count |
//! | `data.domain` | target default | `lo:hi` for grid targets |
//! | `data.seed` | `0` | parity sampling seed |
//! | `data.path` | | CSV dataset |
//! | `data.images`, `data.labels` | | IDX files |
//! | `data.max_n` | all | IDX sample cap |
//! | `data.downsample` | `1` | IDX average-pool factor |
//! | `network.width` | `64` | hidden width |
//! | `network.depths` | `2` | comma list of hidden-layer counts |
//! | `network.activation` | `tanh` | `tanh` or `relu` |
//! | `network.residual` | `false` | identity skips between hidden layers |
//! | `network.loss` | `mse` | `mse` or `softmax_cross_entropy` |
//! | `train.optimizer` | `adam` | `adam` or `sgd` |
//! | `train.lr` | `1e-3` | rate, or `1:1e-3,41:1e-4` step schedule |
//! | `train.batch_size` | `256` | minibatch size |
//! | `train.epochs` | `100` | epoch budget |
//! | `train.threshold` | `1e-2` | epochs-to-error loss threshold |
//! | `train.stop_at_threshold` | `true` | stop once the threshold is met |
//! | `analysis.grid` | `0.01:10000:40` | `lo:hi:count` log grid of `1/δ` |
//! | `analysis.layers` | `hidden` | `hidden`, `all`, `none` or a list of `S^[l]` indices |
//! | `analysis.epochs` | `fib` | `fib` (0,1,2,3,5,8,..) or a comma list |
//! | `analysis.normalize_rdf` | `false` | divide each RDF by its maximum |

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::filter::FilterWidthGrid;
use crate::network::{Activation, LearningRateSchedule, LossKind, NetworkSpec, OptimizerKind};

use super::idx::load_idx_dataset;
use super::synth::{synth_target, TargetKind};
use super::TrainingSettings;

const KEYS: &[(&str, &str)] = &[
    ("seeds", "1"),
    ("data.source", "synth"),
    ("data.target", "sin:k=1"),
    ("data.n", "200"),
    ("data.domain", ""),
    ("data.seed", "0"),
    ("data.path", ""),
    ("data.images", ""),
    ("data.labels", ""),
    ("data.max_n", ""),
    ("data.downsample", "1"),
    ("network.width", "64"),
    ("network.depths", "2"),
    ("network.activation", "tanh"),
    ("network.residual", "false"),
    ("network.loss", "mse"),
    ("train.optimizer", "adam"),
    ("train.lr", "1e-3"),
    ("train.batch_size", "256"),
    ("train.epochs", "100"),
    ("train.threshold", "1e-2"),
    ("train.stop_at_threshold", "true"),
    ("analysis.grid", "0.01:10000:40"),
    ("analysis.layers", "hidden"),
    ("analysis.epochs", "fib"),
    ("analysis.normalize_rdf", "false"),
];

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synth {
        target: TargetKind,
        n: usize,
        domain: Option<(f64, f64)>,
        seed: u64,
    },
    Csv(PathBuf),
    Idx {
        images: PathBuf,
        labels: PathBuf,
        max_n: Option<usize>,
        downsample: usize,
    },
}

impl DataSource {
    pub fn load(&self) -> Result<LabeledDataset> {
        match self {
            DataSource::Synth {
                target,
                n,
                domain,
                seed,
            } => synth_target(target, *n, *domain, *seed),
            DataSource::Csv(path) => LabeledDataset::read_csv(path),
            DataSource::Idx {
                images,
                labels,
                max_n,
                downsample,
            } => load_idx_dataset(images, labels, *max_n, *downsample),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerSelection {
    /// `S^[1] .. S^[L-1]`.
    Hidden,
    /// `S^[0] .. S^[L-1]`.
    All,
    /// Explicit `S^[l]` superscripts; negative values use `f^[-l] = f^[L-l+1]`.
    List(Vec<i64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum EpochSelection {
    /// 0, 1, 2, 3, 5, 8, 13, ... up to the budget.
    Fibonacci,
    List(Vec<u64>),
}

impl EpochSelection {
    /// Epochs to record within `0..=budget`, always including 0.
    pub fn epochs(&self, budget: u64) -> Vec<u64> {
        let mut out = match self {
            EpochSelection::Fibonacci => {
                let mut v = vec![0, 1];
                let (mut a, mut b) = (1u64, 2u64);
                while b <= budget {
                    v.push(b);
                    (a, b) = (b, a + b);
                }
                v
            }
            EpochSelection::List(list) => list.clone(),
        };
        out.push(0);
        out.retain(|e| *e <= budget);
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seeds: Vec<u64>,
    pub data: DataSource,
    pub width: usize,
    pub depths: Vec<usize>,
    pub activation: Activation,
    pub residual: bool,
    pub loss: LossKind,
    pub training: TrainingSettings,
    pub grid: FilterWidthGrid,
    pub layers: LayerSelection,
    pub epochs: EpochSelection,
    pub normalize_rdf: bool,
    /// Canonical `key -> value` view (defaults filled in) kept for records.
    pairs: BTreeMap<String, String>,
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| Error::Config(format!("{key}: `{v}` is not valid")))
        })
        .collect()
}

fn parse_one<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: `{value}` is not valid")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::Config(format!("{key}: expected true/false, got `{other}`"))),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_relative(text, None)
    }

    /// Reads a config file; relative data paths resolve against its directory.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::parse_relative(&text, path.parent())
    }

    fn parse_relative(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut given = BTreeMap::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            let key = key.trim();
            let key = if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            given.insert(key, value.trim().to_string());
        }
        Self::from_pairs(given, base)
    }

    pub fn from_pairs(given: BTreeMap<String, String>, base: Option<&Path>) -> Result<Self> {
        let unknown: Vec<String> = given
            .keys()
            .filter(|k| !KEYS.iter().any(|(known, _)| known == k))
            .cloned()
            .collect();
        if !unknown.is_empty() {
            return Err(Error::UnknownConfigKeys(unknown));
        }
        let mut pairs: BTreeMap<String, String> = KEYS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        pairs.extend(given);
        let get = |k: &str| pairs[k].as_str();
        let resolve = |p: &str| -> PathBuf {
            let p = PathBuf::from(p);
            match base {
                Some(b) if p.is_relative() => b.join(p),
                _ => p,
            }
        };
        let require = |k: &str| -> Result<&str> {
            let v = get(k);
            if v.is_empty() {
                Err(Error::Config(format!(
                    "{k} is required for data.source = {}",
                    get("data.source")
                )))
            } else {
                Ok(v)
            }
        };

        let data = match get("data.source") {
            "synth" => {
                let domain = match get("data.domain") {
                    "" => None,
                    d => {
                        let (lo, hi) = d
                            .split_once(':')
                            .ok_or_else(|| Error::Config(format!("data.domain: expected lo:hi, got `{d}`")))?;
                        Some((parse_one("data.domain", lo)?, parse_one("data.domain", hi)?))
                    }
                };
                DataSource::Synth {
                    target: get("data.target").parse()?,
                    n: parse_one("data.n", get("data.n"))?,
                    domain,
                    seed: parse_one("data.seed", get("data.seed"))?,
                }
            }
            "csv" => DataSource::Csv(resolve(require("data.path")?)),
            "idx" => DataSource::Idx {
                images: resolve(require("data.images")?),
                labels: resolve(require("data.labels")?),
                max_n: match get("data.max_n") {
                    "" => None,
                    v => Some(parse_one("data.max_n", v)?),
                },
                downsample: parse_one("data.downsample", get("data.downsample"))?,
            },
            other => return Err(Error::Config(format!("data.source: unknown source `{other}`"))),
        };

        let layers = match get("analysis.layers") {
            "hidden" => LayerSelection::Hidden,
            "all" => LayerSelection::All,
            "none" | "" => LayerSelection::List(vec![]),
            list => LayerSelection::List(parse_list("analysis.layers", list)?),
        };
        let epochs = match get("analysis.epochs") {
            "fib" => EpochSelection::Fibonacci,
            list => EpochSelection::List(parse_list("analysis.epochs", list)?),
        };

        let training = TrainingSettings {
            optimizer: get("train.optimizer").parse()?,
            schedule: get("train.lr").parse()?,
            batch_size: parse_one("train.batch_size", get("train.batch_size"))?,
            budget: parse_one("train.epochs", get("train.epochs"))?,
            threshold: parse_one("train.threshold", get("train.threshold"))?,
            stop_at_threshold: parse_bool("train.stop_at_threshold", get("train.stop_at_threshold"))?,
        };

        let config = Self {
            seeds: parse_list("seeds", get("seeds"))?,
            data,
            width: parse_one("network.width", get("network.width"))?,
            depths: parse_list("network.depths", get("network.depths"))?,
            activation: get("network.activation").parse()?,
            residual: parse_bool("network.residual", get("network.residual"))?,
            loss: get("network.loss").parse()?,
            training,
            grid: get("analysis.grid").parse()?,
            layers,
            epochs,
            normalize_rdf: parse_bool("analysis.normalize_rdf", get("analysis.normalize_rdf"))?,
            pairs,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.depths.is_empty() {
            return Err(Error::Config("network.depths must not be empty".into()));
        }
        if self.width == 0 {
            return Err(Error::Config("network.width must be >= 1".into()));
        }
        self.training.validate()
    }

    /// Canonical key/value pairs with defaults filled in.
    pub fn pairs(&self) -> &BTreeMap<String, String> {
        &self.pairs
    }

    /// Network for `depth` hidden layers on data of the given shape.
    pub fn network_spec(&self, input_dim: usize, output_dim: usize, depth: usize, seed: u64) -> NetworkSpec {
        NetworkSpec::uniform(input_dim, self.width, depth, output_dim, self.activation)
            .with_residual(self.residual)
            .with_loss(self.loss)
            .with_seed(seed)
    }

    pub fn optimizer(&self) -> OptimizerKind {
        self.training.optimizer
    }

    pub fn schedule(&self) -> &LearningRateSchedule {
        &self.training.schedule
    }
}
