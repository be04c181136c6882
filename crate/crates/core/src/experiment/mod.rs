//! Effective-target analysis of trained networks.
//!
//! Splitting a network at layer `l` gives a pre-condition part (layers
//! `1..l-1`) and a learning part (layers `l..L`). The learning part sees the
//! effective training set `S^[l-1] = {(f^[l-1](x_i), y_i)}`. This module builds
//! those sets, tracks their LFR/RDF over training, and measures how many
//! epochs a network needs to reach a loss threshold.

pub mod config;
pub mod idx;
pub mod synth;

use std::collections::BTreeMap;

use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::filter::{lfr_sweep, rdf_from_lfr, rdf_peak, FilterSweep, FilterWidthGrid, RdfCurve};
use crate::network::{
    accuracy, evaluate_loss, forward_batch, init_network, layer_by_negative_index, train_epoch, LearningRateSchedule,
    NetworkParams, NetworkSpec, OptimizerKind, OptimizerState,
};

pub use config::{DataSource, EpochSelection, ExperimentConfig, LayerSelection};
pub use idx::load_idx_dataset;
pub use synth::{synth_target, TargetKind};

/// `S^[l-1]`: activations entering layer `l`, paired with the original labels.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveTarget {
    /// First layer of the learning component (positive form).
    pub layer: usize,
    /// Points are `f^[layer-1](x_i)` after per-dimension normalization.
    pub dataset: LabeledDataset,
}

impl EffectiveTarget {
    /// Index of the activation the points come from, `layer - 1`.
    pub fn activation_layer(&self) -> usize {
        self.layer - 1
    }
}

/// Resolves a learning-component start layer given as `1..=L` or `-L..=-1`.
pub fn resolve_layer(layer: i64, num_layers: usize) -> Result<usize> {
    if layer < 0 {
        layer_by_negative_index(layer, num_layers)
    } else if layer >= 1 && layer as usize <= num_layers {
        Ok(layer as usize)
    } else {
        Err(Error::LayerIndex {
            index: layer,
            layers: num_layers,
        })
    }
}

/// Resolves an activation superscript `S^[l]`, `0..=L` or `-L..=-1`.
pub fn resolve_activation_layer(layer: i64, num_layers: usize) -> Result<usize> {
    if layer < 0 {
        layer_by_negative_index(layer, num_layers)
    } else if layer as usize <= num_layers {
        Ok(layer as usize)
    } else {
        Err(Error::LayerIndex {
            index: layer,
            layers: num_layers,
        })
    }
}

fn activations(params: &NetworkParams, spec: &NetworkSpec, source: &LabeledDataset) -> Result<Vec<Array2<f64>>> {
    Ok(forward_batch(params, spec, source.points())?.layers)
}

/// Builds `S^[l-1]` for the learning component starting at `layer`.
pub fn effective_target_dataset(
    params: &NetworkParams,
    spec: &NetworkSpec,
    source: &LabeledDataset,
    layer: i64,
) -> Result<EffectiveTarget> {
    let l = resolve_layer(layer, spec.num_layers())?;
    let mut acts = activations(params, spec, source)?;
    let points = acts.swap_remove(l - 1);
    let dataset = LabeledDataset::new(points, source.targets().to_owned())?.normalize_dimensions();
    Ok(EffectiveTarget { layer: l, dataset })
}

/// Effective targets for several activation superscripts from one forward pass.
pub fn effective_targets_for(
    params: &NetworkParams,
    spec: &NetworkSpec,
    source: &LabeledDataset,
    activation_layers: &[usize],
) -> Result<Vec<EffectiveTarget>> {
    let acts = activations(params, spec, source)?;
    activation_layers
        .iter()
        .map(|&a| {
            if a >= spec.num_layers() {
                return Err(Error::LayerIndex {
                    index: a as i64,
                    layers: spec.num_layers(),
                });
            }
            let dataset = LabeledDataset::new(acts[a].clone(), source.targets().to_owned())?.normalize_dimensions();
            Ok(EffectiveTarget { layer: a + 1, dataset })
        })
        .collect()
}

/// `{(f^[l-1](x_i), f^[L](x_i))}`: what the learning component currently
/// computes, rather than what it is asked to fit.
pub fn learning_component_function(
    params: &NetworkParams,
    spec: &NetworkSpec,
    source: &LabeledDataset,
    layer: i64,
) -> Result<LabeledDataset> {
    let l = resolve_layer(layer, spec.num_layers())?;
    let mut acts = activations(params, spec, source)?;
    let output = acts.pop().expect("output layer");
    let points = acts.swap_remove(l - 1);
    Ok(LabeledDataset::new(points, output)?.normalize_dimensions())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSettings {
    pub optimizer: OptimizerKind,
    pub schedule: LearningRateSchedule,
    pub batch_size: usize,
    /// Maximum number of training epochs.
    pub budget: u64,
    pub threshold: f64,
    pub stop_at_threshold: bool,
}

impl TrainingSettings {
    pub fn adam(learning_rate: f64, batch_size: usize, budget: u64, threshold: f64) -> Self {
        Self {
            optimizer: OptimizerKind::Adam,
            schedule: LearningRateSchedule::Constant(learning_rate),
            batch_size,
            budget,
            threshold,
            stop_at_threshold: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0) {
            return Err(Error::Config(format!("threshold must be > 0, got {}", self.threshold)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Epoch at which the loss first met the threshold, or a budget overrun.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpochsToError {
    Reached(u64),
    Exceeded { budget: u64 },
}

impl EpochsToError {
    pub fn epochs(self) -> Option<u64> {
        match self {
            EpochsToError::Reached(e) => Some(e),
            EpochsToError::Exceeded { .. } => None,
        }
    }

    /// Orders overruns after every reached count.
    pub fn sort_key(self) -> u64 {
        self.epochs().unwrap_or(u64::MAX)
    }
}

/// First epoch whose loss is `<= threshold`; index 0 is the untrained loss.
pub fn first_epoch_below(loss_history: &[f64], threshold: f64) -> Option<u64> {
    loss_history.iter().position(|l| *l <= threshold).map(|e| e as u64)
}

/// Median epochs-to-error; `None` when the median run did not reach the
/// threshold. Even counts average the middle pair.
pub fn median_epochs(results: &[EpochsToError]) -> Option<f64> {
    if results.is_empty() {
        return None;
    }
    let mut keys: Vec<u64> = results.iter().map(|r| r.sort_key()).collect();
    keys.sort_unstable();
    let n = keys.len();
    let (a, b) = if n % 2 == 1 {
        (keys[n / 2], keys[n / 2])
    } else {
        (keys[n / 2 - 1], keys[n / 2])
    };
    if a == u64::MAX || b == u64::MAX {
        None
    } else {
        Some((a as f64 + b as f64) / 2.0)
    }
}

/// Per-epoch hook called after epoch 0 (untrained) and after every training epoch.
pub struct EpochView<'a> {
    pub epoch: u64,
    pub params: &'a NetworkParams,
    pub loss: f64,
}

/// Outcome of a training loop.
#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    pub params: NetworkParams,
    pub loss_history: Vec<f64>,
    pub epochs_to_error: EpochsToError,
}

/// Minibatch shuffle seed derived from a network seed.
pub fn shuffle_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

/// Trains from `spec.seed`'s initialization until the threshold is met (when
/// stopping is enabled) or the budget runs out.
pub fn train_network(
    spec: &NetworkSpec,
    data: &LabeledDataset,
    settings: &TrainingSettings,
    mut on_epoch: impl FnMut(EpochView<'_>) -> Result<()>,
) -> Result<TrainingOutcome> {
    settings.validate()?;
    if data.input_dim() != spec.input_dim() || data.output_dim() != spec.output_dim() {
        return Err(Error::shape(format!(
            "data is {}→{}, network is {}→{}",
            data.input_dim(),
            data.output_dim(),
            spec.input_dim(),
            spec.output_dim()
        )));
    }
    let mut params = init_network(spec)?;
    let mut state = OptimizerState::new(settings.optimizer, settings.schedule.rate_at(1));
    let initial = evaluate_loss(&params, spec, data)?;
    let mut loss_history = vec![initial];
    on_epoch(EpochView {
        epoch: 0,
        params: &params,
        loss: initial,
    })?;
    let mut reached = (initial <= settings.threshold).then_some(0);
    let mut epoch = 0;
    while epoch < settings.budget && !(settings.stop_at_threshold && reached.is_some()) {
        epoch += 1;
        state.learning_rate = settings.schedule.rate_at(epoch);
        let loss = train_epoch(
            &mut params,
            spec,
            &mut state,
            data,
            settings.batch_size,
            shuffle_seed(spec.seed),
            epoch,
        )?;
        loss_history.push(loss);
        if reached.is_none() && loss <= settings.threshold {
            reached = Some(epoch);
        }
        on_epoch(EpochView {
            epoch,
            params: &params,
            loss,
        })?;
    }
    let epochs_to_error = match reached {
        Some(e) => EpochsToError::Reached(e),
        None => EpochsToError::Exceeded {
            budget: settings.budget,
        },
    };
    Ok(TrainingOutcome {
        params,
        loss_history,
        epochs_to_error,
    })
}

/// Epochs until the epoch-mean training loss first reaches `settings.threshold`.
pub fn epochs_to_error(
    spec: &NetworkSpec,
    data: &LabeledDataset,
    settings: &TrainingSettings,
) -> Result<EpochsToError> {
    Ok(train_network(spec, data, settings, |_| Ok(()))?.epochs_to_error)
}

/// LFR sweep and RDF of one effective target at one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerCurve {
    pub epoch: u64,
    /// Activation superscript `l` of `S^[l]`.
    pub layer: usize,
    pub sweep: FilterSweep,
    pub rdf: RdfCurve,
    /// `None` when the RDF has no positive slope.
    pub peak: Option<f64>,
}

pub fn analyze_effective_target(
    target: &EffectiveTarget,
    epoch: u64,
    grid: &FilterWidthGrid,
    normalize_rdf: bool,
) -> Result<LayerCurve> {
    let sweep = lfr_sweep(&target.dataset, grid)?;
    let rdf = rdf_from_lfr(&sweep, normalize_rdf)?;
    let peak = match rdf_peak(&rdf) {
        Ok(p) => Some(p),
        Err(Error::NoPeak) => None,
        Err(e) => return Err(e),
    };
    Ok(LayerCurve {
        epoch,
        layer: target.activation_layer(),
        sweep,
        rdf,
        peak,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub seed: u64,
    /// Number of hidden layers.
    pub depth: usize,
    pub layer_sizes: Vec<usize>,
    pub residual: bool,
    /// Epochs with recorded curves, ascending.
    pub epochs: Vec<u64>,
    /// Activation superscripts with recorded curves.
    pub layers: Vec<usize>,
    /// Untrained loss followed by each epoch's mean minibatch loss.
    pub loss_history: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy_history: Option<Vec<f64>>,
    pub epochs_to_error: EpochsToError,
    /// Curves ordered by epoch, then layer.
    pub curves: Vec<LayerCurve>,
}

impl TrajectoryRecord {
    pub fn trained_epochs(&self) -> u64 {
        self.loss_history.len() as u64 - 1
    }

    pub fn curve(&self, epoch: u64, layer: usize) -> Option<&LayerCurve> {
        self.curves.iter().find(|c| c.epoch == epoch && c.layer == layer)
    }

    /// RDF peak of each recorded layer at `epoch`, in layer order.
    pub fn peaks_at(&self, epoch: u64) -> Vec<(usize, Option<f64>)> {
        self.layers
            .iter()
            .map(|&l| (l, self.curve(epoch, l).and_then(|c| c.peak)))
            .collect()
    }
}

fn is_one_hot(targets: &Array2<f64>) -> bool {
    targets.ncols() > 1
        && targets
            .axis_iter(Axis(0))
            .all(|row| row.iter().filter(|v| **v == 1.0).count() == 1 && row.iter().all(|v| *v == 0.0 || *v == 1.0))
}

fn selected_layers(selection: &LayerSelection, spec: &NetworkSpec) -> Result<Vec<usize>> {
    let num_layers = spec.num_layers();
    let mut layers = match selection {
        LayerSelection::Hidden => (1..num_layers).collect(),
        LayerSelection::All => (0..num_layers).collect(),
        LayerSelection::List(list) => list
            .iter()
            .map(|&l| {
                let a = resolve_activation_layer(l, num_layers)?;
                if a == num_layers {
                    Err(Error::LayerIndex {
                        index: l,
                        layers: num_layers,
                    })
                } else {
                    Ok(a)
                }
            })
            .collect::<Result<Vec<_>>>()?,
    };
    layers.sort_unstable();
    layers.dedup();
    Ok(layers)
}

/// Trains one network and records LFR/RDF curves of the selected effective
/// targets at every scheduled epoch, plus the last trained epoch.
pub fn run_trajectory(
    config: &ExperimentConfig,
    data: &LabeledDataset,
    depth: usize,
    seed: u64,
) -> Result<TrajectoryRecord> {
    Ok(trajectory(config, data, depth, seed)?.0)
}

fn trajectory(
    config: &ExperimentConfig,
    data: &LabeledDataset,
    depth: usize,
    seed: u64,
) -> Result<(TrajectoryRecord, NetworkSpec, NetworkParams)> {
    let spec = config.network_spec(data.input_dim(), data.output_dim(), depth, seed);
    spec.validate()?;
    let layers = selected_layers(&config.layers, &spec)?;
    let scheduled = config.epochs.epochs(config.training.budget);
    let track_accuracy = is_one_hot(&data.targets().to_owned());

    let mut curves = Vec::new();
    let mut recorded = Vec::new();
    let mut accuracy_history = Vec::new();
    let mut last_params: Option<(u64, NetworkParams)> = None;

    let record = |epoch: u64, params: &NetworkParams, curves: &mut Vec<LayerCurve>| -> Result<()> {
        let targets = effective_targets_for(params, &spec, data, &layers)?;
        let new: Vec<LayerCurve> = targets
            .par_iter()
            .map(|t| analyze_effective_target(t, epoch, &config.grid, config.normalize_rdf))
            .collect::<Result<_>>()?;
        curves.extend(new);
        Ok(())
    };

    let outcome = train_network(&spec, data, &config.training, |view| {
        if track_accuracy {
            accuracy_history.push(accuracy(view.params, &spec, data)?);
        }
        if scheduled.contains(&view.epoch) {
            record(view.epoch, view.params, &mut curves)?;
            recorded.push(view.epoch);
            last_params = None;
        } else {
            last_params = Some((view.epoch, view.params.clone()));
        }
        Ok(())
    })?;
    if let Some((epoch, params)) = last_params {
        record(epoch, &params, &mut curves)?;
        recorded.push(epoch);
    }

    let record = TrajectoryRecord {
        seed,
        depth,
        layer_sizes: spec.layer_sizes.clone(),
        residual: spec.residual,
        epochs: recorded,
        layers,
        loss_history: outcome.loss_history,
        accuracy_history: track_accuracy.then_some(accuracy_history),
        epochs_to_error: outcome.epochs_to_error,
        curves,
    };
    Ok((record, spec, outcome.params))
}

pub const RECORD_FORMAT: &str = "freqlens-record";
pub const RECORD_VERSION: u32 = 1;

/// Every run of an experiment: one trajectory per (depth, seed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub format: String,
    pub version: u32,
    pub config: BTreeMap<String, String>,
    pub runs: Vec<TrajectoryRecord>,
}

impl ExperimentRecord {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: Self = serde_json::from_str(text)?;
        if record.format != RECORD_FORMAT || record.version != RECORD_VERSION {
            return Err(Error::Config(format!(
                "unsupported record {} v{}",
                record.format, record.version
            )));
        }
        Ok(record)
    }

    /// `(depth, per-seed results, median)` for each depth in first-seen order.
    pub fn depth_summary(&self) -> Vec<(usize, Vec<EpochsToError>, Option<f64>)> {
        let mut depths: Vec<usize> = Vec::new();
        for r in &self.runs {
            if !depths.contains(&r.depth) {
                depths.push(r.depth);
            }
        }
        depths
            .into_iter()
            .map(|d| {
                let results: Vec<EpochsToError> = self
                    .runs
                    .iter()
                    .filter(|r| r.depth == d)
                    .map(|r| r.epochs_to_error)
                    .collect();
                let median = median_epochs(&results);
                (d, results, median)
            })
            .collect()
    }
}

/// Runs every (depth, seed) pair of the config. Runs are independent and may
/// execute concurrently; output order is depth-major, then seed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(ExperimentRecord, Vec<(NetworkSpec, NetworkParams)>)> {
    let data = config.data.load()?;
    let jobs: Vec<(usize, u64)> = config
        .depths
        .iter()
        .flat_map(|&d| config.seeds.iter().map(move |&s| (d, s)))
        .collect();
    let results: Vec<(TrajectoryRecord, NetworkSpec, NetworkParams)> = jobs
        .par_iter()
        .map(|&(depth, seed)| trajectory(config, &data, depth, seed))
        .collect::<Result<_>>()?;
    let mut runs = Vec::with_capacity(results.len());
    let mut checkpoints = Vec::with_capacity(results.len());
    for (record, spec, params) in results {
        runs.push(record);
        checkpoints.push((spec, params));
    }
    Ok((
        ExperimentRecord {
            format: RECORD_FORMAT.to_string(),
            version: RECORD_VERSION,
            config: config.pairs().clone(),
            runs,
        },
        checkpoints,
    ))
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties; `None` when either
/// side is constant or the lengths differ.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;
    use crate::network::Activation;

    #[test]
    fn median_handles_overruns() {
        use EpochsToError::*;
        assert_eq!(median_epochs(&[Reached(5), Reached(1), Reached(9)]), Some(5.0));
        assert_eq!(median_epochs(&[Reached(4), Reached(2)]), Some(3.0));
        assert_eq!(
            median_epochs(&[Reached(4), Exceeded { budget: 9 }, Exceeded { budget: 9 }]),
            None
        );
        assert_eq!(
            median_epochs(&[Reached(4), Reached(6), Exceeded { budget: 9 }]),
            Some(6.0)
        );
        assert_eq!(median_epochs(&[]), None);
    }

    #[test]
    fn first_epoch_below_threshold() {
        let h = [1.0, 0.5, 0.2, 0.3, 0.05];
        assert_eq!(first_epoch_below(&h, 10.0), Some(0));
        assert_eq!(first_epoch_below(&h, 0.25), Some(2));
        assert_eq!(first_epoch_below(&h, 0.01), None);
    }

    #[test]
    fn spearman_basics() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]), None);
        let r = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 3.0, 2.0]).unwrap();
        // ranks y = 1, 3.5, 3.5, 2: sxy = 1.5, sxx = 5, syy = 4.5
        let expected = 1.5 / 22.5f64.sqrt();
        assert!((r - expected).abs() < 1e-12, "{r} vs {expected}");
    }

    #[test]
    fn layer_resolution() {
        assert_eq!(resolve_layer(1, 4).unwrap(), 1);
        assert_eq!(resolve_layer(-2, 4).unwrap(), 3);
        assert!(resolve_layer(0, 4).is_err());
        assert!(resolve_layer(5, 4).is_err());
        assert_eq!(resolve_activation_layer(0, 4).unwrap(), 0);
        assert_eq!(resolve_activation_layer(-3, 4).unwrap(), 2);
    }

    #[test]
    fn first_layer_target_is_normalized_source() {
        let spec = NetworkSpec::new(vec![2, 3, 1], Activation::Tanh).with_seed(1);
        let params = init_network(&spec).unwrap();
        let source = LabeledDataset::new(
            array![[2.0, -1.0], [0.5, 4.0], [-1.0, 2.0]],
            array![[1.0], [0.0], [-1.0]],
        )
        .unwrap();
        let t = effective_target_dataset(&params, &spec, &source, 1).unwrap();
        assert_eq!(t.activation_layer(), 0);
        assert_eq!(t.dataset, source.normalize_dimensions());
        assert!(effective_target_dataset(&params, &spec, &source, 3).is_err());
    }
}
