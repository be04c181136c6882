//! Fully connected feedforward networks written out by hand.
//!
//! An `L`-layer network maps `f^[0](x) = x` through hidden layers
//! `f^[l] = σ(W^[l-1] f^[l-1] + b^[l-1])` for `1 <= l <= L-1` and an affine
//! output `f^[L] = W^[L-1] f^[L-1] + b^[L-1]`. With `residual` set, every
//! hidden layer whose input is also hidden becomes
//! `f^[l] = f^[l-1] + σ(W^[l-1] f^[l-1] + b^[l-1])`.
//!
//! Batches are stored one sample per row, so a layer computes `X Wᵀ + b`.

mod checkpoint;
mod loss;
mod optim;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

pub use checkpoint::Checkpoint;
pub use loss::{batch_loss, loss, softmax, LossKind};
pub use optim::{optimizer_step, LearningRateSchedule, OptimizerKind, OptimizerState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation value `a = σ(z)`.
    #[inline]
    fn derivative_at_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        })
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::Unknown {
                what: "activation",
                name: other.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    /// `[m_0 = d, m_1, ..., m_L = d_o]`.
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    pub residual: bool,
    pub loss: LossKind,
    pub seed: u64,
}

impl NetworkSpec {
    pub fn new(layer_sizes: Vec<usize>, activation: Activation) -> Self {
        Self {
            layer_sizes,
            activation,
            residual: false,
            loss: LossKind::Mse,
            seed: 0,
        }
    }

    /// `depth` hidden layers of `width` units between `input` and `output`.
    pub fn uniform(input: usize, width: usize, depth: usize, output: usize, activation: Activation) -> Self {
        let mut sizes = vec![input];
        sizes.extend(std::iter::repeat_n(width, depth));
        sizes.push(output);
        Self::new(sizes, activation)
    }

    pub fn with_residual(mut self, residual: bool) -> Self {
        self.residual = residual;
        self
    }

    pub fn with_loss(mut self, loss: LossKind) -> Self {
        self.loss = loss;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "need at least input and output sizes, got {:?}",
                self.layer_sizes
            )));
        }
        if self.layer_sizes.contains(&0) {
            return Err(Error::InvalidSpec(format!(
                "layer sizes must be >= 1, got {:?}",
                self.layer_sizes
            )));
        }
        if self.residual {
            let hidden = &self.layer_sizes[1..self.layer_sizes.len() - 1];
            if hidden.windows(2).any(|p| p[0] != p[1]) {
                return Err(Error::InvalidSpec(format!(
                    "residual connections need equal hidden widths, got {hidden:?}"
                )));
            }
        }
        Ok(())
    }

    /// Number of affine layers `L`.
    pub fn num_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn num_hidden(&self) -> usize {
        self.num_layers() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        self.layer_sizes[self.layer_sizes.len() - 1]
    }

    /// Whether `f^[layer]` carries an identity skip from `f^[layer-1]`.
    pub fn has_skip(&self, layer: usize) -> bool {
        self.residual && layer >= 2 && layer < self.num_layers()
    }
}

/// Converts the `-l` layer notation (output = -1, last hidden = -2) to the
/// positive index `L - l + 1`.
pub fn layer_by_negative_index(negative: i64, num_layers: usize) -> Result<usize> {
    let l = num_layers as i64;
    if (-l..=-1).contains(&negative) {
        Ok((l + negative + 1) as usize)
    } else {
        Err(Error::LayerIndex {
            index: negative,
            layers: num_layers,
        })
    }
}

/// Weights `W^[l]` (`m_{l+1} × m_l`) and biases `b^[l]` for `l = 0..L-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl NetworkParams {
    pub fn zeros(spec: &NetworkSpec) -> Self {
        let sizes = &spec.layer_sizes;
        Self {
            weights: sizes.windows(2).map(|p| Array2::zeros((p[1], p[0]))).collect(),
            biases: sizes[1..].iter().map(|&m| Array1::zeros(m)).collect(),
        }
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>() + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// All parameters, weights of each layer (row-major) followed by its bias.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }

    pub fn set_flat(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.num_params() {
            return Err(Error::shape(format!(
                "expected {} parameters, got {}",
                self.num_params(),
                values.len()
            )));
        }
        let mut it = values.iter();
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            for v in w.iter_mut().chain(b.iter_mut()) {
                *v = *it.next().expect("length checked");
            }
        }
        Ok(())
    }

    fn check_shapes(&self, spec: &NetworkSpec) -> Result<()> {
        let sizes = &spec.layer_sizes;
        let ok = self.weights.len() == spec.num_layers()
            && self.biases.len() == spec.num_layers()
            && sizes
                .windows(2)
                .zip(&self.weights)
                .all(|(p, w)| w.dim() == (p[1], p[0]))
            && sizes[1..].iter().zip(&self.biases).all(|(&m, b)| b.len() == m);
        if ok {
            Ok(())
        } else {
            Err(Error::shape(format!("parameters do not match layer sizes {sizes:?}")))
        }
    }
}

/// Gaussian fan-in initialization: `W^[l]` entries have standard deviation
/// `1/√m_l`, biases start at zero. Deterministic in `spec.seed`.
pub fn init_network(spec: &NetworkSpec) -> Result<NetworkParams> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut params = NetworkParams::zeros(spec);
    for w in &mut params.weights {
        let fan_in = w.ncols() as f64;
        let normal = Normal::new(0.0, 1.0 / fan_in.sqrt()).expect("positive std");
        for v in w.iter_mut() {
            *v = normal.sample(&mut rng);
        }
    }
    Ok(params)
}

/// Every layer value of a batch forward pass.
#[derive(Debug, Clone)]
pub struct BatchActivations {
    /// `f^[0] .. f^[L]`, one `batch × m_l` matrix each.
    pub layers: Vec<Array2<f64>>,
    /// `σ(W f + b)` for hidden layers `1..L-1` (index 0 is layer 1). Equal to
    /// `layers[l]` unless the layer has a skip connection.
    branches: Vec<Array2<f64>>,
}

impl BatchActivations {
    pub fn output(&self) -> &Array2<f64> {
        self.layers.last().expect("at least one layer")
    }
}

pub fn forward_batch(
    params: &NetworkParams,
    spec: &NetworkSpec,
    inputs: ArrayView2<'_, f64>,
) -> Result<BatchActivations> {
    spec.validate()?;
    params.check_shapes(spec)?;
    if inputs.ncols() != spec.input_dim() {
        return Err(Error::shape(format!(
            "input has {} columns, network expects {}",
            inputs.ncols(),
            spec.input_dim()
        )));
    }
    let num_layers = spec.num_layers();
    let mut layers = Vec::with_capacity(num_layers + 1);
    let mut branches = Vec::with_capacity(num_layers - 1);
    layers.push(inputs.to_owned());
    for l in 0..num_layers {
        let prev = &layers[l];
        let mut z = prev.dot(&params.weights[l].t());
        z += &params.biases[l];
        if l + 1 == num_layers {
            layers.push(z);
        } else {
            let act = spec.activation;
            z.mapv_inplace(|v| act.apply(v));
            if spec.has_skip(l + 1) {
                let next = prev + &z;
                branches.push(z);
                layers.push(next);
            } else {
                branches.push(z.clone());
                layers.push(z);
            }
        }
    }
    Ok(BatchActivations { layers, branches })
}

/// Output of a single-sample forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardPass {
    pub output: Array1<f64>,
    /// Hidden activations `f^[1] .. f^[L-1]`.
    pub hidden: Vec<Array1<f64>>,
}

pub fn forward(params: &NetworkParams, spec: &NetworkSpec, x: ArrayView1<'_, f64>) -> Result<ForwardPass> {
    let batch = x.insert_axis(Axis(0));
    let acts = forward_batch(params, spec, batch)?;
    let mut layers: Vec<Array1<f64>> = acts.layers.into_iter().map(|m| m.index_axis_move(Axis(0), 0)).collect();
    let output = layers.pop().expect("output layer");
    layers.remove(0);
    Ok(ForwardPass { output, hidden: layers })
}

/// Mean batch loss and its gradient with respect to every parameter.
pub fn loss_and_gradients(
    params: &NetworkParams,
    spec: &NetworkSpec,
    inputs: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
) -> Result<(f64, NetworkParams)> {
    if inputs.nrows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if targets.nrows() != inputs.nrows() || targets.ncols() != spec.output_dim() {
        return Err(Error::shape(format!(
            "targets are {}×{}, expected {}×{}",
            targets.nrows(),
            targets.ncols(),
            inputs.nrows(),
            spec.output_dim()
        )));
    }
    let acts = forward_batch(params, spec, inputs)?;
    let (value, mut upstream) = loss::loss_and_output_grad(acts.output().view(), targets, spec.loss)?;

    let num_layers = spec.num_layers();
    let mut grads = NetworkParams::zeros(spec);
    for l in (0..num_layers).rev() {
        // upstream = dL/d f^[l+1]
        let dz = if l + 1 == num_layers {
            upstream.clone()
        } else {
            let mut dz = upstream.clone();
            let act = spec.activation;
            Zip::from(&mut dz)
                .and(&acts.branches[l])
                .for_each(|g, &a| *g *= act.derivative_at_output(a));
            dz
        };
        grads.weights[l] = dz.t().dot(&acts.layers[l]);
        grads.biases[l] = dz.sum_axis(Axis(0));
        if l > 0 {
            let mut next = dz.dot(&params.weights[l]);
            if spec.has_skip(l + 1) {
                next += &upstream;
            }
            upstream = next;
        }
    }
    Ok((value, grads))
}

/// Gradient of the mean batch loss.
pub fn backprop(
    params: &NetworkParams,
    spec: &NetworkSpec,
    inputs: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
) -> Result<NetworkParams> {
    Ok(loss_and_gradients(params, spec, inputs, targets)?.1)
}

/// Mean loss of the network over a whole dataset.
pub fn evaluate_loss(params: &NetworkParams, spec: &NetworkSpec, data: &LabeledDataset) -> Result<f64> {
    let acts = forward_batch(params, spec, data.points())?;
    batch_loss(acts.output().view(), data.targets(), spec.loss)
}

/// Fraction of rows whose arg-max output matches the arg-max target.
pub fn accuracy(params: &NetworkParams, spec: &NetworkSpec, data: &LabeledDataset) -> Result<f64> {
    let acts = forward_batch(params, spec, data.points())?;
    let argmax = |row: ArrayView1<'_, f64>| {
        row.iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |best, (i, &v)| if v > best.1 { (i, v) } else { best },
            )
            .0
    };
    let hits = acts
        .output()
        .rows()
        .into_iter()
        .zip(data.targets().rows())
        .filter(|(o, t)| argmax(o.view()) == argmax(t.view()))
        .count();
    Ok(hits as f64 / data.len() as f64)
}

/// One pass over `data` in shuffled minibatches. The permutation depends only
/// on `(shuffle_seed, epoch)`. Returns the mean of the per-batch losses.
pub fn train_epoch(
    params: &mut NetworkParams,
    spec: &NetworkSpec,
    state: &mut OptimizerState,
    data: &LabeledDataset,
    batch_size: usize,
    shuffle_seed: u64,
    epoch: u64,
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if batch_size == 0 {
        return Err(Error::param("batch size must be >= 1"));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed);
    rng.set_stream(epoch);
    order.shuffle(&mut rng);

    let mut total = 0.0;
    let mut batches = 0;
    for chunk in order.chunks(batch_size) {
        let x = data.points().select(Axis(0), chunk);
        let y = data.targets().select(Axis(0), chunk);
        let (value, grads) = loss_and_gradients(params, spec, x.view(), y.view())?;
        state.step(params, &grads)?;
        total += value;
        batches += 1;
    }
    Ok(total / batches as f64)
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;

    fn tiny_spec(sizes: &[usize]) -> NetworkSpec {
        NetworkSpec::new(sizes.to_vec(), Activation::Tanh).with_seed(11)
    }

    #[test]
    fn negative_layer_indexing() {
        assert_eq!(layer_by_negative_index(-1, 5).unwrap(), 5);
        assert_eq!(layer_by_negative_index(-2, 5).unwrap(), 4);
        assert_eq!(layer_by_negative_index(-5, 5).unwrap(), 1);
        assert!(layer_by_negative_index(0, 5).is_err());
        assert!(layer_by_negative_index(-6, 5).is_err());
    }

    #[test]
    fn init_shapes_and_determinism() {
        let spec = tiny_spec(&[2, 5, 1]);
        let a = init_network(&spec).unwrap();
        let b = init_network(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.weights[0].dim(), (5, 2));
        assert_eq!(a.weights[1].dim(), (1, 5));
        assert!(a.biases.iter().all(|b| b.iter().all(|v| *v == 0.0)));
        let c = init_network(&spec.clone().with_seed(12)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn init_std_matches_fan_in() {
        let spec = tiny_spec(&[2, 50_000, 1]);
        let p = init_network(&spec).unwrap();
        let w = &p.weights[0];
        let n = w.len() as f64;
        let mean = w.sum() / n;
        let var = w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        let target = 1.0 / 2f64.sqrt();
        assert!((var.sqrt() - target).abs() / target < 0.02);
    }

    #[test]
    fn residual_requires_equal_hidden_widths() {
        let spec = tiny_spec(&[3, 4, 5, 1]).with_residual(true);
        assert!(matches!(init_network(&spec), Err(Error::InvalidSpec(_))));
        let ok = tiny_spec(&[3, 4, 4, 1]).with_residual(true);
        assert!(init_network(&ok).is_ok());
        assert!(init_network(&tiny_spec(&[3])).is_err());
        assert!(init_network(&tiny_spec(&[3, 0, 1])).is_err());
    }

    #[test]
    fn zero_params_give_zero_activations() {
        let spec = tiny_spec(&[3, 4, 4, 2]);
        let p = NetworkParams::zeros(&spec);
        let out = forward(&p, &spec, array![0.3, -1.0, 2.0].view()).unwrap();
        assert!(out.output.iter().all(|v| *v == 0.0));
        assert_eq!(out.hidden.len(), 2);
        assert!(out.hidden.iter().all(|h| h.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn single_affine_identity() {
        let spec = tiny_spec(&[3, 3]);
        let mut p = NetworkParams::zeros(&spec);
        p.weights[0] = Array2::eye(3);
        let x = array![0.5, -2.0, 7.0];
        let out = forward(&p, &spec, x.view()).unwrap();
        assert_eq!(out.output, x);
        assert!(out.hidden.is_empty());
    }

    #[test]
    fn forward_matches_scalar_evaluation() {
        let spec = tiny_spec(&[2, 3, 1]);
        let p = init_network(&spec).unwrap();
        let x = [0.4, -0.9];
        let mut h = [0.0; 3];
        for (i, hi) in h.iter_mut().enumerate() {
            let mut z = p.biases[0][i];
            for (j, xj) in x.iter().enumerate() {
                z += p.weights[0][[i, j]] * xj;
            }
            *hi = z.tanh();
        }
        let mut y = p.biases[1][0];
        for (j, hj) in h.iter().enumerate() {
            y += p.weights[1][[0, j]] * hj;
        }
        let out = forward(&p, &spec, array![x[0], x[1]].view()).unwrap();
        assert!((out.output[0] - y).abs() < 1e-14);
        for (a, b) in out.hidden[0].iter().zip(h) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn residual_with_zero_params_propagates_first_hidden() {
        let spec = tiny_spec(&[3, 3, 3, 3, 1]).with_residual(true);
        let mut p = NetworkParams::zeros(&spec);
        p.weights[0] = Array2::eye(3);
        let x = array![0.2, -0.1, 0.4];
        let out = forward(&p, &spec, x.view()).unwrap();
        let first = x.mapv(f64::tanh);
        for h in &out.hidden {
            assert_eq!(h, &first);
        }
    }

    #[test]
    fn forward_rejects_wrong_input_length() {
        let spec = tiny_spec(&[2, 3, 1]);
        let p = init_network(&spec).unwrap();
        assert!(matches!(forward(&p, &spec, array![1.0].view()), Err(Error::Shape(_))));
    }

    #[test]
    fn perfect_fit_has_zero_gradient() {
        let spec = tiny_spec(&[2, 2]);
        let mut p = NetworkParams::zeros(&spec);
        p.weights[0] = array![[1.0, 2.0], [-1.0, 0.5]];
        let x = array![[0.3, 0.1], [1.0, -2.0]];
        let y = x.dot(&p.weights[0].t());
        let g = backprop(&p, &spec, x.view(), y.view()).unwrap();
        assert!(g.to_flat().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_affine_closed_form_gradient() {
        let spec = tiny_spec(&[3, 2]);
        let mut p = NetworkParams::zeros(&spec);
        p.weights[0] = array![[0.2, -0.4, 1.0], [0.7, 0.1, -0.3]];
        p.biases[0] = array![0.05, -0.2];
        let x = array![0.5, -1.5, 2.0];
        let y = array![1.0, -1.0];
        let resid = p.weights[0].dot(&x) + &p.biases[0] - &y;
        let g = backprop(&p, &spec, x.view().insert_axis(Axis(0)), y.view().insert_axis(Axis(0))).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                let expected = 2.0 * resid[i] * x[j] / 2.0;
                assert!((g.weights[0][[i, j]] - expected).abs() < 1e-14);
            }
            assert!((g.biases[0][i] - resid[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn backprop_rejects_empty_and_mismatched() {
        let spec = tiny_spec(&[2, 3, 1]);
        let p = init_network(&spec).unwrap();
        let x = Array2::<f64>::zeros((0, 2));
        let y = Array2::<f64>::zeros((0, 1));
        assert!(backprop(&p, &spec, x.view(), y.view()).is_err());
        let x = Array2::<f64>::zeros((2, 2));
        let y = Array2::<f64>::zeros((3, 1));
        assert!(matches!(backprop(&p, &spec, x.view(), y.view()), Err(Error::Shape(_))));
    }

    #[test]
    fn zero_learning_rate_keeps_params() {
        let spec = tiny_spec(&[1, 4, 1]);
        let mut p = init_network(&spec).unwrap();
        let before = p.clone();
        let data = LabeledDataset::from_1d(&[0.0, 0.5, 1.0, -0.5], &[1.0, 0.0, -1.0, 0.3]).unwrap();
        let eval = evaluate_loss(&p, &spec, &data).unwrap();
        let mut state = OptimizerState::adam(0.0);
        let epoch_loss = train_epoch(&mut p, &spec, &mut state, &data, 4, 3, 1).unwrap();
        assert_eq!(p, before);
        assert!((epoch_loss - eval).abs() < 1e-15);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn training_is_deterministic() {
        let spec = tiny_spec(&[1, 8, 8, 1]);
        let xs: Vec<f64> = (0..20).map(|i| i as f64 / 10.0 - 1.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x).sin()).collect();
        let data = LabeledDataset::from_1d(&xs, &ys).unwrap();
        let run = || {
            let mut p = init_network(&spec).unwrap();
            let mut s = OptimizerState::adam(1e-2);
            let losses: Vec<f64> = (1..=5)
                .map(|e| train_epoch(&mut p, &spec, &mut s, &data, 6, 99, e).unwrap())
                .collect();
            (p, losses)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn linear_regression_loss_decreases() {
        let spec = NetworkSpec::new(vec![1, 1], Activation::Tanh).with_seed(5);
        let xs: Vec<f64> = (0..16).map(|i| i as f64 / 8.0 - 1.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 0.5).collect();
        let data = LabeledDataset::from_1d(&xs, &ys).unwrap();
        let mut p = init_network(&spec).unwrap();
        let mut s = OptimizerState::sgd(0.05);
        let mut last = f64::INFINITY;
        for epoch in 1..=10 {
            let l = train_epoch(&mut p, &spec, &mut s, &data, 16, 0, epoch).unwrap();
            assert!(l < last, "epoch {epoch}: {l} >= {last}");
            last = l;
        }
    }

    #[test]
    fn train_epoch_rejects_zero_batch() {
        let spec = tiny_spec(&[1, 1]);
        let mut p = init_network(&spec).unwrap();
        let data = LabeledDataset::from_1d(&[0.0], &[1.0]).unwrap();
        let mut s = OptimizerState::sgd(0.1);
        assert!(train_epoch(&mut p, &spec, &mut s, &data, 0, 0, 1).is_err());
    }

    #[test]
    fn flat_round_trip() {
        let spec = tiny_spec(&[2, 3, 2]);
        let p = init_network(&spec).unwrap();
        let mut q = NetworkParams::zeros(&spec);
        q.set_flat(&p.to_flat()).unwrap();
        assert_eq!(p, q);
        assert!(q.set_flat(&[1.0]).is_err());
    }
}
