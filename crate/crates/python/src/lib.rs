//! Python bindings. Matrices cross the boundary as lists of rows.

use std::path::PathBuf;

use ::freqlens::experiment::{self, shuffle_seed, TargetKind};
use ::freqlens::network::{
    self, Activation, Checkpoint, LossKind, NetworkParams, NetworkSpec, OptimizerKind, OptimizerState,
};
use ::freqlens::spectral::{self, UniformSignal};
use ::freqlens::{filter, Error, FilterSweep, FilterWidthGrid, LabeledDataset};
use ndarray::Array2;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn matrix(rows: Vec<Vec<f64>>, what: &str) -> PyResult<Array2<f64>> {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err(format!("{what} rows have unequal lengths")));
    }
    Array2::from_shape_vec((n, d), rows.into_iter().flatten().collect())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

fn rows(m: ndarray::ArrayView2<'_, f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn parse<T: std::str::FromStr<Err = Error>>(text: &str) -> PyResult<T> {
    text.parse().map_err(py_err)
}

/// Labeled point cloud `{(x_i, y_i)}`.
#[pyclass(name = "Dataset", module = "freqlens", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDataset {
    inner: LabeledDataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    fn new(points: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = LabeledDataset::new(matrix(points, "points")?, matrix(targets, "targets")?).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_1d(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: LabeledDataset::from_1d(&xs, &ys).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn read_csv(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: LabeledDataset::read_csv(path).map_err(py_err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (images, labels, max_n=None, downsample=1))]
    fn read_idx(images: PathBuf, labels: PathBuf, max_n: Option<usize>, downsample: usize) -> PyResult<Self> {
        Ok(Self {
            inner: experiment::load_idx_dataset(images, labels, max_n, downsample).map_err(py_err)?,
        })
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        self.inner.write_csv(path).map_err(py_err)
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv_string()
    }

    fn points(&self) -> Vec<Vec<f64>> {
        rows(self.inner.points())
    }

    fn targets(&self) -> Vec<Vec<f64>> {
        rows(self.inner.targets())
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    #[getter]
    fn output_dim(&self) -> usize {
        self.inner.output_dim()
    }

    fn normalize_dimensions(&self) -> Self {
        Self {
            inner: self.inner.normalize_dimensions(),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(n={}, d={}, d_o={})",
            self.inner.len(),
            self.inner.input_dim(),
            self.inner.output_dim()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (kind, n, seed=0))]
fn synth_target(kind: &str, n: usize, seed: u64) -> PyResult<PyDataset> {
    let kind: TargetKind = parse(kind)?;
    Ok(PyDataset {
        inner: experiment::synth_target(&kind, n, None, seed).map_err(py_err)?,
    })
}

#[pyfunction]
fn lfr(data: &PyDataset, delta: f64) -> PyResult<f64> {
    filter::lfr(&data.inner, delta).map_err(py_err)
}

#[pyfunction]
fn low_pass_filter(data: &PyDataset, delta: f64) -> PyResult<Vec<Vec<f64>>> {
    Ok(rows(
        filter::low_pass_filter(&data.inner, delta).map_err(py_err)?.view(),
    ))
}

/// LFR at every `1/δ` of a log-spaced grid: `(inv_delta, lfr)`.
#[pyfunction]
#[pyo3(signature = (data, lo=filter::DEFAULT_GRID_LO, hi=filter::DEFAULT_GRID_HI, count=filter::DEFAULT_GRID_COUNT))]
fn lfr_sweep(data: &PyDataset, lo: f64, hi: f64, count: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let grid = FilterWidthGrid::log_spaced(lo, hi, count).map_err(py_err)?;
    let sweep = filter::lfr_sweep(&data.inner, &grid).map_err(py_err)?;
    Ok((sweep.grid.widths().to_vec(), sweep.lfr_values))
}

/// `(midpoints, slopes)` of the RDF for a sweep given as parallel lists.
#[pyfunction]
#[pyo3(signature = (inv_delta, lfr_values, normalize=false))]
fn rdf_from_lfr(inv_delta: Vec<f64>, lfr_values: Vec<f64>, normalize: bool) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let sweep = FilterSweep {
        grid: FilterWidthGrid::new(inv_delta).map_err(py_err)?,
        lfr_values,
        warnings: Vec::new(),
    };
    let rdf = filter::rdf_from_lfr(&sweep, normalize).map_err(py_err)?;
    Ok((rdf.midpoints, rdf.slopes))
}

/// Peak location of an RDF, or `None` when no slope is positive.
#[pyfunction]
fn rdf_peak(midpoints: Vec<f64>, slopes: Vec<f64>) -> PyResult<Option<f64>> {
    if midpoints.len() != slopes.len() {
        return Err(PyValueError::new_err("midpoints and slopes differ in length"));
    }
    let curve = filter::RdfCurve {
        midpoints,
        slopes,
        normalized: false,
    };
    match filter::rdf_peak(&curve) {
        Ok(p) => Ok(Some(p)),
        Err(Error::NoPeak) => Ok(None),
        Err(e) => Err(py_err(e)),
    }
}

fn signal(values: Vec<f64>, start: f64, end: f64) -> PyResult<UniformSignal> {
    UniformSignal::new(values, start, end).map_err(py_err)
}

/// Fraction of spectral power at `|k| <= k0` for samples of one period `[start, end)`.
#[pyfunction]
fn exact_lfr(values: Vec<f64>, start: f64, end: f64, k0: f64) -> PyResult<f64> {
    spectral::exact_lfr(&signal(values, start, end)?, k0).map_err(py_err)
}

#[pyfunction]
fn spectral_gaussian_lfr(values: Vec<f64>, start: f64, end: f64, delta: f64) -> PyResult<f64> {
    spectral::spectral_gaussian_lfr(&signal(values, start, end)?, delta).map_err(py_err)
}

#[pyfunction]
fn compare_filter_vs_spectral(values: Vec<f64>, start: f64, end: f64, delta: f64) -> PyResult<f64> {
    spectral::compare_filter_vs_spectral(&signal(values, start, end)?, delta).map_err(py_err)
}

#[pyfunction]
fn layer_by_negative_index(negative: i64, num_layers: usize) -> PyResult<usize> {
    network::layer_by_negative_index(negative, num_layers).map_err(py_err)
}

#[pyfunction]
fn spearman(xs: Vec<f64>, ys: Vec<f64>) -> Option<f64> {
    experiment::spearman(&xs, &ys)
}

/// Fully connected network with its current parameters.
#[pyclass(name = "Network", module = "freqlens")]
struct PyNetwork {
    spec: NetworkSpec,
    params: NetworkParams,
    epochs: u64,
}

#[pymethods]
impl PyNetwork {
    #[new]
    #[pyo3(signature = (layer_sizes, activation="tanh", residual=false, loss="mse", seed=0))]
    fn new(layer_sizes: Vec<usize>, activation: &str, residual: bool, loss: &str, seed: u64) -> PyResult<Self> {
        let activation: Activation = parse(activation)?;
        let loss: LossKind = parse(loss)?;
        let spec = NetworkSpec::new(layer_sizes, activation)
            .with_residual(residual)
            .with_loss(loss)
            .with_seed(seed);
        let params = network::init_network(&spec).map_err(py_err)?;
        Ok(Self {
            spec,
            params,
            epochs: 0,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let ck = Checkpoint::read(path).map_err(py_err)?;
        Ok(Self {
            spec: ck.spec,
            params: ck.params,
            epochs: 0,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        Checkpoint::new(self.spec.clone(), self.params.clone())
            .and_then(|ck| ck.write(path))
            .map_err(py_err)
    }

    #[getter]
    fn layer_sizes(&self) -> Vec<usize> {
        self.spec.layer_sizes.clone()
    }

    #[getter]
    fn num_params(&self) -> usize {
        self.params.num_params()
    }

    #[getter]
    fn epochs_trained(&self) -> u64 {
        self.epochs
    }

    fn forward(&self, points: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        let x = matrix(points, "points")?;
        let acts = network::forward_batch(&self.params, &self.spec, x.view()).map_err(py_err)?;
        Ok(rows(acts.output().view()))
    }

    /// Activations `f^[layer]` for every row of `points`.
    fn activations(&self, points: Vec<Vec<f64>>, layer: usize) -> PyResult<Vec<Vec<f64>>> {
        let x = matrix(points, "points")?;
        let acts = network::forward_batch(&self.params, &self.spec, x.view()).map_err(py_err)?;
        let a = acts
            .layers
            .get(layer)
            .ok_or_else(|| PyValueError::new_err(format!("layer {layer} out of range")))?;
        Ok(rows(a.view()))
    }

    fn loss(&self, data: &PyDataset) -> PyResult<f64> {
        network::evaluate_loss(&self.params, &self.spec, &data.inner).map_err(py_err)
    }

    fn accuracy(&self, data: &PyDataset) -> PyResult<f64> {
        network::accuracy(&self.params, &self.spec, &data.inner).map_err(py_err)
    }

    /// Trains in place for `epochs` epochs and returns each epoch's mean loss.
    /// Optimizer state starts fresh on every call.
    #[pyo3(signature = (data, epochs, lr=1e-3, batch_size=256, optimizer="adam"))]
    fn train(
        &mut self,
        data: &PyDataset,
        epochs: u64,
        lr: f64,
        batch_size: usize,
        optimizer: &str,
    ) -> PyResult<Vec<f64>> {
        let kind: OptimizerKind = parse(optimizer)?;
        let mut state = OptimizerState::new(kind, lr);
        let mut history = Vec::with_capacity(epochs as usize);
        for _ in 0..epochs {
            self.epochs += 1;
            let loss = network::train_epoch(
                &mut self.params,
                &self.spec,
                &mut state,
                &data.inner,
                batch_size,
                shuffle_seed(self.spec.seed),
                self.epochs,
            )
            .map_err(py_err)?;
            history.push(loss);
        }
        Ok(history)
    }

    /// Effective training set `S^[layer-1]` of the learning component starting at `layer`.
    fn effective_target(&self, data: &PyDataset, layer: i64) -> PyResult<PyDataset> {
        let t = experiment::effective_target_dataset(&self.params, &self.spec, &data.inner, layer).map_err(py_err)?;
        Ok(PyDataset { inner: t.dataset })
    }

    fn learning_component_function(&self, data: &PyDataset, layer: i64) -> PyResult<PyDataset> {
        let inner =
            experiment::learning_component_function(&self.params, &self.spec, &data.inner, layer).map_err(py_err)?;
        Ok(PyDataset { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "Network(layer_sizes={:?}, activation={}, residual={}, loss={})",
            self.spec.layer_sizes, self.spec.activation, self.spec.residual, self.spec.loss
        )
    }
}

#[pymodule]
fn freqlens(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyNetwork>()?;
    m.add_function(wrap_pyfunction!(synth_target, m)?)?;
    m.add_function(wrap_pyfunction!(lfr, m)?)?;
    m.add_function(wrap_pyfunction!(low_pass_filter, m)?)?;
    m.add_function(wrap_pyfunction!(lfr_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(rdf_from_lfr, m)?)?;
    m.add_function(wrap_pyfunction!(rdf_peak, m)?)?;
    m.add_function(wrap_pyfunction!(exact_lfr, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_gaussian_lfr, m)?)?;
    m.add_function(wrap_pyfunction!(compare_filter_vs_spectral, m)?)?;
    m.add_function(wrap_pyfunction!(layer_by_negative_index, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    Ok(())
}
