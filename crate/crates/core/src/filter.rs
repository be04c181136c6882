//! Gaussian low-pass filtering of labeled data in input space.
//!
//! The low-frequency part of a dataset is the normalized kernel smoother
//!
//! ```text
//! y_i^low = (1/C_i) Σ_j y_j exp(-|x_i - x_j|² / 2δ),   C_i = Σ_j exp(-|x_i - x_j|² / 2δ)
//! ```
//!
//! and the low-frequency ratio is `LFR(δ) = Σ_i |y_i^low|² / Σ_i |y_i|²`.
//! Nothing here transforms to the frequency domain; `1/δ` is used directly as
//! the frequency-width coordinate, and the RDF is the finite-difference slope
//! of LFR along that axis.
//!
//! Each smoothed row is reduced sequentially over `j`, so results are bitwise
//! identical regardless of how many worker threads process rows.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// LFR values above `1 + LFR_WARN_MARGIN` are flagged on the sweep.
pub const LFR_WARN_MARGIN: f64 = 1e-6;

pub const DEFAULT_GRID_LO: f64 = 1e-2;
pub const DEFAULT_GRID_HI: f64 = 1e4;
pub const DEFAULT_GRID_COUNT: usize = 40;

/// `exp(-r2 / 2δ)`.
pub fn gaussian_kernel_weight(r2: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if !r2.is_finite() || r2 < 0.0 {
        return Err(Error::param(format!(
            "squared distance must be finite and >= 0, got {r2}"
        )));
    }
    Ok(kernel(r2, 2.0 * delta))
}

#[inline(always)]
fn kernel(r2: f64, two_delta: f64) -> f64 {
    (-r2 / two_delta).exp()
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("delta must be positive and finite, got {delta}")))
    }
}

/// Symmetric `n × n` matrix of squared Euclidean distances between rows.
pub fn pairwise_sq_distances(points: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = points.nrows();
    let points = points.as_standard_layout();
    let d = points.ncols();
    let flat = points.as_slice().expect("standard layout");
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = &flat[i * d..(i + 1) * d];
            (0..n)
                .map(|j| {
                    let xj = &flat[j * d..(j + 1) * d];
                    xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum()
                })
                .collect()
        })
        .collect();
    Array2::from_shape_vec((n, n), rows.into_iter().flatten().collect()).expect("n × n by construction")
}

/// Row-stochastic smoothing matrix `W[i][j] = G(x_i - x_j) / C_i`.
pub fn build_filter_weights(points: ArrayView2<'_, f64>, delta: f64) -> Result<Array2<f64>> {
    check_delta(delta)?;
    let dist = pairwise_sq_distances(points);
    let two_delta = 2.0 * delta;
    let mut w = dist.mapv(|r2| kernel(r2, two_delta));
    for mut row in w.rows_mut() {
        let c: f64 = row.iter().sum();
        row.mapv_inplace(|g| g / c);
    }
    Ok(w)
}

/// Smooths `targets` with the row-normalized kernel built from `dist`.
fn smooth_with_distances(dist: ArrayView2<'_, f64>, targets: ArrayView2<'_, f64>, delta: f64) -> Array2<f64> {
    let n = dist.nrows();
    let d_o = targets.ncols();
    let targets = targets.as_standard_layout();
    let ys = targets.as_slice().expect("standard layout");
    let two_delta = 2.0 * delta;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![0.0; d_o];
            let mut c = 0.0;
            for (j, &r2) in dist.row(i).iter().enumerate() {
                let g = kernel(r2, two_delta);
                if g == 0.0 {
                    continue;
                }
                c += g;
                for (a, &y) in acc.iter_mut().zip(&ys[j * d_o..(j + 1) * d_o]) {
                    *a += g * y;
                }
            }
            for a in &mut acc {
                *a /= c;
            }
            acc
        })
        .collect();
    Array2::from_shape_vec((n, d_o), rows.into_iter().flatten().collect()).expect("n × d_o by construction")
}

fn power(values: ArrayView2<'_, f64>) -> f64 {
    values.iter().map(|v| v * v).sum()
}

/// Low-frequency part `y^low = W · Y` of the dataset's targets.
pub fn low_pass_filter(data: &LabeledDataset, delta: f64) -> Result<Array2<f64>> {
    check_delta(delta)?;
    let dist = pairwise_sq_distances(data.points());
    Ok(smooth_with_distances(dist.view(), data.targets(), delta))
}

/// Plain (unnormalized) convolution `scale · K · Y` for a precomputed kernel
/// matrix. Used where the smoother must act as a true convolution, e.g. when
/// checking against a Fourier-domain filter.
pub fn convolve_with_kernel(
    kernel: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
    scale: f64,
) -> Result<Array2<f64>> {
    if kernel.ncols() != targets.nrows() {
        return Err(Error::shape(format!(
            "kernel is {}×{} but targets have {} rows",
            kernel.nrows(),
            kernel.ncols(),
            targets.nrows()
        )));
    }
    Ok(kernel.dot(&targets) * scale)
}

fn target_power(data: &LabeledDataset) -> Result<f64> {
    let total = power(data.targets());
    if total > 0.0 {
        Ok(total)
    } else {
        Err(Error::UndefinedRatio("targets"))
    }
}

/// Low-frequency ratio at filter variance `delta`.
pub fn lfr(data: &LabeledDataset, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let total = target_power(data)?;
    let dist = pairwise_sq_distances(data.points());
    let low = smooth_with_distances(dist.view(), data.targets(), delta);
    Ok(power(low.view()) / total)
}

/// Strictly increasing, positive filter widths `1/δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterWidthGrid {
    widths: Vec<f64>,
}

impl FilterWidthGrid {
    pub fn new(widths: Vec<f64>) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "a width grid needs at least 2 points, got {}",
                widths.len()
            )));
        }
        if !widths.iter().all(|w| *w > 0.0 && w.is_finite()) {
            return Err(Error::param("filter widths must be positive and finite"));
        }
        if !widths.windows(2).all(|p| p[0] < p[1]) {
            return Err(Error::param("filter widths must be strictly increasing"));
        }
        Ok(Self { widths })
    }

    /// `count` log-spaced widths from `lo` to `hi`, both inclusive.
    pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::param(format!("need 0 < lo < hi, got {lo}:{hi}")));
        }
        if count < 2 {
            return Err(Error::InsufficientData(format!(
                "a width grid needs at least 2 points, got {count}"
            )));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let step = (b - a) / (count - 1) as f64;
        let mut widths: Vec<f64> = (0..count).map(|k| (a + step * k as f64).exp()).collect();
        widths[0] = lo;
        widths[count - 1] = hi;
        Self::new(widths)
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn len(&self) -> usize {
        self.widths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.widths.is_empty()
    }
}

impl Default for FilterWidthGrid {
    fn default() -> Self {
        Self::log_spaced(DEFAULT_GRID_LO, DEFAULT_GRID_HI, DEFAULT_GRID_COUNT).expect("default grid is valid")
    }
}

/// Parses `lo:hi:count` into a log-spaced grid.
impl FromStr for FilterWidthGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::param(format!("grid must look like lo:hi:count, got `{s}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        Self::log_spaced(lo, hi, count)
    }
}

impl fmt::Display for FilterWidthGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}",
            self.widths[0],
            self.widths[self.widths.len() - 1],
            self.widths.len()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LfrWarning {
    pub inv_delta: f64,
    pub lfr: f64,
}

/// LFR evaluated at every width of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSweep {
    pub grid: FilterWidthGrid,
    pub lfr_values: Vec<f64>,
    /// Widths where the smoother's LFR exceeded 1 by more than [`LFR_WARN_MARGIN`].
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<LfrWarning>,
}

impl FilterSweep {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("inv_delta,lfr\n");
        for (w, v) in self.grid.widths().iter().zip(&self.lfr_values) {
            out.push_str(&format!("{w},{v}\n"));
        }
        out
    }
}

/// LFR of `data` at every width in `grid`. The distance matrix is built once.
pub fn lfr_sweep(data: &LabeledDataset, grid: &FilterWidthGrid) -> Result<FilterSweep> {
    let total = target_power(data)?;
    let dist = pairwise_sq_distances(data.points());
    let mut lfr_values = Vec::with_capacity(grid.len());
    let mut warnings = Vec::new();
    for &w in grid.widths() {
        let delta = 1.0 / w;
        check_delta(delta)?;
        let low = smooth_with_distances(dist.view(), data.targets(), delta);
        let value = power(low.view()) / total;
        if value > 1.0 + LFR_WARN_MARGIN {
            warnings.push(LfrWarning {
                inv_delta: w,
                lfr: value,
            });
        }
        lfr_values.push(value);
    }
    Ok(FilterSweep {
        grid: grid.clone(),
        lfr_values,
        warnings,
    })
}

/// Finite-difference derivative of LFR along `1/δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdfCurve {
    pub midpoints: Vec<f64>,
    pub slopes: Vec<f64>,
    pub normalized: bool,
}

impl RdfCurve {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("inv_delta_mid,rdf\n");
        for (w, v) in self.midpoints.iter().zip(&self.slopes) {
            out.push_str(&format!("{w},{v}\n"));
        }
        out
    }
}

/// Slopes between consecutive sweep points, placed at the pair midpoints.
/// With `normalize`, slopes are divided by the largest slope when it is positive.
pub fn rdf_from_lfr(sweep: &FilterSweep, normalize: bool) -> Result<RdfCurve> {
    let widths = sweep.grid.widths();
    if widths.len() < 2 || sweep.lfr_values.len() != widths.len() {
        return Err(Error::InsufficientData(format!(
            "RDF needs at least 2 aligned sweep points, got {} widths and {} values",
            widths.len(),
            sweep.lfr_values.len()
        )));
    }
    let mut midpoints = Vec::with_capacity(widths.len() - 1);
    let mut slopes = Vec::with_capacity(widths.len() - 1);
    for k in 0..widths.len() - 1 {
        let dw = widths[k + 1] - widths[k];
        slopes.push((sweep.lfr_values[k + 1] - sweep.lfr_values[k]) / dw);
        midpoints.push(0.5 * (widths[k] + widths[k + 1]));
    }
    if normalize {
        let max = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max > 0.0 {
            for s in &mut slopes {
                *s /= max;
            }
        }
    }
    Ok(RdfCurve {
        midpoints,
        slopes,
        normalized: normalize,
    })
}

/// Width `1/δ` at which the RDF is largest; ties go to the smaller width.
pub fn rdf_peak(curve: &RdfCurve) -> Result<f64> {
    if curve.slopes.is_empty() {
        return Err(Error::InsufficientData("empty RDF curve".into()));
    }
    let mut best = 0;
    for (k, &s) in curve.slopes.iter().enumerate() {
        if s > curve.slopes[best] {
            best = k;
        }
    }
    if curve.slopes[best] > 0.0 {
        Ok(curve.midpoints[best])
    } else {
        Err(Error::NoPeak)
    }
}
