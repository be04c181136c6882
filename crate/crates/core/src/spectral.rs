//! Exact 1-d Fourier reference for the spatial Gaussian filter.
//!
//! On a uniform periodic grid the low-frequency ratio can be computed exactly
//! from the spectrum, and Gaussian smoothing is a pointwise multiplication by
//! `exp(-δ k² / 2)`. These routines use a direct `O(N²)` DFT and serve as an
//! independent check of the kernel smoother in [`crate::filter`].
//!
//! Frequencies are angular: bin `m` of an `N`-point signal on `[a, b)` sits at
//! `k = 2π s / (b - a)` with `s` the signed bin index.

use std::f64::consts::TAU;

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::filter::{convolve_with_kernel, gaussian_kernel_weight};

/// Samples of a function on `N` uniformly spaced points of `[start, end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSignal {
    values: Vec<f64>,
    start: f64,
    end: f64,
}

impl UniformSignal {
    pub fn new(values: Vec<f64>, start: f64, end: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "a uniform signal needs at least 2 samples, got {}",
                values.len()
            )));
        }
        if !(end > start) || !start.is_finite() || !end.is_finite() {
            return Err(Error::param(format!("need start < end, got [{start}, {end})")));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::param("signal contains non-finite values"));
        }
        Ok(Self { values, start, end })
    }

    /// Samples `f` at `x_n = start + n (end - start) / len`.
    pub fn from_fn(len: usize, start: f64, end: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = (end - start) / len as f64;
        let values = (0..len).map(|n| f(start + h * n as f64)).collect();
        Self::new(values, start, end)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn period(&self) -> f64 {
        self.end - self.start
    }

    pub fn spacing(&self) -> f64 {
        self.period() / self.len() as f64
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    pub fn sample_points(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.len()).map(|n| self.start + h * n as f64).collect()
    }

    fn power(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Angular frequency of DFT bin `m`.
    fn frequency(&self, m: usize) -> f64 {
        let n = self.len();
        let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
        TAU * signed / self.period()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralComponent {
    /// Angular frequency.
    pub frequency: f64,
    pub amplitude: Complex64,
}

fn twiddles(n: usize, sign: f64) -> Vec<Complex64> {
    (0..n)
        .map(|t| Complex64::from_polar(1.0, sign * TAU * t as f64 / n as f64))
        .collect()
}

/// Direct DFT `X_m = Σ_n x_n exp(-2πi m n / N)`, one entry per bin in natural order.
pub fn dft_1d(signal: &UniformSignal) -> Vec<SpectralComponent> {
    let n = signal.len();
    let w = twiddles(n, -1.0);
    (0..n)
        .map(|m| {
            let amplitude = signal.values.iter().enumerate().map(|(t, &x)| w[(m * t) % n] * x).sum();
            SpectralComponent {
                frequency: signal.frequency(m),
                amplitude,
            }
        })
        .collect()
}

/// Inverse of [`dft_1d`]: `x_n = (1/N) Σ_m X_m exp(2πi m n / N)`.
pub fn inverse_dft_1d(amplitudes: &[Complex64]) -> Vec<Complex64> {
    let n = amplitudes.len();
    let w = twiddles(n, 1.0);
    (0..n)
        .map(|t| {
            amplitudes
                .iter()
                .enumerate()
                .map(|(m, &a)| w[(m * t) % n] * a)
                .sum::<Complex64>()
                / n as f64
        })
        .collect()
}

/// Indicator split of spectral power at cutoff `k0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumCut {
    pub k0: f64,
    pub low_power: f64,
    pub total_power: f64,
}

impl SpectrumCut {
    pub fn ratio(&self) -> f64 {
        self.low_power / self.total_power
    }
}

pub fn spectrum_cut(signal: &UniformSignal, k0: f64) -> Result<SpectrumCut> {
    if !(k0 >= 0.0) {
        return Err(Error::param(format!("cutoff k0 must be >= 0, got {k0}")));
    }
    if signal.power() == 0.0 {
        return Err(Error::UndefinedRatio("signal"));
    }
    let mut low_power = 0.0;
    let mut total_power = 0.0;
    for c in dft_1d(signal) {
        let p = c.amplitude.norm_sqr();
        total_power += p;
        if c.frequency.abs() <= k0 {
            low_power += p;
        }
    }
    Ok(SpectrumCut {
        k0,
        low_power,
        total_power,
    })
}

/// Fraction of spectral power with `|k| <= k0`.
pub fn exact_lfr(signal: &UniformSignal, k0: f64) -> Result<f64> {
    Ok(spectrum_cut(signal, k0)?.ratio())
}

/// Convolution with the unit-mass Gaussian of variance `delta`, done in the
/// Fourier domain.
pub fn spectral_low_pass(signal: &UniformSignal, delta: f64) -> Result<UniformSignal> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param(format!("delta must be positive and finite, got {delta}")));
    }
    let filtered: Vec<Complex64> = dft_1d(signal)
        .into_iter()
        .map(|c| c.amplitude * (-0.5 * delta * c.frequency * c.frequency).exp())
        .collect();
    let values = inverse_dft_1d(&filtered).into_iter().map(|z| z.re).collect();
    UniformSignal::new(values, signal.start, signal.end)
}

/// Power ratio after Fourier-domain Gaussian filtering, the spectral
/// counterpart of [`crate::filter::lfr`].
pub fn spectral_gaussian_lfr(signal: &UniformSignal, delta: f64) -> Result<f64> {
    let total = signal.power();
    if total == 0.0 {
        return Err(Error::UndefinedRatio("signal"));
    }
    Ok(spectral_low_pass(signal, delta)?.power() / total)
}

/// Periodic Gaussian kernel on the signal's grid: every entry sums the
/// unit-peak Gaussian over all periodic images that do not underflow.
pub fn periodic_kernel_matrix(signal: &UniformSignal, delta: f64) -> Result<Array2<f64>> {
    let n = signal.len();
    let period = signal.period();
    let h = signal.spacing();
    // exp(-r²/2δ) underflows past r² ≈ 1490 δ
    let reach = (1490.0 * delta).sqrt();
    let images = (reach / period).ceil() as i64 + 1;
    let mut k = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let base = (i as f64 - j as f64) * h;
            let mut acc = 0.0;
            for m in -images..=images {
                let r = base + m as f64 * period;
                acc += gaussian_kernel_weight(r * r, delta)?;
            }
            k[[i, j]] = acc;
        }
    }
    Ok(k)
}

/// Relative L2 gap `‖a - b‖ / ‖b‖` between the spatial convolution `a` (kernel
/// sums rescaled by the Gaussian mass `h / √(2πδ)`, no row normalization) and
/// the Fourier-domain filter `b`.
pub fn compare_filter_vs_spectral(signal: &UniformSignal, delta: f64) -> Result<f64> {
    let spectral = spectral_low_pass(signal, delta)?;
    let kernel = periodic_kernel_matrix(signal, delta)?;
    let scale = signal.spacing() / (TAU * delta).sqrt();
    let targets =
        ArrayView2::from_shape((signal.len(), 1), signal.values()).map_err(|e| Error::shape(e.to_string()))?;
    let spatial = convolve_with_kernel(kernel.view(), targets, scale)?;
    let mut diff = 0.0;
    let mut norm = 0.0;
    for (a, b) in spatial.iter().zip(spectral.values()) {
        diff += (a - b) * (a - b);
        norm += b * b;
    }
    if norm == 0.0 {
        return Ok(if diff == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((diff / norm).sqrt())
}
