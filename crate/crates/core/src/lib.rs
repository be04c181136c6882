//! Frequency analysis of labeled datasets without high-dimensional Fourier
//! transforms, plus a small feedforward network engine for studying how the
//! effective targets of hidden layers shift toward low frequency in training.
//!
//! The low-frequency ratio (LFR) of a dataset `{(x_i, y_i)}` is the fraction of
//! target power that survives a Gaussian smoothing of variance `δ` in input
//! space. Sweeping the filter width `1/δ` gives an LFR curve; its slope is the
//! ratio density function (RDF), whose peak marks where the target's power
//! concentrates in frequency.
//!
//! Modules:
//!
//! | module | contents |
//! |--------|----------|
//! | [`dataset`] | [`LabeledDataset`], CSV I/O, per-dimension normalization |
//! | [`filter`] | Gaussian kernel, low-pass smoother, LFR sweeps, RDF |
//! | [`spectral`] | exact 1-d DFT reference for the spatial filter |
//! | [`network`] | feedforward nets, losses, backprop, SGD/Adam |
//! | [`experiment`] | effective targets, trajectories, epochs-to-error, IDX loader |
//! | [`cli`] | the `freqlens` command-line front end |

// `!(x > 0.0)` style checks are intentional: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod filter;
pub mod network;
pub mod spectral;

pub use dataset::LabeledDataset;
pub use error::{Error, Result};
pub use filter::{FilterSweep, FilterWidthGrid, RdfCurve};
