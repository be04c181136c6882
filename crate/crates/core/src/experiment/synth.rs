//! Synthetic targets: `sin(kπx)`, `cos(3x) + cos(5x)` and the parity function.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum TargetKind {
    /// `y = sin(kπx)` on a uniform grid, default domain `[-1, 1]`.
    SinKPiX { k: f64 },
    /// `y = cos(3x) + cos(5x)` on a uniform grid, default domain `[-π, π]`.
    CosCombo,
    /// `x` uniform over `{-1, +1}^d`, `y = Π_j x_j`.
    Parity { d: usize },
}

impl TargetKind {
    pub fn default_domain(&self) -> (f64, f64) {
        match self {
            TargetKind::SinKPiX { .. } | TargetKind::Parity { .. } => (-1.0, 1.0),
            TargetKind::CosCombo => (-PI, PI),
        }
    }
}

/// `sin:k=3`, `cos_combo` (or `cos`), `parity:d=4`.
impl FromStr for TargetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let name = parts.next().unwrap_or_default();
        let mut k = None;
        let mut d = None;
        for opt in parts {
            let (key, value) = opt
                .split_once('=')
                .ok_or_else(|| Error::param(format!("target option `{opt}` must look like key=value")))?;
            match key {
                "k" => {
                    k = Some(
                        value
                            .parse::<f64>()
                            .map_err(|_| Error::param(format!("bad k `{value}`")))?,
                    )
                }
                "d" => {
                    d = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| Error::param(format!("bad d `{value}`")))?,
                    )
                }
                other => return Err(Error::param(format!("unknown target option `{other}`"))),
            }
        }
        match name {
            "sin" | "sin_kpix" => Ok(TargetKind::SinKPiX { k: k.unwrap_or(1.0) }),
            "cos" | "cos_combo" => Ok(TargetKind::CosCombo),
            "parity" => {
                let d = d.unwrap_or(2);
                if d == 0 {
                    return Err(Error::param("parity needs d >= 1"));
                }
                Ok(TargetKind::Parity { d })
            }
            other => Err(Error::Unknown {
                what: "target kind",
                name: other.to_string(),
            }),
        }
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetKind::SinKPiX { k } => write!(f, "sin:k={k}"),
            TargetKind::CosCombo => f.write_str("cos_combo"),
            TargetKind::Parity { d } => write!(f, "parity:d={d}"),
        }
    }
}

fn grid(n: usize, (lo, hi): (f64, f64)) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// `n` samples of the target. Grid targets include both domain endpoints;
/// `seed` only affects parity sampling.
pub fn synth_target(kind: &TargetKind, n: usize, domain: Option<(f64, f64)>, seed: u64) -> Result<LabeledDataset> {
    if n < 2 {
        return Err(Error::param(format!("need at least 2 samples, got {n}")));
    }
    let domain = domain.unwrap_or_else(|| kind.default_domain());
    if !(domain.0 < domain.1) {
        return Err(Error::param(format!("empty domain [{}, {}]", domain.0, domain.1)));
    }
    match kind {
        TargetKind::SinKPiX { k } => {
            let xs = grid(n, domain);
            let ys: Vec<f64> = xs.iter().map(|x| (k * PI * x).sin()).collect();
            LabeledDataset::from_1d(&xs, &ys)
        }
        TargetKind::CosCombo => {
            let xs = grid(n, domain);
            let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x).cos() + (5.0 * x).cos()).collect();
            LabeledDataset::from_1d(&xs, &ys)
        }
        TargetKind::Parity { d } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let points = Array2::from_shape_fn((n, *d), |_| if rng.random::<bool>() { 1.0 } else { -1.0 });
            let targets = Array2::from_shape_fn((n, 1), |(i, _)| points.row(i).product());
            LabeledDataset::new(points, targets)
        }
    }
}
