use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Mean of squared errors over output components.
    Mse,
    /// Softmax on the outputs followed by cross-entropy against a
    /// probability (typically one-hot) target.
    SoftmaxCrossEntropy,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Mse => "mse",
            LossKind::SoftmaxCrossEntropy => "softmax_cross_entropy",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mse" => Ok(LossKind::Mse),
            "softmax_cross_entropy" | "cross_entropy" => Ok(LossKind::SoftmaxCrossEntropy),
            other => Err(Error::Unknown {
                what: "loss",
                name: other.to_string(),
            }),
        }
    }
}

const PROBABILITY_TOLERANCE: f64 = 1e-6;

pub fn softmax(logits: ArrayView1<'_, f64>) -> Array1<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = logits.mapv(|v| (v - max).exp());
    let sum = out.sum();
    out /= sum;
    out
}

fn check_probability(target: ArrayView1<'_, f64>) -> Result<()> {
    if target.iter().any(|&t| t < 0.0) {
        return Err(Error::InvalidTarget(format!("negative entry in {target}")));
    }
    let sum = target.sum();
    if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
        return Err(Error::InvalidTarget(format!("entries sum to {sum}, not 1")));
    }
    Ok(())
}

/// `Σ_k t_k (lse(o) - o_k)`; every term is non-negative.
fn cross_entropy(logits: ArrayView1<'_, f64>, target: ArrayView1<'_, f64>) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    logits
        .iter()
        .zip(target)
        .map(|(o, t)| if *t == 0.0 { 0.0 } else { t * (lse - o) })
        .sum()
}

pub fn loss(output: ArrayView1<'_, f64>, target: ArrayView1<'_, f64>, kind: LossKind) -> Result<f64> {
    if output.len() != target.len() {
        return Err(Error::shape(format!(
            "output has {} components, target {}",
            output.len(),
            target.len()
        )));
    }
    match kind {
        LossKind::Mse => {
            Ok(output.iter().zip(target).map(|(o, t)| (o - t) * (o - t)).sum::<f64>() / output.len() as f64)
        }
        LossKind::SoftmaxCrossEntropy => {
            check_probability(target)?;
            Ok(cross_entropy(output, target))
        }
    }
}

/// Mean per-sample loss over a batch.
pub fn batch_loss(outputs: ArrayView2<'_, f64>, targets: ArrayView2<'_, f64>, kind: LossKind) -> Result<f64> {
    if outputs.dim() != targets.dim() {
        return Err(Error::shape(format!(
            "outputs {:?} vs targets {:?}",
            outputs.dim(),
            targets.dim()
        )));
    }
    if outputs.nrows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut total = 0.0;
    for (o, t) in outputs.rows().into_iter().zip(targets.rows()) {
        total += loss(o, t, kind)?;
    }
    Ok(total / outputs.nrows() as f64)
}

/// Mean batch loss and `∂loss/∂output` for every row.
pub(crate) fn loss_and_output_grad(
    outputs: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
    kind: LossKind,
) -> Result<(f64, Array2<f64>)> {
    let value = batch_loss(outputs, targets, kind)?;
    let batch = outputs.nrows() as f64;
    let grad = match kind {
        LossKind::Mse => {
            let scale = 2.0 / (batch * outputs.ncols() as f64);
            (&outputs - &targets) * scale
        }
        LossKind::SoftmaxCrossEntropy => {
            let mut g = Array2::zeros(outputs.dim());
            for ((mut row, o), t) in g.rows_mut().into_iter().zip(outputs.rows()).zip(targets.rows()) {
                let p = softmax(o);
                let t_sum = t.sum();
                row.assign(&((&p * t_sum - t) / batch));
            }
            g
        }
    };
    Ok((value, grad))
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;

    #[test]
    fn mse_of_identical_is_zero() {
        let y = array![0.3, -1.0, 2.0];
        assert_eq!(loss(y.view(), y.view(), LossKind::Mse).unwrap(), 0.0);
    }

    #[test]
    fn mse_scalar_case() {
        let o = array![1.0, 2.0];
        let t = array![0.0, 4.0];
        assert_eq!(loss(o.view(), t.view(), LossKind::Mse).unwrap(), (1.0 + 4.0) / 2.0);
    }

    #[test]
    fn uniform_logits_give_ln_c() {
        for c in [2usize, 3, 10] {
            let o = Array1::from_elem(c, 0.7);
            let mut t = Array1::zeros(c);
            t[c - 1] = 1.0;
            let v = loss(o.view(), t.view(), LossKind::SoftmaxCrossEntropy).unwrap();
            assert!((v - (c as f64).ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn cross_entropy_scalar_case() {
        let o = array![1.0, -0.5, 2.0];
        let t = array![0.2, 0.3, 0.5];
        let z: f64 = o.iter().map(|v: &f64| v.exp()).sum();
        let expected =
            -(0.2 * (1.0f64.exp() / z).ln() + 0.3 * ((-0.5f64).exp() / z).ln() + 0.5 * (2.0f64.exp() / z).ln());
        let v = loss(o.view(), t.view(), LossKind::SoftmaxCrossEntropy).unwrap();
        assert!((v - expected).abs() < 1e-14);
    }

    #[test]
    fn cross_entropy_rejects_bad_targets() {
        let o = array![0.0, 0.0];
        for t in [array![1.5, -0.5], array![0.5, 0.4]] {
            assert!(matches!(
                loss(o.view(), t.view(), LossKind::SoftmaxCrossEntropy),
                Err(Error::InvalidTarget(_))
            ));
        }
        assert!(loss(o.view(), array![1.0].view(), LossKind::Mse).is_err());
    }

    #[test]
    fn softmax_is_a_distribution() {
        let p = softmax(array![1000.0, -1000.0, 3.0].view());
        assert!((p.sum() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn loss_kind_parsing() {
        assert_eq!("mse".parse::<LossKind>().unwrap(), LossKind::Mse);
        assert_eq!(
            "softmax_cross_entropy".parse::<LossKind>().unwrap(),
            LossKind::SoftmaxCrossEntropy
        );
        assert!("hinge".parse::<LossKind>().is_err());
    }
}
