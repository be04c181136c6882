//! Plain-text parameter checkpoints.
//!
//! ```text
//! freqlens-checkpoint,1
//! layer_sizes,2,5,1
//! activation,tanh
//! residual,false
//! loss,mse
//! seed,7
//! W0,5,2        <- followed by 5 rows of 2 comma-separated values
//! b0,5          <- followed by 1 row of 5 values
//! W1,1,5
//! ...
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so reading a checkpoint
//! back reproduces the parameters bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::{Activation, LossKind, NetworkParams, NetworkSpec};
use crate::error::{Error, Result};

const MAGIC: &str = "freqlens-checkpoint";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub spec: NetworkSpec,
    pub params: NetworkParams,
}

fn join<T: std::fmt::Display>(values: impl IntoIterator<Item = T>) -> String {
    values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl Checkpoint {
    pub fn new(spec: NetworkSpec, params: NetworkParams) -> Result<Self> {
        spec.validate()?;
        params.check_shapes(&spec)?;
        Ok(Self { spec, params })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let spec = &self.spec;
        // writing into a String is infallible
        let _ = writeln!(out, "{MAGIC},{VERSION}");
        let _ = writeln!(out, "layer_sizes,{}", join(&spec.layer_sizes));
        let _ = writeln!(out, "activation,{}", spec.activation);
        let _ = writeln!(out, "residual,{}", spec.residual);
        let _ = writeln!(out, "loss,{}", spec.loss);
        let _ = writeln!(out, "seed,{}", spec.seed);
        for (l, (w, b)) in self.params.weights.iter().zip(&self.params.biases).enumerate() {
            let _ = writeln!(out, "W{l},{},{}", w.nrows(), w.ncols());
            for row in w.rows() {
                let _ = writeln!(out, "{}", join(row));
            }
            let _ = writeln!(out, "b{l},{}", b.len());
            let _ = writeln!(out, "{}", join(b));
        }
        out
    }

    pub fn from_text(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
        let err = |line: usize, message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| err(0, format!("unexpected end of file, expected {what}")))
        };
        let field = |(line, text): (usize, &str), key: &str| -> Result<String> {
            match text.split_once(',') {
                Some((k, rest)) if k == key => Ok(rest.to_string()),
                _ => Err(err(line, format!("expected `{key},...`, found `{text}`"))),
            }
        };
        fn nums<T: std::str::FromStr>(line: usize, text: &str, origin: &str) -> Result<Vec<T>> {
            text.split(',')
                .map(|v| {
                    v.trim().parse().map_err(|_| Error::Parse {
                        path: origin.to_string(),
                        line,
                        message: format!("`{v}` is not a number"),
                    })
                })
                .collect()
        }

        let header = next("header")?;
        let version = field(header, MAGIC)?;
        if version != VERSION.to_string() {
            return Err(err(1, format!("unsupported checkpoint version {version}")));
        }
        let l = next("layer_sizes")?;
        let layer_sizes: Vec<usize> = nums(l.0, &field(l, "layer_sizes")?, origin)?;
        let l = next("activation")?;
        let activation: Activation = field(l, "activation")?.parse()?;
        let l = next("residual")?;
        let residual = match field(l, "residual")?.as_str() {
            "true" => true,
            "false" => false,
            other => return Err(err(l.0, format!("residual must be true/false, got `{other}`"))),
        };
        let l = next("loss")?;
        let loss: LossKind = field(l, "loss")?.parse()?;
        let l = next("seed")?;
        let seed = field(l, "seed")?
            .parse()
            .map_err(|_| err(l.0, "seed is not an integer".into()))?;
        let spec = NetworkSpec {
            layer_sizes,
            activation,
            residual,
            loss,
            seed,
        };
        spec.validate()?;

        let mut params = NetworkParams::zeros(&spec);
        for layer in 0..spec.num_layers() {
            let h = next("weight header")?;
            let dims: Vec<usize> = nums(h.0, &field(h, &format!("W{layer}"))?, origin)?;
            let (rows, cols) = params.weights[layer].dim();
            if dims != [rows, cols] {
                return Err(err(h.0, format!("W{layer} is {dims:?}, expected [{rows}, {cols}]")));
            }
            let mut values = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let r = next("weight row")?;
                let row: Vec<f64> = nums(r.0, r.1, origin)?;
                if row.len() != cols {
                    return Err(err(r.0, format!("expected {cols} values, found {}", row.len())));
                }
                values.extend(row);
            }
            params.weights[layer] = Array2::from_shape_vec((rows, cols), values).expect("sized above");
            let h = next("bias header")?;
            let dims: Vec<usize> = nums(h.0, &field(h, &format!("b{layer}"))?, origin)?;
            if dims != [rows] {
                return Err(err(h.0, format!("b{layer} has length {dims:?}, expected {rows}")));
            }
            let r = next("bias row")?;
            let row: Vec<f64> = nums(r.0, r.1, origin)?;
            if row.len() != rows {
                return Err(err(r.0, format!("expected {rows} values, found {}", row.len())));
            }
            params.biases[layer] = Array1::from(row);
        }
        Ok(Self { spec, params })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_text(&fs::read_to_string(path)?, &path.display().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::init_network;

    #[test]
    fn round_trip_is_exact() {
        let spec = NetworkSpec::new(vec![3, 4, 4, 2], Activation::Relu)
            .with_residual(true)
            .with_loss(LossKind::SoftmaxCrossEntropy)
            .with_seed(42);
        let mut params = init_network(&spec).unwrap();
        params.biases[1][2] = -1.0 / 3.0;
        let ck = Checkpoint::new(spec, params).unwrap();
        let text = ck.to_text();
        assert!(text.starts_with("freqlens-checkpoint,1\nlayer_sizes,3,4,4,2\n"));
        assert_eq!(Checkpoint::from_text(&text, "mem").unwrap(), ck);
    }

    #[test]
    fn rejects_bad_version_and_truncation() {
        let spec = NetworkSpec::new(vec![1, 2, 1], Activation::Tanh);
        let ck = Checkpoint::new(spec.clone(), init_network(&spec).unwrap()).unwrap();
        let text = ck.to_text();
        let bumped = text.replacen("freqlens-checkpoint,1", "freqlens-checkpoint,9", 1);
        assert!(Checkpoint::from_text(&bumped, "mem").is_err());
        let truncated: String = text.lines().take(8).collect::<Vec<_>>().join("\n");
        assert!(Checkpoint::from_text(&truncated, "mem").is_err());
    }
}
