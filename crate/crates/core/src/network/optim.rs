use std::fmt;
use std::str::FromStr;

use ndarray::Zip;
use serde::{Deserialize, Serialize};

use super::NetworkParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adam" => Ok(OptimizerKind::Adam),
            other => Err(Error::Unknown {
                what: "optimizer",
                name: other.to_string(),
            }),
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    moments: Option<(NetworkParams, NetworkParams)>,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, learning_rate: f64) -> Self {
        Self {
            kind,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            moments: None,
        }
    }

    pub fn sgd(learning_rate: f64) -> Self {
        Self::new(OptimizerKind::Sgd, learning_rate)
    }

    pub fn adam(learning_rate: f64) -> Self {
        Self::new(OptimizerKind::Adam, learning_rate)
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Adam first and second moments, once the first step has run.
    pub fn moments(&self) -> Option<(&NetworkParams, &NetworkParams)> {
        self.moments.as_ref().map(|(m, v)| (m, v))
    }

    pub fn step(&mut self, params: &mut NetworkParams, grads: &NetworkParams) -> Result<()> {
        if params.num_params() != grads.num_params() || params.weights.len() != grads.weights.len() {
            return Err(Error::shape("gradient shapes do not match parameters"));
        }
        self.step += 1;
        let lr = self.learning_rate;
        match self.kind {
            OptimizerKind::Sgd => {
                for (w, g) in params.weights.iter_mut().zip(&grads.weights) {
                    w.scaled_add(-lr, g);
                }
                for (b, g) in params.biases.iter_mut().zip(&grads.biases) {
                    b.scaled_add(-lr, g);
                }
            }
            OptimizerKind::Adam => {
                let (m, v) = self.moments.get_or_insert_with(|| {
                    let zero = NetworkParams {
                        weights: grads.weights.iter().map(|g| g.mapv(|_| 0.0)).collect(),
                        biases: grads.biases.iter().map(|g| g.mapv(|_| 0.0)).collect(),
                    };
                    (zero.clone(), zero)
                });
                let (b1, b2, eps) = (self.beta1, self.beta2, self.epsilon);
                let t = self.step as i32;
                let c1 = 1.0 - b1.powi(t);
                let c2 = 1.0 - b2.powi(t);
                let update = |theta: &mut f64, g: &f64, m: &mut f64, v: &mut f64| {
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    let m_hat = *m / c1;
                    let v_hat = *v / c2;
                    *theta -= lr * m_hat / (v_hat.sqrt() + eps);
                };
                for l in 0..params.weights.len() {
                    Zip::from(&mut params.weights[l])
                        .and(&grads.weights[l])
                        .and(&mut m.weights[l])
                        .and(&mut v.weights[l])
                        .for_each(update);
                    Zip::from(&mut params.biases[l])
                        .and(&grads.biases[l])
                        .and(&mut m.biases[l])
                        .and(&mut v.biases[l])
                        .for_each(update);
                }
            }
        }
        Ok(())
    }
}

pub fn optimizer_step(state: &mut OptimizerState, params: &mut NetworkParams, grads: &NetworkParams) -> Result<()> {
    state.step(params, grads)
}

/// Learning rate per epoch (epochs count from 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LearningRateSchedule {
    Constant(f64),
    /// `(first_epoch, rate)` pairs sorted by epoch; the first pair starts at epoch 1.
    Step(Vec<(u64, f64)>),
}

impl LearningRateSchedule {
    pub fn rate_at(&self, epoch: u64) -> f64 {
        match self {
            LearningRateSchedule::Constant(r) => *r,
            LearningRateSchedule::Step(steps) => steps
                .iter()
                .take_while(|(start, _)| *start <= epoch)
                .last()
                .map_or(steps[0].1, |(_, r)| *r),
        }
    }
}

/// `1e-3` for a constant rate or `1:1e-3,41:1e-4,61:1e-5` for a step schedule.
impl FromStr for LearningRateSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad learning-rate schedule `{s}`"));
        if !s.contains(':') {
            let r: f64 = s.trim().parse().map_err(|_| bad())?;
            if !(r >= 0.0 && r.is_finite()) {
                return Err(bad());
            }
            return Ok(LearningRateSchedule::Constant(r));
        }
        let mut steps = Vec::new();
        for part in s.split(',') {
            let (e, r) = part.split_once(':').ok_or_else(bad)?;
            let e: u64 = e.trim().parse().map_err(|_| bad())?;
            let r: f64 = r.trim().parse().map_err(|_| bad())?;
            if !(r >= 0.0 && r.is_finite()) {
                return Err(bad());
            }
            steps.push((e, r));
        }
        if steps.is_empty() || steps[0].0 != 1 || steps.windows(2).any(|p| p[0].0 >= p[1].0) {
            return Err(bad());
        }
        Ok(LearningRateSchedule::Step(steps))
    }
}

impl fmt::Display for LearningRateSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LearningRateSchedule::Constant(r) => write!(f, "{r}"),
            LearningRateSchedule::Step(steps) => {
                let parts: Vec<String> = steps.iter().map(|(e, r)| format!("{e}:{r}")).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}
