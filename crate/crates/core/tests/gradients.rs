//! Backprop checked against central finite differences.

use freqlens::network::{
    batch_loss, forward_batch, init_network, loss_and_gradients, Activation, LossKind, NetworkParams, NetworkSpec,
};
use ndarray::{array, Array2};

const STEP: f64 = 1e-6;
const TOLERANCE: f64 = 1e-5;

fn loss_at(params: &NetworkParams, spec: &NetworkSpec, x: &Array2<f64>, y: &Array2<f64>) -> f64 {
    let acts = forward_batch(params, spec, x.view()).unwrap();
    batch_loss(acts.output().view(), y.view(), spec.loss).unwrap()
}

fn check(spec: NetworkSpec, x: Array2<f64>, y: Array2<f64>) {
    let params = init_network(&spec).unwrap();
    let (value, grads) = loss_and_gradients(&params, &spec, x.view(), y.view()).unwrap();
    assert!((value - loss_at(&params, &spec, &x, &y)).abs() < 1e-14);

    let flat = params.to_flat();
    let analytic = grads.to_flat();
    let mut probe = params.clone();
    let mut worst: f64 = 0.0;
    for i in 0..flat.len() {
        let mut shifted = flat.clone();
        shifted[i] = flat[i] + STEP;
        probe.set_flat(&shifted).unwrap();
        let up = loss_at(&probe, &spec, &x, &y);
        shifted[i] = flat[i] - STEP;
        probe.set_flat(&shifted).unwrap();
        let down = loss_at(&probe, &spec, &x, &y);
        let numeric = (up - down) / (2.0 * STEP);
        let err = (numeric - analytic[i]).abs() / numeric.abs().max(analytic[i].abs()).max(1e-4);
        worst = worst.max(err);
    }
    assert!(worst < TOLERANCE, "worst relative error {worst:e}");
}

fn inputs() -> Array2<f64> {
    array![[0.3, -1.2], [0.9, 0.4], [-0.5, 0.1], [1.1, -0.7], [0.0, 0.8]]
}

#[test]
fn tanh_mse() {
    let spec = NetworkSpec::new(vec![2, 4, 3, 1], Activation::Tanh).with_seed(11);
    check(spec, inputs(), array![[0.5], [-0.2], [1.0], [0.1], [-0.8]]);
}

#[test]
fn relu_mse_multi_output() {
    let spec = NetworkSpec::new(vec![2, 5, 3], Activation::Relu).with_seed(4);
    check(
        spec,
        inputs(),
        array![
            [0.5, 0.0, 1.0],
            [-0.2, 0.3, 0.0],
            [1.0, 1.0, -1.0],
            [0.1, 0.2, 0.3],
            [0.0, -0.5, 0.5]
        ],
    );
}

#[test]
fn residual_tanh_mse() {
    let spec = NetworkSpec::new(vec![2, 4, 4, 4, 1], Activation::Tanh)
        .with_residual(true)
        .with_seed(5);
    check(spec, inputs(), array![[0.5], [-0.2], [1.0], [0.1], [-0.8]]);
}

#[test]
fn softmax_cross_entropy() {
    let spec = NetworkSpec::new(vec![2, 4, 3, 3], Activation::Tanh)
        .with_loss(LossKind::SoftmaxCrossEntropy)
        .with_seed(9);
    let y = array![
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 1.0, 0.0],
        [1.0, 0.0, 0.0]
    ];
    check(spec, inputs(), y);
}
