use freqlens::experiment::{
    effective_target_dataset, epochs_to_error, first_epoch_below, learning_component_function, run_experiment,
    run_trajectory, synth_target, train_network, EpochsToError, ExperimentConfig, TargetKind, TrainingSettings,
};
use freqlens::filter::lfr;
use freqlens::network::{init_network, Activation, NetworkParams, NetworkSpec};
use freqlens::LabeledDataset;

fn small_config(extra: &str) -> ExperimentConfig {
    ExperimentConfig::parse(&format!(
        "seeds = 3\n[data]\ntarget = sin:k=2\nn = 24\n[network]\nwidth = 6\ndepths = 2\n\
         [train]\nbatch_size = 8\nepochs = 12\nthreshold = 1e-9\n[analysis]\ngrid = 0.1:1000:8\n{extra}"
    ))
    .unwrap()
}

fn sine(n: usize) -> LabeledDataset {
    synth_target(&TargetKind::SinKPiX { k: 1.0 }, n, None, 0).unwrap()
}

#[test]
fn same_seed_gives_identical_records() {
    let config = small_config("");
    let (a, _) = run_experiment(&config).unwrap();
    let (b, _) = run_experiment(&config).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn different_seeds_differ() {
    let config = small_config("");
    let data = config.data.load().unwrap();
    let a = run_trajectory(&config, &data, 2, 1).unwrap();
    let b = run_trajectory(&config, &data, 2, 2).unwrap();
    assert_ne!(a.loss_history, b.loss_history);
}

#[test]
fn record_has_one_curve_per_epoch_and_layer() {
    let config = small_config("");
    let data = config.data.load().unwrap();
    let rec = run_trajectory(&config, &data, 2, 3).unwrap();
    assert_eq!(rec.epochs, vec![0, 1, 2, 3, 5, 8, 12]);
    assert_eq!(rec.layers, vec![1, 2]);
    assert_eq!(rec.loss_history.len() as u64, rec.trained_epochs() + 1);
    assert_eq!(rec.curves.len(), rec.epochs.len() * rec.layers.len());
    for &e in &rec.epochs {
        for &l in &rec.layers {
            let c = rec.curve(e, l).unwrap();
            assert_eq!(c.sweep.lfr_values.len(), 8);
            assert_eq!(c.rdf.slopes.len(), 7);
        }
    }
}

#[test]
fn zero_budget_records_only_epoch_zero() {
    let config = small_config("[train]\nepochs = 0\n");
    let data = config.data.load().unwrap();
    let rec = run_trajectory(&config, &data, 2, 3).unwrap();
    assert_eq!(rec.epochs, vec![0]);
    assert_eq!(rec.loss_history.len(), 1);
}

#[test]
fn first_layer_sees_normalized_source() {
    let data = sine(31);
    let spec = NetworkSpec::uniform(1, 5, 2, 1, Activation::Tanh);
    let params = init_network(&spec).unwrap();
    let s0 = effective_target_dataset(&params, &spec, &data, 1).unwrap();
    assert_eq!(s0.dataset, data.normalize_dimensions());
}

#[test]
fn effective_targets_keep_labels_and_widths() {
    let data = sine(31);
    let spec = NetworkSpec::uniform(1, 7, 3, 1, Activation::Tanh);
    let params = init_network(&spec).unwrap();
    for layer in [2i64, 3, 4, -1, -2] {
        let t = effective_target_dataset(&params, &spec, &data, layer).unwrap();
        assert_eq!(t.dataset.targets(), data.targets());
        assert_eq!(t.dataset.len(), data.len());
        assert_eq!(t.dataset.input_dim(), 7);
    }
    assert!(effective_target_dataset(&params, &spec, &data, 5).is_err());
    assert!(effective_target_dataset(&params, &spec, &data, 0).is_err());
}

#[test]
fn zero_network_collapses_points() {
    let data = sine(31);
    let spec = NetworkSpec::uniform(1, 4, 2, 1, Activation::Tanh);
    let params = NetworkParams::zeros(&spec);
    let t = effective_target_dataset(&params, &spec, &data, 3).unwrap();
    assert!(t.dataset.points().iter().all(|&v| v == 0.0));
    // coincident points: the smoother returns the target mean everywhere
    let ys = data.targets();
    let mean = ys.mean().unwrap();
    let expected = ys.len() as f64 * mean * mean / ys.iter().map(|v| v * v).sum::<f64>();
    for delta in [1e-3, 1.0, 1e3] {
        assert!((lfr(&t.dataset, delta).unwrap() - expected).abs() < 1e-12);
    }
    let constant = LabeledDataset::new(t.dataset.points().to_owned(), ys.mapv(|_| 0.7)).unwrap();
    assert!((lfr(&constant, 0.01).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn learning_component_pairs_activations_with_outputs() {
    let data = sine(31);
    let spec = NetworkSpec::uniform(1, 4, 2, 1, Activation::Tanh).with_seed(3);
    let mut params = init_network(&spec).unwrap();
    params.weights[2].fill(0.0);
    params.biases[2].fill(0.25);
    let f = learning_component_function(&params, &spec, &data, -1).unwrap();
    assert!(f.targets().iter().all(|&v| v == 0.25));
    assert!((lfr(&f, 0.01).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn trained_learning_component_tracks_effective_target() {
    let data = sine(64);
    let spec = NetworkSpec::uniform(1, 32, 2, 1, Activation::Tanh).with_seed(1);
    let settings = TrainingSettings::adam(1e-2, 64, 3000, 1e-5);
    let trained = train_network(&spec, &data, &settings, |_| Ok(())).unwrap();
    let f = learning_component_function(&trained.params, &spec, &data, -1).unwrap();
    let s = effective_target_dataset(&trained.params, &spec, &data, -1).unwrap();
    for delta in [1.0, 0.1, 0.01] {
        let a = lfr(&f, delta).unwrap();
        let b = lfr(&s.dataset, delta).unwrap();
        assert!((a - b).abs() < 1e-2, "delta {delta}: {a} vs {b}");
    }
}

#[test]
fn training_changes_hidden_lfr() {
    let config = small_config("[train]\nepochs = 300\nlr = 1e-2\n[analysis]\nepochs = 0\nlayers = -2\n");
    let data = config.data.load().unwrap();
    let rec = run_trajectory(&config, &data, 2, 0).unwrap();
    let first = &rec.curves.first().unwrap().sweep.lfr_values;
    let last = &rec.curves.last().unwrap().sweep.lfr_values;
    assert_ne!(rec.curves.first().unwrap().epoch, rec.curves.last().unwrap().epoch);
    let gap = first.iter().zip(last).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap > 1e-3, "max LFR change {gap}");
}

#[test]
fn epochs_to_error_is_monotone_in_threshold() {
    let data = sine(40);
    let spec = NetworkSpec::uniform(1, 16, 2, 1, Activation::Tanh).with_seed(2);
    let mut settings = TrainingSettings::adam(1e-2, 40, 400, 1e-9);
    settings.stop_at_threshold = false;
    let history = train_network(&spec, &data, &settings, |_| Ok(())).unwrap().loss_history;
    let mut prev = 0;
    for thr in [1e-4, 1e-3, 1e-2, 1e-1, 1.0] {
        let e = first_epoch_below(&history, thr).unwrap_or(u64::MAX);
        if prev != 0 {
            assert!(e <= prev);
        }
        prev = e;
    }
}

#[test]
fn trivial_thresholds() {
    let data = sine(20);
    let spec = NetworkSpec::uniform(1, 4, 1, 1, Activation::Tanh);
    let easy = TrainingSettings::adam(1e-3, 20, 10, 1e9);
    assert_eq!(epochs_to_error(&spec, &data, &easy).unwrap(), EpochsToError::Reached(0));
    let hard = TrainingSettings::adam(1e-3, 20, 1, 1e-300);
    assert_eq!(
        epochs_to_error(&spec, &data, &hard).unwrap(),
        EpochsToError::Exceeded { budget: 1 }
    );
}
