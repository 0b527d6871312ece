use cvkan::datasets::{gen_symbolic, SymbolicFn};
use cvkan::norm::NormVariant;
use cvkan::training::{
    adam_step, fold_partition, minibatches, mse_with_grad, run_cv_full, run_cv_on, AdamConfig, AdamState,
    DatasetConfig, ExperimentConfig, MeanStd,
};
use cvkan::{init_model, ComplexBatch, ComplexScalar, GridSpec, ModelSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_config(epochs: usize) -> ExperimentConfig {
    let mut config = ExperimentConfig::new(
        DatasetConfig::Symbolic { function: SymbolicFn::F1, samples: 300 },
        ModelSpec::cvkan(&[1, 2, 1], NormVariant::BnC),
    );
    config.epochs = epochs;
    config.folds = 3;
    config.seed = 11;
    config.optimizer.batch_size = 64;
    config
}

#[test]
fn one_small_adam_step_reduces_the_loss() {
    let spec = ModelSpec::cvkan(&[1, 2, 1], NormVariant::None);
    let hyper = AdamConfig { lr: 1e-4, ..AdamConfig::default() };
    let mut failures = 0;
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut model = init_model(&spec, seed).unwrap();
        let sample = |rng: &mut ChaCha8Rng| {
            ComplexBatch::new(1, 1, vec![ComplexScalar::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))])
                .unwrap()
        };
        let (x, t) = (sample(&mut rng), sample(&mut rng));
        let (out, cache) = model.forward_train(&x).unwrap();
        let (before, g) = mse_with_grad(&out, &t).unwrap();
        let grads = model.backward(&cache, &g);
        let mut state = AdamState::new(model.param_count());
        adam_step(model.params_mut(), &grads, &mut state, &hyper).unwrap();
        let after = mse_with_grad(&model.forward_train(&x).unwrap().0, &t).unwrap().0;
        if after >= before {
            failures += 1;
        }
    }
    assert!(failures <= 1, "{failures} of 20 steps did not reduce the loss");
}

#[test]
fn non_finite_gradients_leave_parameters_untouched() {
    let mut params = vec![1.0, 2.0, 3.0];
    let mut state = AdamState::new(3);
    let err = adam_step(&mut params, &[0.1, f64::NAN, 0.2], &mut state, &AdamConfig::default());
    assert!(err.is_err());
    assert_eq!(params, vec![1.0, 2.0, 3.0]);
}

#[test]
fn fold_sizes() {
    let sizes = |n, k| fold_partition(n, k, 3).unwrap().iter().map(Vec::len).collect::<Vec<_>>();
    assert_eq!(sizes(1000, 5), vec![200; 5]);
    assert_eq!(sizes(1003, 5), vec![201, 201, 201, 200, 200]);
    assert!(fold_partition(4, 5, 0).is_err());
    assert!(fold_partition(10, 1, 0).is_err());
    assert_ne!(fold_partition(100, 5, 1).unwrap(), fold_partition(100, 5, 2).unwrap());
}

#[test]
fn trailing_single_sample_joins_the_previous_batch() {
    let order: Vec<usize> = (0..513).collect();
    let lens: Vec<usize> = minibatches(&order, 256).iter().map(|b| b.len()).collect();
    assert_eq!(lens, vec![256, 257]);
    let order: Vec<usize> = (0..514).collect();
    let lens: Vec<usize> = minibatches(&order, 256).iter().map(|b| b.len()).collect();
    assert_eq!(lens, vec![256, 256, 2]);
    let lens: Vec<usize> = minibatches(&order[..1], 256).iter().map(|b| b.len()).collect();
    assert_eq!(lens, vec![1]);
}

#[test]
fn sample_standard_deviation() {
    let m = MeanStd::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
    assert_eq!(m.mean, 2.5);
    assert!((m.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    assert_eq!(MeanStd::of(&[7.0]).unwrap().std, 0.0);
    assert!(MeanStd::of(&[]).is_none());
}

#[test]
fn cross_validation_is_deterministic() {
    let config = small_config(3);
    let a = run_cv_full(&config, None).unwrap();
    let b = run_cv_full(&config, None).unwrap();
    assert_eq!(a.summary, b.summary);
    assert_eq!(a.models.len(), 3);
    for (x, y) in a.models.iter().zip(&b.models) {
        let bits = |m: &cvkan::CvkanModel| m.params().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(x), bits(y));
    }
    let mut other = config.clone();
    other.seed = 12;
    assert_ne!(run_cv_full(&other, None).unwrap().summary, a.summary);
}

#[test]
fn training_reduces_test_error() {
    let config = small_config(30);
    let d = gen_symbolic(SymbolicFn::F1, 600, 5, &GridSpec::default()).unwrap();
    let run = run_cv_on(&config, &d).unwrap();
    assert!(run.summary.diverged_folds.is_empty());
    let after = run.summary.metric("mse").unwrap();
    assert_eq!(after.n, 3);
    for fold in &run.summary.folds {
        assert_eq!(fold.train_loss.len(), 30);
        let before = fold.initial.mse.unwrap();
        let trained = fold.metrics.unwrap().mse.unwrap();
        assert!(trained < 0.5 * before, "fold {}: {before} -> {trained}", fold.fold);
    }
}

#[test]
fn config_rejects_unknown_keys_and_fills_defaults() {
    let text = r#"{
        "dataset": {"kind": "symbolic", "function": "f1"},
        "model": {"widths": [1, 1], "norm": "none"}
    }"#;
    let config = ExperimentConfig::from_json(text).unwrap();
    assert_eq!((config.epochs, config.folds, config.seed), (1000, 5, 0));
    assert_eq!(config.optimizer.lr, 1e-3);
    assert_eq!(config.optimizer.batch_size, 256);
    assert!(ExperimentConfig::from_json(&text.replace("\"norm\"", "\"nrom\"")).is_err());
    assert!(ExperimentConfig::from_json(&text.replace("\"f1\"", "\"f9\"")).is_err());
}
