mod common;

use proptest::prelude::*;

use common::{numeric_gradient, reference_forward};
use kfd::dataset::synth::{generate_synthetic, SynthSpec};
use kfd::pipeline::{label, labels_from, training_samples, PipelineConfig};
use kfd::regressor::*;
use kfd::rng::Prng;

fn random_case(seed: u64) -> (MlpModel, Vec<Sample>) {
    let mut rng = Prng::new(seed);
    let d = 1 + rng.below(8) as usize;
    let h = 1 + rng.below(8) as usize;
    let mut m = init_model(d, h, rng.next_u64()).unwrap();
    if rng.below(3) == 0 {
        m.activation = Activation::Identity;
    }
    let mut p = m.parameters();
    p.iter_mut().for_each(|v| *v += 0.1 * rng.normal());
    m.set_parameters(&p);
    let n = 1 + rng.below(6) as usize;
    let batch = (0..n)
        .map(|_| Sample {
            features: (0..d).map(|_| rng.normal()).collect(),
            target: rng.normal(),
        })
        .collect();
    (m, batch)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn gradient_matches_finite_differences(seed in any::<u64>()) {
        let (m, data) = random_case(seed);
        let batch: Vec<&Sample> = data.iter().collect();
        let (loss, grads) = loss_and_grad(&m, &batch).unwrap();
        prop_assert!((loss - common::reference_loss(&m, &batch)).abs() < 1e-12 * loss.max(1.0));
        let numeric = numeric_gradient(&m, &batch, 1e-5);
        for (a, n) in grads.flatten().iter().zip(&numeric) {
            let scale = a.abs().max(n.abs());
            if scale < 1e-8 {
                prop_assert!((a - n).abs() < 1e-8);
            } else {
                prop_assert!((a - n).abs() / scale < 1e-4, "analytic {a} numeric {n}");
            }
        }
    }

    #[test]
    fn forward_matches_formula(seed in any::<u64>()) {
        let (m, data) = random_case(seed);
        for s in &data {
            let got = forward(&m, &s.features).unwrap();
            prop_assert!((got - reference_forward(&m, &s.features)).abs() < 1e-12);
        }
    }

    #[test]
    fn schedule_is_exact(lr0 in 1e-6f64..1.0, every in 1usize..50, iter in 0usize..2000) {
        let cfg = TrainConfig { lr0, decay_every: every, ..TrainConfig::default() };
        prop_assert_eq!(cfg.learning_rate(iter), lr0 / 10f64.powi((iter / every) as i32));
    }
}

#[test]
fn logged_rates_follow_schedule() {
    let (m, data) = random_case(9);
    let cfg = TrainConfig {
        decay_every: 3,
        batch_size: 2,
        epochs: 4,
        lr0: 1e-3,
        ..TrainConfig::default()
    };
    let (_, rep) = fit(&m, &data, &cfg).unwrap();
    assert_eq!(rep.iterations, 4 * data.len().div_ceil(2));
    assert_eq!(rep.learning_rates.len(), rep.iterations);
    for (i, lr) in rep.learning_rates.iter().enumerate() {
        assert_eq!(*lr, 1e-3 / 10f64.powi((i / 3) as i32));
    }
}

#[test]
fn fits_synthetic_labels() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynthSpec {
        num_classes: 3,
        videos_per_class: 1,
        frames_min: 40,
        frames_max: 60,
        dim: 8,
        seed: 17,
        ..SynthSpec::default()
    };
    let m = generate_synthetic(&spec, dir.path()).unwrap();
    let f = m.load_features().unwrap();
    let cfg = PipelineConfig::default();
    let labels = labels_from(&label(&m, &f, &cfg).unwrap());
    let samples = training_samples(&m, &f, &labels).unwrap();
    let train_cfg = TrainConfig {
        epochs: 300,
        decay_every: 20_000,
        ..TrainConfig::default()
    };
    let init = init_model(spec.dim, 32, 5).unwrap();
    let (model, rep) = fit(&init, &samples, &train_cfg).unwrap();
    assert!(rep.final_loss < 1e-3, "final loss {}", rep.final_loss);
    assert!(rep.final_loss <= rep.initial_loss);
    for (r, seq) in m.entries().iter().zip(&f) {
        let pred = predict_video(&model, &r.video_id, seq).unwrap();
        for (p, l) in pred.values.iter().zip(&labels[&r.video_id]) {
            assert!((p - l).abs() < 0.1, "{}: {p} vs {l}", r.video_id);
        }
    }
}
