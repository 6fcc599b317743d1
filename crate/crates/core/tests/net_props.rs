mod common;

use common::{grad_check, NaiveNet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rftl::datastore::window_at;
use rftl::net::*;
use rftl::Scheme;

fn reduced(n: usize, dropout: f32, seed: u64) -> Model {
    let mut cfg = ModelConfig::tiny(n, 8, 4, 16);
    cfg.dropout_rate = dropout;
    Model::init(cfg, Scheme::ALL[..n].to_vec(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn random_inputs(b: usize, seed: u64) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..b * 256).map(|_| rng.random_range(-1.5f32..1.5)).collect()
}

fn flat(p: &Params) -> Vec<f64> {
    p.tensors().iter().flat_map(|t| t.iter().map(|&v| v as f64)).collect()
}

#[test]
fn gradients_match_central_differences() {
    let model = reduced(3, 0.0, 11);
    let x = random_inputs(3, 12);
    let labels = [0, 2, 1];
    let (loss, g) = model.loss_and_grads(&x, &labels, &mut ChaCha8Rng::seed_from_u64(0), Trainable::All).unwrap();
    let net = NaiveNet::of(&model);
    let p = flat(&model.params);
    assert!((net.loss(&p, &x, &labels) - loss as f64).abs() < 1e-5);
    let r = grad_check(&net, &p, &flat(&g), &x, &labels, 1e-3, 1e-4, 40, true);
    assert!(r.per_tensor.iter().all(|&c| c > 0));
    let frac = r.agreeing as f64 / r.checked as f64;
    assert!(frac >= 0.99, "{} of {} agree, worst {}", r.agreeing, r.checked, r.worst);
}

#[test]
fn tiny_probes_agree_without_holding_gates() {
    let model = reduced(3, 0.0, 21);
    let x = random_inputs(2, 22);
    let labels = [1, 0];
    let (_, g) = model.loss_and_grads(&x, &labels, &mut ChaCha8Rng::seed_from_u64(0), Trainable::All).unwrap();
    let net = NaiveNet::of(&model);
    let r = grad_check(&net, &flat(&model.params), &flat(&g), &x, &labels, 1e-6, 1e-3, 20, false);
    assert!(r.agreeing as f64 / r.checked as f64 >= 0.95, "{} of {}", r.agreeing, r.checked);
}

#[test]
fn full_width_parameter_count_for_every_class_count() {
    for n in 2..=23 {
        assert_eq!(ModelConfig::full(n).param_count(), 7_432_725 + 66 * n);
    }
}

#[test]
fn init_is_seeded() {
    assert_eq!(reduced(4, 0.5, 1), reduced(4, 0.5, 1));
    assert_ne!(reduced(4, 0.5, 1).params, reduced(4, 0.5, 2).params);
}

#[test]
fn eval_forward_is_deterministic_and_train_forward_is_not() {
    let m = reduced(3, 0.5, 4);
    let x = random_inputs(4, 5);
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let a = m.forward(&x, false, &mut r).unwrap();
    let b = m.forward(&x, false, &mut r).unwrap();
    assert_eq!(a, b);
    let c = m.forward(&x, true, &mut r).unwrap();
    let d = m.forward(&x, true, &mut r).unwrap();
    assert_ne!(c, d);
}

#[test]
fn inverted_dropout_preserves_expected_activation() {
    // With a linear path after dropout, the mean over many masks of the
    // train-mode logits approaches the eval-mode logits.
    let mut m = reduced(2, 0.5, 8);
    for v in &mut m.params.fc1_w {
        *v = v.abs();
    }
    m.params.fc1_b.iter_mut().for_each(|v| *v = 1.0);
    let x = random_inputs(1, 9);
    let eval = m.predict(&x).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let trials = 4000;
    let mut mean = vec![0.0f64; 2];
    for _ in 0..trials {
        let l = m.forward(&x, true, &mut rng).unwrap();
        for i in 0..2 {
            mean[i] += l[i] as f64 / trials as f64;
        }
    }
    for i in 0..2 {
        assert!((mean[i] - eval[i] as f64).abs() < 0.02 * (1.0 + eval[i].abs() as f64), "{mean:?} {eval:?}");
    }
}

#[test]
fn duplicated_batch_has_the_same_loss() {
    let m = reduced(3, 0.0, 3);
    let x = random_inputs(2, 4);
    let mut xx = x.clone();
    xx.extend_from_slice(&x);
    let a = m.loss(&x, &[0, 1]).unwrap();
    let b = m.loss(&xx, &[0, 1, 0, 1]).unwrap();
    assert!((a - b).abs() < 1e-6);
}

#[test]
fn first_adam_step_is_lr_times_sign() {
    let mut m = reduced(3, 0.0, 6);
    let before = m.clone();
    let mut g = Params::zeros(&m.config);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for t in g.tensors_mut() {
        for v in t.iter_mut() {
            *v = rng.random_range(-2.0f32..2.0);
        }
    }
    let mut s = AdamState::new(&m.config);
    s.step(&mut m, &g, 1e-3, Trainable::All).unwrap();
    for ((a, b), gg) in m.params.tensors().iter().zip(before.params.tensors()).zip(g.tensors()) {
        for k in 0..a.len() {
            let want = -1e-3 * gg[k].signum() as f64;
            assert!(((a[k] - b[k]) as f64 - want).abs() < 1e-6);
        }
    }
}

#[test]
fn ten_adam_steps_are_bitwise_reproducible() {
    let run = || {
        let mut m = reduced(3, 0.5, 1);
        let mut s = AdamState::new(&m.config);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_inputs(6, 2);
        for _ in 0..10 {
            let (_, g) = m.loss_and_grads(&x, &[0, 1, 2, 0, 1, 2], &mut rng, Trainable::All).unwrap();
            s.step(&mut m, &g, 1e-3, Trainable::All).unwrap();
        }
        m
    };
    assert_eq!(run(), run());
}

#[test]
fn head_replacement_parameter_delta() {
    let m = Model::init(ModelConfig::scaled(23, 0.02), Scheme::ALL.to_vec(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let r = m.replace_head(Scheme::ALL[..12].to_vec(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let h = m.config.h() as isize;
    assert_eq!(r.param_count() as isize - m.param_count() as isize, (h + 1) * (12 - 23));
    let same = m.replace_head(Scheme::ALL.to_vec(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(same.params.conv2_w, m.params.conv2_w);
    assert_ne!(same.params.fc2_w, m.params.fc2_w);
    // at full width the head holds 66 values per class
    assert_eq!(ModelConfig::full(23).param_count() - ModelConfig::full(12).param_count(), 66 * 11);
}

#[test]
fn checkpoint_reload_reproduces_forward_and_loss() {
    let m = reduced(3, 0.5, 2);
    let x = random_inputs(5, 3);
    let labels = [0, 1, 2, 2, 1];
    let ckpt = Checkpoint {
        val_loss: m.loss(&x, &labels).unwrap(),
        model: m.clone(),
        optimizer: AdamState::new(&m.config),
        epoch: 0,
    };
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.ckpt");
    save_checkpoint(&ckpt, &p).unwrap();
    let back = load_checkpoint(&p).unwrap();
    assert_eq!(back.model.predict(&x).unwrap(), m.predict(&x).unwrap());
    assert_eq!(back.model.loss(&x, &labels).unwrap().to_bits(), ckpt.val_loss.to_bits());
    std::fs::write(&p, b"not a checkpoint").unwrap();
    assert!(load_checkpoint(&p).is_err());
}

#[test]
fn shape_mismatch_is_rejected() {
    let m = reduced(2, 0.0, 0);
    assert!(matches!(m.predict(&[0.0; 255]), Err(NetError::ShapeMismatch { .. })));
    assert!(matches!(m.predict(&[]), Err(NetError::EmptyBatch)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn softmax_cross_entropy_is_stable(logits in prop::collection::vec(-1e4f32..1e4, 2..8), pick in 0usize..8) {
        let n = logits.len();
        let y = pick % n;
        let (l, g) = cross_entropy(&logits, &[y], n).unwrap();
        prop_assert!(l.is_finite() && l >= 0.0);
        prop_assert!(g.iter().all(|v| v.is_finite()));
        let p = softmax(&logits);
        prop_assert!((p.iter().sum::<f32>() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn scaled_inputs_give_the_same_prediction(scale in 1e-3f32..1e3, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<num_complex::Complex32> =
            (0..200).map(|_| num_complex::Complex32::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let y: Vec<num_complex::Complex32> = x.iter().map(|c| c * scale).collect();
        let m = reduced(4, 0.0, seed);
        let a = m.predict(&window_at(&x, 17).unwrap()).unwrap();
        let b = m.predict(&window_at(&y, 17).unwrap()).unwrap();
        let am = rftl::harness::argmax(&a);
        let bm = rftl::harness::argmax(&b);
        prop_assert_eq!(am, bm);
    }

    #[test]
    fn single_row_matches_batched_row(seed in 0u64..500, b in 2usize..9, pick in 0usize..9) {
        let m = reduced(3, 0.5, seed);
        let x = random_inputs(b, seed + 1);
        let i = pick % b;
        let all = m.predict(&x).unwrap();
        let one = m.predict(&x[i * 256..(i + 1) * 256]).unwrap();
        prop_assert_eq!(&all[i * 3..(i + 1) * 3], &one[..]);
    }
}
