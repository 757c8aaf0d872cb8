use lancer_core::diffmodels::{fit_mse, layer_sizes, mse, AdamState, DenseMatrix, FitOptions, MlpModel};
use lancer_core::lancer::{theta_objective_and_gradient, ContextKind, ReplayBuffer, SurrogateModel};
use lancer_testkit::{central_difference, max_relative_error};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FD_STEP: f64 = 1e-6;
const FD_TOL: f64 = 1e-5;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_vec(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.random_range(-1.0..1.0)).collect()
}

fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_vec(rows, cols, random_vec(r, rows * cols)).unwrap()
}

/// Forward pass written directly from the documented parameter layout:
/// per layer an `out × in` row-major weight block, then `out` biases; tanh
/// on hidden layers.
fn reference_forward(sizes: &[usize], params: &[f64], input: &[f64]) -> Vec<f64> {
    let mut a = input.to_vec();
    let mut offset = 0;
    let layers = sizes.len() - 1;
    for l in 0..layers {
        let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
        let w = &params[offset..offset + fan_in * fan_out];
        let b = &params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
        let mut next = vec![0.0; fan_out];
        for o in 0..fan_out {
            let mut s = b[o];
            for i in 0..fan_in {
                s += w[o * fan_in + i] * a[i];
            }
            next[o] = if l + 1 < layers { s.tanh() } else { s };
        }
        a = next;
        offset += fan_in * fan_out + fan_out;
    }
    a
}

fn scalar_loss(sizes: &[usize], params: &[f64], input: &[f64], upstream: &[f64]) -> f64 {
    reference_forward(sizes, params, input)
        .iter()
        .zip(upstream)
        .map(|(a, b)| a * b)
        .sum()
}

fn fd_on_indices(sizes: &[usize], params: &[f64], input: &[f64], upstream: &[f64], idx: &[usize]) -> Vec<f64> {
    let mut probe = params.to_vec();
    idx.iter()
        .map(|&i| {
            probe[i] = params[i] + FD_STEP;
            let up = scalar_loss(sizes, &probe, input, upstream);
            probe[i] = params[i] - FD_STEP;
            let down = scalar_loss(sizes, &probe, input, upstream);
            probe[i] = params[i];
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

#[test]
fn parameter_and_input_gradients_match_finite_differences() {
    let mut r = rng(1);
    for depth in 0..=2 {
        for width in [5, 50, 200] {
            let hidden = vec![width; depth];
            let sizes = layer_sizes(8, &hidden, 3);
            let model = MlpModel::glorot(&sizes, &mut r).unwrap();
            let input = random_vec(&mut r, 8);
            let upstream = random_vec(&mut r, 3);
            let (gp, gx) = model.backward(&input, &upstream).unwrap();

            let n = model.param_count();
            let idx: Vec<usize> = if n <= 600 {
                (0..n).collect()
            } else {
                (0..600).map(|_| r.random_range(0..n)).collect()
            };
            let fd = fd_on_indices(&sizes, model.params(), &input, &upstream, &idx);
            let analytic: Vec<f64> = idx.iter().map(|&i| gp[i]).collect();
            let err = max_relative_error(&analytic, &fd, 1e-3);
            assert!(err <= FD_TOL, "depth {depth} width {width}: params rel err {err:e}");

            let params = model.params().to_vec();
            let fd_x = central_difference(&mut |x| scalar_loss(&sizes, &params, x, &upstream), &input, FD_STEP);
            let err = max_relative_error(&gx, &fd_x, 1e-3);
            assert!(err <= FD_TOL, "depth {depth} width {width}: input rel err {err:e}");
        }
    }
}

#[test]
fn forward_matches_the_reference_evaluation() {
    let mut r = rng(2);
    for hidden in [vec![], vec![7], vec![30, 11]] {
        let sizes = layer_sizes(6, &hidden, 4);
        let model = MlpModel::glorot(&sizes, &mut r).unwrap();
        let inputs = random_matrix(&mut r, 9, 6);
        let batch = model.forward_batch(&inputs).unwrap().into_output();
        for row in 0..9 {
            let single = model.forward(inputs.row(row)).unwrap();
            let want = reference_forward(&sizes, model.params(), inputs.row(row));
            for o in 0..4 {
                assert!((single[o] - want[o]).abs() <= 1e-12);
                assert!((batch.get(row, o) - want[o]).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn batch_backward_sums_per_row_gradients() {
    let mut r = rng(3);
    let sizes = layer_sizes(5, &[12, 6], 2);
    let model = MlpModel::glorot(&sizes, &mut r).unwrap();
    let inputs = random_matrix(&mut r, 7, 5);
    let upstream = random_matrix(&mut r, 7, 2);
    let trace = model.forward_batch(&inputs).unwrap();
    let (gp, gx) = model.backward_batch(&trace, &upstream, true).unwrap();
    let gx = gx.unwrap();
    let mut summed = vec![0.0; model.param_count()];
    for row in 0..7 {
        let (p, x) = model.backward(inputs.row(row), upstream.row(row)).unwrap();
        for (s, v) in summed.iter_mut().zip(&p) {
            *s += v;
        }
        for (a, b) in gx.row(row).iter().zip(&x) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
    assert!(max_relative_error(&gp, &summed, 1e-12) <= 1e-12);
}

#[test]
fn composed_target_gradient_matches_finite_differences() {
    let mut r = rng(4);
    let (n, feat, c_dim) = (6, 4, 5);
    for (target_hidden, kind, ctx_dim) in [
        (vec![], ContextKind::None, 0),
        (vec![8], ContextKind::Observed, feat),
        (vec![6, 6], ContextKind::Descriptor, 3),
    ] {
        let mut surrogate = SurrogateModel::new(c_dim, ctx_dim, kind, &[16, 16], &mut r).unwrap();
        let mut buffer = ReplayBuffer::new(c_dim, ctx_dim, None);
        for _ in 0..40 {
            let c = random_vec(&mut r, c_dim);
            let loss = c.iter().map(|v| v * v).sum::<f64>() + r.random_range(0.0..0.1);
            buffer.push(c, random_vec(&mut r, ctx_dim), loss).unwrap();
        }
        let mut adam = AdamState::with_lr(surrogate.param_count(), 1e-2);
        surrogate.fit(&buffer, &FitOptions::new(30, 0), &mut adam).unwrap();

        let target = MlpModel::glorot(&layer_sizes(feat, &target_hidden, c_dim), &mut r).unwrap();
        let features = random_matrix(&mut r, n, feat);
        let contexts = match kind {
            ContextKind::None => DenseMatrix::zeros(n, 0),
            ContextKind::Observed => features.clone(),
            ContextKind::Descriptor => random_matrix(&mut r, n, ctx_dim),
        };
        let (_, grad) = theta_objective_and_gradient(&target, &surrogate, &features, &contexts, None).unwrap();

        let sizes = target.layer_sizes().to_vec();
        let fd = central_difference(
            &mut |theta| {
                let t = MlpModel::from_parts(sizes.clone(), theta.to_vec()).unwrap();
                (0..n)
                    .map(|i| {
                        let c = t.forward(features.row(i)).unwrap();
                        surrogate.value(&c, contexts.row(i)).unwrap()
                    })
                    .sum::<f64>()
                    / n as f64
            },
            target.params(),
            FD_STEP,
        );
        let err = max_relative_error(&grad, &fd, 1e-3);
        assert!(err <= FD_TOL, "{kind:?}: rel err {err:e}");
    }
}

#[test]
fn glorot_weights_have_the_intended_spread() {
    let mut r = rng(5);
    let sizes = [200, 200, 50];
    let model = MlpModel::glorot(&sizes, &mut r).unwrap();
    let mut offset = 0;
    for l in 0..2 {
        let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
        let w = &model.params()[offset..offset + fan_in * fan_out];
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let var = w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / w.len() as f64;
        let want = 2.0 / (fan_in + fan_out) as f64;
        assert!(var > want / 4.0 && var < want * 4.0, "layer {l}: {var} vs {want}");
        assert!((var / want - 1.0).abs() < 0.1);
        let bias = &model.params()[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
        assert!(bias.iter().all(|&b| b == 0.0));
        offset += fan_in * fan_out + fan_out;
    }
}

#[test]
fn mse_fitting_mostly_decreases_the_loss() {
    let mut r = rng(6);
    let inputs = random_matrix(&mut r, 64, 3);
    let targets = DenseMatrix::from_vec(
        64,
        1,
        (0..64)
            .map(|i| {
                let x = inputs.row(i);
                (x[0] * 2.0).sin() + x[1] * x[2]
            })
            .collect(),
    )
    .unwrap();
    let mut model = MlpModel::glorot(&[3, 20, 1], &mut r).unwrap();
    let mut adam = AdamState::with_lr(model.param_count(), 1e-2);
    let mut losses = vec![mse(&model, &inputs, &targets).unwrap()];
    for step in 0..100 {
        losses.push(fit_mse(&mut model, &inputs, &targets, &FitOptions::new(1, step), &mut adam).unwrap());
    }
    let decreasing = losses.windows(2).filter(|w| w[1] <= w[0]).count();
    assert!(decreasing >= 90, "{decreasing}/100 steps decreased the loss");
    assert!(losses[100] < 0.25 * losses[0]);
}

#[test]
fn zero_updates_are_rejected() {
    let mut model = MlpModel::zeros(&[2, 1]).unwrap();
    let x = DenseMatrix::zeros(3, 2);
    let y = DenseMatrix::zeros(3, 1);
    let mut adam = AdamState::new(model.param_count());
    assert!(fit_mse(&mut model, &x, &y, &FitOptions::new(0, 0), &mut adam).is_err());
    assert!(fit_mse(&mut model, &x, &DenseMatrix::zeros(2, 1), &FitOptions::new(1, 0), &mut adam).is_err());
}

#[test]
fn constant_targets_are_learned() {
    let mut r = rng(7);
    let inputs = random_matrix(&mut r, 20, 4);
    let targets = DenseMatrix::from_vec(20, 2, [1.5, -0.5].repeat(20)).unwrap();
    let mut model = MlpModel::glorot(&[4, 8, 2], &mut r).unwrap();
    let mut adam = AdamState::with_lr(model.param_count(), 1e-2);
    let loss = fit_mse(&mut model, &inputs, &targets, &FitOptions::new(2000, 0), &mut adam).unwrap();
    assert!(loss <= 1e-4, "{loss}");
}

#[test]
fn linear_model_recovers_a_linear_map() {
    let mut r = rng(8);
    let w_true = random_matrix(&mut r, 3, 5);
    let b_true = random_vec(&mut r, 3);
    let truth = MlpModel::linear(&w_true, &b_true).unwrap();
    let inputs = random_matrix(&mut r, 200, 5);
    let targets = truth.forward_batch(&inputs).unwrap().into_output();
    let mut model = MlpModel::zeros(&[5, 3]).unwrap();
    let mut adam = AdamState::with_lr(model.param_count(), 1e-2);
    let loss = fit_mse(&mut model, &inputs, &targets, &FitOptions::new(3000, 0), &mut adam).unwrap();
    assert!(loss <= 1e-4, "{loss}");
}

#[test]
fn fitting_is_deterministic_for_a_seed() {
    let run = |seed: u64| {
        let mut r = rng(9);
        let inputs = random_matrix(&mut r, 50, 3);
        let targets = random_matrix(&mut r, 50, 1);
        let mut model = MlpModel::glorot(&[3, 10, 1], &mut r).unwrap();
        let mut adam = AdamState::new(model.param_count());
        let opts = FitOptions {
            n_updates: 40,
            batch_size: Some(8),
            seed,
        };
        fit_mse(&mut model, &inputs, &targets, &opts, &mut adam).unwrap();
        model
    };
    assert_eq!(run(1), run(1));
    assert_ne!(run(1), run(2));
}

#[test]
fn checkpoints_round_trip_bit_exactly() {
    let mut r = rng(10);
    let model = MlpModel::glorot(&[4, 9, 3, 2], &mut r).unwrap();
    let bin = model.to_bytes();
    assert_eq!(&bin[..8], b"LNCRMLP\0");
    assert_eq!(MlpModel::from_bytes(&bin).unwrap(), model);
    assert_eq!(MlpModel::from_json(&model.to_json().unwrap()).unwrap(), model);

    let mut truncated = bin.clone();
    truncated.pop();
    assert!(MlpModel::from_bytes(&truncated).is_err());
    let mut bad_magic = bin.clone();
    bad_magic[0] = b'X';
    assert!(MlpModel::from_bytes(&bad_magic).is_err());
    let mut bad_version = bin;
    bad_version[8] = 2;
    assert!(MlpModel::from_bytes(&bad_version).is_err());
    assert!(MlpModel::from_json(br#"{"format":"other","version":1,"layer_sizes":[1,1],"params":[0,0]}"#).is_err());
}

proptest! {
    #[test]
    fn binary_checkpoint_preserves_every_bit(
        sizes in prop::collection::vec(1usize..6, 2..5),
        seed in any::<u64>(),
    ) {
        let mut model = MlpModel::zeros(&sizes).unwrap();
        let mut r = rng(seed);
        for p in model.params_mut() {
            *p = f64::from_bits(r.random::<u64>() >> 2);
        }
        prop_assume!(model.params().iter().all(|p| p.is_finite()));
        let back = MlpModel::from_bytes(&model.to_bytes()).unwrap();
        prop_assert!(back.params().iter().zip(model.params()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn arbitrary_bytes_never_panic_the_decoder(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let _ = MlpModel::from_bytes(&bytes);
        let _ = MlpModel::from_json(&bytes);
    }
}
