//! Finite-difference oracles for every differentiable op. The scalar
//! probe is a fixed random projection of the op's output, so the
//! analytic gradient of the probe is the backward pass applied to the
//! projection vector.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use u2s_nn::gradcheck;
use u2s_nn::*;

const STEP: f64 = 1e-5;

fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn conv3d_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..5 {
        let spec = ConvSpec::new(2, 2, (3, 3, 3), (1, 1, 1), 1).unwrap();
        let in_shape = [1, 2, 3, 4, 4];
        let out_shape = spec.output_shape(&in_shape).unwrap();
        let n_out: usize = out_shape.iter().product();
        let mut x = rand_vec(&mut rng, in_shape.iter().product());
        let mut w = rand_vec(&mut rng, 2 * 2 * 27);
        let mut b = rand_vec(&mut rng, 2);
        let proj = rand_vec(&mut rng, n_out);

        let input = Tensor::from_vec(&in_shape, x.clone()).unwrap();
        let weights = Tensor::from_vec(&[2, 2, 3, 3, 3], w.clone()).unwrap();
        let upstream = Tensor::from_vec(&out_shape, proj.clone()).unwrap();
        let grads = conv3d_backward(&input, &spec, &weights, &upstream).unwrap();

        let eval = |x: &[f64], w: &[f64], b: &[f64]| {
            let input = Tensor::from_vec(&in_shape, x.to_vec()).unwrap();
            let weights = Tensor::from_vec(&[2, 2, 3, 3, 3], w.to_vec()).unwrap();
            let bias = Tensor::from_vec(&[2], b.to_vec()).unwrap();
            let out = conv3d_forward(&input, &spec, &weights, &bias).unwrap();
            dot(out.data(), &proj)
        };

        let (wc, bc) = (w.clone(), b.clone());
        let r = gradcheck::check(
            &mut |xs| eval(xs, &wc, &bc),
            &mut x,
            grads.input.data(),
            STEP,
        );
        assert!(r.max_rel_error < 1e-4, "case {case} input grad: {}", r.max_rel_error);

        let (xc, bc) = (x.clone(), b.clone());
        let r = gradcheck::check(
            &mut |ws| eval(&xc, ws, &bc),
            &mut w,
            grads.weights.data(),
            STEP,
        );
        assert!(r.max_rel_error < 1e-4, "case {case} weight grad: {}", r.max_rel_error);

        let (xc, wc) = (x.clone(), w.clone());
        let r = gradcheck::check(
            &mut |bs| eval(&xc, &wc, bs),
            &mut b,
            grads.bias.data(),
            STEP,
        );
        assert!(r.max_rel_error < 1e-4, "case {case} bias grad: {}", r.max_rel_error);
    }
}

#[test]
fn grouped_conv3d_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let spec = ConvSpec::new(4, 4, (1, 1, 1), (0, 0, 0), 2).unwrap();
    let in_shape = [2, 4, 2, 3, 3];
    let out_shape = spec.output_shape(&in_shape).unwrap();
    let mut x = rand_vec(&mut rng, in_shape.iter().product());
    let w0 = rand_vec(&mut rng, 4 * 2);
    let b0 = rand_vec(&mut rng, 4);
    let proj = rand_vec(&mut rng, out_shape.iter().product());

    let input = Tensor::from_vec(&in_shape, x.clone()).unwrap();
    let weights = Tensor::from_vec(&[4, 2, 1, 1, 1], w0.clone()).unwrap();
    let upstream = Tensor::from_vec(&out_shape, proj.clone()).unwrap();
    let grads = conv3d_backward(&input, &spec, &weights, &upstream).unwrap();

    let r = gradcheck::check(
        &mut |xs| {
            let input = Tensor::from_vec(&in_shape, xs.to_vec()).unwrap();
            let weights = Tensor::from_vec(&[4, 2, 1, 1, 1], w0.clone()).unwrap();
            let bias = Tensor::from_vec(&[4], b0.clone()).unwrap();
            let out = conv3d_forward(&input, &spec, &weights, &bias).unwrap();
            dot(out.data(), &proj)
        },
        &mut x,
        grads.input.data(),
        STEP,
    );
    assert!(r.max_rel_error < 1e-4, "grouped input grad: {}", r.max_rel_error);
}

#[test]
fn relu_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..5 {
        // inputs bounded away from the kink by 0.1
        let mut x: Vec<f64> = (0..24)
            .map(|_| {
                let v: f64 = rng.gen_range(0.1..1.0);
                if rng.gen_bool(0.5) {
                    v
                } else {
                    -v
                }
            })
            .collect();
        let proj = rand_vec(&mut rng, 24);
        let input = Tensor::from_vec(&[2, 12], x.clone()).unwrap();
        let upstream = Tensor::from_vec(&[2, 12], proj.clone()).unwrap();
        let analytic = relu_backward(&input, &upstream).unwrap();
        let r = gradcheck::check(
            &mut |xs| {
                let t = Tensor::from_vec(&[2, 12], xs.to_vec()).unwrap();
                dot(relu(&t).data(), &proj)
            },
            &mut x,
            analytic.data(),
            STEP,
        );
        assert!(r.max_rel_error < 1e-6, "relu grad: {}", r.max_rel_error);
    }
}

#[test]
fn linear_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..5 {
        let (b, n, m) = (2, 4, 3);
        let mut x = rand_vec(&mut rng, b * n);
        let mut w = rand_vec(&mut rng, m * n);
        let proj = rand_vec(&mut rng, b * m);
        let bias = rand_vec(&mut rng, m);

        let input = Tensor::from_vec(&[b, n], x.clone()).unwrap();
        let weights = Tensor::from_vec(&[m, n], w.clone()).unwrap();
        let upstream = Tensor::from_vec(&[b, m], proj.clone()).unwrap();
        let grads = linear_backward(&input, &weights, &upstream).unwrap();

        let (wc, bc) = (w.clone(), bias.clone());
        let r = gradcheck::check(
            &mut |xs| {
                let input = Tensor::from_vec(&[b, n], xs.to_vec()).unwrap();
                let weights = Tensor::from_vec(&[m, n], wc.clone()).unwrap();
                let bv = Tensor::from_vec(&[m], bc.clone()).unwrap();
                dot(linear_forward(&input, &weights, &bv).unwrap().data(), &proj)
            },
            &mut x,
            grads.input.data(),
            STEP,
        );
        assert!(r.max_rel_error < 1e-6, "linear input grad: {}", r.max_rel_error);

        let (xc, bc) = (x.clone(), bias.clone());
        let r = gradcheck::check(
            &mut |ws| {
                let input = Tensor::from_vec(&[b, n], xc.clone()).unwrap();
                let weights = Tensor::from_vec(&[m, n], ws.to_vec()).unwrap();
                let bv = Tensor::from_vec(&[m], bc.clone()).unwrap();
                dot(linear_forward(&input, &weights, &bv).unwrap().data(), &proj)
            },
            &mut w,
            grads.weights.data(),
            STEP,
        );
        assert!(r.max_rel_error < 1e-6, "linear weight grad: {}", r.max_rel_error);
    }
}

#[test]
fn batch_norm_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..5 {
        let shape = [2, 2, 2, 2, 2];
        let n: usize = shape.iter().product();
        let mut x = rand_vec(&mut rng, n);
        let gamma = rand_vec(&mut rng, 2);
        let beta = rand_vec(&mut rng, 2);
        let proj = rand_vec(&mut rng, n);

        let input = Tensor::from_vec(&shape, x.clone()).unwrap();
        let mut rm = vec![0.0; 2];
        let mut rv = vec![1.0; 2];
        let (_, ctx) = batch_norm3d_forward(
            &input, &gamma, &beta, &mut rm, &mut rv, 1e-5, 0.1, Mode::Training,
        )
        .unwrap();
        let upstream = Tensor::from_vec(&shape, proj.clone()).unwrap();
        let (dx, dgamma, _) = batch_norm3d_backward(&input, &gamma, &ctx, &upstream).unwrap();

        let gc = gamma.clone();
        let bc = beta.clone();
        let r = gradcheck::check(
            &mut |xs| {
                let t = Tensor::from_vec(&shape, xs.to_vec()).unwrap();
                let mut rm = vec![0.0; 2];
                let mut rv = vec![1.0; 2];
                let (out, _) = batch_norm3d_forward(
                    &t, &gc, &bc, &mut rm, &mut rv, 1e-5, 0.1, Mode::Training,
                )
                .unwrap();
                dot(out.data(), &proj)
            },
            &mut x,
            dx.data(),
            STEP,
        );
        assert!(r.max_rel_error < 1e-4, "bn input grad: {}", r.max_rel_error);

        let xc = x.clone();
        let bc = beta.clone();
        let mut g = gamma.clone();
        let r = gradcheck::check(
            &mut |gs| {
                let t = Tensor::from_vec(&shape, xc.clone()).unwrap();
                let mut rm = vec![0.0; 2];
                let mut rv = vec![1.0; 2];
                let (out, _) = batch_norm3d_forward(
                    &t, gs, &bc, &mut rm, &mut rv, 1e-5, 0.1, Mode::Training,
                )
                .unwrap();
                dot(out.data(), &proj)
            },
            &mut g,
            &dgamma,
            STEP,
        );
        assert!(r.max_rel_error < 1e-4, "bn gamma grad: {}", r.max_rel_error);
    }
}

#[test]
fn max_pool_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..5 {
        let shape = [1, 2, 2, 4, 4];
        let n: usize = shape.iter().product();
        // distinct values keep the argmax stable under the FD step
        let mut x: Vec<f64> = rand_vec(&mut rng, n);
        x.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let x: Vec<f64> = perm.iter().map(|&i| x[i]).collect();

        let input = Tensor::from_vec(&shape, x.clone()).unwrap();
        let (out, ctx) = max_pool3d(&input).unwrap();
        let proj = rand_vec(&mut rng, out.len());
        let upstream = Tensor::from_vec(out.shape(), proj.clone()).unwrap();
        let analytic = max_pool3d_backward(&ctx, &upstream).unwrap();

        let mut xm = x.clone();
        let r = gradcheck::check(
            &mut |xs| {
                let t = Tensor::from_vec(&shape, xs.to_vec()).unwrap();
                let (out, _) = max_pool3d(&t).unwrap();
                dot(out.data(), &proj)
            },
            &mut xm,
            analytic.data(),
            STEP,
        );
        assert!(r.max_rel_error < 1e-4, "pool grad: {}", r.max_rel_error);
    }
}

#[test]
fn channel_shuffle_gradient_is_inverse_permutation() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let x = rand_vec(&mut rng, 12 * 2);
    let proj = rand_vec(&mut rng, 12 * 2);
    let input = Tensor::from_vec(&[1, 12, 2], x.clone()).unwrap();
    let upstream = Tensor::from_vec(&[1, 12, 2], proj.clone()).unwrap();
    let analytic = channel_shuffle_backward(&upstream, 3).unwrap();
    let mut xm = x;
    let r = gradcheck::check(
        &mut |xs| {
            let t = Tensor::from_vec(&[1, 12, 2], xs.to_vec()).unwrap();
            dot(channel_shuffle(&t, 3).unwrap().data(), &proj)
        },
        &mut xm,
        analytic.data(),
        STEP,
    );
    assert!(r.max_rel_error < 1e-6, "shuffle grad: {}", r.max_rel_error);
}
