use u2s_nn::*;

fn tensor(shape: &[usize], data: Vec<f64>) -> Tensor {
    Tensor::from_vec(shape, data).unwrap()
}

#[test]
fn conv_pointwise_scaling() {
    let input = Tensor::filled(&[1, 1, 2, 2, 2], 1.0);
    let spec = ConvSpec::new(1, 1, (1, 1, 1), (0, 0, 0), 1).unwrap();
    let w = tensor(&[1, 1, 1, 1, 1], vec![3.0]);
    let b = Tensor::zeros(&[1]);
    let out = conv3d_forward(&input, &spec, &w, &b).unwrap();
    assert_eq!(out.shape(), &[1, 1, 2, 2, 2]);
    assert!(out.data().iter().all(|&v| v == 3.0));
}

#[test]
fn conv_all_ones_sums_kernel() {
    let input = Tensor::filled(&[1, 1, 3, 3, 3], 1.0);
    let spec = ConvSpec::new(1, 1, (3, 3, 3), (0, 0, 0), 1).unwrap();
    let w = Tensor::filled(&[1, 1, 3, 3, 3], 1.0);
    let b = Tensor::zeros(&[1]);
    let out = conv3d_forward(&input, &spec, &w, &b).unwrap();
    assert_eq!(out.shape(), &[1, 1, 1, 1, 1]);
    assert_eq!(out.data()[0], 27.0);
}

#[test]
fn conv_spatial_branch_shape() {
    // 32 filters of 1x3x3 with padding (0,1,1) preserve extents
    let input = Tensor::zeros(&[1, 16, 15, 25, 41]);
    let spec = ConvSpec::new(16, 32, (1, 3, 3), (0, 1, 1), 1).unwrap();
    let w = Tensor::zeros(&[32, 16, 1, 3, 3]);
    let b = Tensor::zeros(&[32]);
    let out = conv3d_forward(&input, &spec, &w, &b).unwrap();
    assert_eq!(out.shape(), &[1, 32, 15, 25, 41]);
}

#[test]
fn conv_same_padding_preserves_extents() {
    for (kernel, padding) in [
        ((1, 3, 3), (0, 1, 1)),
        ((3, 1, 1), (1, 0, 0)),
        ((3, 3, 3), (1, 1, 1)),
    ] {
        let input = Tensor::zeros(&[1, 2, 6, 5, 7]);
        let spec = ConvSpec::new(2, 3, kernel, padding, 1).unwrap();
        let out = spec.output_shape(&[1, 2, 6, 5, 7]).unwrap();
        assert_eq!(out, [1, 3, 6, 5, 7]);
    }
}

#[test]
fn conv_rejects_bad_shapes() {
    let input = Tensor::zeros(&[1, 3, 4, 4, 4]);
    let spec = ConvSpec::new(2, 2, (3, 3, 3), (1, 1, 1), 1).unwrap();
    let w = Tensor::zeros(&[2, 2, 3, 3, 3]);
    let b = Tensor::zeros(&[2]);
    assert!(conv3d_forward(&input, &spec, &w, &b).is_err());
    assert!(ConvSpec::new(3, 4, (3, 3, 3), (1, 1, 1), 2).is_err());
    assert!(ConvSpec::new(4, 4, (2, 3, 3), (1, 1, 1), 1).is_err());
}

#[test]
fn conv_backward_linear_in_upstream() {
    let mut rng = 12345u64;
    let mut next = || {
        rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (rng >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let input = tensor(&[1, 2, 3, 4, 4], (0..96).map(|_| next()).collect());
    let spec = ConvSpec::new(2, 2, (3, 3, 3), (1, 1, 1), 1).unwrap();
    let w = tensor(&[2, 2, 3, 3, 3], (0..108).map(|_| next()).collect());
    let out_shape = spec.output_shape(&[1, 2, 3, 4, 4]).unwrap();
    let n: usize = out_shape.iter().product();

    let zeros = Tensor::zeros(&out_shape);
    let g = conv3d_backward(&input, &spec, &w, &zeros).unwrap();
    assert!(g.input.data().iter().all(|&v| v == 0.0));
    assert!(g.weights.data().iter().all(|&v| v == 0.0));
    assert!(g.bias.data().iter().all(|&v| v == 0.0));

    let up = tensor(&out_shape, (0..n).map(|_| next()).collect());
    let mut up2 = up.clone();
    for v in up2.data_mut() {
        *v *= 2.0;
    }
    let g1 = conv3d_backward(&input, &spec, &w, &up).unwrap();
    let g2 = conv3d_backward(&input, &spec, &w, &up2).unwrap();
    for (a, b) in g1.input.data().iter().zip(g2.input.data()) {
        assert!((2.0 * a - b).abs() < 1e-12);
    }
    for (a, b) in g1.weights.data().iter().zip(g2.weights.data()) {
        assert!((2.0 * a - b).abs() < 1e-12);
    }
}

#[test]
fn batch_norm_standardizes_two_points() {
    // channel population {1, 3} across the batch axis
    let input = tensor(&[2, 1, 1, 1, 1], vec![1.0, 3.0]);
    let mut rm = vec![0.0];
    let mut rv = vec![1.0];
    let (out, _) = batch_norm3d_forward(
        &input, &[1.0], &[0.0], &mut rm, &mut rv, 1e-5, 0.1, Mode::Training,
    )
    .unwrap();
    assert!((out.data()[0] + 1.0).abs() < 1e-4);
    assert!((out.data()[1] - 1.0).abs() < 1e-4);

    let mut rm = vec![0.0];
    let mut rv = vec![1.0];
    let (out, _) = batch_norm3d_forward(
        &input, &[2.0], &[1.0], &mut rm, &mut rv, 1e-5, 0.1, Mode::Training,
    )
    .unwrap();
    assert!((out.data()[0] + 1.0).abs() < 1e-4);
    assert!((out.data()[1] - 3.0).abs() < 1e-4);
}

#[test]
fn batch_norm_inference_identity() {
    let input = tensor(&[1, 1, 1, 2, 2], vec![0.5, -0.25, 2.0, 0.0]);
    let mut rm = vec![0.0];
    let mut rv = vec![1.0];
    let (out, _) = batch_norm3d_forward(
        &input, &[1.0], &[0.0], &mut rm, &mut rv, 1e-12, 0.1, Mode::Inference,
    )
    .unwrap();
    for (a, b) in out.data().iter().zip(input.data()) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn batch_norm_rejects_single_element_population() {
    let input = tensor(&[1, 1, 1, 1, 1], vec![1.0]);
    let mut rm = vec![0.0];
    let mut rv = vec![1.0];
    let r = batch_norm3d_forward(
        &input, &[1.0], &[0.0], &mut rm, &mut rv, 1e-5, 0.1, Mode::Training,
    );
    assert!(r.is_err());
}

#[test]
fn batch_norm_training_statistics() {
    let mut state = 7u64;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
        (state >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
    };
    let input = tensor(&[2, 3, 2, 2, 2], (0..48).map(|_| next()).collect());
    let mut rm = vec![0.0; 3];
    let mut rv = vec![1.0; 3];
    let (out, _) = batch_norm3d_forward(
        &input,
        &[1.0; 3],
        &[0.0; 3],
        &mut rm,
        &mut rv,
        1e-12,
        0.1,
        Mode::Training,
    )
    .unwrap();
    // per channel over (B,T,H,W): |mean| < 1e-6, |var - 1| < 1e-3
    for c in 0..3 {
        let mut vals = Vec::new();
        for b in 0..2 {
            let base = (b * 3 + c) * 8;
            vals.extend_from_slice(&out.data()[base..base + 8]);
        }
        let n = vals.len() as f64;
        let mean: f64 = vals.iter().sum::<f64>() / n;
        let var: f64 = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-6, "channel {c} mean {mean}");
        assert!((var - 1.0).abs() < 1e-3, "channel {c} var {var}");
    }
}

#[test]
fn relu_examples() {
    let input = tensor(&[1, 3], vec![-1.0, 0.0, 2.0]);
    let out = relu(&input);
    assert_eq!(out.data(), &[0.0, 0.0, 2.0]);

    let positive = tensor(&[1, 3], vec![0.5, 1.0, 2.0]);
    assert_eq!(relu(&positive).data(), positive.data());

    let up = tensor(&[1, 3], vec![7.0, 7.0, 7.0]);
    let g = relu_backward(&input, &up).unwrap();
    assert_eq!(g.data(), &[0.0, 0.0, 7.0]);
}

#[test]
fn max_pool_examples() {
    let input = tensor(&[1, 1, 2, 2, 2], (1..=8).map(|v| v as f64).collect());
    let (out, _) = max_pool3d(&input).unwrap();
    assert_eq!(out.shape(), &[1, 1, 1, 1, 1]);
    assert_eq!(out.data()[0], 8.0);

    let big = Tensor::zeros(&[1, 1, 15, 25, 41]);
    let (out, _) = max_pool3d(&big).unwrap();
    assert_eq!(out.shape(), &[1, 1, 7, 12, 20]);

    let thin = Tensor::zeros(&[1, 1, 1, 4, 4]);
    assert!(max_pool3d(&thin).is_err());
}

#[test]
fn max_pool_tie_break_and_gradient_conservation() {
    let input = tensor(&[1, 1, 2, 2, 2], vec![5.0, 5.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
    let (_, ctx) = max_pool3d(&input).unwrap();
    let up = tensor(&[1, 1, 1, 1, 1], vec![3.5]);
    let g = max_pool3d_backward(&ctx, &up).unwrap();
    assert_eq!(g.data()[0], 3.5);
    assert!(g.data()[1..].iter().all(|&v| v == 0.0));

    let input = tensor(&[1, 2, 2, 4, 4], (0..64).map(|v| ((v * 37) % 13) as f64).collect());
    let (out, ctx) = max_pool3d(&input).unwrap();
    let up = Tensor::filled(out.shape(), 0.25);
    let g = max_pool3d_backward(&ctx, &up).unwrap();
    let sum_up: f64 = up.data().iter().sum();
    let sum_g: f64 = g.data().iter().sum();
    assert!((sum_up - sum_g).abs() < 1e-12);
}

#[test]
fn linear_examples() {
    // identity weights pass through
    let input = tensor(&[2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    let mut w = Tensor::zeros(&[3, 3]);
    for i in 0..3 {
        w.data_mut()[i * 3 + i] = 1.0;
    }
    let b = Tensor::zeros(&[3]);
    let out = linear_forward(&input, &w, &b).unwrap();
    assert_eq!(out.data(), input.data());

    // 5760 -> 30 shape contract
    let input = Tensor::zeros(&[2, 5760]);
    let w = Tensor::zeros(&[30, 5760]);
    let b = Tensor::zeros(&[30]);
    let out = linear_forward(&input, &w, &b).unwrap();
    assert_eq!(out.shape(), &[2, 30]);

    // zero weights: every row equals the bias
    let input = tensor(&[2, 2], vec![9.0, 8.0, 7.0, 6.0]);
    let w = Tensor::zeros(&[3, 2]);
    let b = tensor(&[3], vec![1.0, 2.0, 3.0]);
    let out = linear_forward(&input, &w, &b).unwrap();
    assert_eq!(out.data(), &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0]);
}

#[test]
fn shuffle_permutation_formula() {
    // channels labelled by index, C=6, groups=3 -> [0,2,4,1,3,5]
    let input = tensor(&[1, 6, 1], (0..6).map(|v| v as f64).collect());
    let out = channel_shuffle(&input, 3).unwrap();
    assert_eq!(out.data(), &[0.0, 2.0, 4.0, 1.0, 3.0, 5.0]);

    // C=96, groups=3: input channel 1 lands at output position 3
    let input = tensor(&[1, 96, 1], (0..96).map(|v| v as f64).collect());
    let out = channel_shuffle(&input, 3).unwrap();
    assert_eq!(out.data()[3], 1.0);

    assert!(channel_shuffle(&input, 5).is_err());
}

#[test]
fn shuffle_inverse_law() {
    for (c, g) in [(6, 2), (6, 3), (48, 2), (48, 3), (96, 2), (96, 3)] {
        let input = tensor(&[2, c, 3], (0..2 * c * 3).map(|v| v as f64).collect());
        let shuffled = channel_shuffle(&input, g).unwrap();
        let restored = channel_shuffle(&shuffled, c / g).unwrap();
        assert_eq!(restored.data(), input.data(), "C={c} g={g}");
        let back = channel_shuffle_backward(&shuffled, g).unwrap();
        assert_eq!(back.data(), input.data());
    }
}

#[test]
fn split_concat_roundtrip() {
    let input = tensor(&[1, 48, 2], (0..96).map(|v| v as f64).collect());
    let parts = channel_split(&input, &[16, 16, 16]).unwrap();
    assert_eq!(parts.len(), 3);
    for p in &parts {
        assert_eq!(p.shape()[1], 16);
    }
    let back = channel_concat(&parts).unwrap();
    assert_eq!(back.data(), input.data());

    assert!(channel_split(&input, &[48, 0, 0]).is_err());
    assert!(channel_split(&input, &[20, 20]).is_err());
}
