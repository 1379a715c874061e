use u2s_data::generate_dataset_in_memory;
use u2s_model::{save_checkpoint, U2fConfig, U2fModel};
use u2s_nn::{Mode, Tensor};
use u2s_train::*;

/// Small but full-input-size network that trains in seconds.
fn tiny_config() -> U2fConfig {
    U2fConfig {
        layer1_filters: 6,
        hybrid_filters_per_branch: 2,
        grouped_conv_filters: 8,
        grouped_conv_groups: 2,
        ..U2fConfig::default()
    }
}

#[test]
fn train_loop_reduces_loss_and_logs_history() {
    let dataset = generate_dataset_in_memory(64, 5).unwrap();
    let spec = SplitSpec::new(5);
    let (train_idx, dev_idx, _) = split_dataset(dataset.len(), &spec).unwrap();

    let mut model = U2fModel::build(tiny_config(), 7).unwrap();
    let cfg = TrainConfig { epochs: 5, batch_size: 10, learning_rate: 0.001, seed: 3 };
    let history = train_loop(&mut model, &dataset, &train_idx, &dev_idx, &cfg).unwrap();

    assert_eq!(history.len(), 5);
    for (i, rec) in history.iter().enumerate() {
        assert_eq!(rec.epoch, i + 1);
        assert!(rec.train_mae.is_finite() && rec.dev_mae.is_finite() && rec.dev_mean_r2.is_finite());
    }
    assert!(
        history[4].train_mae < history[0].train_mae,
        "loss {} -> {}",
        history[0].train_mae,
        history[4].train_mae
    );
    assert_eq!(model.epoch, 5);
}

#[test]
fn train_loop_normalization_uses_train_split_only() {
    use u2s_data::{generate_synthetic_clip, ClipRecord, Dataset, SyntheticParams};
    // clips 0..10 span a narrow label range; clip 10 holds the extremes
    let mut records = Vec::new();
    for i in 0..10 {
        let v = 0.3 + 0.02 * i as f64;
        let params = SyntheticParams::new(vec![v; 30], vec![v; 30], 0.1, i).unwrap();
        let (clip, labels) = generate_synthetic_clip(&params).unwrap();
        records.push(ClipRecord::from_clip(&clip, &labels).unwrap());
    }
    let params = SyntheticParams::new(vec![1.0; 30], vec![1.0; 30], 0.1, 99).unwrap();
    let (clip, labels) = generate_synthetic_clip(&params).unwrap();
    records.push(ClipRecord::from_clip(&clip, &labels).unwrap());
    let dataset = Dataset { records };

    let train_idx: Vec<usize> = (0..10).collect();
    let mut model = U2fModel::build(tiny_config(), 1).unwrap();
    let cfg = TrainConfig { epochs: 1, batch_size: 5, learning_rate: 0.001, seed: 1 };
    train_loop(&mut model, &dataset, &train_idx, &[], &cfg).unwrap();
    let expected = fit_normalization(&dataset, &train_idx).unwrap();
    assert_eq!(model.norm, expected);

    // a fit that also saw the held-out clip 10 would have wider bounds
    let leaked = fit_normalization(&dataset, &(0..11).collect::<Vec<_>>()).unwrap();
    assert_ne!(model.norm, leaked);
}

#[test]
fn train_loop_is_bitwise_deterministic() {
    let dataset = generate_dataset_in_memory(24, 2).unwrap();
    let (train_idx, dev_idx, _) = split_dataset(dataset.len(), &SplitSpec::new(2)).unwrap();
    let cfg = TrainConfig { epochs: 2, batch_size: 6, learning_rate: 0.001, seed: 9 };

    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for run in 0..2 {
        let mut model = U2fModel::build(tiny_config(), 11).unwrap();
        let history = train_loop(&mut model, &dataset, &train_idx, &dev_idx, &cfg).unwrap();
        let path = dir.path().join(format!("run{run}.ckpt"));
        save_checkpoint(&model, &path).unwrap();
        files.push((std::fs::read(&path).unwrap(), history));
    }
    assert_eq!(files[0].0, files[1].0, "checkpoints differ");
    assert_eq!(files[0].1, files[1].1, "histories differ");
}

#[test]
fn train_loop_rejects_degenerate_setups() {
    let dataset = generate_dataset_in_memory(12, 1).unwrap();
    let idx: Vec<usize> = (0..12).collect();
    let mut model = U2fModel::build(tiny_config(), 0).unwrap();

    let too_big = TrainConfig { epochs: 1, batch_size: 13, ..TrainConfig::default() };
    assert!(train_loop(&mut model, &dataset, &idx, &[], &too_big).is_err());

    let cfg = TrainConfig { epochs: 1, batch_size: 4, ..TrainConfig::default() };
    assert!(train_loop(&mut model, &dataset, &[], &[], &cfg).is_err());
}

#[test]
fn history_csv_format() {
    let history = vec![
        EpochRecord { epoch: 1, train_mae: 0.5, dev_mae: 0.25, dev_mean_r2: 0.125 },
        EpochRecord { epoch: 2, train_mae: 0.4, dev_mae: 0.2, dev_mean_r2: 0.5 },
    ];
    let csv = history_to_csv(&history);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "epoch,trainMAE,devMAE,devMeanR2");
    assert_eq!(lines[1], "1,0.5,0.25,0.125");
    assert_eq!(lines[2], "2,0.4,0.2,0.5");
}

#[test]
fn evaluate_perfect_predictor_bounds() {
    // the report invariants hold even for an untrained model
    let dataset = generate_dataset_in_memory(16, 3).unwrap();
    let idx: Vec<usize> = (0..16).collect();
    let mut model = U2fModel::build(tiny_config(), 5).unwrap();
    model.norm = fit_normalization(&dataset, &idx).unwrap();
    let report = evaluate(&mut model, &dataset, &idx).unwrap();
    assert!(report.mae_f1 >= 0.0 && report.mae_f2 >= 0.0 && report.mae_joint >= 0.0);
    assert!(report.r2_joint <= 1.0 && report.r2_f1 <= 1.0 && report.r2_f2 <= 1.0);
    assert_eq!(report.samples.len(), 16);
    assert!((report.mae_joint - (report.mae_f1 + report.mae_f2) / 2.0).abs() < 1e-12);
}

#[test]
fn saliency_shapes_bounds_and_modes() {
    let dataset = generate_dataset_in_memory(10, 4).unwrap();
    let mut model = U2fModel::build(tiny_config(), 6).unwrap();
    let clip: Vec<f64> = dataset.records[0].pixels.iter().map(|&v| v as f64).collect();

    for mode in [SaliencyMode::Input, SaliencyMode::LastConv] {
        let maps = compute_saliency(&mut model, &clip, mode).unwrap();
        assert_eq!(maps.len(), 30);
        for map in &maps {
            assert_eq!(map.len(), 50 * 82);
            assert!(map.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    let mut broken = U2fModel::build(tiny_config(), 6).unwrap();
    broken.params.get_mut("conv1.weight").unwrap().data_mut()[0] = f64::NAN;
    assert!(compute_saliency(&mut broken, &clip, SaliencyMode::Input).is_err());
}

#[test]
fn input_saliency_is_scaled_gradient_magnitude() {
    // the map must equal the per-frame min-max scaling of
    // |d(sum of heads)/d pixel|; the gradient itself is cross-checked
    // against finite differences at a few pixels
    let dataset = generate_dataset_in_memory(4, 12).unwrap();
    let mut model = U2fModel::build(tiny_config(), 2).unwrap();
    let clip: Vec<f64> = dataset.records[0].pixels.iter().map(|&v| v as f64).collect();

    let input = Tensor::from_vec(&[1, 1, 30, 50, 82], clip.clone()).unwrap();
    let (p1, p2, tape) = model.forward(&input, Mode::Inference).unwrap();
    let ones1 = Tensor::filled(p1.shape(), 1.0);
    let ones2 = Tensor::filled(p2.shape(), 1.0);
    let art = model.backward(&tape, &ones1, &ones2).unwrap();

    let sum_heads = |m: &mut U2fModel, x: &[f64]| -> f64 {
        let t = Tensor::from_vec(&[1, 1, 30, 50, 82], x.to_vec()).unwrap();
        let (a, b, _) = m.forward(&t, Mode::Inference).unwrap();
        a.data().iter().sum::<f64>() + b.data().iter().sum::<f64>()
    };
    let eps = 1e-5;
    for &i in &[123usize, 40411, 90000] {
        let mut plus = clip.clone();
        plus[i] += eps;
        let mut minus = clip.clone();
        minus[i] -= eps;
        let numeric = (sum_heads(&mut model, &plus) - sum_heads(&mut model, &minus)) / (2.0 * eps);
        let analytic = art.input_grad.data()[i];
        let scale = numeric.abs().max(analytic.abs()).max(1e-10);
        assert!((numeric - analytic).abs() / scale < 1e-4, "pixel {i}: {analytic} vs {numeric}");
    }

    let maps = compute_saliency(&mut model, &clip, SaliencyMode::Input).unwrap();
    for t in 0..30 {
        let frame = &art.input_grad.data()[t * 50 * 82..(t + 1) * 50 * 82];
        let abs: Vec<f64> = frame.iter().map(|v| v.abs()).collect();
        let min = abs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = abs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for (got, raw) in maps[t].iter().zip(&abs) {
            let expect = if max > min { (raw - min) / (max - min) } else { 0.0 };
            assert!((got - expect).abs() < 1e-12);
        }
    }
}
