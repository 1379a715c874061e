//! Batch assembly, the training loop, and evaluation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use u2s_data::{ClipRecord, Dataset, CLIP_LEN, FRAMES, HEIGHT, WIDTH};
use u2s_model::{TargetNorm, U2fModel};
use u2s_nn::{Mode, Tensor};

use crate::adam::AdamState;
use crate::loss::mae_joint;
use crate::metrics::r_squared;
use crate::{Result, TrainError};

#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 100, batch_size: 10, learning_rate: 0.001, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mae: f64,
    pub dev_mae: f64,
    pub dev_mean_r2: f64,
}

/// One evaluated sample, trajectories in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePrediction {
    pub pred_f1: Vec<f64>,
    pub pred_f2: Vec<f64>,
    pub target_f1: Vec<f64>,
    pub target_f2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// MAE in normalized units.
    pub mae_f1: f64,
    pub mae_f2: f64,
    pub mae_joint: f64,
    /// Mean R^2 over Hz trajectories.
    pub r2_f1: f64,
    pub r2_f2: f64,
    /// Per-sample R^2 of the 60-point concatenated trajectory, averaged.
    pub r2_joint: f64,
    pub samples: Vec<SamplePrediction>,
}

/// Min-max label bounds over the given records only (the training
/// split), so dev/test labels never leak into normalization.
pub fn fit_normalization(dataset: &Dataset, indices: &[usize]) -> Result<TargetNorm> {
    if indices.is_empty() {
        return Err(TrainError::InvalidArgument("no records to fit normalization".into()));
    }
    let (mut f1_min, mut f1_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut f2_min, mut f2_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &i in indices {
        let rec = dataset
            .records
            .get(i)
            .ok_or_else(|| TrainError::InvalidArgument(format!("index {i} out of range")))?;
        for &v in &rec.labels[..FRAMES] {
            f1_min = f1_min.min(v as f64);
            f1_max = f1_max.max(v as f64);
        }
        for &v in &rec.labels[FRAMES..] {
            f2_min = f2_min.min(v as f64);
            f2_max = f2_max.max(v as f64);
        }
    }
    if !(f1_min < f1_max && f2_min < f2_max) {
        return Err(TrainError::InvalidArgument("degenerate label range in training split".into()));
    }
    let norm = TargetNorm { f1_min, f1_max, f2_min, f2_max };
    norm.validate()?;
    Ok(norm)
}

/// Stacks records into the (B, 1, 30, 50, 82) input tensor and the two
/// normalized (B, 30) target tensors.
pub fn assemble_batch(
    dataset: &Dataset,
    indices: &[usize],
    norm: &TargetNorm,
) -> Result<(Tensor, Tensor, Tensor)> {
    let b = indices.len();
    let mut pixels = Vec::with_capacity(b * CLIP_LEN);
    let mut t1 = Vec::with_capacity(b * FRAMES);
    let mut t2 = Vec::with_capacity(b * FRAMES);
    for &i in indices {
        let rec: &ClipRecord = dataset
            .records
            .get(i)
            .ok_or_else(|| TrainError::InvalidArgument(format!("index {i} out of range")))?;
        pixels.extend(rec.pixels.iter().map(|&v| v as f64));
        t1.extend(rec.labels[..FRAMES].iter().map(|&v| norm.normalize_f1(v as f64)));
        t2.extend(rec.labels[FRAMES..].iter().map(|&v| norm.normalize_f2(v as f64)));
    }
    Ok((
        Tensor::from_vec(&[b, 1, FRAMES, HEIGHT, WIDTH], pixels)?,
        Tensor::from_vec(&[b, FRAMES], t1)?,
        Tensor::from_vec(&[b, FRAMES], t2)?,
    ))
}

/// Trains in place: fits normalization on the train split, then runs
/// seeded shuffled mini-batch epochs with Adam, evaluating on the dev
/// split after each epoch. Deterministic given the config seed.
pub fn train_loop(
    model: &mut U2fModel,
    dataset: &Dataset,
    train_idx: &[usize],
    dev_idx: &[usize],
    cfg: &TrainConfig,
) -> Result<Vec<EpochRecord>> {
    if dataset.is_empty() || train_idx.is_empty() {
        return Err(TrainError::InvalidArgument("empty dataset or training split".into()));
    }
    if cfg.batch_size == 0 || cfg.batch_size > train_idx.len() {
        return Err(TrainError::InvalidArgument(format!(
            "batch size {} outside 1..={} training samples",
            cfg.batch_size,
            train_idx.len()
        )));
    }
    if cfg.epochs == 0 {
        return Err(TrainError::InvalidArgument("epoch count must be positive".into()));
    }

    model.norm = fit_normalization(dataset, train_idx)?;
    let mut adam = AdamState::new(cfg.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = train_idx.to_vec();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_acc = 0.0;
        let mut seen = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let (input, t1, t2) = assemble_batch(dataset, chunk, &model.norm)?;
            let (p1, p2, tape) = model.forward(&input, Mode::Training)?;
            let (loss, g1, g2) = mae_joint(&p1, &t1, &p2, &t2)?;
            let art = model.backward(&tape, &g1, &g2)?;
            adam.step(&mut model.params, &art.param_grads)?;
            loss_acc += loss * chunk.len() as f64;
            seen += chunk.len();
        }
        let train_mae = loss_acc / seen as f64;
        model.epoch += 1;

        let (dev_mae, dev_mean_r2) = if dev_idx.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            let report = evaluate(model, dataset, dev_idx)?;
            (report.mae_joint, report.r2_joint)
        };
        if !train_mae.is_finite() {
            return Err(TrainError::NonFinite(format!("train loss at epoch {epoch}")));
        }
        history.push(EpochRecord { epoch, train_mae, dev_mae, dev_mean_r2 });
    }
    Ok(history)
}

/// Inference-mode metrics over the given indices, batched.
pub fn evaluate(model: &mut U2fModel, dataset: &Dataset, indices: &[usize]) -> Result<EvalReport> {
    if indices.is_empty() {
        return Err(TrainError::InvalidArgument("no samples to evaluate".into()));
    }
    let norm = model.norm;
    let mut samples = Vec::with_capacity(indices.len());
    let (mut abs1, mut abs2) = (0.0f64, 0.0f64);
    let (mut r1_acc, mut r2_acc, mut rj_acc) = (0.0f64, 0.0f64, 0.0f64);

    for chunk in indices.chunks(32) {
        let (input, t1, t2) = assemble_batch(dataset, chunk, &norm)?;
        let (p1, p2, _tape) = model.forward(&input, Mode::Inference)?;
        for (row, &idx) in chunk.iter().enumerate() {
            let rec = &dataset.records[idx];
            let pn1 = &p1.data()[row * FRAMES..(row + 1) * FRAMES];
            let pn2 = &p2.data()[row * FRAMES..(row + 1) * FRAMES];
            let tn1 = &t1.data()[row * FRAMES..(row + 1) * FRAMES];
            let tn2 = &t2.data()[row * FRAMES..(row + 1) * FRAMES];
            for i in 0..FRAMES {
                abs1 += (pn1[i] - tn1[i]).abs();
                abs2 += (pn2[i] - tn2[i]).abs();
            }
            let pred_f1: Vec<f64> = pn1.iter().map(|&v| norm.denormalize_f1(v)).collect();
            let pred_f2: Vec<f64> = pn2.iter().map(|&v| norm.denormalize_f2(v)).collect();
            let target_f1: Vec<f64> = rec.labels[..FRAMES].iter().map(|&v| v as f64).collect();
            let target_f2: Vec<f64> = rec.labels[FRAMES..].iter().map(|&v| v as f64).collect();

            r1_acc += r_squared(&pred_f1, &target_f1)?;
            r2_acc += r_squared(&pred_f2, &target_f2)?;
            let pred_joint: Vec<f64> = pred_f1.iter().chain(&pred_f2).cloned().collect();
            let target_joint: Vec<f64> = target_f1.iter().chain(&target_f2).cloned().collect();
            rj_acc += r_squared(&pred_joint, &target_joint)?;

            samples.push(SamplePrediction { pred_f1, pred_f2, target_f1, target_f2 });
        }
    }
    let n = (indices.len() * FRAMES) as f64;
    let mae_f1 = abs1 / n;
    let mae_f2 = abs2 / n;
    Ok(EvalReport {
        mae_f1,
        mae_f2,
        mae_joint: (mae_f1 + mae_f2) / 2.0,
        r2_f1: r1_acc / indices.len() as f64,
        r2_f2: r2_acc / indices.len() as f64,
        r2_joint: rj_acc / indices.len() as f64,
        samples,
    })
}

/// History as comma-separated text: epoch, trainMAE, devMAE, devMeanR2.
pub fn history_to_csv(history: &[EpochRecord]) -> String {
    let mut s = String::from("epoch,trainMAE,devMAE,devMeanR2\n");
    for rec in history {
        s.push_str(&format!(
            "{},{},{},{}\n",
            rec.epoch, rec.train_mae, rec.dev_mae, rec.dev_mean_r2
        ));
    }
    s
}
