//! Gradient saliency maps: where the heads look in the input video.

use u2s_data::{CLIP_LEN, FRAMES, HEIGHT, WIDTH};
use u2s_model::U2fModel;
use u2s_nn::{Mode, Tensor};

use crate::{Result, TrainError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaliencyMode {
    /// |d(sum of both heads)/d pixel| at the input.
    Input,
    /// Channel-mean |gradient| at the last convolutional activation,
    /// nearest-neighbor upsampled to the input frame size.
    LastConv,
}

/// 30 maps of 50x82, each min-max scaled to [0, 1].
pub fn compute_saliency(model: &mut U2fModel, clip: &[f64], mode: SaliencyMode) -> Result<Vec<Vec<f64>>> {
    if clip.len() != CLIP_LEN {
        return Err(TrainError::InvalidArgument(format!(
            "clip has {} pixels, expected {CLIP_LEN}",
            clip.len()
        )));
    }
    for (name, p) in &model.params {
        if !p.is_finite() {
            return Err(TrainError::NonFinite(format!("parameter {name}")));
        }
    }

    let input = Tensor::from_vec(&[1, 1, FRAMES, HEIGHT, WIDTH], clip.to_vec())?;
    let (p1, p2, tape) = model.forward(&input, Mode::Inference)?;
    let ones1 = Tensor::filled(p1.shape(), 1.0);
    let ones2 = Tensor::filled(p2.shape(), 1.0);
    let art = model.backward(&tape, &ones1, &ones2)?;

    let raw: Vec<Vec<f64>> = match mode {
        SaliencyMode::Input => {
            let g = art.input_grad.data();
            (0..FRAMES)
                .map(|t| {
                    g[t * HEIGHT * WIDTH..(t + 1) * HEIGHT * WIDTH]
                        .iter()
                        .map(|v| v.abs())
                        .collect()
                })
                .collect()
        }
        SaliencyMode::LastConv => {
            let dims = art.lastconv_grad.dims5()?;
            let (c, st, sh, sw) = (dims[1], dims[2], dims[3], dims[4]);
            let g = art.lastconv_grad.data();
            // channel-mean |grad| per (t', h', w') cell
            let cell = |t: usize, h: usize, w: usize| -> f64 {
                (0..c)
                    .map(|ch| g[((ch * st + t) * sh + h) * sw + w].abs())
                    .sum::<f64>()
                    / c as f64
            };
            (0..FRAMES)
                .map(|t| {
                    let t_src = t * st / FRAMES;
                    (0..HEIGHT * WIDTH)
                        .map(|i| {
                            let (h, w) = (i / WIDTH, i % WIDTH);
                            cell(t_src, h * sh / HEIGHT, w * sw / WIDTH)
                        })
                        .collect()
                })
                .collect()
        }
    };

    Ok(raw
        .into_iter()
        .map(|mut frame| {
            let min = frame.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = frame.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let range = max - min;
            for v in &mut frame {
                *v = if range > 0.0 { (*v - min) / range } else { 0.0 };
            }
            frame
        })
        .collect())
}
