use crate::{NnError, Result, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Training,
    Inference,
}

/// Per-channel statistics the backward pass needs. In training mode
/// these are the batch statistics; in inference mode the running ones.
#[derive(Debug, Clone)]
pub struct BnContext {
    pub mean: Vec<f64>,
    pub inv_std: Vec<f64>,
    pub training: bool,
}

/// Batch norm over (B, T, H, W) per channel. Training mode normalizes
/// with batch statistics (population variance) and updates the running
/// buffers as `run = (1 - momentum) * run + momentum * batch`; inference
/// mode uses the running buffers.
#[allow(clippy::too_many_arguments)]
pub fn batch_norm3d_forward(
    input: &Tensor,
    gamma: &[f64],
    beta: &[f64],
    running_mean: &mut [f64],
    running_var: &mut [f64],
    eps: f64,
    momentum: f64,
    mode: Mode,
) -> Result<(Tensor, BnContext)> {
    let [b, c, t, h, w] = input.dims5()?;
    if gamma.len() != c || beta.len() != c || running_mean.len() != c || running_var.len() != c {
        return Err(NnError::ShapeMismatch(format!(
            "gamma/beta/running buffers must have length {c}"
        )));
    }
    if eps <= 0.0 {
        return Err(NnError::InvalidArgument("eps must be positive".into()));
    }
    let n = b * t * h * w;
    let plane = t * h * w;

    let (mean, var) = match mode {
        Mode::Training => {
            if n < 2 {
                return Err(NnError::InvalidArgument(
                    "batch norm in training mode needs at least 2 elements per channel".into(),
                ));
            }
            let mut mean = vec![0.0; c];
            let mut var = vec![0.0; c];
            for ci in 0..c {
                let mut sum = 0.0;
                let mut sumsq = 0.0;
                for bi in 0..b {
                    let base = (bi * c + ci) * plane;
                    for &x in &input.data()[base..base + plane] {
                        sum += x;
                        sumsq += x * x;
                    }
                }
                let m = sum / n as f64;
                mean[ci] = m;
                var[ci] = (sumsq / n as f64 - m * m).max(0.0);
                running_mean[ci] = (1.0 - momentum) * running_mean[ci] + momentum * m;
                running_var[ci] = (1.0 - momentum) * running_var[ci] + momentum * var[ci];
            }
            (mean, var)
        }
        Mode::Inference => (running_mean.to_vec(), running_var.to_vec()),
    };

    let inv_std: Vec<f64> = var.iter().map(|&v| 1.0 / (v + eps).sqrt()).collect();
    let mut out = Tensor::zeros(input.shape());
    for bi in 0..b {
        for ci in 0..c {
            let base = (bi * c + ci) * plane;
            let scale = inv_std[ci] * gamma[ci];
            let shift = beta[ci] - mean[ci] * scale;
            let src = &input.data()[base..base + plane];
            let dst = &mut out.data_mut()[base..base + plane];
            for (d, &x) in dst.iter_mut().zip(src) {
                *d = x * scale + shift;
            }
        }
    }
    Ok((out, BnContext { mean, inv_std, training: matches!(mode, Mode::Training) }))
}

/// Gradients with respect to input, gamma and beta. `input` must be the
/// forward input and `ctx` the context that forward returned.
pub fn batch_norm3d_backward(
    input: &Tensor,
    gamma: &[f64],
    ctx: &BnContext,
    upstream: &Tensor,
) -> Result<(Tensor, Vec<f64>, Vec<f64>)> {
    let [b, c, t, h, w] = input.dims5()?;
    if upstream.shape() != input.shape() {
        return Err(NnError::ShapeMismatch(
            "upstream gradient must match input shape".into(),
        ));
    }
    let n = (b * t * h * w) as f64;
    let plane = t * h * w;
    let mut dinput = Tensor::zeros(input.shape());
    let mut dgamma = vec![0.0; c];
    let mut dbeta = vec![0.0; c];

    for ci in 0..c {
        let (m, is, g) = (ctx.mean[ci], ctx.inv_std[ci], gamma[ci]);
        let mut sum_dy = 0.0;
        let mut sum_dy_x = 0.0;
        for bi in 0..b {
            let base = (bi * c + ci) * plane;
            let x = &input.data()[base..base + plane];
            let dy = &upstream.data()[base..base + plane];
            for (xi, dyi) in x.iter().zip(dy) {
                sum_dy += dyi;
                sum_dy_x += dyi * xi;
            }
        }
        let sum_dy_xhat = (sum_dy_x - m * sum_dy) * is;
        dgamma[ci] = sum_dy_xhat;
        dbeta[ci] = sum_dy;
        // training: dx = g*is*(dy - sum_dy/n - xhat*sum_dy_xhat/n), an
        // affine map dy*a + x*cx + c0 per channel
        let a = g * is;
        let (cx, c0) = if ctx.training {
            let cx = -a * is * sum_dy_xhat / n;
            (cx, -a * sum_dy / n - cx * m)
        } else {
            (0.0, 0.0)
        };
        for bi in 0..b {
            let base = (bi * c + ci) * plane;
            let x = &input.data()[base..base + plane];
            let dy = &upstream.data()[base..base + plane];
            let dx = &mut dinput.data_mut()[base..base + plane];
            if ctx.training {
                for ((dxi, &xi), &dyi) in dx.iter_mut().zip(x).zip(dy) {
                    *dxi = a * dyi + cx * xi + c0;
                }
            } else {
                // inference: per-channel affine map
                for (dxi, &dyi) in dx.iter_mut().zip(dy) {
                    *dxi = a * dyi;
                }
            }
        }
    }
    Ok((dinput, dgamma, dbeta))
}
