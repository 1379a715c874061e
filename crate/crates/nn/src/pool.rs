use crate::{NnError, Result, Tensor};

/// Flat input index of the winner for each output element.
pub struct PoolContext {
    pub input_shape: Vec<usize>,
    pub argmax: Vec<usize>,
}

/// 2x2x2 max pooling with stride 2; output extents are floored halves.
/// Ties go to the first element in scan order.
pub fn max_pool3d(input: &Tensor) -> Result<(Tensor, PoolContext)> {
    let [b, c, t, h, w] = input.dims5()?;
    if t < 2 || h < 2 || w < 2 {
        return Err(NnError::InvalidArgument(format!(
            "every pooled axis extent must be >= 2, got ({t},{h},{w})"
        )));
    }
    let (to, ho, wo) = (t / 2, h / 2, w / 2);
    let out_shape = [b, c, to, ho, wo];
    let mut out = Tensor::zeros(&out_shape);
    let mut argmax = vec![0usize; out.len()];
    let frame = h * w;
    let mut oi = 0usize;
    for bi in 0..b {
        for ci in 0..c {
            let base = (bi * c + ci) * t * frame;
            for ti in 0..to {
                for hi in 0..ho {
                    for wi in 0..wo {
                        let mut best = f64::NEG_INFINITY;
                        let mut best_idx = 0usize;
                        for dt in 0..2 {
                            for dh in 0..2 {
                                for dw in 0..2 {
                                    let idx = base
                                        + (2 * ti + dt) * frame
                                        + (2 * hi + dh) * w
                                        + (2 * wi + dw);
                                    let v = input.data()[idx];
                                    if v > best {
                                        best = v;
                                        best_idx = idx;
                                    }
                                }
                            }
                        }
                        out.data_mut()[oi] = best;
                        argmax[oi] = best_idx;
                        oi += 1;
                    }
                }
            }
        }
    }
    Ok((out, PoolContext { input_shape: input.shape().to_vec(), argmax }))
}

/// Routes each upstream value to the argmax position of its window.
pub fn max_pool3d_backward(ctx: &PoolContext, upstream: &Tensor) -> Result<Tensor> {
    if upstream.len() != ctx.argmax.len() {
        return Err(NnError::ShapeMismatch(format!(
            "upstream has {} elements, pool context expects {}",
            upstream.len(),
            ctx.argmax.len()
        )));
    }
    let mut dinput = Tensor::zeros(&ctx.input_shape);
    for (&idx, &g) in ctx.argmax.iter().zip(upstream.data()) {
        dinput.data_mut()[idx] += g;
    }
    Ok(dinput)
}
