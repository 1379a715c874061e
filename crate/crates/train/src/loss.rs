use u2s_nn::Tensor;

use crate::{Result, TrainError};

/// Mean absolute error over all elements, with its subgradient (0 at
/// exact ties).
pub fn mae_loss(pred: &Tensor, target: &Tensor) -> Result<(f64, Tensor)> {
    if pred.shape() != target.shape() {
        return Err(TrainError::InvalidArgument(format!(
            "pred shaped {:?}, target {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    let n = pred.len();
    if n == 0 {
        return Err(TrainError::InvalidArgument("empty tensors".into()));
    }
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(n);
    for (&p, &t) in pred.data().iter().zip(target.data()) {
        let d = p - t;
        loss += d.abs();
        grad.push(if d > 0.0 {
            1.0 / n as f64
        } else if d < 0.0 {
            -1.0 / n as f64
        } else {
            0.0
        });
    }
    Ok((loss / n as f64, Tensor::from_vec(pred.shape(), grad)?))
}

/// Joint loss of the two heads: the mean of their MAEs. Gradients are
/// scaled accordingly (half weight per head).
pub fn mae_joint(
    pred1: &Tensor,
    target1: &Tensor,
    pred2: &Tensor,
    target2: &Tensor,
) -> Result<(f64, Tensor, Tensor)> {
    let (l1, mut g1) = mae_loss(pred1, target1)?;
    let (l2, mut g2) = mae_loss(pred2, target2)?;
    for v in g1.data_mut() {
        *v *= 0.5;
    }
    for v in g2.data_mut() {
        *v *= 0.5;
    }
    Ok(((l1 + l2) / 2.0, g1, g2))
}
