use crate::{NnError, Result, Tensor};

pub struct LinearGrads {
    pub input: Tensor,
    pub weights: Tensor,
    pub bias: Tensor,
}

fn check(input: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<(usize, usize, usize)> {
    let [b, n] = input.dims2()?;
    let [m, wn] = weights.dims2()?;
    if wn != n {
        return Err(NnError::ShapeMismatch(format!(
            "input width {n} does not match weight columns {wn}"
        )));
    }
    if bias.shape() != [m] {
        return Err(NnError::ShapeMismatch(format!(
            "bias shaped {:?}, expected [{m}]",
            bias.shape()
        )));
    }
    Ok((b, n, m))
}

/// y = x W^T + b with x: (B, n), W: (m, n), b: (m).
pub fn linear_forward(input: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (b, n, m) = check(input, weights, bias)?;
    let mut out = Tensor::zeros(&[b, m]);
    unsafe {
        matrixmultiply::dgemm(
            b,
            n,
            m,
            1.0,
            input.data().as_ptr(),
            n as isize,
            1,
            weights.data().as_ptr(),
            1,
            n as isize,
            0.0,
            out.data_mut().as_mut_ptr(),
            m as isize,
            1,
        );
    }
    for bi in 0..b {
        for mi in 0..m {
            out.data_mut()[bi * m + mi] += bias.data()[mi];
        }
    }
    Ok(out)
}

pub fn linear_backward(
    input: &Tensor,
    weights: &Tensor,
    upstream: &Tensor,
) -> Result<LinearGrads> {
    let [b, n] = input.dims2()?;
    let [m, _] = weights.dims2()?;
    if upstream.shape() != [b, m] {
        return Err(NnError::ShapeMismatch(format!(
            "upstream shaped {:?}, expected [{b}, {m}]",
            upstream.shape()
        )));
    }
    let mut dinput = Tensor::zeros(&[b, n]);
    let mut dweights = Tensor::zeros(&[m, n]);
    let mut dbias = Tensor::zeros(&[m]);
    unsafe {
        // dX = dY (B x m) * W (m x n)
        matrixmultiply::dgemm(
            b,
            m,
            n,
            1.0,
            upstream.data().as_ptr(),
            m as isize,
            1,
            weights.data().as_ptr(),
            n as isize,
            1,
            0.0,
            dinput.data_mut().as_mut_ptr(),
            n as isize,
            1,
        );
        // dW = dY^T (m x B) * X (B x n)
        matrixmultiply::dgemm(
            m,
            b,
            n,
            1.0,
            upstream.data().as_ptr(),
            1,
            m as isize,
            input.data().as_ptr(),
            n as isize,
            1,
            0.0,
            dweights.data_mut().as_mut_ptr(),
            n as isize,
            1,
        );
    }
    for bi in 0..b {
        for mi in 0..m {
            dbias.data_mut()[mi] += upstream.data()[bi * m + mi];
        }
    }
    Ok(LinearGrads { input: dinput, weights: dweights, bias: dbias })
}
