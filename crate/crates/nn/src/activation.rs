use crate::{NnError, Result, Tensor};

pub fn relu(input: &Tensor) -> Tensor {
    let data = input
        .data()
        .iter()
        .map(|&v| if v < 0.0 { 0.0 } else { v })
        .collect();
    Tensor::from_vec(input.shape(), data).expect("same shape as input")
}

/// Passes upstream gradient where the forward input was strictly
/// positive; zero elsewhere (subgradient 0 at the kink).
pub fn relu_backward(input: &Tensor, upstream: &Tensor) -> Result<Tensor> {
    if input.shape() != upstream.shape() {
        return Err(NnError::ShapeMismatch(
            "relu backward: input and upstream shapes differ".into(),
        ));
    }
    let data = input
        .data()
        .iter()
        .zip(upstream.data())
        .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
        .collect();
    Ok(Tensor::from_vec(input.shape(), data).expect("same shape as input"))
}
