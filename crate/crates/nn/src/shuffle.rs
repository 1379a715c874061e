use crate::{NnError, Result, Tensor};

fn channel_layout(input: &Tensor) -> Result<(usize, usize, usize)> {
    let shape = input.shape();
    if shape.len() < 2 {
        return Err(NnError::ShapeMismatch(
            "channel ops need at least (B, C) axes".into(),
        ));
    }
    let b = shape[0];
    let c = shape[1];
    let rest: usize = shape[2..].iter().product();
    Ok((b, c, rest.max(1)))
}

/// Interleaves channels across `groups`: input channel `g*N + c`
/// (N = C/groups) moves to output index `c*groups + g`.
pub fn channel_shuffle(input: &Tensor, groups: usize) -> Result<Tensor> {
    let (b, c, rest) = channel_layout(input)?;
    if groups == 0 || c % groups != 0 {
        return Err(NnError::InvalidArgument(format!(
            "groups {groups} must divide channel count {c}"
        )));
    }
    let n = c / groups;
    let mut out = Tensor::zeros(input.shape());
    for bi in 0..b {
        for oc in 0..c {
            let g = oc % groups;
            let src_c = g * n + oc / groups;
            let src = (bi * c + src_c) * rest;
            let dst = (bi * c + oc) * rest;
            out.data_mut()[dst..dst + rest].copy_from_slice(&input.data()[src..src + rest]);
        }
    }
    Ok(out)
}

/// Inverse permutation: shuffling with C/groups undoes a shuffle with
/// `groups`.
pub fn channel_shuffle_backward(upstream: &Tensor, groups: usize) -> Result<Tensor> {
    let (_, c, _) = channel_layout(upstream)?;
    if groups == 0 || c % groups != 0 {
        return Err(NnError::InvalidArgument(format!(
            "groups {groups} must divide channel count {c}"
        )));
    }
    channel_shuffle(upstream, c / groups)
}

/// Contiguous channel-range split; zero-size groups are rejected.
pub fn channel_split(input: &Tensor, sizes: &[usize]) -> Result<Vec<Tensor>> {
    let (b, c, rest) = channel_layout(input)?;
    if sizes.iter().any(|&s| s == 0) {
        return Err(NnError::InvalidArgument("zero-size channel group".into()));
    }
    if sizes.iter().sum::<usize>() != c {
        return Err(NnError::ShapeMismatch(format!(
            "split sizes {sizes:?} do not sum to channel count {c}"
        )));
    }
    let mut parts = Vec::with_capacity(sizes.len());
    let mut offset = 0usize;
    for &s in sizes {
        let mut shape = input.shape().to_vec();
        shape[1] = s;
        let mut part = Tensor::zeros(&shape);
        for bi in 0..b {
            let src = (bi * c + offset) * rest;
            let dst = bi * s * rest;
            part.data_mut()[dst..dst + s * rest]
                .copy_from_slice(&input.data()[src..src + s * rest]);
        }
        offset += s;
        parts.push(part);
    }
    Ok(parts)
}

/// Concatenation along the channel axis; inverse of `channel_split`.
pub fn channel_concat(parts: &[Tensor]) -> Result<Tensor> {
    let first = parts
        .first()
        .ok_or_else(|| NnError::InvalidArgument("concat of zero tensors".into()))?;
    let (b, _, rest) = channel_layout(first)?;
    let mut total_c = 0usize;
    for p in parts {
        let shape = p.shape();
        if shape[0] != b || shape[2..] != first.shape()[2..] {
            return Err(NnError::ShapeMismatch(
                "concat parts must agree on all non-channel axes".into(),
            ));
        }
        total_c += shape[1];
    }
    let mut shape = first.shape().to_vec();
    shape[1] = total_c;
    let mut out = Tensor::zeros(&shape);
    let mut offset = 0usize;
    for p in parts {
        let s = p.shape()[1];
        for bi in 0..b {
            let src = bi * s * rest;
            let dst = (bi * total_c + offset) * rest;
            out.data_mut()[dst..dst + s * rest].copy_from_slice(&p.data()[src..src + s * rest]);
        }
        offset += s;
    }
    Ok(out)
}
