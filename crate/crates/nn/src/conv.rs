use crate::{NnError, Result, Tensor};

/// Grouped 3D convolution layout: stride is always 1, padding is
/// zero-fill, kernels are odd in every axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: (usize, usize, usize),
    pub padding: (usize, usize, usize),
    pub groups: usize,
}

impl ConvSpec {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel: (usize, usize, usize),
        padding: (usize, usize, usize),
        groups: usize,
    ) -> Result<Self> {
        let spec = Self { in_channels, out_channels, kernel, padding, groups };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_channels == 0 || self.out_channels == 0 || self.groups == 0 {
            return Err(NnError::InvalidArgument(
                "channel and group counts must be positive".into(),
            ));
        }
        if self.in_channels % self.groups != 0 || self.out_channels % self.groups != 0 {
            return Err(NnError::InvalidArgument(format!(
                "groups {} must divide in_channels {} and out_channels {}",
                self.groups, self.in_channels, self.out_channels
            )));
        }
        let (kt, kh, kw) = self.kernel;
        if kt == 0 || kh == 0 || kw == 0 {
            return Err(NnError::InvalidArgument("zero kernel extent".into()));
        }
        if kt % 2 == 0 || kh % 2 == 0 || kw % 2 == 0 {
            return Err(NnError::InvalidArgument(format!(
                "kernel extents must be odd, got {:?}",
                self.kernel
            )));
        }
        Ok(())
    }

    fn out_extent(&self, axis: usize, input: usize) -> Result<usize> {
        let (k, p) = match axis {
            0 => (self.kernel.0, self.padding.0),
            1 => (self.kernel.1, self.padding.1),
            _ => (self.kernel.2, self.padding.2),
        };
        let ext = (input + 2 * p).checked_sub(k - 1).unwrap_or(0);
        if ext == 0 {
            return Err(NnError::ShapeMismatch(format!(
                "kernel {k} with padding {p} does not fit axis extent {input}"
            )));
        }
        Ok(ext)
    }

    pub fn output_shape(&self, input: &[usize; 5]) -> Result<[usize; 5]> {
        Ok([
            input[0],
            self.out_channels,
            self.out_extent(0, input[2])?,
            self.out_extent(1, input[3])?,
            self.out_extent(2, input[4])?,
        ])
    }
}

pub struct Conv3dGrads {
    pub input: Tensor,
    pub weights: Tensor,
    pub bias: Tensor,
}

fn check_shapes(input: &Tensor, spec: &ConvSpec, weights: &Tensor, bias: &Tensor) -> Result<[usize; 5]> {
    spec.validate()?;
    let dims = input.dims5()?;
    if dims[1] != spec.in_channels {
        return Err(NnError::ShapeMismatch(format!(
            "input has {} channels, spec expects {}",
            dims[1], spec.in_channels
        )));
    }
    let (kt, kh, kw) = spec.kernel;
    let want = [spec.out_channels, spec.in_channels / spec.groups, kt, kh, kw];
    if weights.shape() != want {
        return Err(NnError::ShapeMismatch(format!(
            "weights shaped {:?}, expected {:?}",
            weights.shape(),
            want
        )));
    }
    if bias.shape() != [spec.out_channels] {
        return Err(NnError::ShapeMismatch(format!(
            "bias shaped {:?}, expected [{}]",
            bias.shape(),
            spec.out_channels
        )));
    }
    Ok(dims)
}

/// Gather the receptive fields of one (sample, group) into a K x P
/// matrix, K = Cg*kt*kh*kw, P = T'*H'*W'. Zero padding cells are
/// written explicitly so the buffer needs no pre-clearing.
#[allow(clippy::too_many_arguments)]
fn im2col(
    input: &[f64],
    dims: &[usize; 5],
    spec: &ConvSpec,
    out: &[usize; 5],
    b: usize,
    group: usize,
    col: &mut [f64],
) {
    let [_, c_in, t_in, h_in, w_in] = *dims;
    let (kt, kh, kw) = spec.kernel;
    let (pt, ph, pw) = spec.padding;
    let (t_out, h_out, w_out) = (out[2], out[3], out[4]);
    let cg = c_in / spec.groups;
    let p_total = t_out * h_out * w_out;
    let frame = h_in * w_in;
    let sample_base = (b * c_in + group * cg) * t_in * frame;

    let mut row = 0usize;
    for ci in 0..cg {
        let chan_base = sample_base + ci * t_in * frame;
        for dt in 0..kt {
            for dh in 0..kh {
                for dw in 0..kw {
                    let dst_row = &mut col[row * p_total..(row + 1) * p_total];
                    row += 1;
                    let mut p = 0usize;
                    for to in 0..t_out {
                        let ti = (to + dt) as isize - pt as isize;
                        if ti < 0 || ti as usize >= t_in {
                            dst_row[p..p + h_out * w_out].fill(0.0);
                            p += h_out * w_out;
                            continue;
                        }
                        let t_base = chan_base + ti as usize * frame;
                        for ho in 0..h_out {
                            let hi = (ho + dh) as isize - ph as isize;
                            if hi < 0 || hi as usize >= h_in {
                                dst_row[p..p + w_out].fill(0.0);
                                p += w_out;
                                continue;
                            }
                            let h_base = t_base + hi as usize * w_in;
                            // valid w range: 0 <= wo + dw - pw < w_in
                            let lo = pw.saturating_sub(dw).min(w_out);
                            let hi_excl = (w_in + pw).saturating_sub(dw).min(w_out);
                            dst_row[p..p + lo].fill(0.0);
                            if hi_excl > lo {
                                let src = h_base + lo + dw - pw;
                                dst_row[p + lo..p + hi_excl]
                                    .copy_from_slice(&input[src..src + (hi_excl - lo)]);
                            }
                            dst_row[p + hi_excl..p + w_out].fill(0.0);
                            p += w_out;
                        }
                    }
                }
            }
        }
    }
}

/// Scatter-add a K x P column matrix back into the input gradient.
#[allow(clippy::too_many_arguments)]
fn col2im_add(
    col: &[f64],
    dims: &[usize; 5],
    spec: &ConvSpec,
    out: &[usize; 5],
    b: usize,
    group: usize,
    dinput: &mut [f64],
) {
    let [_, c_in, t_in, h_in, w_in] = *dims;
    let (kt, kh, kw) = spec.kernel;
    let (pt, ph, pw) = spec.padding;
    let (t_out, h_out, w_out) = (out[2], out[3], out[4]);
    let cg = c_in / spec.groups;
    let p_total = t_out * h_out * w_out;
    let frame = h_in * w_in;
    let sample_base = (b * c_in + group * cg) * t_in * frame;

    let mut row = 0usize;
    for ci in 0..cg {
        let chan_base = sample_base + ci * t_in * frame;
        for dt in 0..kt {
            for dh in 0..kh {
                for dw in 0..kw {
                    let src_row = &col[row * p_total..(row + 1) * p_total];
                    row += 1;
                    let mut p = 0usize;
                    for to in 0..t_out {
                        let ti = (to + dt) as isize - pt as isize;
                        if ti < 0 || ti as usize >= t_in {
                            p += h_out * w_out;
                            continue;
                        }
                        let t_base = chan_base + ti as usize * frame;
                        for ho in 0..h_out {
                            let hi = (ho + dh) as isize - ph as isize;
                            if hi < 0 || hi as usize >= h_in {
                                p += w_out;
                                continue;
                            }
                            let h_base = t_base + hi as usize * w_in;
                            let lo = pw.saturating_sub(dw).min(w_out);
                            let hi_excl = (w_in + pw).saturating_sub(dw).min(w_out);
                            if hi_excl > lo {
                                let dst = h_base + lo + dw - pw;
                                for i in 0..hi_excl - lo {
                                    dinput[dst + i] += src_row[p + lo + i];
                                }
                            }
                            p += w_out;
                        }
                    }
                }
            }
        }
    }
}

/// Grouped 3D convolution, stride 1. Output extent per axis is
/// `in + 2*pad - kernel + 1`.
pub fn conv3d_forward(
    input: &Tensor,
    spec: &ConvSpec,
    weights: &Tensor,
    bias: &Tensor,
) -> Result<Tensor> {
    let dims = check_shapes(input, spec, weights, bias)?;
    let out = spec.output_shape(&dims)?;
    let cg_in = spec.in_channels / spec.groups;
    let cg_out = spec.out_channels / spec.groups;
    let (kt, kh, kw) = spec.kernel;
    let k = cg_in * kt * kh * kw;
    let p = out[2] * out[3] * out[4];

    let mut output = Tensor::zeros(&out);
    // 1x1x1 kernels with no padding need no gather: the column matrix
    // is the input slice itself.
    let pointwise = spec.kernel == (1, 1, 1) && spec.padding == (0, 0, 0);
    let mut col = if pointwise { Vec::new() } else { vec![0.0f64; k * p] };
    for b in 0..dims[0] {
        for g in 0..spec.groups {
            let rhs = if pointwise {
                let i_base = (b * spec.in_channels + g * cg_in) * p;
                input.data()[i_base..].as_ptr()
            } else {
                im2col(input.data(), &dims, spec, &out, b, g, &mut col);
                col.as_ptr()
            };
            let w_base = g * cg_out * k;
            let o_base = (b * spec.out_channels + g * cg_out) * p;
            unsafe {
                matrixmultiply::dgemm(
                    cg_out,
                    k,
                    p,
                    1.0,
                    weights.data()[w_base..].as_ptr(),
                    k as isize,
                    1,
                    rhs,
                    p as isize,
                    1,
                    0.0,
                    output.data_mut()[o_base..].as_mut_ptr(),
                    p as isize,
                    1,
                );
            }
        }
    }
    // bias
    let od = output.data_mut();
    for b in 0..out[0] {
        for c in 0..out[1] {
            let base = (b * out[1] + c) * p;
            let bv = bias.data()[c];
            if bv != 0.0 {
                for v in &mut od[base..base + p] {
                    *v += bv;
                }
            }
        }
    }
    Ok(output)
}

/// Gradients of `conv3d_forward` with respect to input, weights and
/// bias. `input`, `spec` and `weights` must be the forward arguments.
pub fn conv3d_backward(
    input: &Tensor,
    spec: &ConvSpec,
    weights: &Tensor,
    upstream: &Tensor,
) -> Result<Conv3dGrads> {
    let dims = check_shapes(input, spec, weights, &Tensor::zeros(&[spec.out_channels]))?;
    let out = spec.output_shape(&dims)?;
    if upstream.shape() != out {
        return Err(NnError::ShapeMismatch(format!(
            "upstream shaped {:?}, forward output is {:?}",
            upstream.shape(),
            out
        )));
    }
    let cg_in = spec.in_channels / spec.groups;
    let cg_out = spec.out_channels / spec.groups;
    let (kt, kh, kw) = spec.kernel;
    let k = cg_in * kt * kh * kw;
    let p = out[2] * out[3] * out[4];

    let mut dinput = Tensor::zeros(input.shape());
    let mut dweights = Tensor::zeros(weights.shape());
    let mut dbias = Tensor::zeros(&[spec.out_channels]);

    // bias grad: sum over batch and positions
    for b in 0..out[0] {
        for c in 0..out[1] {
            let base = (b * out[1] + c) * p;
            dbias.data_mut()[c] += upstream.data()[base..base + p].iter().sum::<f64>();
        }
    }

    // see conv3d_forward: 1x1x1 kernels skip the gather/scatter
    let pointwise = spec.kernel == (1, 1, 1) && spec.padding == (0, 0, 0);
    let mut col = if pointwise { Vec::new() } else { vec![0.0f64; k * p] };
    let mut dcol = if pointwise { Vec::new() } else { vec![0.0f64; k * p] };
    for b in 0..dims[0] {
        for g in 0..spec.groups {
            let i_base = (b * spec.in_channels + g * cg_in) * p;
            let rhs = if pointwise {
                input.data()[i_base..].as_ptr()
            } else {
                im2col(input.data(), &dims, spec, &out, b, g, &mut col);
                col.as_ptr()
            };
            let dcol_ptr = if pointwise {
                dinput.data_mut()[i_base..].as_mut_ptr()
            } else {
                dcol.as_mut_ptr()
            };
            let w_base = g * cg_out * k;
            let o_base = (b * spec.out_channels + g * cg_out) * p;
            unsafe {
                // dW_g += dOut (Cg_out x P) * col^T (P x K)
                matrixmultiply::dgemm(
                    cg_out,
                    p,
                    k,
                    1.0,
                    upstream.data()[o_base..].as_ptr(),
                    p as isize,
                    1,
                    rhs,
                    1,
                    p as isize,
                    1.0,
                    dweights.data_mut()[w_base..].as_mut_ptr(),
                    k as isize,
                    1,
                );
                // dCol = W_g^T (K x Cg_out) * dOut (Cg_out x P); in the
                // pointwise case dCol is the input gradient slice itself
                matrixmultiply::dgemm(
                    k,
                    cg_out,
                    p,
                    1.0,
                    weights.data()[w_base..].as_ptr(),
                    1,
                    k as isize,
                    upstream.data()[o_base..].as_ptr(),
                    p as isize,
                    1,
                    0.0,
                    dcol_ptr,
                    p as isize,
                    1,
                );
            }
            if !pointwise {
                col2im_add(&dcol, &dims, spec, &out, b, g, dinput.data_mut());
            }
        }
    }
    Ok(Conv3dGrads { input: dinput, weights: dweights, bias: dbias })
}
