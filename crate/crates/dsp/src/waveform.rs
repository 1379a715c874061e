use crate::{DspError, Result};

/// Mono audio, samples nominally in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(DspError::InvalidArgument("sample rate must be positive".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(DspError::InvalidArgument("non-finite sample".into()));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Band-limited resampling with a Hann-windowed sinc kernel. Output
/// length is `round(n * target / source)`; kernel weights are
/// normalized per output sample, so DC is preserved exactly.
pub fn resample(w: &Waveform, target_rate: u32) -> Result<Waveform> {
    if target_rate == 0 {
        return Err(DspError::InvalidArgument("target rate must be positive".into()));
    }
    if target_rate == w.sample_rate {
        return Ok(w.clone());
    }
    let src = w.sample_rate as f64;
    let dst = target_rate as f64;
    let n_in = w.samples.len();
    let n_out = ((n_in as f64) * dst / src).round() as usize;

    // cutoff at 45% of the lower rate, expressed against the input rate
    let fc = 0.45 * dst.min(src) / src;
    const LOBES: f64 = 24.0;
    let half_width = LOBES / (2.0 * fc);
    let ratio = src / dst;

    let mut out = Vec::with_capacity(n_out);
    for i in 0..n_out {
        let center = i as f64 * ratio;
        let j_lo = ((center - half_width).ceil().max(0.0)) as usize;
        let j_hi = ((center + half_width).floor()).min((n_in - 1) as f64) as usize;
        let mut acc = 0.0;
        let mut wsum = 0.0;
        for j in j_lo..=j_hi {
            let d = j as f64 - center;
            let x = 2.0 * fc * d;
            let sinc = if x.abs() < 1e-12 { 1.0 } else { (std::f64::consts::PI * x).sin() / (std::f64::consts::PI * x) };
            let win = 0.5 * (1.0 + (std::f64::consts::PI * d / half_width).cos());
            let weight = sinc * win;
            acc += weight * w.samples[j];
            wsum += weight;
        }
        out.push(if wsum.abs() > 1e-12 { acc / wsum } else { 0.0 });
    }
    Waveform::new(out, target_rate)
}
