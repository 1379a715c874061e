//! Cascade formant vowel synthesis from second-order digital
//! resonators, impulse-train excited.

use crate::formant::FormantTrajectory;
use crate::waveform::Waveform;
use crate::{DspError, Result};

/// y[n] = A x[n] + B y[n-1] + C y[n-2] with unity DC gain
/// (A + B + C = 1 by construction).
#[derive(Debug, Clone, Copy)]
pub struct Resonator {
    a: f64,
    b: f64,
    c: f64,
    y1: f64,
    y2: f64,
}

/// C = -exp(-2 pi B T), B = 2 exp(-pi B T) cos(2 pi F T), A = 1 - B - C.
pub fn resonator_coefficients(frequency: f64, bandwidth: f64, sample_rate: u32) -> Result<(f64, f64, f64)> {
    let fs = sample_rate as f64;
    if !(frequency > 0.0 && frequency < fs / 2.0) {
        return Err(DspError::InvalidArgument(format!(
            "resonator frequency {frequency} Hz outside (0, {})",
            fs / 2.0
        )));
    }
    if bandwidth <= 0.0 {
        return Err(DspError::InvalidArgument(format!("bandwidth {bandwidth} must be positive")));
    }
    let t = 1.0 / fs;
    let c = -(-2.0 * std::f64::consts::PI * bandwidth * t).exp();
    let b = 2.0 * (-std::f64::consts::PI * bandwidth * t).exp()
        * (2.0 * std::f64::consts::PI * frequency * t).cos();
    let a = 1.0 - b - c;
    Ok((a, b, c))
}

impl Resonator {
    pub fn new(frequency: f64, bandwidth: f64, sample_rate: u32) -> Result<Self> {
        let (a, b, c) = resonator_coefficients(frequency, bandwidth, sample_rate)?;
        Ok(Self { a, b, c, y1: 0.0, y2: 0.0 })
    }

    /// Retune without resetting the output history.
    pub fn set_frequency(&mut self, frequency: f64, bandwidth: f64, sample_rate: u32) -> Result<()> {
        let (a, b, c) = resonator_coefficients(frequency, bandwidth, sample_rate)?;
        self.a = a;
        self.b = b;
        self.c = c;
        Ok(())
    }

    pub fn coefficients(&self) -> (f64, f64, f64) {
        (self.a, self.b, self.c)
    }

    pub fn process_sample(&mut self, x: f64) -> f64 {
        let y = self.a * x + self.b * self.y1 + self.c * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }

    pub fn process(&mut self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|&v| self.process_sample(v)).collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SynthConfig {
    pub sample_rate: u32,
    pub f0: f64,
    pub bandwidth_f1: f64,
    pub bandwidth_f2: f64,
    /// Fixed higher formants, typical male values.
    pub f3: f64,
    pub bandwidth_f3: f64,
    pub f4: f64,
    pub bandwidth_f4: f64,
    pub peak_target: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            sample_rate: 8820,
            f0: 120.0,
            bandwidth_f1: 60.0,
            bandwidth_f2: 90.0,
            f3: 2500.0,
            bandwidth_f3: 110.0,
            f4: 3500.0,
            bandwidth_f4: 180.0,
            peak_target: 0.9,
        }
    }
}

/// Impulse train with period round(sample_rate / f0), first impulse at
/// sample 0.
pub fn glottal_source(f0: f64, duration_seconds: f64, sample_rate: u32) -> Result<Vec<f64>> {
    let fs = sample_rate as f64;
    if !(f0 > 0.0 && f0 < fs / 2.0) {
        return Err(DspError::InvalidArgument(format!("f0 {f0} Hz outside (0, {})", fs / 2.0)));
    }
    let n = (duration_seconds * fs).round() as usize;
    let period = (fs / f0).round() as usize;
    let mut source = vec![0.0; n];
    let mut i = 0;
    while i < n {
        source[i] = 1.0;
        i += period;
    }
    Ok(source)
}

/// One second of vowel per 30 trajectory frames: per output sample the
/// (f1, f2) pair is linearly interpolated between frame values, the
/// impulse-train source runs through the F1..F4 cascade, and the result
/// is peak-normalized.
pub fn synthesize_vowel_trajectory(traj: &FormantTrajectory, cfg: &SynthConfig) -> Result<Waveform> {
    let fs = cfg.sample_rate as f64;
    traj.validate()?;
    if traj.is_empty() {
        return Err(DspError::InvalidArgument("empty trajectory".into()));
    }
    for (i, &f2) in traj.f2.iter().enumerate() {
        if f2 >= fs / 2.0 {
            return Err(DspError::FrameAnalysis {
                frame: i,
                reason: format!("f2 {f2} Hz at or above Nyquist {}", fs / 2.0),
            });
        }
    }

    let frames = traj.len();
    let duration = frames as f64 / 30.0;
    let source = glottal_source(cfg.f0, duration, cfg.sample_rate)?;
    let n = source.len();

    let mut r1 = Resonator::new(traj.f1[0], cfg.bandwidth_f1, cfg.sample_rate)?;
    let mut r2 = Resonator::new(traj.f2[0], cfg.bandwidth_f2, cfg.sample_rate)?;
    let mut r3 = Resonator::new(cfg.f3, cfg.bandwidth_f3, cfg.sample_rate)?;
    let mut r4 = Resonator::new(cfg.f4, cfg.bandwidth_f4, cfg.sample_rate)?;

    let lerp = |vals: &[f64], pos: f64| -> f64 {
        let idx = pos.floor();
        let frac = pos - idx;
        let i0 = (idx.max(0.0) as usize).min(frames - 1);
        let i1 = (i0 + 1).min(frames - 1);
        vals[i0] * (1.0 - frac.clamp(0.0, 1.0)) + vals[i1] * frac.clamp(0.0, 1.0)
    };

    let mut out = Vec::with_capacity(n);
    for (i, &x) in source.iter().enumerate() {
        // sample time in frame units, frame values anchored at centers
        let pos = (i as f64 + 0.5) / n as f64 * frames as f64 - 0.5;
        r1.set_frequency(lerp(&traj.f1, pos), cfg.bandwidth_f1, cfg.sample_rate)?;
        r2.set_frequency(lerp(&traj.f2, pos), cfg.bandwidth_f2, cfg.sample_rate)?;
        let y = r4.process_sample(r3.process_sample(r2.process_sample(r1.process_sample(x))));
        out.push(y);
    }

    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        let scale = cfg.peak_target / peak;
        for v in &mut out {
            *v *= scale;
        }
    }
    Waveform::new(out, cfg.sample_rate)
}
