use num_complex::Complex64;

use crate::lpc::{autocorrelation, hamming_window, levinson_durbin, pre_emphasis};
use crate::roots::polynomial_roots;
use crate::waveform::{resample, Waveform};
use crate::{DspError, Result};

/// Candidate filtering thresholds of the classical recipe.
const MIN_FREQUENCY_HZ: f64 = 90.0;
const MAX_BANDWIDTH_HZ: f64 = 400.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormantEstimate {
    pub frequency: f64,
    pub bandwidth: f64,
}

/// Aligned 30-point f1/f2 sequences in Hz, f1 < f2 framewise.
#[derive(Debug, Clone, PartialEq)]
pub struct FormantTrajectory {
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
}

impl FormantTrajectory {
    pub fn new(f1: Vec<f64>, f2: Vec<f64>) -> Result<Self> {
        let t = Self { f1, f2 };
        t.validate()?;
        Ok(t)
    }

    pub fn constant(f1: f64, f2: f64, frames: usize) -> Result<Self> {
        Self::new(vec![f1; frames], vec![f2; frames])
    }

    pub fn validate(&self) -> Result<()> {
        if self.f1.len() != self.f2.len() {
            return Err(DspError::InvalidArgument("f1/f2 lengths differ".into()));
        }
        for (i, (&a, &b)) in self.f1.iter().zip(&self.f2).enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(DspError::FrameAnalysis { frame: i, reason: "non-finite formant".into() });
            }
            if a <= 0.0 || a >= b {
                return Err(DspError::FrameAnalysis {
                    frame: i,
                    reason: format!("f1 {a} must satisfy 0 < f1 < f2 {b}"),
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.f1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f1.is_empty()
    }

    /// 30 lines of "index,f1Hz,f2Hz".
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..self.len() {
            s.push_str(&format!("{},{},{}\n", i, self.f1[i], self.f2[i]));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut f1 = Vec::new();
        let mut f2 = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(DspError::Parse(format!("line {}: expected index,f1,f2", lineno + 1)));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| DspError::Parse(format!("line {}: bad number {s:?}", lineno + 1)))
            };
            f1.push(parse(fields[1])?);
            f2.push(parse(fields[2])?);
        }
        Self::new(f1, f2)
    }
}

/// Converts LPC poles to formant candidates: positive-imaginary roots
/// only, frequency from the angle and bandwidth from the radius, with
/// the classical plausibility thresholds, sorted ascending.
pub fn roots_to_formants(roots: &[Complex64], sample_rate: u32) -> Vec<FormantEstimate> {
    let fs = sample_rate as f64;
    let mut formants: Vec<FormantEstimate> = roots
        .iter()
        .filter(|z| z.im > 0.0)
        .map(|z| FormantEstimate {
            frequency: z.arg() * fs / (2.0 * std::f64::consts::PI),
            bandwidth: -(fs / std::f64::consts::PI) * z.norm().ln(),
        })
        .filter(|f| f.frequency > MIN_FREQUENCY_HZ && f.bandwidth < MAX_BANDWIDTH_HZ && f.bandwidth > 0.0)
        .collect();
    formants.sort_by(|a, b| a.frequency.partial_cmp(&b.frequency).unwrap());
    formants
}

#[derive(Debug, Clone, Copy)]
pub struct ExtractConfig {
    pub frame_rate: u32,
    pub frames: usize,
    pub order: usize,
    /// Frames are resampled to this rate before LPC.
    pub analysis_rate: u32,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self { frame_rate: 30, frames: 30, order: 10, analysis_rate: 8820 }
    }
}

/// Video-aligned non-overlapping frames, each run through
/// block -> resample -> Hamming -> pre-emphasis -> autocorrelation ->
/// Levinson-Durbin -> polynomial roots -> formant candidates, keeping
/// the two lowest surviving frequencies as (f1, f2).
pub fn extract_formant_trajectory(w: &Waveform, cfg: &ExtractConfig) -> Result<FormantTrajectory> {
    if cfg.frames == 0 || cfg.frame_rate == 0 || cfg.order == 0 {
        return Err(DspError::InvalidArgument("frames, frame rate and order must be positive".into()));
    }
    let frame_len = (w.sample_rate as f64 / cfg.frame_rate as f64).round() as usize;
    if w.samples.len() < cfg.frames * frame_len {
        return Err(DspError::InvalidArgument(format!(
            "waveform has {} samples, need {} for {} frames",
            w.samples.len(),
            cfg.frames * frame_len,
            cfg.frames
        )));
    }

    let mut f1 = Vec::with_capacity(cfg.frames);
    let mut f2 = Vec::with_capacity(cfg.frames);
    for frame in 0..cfg.frames {
        let block = &w.samples[frame * frame_len..(frame + 1) * frame_len];
        let block = Waveform::new(block.to_vec(), w.sample_rate)
            .and_then(|b| resample(&b, cfg.analysis_rate))
            .map_err(|e| DspError::FrameAnalysis { frame, reason: e.to_string() })?;
        let window = hamming_window(block.samples.len())
            .map_err(|e| DspError::FrameAnalysis { frame, reason: e.to_string() })?;
        let windowed: Vec<f64> = block.samples.iter().zip(&window).map(|(x, w)| x * w).collect();
        let emphasized = pre_emphasis(&windowed);
        let r = autocorrelation(&emphasized, cfg.order)
            .map_err(|e| DspError::FrameAnalysis { frame, reason: e.to_string() })?;
        let lpc = levinson_durbin(&r, cfg.order)
            .map_err(|e| DspError::FrameAnalysis { frame, reason: e.to_string() })?;
        let roots = polynomial_roots(&lpc.coefficients)
            .map_err(|e| DspError::FrameAnalysis { frame, reason: e.to_string() })?;
        let formants = roots_to_formants(&roots, cfg.analysis_rate);
        if formants.len() < 2 {
            return Err(DspError::FrameAnalysis {
                frame,
                reason: format!("only {} formant candidates survived", formants.len()),
            });
        }
        f1.push(formants[0].frequency);
        f2.push(formants[1].frequency);
    }
    FormantTrajectory::new(f1, f2)
}
