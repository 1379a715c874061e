//! Synthetic ultrasound-like clips: a bright tongue-surface arc whose
//! apex position encodes the articulatory state, over speckle noise.
//! The label map f1 = 800 - 500 h, f2 = 900 + 1300 f keeps the
//! height/f1 inverse and frontness/f2 direct relations of the vowel
//! space; f1 in [300, 800] and f2 in [900, 2200], so f1 < f2 always.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use u2s_dsp::FormantTrajectory;

use crate::clip::{VideoClip, CLIP_LEN, FRAMES, HEIGHT, WIDTH};
use crate::{DataError, Result};

pub const MAX_STEP: f64 = 0.1;

/// Per-frame articulatory state: tongue height h and frontness f,
/// both in [0, 1] and moving at most 0.1 per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticParams {
    pub height: Vec<f64>,
    pub frontness: Vec<f64>,
    pub speckle_amplitude: f64,
    pub seed: u64,
}

/// Centered moving average of width 5 with edge truncation. Weights
/// are convex, so values stay in [0,1] and steps never grow.
fn smooth(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(2);
            let hi = (i + 2).min(n - 1);
            v[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

impl SyntheticParams {
    pub fn new(height: Vec<f64>, frontness: Vec<f64>, speckle_amplitude: f64, seed: u64) -> Result<Self> {
        let p = Self { height, frontness, speckle_amplitude, seed };
        p.validate()?;
        Ok(p)
    }

    /// Smooth random trajectories: uniform start, clamped random walk
    /// with steps in [-0.1, 0.1], then a short moving average so the
    /// curves are articulator-like rather than jittery (smoothing is a
    /// convex combination, so range and step bounds are preserved).
    pub fn random_walk(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let walk = |rng: &mut ChaCha8Rng| {
            let mut v = Vec::with_capacity(FRAMES);
            let mut x: f64 = rng.gen_range(0.0..=1.0);
            for _ in 0..FRAMES {
                v.push(x);
                x = (x + rng.gen_range(-MAX_STEP..=MAX_STEP)).clamp(0.0, 1.0);
            }
            smooth(&v)
        };
        let height = walk(&mut rng);
        let frontness = walk(&mut rng);
        Self { height, frontness, speckle_amplitude: 0.05, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.height.len() != FRAMES || self.frontness.len() != FRAMES {
            return Err(DataError::InvalidArgument(format!(
                "need {FRAMES} frames of height and frontness"
            )));
        }
        if !(0.0..=1.0).contains(&self.speckle_amplitude) {
            return Err(DataError::InvalidArgument("speckle amplitude outside [0, 1]".into()));
        }
        for series in [&self.height, &self.frontness] {
            if series.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(DataError::InvalidArgument("trajectory value outside [0, 1]".into()));
            }
            for pair in series.windows(2) {
                if (pair[1] - pair[0]).abs() > MAX_STEP + 1e-12 {
                    return Err(DataError::InvalidArgument(format!(
                        "trajectory step {} exceeds {MAX_STEP}",
                        (pair[1] - pair[0]).abs()
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn labels_for(height: f64, frontness: f64) -> (f64, f64) {
    (800.0 - 500.0 * height, 900.0 + 1300.0 * frontness)
}

/// Renders the clip and its per-frame (f1, f2) labels. Deterministic
/// in `params.seed`.
pub fn generate_synthetic_clip(params: &SyntheticParams) -> Result<(VideoClip, FormantTrajectory)> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let sigma = 1.5f64;
    let curvature = 0.008f64;

    let mut pixels = Vec::with_capacity(CLIP_LEN);
    let mut f1 = Vec::with_capacity(FRAMES);
    let mut f2 = Vec::with_capacity(FRAMES);
    for t in 0..FRAMES {
        let (h, f) = (params.height[t], params.frontness[t]);
        let apex_row = (1.0 - h) * 40.0 + 5.0;
        let apex_col = f * 60.0 + 10.0;
        for r in 0..HEIGHT {
            for c in 0..WIDTH {
                let dc = c as f64 - apex_col;
                // downward-opening parabolic ridge through the apex,
                // fading away from it laterally
                let ridge_row = apex_row + curvature * dc * dc;
                let dr = r as f64 - ridge_row;
                let arc = (-dr * dr / (2.0 * sigma * sigma)).exp() * (-(dc / 30.0) * (dc / 30.0)).exp();
                let speckle = 1.0 + params.speckle_amplitude * rng.gen_range(-1.0..=1.0);
                pixels.push(((0.12 + 0.8 * arc) * speckle).clamp(0.0, 1.0));
            }
        }
        let (a, b) = labels_for(h, f);
        f1.push(a);
        f2.push(b);
    }
    let clip = VideoClip::from_pixels(pixels)?;
    let traj = FormantTrajectory::new(f1, f2)?;
    Ok((clip, traj))
}
