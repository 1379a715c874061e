use crate::{DataError, Result};

pub const FRAMES: usize = 30;
pub const HEIGHT: usize = 50;
pub const WIDTH: usize = 82;
/// Flattened pixel count of one clip (frame-major, then row-major).
pub const CLIP_LEN: usize = FRAMES * HEIGHT * WIDTH;

/// 30 grayscale frames of 50x82, values in [0, 1], stored flattened.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoClip {
    pixels: Vec<f64>,
}

impl VideoClip {
    pub fn from_pixels(pixels: Vec<f64>) -> Result<Self> {
        if pixels.len() != CLIP_LEN {
            return Err(DataError::InvalidArgument(format!(
                "clip has {} pixels, expected {CLIP_LEN}",
                pixels.len()
            )));
        }
        if pixels.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(DataError::InvalidArgument("pixel outside [0, 1]".into()));
        }
        Ok(Self { pixels })
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    /// One 50x82 frame, row-major.
    pub fn frame(&self, index: usize) -> &[f64] {
        &self.pixels[index * HEIGHT * WIDTH..(index + 1) * HEIGHT * WIDTH]
    }
}
