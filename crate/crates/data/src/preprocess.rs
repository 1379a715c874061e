//! Raw frame preprocessing: crop, grayscale, area-average downsample
//! to 50x82, per-clip min-max normalization.

use crate::clip::{VideoClip, FRAMES, HEIGHT, WIDTH};
use crate::{DataError, Result};

/// Row-major image, interleaved channels (1 = gray, 3 = RGB).
#[derive(Debug, Clone)]
pub struct RawFrame {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl RawFrame {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(DataError::InvalidArgument(format!("unsupported channel count {channels}")));
        }
        if data.len() != height * width * channels {
            return Err(DataError::InvalidArgument("frame data length mismatch".into()));
        }
        Ok(Self { height, width, channels, data })
    }

    fn luma(&self, row: usize, col: usize) -> f64 {
        let i = (row * self.width + col) * self.channels;
        match self.channels {
            1 => self.data[i],
            _ => 0.299 * self.data[i] + 0.587 * self.data[i + 1] + 0.114 * self.data[i + 2],
        }
    }
}

/// Crop region: `rows` x `cols` starting at (top, left).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropBox {
    pub top: usize,
    pub left: usize,
    pub rows: usize,
    pub cols: usize,
}

/// Area-average resampling of one channel; each output pixel averages
/// the source area it covers, with fractional edge weights.
fn area_resize(src: &[f64], src_h: usize, src_w: usize, dst_h: usize, dst_w: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(dst_h * dst_w);
    let ry = src_h as f64 / dst_h as f64;
    let rx = src_w as f64 / dst_w as f64;
    for oy in 0..dst_h {
        let y0 = oy as f64 * ry;
        let y1 = (oy + 1) as f64 * ry;
        for ox in 0..dst_w {
            let x0 = ox as f64 * rx;
            let x1 = (ox + 1) as f64 * rx;
            let mut acc = 0.0;
            let mut area = 0.0;
            let mut sy = y0.floor() as usize;
            while (sy as f64) < y1 && sy < src_h {
                let hy = (y1.min((sy + 1) as f64) - y0.max(sy as f64)).max(0.0);
                let mut sx = x0.floor() as usize;
                while (sx as f64) < x1 && sx < src_w {
                    let wx = (x1.min((sx + 1) as f64) - x0.max(sx as f64)).max(0.0);
                    acc += src[sy * src_w + sx] * hy * wx;
                    area += hy * wx;
                    sx += 1;
                }
                sy += 1;
            }
            out.push(acc / area);
        }
    }
    out
}

/// First 30 frames cropped to `bbox`, grayscaled, downsampled to
/// 50x82, then min-max normalized over the whole clip. A zero-range
/// clip maps to all zeros.
pub fn preprocess_frames(frames: &[RawFrame], bbox: CropBox) -> Result<VideoClip> {
    if frames.len() < FRAMES {
        return Err(DataError::InvalidArgument(format!(
            "need at least {FRAMES} frames, got {}",
            frames.len()
        )));
    }
    if bbox.rows == 0 || bbox.cols == 0 {
        return Err(DataError::InvalidArgument("empty crop box".into()));
    }
    let mut pixels = Vec::with_capacity(FRAMES * HEIGHT * WIDTH);
    for frame in &frames[..FRAMES] {
        if bbox.top + bbox.rows > frame.height || bbox.left + bbox.cols > frame.width {
            return Err(DataError::InvalidArgument(format!(
                "crop box {bbox:?} outside {}x{} frame",
                frame.height, frame.width
            )));
        }
        let mut cropped = Vec::with_capacity(bbox.rows * bbox.cols);
        for r in 0..bbox.rows {
            for c in 0..bbox.cols {
                cropped.push(frame.luma(bbox.top + r, bbox.left + c));
            }
        }
        pixels.extend(area_resize(&cropped, bbox.rows, bbox.cols, HEIGHT, WIDTH));
    }

    let min = pixels.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = pixels.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(min.is_finite() && max.is_finite()) {
        return Err(DataError::InvalidArgument("non-finite pixel".into()));
    }
    // area weights introduce ~1e-16 jitter, so a constant clip is
    // detected with a relative tolerance rather than exact equality
    let range = max - min;
    let degenerate = range <= 1e-12 * min.abs().max(max.abs()).max(1.0);
    for v in &mut pixels {
        *v = if degenerate { 0.0 } else { ((*v - min) / range).clamp(0.0, 1.0) };
    }
    VideoClip::from_pixels(pixels)
}
