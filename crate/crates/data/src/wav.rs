//! Minimal 16-bit PCM mono RIFF/WAVE reader and writer.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use u2s_dsp::Waveform;

use crate::{DataError, Result};

/// Samples are clipped to [-1, 1] and quantized by round(x * 32767).
pub fn write_wav(path: &Path, w: &Waveform) -> Result<()> {
    let n = u32::try_from(w.samples.len() * 2)
        .map_err(|_| DataError::InvalidArgument("waveform too long for WAV".into()))?;
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(b"RIFF")?;
    out.write_all(&(36 + n).to_le_bytes())?;
    out.write_all(b"WAVE")?;
    out.write_all(b"fmt ")?;
    out.write_all(&16u32.to_le_bytes())?;
    out.write_all(&1u16.to_le_bytes())?; // PCM
    out.write_all(&1u16.to_le_bytes())?; // mono
    out.write_all(&w.sample_rate.to_le_bytes())?;
    out.write_all(&(w.sample_rate * 2).to_le_bytes())?; // byte rate
    out.write_all(&2u16.to_le_bytes())?; // block align
    out.write_all(&16u16.to_le_bytes())?; // bits per sample
    out.write_all(b"data")?;
    out.write_all(&n.to_le_bytes())?;
    for &s in &w.samples {
        let q = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        out.write_all(&q.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn read_exact_or_truncated(r: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|_| DataError::Truncated(format!("WAV {what}")))
}

pub fn read_wav(path: &Path) -> Result<Waveform> {
    let mut r = BufReader::new(File::open(path)?);
    let mut hdr = [0u8; 12];
    read_exact_or_truncated(&mut r, &mut hdr, "header")?;
    if &hdr[0..4] != b"RIFF" || &hdr[8..12] != b"WAVE" {
        return Err(DataError::UnsupportedFormat("not a RIFF/WAVE file".into()));
    }

    let mut sample_rate = None;
    loop {
        let mut chunk = [0u8; 8];
        read_exact_or_truncated(&mut r, &mut chunk, "chunk header")?;
        let size = u32::from_le_bytes([chunk[4], chunk[5], chunk[6], chunk[7]]) as usize;
        match &chunk[0..4] {
            b"fmt " => {
                let mut body = vec![0u8; size];
                read_exact_or_truncated(&mut r, &mut body, "fmt chunk")?;
                if body.len() < 16 {
                    return Err(DataError::UnsupportedFormat("short fmt chunk".into()));
                }
                let format = u16::from_le_bytes([body[0], body[1]]);
                let channels = u16::from_le_bytes([body[2], body[3]]);
                let bits = u16::from_le_bytes([body[14], body[15]]);
                if format != 1 {
                    return Err(DataError::UnsupportedFormat(format!("non-PCM format tag {format}")));
                }
                if channels != 1 {
                    return Err(DataError::UnsupportedFormat(format!("{channels} channels, expected mono")));
                }
                if bits != 16 {
                    return Err(DataError::UnsupportedFormat(format!("{bits}-bit samples, expected 16")));
                }
                sample_rate = Some(u32::from_le_bytes([body[4], body[5], body[6], body[7]]));
            }
            b"data" => {
                let rate = sample_rate
                    .ok_or_else(|| DataError::UnsupportedFormat("data chunk before fmt".into()))?;
                let mut body = vec![0u8; size];
                read_exact_or_truncated(&mut r, &mut body, "data chunk")?;
                let samples = body
                    .chunks_exact(2)
                    .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / 32767.0)
                    .collect();
                return Ok(Waveform::new(samples, rate)?);
            }
            _ => {
                // skip unknown chunks (word-aligned)
                let mut skip = vec![0u8; size + size % 2];
                read_exact_or_truncated(&mut r, &mut skip, "chunk body")?;
            }
        }
    }
}
