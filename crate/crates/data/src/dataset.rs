//! Dataset container and its binary file format: magic "U2S1", a
//! 32-bit record count, then per clip 30*50*82 pixel f32s followed by
//! 60 label f32s (f1 then f2, Hz). All values little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use u2s_dsp::FormantTrajectory;

use crate::clip::{VideoClip, CLIP_LEN, FRAMES};
use crate::synth::{generate_synthetic_clip, SyntheticParams};
use crate::{DataError, Result};

pub const MAGIC: [u8; 4] = *b"U2S1";
pub const LABELS_PER_CLIP: usize = 2 * FRAMES;
pub const RECORD_BYTES: usize = (CLIP_LEN + LABELS_PER_CLIP) * 4;

/// One clip with its labels, in 32-bit storage precision.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipRecord {
    pub pixels: Vec<f32>,
    /// f1 for 30 frames then f2 for 30 frames, Hz.
    pub labels: Vec<f32>,
}

impl ClipRecord {
    pub fn from_clip(clip: &VideoClip, labels: &FormantTrajectory) -> Result<Self> {
        if labels.len() != FRAMES {
            return Err(DataError::InvalidArgument(format!(
                "labels have {} frames, expected {FRAMES}",
                labels.len()
            )));
        }
        let pixels = clip.pixels().iter().map(|&v| v as f32).collect();
        let labels = labels
            .f1
            .iter()
            .chain(&labels.f2)
            .map(|&v| v as f32)
            .collect();
        Ok(Self { pixels, labels })
    }

    pub fn trajectory(&self) -> Result<FormantTrajectory> {
        let f1 = self.labels[..FRAMES].iter().map(|&v| v as f64).collect();
        let f2 = self.labels[FRAMES..].iter().map(|&v| v as f64).collect();
        Ok(FormantTrajectory::new(f1, f2)?)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub records: Vec<ClipRecord>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Expected file size for a given record count.
pub fn file_size(count: usize) -> usize {
    MAGIC.len() + 4 + count * RECORD_BYTES
}

/// Independent clips with per-clip seeds drawn from the master seed.
/// Labels stay in Hz; normalization is a training-time concern.
pub fn generate_dataset_in_memory(count: usize, seed: u64) -> Result<Dataset> {
    if count == 0 {
        return Err(DataError::InvalidArgument("dataset count must be >= 1".into()));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(count);
    for _ in 0..count {
        let params = SyntheticParams::random_walk(master.next_u64());
        let (clip, labels) = generate_synthetic_clip(&params)?;
        records.push(ClipRecord::from_clip(&clip, &labels)?);
    }
    Ok(Dataset { records })
}

pub fn generate_dataset(count: usize, seed: u64, path: &Path) -> Result<Dataset> {
    let ds = generate_dataset_in_memory(count, seed)?;
    write_dataset(path, &ds)?;
    Ok(ds)
}

pub fn write_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MAGIC)?;
    let count = u32::try_from(ds.records.len())
        .map_err(|_| DataError::InvalidArgument("record count exceeds u32".into()))?;
    w.write_all(&count.to_le_bytes())?;
    for rec in &ds.records {
        if rec.pixels.len() != CLIP_LEN || rec.labels.len() != LABELS_PER_CLIP {
            return Err(DataError::InvalidArgument("malformed record".into()));
        }
        let mut buf = Vec::with_capacity(RECORD_BYTES);
        for &v in rec.pixels.iter().chain(&rec.labels) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

/// Streaming reader; `next_record` returns records until the declared
/// count is exhausted or the file runs short (a truncation error).
pub struct DatasetReader {
    reader: BufReader<File>,
    remaining: u32,
    index: u32,
}

impl DatasetReader {
    pub fn open(path: &Path) -> Result<Self> {
        let mut reader = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        reader
            .read_exact(&mut magic)
            .map_err(|_| DataError::Truncated("missing header".into()))?;
        if magic != MAGIC {
            return Err(DataError::BadMagic);
        }
        let mut count = [0u8; 4];
        reader
            .read_exact(&mut count)
            .map_err(|_| DataError::Truncated("missing record count".into()))?;
        Ok(Self { reader, remaining: u32::from_le_bytes(count), index: 0 })
    }

    pub fn remaining(&self) -> u32 {
        self.remaining
    }

    pub fn next_record(&mut self) -> Option<Result<ClipRecord>> {
        if self.remaining == 0 {
            return None;
        }
        let mut buf = vec![0u8; RECORD_BYTES];
        if let Err(e) = self.reader.read_exact(&mut buf) {
            self.remaining = 0;
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                return Some(Err(DataError::Truncated(format!("record {} cut short", self.index))));
            }
            return Some(Err(e.into()));
        }
        let floats: Vec<f32> = buf
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        self.remaining -= 1;
        self.index += 1;
        Some(Ok(ClipRecord {
            pixels: floats[..CLIP_LEN].to_vec(),
            labels: floats[CLIP_LEN..].to_vec(),
        }))
    }
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let mut reader = DatasetReader::open(path)?;
    let mut records = Vec::with_capacity(reader.remaining() as usize);
    while let Some(rec) = reader.next_record() {
        records.push(rec?);
    }
    Ok(Dataset { records })
}
