//! Binary PGM (P5) export for 50x82 maps in [0, 1].

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::clip::{HEIGHT, WIDTH};
use crate::{DataError, Result};

pub fn write_pgm(path: &Path, map: &[f64]) -> Result<()> {
    if map.len() != HEIGHT * WIDTH {
        return Err(DataError::InvalidArgument(format!(
            "map has {} values, expected {}",
            map.len(),
            HEIGHT * WIDTH
        )));
    }
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P5\n{WIDTH} {HEIGHT}\n255\n")?;
    let mut bytes = Vec::with_capacity(map.len());
    for &v in map {
        if !(0.0..=1.0).contains(&v) {
            return Err(DataError::InvalidArgument(format!("value {v} outside [0, 1]")));
        }
        bytes.push((v * 255.0).round() as u8);
    }
    out.write_all(&bytes)?;
    out.flush()?;
    Ok(())
}
