//! Checkpoint file format.
//!
//! Little-endian throughout:
//!   magic "U2FCKPT1", u32 version,
//!   length-prefixed config record (u32 byte length, then the fields:
//!     input shape as 4 x u32, five u32 layer sizes, head count u32,
//!     five flag bytes, u64 training seed, u32 epoch),
//!   u32 tensor count, then per tensor:
//!     u32 name length, name bytes, u32 rank, u64 extents, f64 payload,
//!   four f64 target-normalization constants (f1min, f1max, f2min, f2max).
//!
//! Parameters come before buffers; a tensor named `*.running_mean` or
//! `*.running_var` is a buffer.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use indexmap::IndexMap;

use crate::config::{TargetNorm, U2fConfig};
use crate::net::U2fModel;
use crate::{ModelError, Result};
use u2s_nn::Tensor;

const MAGIC: &[u8; 8] = b"U2FCKPT1";
const VERSION: u32 = 1;

fn config_record(model: &U2fModel) -> Vec<u8> {
    let c = &model.config;
    let mut rec = Vec::with_capacity(64);
    for v in [
        c.input_shape.0,
        c.input_shape.1,
        c.input_shape.2,
        c.input_shape.3,
        c.layer1_filters,
        c.hybrid_filters_per_branch,
        c.grouped_conv_filters,
        c.grouped_conv_groups,
        c.head_outputs,
    ] {
        rec.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for f in [
        c.use_spatial_branch,
        c.use_temporal_branch,
        c.use_joint_branch,
        c.use_shuffle,
        c.hybrid_as_plain3d,
    ] {
        rec.push(f as u8);
    }
    rec.extend_from_slice(&model.seed.to_le_bytes());
    rec.extend_from_slice(&model.epoch.to_le_bytes());
    rec
}

pub fn save_checkpoint(model: &U2fModel, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;

    let rec = config_record(model);
    w.write_all(&(rec.len() as u32).to_le_bytes())?;
    w.write_all(&rec)?;

    let count = model.params.len() + model.buffers.len();
    w.write_all(&(count as u32).to_le_bytes())?;
    for (name, tensor) in model.params.iter().chain(model.buffers.iter()) {
        let bytes = name.as_bytes();
        w.write_all(&(bytes.len() as u32).to_le_bytes())?;
        w.write_all(bytes)?;
        w.write_all(&(tensor.shape().len() as u32).to_le_bytes())?;
        for &e in tensor.shape() {
            w.write_all(&(e as u64).to_le_bytes())?;
        }
        for &v in tensor.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    for v in [model.norm.f1_min, model.norm.f1_max, model.norm.f2_min, model.norm.f2_max] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

struct Cursor<R> {
    inner: R,
}

impl<R: Read> Cursor<R> {
    fn bytes(&mut self, n: usize) -> Result<Vec<u8>> {
        let mut buf = vec![0u8; n];
        self.inner.read_exact(&mut buf).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                ModelError::Truncated
            } else {
                ModelError::Io(e)
            }
        })?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes(8)?.try_into().unwrap()))
    }
}

pub fn load_checkpoint(path: &Path) -> Result<U2fModel> {
    let mut r = Cursor { inner: BufReader::new(File::open(path)?) };

    let magic = r.bytes(8)?;
    if magic != MAGIC {
        return Err(ModelError::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(ModelError::VersionMismatch(version));
    }

    let rec_len = r.u32()? as usize;
    let rec = r.bytes(rec_len)?;
    if rec.len() < 9 * 4 + 5 + 8 + 4 {
        return Err(ModelError::Corrupt("config record too short".into()));
    }
    let mut off = 0usize;
    let next_u32 = |rec: &[u8], off: &mut usize| {
        let v = u32::from_le_bytes(rec[*off..*off + 4].try_into().unwrap());
        *off += 4;
        v as usize
    };
    let shape = (
        next_u32(&rec, &mut off),
        next_u32(&rec, &mut off),
        next_u32(&rec, &mut off),
        next_u32(&rec, &mut off),
    );
    let layer1 = next_u32(&rec, &mut off);
    let per_branch = next_u32(&rec, &mut off);
    let grouped = next_u32(&rec, &mut off);
    let groups = next_u32(&rec, &mut off);
    let heads = next_u32(&rec, &mut off);
    let next_flag = |rec: &[u8], off: &mut usize| {
        let v = rec[*off] != 0;
        *off += 1;
        v
    };
    let config = U2fConfig {
        input_shape: shape,
        layer1_filters: layer1,
        hybrid_filters_per_branch: per_branch,
        grouped_conv_filters: grouped,
        grouped_conv_groups: groups,
        head_outputs: heads,
        use_spatial_branch: next_flag(&rec, &mut off),
        use_temporal_branch: next_flag(&rec, &mut off),
        use_joint_branch: next_flag(&rec, &mut off),
        use_shuffle: next_flag(&rec, &mut off),
        hybrid_as_plain3d: next_flag(&rec, &mut off),
    };
    let seed = u64::from_le_bytes(rec[off..off + 8].try_into().unwrap());
    off += 8;
    let epoch = u32::from_le_bytes(rec[off..off + 4].try_into().unwrap());

    let plan = config.plan()?;
    let count = r.u32()? as usize;
    let mut params: IndexMap<String, Tensor> = IndexMap::new();
    let mut buffers: IndexMap<String, Tensor> = IndexMap::new();
    for _ in 0..count {
        let name_len = r.u32()? as usize;
        let name = String::from_utf8(r.bytes(name_len)?)
            .map_err(|_| ModelError::Corrupt("tensor name is not UTF-8".into()))?;
        let rank = r.u32()? as usize;
        if rank > 8 {
            return Err(ModelError::Corrupt(format!("implausible rank {rank}")));
        }
        let mut extents = Vec::with_capacity(rank);
        for _ in 0..rank {
            extents.push(r.u64()? as usize);
        }
        let n: usize = extents.iter().product();
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(r.f64()?);
        }
        let tensor = Tensor::from_vec(&extents, data)
            .map_err(|e| ModelError::Corrupt(format!("tensor {name}: {e}")))?;
        if name.ends_with(".running_mean") || name.ends_with(".running_var") {
            buffers.insert(name, tensor);
        } else {
            params.insert(name, tensor);
        }
    }
    let norm = TargetNorm {
        f1_min: r.f64()?,
        f1_max: r.f64()?,
        f2_min: r.f64()?,
        f2_max: r.f64()?,
    };
    norm.validate()?;

    // running variance must stay strictly positive
    for (name, t) in &buffers {
        if name.ends_with(".running_var") && t.data().iter().any(|&v| v <= 0.0) {
            return Err(ModelError::Corrupt(format!("non-positive running variance in {name}")));
        }
    }

    let reference = U2fModel::build(config, seed)?;
    if reference.params.len() != params.len() || reference.buffers.len() != buffers.len() {
        return Err(ModelError::Corrupt("tensor set does not match config".into()));
    }
    for (name, t) in reference.params.iter() {
        let loaded = params
            .get(name)
            .ok_or_else(|| ModelError::Corrupt(format!("missing parameter {name}")))?;
        if loaded.shape() != t.shape() {
            return Err(ModelError::Corrupt(format!("parameter {name} has wrong shape")));
        }
    }

    // preserve canonical ordering
    let mut ordered_params = IndexMap::with_capacity(params.len());
    for name in reference.params.keys() {
        ordered_params.insert(name.clone(), params.shift_remove(name).unwrap());
    }
    let mut ordered_buffers = IndexMap::with_capacity(buffers.len());
    for name in reference.buffers.keys() {
        let t = buffers
            .shift_remove(name)
            .ok_or_else(|| ModelError::Corrupt(format!("missing buffer {name}")))?;
        ordered_buffers.insert(name.clone(), t);
    }

    Ok(U2fModel {
        config,
        plan,
        params: ordered_params,
        buffers: ordered_buffers,
        norm,
        seed,
        epoch,
    })
}
