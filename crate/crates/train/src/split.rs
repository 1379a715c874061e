use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Result, TrainError};

/// Train/dev/test fractions with the shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub dev_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(seed: u64) -> Self {
        Self { train_fraction: 0.8, dev_fraction: 0.1, seed }
    }
}

/// Disjoint exhaustive index partition: a seeded shuffle of 0..n cut
/// at floor(train*n) and floor(dev*n); the test split takes the
/// remainder.
pub fn split_dataset(n: usize, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    if n < 10 {
        return Err(TrainError::InvalidArgument(format!("need at least 10 samples, got {n}")));
    }
    if !(spec.train_fraction > 0.0
        && spec.dev_fraction > 0.0
        && spec.train_fraction + spec.dev_fraction < 1.0)
    {
        return Err(TrainError::InvalidArgument("split fractions must be positive and sum below 1".into()));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    indices.shuffle(&mut rng);
    let n_train = (spec.train_fraction * n as f64).floor() as usize;
    let n_dev = (spec.dev_fraction * n as f64).floor() as usize;
    let dev_end = n_train + n_dev;
    Ok((
        indices[..n_train].to_vec(),
        indices[n_train..dev_end].to_vec(),
        indices[dev_end..].to_vec(),
    ))
}
