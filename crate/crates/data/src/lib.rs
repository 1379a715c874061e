//! Synthetic clip generation, frame preprocessing, and the dataset,
//! WAV and PGM file formats.

mod clip;
mod dataset;
mod error;
mod pgm;
mod preprocess;
mod synth;
mod wav;

pub use clip::{VideoClip, CLIP_LEN, FRAMES, HEIGHT, WIDTH};
pub use dataset::{
    file_size, generate_dataset, generate_dataset_in_memory, read_dataset, write_dataset,
    ClipRecord, Dataset, DatasetReader, LABELS_PER_CLIP, MAGIC, RECORD_BYTES,
};
pub use error::{DataError, Result};
pub use pgm::write_pgm;
pub use preprocess::{preprocess_frames, CropBox, RawFrame};
pub use synth::{generate_synthetic_clip, labels_for, SyntheticParams, MAX_STEP};
pub use wav::{read_wav, write_wav};
