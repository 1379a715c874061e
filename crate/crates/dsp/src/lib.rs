//! Classical speech DSP for the ultrasound-to-formant pipeline.
//!
//! One direction extracts (f1, f2) formant trajectories from audio via
//! the autocorrelation LPC method; the other synthesizes vowel audio
//! from a trajectory with a cascade of second-order resonators.

mod error;
mod formant;
pub mod klatt;
mod lpc;
mod roots;
mod waveform;

pub use error::DspError;
pub use formant::{
    extract_formant_trajectory, roots_to_formants, ExtractConfig, FormantEstimate,
    FormantTrajectory,
};
pub use klatt::{
    glottal_source, resonator_coefficients, synthesize_vowel_trajectory, Resonator, SynthConfig,
};
pub use lpc::{autocorrelation, hamming_window, levinson_durbin, pre_emphasis, LpcFrame};
pub use roots::polynomial_roots;
pub use waveform::{resample, Waveform};

pub type Result<T> = std::result::Result<T, DspError>;
