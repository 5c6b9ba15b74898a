//! Frame-level analysis shared by all facets: STFT, spectral-flux onset
//! envelope, chromagram and mel-band timbre.

mod chroma;
mod onset;
mod stft;
mod timbre;

use std::fmt::Write as _;

use thiserror::Error;

use crate::audio::AudioClip;
use crate::scalar::Real;

pub use chroma::{chromagram_from_spectrogram, ChromaParams, Chromagram, PITCH_CLASS_NAMES};
pub use onset::{onset_envelope, OnsetEnvelope};
pub use stft::{stft, Spectrogram};
pub use timbre::timbre_features;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("clip has {samples} samples, need at least {needed}")]
    ClipTooShort { samples: usize, needed: usize },
    #[error("{frames} frames, need at least {needed}")]
    TooFewFrames { frames: usize, needed: usize },
    #[error("invalid analysis parameters: {0}")]
    InvalidParams(String),
}

/// Frame and threshold settings for feature extraction.
#[derive(Debug, Clone, Copy)]
pub struct FeatureParams {
    pub window: usize,
    pub hop: usize,
    pub silence_rms: f64,
    pub energy_floor: f64,
    pub timbre_bands: usize,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            window: 2048,
            hop: 512,
            silence_rms: 1e-4,
            energy_floor: 1e-10,
            timbre_bands: 20,
        }
    }
}

impl FeatureParams {
    pub fn chroma(&self) -> ChromaParams {
        ChromaParams {
            silence_rms: self.silence_rms,
            ..ChromaParams::default()
        }
    }
}

/// Computes the chromagram of a clip with the default frame settings.
pub fn chromagram<T: Real>(clip: &AudioClip<T>) -> Result<Chromagram<T>, FeatureError> {
    let p = FeatureParams::default();
    Ok(chromagram_from_spectrogram(&stft(clip, p.window, p.hop)?, &p.chroma()))
}

/// All features for one clip, computed from a single STFT pass.
#[derive(Debug, Clone)]
pub struct Analysis<T> {
    pub spectrogram: Spectrogram<T>,
    pub chroma: Chromagram<T>,
    pub onset: OnsetEnvelope<T>,
    pub timbre: Vec<Vec<T>>,
    /// Clip length in seconds.
    pub duration: f64,
}

impl<T: Real> Analysis<T> {
    pub fn new(clip: &AudioClip<T>, params: &FeatureParams) -> Result<Self, FeatureError> {
        let spectrogram = stft(clip, params.window, params.hop)?;
        let chroma = chromagram_from_spectrogram(&spectrogram, &params.chroma());
        let onset = onset_envelope(&spectrogram, params.energy_floor)?;
        let timbre = timbre_features(&spectrogram, params.timbre_bands, params.energy_floor)?;
        Ok(Self {
            spectrogram,
            chroma,
            onset,
            timbre,
            duration: clip.duration(),
        })
    }

    /// True when every frame is below the silence threshold.
    pub fn is_silent(&self) -> bool {
        (0..self.chroma.len()).all(|i| self.chroma.is_silent_frame(i))
    }
}

/// Column dump of a chromagram: `time C C# ... B`, one frame per line.
pub fn dump_chroma<T: Real>(ch: &Chromagram<T>) -> String {
    let mut out = String::from("# time");
    for name in PITCH_CLASS_NAMES {
        out.push(' ');
        out.push_str(name);
    }
    out.push('\n');
    for (i, row) in ch.frames.iter().enumerate() {
        let _ = write!(out, "{:.6}", ch.time(i));
        for v in row {
            let _ = write!(out, " {:.6}", v.as_f64());
        }
        out.push('\n');
    }
    out
}

/// Column dump of an onset envelope: `time strength`.
pub fn dump_onset<T: Real>(env: &OnsetEnvelope<T>) -> String {
    let mut out = String::from("# time strength\n");
    for (i, v) in env.strengths.iter().enumerate() {
        let _ = writeln!(out, "{:.6} {:.6}", env.time(i), v.as_f64());
    }
    out
}

/// Column dump of timbre bands: `time b0 b1 ...` at the spectrogram frame centres.
pub fn dump_timbre<T: Real>(spec: &Spectrogram<T>, timbre: &[Vec<T>]) -> String {
    let mut out = String::from("# time");
    if let Some(first) = timbre.first() {
        for b in 0..first.len() {
            let _ = write!(out, " b{b}");
        }
    }
    out.push('\n');
    for (i, row) in timbre.iter().enumerate() {
        let _ = write!(out, "{:.6}", spec.frame_center(i));
        for v in row {
            let _ = write!(out, " {:.6}", v.as_f64());
        }
        out.push('\n');
    }
    out
}
