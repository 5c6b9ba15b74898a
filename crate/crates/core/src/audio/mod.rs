//! Decoded audio clips, WAV input/output, resampling and synthetic fixtures.

mod fixture;
mod resample;
mod wav;

use std::path::PathBuf;

use thiserror::Error;

use crate::scalar::Real;

pub use fixture::{synth_fixture, ChordQuality, FixtureSpec, Triad, BPM_RANGE, FREQ_RANGE};
pub use resample::resample;
pub use wav::{load_wav, write_wav};

/// Internal analysis rate. All metrics run on mono audio at this rate.
pub const ANALYSIS_RATE: u32 = 22_050;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed WAV file: {reason}")]
    Malformed { path: PathBuf, reason: String },
    #[error("{path}: unsupported encoding: {detail}")]
    UnsupportedEncoding { path: PathBuf, detail: String },
    #[error("{path}: file contains no audio frames")]
    Empty { path: PathBuf },
    #[error("cannot write {path}: {reason}")]
    Write { path: PathBuf, reason: String },
    #[error("invalid clip: {0}")]
    InvalidClip(String),
    #[error("invalid fixture: {0}")]
    InvalidFixture(String),
}

/// Mono PCM audio with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip<T> {
    samples: Vec<T>,
    sample_rate: u32,
    source_id: String,
}

impl<T: Real> AudioClip<T> {
    /// Builds a clip, rejecting a zero sample rate or non-finite samples.
    pub fn new(
        samples: Vec<T>,
        sample_rate: u32,
        source_id: impl Into<String>,
    ) -> Result<Self, AudioError> {
        if sample_rate == 0 {
            return Err(AudioError::InvalidClip("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(AudioError::InvalidClip(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate,
            source_id: source_id.into(),
        })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    /// Copy of the clip multiplied by `gain`.
    pub fn scaled(&self, gain: T) -> Self {
        Self {
            samples: self.samples.iter().map(|&s| s * gain).collect(),
            sample_rate: self.sample_rate,
            source_id: self.source_id.clone(),
        }
    }

    /// Copy of the first `n` samples (or the whole clip if shorter).
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            samples: self.samples[..n.min(self.samples.len())].to_vec(),
            sample_rate: self.sample_rate,
            source_id: self.source_id.clone(),
        }
    }

    pub fn with_source_id(mut self, source_id: impl Into<String>) -> Self {
        self.source_id = source_id.into();
        self
    }

    /// Converts the sample type, e.g. `f64` to `f32`.
    pub fn cast<U: Real>(&self) -> AudioClip<U> {
        AudioClip {
            samples: self.samples.iter().map(|s| U::lit(s.as_f64())).collect(),
            sample_rate: self.sample_rate,
            source_id: self.source_id.clone(),
        }
    }
}
