//! Music context preservation metrics for (original, edited) audio pairs.
//!
//! Signal processing is generic over [`scalar::Real`] (`f32` or `f64`);
//! event times and metric values are always `f64`.

pub mod audio;
pub mod bench;
pub mod features;
pub mod harmony;
mod matching;
pub mod melody;
pub mod metric;
pub mod rhythm;
pub mod scalar;
pub mod structure;

pub use metric::{Direction, Facet, Measure, Metric, MissingReason};

pub type AudioClipF32 = audio::AudioClip<f32>;
pub type AudioClipF64 = audio::AudioClip<f64>;
pub type ChromagramF32 = features::Chromagram<f32>;
pub type ChromagramF64 = features::Chromagram<f64>;
pub type AnalysisF32 = features::Analysis<f32>;
pub type AnalysisF64 = features::Analysis<f64>;
