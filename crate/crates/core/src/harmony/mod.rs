//! Harmony and tonality: global key with circle-of-fifths distance, triad
//! chord labels with the Major-Minor score, and chroma DTW similarity.

mod chords;
mod dtw;
mod key;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::Analysis;
use crate::metric::{Measure, MissingReason};
use crate::scalar::Real;

pub use chords::{
    estimate_chords, majmin_score, majmin_score_with, ChordLabel, ChordSegment, ChordSequence,
    CHORD_MEDIAN_FRAMES,
};
pub use dtw::{chroma_dtw_similarity, cosine_distance, dtw_similarity};
pub use key::{cof_distance, cof_distance_with, estimate_key, CofMapping, KeyEstimate, Mode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarmonyError {
    #[error("no key: every chroma frame is silent")]
    NoKey,
    #[error("chord sequences share no positive-duration span")]
    NoOverlap,
    #[error("invalid chord sequence: {0}")]
    InvalidChords(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonyParams {
    pub cof_mapping: CofMapping,
    pub majmin_partial_credit: bool,
    pub chord_median_frames: usize,
}

impl Default for HarmonyParams {
    fn default() -> Self {
        Self {
            cof_mapping: CofMapping::Relative,
            majmin_partial_credit: false,
            chord_median_frames: CHORD_MEDIAN_FRAMES,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonyScores {
    pub cof_distance: Measure,
    pub chroma_dtw_similarity: Measure,
    pub majmin_score: Measure,
    pub reference_key: Option<KeyEstimate>,
    pub edited_key: Option<KeyEstimate>,
}

/// Harmony metrics for one (reference, edited) pair of analysed clips.
pub fn eval_harmony<T: Real>(
    reference: &Analysis<T>,
    edited: &Analysis<T>,
    params: &HarmonyParams,
) -> HarmonyScores {
    let rk = estimate_key(&reference.chroma).ok();
    let ek = estimate_key(&edited.chroma).ok();
    let cof = match (&rk, &ek) {
        (Some(a), Some(b)) => Ok(cof_distance_with(a, b, params.cof_mapping)),
        _ => Err(MissingReason::NoKey),
    };
    let majmin = estimate_chords(&reference.chroma, reference.duration, params.chord_median_frames)
        .and_then(|r| {
            let e = estimate_chords(&edited.chroma, edited.duration, params.chord_median_frames)?;
            majmin_score_with(&r, &e, params.majmin_partial_credit)
        })
        .map_err(|_| MissingReason::NoOverlap);
    HarmonyScores {
        cof_distance: cof,
        chroma_dtw_similarity: Ok(chroma_dtw_similarity(&reference.chroma, &edited.chroma)),
        majmin_score: majmin,
        reference_key: rk,
        edited_key: ek,
    }
}
