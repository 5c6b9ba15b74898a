use serde::Serialize;

use super::{BeatGrid, RhythmError};
use crate::matching::{f_measure, greedy_matches};

/// Absolute tempo difference in BPM.
pub fn delta_bpm(reference: &BeatGrid, estimate: &BeatGrid) -> f64 {
    (reference.tempo_bpm() - estimate.tempo_bpm()).abs()
}

/// F-measure of one-to-one beat matches within `window` seconds.
pub fn beat_f_measure(reference: &BeatGrid, estimate: &BeatGrid, window: f64) -> f64 {
    let m = greedy_matches(reference.beat_times(), estimate.beat_times(), window);
    f_measure(m.len(), reference.len(), estimate.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InformationGain {
    /// `raw / log2(bins)`, clamped to [0, 1].
    pub normalized: f64,
    /// `log2(bins) - H(error histogram)` in bits.
    pub raw: f64,
}

/// Beat errors relative to the local reference inter-beat interval,
/// wrapped into [-0.5, 0.5).
pub fn beat_phase_errors(reference: &[f64], estimate: &[f64]) -> Vec<f64> {
    estimate
        .iter()
        .map(|&e| {
            let k = reference.partition_point(|&r| r < e);
            let nearest = match k {
                0 => 0,
                k if k == reference.len() => k - 1,
                k if e - reference[k - 1] <= reference[k] - e => k - 1,
                k => k,
            };
            let r = reference[nearest];
            let ibi = if e >= r {
                if nearest + 1 < reference.len() {
                    reference[nearest + 1] - r
                } else {
                    r - reference[nearest - 1]
                }
            } else if nearest > 0 {
                r - reference[nearest - 1]
            } else {
                reference[1] - r
            };
            let x = (e - r) / ibi;
            (x + 0.5).rem_euclid(1.0) - 0.5
        })
        .collect()
}

/// Entropy-based gain of the phase-error histogram over a uniform one.
pub fn information_gain_from_errors(errors: &[f64], bins: usize) -> InformationGain {
    let mut hist = vec![0usize; bins];
    for &e in errors {
        let b = ((e + 0.5) * bins as f64).floor().clamp(0.0, (bins - 1) as f64) as usize;
        hist[b] += 1;
    }
    let n = errors.len() as f64;
    let entropy: f64 = hist
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    let max = (bins as f64).log2();
    let raw = max - entropy;
    InformationGain {
        normalized: (raw / max).clamp(0.0, 1.0),
        raw,
    }
}

pub fn information_gain(
    reference: &BeatGrid,
    estimate: &BeatGrid,
    bins: usize,
) -> Result<InformationGain, RhythmError> {
    if reference.len() < 2 || estimate.len() < 2 {
        return Err(RhythmError::TooFewBeats);
    }
    if bins < 2 {
        return Err(RhythmError::InvalidGrid(format!("information gain needs ≥ 2 bins, got {bins}")));
    }
    let errors = beat_phase_errors(reference.beat_times(), estimate.beat_times());
    Ok(information_gain_from_errors(&errors, bins))
}
