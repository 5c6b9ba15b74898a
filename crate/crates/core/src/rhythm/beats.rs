use serde::{Deserialize, Serialize};

use super::{RhythmError, RhythmParams};
use crate::features::OnsetEnvelope;
use crate::scalar::Real;

pub const TEMPO_LIMITS: (f64, f64) = (40.0, 240.0);

/// Beat times in seconds plus the global tempo they were tracked at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeatGrid {
    beat_times: Vec<f64>,
    tempo_bpm: f64,
}

impl BeatGrid {
    pub fn new(beat_times: Vec<f64>, tempo_bpm: f64) -> Result<Self, RhythmError> {
        if !(TEMPO_LIMITS.0..=TEMPO_LIMITS.1).contains(&tempo_bpm) {
            return Err(RhythmError::InvalidGrid(format!(
                "tempo {tempo_bpm} outside [{}, {}] BPM",
                TEMPO_LIMITS.0, TEMPO_LIMITS.1
            )));
        }
        if beat_times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(RhythmError::InvalidGrid("beat times must be finite and non-negative".into()));
        }
        if beat_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(RhythmError::InvalidGrid("beat times must be strictly increasing".into()));
        }
        Ok(Self { beat_times, tempo_bpm })
    }

    pub fn beat_times(&self) -> &[f64] {
        &self.beat_times
    }

    pub fn tempo_bpm(&self) -> f64 {
        self.tempo_bpm
    }

    pub fn len(&self) -> usize {
        self.beat_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beat_times.is_empty()
    }
}

/// Onset strength scaled to unit standard deviation and lightly smoothed
/// with a Gaussian of width `period / 32` frames.
fn local_score(env: &[f64], period: f64) -> Vec<f64> {
    let n = env.len() as f64;
    let mean = env.iter().sum::<f64>() / n;
    let std = (env.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
    let peak = env.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if std > 1e-9 * peak {
        std
    } else if peak > 0.0 {
        peak
    } else {
        1.0
    };
    let half = period.round() as isize;
    let kernel: Vec<f64> = (-half..=half)
        .map(|i| (-0.5 * (i as f64 * 32.0 / period).powi(2)).exp())
        .collect();
    (0..env.len() as isize)
        .map(|t| {
            kernel
                .iter()
                .enumerate()
                .filter_map(|(k, w)| {
                    let idx = t + k as isize - half;
                    (idx >= 0 && (idx as usize) < env.len()).then(|| w * env[idx as usize] / scale)
                })
                .sum()
        })
        .collect()
}

/// Dynamic-programming beat tracker.
///
/// Each frame's cumulative score is its local onset score plus the best
/// predecessor score between half and twice the beat period earlier, less
/// `tightness * ln(interval / period)^2`. The path is backtracked from the
/// best cumulative score in the final period, and leading and trailing
/// beats weaker than half the local score's RMS are dropped.
pub fn track_beats<T: Real>(
    env: &OnsetEnvelope<T>,
    tempo_bpm: f64,
    params: &RhythmParams,
) -> Result<BeatGrid, RhythmError> {
    let x: Vec<f64> = env.strengths.iter().map(|v| v.as_f64()).collect();
    let period = 60.0 / (tempo_bpm * env.frame_hop);
    if !(period >= 2.0) || x.is_empty() {
        return Err(RhythmError::InvalidGrid(format!("tempo {tempo_bpm} BPM unusable at this hop")));
    }
    let local = local_score(&x, period);
    let n = local.len();
    let d_min = (period / 2.0).round().max(1.0) as usize;
    let d_max = (2.0 * period).round() as usize;
    let penalty: Vec<f64> = (0..=d_max)
        .map(|d| -params.tightness * (d as f64 / period).ln().powi(2))
        .collect();

    let mut cum = vec![0.0; n];
    let mut back: Vec<Option<usize>> = vec![None; n];
    for t in 0..n {
        let mut best = f64::NEG_INFINITY;
        let mut link = None;
        for d in d_min..=d_max {
            let (prev, from) = if d <= t { (cum[t - d], Some(t - d)) } else { (0.0, None) };
            let cand = prev + penalty[d];
            if cand > best {
                best = cand;
                link = from;
            }
        }
        cum[t] = local[t] + best;
        back[t] = link;
    }

    let tail = n.saturating_sub(period.round() as usize);
    let mut t = (tail..n).fold(tail, |b, i| if cum[i] > cum[b] { i } else { b });
    let mut frames = vec![t];
    while let Some(p) = back[t] {
        frames.push(p);
        t = p;
    }
    frames.reverse();

    let rms = (local.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    let strong = |f: &usize| local[*f] >= 0.5 * rms;
    let first = frames.iter().position(strong);
    let last = frames.iter().rposition(strong);
    let frames = match (first, last) {
        (Some(a), Some(b)) => &frames[a..=b],
        _ => &frames[..0],
    };
    BeatGrid::new(frames.iter().map(|&f| env.time(f)).collect(), tempo_bpm)
}
