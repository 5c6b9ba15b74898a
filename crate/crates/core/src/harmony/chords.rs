use std::fmt;

use serde::{Serialize, Serializer};

use super::HarmonyError;
use crate::audio::ChordQuality;
use crate::features::{Chromagram, PITCH_CLASS_NAMES};
use crate::scalar::Real;

/// Width of the median filter applied to per-frame chord scores.
pub const CHORD_MEDIAN_FRAMES: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChordLabel {
    NoChord,
    Chord { root: u8, quality: ChordQuality },
}

impl ChordLabel {
    fn from_index(i: usize) -> Self {
        if i == 24 {
            return ChordLabel::NoChord;
        }
        ChordLabel::Chord {
            root: (i / 2) as u8,
            quality: if i.is_multiple_of(2) {
                ChordQuality::Major
            } else {
                ChordQuality::Minor
            },
        }
    }
}

impl fmt::Display for ChordLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChordLabel::NoChord => f.write_str("N"),
            ChordLabel::Chord { root, quality } => {
                let q = match quality {
                    ChordQuality::Major => "maj",
                    ChordQuality::Minor => "min",
                };
                write!(f, "{}:{q}", PITCH_CLASS_NAMES[*root as usize % 12])
            }
        }
    }
}

impl Serialize for ChordLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChordSegment {
    pub start: f64,
    pub end: f64,
    pub chord: ChordLabel,
}

/// Sorted, non-overlapping chord intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChordSequence {
    segments: Vec<ChordSegment>,
}

impl ChordSequence {
    /// Validates ordering; adjacent segments must touch or leave no overlap.
    pub fn new(segments: Vec<ChordSegment>) -> Result<Self, HarmonyError> {
        for (i, s) in segments.iter().enumerate() {
            if !(s.start.is_finite() && s.end.is_finite() && s.start < s.end && s.start >= 0.0) {
                return Err(HarmonyError::InvalidChords(format!(
                    "segment {i} has bad bounds [{}, {})",
                    s.start, s.end
                )));
            }
            if i > 0 && s.start < segments[i - 1].end {
                return Err(HarmonyError::InvalidChords(format!("segment {i} overlaps its predecessor")));
            }
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[ChordSegment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

fn templates() -> [[f64; 12]; 24] {
    let norm = 1.0 / 3f64.sqrt();
    std::array::from_fn(|i| {
        let mut t = [0.0; 12];
        if let ChordLabel::Chord { root, quality } = ChordLabel::from_index(i) {
            for iv in quality.intervals() {
                t[(root as usize + iv as usize) % 12] = norm;
            }
        }
        t
    })
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median filter along time for each column, window truncated at the edges.
fn median_filter(scores: &[[f64; 25]], width: usize) -> Vec<[f64; 25]> {
    let half = width / 2;
    let n = scores.len();
    let mut buf = Vec::with_capacity(width);
    (0..n)
        .map(|t| {
            let (lo, hi) = (t.saturating_sub(half), (t + half + 1).min(n));
            std::array::from_fn(|c| {
                buf.clear();
                buf.extend(scores[lo..hi].iter().map(|row| row[c]));
                median(&mut buf)
            })
        })
        .collect()
}

/// Template-matching chord recognition over the whole clip `[0, duration)`.
///
/// Scores for the 24 triads and no-chord are median filtered over
/// `median_frames` frames before the per-frame argmax; interval edges sit
/// halfway between neighbouring frame centres.
pub fn estimate_chords<T: Real>(
    ch: &Chromagram<T>,
    duration: f64,
    median_frames: usize,
) -> Result<ChordSequence, HarmonyError> {
    if ch.is_empty() || !(duration > 0.0) {
        return Err(HarmonyError::InvalidChords("empty chromagram".into()));
    }
    let templates = templates();
    let raw: Vec<[f64; 25]> = (0..ch.len())
        .map(|i| {
            let row = ch.frames[i].map(|v| v.as_f64());
            let silent = ch.is_silent_frame(i);
            std::array::from_fn(|c| match c {
                24 => f64::from(u8::from(silent)),
                _ => templates[c].iter().zip(&row).map(|(a, b)| a * b).sum(),
            })
        })
        .collect();
    let filtered = median_filter(&raw, median_frames.max(1));
    let labels: Vec<ChordLabel> = filtered
        .iter()
        .map(|s| {
            let mut best = 0;
            for c in 1..25 {
                if s[c] > s[best] {
                    best = c;
                }
            }
            ChordLabel::from_index(best)
        })
        .collect();

    let mut segments: Vec<ChordSegment> = Vec::new();
    for (i, &chord) in labels.iter().enumerate() {
        let edge = if i == 0 {
            0.0
        } else {
            (0.5 * (ch.time(i - 1) + ch.time(i))).min(duration)
        };
        match segments.last_mut() {
            Some(last) if last.chord == chord => {}
            Some(last) => {
                last.end = edge;
                segments.push(ChordSegment {
                    start: edge,
                    end: duration,
                    chord,
                });
            }
            None => segments.push(ChordSegment {
                start: 0.0,
                end: duration,
                chord,
            }),
        }
    }
    segments.retain(|s| s.end > s.start);
    ChordSequence::new(segments)
}

/// Duration-weighted agreement of two chord sequences over their common span.
///
/// An instant scores 1 when root and quality agree or both are no-chord.
/// With `partial_credit`, a matching root with the other quality scores 0.5.
pub fn majmin_score_with(
    reference: &ChordSequence,
    estimate: &ChordSequence,
    partial_credit: bool,
) -> Result<f64, HarmonyError> {
    let (a, b) = (reference.segments(), estimate.segments());
    let (mut i, mut j) = (0, 0);
    let (mut total, mut agree) = (0.0, 0.0);
    while i < a.len() && j < b.len() {
        let lo = a[i].start.max(b[j].start);
        let hi = a[i].end.min(b[j].end);
        if hi > lo {
            let w = hi - lo;
            total += w;
            agree += w * match (a[i].chord, b[j].chord) {
                (x, y) if x == y => 1.0,
                (ChordLabel::Chord { root: r1, .. }, ChordLabel::Chord { root: r2, .. })
                    if partial_credit && r1 == r2 =>
                {
                    0.5
                }
                _ => 0.0,
            };
        }
        if a[i].end <= b[j].end {
            i += 1;
        } else {
            j += 1;
        }
    }
    if total <= 0.0 {
        return Err(HarmonyError::NoOverlap);
    }
    Ok((agree / total).clamp(0.0, 1.0))
}

/// Binary Major-Minor score.
pub fn majmin_score(reference: &ChordSequence, estimate: &ChordSequence) -> Result<f64, HarmonyError> {
    majmin_score_with(reference, estimate, false)
}
