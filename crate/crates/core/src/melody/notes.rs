use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{MelodyParams, PitchTrack};

/// Largest interval magnitude kept in a motif, in semitones.
pub const MAX_INTERVAL: i32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Note {
    pub onset: f64,
    pub duration: f64,
    pub midi: u8,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NoteSequence {
    pub notes: Vec<Note>,
}

impl NoteSequence {
    pub fn pitches(&self) -> Vec<u8> {
        self.notes.iter().map(|n| n.midi).collect()
    }

    pub fn len(&self) -> usize {
        self.notes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.notes.is_empty()
    }
}

fn hz_to_midi(f: f64) -> i32 {
    (69.0 + 12.0 * (f / 440.0).log2()).round() as i32
}

/// Groups voiced frames into notes by quantized MIDI pitch.
///
/// A note ends when the pitch changes or the unvoiced gap exceeds
/// `max_gap`. Notes shorter than `min_note` are dropped, after which
/// neighbours of equal pitch separated by at most `max_gap` are joined.
pub fn segment_notes(track: &PitchTrack, params: &MelodyParams) -> NoteSequence {
    struct Run {
        start: f64,
        last: f64,
        midi: i32,
    }
    let half = 0.5 * track.frame_hop;
    let mut runs: Vec<Run> = Vec::new();
    let mut open: Option<Run> = None;
    for f in &track.frames {
        let Some(f0) = f.f0 else { continue };
        let midi = hz_to_midi(f0);
        match open.as_mut() {
            Some(r) if r.midi == midi && f.time - r.last - track.frame_hop <= params.max_gap + 1e-9 => r.last = f.time,
            _ => {
                if let Some(r) = open.take() {
                    runs.push(r);
                }
                open = Some(Run {
                    start: f.time,
                    last: f.time,
                    midi,
                });
            }
        }
    }
    runs.extend(open);

    let mut notes: Vec<Note> = Vec::new();
    for r in runs {
        let duration = r.last - r.start + 2.0 * half;
        if duration < params.min_note || !(0..=127).contains(&r.midi) {
            continue;
        }
        let onset = (r.start - half).max(0.0);
        match notes.last_mut() {
            Some(prev)
                if i32::from(prev.midi) == r.midi && onset - (prev.onset + prev.duration) <= params.max_gap + 1e-9 =>
            {
                prev.duration = onset + duration - prev.onset;
            }
            _ => notes.push(Note {
                onset,
                duration,
                midi: r.midi as u8,
            }),
        }
    }
    NoteSequence { notes }
}

/// Set of interval 3-grams: every run of three consecutive semitone steps.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MotifSet {
    pub grams: BTreeSet<[i32; 3]>,
}

impl MotifSet {
    pub fn len(&self) -> usize {
        self.grams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }
}

pub fn motif_3grams_from_pitches(pitches: &[i32]) -> MotifSet {
    let steps: Vec<i32> = pitches
        .windows(2)
        .map(|w| (w[1] - w[0]).clamp(-MAX_INTERVAL, MAX_INTERVAL))
        .collect();
    MotifSet {
        grams: steps.windows(3).map(|g| [g[0], g[1], g[2]]).collect(),
    }
}

pub fn motif_3grams(notes: &NoteSequence) -> MotifSet {
    let p: Vec<i32> = notes.notes.iter().map(|n| i32::from(n.midi)).collect();
    motif_3grams_from_pitches(&p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MotifOverlap {
    pub jaccard: f64,
    /// `None` when the reference has no motifs.
    pub recall: Option<f64>,
}

pub fn motif_overlap(reference: &MotifSet, estimate: &MotifSet) -> MotifOverlap {
    let inter = reference.grams.intersection(&estimate.grams).count();
    let union = reference.grams.union(&estimate.grams).count();
    MotifOverlap {
        jaccard: if union == 0 { 1.0 } else { inter as f64 / union as f64 },
        recall: (!reference.is_empty()).then(|| inter as f64 / reference.len() as f64),
    }
}
