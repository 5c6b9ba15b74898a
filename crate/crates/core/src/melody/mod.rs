//! Melodic content: YIN pitch tracking, voicing recall, note segmentation
//! and interval 3-gram motif overlap.

mod notes;
mod pitch;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;
use crate::metric::{Measure, MissingReason};
use crate::scalar::Real;

pub use notes::{
    motif_3grams, motif_3grams_from_pitches, motif_overlap, segment_notes, MotifOverlap, MotifSet, Note,
    NoteSequence, MAX_INTERVAL,
};
pub use pitch::{track_pitch, voicing_recall, voicing_recall_with, PitchFrame, PitchTrack};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MelodyParams {
    pub yin_threshold: f64,
    pub yin_window: usize,
    pub yin_hop: usize,
    pub min_hz: f64,
    pub max_hz: f64,
    pub silence_rms: f64,
    /// Unvoiced gap that ends a note, in seconds.
    pub max_gap: f64,
    /// Shortest note kept, in seconds.
    pub min_note: f64,
    /// Tolerance of the pitch-gated voicing recall, in cents.
    pub pitch_tolerance_cents: f64,
}

impl Default for MelodyParams {
    fn default() -> Self {
        Self {
            yin_threshold: 0.15,
            yin_window: 1024,
            yin_hop: 512,
            min_hz: 55.0,
            max_hz: 1760.0,
            silence_rms: 1e-4,
            max_gap: 0.1,
            min_note: 0.08,
            pitch_tolerance_cents: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MelodyScores {
    pub voicing_recall: Measure,
    /// Voicing recall that also requires the pitch to agree within tolerance.
    pub voicing_recall_pitch: Measure,
    pub motif_jaccard: Measure,
    pub motif_recall: Measure,
    pub reference_notes: Option<NoteSequence>,
    pub edited_notes: Option<NoteSequence>,
}

/// Melody metrics with the reference clip's pitch track as ground truth.
pub fn eval_melody<T: Real>(reference: &AudioClip<T>, edited: &AudioClip<T>, params: &MelodyParams) -> MelodyScores {
    let rt = track_pitch(reference, params);
    let et = track_pitch(edited, params);
    if rt.is_silent() || et.is_silent() {
        let m = Err(MissingReason::NoSignal);
        return MelodyScores {
            voicing_recall: m,
            voicing_recall_pitch: m,
            motif_jaccard: m,
            motif_recall: m,
            reference_notes: None,
            edited_notes: None,
        };
    }
    let unvoiced = MissingReason::RefUnvoiced;
    let rn = segment_notes(&rt, params);
    let en = segment_notes(&et, params);
    let overlap = motif_overlap(&motif_3grams(&rn), &motif_3grams(&en));
    MelodyScores {
        voicing_recall: voicing_recall(&rt, &et).ok_or(unvoiced),
        voicing_recall_pitch: voicing_recall_with(&rt, &et, Some(params.pitch_tolerance_cents)).ok_or(unvoiced),
        motif_jaccard: Ok(overlap.jaccard),
        motif_recall: overlap.recall.ok_or(MissingReason::RefNoMotifs),
        reference_notes: Some(rn),
        edited_notes: Some(en),
    }
}

/// `onset duration midi` rows, one per note.
pub fn dump_notes(notes: &NoteSequence) -> String {
    let mut out = String::new();
    for n in &notes.notes {
        let _ = writeln!(out, "{:.6} {:.6} {}", n.onset, n.duration, n.midi);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{synth_fixture, FixtureSpec};
    use proptest::prelude::*;

    const SR: u32 = 22_050;

    fn clip(spec: &FixtureSpec) -> AudioClip<f64> {
        synth_fixture(spec, SR).unwrap()
    }

    fn sine(freq: f64, duration: f64) -> FixtureSpec {
        FixtureSpec::Sine {
            freq,
            duration,
            amplitude: 0.5,
        }
    }

    fn melody(pitches: &[f64]) -> FixtureSpec {
        FixtureSpec::Notes {
            notes: pitches.iter().map(|&p| (p, 0.3)).collect(),
            amplitude: 0.5,
        }
    }

    const TUNE: [f64; 9] = [60.0, 62.0, 64.0, 60.0, 67.0, 65.0, 64.0, 62.0, 60.0];

    #[test]
    fn sines_track_within_two_hz() {
        let p = MelodyParams::default();
        for f in [110.0, 220.0, 440.0, 880.0] {
            let t = track_pitch(&clip(&sine(f, 2.0)), &p);
            let interior = &t.frames[2..t.len() - 2];
            let good = interior.iter().filter(|fr| fr.f0.is_some_and(|v| (v - f).abs() <= 2.0)).count();
            assert!(good as f64 >= 0.95 * interior.len() as f64, "{f} Hz: {good}/{}", interior.len());
        }
    }

    #[test]
    fn f32_tracks_like_f64() {
        let p = MelodyParams::default();
        let a = track_pitch(&clip(&sine(330.0, 1.0)), &p);
        let b = track_pitch(&clip(&sine(330.0, 1.0)).cast::<f32>(), &p);
        for (x, y) in a.frames.iter().zip(&b.frames) {
            match (x.f0, y.f0) {
                (Some(u), Some(v)) => assert!((u - v).abs() < 0.05),
                (None, None) => {}
                _ => panic!("voicing differs at {}", x.time),
            }
        }
    }

    #[test]
    fn noise_and_silence_are_unvoiced() {
        let p = MelodyParams::default();
        let noise = track_pitch(
            &clip(&FixtureSpec::Noise {
                duration: 2.0,
                amplitude: 0.5,
                seed: 9,
                band: None,
            }),
            &p,
        );
        assert!(noise.voiced_count() as f64 <= 0.1 * noise.len() as f64);
        let silence = track_pitch(&clip(&FixtureSpec::Silence { duration: 1.0 }), &p);
        assert_eq!(silence.voiced_count(), 0);
        assert!(silence.is_silent());
    }

    #[test]
    fn steps_become_notes() {
        let p = MelodyParams::default();
        let n = segment_notes(
            &track_pitch(
                &clip(&FixtureSpec::Notes {
                    notes: vec![(60.0, 0.5), (64.0, 0.5), (67.0, 0.5)],
                    amplitude: 0.5,
                }),
                &p,
            ),
            &p,
        );
        assert_eq!(n.pitches(), vec![60, 64, 67]);
        let n = segment_notes(&track_pitch(&clip(&sine(440.0, 2.0)), &p), &p);
        assert_eq!(n.pitches(), vec![69]);
        assert!(n.notes[0].duration > 1.8);
    }

    #[test]
    fn vibrato_stays_one_note() {
        let p = MelodyParams::default();
        let v = FixtureSpec::Vibrato {
            freq: 440.0,
            depth_cents: 40.0,
            rate_hz: 5.0,
            duration: 2.0,
            amplitude: 0.5,
        };
        assert_eq!(segment_notes(&track_pitch(&clip(&v), &p), &p).pitches(), vec![69]);
    }

    #[test]
    fn resynthesized_notes_are_stable() {
        let p = MelodyParams::default();
        let first = segment_notes(&track_pitch(&clip(&melody(&TUNE)), &p), &p);
        let again = FixtureSpec::Notes {
            notes: first.notes.iter().map(|n| (f64::from(n.midi), n.duration)).collect(),
            amplitude: 0.5,
        };
        let second = segment_notes(&track_pitch(&clip(&again), &p), &p);
        assert_eq!(first.pitches(), second.pitches());
    }

    #[test]
    fn gaps_and_short_blips() {
        let track = |voicing: &[Option<f64>]| PitchTrack {
            frames: voicing
                .iter()
                .enumerate()
                .map(|(i, &f0)| PitchFrame {
                    time: i as f64 * 0.02,
                    f0,
                    confidence: 1.0,
                })
                .collect(),
            frame_hop: 0.02,
            audible_frames: voicing.len(),
        };
        let a = Some(440.0);
        let c = Some(261.63);
        let p = MelodyParams::default();
        // 3 unvoiced frames (60 ms) keep the note; 6 (120 ms) split it.
        let short_gap = [vec![a; 10], vec![None; 3], vec![a; 10]].concat();
        assert_eq!(segment_notes(&track(&short_gap), &p).len(), 1);
        let long_gap = [vec![a; 10], vec![None; 6], vec![a; 10]].concat();
        assert_eq!(segment_notes(&track(&long_gap), &p).len(), 2);
        // A 2-frame (40 ms) blip is dropped and its neighbours rejoin.
        let blip = [vec![a; 10], vec![c; 2], vec![a; 10]].concat();
        let n = segment_notes(&track(&blip), &p);
        assert_eq!(n.pitches(), vec![69]);
    }

    #[test]
    fn voicing_recall_counts() {
        let mk = |voiced: &[bool]| PitchTrack {
            frames: voiced
                .iter()
                .enumerate()
                .map(|(i, &v)| PitchFrame {
                    time: i as f64 * 0.02,
                    f0: v.then_some(220.0),
                    confidence: 1.0,
                })
                .collect(),
            frame_hop: 0.02,
            audible_frames: voiced.len(),
        };
        let r = mk(&[[true; 10].as_slice(), &[false; 5]].concat());
        let e = mk(&[[true; 7].as_slice(), &[false; 3], &[true; 5]].concat());
        assert_eq!(voicing_recall(&r, &e), Some(0.7));
        assert_eq!(voicing_recall(&r, &r), Some(1.0));
        assert_eq!(voicing_recall(&r, &mk(&[false; 15])), Some(0.0));
        assert_eq!(voicing_recall(&mk(&[false; 15]), &r), None);
    }

    #[test]
    fn motif_examples() {
        let g = motif_3grams_from_pitches(&[60, 64, 67, 72]);
        assert_eq!(g.grams.iter().copied().collect::<Vec<_>>(), vec![[4, 3, 5]]);
        assert!(motif_3grams_from_pitches(&[60, 64, 67]).is_empty());
        let g = motif_3grams_from_pitches(&[60, 62, 64, 66, 68]);
        assert_eq!(g.len(), 1);
        assert_eq!(motif_3grams_from_pitches(&[0, 40, 41, 0]).grams.iter().next(), Some(&[24, 1, -24]));

        let set = |v: &[[i32; 3]]| MotifSet { grams: v.iter().copied().collect() };
        let (a, b, c, d) = ([1, 1, 1], [2, 2, 2], [3, 3, 3], [4, 4, 4]);
        let o = motif_overlap(&set(&[a, b, c]), &set(&[b, c, d]));
        assert_eq!(o.jaccard, 0.5);
        assert!((o.recall.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let o = motif_overlap(&set(&[a]), &set(&[d]));
        assert_eq!((o.jaccard, o.recall), (0.0, Some(0.0)));
        let o = motif_overlap(&set(&[]), &set(&[]));
        assert_eq!((o.jaccard, o.recall), (1.0, None));
    }

    #[test]
    fn eval_identity_transposition_and_retrograde() {
        let p = MelodyParams::default();
        let tune = clip(&melody(&TUNE));
        let s = eval_melody(&tune, &tune, &p);
        assert_eq!((s.voicing_recall, s.motif_jaccard, s.motif_recall), (Ok(1.0), Ok(1.0), Ok(1.0)));

        let up = clip(&melody(&TUNE).transposed(5.0));
        let s = eval_melody(&tune, &up, &p);
        assert_eq!(s.motif_jaccard, Ok(1.0));
        assert!(s.voicing_recall.unwrap() >= 0.95);
        assert!(s.voicing_recall_pitch.unwrap() < 0.1);

        let mut rev = TUNE;
        rev.reverse();
        let s = eval_melody(&tune, &clip(&melody(&rev)), &p);
        let expected = motif_overlap(
            &motif_3grams_from_pitches(&TUNE.map(|v| v as i32)),
            &motif_3grams_from_pitches(&rev.map(|v| v as i32)),
        );
        assert!(expected.jaccard < 1.0);
        assert_eq!(s.motif_jaccard, Ok(expected.jaccard));
    }

    #[test]
    fn silent_edit_is_no_signal() {
        let p = MelodyParams::default();
        let s = eval_melody(&clip(&melody(&TUNE)), &clip(&FixtureSpec::Silence { duration: 2.7 }), &p);
        assert_eq!(s.voicing_recall, Err(MissingReason::NoSignal));
    }

    proptest! {
        #[test]
        fn motifs_are_transposition_invariant(p in prop::collection::vec(20i32..100, 0..30), n in -20i32..20) {
            let t: Vec<i32> = p.iter().map(|v| v + n).collect();
            prop_assert_eq!(motif_3grams_from_pitches(&p), motif_3grams_from_pitches(&t));
        }

        #[test]
        fn overlap_set_identities(a in prop::collection::btree_set(prop::array::uniform3(-3i32..3), 0..20),
                                  b in prop::collection::btree_set(prop::array::uniform3(-3i32..3), 0..20)) {
            let (ra, rb) = (MotifSet { grams: a.clone() }, MotifSet { grams: b.clone() });
            let o = motif_overlap(&ra, &rb);
            prop_assert!(o.jaccard <= 1.0);
            if let Some(r) = o.recall {
                prop_assert!(r <= 1.0);
                let union = a.union(&b).count() as f64;
                prop_assert!(o.jaccard <= r * a.len() as f64 / union + 1e-12);
            }
        }
    }
}
