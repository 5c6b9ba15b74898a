//! Rhythm and meter: tempo, beat tracking, ΔBPM, beat F-measure and
//! information gain.

mod beats;
mod metrics;
mod tempo;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::Analysis;
use crate::metric::{Measure, MissingReason};
use crate::scalar::Real;

pub use beats::{track_beats, BeatGrid, TEMPO_LIMITS};
pub use metrics::{
    beat_f_measure, beat_phase_errors, delta_bpm, information_gain, information_gain_from_errors,
    InformationGain,
};
pub use tempo::{estimate_tempo, MIN_TEMPO_SECONDS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RhythmError {
    #[error("no tempo: onset envelope is flat")]
    NoTempo,
    #[error("envelope covers {seconds:.2} s, tempo estimation needs {needed} s")]
    TooShort { seconds: f64, needed: f64 },
    #[error("fewer than two beats")]
    TooFewBeats,
    #[error("invalid beat grid: {0}")]
    InvalidGrid(String),
}

impl RhythmError {
    pub fn missing_reason(&self) -> MissingReason {
        match self {
            RhythmError::NoTempo => MissingReason::NoTempo,
            RhythmError::TooShort { .. } => MissingReason::TooShort,
            RhythmError::TooFewBeats | RhythmError::InvalidGrid(_) => MissingReason::TooFewBeats,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhythmParams {
    pub min_bpm: f64,
    pub max_bpm: f64,
    pub prior_center_bpm: f64,
    /// Standard deviation of the log2-tempo prior, in octaves.
    pub prior_octaves: f64,
    /// Weight of the interval penalty in the beat tracker.
    pub tightness: f64,
    pub beat_window: f64,
    pub ig_bins: usize,
}

impl Default for RhythmParams {
    fn default() -> Self {
        Self {
            min_bpm: 60.0,
            max_bpm: 200.0,
            prior_center_bpm: 120.0,
            prior_octaves: 1.0,
            tightness: 100.0,
            beat_window: 0.07,
            ig_bins: 41,
        }
    }
}

/// Tempo and beats for one analysed clip.
pub fn beat_grid<T: Real>(a: &Analysis<T>, params: &RhythmParams) -> Result<BeatGrid, RhythmError> {
    let tempo = estimate_tempo(&a.onset, params)?;
    track_beats(&a.onset, tempo, params)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhythmScores {
    pub delta_bpm: Measure,
    pub beat_f_measure: Measure,
    pub information_gain: Measure,
    pub information_gain_raw: Measure,
    pub reference_beats: Option<BeatGrid>,
    pub edited_beats: Option<BeatGrid>,
}

impl RhythmScores {
    fn missing(reason: MissingReason) -> Self {
        Self {
            delta_bpm: Err(reason),
            beat_f_measure: Err(reason),
            information_gain: Err(reason),
            information_gain_raw: Err(reason),
            reference_beats: None,
            edited_beats: None,
        }
    }
}

/// Rhythm metrics with the reference clip's beats as ground truth.
pub fn eval_rhythm<T: Real>(reference: &Analysis<T>, edited: &Analysis<T>, params: &RhythmParams) -> RhythmScores {
    if reference.is_silent() || edited.is_silent() {
        return RhythmScores::missing(MissingReason::NoSignal);
    }
    let (r, e) = match (beat_grid(reference, params), beat_grid(edited, params)) {
        (Ok(r), Ok(e)) => (r, e),
        (Err(err), _) | (_, Err(err)) => return RhythmScores::missing(err.missing_reason()),
    };
    let ig = information_gain(&r, &e, params.ig_bins).map_err(|err| err.missing_reason());
    RhythmScores {
        delta_bpm: Ok(delta_bpm(&r, &e)),
        beat_f_measure: Ok(beat_f_measure(&r, &e, params.beat_window)),
        information_gain: ig.map(|g| g.normalized),
        information_gain_raw: ig.map(|g| g.raw),
        reference_beats: Some(r),
        edited_beats: Some(e),
    }
}

/// Beat times, one per line, six decimals.
pub fn dump_beats(grid: &BeatGrid) -> String {
    let mut out = String::new();
    for t in grid.beat_times() {
        let _ = writeln!(out, "{t:.6}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{synth_fixture, AudioClip, FixtureSpec};
    use crate::features::{FeatureParams, OnsetEnvelope};
    use proptest::prelude::*;

    const SR: u32 = 22_050;

    fn clicks(bpm: f64, duration: f64, offset: f64, dropped: Vec<usize>) -> FixtureSpec {
        FixtureSpec::Clicks {
            bpm,
            duration,
            offset,
            amplitude: 0.8,
            dropped,
        }
    }

    fn analyse(spec: &FixtureSpec) -> Analysis<f64> {
        let clip: AudioClip<f64> = synth_fixture(spec, SR).unwrap();
        Analysis::new(&clip, &FeatureParams::default()).unwrap()
    }

    fn click_times(bpm: f64, duration: f64, offset: f64) -> Vec<f64> {
        (0..)
            .map(|k| offset + k as f64 * 60.0 / bpm)
            .take_while(|&t| t < duration - 0.01)
            .collect()
    }

    fn grid(times: &[f64]) -> BeatGrid {
        BeatGrid::new(times.to_vec(), 120.0).unwrap()
    }

    #[test]
    fn click_tracks_across_tempi() {
        let p = RhythmParams::default();
        for bpm in [60.0, 90.0, 120.0, 150.0, 180.0] {
            let a = analyse(&clicks(bpm, 16.0, 0.25, vec![]));
            let g = beat_grid(&a, &p).unwrap();
            assert!((g.tempo_bpm() - bpm).abs() <= 1.0, "{bpm}: tempo {}", g.tempo_bpm());
            let truth = grid(&click_times(bpm, 16.0, 0.25));
            let f = beat_f_measure(&truth, &g, 0.07);
            assert!(f >= 0.95, "{bpm}: F {f} beats {:?}", g.beat_times());
        }
    }

    #[test]
    fn dropped_click_is_bridged() {
        let p = RhythmParams::default();
        let a = analyse(&clicks(120.0, 12.0, 0.25, vec![10]));
        let g = beat_grid(&a, &p).unwrap();
        let missing = 0.25 + 10.0 * 0.5;
        assert!(g.beat_times().iter().any(|t| (t - missing).abs() <= 0.07));
        for w in g.beat_times().windows(2) {
            assert!((w[1] - w[0] - 0.5).abs() < 0.05, "{:?}", w);
        }
    }

    #[test]
    fn constant_envelope_gives_exact_period() {
        let env = OnsetEnvelope {
            strengths: vec![1.0f64; 600],
            frame_hop: 512.0 / 22_050.0,
            offset: 0.0,
        };
        let p = RhythmParams::default();
        assert_eq!(estimate_tempo(&env, &p), Err(RhythmError::NoTempo));
        let g = track_beats(&env, 120.0, &p).unwrap();
        let period = 0.5;
        assert!(g.len() > 20);
        for w in g.beat_times().windows(2) {
            assert!((w[1] - w[0] - period).abs() <= env.frame_hop + 1e-9);
        }
    }

    #[test]
    fn silence_has_no_tempo() {
        let a = analyse(&FixtureSpec::Silence { duration: 6.0 });
        assert_eq!(estimate_tempo(&a.onset, &RhythmParams::default()), Err(RhythmError::NoTempo));
        let s = eval_rhythm(&a, &a, &RhythmParams::default());
        assert_eq!(s.delta_bpm, Err(MissingReason::NoSignal));
    }

    #[test]
    fn short_envelope_is_rejected() {
        let a = analyse(&clicks(120.0, 3.0, 0.25, vec![]));
        assert!(matches!(
            estimate_tempo(&a.onset, &RhythmParams::default()),
            Err(RhythmError::TooShort { .. })
        ));
    }

    #[test]
    fn tempo_differences() {
        let p = RhythmParams::default();
        let g120 = beat_grid(&analyse(&clicks(120.0, 12.0, 0.25, vec![])), &p).unwrap();
        let g100 = beat_grid(&analyse(&clicks(100.0, 12.0, 0.25, vec![])), &p).unwrap();
        let g90 = beat_grid(&analyse(&clicks(90.0, 12.0, 0.25, vec![])), &p).unwrap();
        let shifted = beat_grid(&analyse(&clicks(120.0, 12.0, 0.37, vec![])), &p).unwrap();
        assert!((delta_bpm(&g120, &g100) - 20.0).abs() <= 2.0);
        assert!((delta_bpm(&g120, &g90) - 30.0).abs() <= 2.0);
        assert!(delta_bpm(&g120, &shifted) <= 1.0);
        assert_eq!(delta_bpm(&g120, &g120), 0.0);
    }

    #[test]
    fn identity_and_quiet_noise() {
        let p = RhythmParams::default();
        let base = clicks(120.0, 12.0, 0.25, vec![]);
        let a = analyse(&base);
        let s = eval_rhythm(&a, &a, &p);
        assert_eq!((s.delta_bpm, s.beat_f_measure, s.information_gain), (Ok(0.0), Ok(1.0), Ok(1.0)));
        let noisy = analyse(&FixtureSpec::Mix(vec![
            base,
            FixtureSpec::Noise {
                duration: 12.0,
                amplitude: 0.8 * 10f64.powf(-30.0 / 20.0),
                seed: 3,
                band: None,
            },
        ]));
        let s = eval_rhythm(&a, &noisy, &p);
        assert!(s.beat_f_measure.unwrap() >= 0.9, "{:?}", s.beat_f_measure);
    }

    #[test]
    fn f_measure_examples() {
        let r = grid(&[1.0, 2.0, 3.0, 4.0]);
        let e = grid(&[1.0, 2.05, 3.0, 4.5]);
        assert!((beat_f_measure(&r, &e, 0.07) - 0.75).abs() < 1e-15);
        let r = grid(&click_times(120.0, 10.0, 0.5));
        let e = grid(&click_times(120.0, 10.2, 0.7));
        assert_eq!(beat_f_measure(&r, &e, 0.07), 0.0);
        assert_eq!(beat_f_measure(&r, &r, 0.07), 1.0);
    }

    /// Histogram by explicit bin-edge comparison and entropy in nats
    /// converted to bits.
    fn ig_oracle(errors: &[f64], bins: usize) -> f64 {
        let edges: Vec<f64> = (0..=bins).map(|i| -0.5 + i as f64 / bins as f64).collect();
        let mut counts = vec![0.0; bins];
        for &e in errors {
            let mut b = 0;
            while b + 1 < bins && e >= edges[b + 1] {
                b += 1;
            }
            counts[b] += 1.0;
        }
        let n = errors.len() as f64;
        let h_nats: f64 = counts.iter().filter(|&&c| c > 0.0).map(|&c| -(c / n) * (c / n).ln()).sum();
        let max = (bins as f64).ln();
        ((max - h_nats) / max).clamp(0.0, 1.0)
    }

    #[test]
    fn information_gain_examples() {
        let r = grid(&click_times(120.0, 10.0, 0.5));
        assert_eq!(information_gain(&r, &r, 41).unwrap().normalized, 1.0);
        let centres: Vec<f64> = (0..41).map(|b| -0.5 + (b as f64 + 0.5) / 41.0).collect();
        assert!(information_gain_from_errors(&centres, 41).normalized.abs() < 1e-12);
        let two = [0.0, 0.0, 0.3, 0.3];
        let expected = 1.0 - 1.0 / 41f64.log2();
        assert!((information_gain_from_errors(&two, 41).normalized - expected).abs() < 1e-12);
        assert!((expected - 0.81335).abs() < 1e-5);
        let single = grid(&[1.0]);
        assert_eq!(information_gain(&r, &single, 41), Err(RhythmError::TooFewBeats));
    }

    #[test]
    fn phase_errors_use_local_interval() {
        let r = [1.0, 2.0, 4.0];
        let e = beat_phase_errors(&r, &[1.25, 2.5, 3.5, 0.9]);
        for (got, want) in e.iter().zip([0.25, 0.25, -0.25, -0.1]) {
            assert!((got - want).abs() < 1e-12, "{e:?}");
        }
    }

    #[test]
    fn grid_validation() {
        assert!(BeatGrid::new(vec![1.0, 1.0], 120.0).is_err());
        assert!(BeatGrid::new(vec![1.0], 300.0).is_err());
        assert!(BeatGrid::new(vec![], 40.0).is_ok());
    }

    fn arb_times() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::btree_set(0u32..20_000, 2..60)
            .prop_map(|s| s.into_iter().map(|v| f64::from(v) / 1000.0).collect())
    }

    proptest! {
        #[test]
        fn ig_matches_histogram_oracle(errors in prop::collection::vec(-0.5f64..0.5, 1..200), bins in 2usize..60) {
            let fast = information_gain_from_errors(&errors, bins).normalized;
            prop_assert!((fast - ig_oracle(&errors, bins)).abs() <= 1e-9);
        }

        #[test]
        fn self_scores_are_perfect(t in arb_times()) {
            let g = grid(&t);
            prop_assert_eq!(beat_f_measure(&g, &g, 0.07), 1.0);
            prop_assert_eq!(information_gain(&g, &g, 41).unwrap().normalized, 1.0);
        }

        #[test]
        fn f_symmetric_for_equal_sizes(a in arb_times(), shift in -0.1f64..0.1) {
            let b: Vec<f64> = a.iter().map(|t| t + 50.0 + shift).collect();
            let a: Vec<f64> = a.iter().map(|t| t + 50.0).collect();
            let (ga, gb) = (grid(&a), grid(&b));
            prop_assert!((beat_f_measure(&ga, &gb, 0.07) - beat_f_measure(&gb, &ga, 0.07)).abs() < 1e-15);
        }

        #[test]
        fn delta_bpm_is_pseudometric(x in 40f64..240.0, y in 40f64..240.0, z in 40f64..240.0) {
            let g = |b| BeatGrid::new(vec![], b).unwrap();
            let (a, b, c) = (g(x), g(y), g(z));
            prop_assert!(delta_bpm(&a, &b) >= 0.0);
            prop_assert_eq!(delta_bpm(&a, &a), 0.0);
            prop_assert_eq!(delta_bpm(&a, &b), delta_bpm(&b, &a));
            prop_assert!(delta_bpm(&a, &c) <= delta_bpm(&a, &b) + delta_bpm(&b, &c) + 1e-12);
        }
    }
}
