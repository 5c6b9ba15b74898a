use std::fmt;

use serde::{Deserialize, Serialize};

use super::HarmonyError;
use crate::features::{Chromagram, PITCH_CLASS_NAMES};
use crate::scalar::Real;

const MAJOR_PROFILE: [f64; 12] = [
    6.35, 2.23, 3.48, 2.33, 4.38, 4.09, 2.52, 5.19, 2.39, 3.66, 2.29, 2.88,
];
const MINOR_PROFILE: [f64; 12] = [
    6.33, 2.68, 3.52, 5.38, 2.60, 3.53, 2.54, 4.75, 3.98, 2.69, 3.34, 3.17,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Major,
    Minor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyEstimate {
    /// Pitch class 0..12, 0 = C.
    pub tonic: u8,
    pub mode: Mode,
    /// Pearson correlation of the winning profile.
    pub confidence: f64,
}

impl fmt::Display for KeyEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = match self.mode {
            Mode::Major => "major",
            Mode::Minor => "minor",
        };
        write!(f, "{} {m}", PITCH_CLASS_NAMES[self.tonic as usize % 12])
    }
}

/// How minor keys are placed on the circle of fifths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CofMapping {
    /// A minor sits with C major (shared key signature).
    #[default]
    Relative,
    /// A minor sits with A major.
    Parallel,
}

fn pearson(x: &[f64; 12], y: &[f64; 12]) -> f64 {
    let mx = x.iter().sum::<f64>() / 12.0;
    let my = y.iter().sum::<f64>() / 12.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Mean chroma over the non-silent frames, or `None` if all are silent.
fn mean_chroma<T: Real>(ch: &Chromagram<T>) -> Option<[f64; 12]> {
    let mut sum = [0.0; 12];
    let mut n = 0usize;
    for (i, row) in ch.frames.iter().enumerate() {
        if ch.is_silent_frame(i) {
            continue;
        }
        for (s, v) in sum.iter_mut().zip(row) {
            *s += v.as_f64();
        }
        n += 1;
    }
    (n > 0).then(|| sum.map(|s| s / n as f64))
}

/// Global key by correlating the mean chroma with the 24 rotated
/// Krumhansl-Kessler profiles.
pub fn estimate_key<T: Real>(ch: &Chromagram<T>) -> Result<KeyEstimate, HarmonyError> {
    let mean = mean_chroma(ch).ok_or(HarmonyError::NoKey)?;
    let mut best: Option<KeyEstimate> = None;
    for tonic in 0..12u8 {
        for (mode, profile) in [(Mode::Major, &MAJOR_PROFILE), (Mode::Minor, &MINOR_PROFILE)] {
            let rotated: [f64; 12] = std::array::from_fn(|pc| profile[(pc + 12 - tonic as usize) % 12]);
            let r = pearson(&mean, &rotated);
            if best.is_none_or(|b| r > b.confidence) {
                best = Some(KeyEstimate {
                    tonic,
                    mode,
                    confidence: r,
                });
            }
        }
    }
    Ok(best.expect("24 candidates"))
}

fn circle_position(k: &KeyEstimate, mapping: CofMapping) -> u8 {
    let major_tonic = match (k.mode, mapping) {
        (Mode::Minor, CofMapping::Relative) => (k.tonic + 3) % 12,
        _ => k.tonic % 12,
    };
    (major_tonic * 7) % 12
}

/// Shortest distance around the circle of fifths, normalized to [0, 1].
pub fn cof_distance_with(k1: &KeyEstimate, k2: &KeyEstimate, mapping: CofMapping) -> f64 {
    let a = circle_position(k1, mapping) as i32;
    let b = circle_position(k2, mapping) as i32;
    let d = (a - b).abs();
    f64::from(d.min(12 - d)) / 6.0
}

/// [`cof_distance_with`] using the relative-major mapping.
pub fn cof_distance(k1: &KeyEstimate, k2: &KeyEstimate) -> f64 {
    cof_distance_with(k1, k2, CofMapping::Relative)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{synth_fixture, AudioClip, ChordQuality, FixtureSpec};
    use crate::features::chromagram;

    fn key(tonic: u8, mode: Mode) -> KeyEstimate {
        KeyEstimate {
            tonic,
            mode,
            confidence: 0.0,
        }
    }

    /// Walks the circle one fifth at a time in both directions and returns
    /// the fewer number of steps to reach `to` from `from`.
    fn cof_steps_oracle(from: u8, to: u8) -> u32 {
        let walk = |step: u8| {
            let mut p = from;
            let mut n = 0;
            while p != to {
                p = (p + step) % 12;
                n += 1;
            }
            n
        };
        walk(7).min(walk(5))
    }

    #[test]
    fn cof_matches_circle_walk_for_all_major_pairs() {
        for a in 0..12 {
            for b in 0..12 {
                let d = cof_distance(&key(a, Mode::Major), &key(b, Mode::Major));
                assert_eq!(d, f64::from(cof_steps_oracle(a, b)) / 6.0, "{a} {b}");
            }
        }
    }

    #[test]
    fn cof_examples() {
        let c = key(0, Mode::Major);
        assert_eq!(cof_distance(&c, &c), 0.0);
        assert_eq!(cof_distance(&c, &key(6, Mode::Major)), 1.0);
        assert!((cof_distance(&c, &key(7, Mode::Major)) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(cof_distance(&key(9, Mode::Minor), &c), 0.0);
        assert_eq!(
            cof_distance_with(&key(0, Mode::Minor), &c, CofMapping::Parallel),
            0.0
        );
        assert!(cof_distance_with(&key(9, Mode::Minor), &c, CofMapping::Parallel) > 0.0);
    }

    #[test]
    fn silence_has_no_key() {
        let clip: AudioClip<f64> = synth_fixture(&FixtureSpec::Silence { duration: 1.0 }, 22_050).unwrap();
        assert_eq!(estimate_key(&chromagram(&clip).unwrap()), Err(HarmonyError::NoKey));
    }

    fn scale(tonic_midi: f64, quality: ChordQuality) -> FixtureSpec {
        FixtureSpec::Scale {
            tonic_midi,
            quality,
            note_duration: 0.4,
            amplitude: 0.5,
        }
    }

    /// Profile correlation on an ideal pitch-class histogram, computed
    /// independently of the chroma pipeline.
    fn histogram_key(classes: &[usize]) -> (u8, Mode) {
        let mut h = [0.0; 12];
        for &c in classes {
            h[c] += 1.0;
        }
        let ch = Chromagram::from_rows(vec![h.map(|v: f64| v / 2.0)], 0.1);
        let k = estimate_key(&ch).unwrap();
        (k.tonic, k.mode)
    }

    #[test]
    fn histogram_oracle_on_scales() {
        assert_eq!(histogram_key(&[0, 2, 4, 5, 7, 9, 11, 0]), (0, Mode::Major));
        assert_eq!(histogram_key(&[9, 11, 0, 2, 4, 5, 7, 9]), (9, Mode::Minor));
    }

    #[test]
    fn synthesized_scales_in_every_key() {
        for quality in [ChordQuality::Major, ChordQuality::Minor] {
            let base = scale(60.0, quality);
            for n in 0..12 {
                let clip: AudioClip<f64> = synth_fixture(&base.transposed(n as f64), 22_050).unwrap();
                let k = estimate_key(&chromagram(&clip).unwrap()).unwrap();
                let mode = match quality {
                    ChordQuality::Major => Mode::Major,
                    ChordQuality::Minor => Mode::Minor,
                };
                assert_eq!((k.tonic, k.mode), (n as u8, mode), "{quality:?} +{n}");
            }
        }
    }

    #[test]
    fn flat_chroma_ties_to_c_major() {
        let ch = Chromagram::from_rows(vec![[1.0f64; 12]; 3], 0.1);
        let k = estimate_key(&ch).unwrap();
        assert_eq!((k.tonic, k.mode), (0, Mode::Major));
    }
}
