use std::f64::consts::PI;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{AudioClip, AudioError};
use crate::scalar::Real;

pub const BPM_RANGE: RangeInclusive<f64> = 40.0..=240.0;
/// A0 to C8.
pub const FREQ_RANGE: RangeInclusive<f64> = 27.5..=4186.0;
const MAX_DURATION: f64 = 600.0;
/// Linear fade applied at both ends of every tone.
const FADE_SECONDS: f64 = 0.005;
/// Decay constant and length of a click.
const CLICK_TAU: f64 = 0.001;
const CLICK_LEN: f64 = 0.010;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChordQuality {
    Major,
    Minor,
}

impl ChordQuality {
    /// Semitone offsets of the triad above its root.
    pub fn intervals(self) -> [i32; 3] {
        match self {
            ChordQuality::Major => [0, 4, 7],
            ChordQuality::Minor => [0, 3, 7],
        }
    }
}

/// A triad voiced in close position on `root_midi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triad {
    pub root_midi: i32,
    pub quality: ChordQuality,
}

/// Deterministic test-signal description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FixtureSpec {
    Silence {
        duration: f64,
    },
    Sine {
        freq: f64,
        duration: f64,
        amplitude: f64,
    },
    /// Sinusoidal frequency modulation of `depth_cents` around `freq`.
    Vibrato {
        freq: f64,
        depth_cents: f64,
        rate_hz: f64,
        duration: f64,
        amplitude: f64,
    },
    /// Exponentially decaying clicks at `offset + k * 60 / bpm` seconds.
    /// Indices listed in `dropped` are left out.
    Clicks {
        bpm: f64,
        duration: f64,
        offset: f64,
        amplitude: f64,
        #[serde(default)]
        dropped: Vec<usize>,
    },
    /// Back-to-back sine notes given as (MIDI pitch, seconds).
    Notes {
        notes: Vec<(f64, f64)>,
        amplitude: f64,
    },
    /// Each triad held for `chord_duration`; the whole list repeats
    /// `repeats` times. Every chord is re-struck with its own fade.
    Triads {
        chords: Vec<Triad>,
        chord_duration: f64,
        repeats: usize,
        amplitude: f64,
    },
    /// One ascending octave (eight notes, tonic doubled); minor is the
    /// natural minor scale.
    Scale {
        tonic_midi: f64,
        quality: ChordQuality,
        note_duration: f64,
        amplitude: f64,
    },
    /// Uniform white noise, optionally restricted to a passband in Hz.
    Noise {
        duration: f64,
        amplitude: f64,
        seed: u64,
        band: Option<(f64, f64)>,
    },
    Concat(Vec<FixtureSpec>),
    Mix(Vec<FixtureSpec>),
}

impl FixtureSpec {
    /// Same fixture shifted by `semitones` (pitched components only).
    pub fn transposed(&self, semitones: f64) -> FixtureSpec {
        let ratio = 2f64.powf(semitones / 12.0);
        match self {
            FixtureSpec::Sine {
                freq,
                duration,
                amplitude,
            } => FixtureSpec::Sine {
                freq: freq * ratio,
                duration: *duration,
                amplitude: *amplitude,
            },
            FixtureSpec::Vibrato {
                freq,
                depth_cents,
                rate_hz,
                duration,
                amplitude,
            } => FixtureSpec::Vibrato {
                freq: freq * ratio,
                depth_cents: *depth_cents,
                rate_hz: *rate_hz,
                duration: *duration,
                amplitude: *amplitude,
            },
            FixtureSpec::Notes { notes, amplitude } => FixtureSpec::Notes {
                notes: notes.iter().map(|&(p, d)| (p + semitones, d)).collect(),
                amplitude: *amplitude,
            },
            FixtureSpec::Triads {
                chords,
                chord_duration,
                repeats,
                amplitude,
            } => FixtureSpec::Triads {
                chords: chords
                    .iter()
                    .map(|t| Triad {
                        root_midi: t.root_midi + semitones.round() as i32,
                        quality: t.quality,
                    })
                    .collect(),
                chord_duration: *chord_duration,
                repeats: *repeats,
                amplitude: *amplitude,
            },
            FixtureSpec::Scale {
                tonic_midi,
                quality,
                note_duration,
                amplitude,
            } => FixtureSpec::Scale {
                tonic_midi: tonic_midi + semitones,
                quality: *quality,
                note_duration: *note_duration,
                amplitude: *amplitude,
            },
            FixtureSpec::Concat(parts) => {
                FixtureSpec::Concat(parts.iter().map(|p| p.transposed(semitones)).collect())
            }
            FixtureSpec::Mix(parts) => {
                FixtureSpec::Mix(parts.iter().map(|p| p.transposed(semitones)).collect())
            }
            other => other.clone(),
        }
    }

    /// Same fixture played `factor` times slower (durations scaled up,
    /// tempo scaled down). Pitch is unchanged.
    pub fn time_stretched(&self, factor: f64) -> FixtureSpec {
        match self {
            FixtureSpec::Silence { duration } => FixtureSpec::Silence {
                duration: duration * factor,
            },
            FixtureSpec::Sine {
                freq,
                duration,
                amplitude,
            } => FixtureSpec::Sine {
                freq: *freq,
                duration: duration * factor,
                amplitude: *amplitude,
            },
            FixtureSpec::Vibrato {
                freq,
                depth_cents,
                rate_hz,
                duration,
                amplitude,
            } => FixtureSpec::Vibrato {
                freq: *freq,
                depth_cents: *depth_cents,
                rate_hz: rate_hz / factor,
                duration: duration * factor,
                amplitude: *amplitude,
            },
            FixtureSpec::Clicks {
                bpm,
                duration,
                offset,
                amplitude,
                dropped,
            } => FixtureSpec::Clicks {
                bpm: bpm / factor,
                duration: duration * factor,
                offset: offset * factor,
                amplitude: *amplitude,
                dropped: dropped.clone(),
            },
            FixtureSpec::Notes { notes, amplitude } => FixtureSpec::Notes {
                notes: notes.iter().map(|&(p, d)| (p, d * factor)).collect(),
                amplitude: *amplitude,
            },
            FixtureSpec::Triads {
                chords,
                chord_duration,
                repeats,
                amplitude,
            } => FixtureSpec::Triads {
                chords: chords.clone(),
                chord_duration: chord_duration * factor,
                repeats: *repeats,
                amplitude: *amplitude,
            },
            FixtureSpec::Scale {
                tonic_midi,
                quality,
                note_duration,
                amplitude,
            } => FixtureSpec::Scale {
                tonic_midi: *tonic_midi,
                quality: *quality,
                note_duration: note_duration * factor,
                amplitude: *amplitude,
            },
            FixtureSpec::Noise {
                duration,
                amplitude,
                seed,
                band,
            } => FixtureSpec::Noise {
                duration: duration * factor,
                amplitude: *amplitude,
                seed: *seed,
                band: *band,
            },
            FixtureSpec::Concat(parts) => {
                FixtureSpec::Concat(parts.iter().map(|p| p.time_stretched(factor)).collect())
            }
            FixtureSpec::Mix(parts) => {
                FixtureSpec::Mix(parts.iter().map(|p| p.time_stretched(factor)).collect())
            }
        }
    }

    fn validate(&self) -> Result<(), AudioError> {
        match self {
            FixtureSpec::Silence { duration } => check_duration(*duration),
            FixtureSpec::Sine {
                freq,
                duration,
                amplitude,
            } => {
                check_freq(*freq)?;
                check_duration(*duration)?;
                check_amplitude(*amplitude)
            }
            FixtureSpec::Vibrato {
                freq,
                depth_cents,
                rate_hz,
                duration,
                amplitude,
            } => {
                let span = 2f64.powf(depth_cents.abs() / 1200.0);
                check_freq(freq / span)?;
                check_freq(freq * span)?;
                if !(0.0..=50.0).contains(rate_hz) {
                    return invalid(format!("vibrato rate {rate_hz} Hz outside [0, 50]"));
                }
                check_duration(*duration)?;
                check_amplitude(*amplitude)
            }
            FixtureSpec::Clicks {
                bpm,
                duration,
                offset,
                amplitude,
                ..
            } => {
                if !BPM_RANGE.contains(bpm) {
                    return invalid(format!("bpm {bpm} outside [40, 240]"));
                }
                if !(*offset >= 0.0 && *offset < *duration) {
                    return invalid(format!("click offset {offset} outside clip"));
                }
                check_duration(*duration)?;
                check_amplitude(*amplitude)
            }
            FixtureSpec::Notes { notes, amplitude } => {
                if notes.is_empty() {
                    return invalid("note list is empty".into());
                }
                for &(p, d) in notes {
                    check_freq(midi_to_hz(p))?;
                    check_duration(d)?;
                }
                check_amplitude(*amplitude)
            }
            FixtureSpec::Triads {
                chords,
                chord_duration,
                repeats,
                amplitude,
            } => {
                if chords.is_empty() || *repeats == 0 {
                    return invalid("triad loop is empty".into());
                }
                for t in chords {
                    for iv in t.quality.intervals() {
                        check_freq(midi_to_hz(f64::from(t.root_midi + iv)))?;
                    }
                }
                check_duration(*chord_duration)?;
                check_amplitude(*amplitude)
            }
            FixtureSpec::Scale {
                tonic_midi,
                note_duration,
                amplitude,
                ..
            } => {
                check_freq(midi_to_hz(*tonic_midi))?;
                check_freq(midi_to_hz(tonic_midi + 12.0))?;
                check_duration(*note_duration)?;
                check_amplitude(*amplitude)
            }
            FixtureSpec::Noise {
                duration,
                amplitude,
                band,
                ..
            } => {
                check_duration(*duration)?;
                check_amplitude(*amplitude)?;
                if let Some((lo, hi)) = band {
                    if !(*lo >= 0.0 && lo < hi) {
                        return invalid(format!("noise band ({lo}, {hi}) is empty"));
                    }
                }
                Ok(())
            }
            FixtureSpec::Concat(parts) | FixtureSpec::Mix(parts) => {
                if parts.is_empty() {
                    return invalid("composite fixture has no parts".into());
                }
                parts.iter().try_for_each(FixtureSpec::validate)
            }
        }
    }

    fn render(&self, rate: f64) -> Vec<f64> {
        match self {
            FixtureSpec::Silence { duration } => vec![0.0; samples_for(*duration, rate)],
            FixtureSpec::Sine {
                freq,
                duration,
                amplitude,
            } => {
                let n = samples_for(*duration, rate);
                (0..n)
                    .map(|i| amplitude * (2.0 * PI * freq * i as f64 / rate).sin())
                    .collect()
            }
            FixtureSpec::Vibrato {
                freq,
                depth_cents,
                rate_hz,
                duration,
                amplitude,
            } => {
                let n = samples_for(*duration, rate);
                let mut phase = 0.0f64;
                (0..n)
                    .map(|i| {
                        let t = i as f64 / rate;
                        let cents = depth_cents * (2.0 * PI * rate_hz * t).sin();
                        let f = freq * 2f64.powf(cents / 1200.0);
                        let s = amplitude * phase.sin();
                        phase += 2.0 * PI * f / rate;
                        s
                    })
                    .collect()
            }
            FixtureSpec::Clicks {
                bpm,
                duration,
                offset,
                amplitude,
                dropped,
            } => {
                let n = samples_for(*duration, rate);
                let mut out = vec![0.0; n];
                let period = 60.0 / bpm;
                let len = (CLICK_LEN * rate).round() as usize;
                for k in 0.. {
                    let start = ((offset + k as f64 * period) * rate).round() as usize;
                    if start >= n {
                        break;
                    }
                    if dropped.contains(&k) {
                        continue;
                    }
                    for j in 0..len.min(n - start) {
                        out[start + j] += amplitude * (-(j as f64) / (CLICK_TAU * rate)).exp();
                    }
                }
                out
            }
            FixtureSpec::Notes { notes, amplitude } => {
                let mut out = Vec::new();
                for &(pitch, dur) in notes {
                    out.extend(tone(&[midi_to_hz(pitch)], dur, *amplitude, rate));
                }
                out
            }
            FixtureSpec::Triads {
                chords,
                chord_duration,
                repeats,
                amplitude,
            } => {
                let mut out = Vec::new();
                for _ in 0..*repeats {
                    for t in chords {
                        let freqs: Vec<f64> = t
                            .quality
                            .intervals()
                            .iter()
                            .map(|iv| midi_to_hz(f64::from(t.root_midi + iv)))
                            .collect();
                        out.extend(tone(&freqs, *chord_duration, *amplitude, rate));
                    }
                }
                out
            }
            FixtureSpec::Scale {
                tonic_midi,
                quality,
                note_duration,
                amplitude,
            } => {
                let steps: [f64; 8] = match quality {
                    ChordQuality::Major => [0.0, 2.0, 4.0, 5.0, 7.0, 9.0, 11.0, 12.0],
                    ChordQuality::Minor => [0.0, 2.0, 3.0, 5.0, 7.0, 8.0, 10.0, 12.0],
                };
                let mut out = Vec::new();
                for s in steps {
                    out.extend(tone(&[midi_to_hz(tonic_midi + s)], *note_duration, *amplitude, rate));
                }
                out
            }
            FixtureSpec::Noise {
                duration,
                amplitude,
                seed,
                band,
            } => {
                let n = samples_for(*duration, rate);
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let white: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let shaped = match band {
                    Some((lo, hi)) => band_limit(white, *lo, *hi, rate),
                    None => white,
                };
                let peak = shaped.iter().fold(0.0f64, |m, s| m.max(s.abs()));
                let gain = if peak > 0.0 { amplitude / peak } else { 0.0 };
                shaped.into_iter().map(|s| s * gain).collect()
            }
            FixtureSpec::Concat(parts) => parts.iter().flat_map(|p| p.render(rate)).collect(),
            FixtureSpec::Mix(parts) => {
                let rendered: Vec<Vec<f64>> = parts.iter().map(|p| p.render(rate)).collect();
                let n = rendered.iter().map(Vec::len).max().unwrap_or(0);
                let mut out = vec![0.0; n];
                for r in &rendered {
                    for (o, s) in out.iter_mut().zip(r) {
                        *o += s;
                    }
                }
                out
            }
        }
    }
}

/// Renders a fixture at `sample_rate`. Identical specs give bit-identical
/// clips; noise uses a seeded ChaCha stream.
pub fn synth_fixture<T: Real>(
    spec: &FixtureSpec,
    sample_rate: u32,
) -> Result<AudioClip<T>, AudioError> {
    if sample_rate == 0 {
        return invalid("sample rate must be positive".into());
    }
    spec.validate()?;
    let rendered = spec.render(f64::from(sample_rate));
    if let Some(peak) = rendered.iter().map(|s| s.abs()).reduce(f64::max) {
        if peak > 1.0 {
            return invalid(format!("fixture peak {peak:.3} exceeds full scale"));
        }
    }
    AudioClip::new(rendered.into_iter().map(T::lit).collect(), sample_rate, "fixture")
}

pub(crate) fn midi_to_hz(midi: f64) -> f64 {
    440.0 * 2f64.powf((midi - 69.0) / 12.0)
}

fn samples_for(duration: f64, rate: f64) -> usize {
    (duration * rate).round() as usize
}

/// Sum of equal-amplitude sines with short linear fades at both ends.
fn tone(freqs: &[f64], duration: f64, amplitude: f64, rate: f64) -> Vec<f64> {
    let n = samples_for(duration, rate);
    let fade = ((FADE_SECONDS * rate).round() as usize).min(n / 2).max(1);
    (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            let env = ((i + 1).min(n - i) as f64 / fade as f64).min(1.0);
            let s: f64 = freqs.iter().map(|f| (2.0 * PI * f * t).sin()).sum();
            amplitude * env * s
        })
        .collect()
}

/// Zeroes every DFT bin outside `[lo, hi]` Hz.
fn band_limit(signal: Vec<f64>, lo: f64, hi: f64, rate: f64) -> Vec<f64> {
    let n = signal.len();
    if n == 0 {
        return signal;
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> = signal.into_iter().map(|s| Complex::new(s, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let bin = k.min(n - k);
        let f = bin as f64 * rate / n as f64;
        if f < lo || f > hi {
            *c = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.into_iter().map(|c| c.re / n as f64).collect()
}

fn invalid<T>(msg: String) -> Result<T, AudioError> {
    Err(AudioError::InvalidFixture(msg))
}

fn check_freq(f: f64) -> Result<(), AudioError> {
    if FREQ_RANGE.contains(&f) {
        Ok(())
    } else {
        invalid(format!("frequency {f:.2} Hz outside [27.5, 4186]"))
    }
}

fn check_duration(d: f64) -> Result<(), AudioError> {
    if d > 0.0 && d <= MAX_DURATION {
        Ok(())
    } else {
        invalid(format!("duration {d} s outside (0, {MAX_DURATION}]"))
    }
}

fn check_amplitude(a: f64) -> Result<(), AudioError> {
    if a > 0.0 && a <= 1.0 {
        Ok(())
    } else {
        invalid(format!("amplitude {a} outside (0, 1]"))
    }
}
