use super::Spectrogram;
use crate::scalar::Real;

pub const PITCH_CLASS_NAMES: [&str; 12] = [
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
];

/// Frames × 12 pitch-class energies, ordered C, C#, ..., B.
///
/// Each row is either all zero (silent frame) or scaled so its maximum is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromagram<T> {
    pub frames: Vec<[T; 12]>,
    pub frame_hop: f64,
    /// Centre time of the first frame in seconds.
    pub offset: f64,
}

impl<T: Real> Chromagram<T> {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.offset + i as f64 * self.frame_hop
    }

    pub fn is_silent_frame(&self, i: usize) -> bool {
        self.frames[i].iter().all(|v| v.is_zero())
    }

    /// Wraps raw rows, used for synthetic chromagrams in tests and tools.
    pub fn from_rows(frames: Vec<[T; 12]>, frame_hop: f64) -> Self {
        Self {
            frames,
            frame_hop,
            offset: 0.0,
        }
    }
}

/// Pitch-class range folded into the chromagram.
#[derive(Debug, Clone, Copy)]
pub struct ChromaParams {
    pub min_hz: f64,
    pub max_hz: f64,
    /// Frames whose time-domain RMS is below this are silent.
    pub silence_rms: f64,
}

impl Default for ChromaParams {
    fn default() -> Self {
        Self {
            min_hz: 65.0,
            max_hz: 2093.0,
            silence_rms: 1e-4,
        }
    }
}

/// Folds STFT power into pitch classes by nearest equal-tempered semitone
/// (A4 = 440 Hz) for bins whose centre lies in `[min_hz, max_hz]`.
pub fn chromagram_from_spectrogram<T: Real>(
    spec: &Spectrogram<T>,
    params: &ChromaParams,
) -> Chromagram<T> {
    let bin_class: Vec<Option<usize>> = (0..spec.n_bins())
        .map(|k| {
            let f = spec.bin_frequency(k);
            (f >= params.min_hz && f <= params.max_hz).then(|| {
                let midi = (69.0 + 12.0 * (f / 440.0).log2()).round() as i64;
                midi.rem_euclid(12) as usize
            })
        })
        .collect();
    let silence = T::lit(params.silence_rms);

    let frames = spec
        .frames()
        .zip(spec.frame_rms())
        .map(|(mags, &frame_rms)| {
            let mut row = [T::zero(); 12];
            if frame_rms < silence {
                return row;
            }
            for (&m, class) in mags.iter().zip(&bin_class) {
                if let Some(c) = class {
                    row[*c] = row[*c] + m * m;
                }
            }
            let max = row.iter().fold(T::zero(), |a, &b| a.max(b));
            if max > T::zero() {
                for v in &mut row {
                    *v = *v / max;
                }
            }
            row
        })
        .collect();

    Chromagram {
        frames,
        frame_hop: spec.frame_hop(),
        offset: spec.frame_center(0),
    }
}
