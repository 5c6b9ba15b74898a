use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::FeatureError;
use crate::audio::AudioClip;
use crate::scalar::{rms, Real};

/// Hann-windowed magnitude STFT, frames × (window/2 + 1) bins.
///
/// No padding: frame `i` covers samples `[i*hop, i*hop + window)` and the
/// frame count is `floor((n - window) / hop) + 1`. Magnitudes are raw DFT
/// moduli of the windowed frame, so Parseval reads
/// `sum_k |X_k|^2 (full spectrum) = window * sum_n (w_n x_n)^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram<T> {
    magnitudes: Vec<T>,
    frame_rms: Vec<T>,
    n_bins: usize,
    window: usize,
    hop: usize,
    sample_rate: u32,
}

impl<T: Real> Spectrogram<T> {
    pub fn n_frames(&self) -> usize {
        self.frame_rms.len()
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn frame(&self, i: usize) -> &[T] {
        &self.magnitudes[i * self.n_bins..(i + 1) * self.n_bins]
    }

    pub fn frames(&self) -> impl Iterator<Item = &[T]> {
        self.magnitudes.chunks_exact(self.n_bins)
    }

    /// Time-domain RMS of each (unwindowed) frame, used for silence gating.
    pub fn frame_rms(&self) -> &[T] {
        &self.frame_rms
    }

    pub fn window_size(&self) -> usize {
        self.window
    }

    pub fn hop_size(&self) -> usize {
        self.hop
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Hop in seconds.
    pub fn frame_hop(&self) -> f64 {
        self.hop as f64 / f64::from(self.sample_rate)
    }

    /// Centre of frame `i` in seconds.
    pub fn frame_center(&self, i: usize) -> f64 {
        (i * self.hop) as f64 / f64::from(self.sample_rate)
            + self.window as f64 / (2.0 * f64::from(self.sample_rate))
    }

    /// Centre frequency of bin `k` in Hz.
    pub fn bin_frequency(&self, k: usize) -> f64 {
        k as f64 * f64::from(self.sample_rate) / self.window as f64
    }

    #[cfg(test)]
    pub(crate) fn from_rows(rows: Vec<Vec<T>>, window: usize, hop: usize, sample_rate: u32) -> Self {
        let n_bins = rows[0].len();
        let frame_rms = vec![T::one(); rows.len()];
        Self {
            magnitudes: rows.into_iter().flatten().collect(),
            frame_rms,
            n_bins,
            window,
            hop,
            sample_rate,
        }
    }
}

/// Periodic Hann window (peak exactly 1 at `n / 2`).
pub(crate) fn hann<T: Real>(n: usize) -> Vec<T> {
    (0..n)
        .map(|i| {
            let x = T::lit(2.0) * T::PI() * T::from_count(i) / T::from_count(n);
            T::lit(0.5) - T::lit(0.5) * x.cos()
        })
        .collect()
}

pub fn stft<T: Real>(
    clip: &AudioClip<T>,
    window: usize,
    hop: usize,
) -> Result<Spectrogram<T>, FeatureError> {
    if !window.is_power_of_two() || window < 4 {
        return Err(FeatureError::InvalidParams(format!(
            "window {window} is not a power of two"
        )));
    }
    if hop == 0 || hop > window {
        return Err(FeatureError::InvalidParams(format!(
            "hop {hop} outside (0, {window}]"
        )));
    }
    let x = clip.samples();
    if x.len() < window {
        return Err(FeatureError::ClipTooShort {
            samples: x.len(),
            needed: window,
        });
    }
    let n_frames = (x.len() - window) / hop + 1;
    let n_bins = window / 2 + 1;
    let w = hann::<T>(window);
    let fft = FftPlanner::<T>::new().plan_fft_forward(window);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); window];
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];

    let mut magnitudes = Vec::with_capacity(n_frames * n_bins);
    let mut frame_rms = Vec::with_capacity(n_frames);
    for i in 0..n_frames {
        let frame = &x[i * hop..i * hop + window];
        frame_rms.push(rms(frame));
        for ((b, &s), &wv) in buf.iter_mut().zip(frame).zip(&w) {
            *b = Complex::new(s * wv, T::zero());
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        magnitudes.extend(buf[..n_bins].iter().map(|c| c.norm()));
    }
    Ok(Spectrogram {
        magnitudes,
        frame_rms,
        n_bins,
        window,
        hop,
        sample_rate: clip.sample_rate(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn clip(samples: Vec<f64>) -> AudioClip<f64> {
        AudioClip::new(samples, 22_050, "t").unwrap()
    }

    #[test]
    fn zeros_give_zero_magnitudes() {
        let s = stft(&clip(vec![0.0; 8192]), 2048, 512).unwrap();
        assert_eq!(s.n_frames(), (8192 - 2048) / 512 + 1);
        assert!(s.frames().flatten().all(|&m| m == 0.0));
    }

    #[test]
    fn sine_peaks_at_bin_41() {
        let x: Vec<f64> = (0..22_050)
            .map(|i| (2.0 * PI * 440.0 * i as f64 / 22_050.0).sin())
            .collect();
        let s = stft(&clip(x.clone()), 2048, 512).unwrap();

        // Oracle: direct DFT of the first windowed frame.
        let w = hann::<f64>(2048);
        let direct = |k: usize| {
            let (mut re, mut im) = (0.0, 0.0);
            for n in 0..2048 {
                let ph = -2.0 * PI * (k * n) as f64 / 2048.0;
                re += x[n] * w[n] * ph.cos();
                im += x[n] * w[n] * ph.sin();
            }
            (re * re + im * im).sqrt()
        };
        let oracle_peak = (0..1025)
            .max_by(|&a, &b| direct(a).total_cmp(&direct(b)))
            .unwrap();
        assert_eq!(oracle_peak, 41);
        assert!((s.frame(0)[41] - direct(41)).abs() < 1e-6 * direct(41));

        for f in s.frames() {
            let argmax = (0..f.len()).max_by(|&a, &b| f[a].total_cmp(&f[b])).unwrap();
            assert_eq!(argmax, 41);
        }
    }

    #[test]
    fn centred_impulse_has_flat_spectrum() {
        let mut x = vec![0.0; 2048];
        x[1024] = 1.0;
        let s = stft(&clip(x), 2048, 512).unwrap();
        for &m in s.frame(0) {
            assert!((m - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn parameter_and_length_errors() {
        let c = clip(vec![0.0; 1000]);
        assert!(matches!(stft(&c, 2048, 512), Err(FeatureError::ClipTooShort { .. })));
        assert!(matches!(stft(&c, 300, 100), Err(FeatureError::InvalidParams(_))));
        assert!(matches!(stft(&c, 256, 0), Err(FeatureError::InvalidParams(_))));
        assert!(matches!(stft(&c, 256, 512), Err(FeatureError::InvalidParams(_))));
    }

    #[test]
    fn f32_and_f64_agree() {
        let x: Vec<f64> = (0..6000).map(|i| ((i * 37 % 101) as f64 / 101.0) - 0.5).collect();
        let a = stft(&clip(x.clone()), 1024, 256).unwrap();
        let b = stft(&clip(x).cast::<f32>(), 1024, 256).unwrap();
        for (p, q) in a.frames().flatten().zip(b.frames().flatten()) {
            assert!((p - f64::from(*q)).abs() < 1e-3 * (1.0 + p));
        }
    }
}
