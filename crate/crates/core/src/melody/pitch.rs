use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::MelodyParams;
use crate::audio::AudioClip;
use crate::scalar::{rms, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchFrame {
    pub time: f64,
    /// Fundamental in Hz; `None` when unvoiced.
    pub f0: Option<f64>,
    pub confidence: f64,
}

/// Frame-wise fundamental frequency at a uniform hop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchTrack {
    pub frames: Vec<PitchFrame>,
    pub frame_hop: f64,
    /// Frames above the RMS silence floor, voiced or not.
    pub audible_frames: usize,
}

impl PitchTrack {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn is_silent(&self) -> bool {
        self.audible_frames == 0
    }

    pub fn voiced_count(&self) -> usize {
        self.frames.iter().filter(|f| f.f0.is_some()).count()
    }
}

/// Parabolic vertex offset in (-0.5, 0.5) around the middle of three points.
fn parabolic_offset(a: f64, b: f64, c: f64) -> f64 {
    let den = a - 2.0 * b + c;
    if den.abs() < 1e-300 {
        0.0
    } else {
        (0.5 * (a - c) / den).clamp(-0.5, 0.5)
    }
}

/// YIN pitch tracking.
///
/// Each frame integrates `window` samples against lags up to the period
/// of `min_hz`; the difference function is formed from FFT
/// cross-correlation and running energies. The first cumulative-mean-
/// normalized dip below `threshold` is followed down to its local minimum
/// and refined by parabolic interpolation.
pub fn track_pitch<T: Real>(clip: &AudioClip<T>, params: &MelodyParams) -> PitchTrack {
    let sr = f64::from(clip.sample_rate());
    let x = clip.samples();
    let w = params.yin_window;
    let tau_min = ((sr / params.max_hz).floor() as usize).max(2);
    let tau_max = (sr / params.min_hz).ceil() as usize;
    let span = w + tau_max + 1;
    let hop = params.yin_hop;
    let frame_hop = hop as f64 / sr;
    if x.len() < span {
        return PitchTrack {
            frames: Vec::new(),
            frame_hop,
            audible_frames: 0,
        };
    }
    let n_frames = (x.len() - span) / hop + 1;
    let fft_len = (span + w).next_power_of_two();
    let mut planner = FftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(fft_len);
    let inv = planner.plan_fft_inverse(fft_len);
    let mut head = vec![Complex::new(T::zero(), T::zero()); fft_len];
    let mut body = vec![Complex::new(T::zero(), T::zero()); fft_len];
    let silence = T::lit(params.silence_rms);
    let scale = T::one() / T::from_count(fft_len);

    let mut d = vec![0.0f64; tau_max + 1];
    let mut cmnd = vec![1.0f64; tau_max + 1];
    let mut audible_frames = 0;
    let frames = (0..n_frames)
        .map(|i| {
            let s = i * hop;
            let time = (s as f64 + w as f64 / 2.0) / sr;
            let unvoiced = PitchFrame {
                time,
                f0: None,
                confidence: 0.0,
            };
            let seg = &x[s..s + span];
            if rms(&seg[..w]) < silence {
                return unvoiced;
            }
            audible_frames += 1;

            for (k, c) in head.iter_mut().enumerate() {
                *c = Complex::new(if k < w { seg[k] } else { T::zero() }, T::zero());
            }
            for (k, c) in body.iter_mut().enumerate() {
                *c = Complex::new(if k < span { seg[k] } else { T::zero() }, T::zero());
            }
            fwd.process(&mut head);
            fwd.process(&mut body);
            for (h, b) in head.iter_mut().zip(&body) {
                *h = h.conj() * b;
            }
            inv.process(&mut head);

            let mut energy_at = 0.0f64;
            for v in &seg[..w] {
                energy_at += v.as_f64() * v.as_f64();
            }
            let e0 = energy_at;
            for tau in 0..=tau_max {
                if tau > 0 {
                    let out = seg[tau - 1].as_f64();
                    let inn = seg[tau + w - 1].as_f64();
                    energy_at += inn * inn - out * out;
                }
                let r = (head[tau].re * scale).as_f64();
                d[tau] = (e0 + energy_at - 2.0 * r).max(0.0);
            }

            let mut running = 0.0;
            cmnd[0] = 1.0;
            for tau in 1..=tau_max {
                running += d[tau];
                cmnd[tau] = if running > 0.0 { d[tau] * tau as f64 / running } else { 1.0 };
            }

            let Some(mut tau) = (tau_min..=tau_max).find(|&t| cmnd[t] < params.yin_threshold) else {
                return unvoiced;
            };
            while tau < tau_max && cmnd[tau + 1] < cmnd[tau] {
                tau += 1;
            }
            let refined = if tau > tau_min && tau < tau_max {
                tau as f64 + parabolic_offset(cmnd[tau - 1], cmnd[tau], cmnd[tau + 1])
            } else {
                tau as f64
            };
            let f0 = sr / refined;
            if !(params.min_hz..=params.max_hz).contains(&f0) {
                return unvoiced;
            }
            PitchFrame {
                time,
                f0: Some(f0),
                confidence: (1.0 - cmnd[tau]).clamp(0.0, 1.0),
            }
        })
        .collect();
    PitchTrack {
        frames,
        frame_hop,
        audible_frames,
    }
}

/// Fraction of reference-voiced frames also voiced in the estimate, after
/// aligning the estimate to each reference frame by nearest time. With
/// `cents_tolerance`, the estimate must also lie within that many cents.
/// `None` when the reference has no voiced frame.
pub fn voicing_recall_with(reference: &PitchTrack, estimate: &PitchTrack, cents_tolerance: Option<f64>) -> Option<f64> {
    let mut voiced = 0usize;
    let mut hits = 0usize;
    for f in &reference.frames {
        let Some(rf) = f.f0 else { continue };
        voiced += 1;
        let other = nearest_frame(estimate, f.time).and_then(|e| e.f0);
        let ok = match (other, cents_tolerance) {
            (Some(ef), Some(tol)) => (1200.0 * (ef / rf).log2()).abs() <= tol,
            (Some(_), None) => true,
            (None, _) => false,
        };
        hits += usize::from(ok);
    }
    (voiced > 0).then(|| hits as f64 / voiced as f64)
}

pub fn voicing_recall(reference: &PitchTrack, estimate: &PitchTrack) -> Option<f64> {
    voicing_recall_with(reference, estimate, None)
}

fn nearest_frame(track: &PitchTrack, t: f64) -> Option<&PitchFrame> {
    let first = track.frames.first()?;
    let idx = ((t - first.time) / track.frame_hop).round();
    if idx < 0.0 {
        return None;
    }
    let f = track.frames.get(idx as usize)?;
    ((f.time - t).abs() <= 0.5 * track.frame_hop + 1e-9).then_some(f)
}
