use std::f64::consts::PI;

use super::AudioClip;
use crate::scalar::Real;

/// Zero crossings of the sinc kernel on each side of the centre tap.
const ZERO_CROSSINGS: f64 = 24.0;
/// Cutoff as a fraction of the lower Nyquist frequency.
const ROLLOFF: f64 = 0.94;

/// Band-limited sample-rate conversion.
///
/// Blackman-windowed sinc, 24 zero crossings per side, cutoff at 94% of the
/// lower of the two Nyquist frequencies. Taps are renormalised per output
/// sample so DC passes with unit gain. Stopband attenuation is roughly
/// 70 dB; that is ample for the analysis features, which never look above
/// 2.1 kHz for pitch content.
///
/// Output length is `round(n * target / source)`, so duration is preserved
/// to within one output sample period.
pub fn resample<T: Real>(clip: &AudioClip<T>, target_rate: u32) -> AudioClip<T> {
    assert!(target_rate > 0, "target rate must be positive");
    let src_rate = clip.sample_rate();
    if src_rate == target_rate {
        return clip.clone();
    }
    let input: Vec<f64> = clip.samples().iter().map(|s| s.as_f64()).collect();
    let n_in = input.len();
    let step = f64::from(src_rate) / f64::from(target_rate);
    let n_out = (n_in as f64 / step).round() as usize;

    let ratio = (f64::from(target_rate) / f64::from(src_rate)).min(1.0) * ROLLOFF;
    let half_width = ZERO_CROSSINGS / ratio;

    let mut out = Vec::with_capacity(n_out);
    for i in 0..n_out {
        // Exact rational position avoids drift on long clips.
        let pos = (i as f64 * f64::from(src_rate)) / f64::from(target_rate);
        let lo = (pos - half_width).ceil().max(0.0) as usize;
        let hi = ((pos + half_width).floor() as usize).min(n_in.saturating_sub(1));
        let mut acc = 0.0;
        let mut norm = 0.0;
        for (k, &x) in input.iter().enumerate().take(hi + 1).skip(lo) {
            let h = kernel(k as f64 - pos, ratio, half_width);
            acc += x * h;
            norm += h;
        }
        out.push(if norm.abs() > 1e-12 { acc / norm } else { 0.0 });
    }

    AudioClip::new(
        out.into_iter().map(T::lit).collect(),
        target_rate,
        clip.source_id(),
    )
    .expect("resampled samples are finite")
}

fn kernel(x: f64, ratio: f64, half_width: f64) -> f64 {
    if x.abs() >= half_width {
        return 0.0;
    }
    let arg = PI * ratio * x;
    let sinc = if arg.abs() < 1e-12 { 1.0 } else { arg.sin() / arg };
    // Blackman window over [-half_width, half_width].
    let u = (x / half_width + 1.0) * 0.5;
    let w = 0.42 - 0.5 * (2.0 * PI * u).cos() + 0.08 * (4.0 * PI * u).cos();
    ratio * sinc * w
}
