use super::{RhythmError, RhythmParams};
use crate::features::OnsetEnvelope;
use crate::scalar::Real;

/// Shortest envelope accepted for tempo estimation, in seconds.
pub const MIN_TEMPO_SECONDS: f64 = 4.0;

/// Harmonics of the coarse period used to refine it below one lag.
const REFINE_MULTIPLES: usize = 4;
const REFINE_RADIUS: usize = 2;

fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    (0..=max_lag)
        .map(|l| x.iter().zip(&x[l.min(x.len())..]).map(|(a, b)| a * b).sum())
        .collect()
}

fn interp(r: &[f64], pos: f64) -> f64 {
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    match (r.get(i), r.get(i + 1)) {
        (Some(&a), Some(&b)) => a + f * (b - a),
        (Some(&a), None) => a,
        _ => 0.0,
    }
}

/// Centroid of the positive autocorrelation within `REFINE_RADIUS` lags of
/// `center`, or `None` if there is no positive mass there.
fn local_centroid(r: &[f64], center: f64) -> Option<f64> {
    let c = center.round() as usize;
    let lo = c.saturating_sub(REFINE_RADIUS);
    let hi = (c + REFINE_RADIUS).min(r.len() - 1);
    let (mut w, mut wl) = (0.0, 0.0);
    for (l, &v) in r.iter().enumerate().take(hi + 1).skip(lo) {
        let v = v.max(0.0);
        w += v;
        wl += v * l as f64;
    }
    (w > 0.0).then(|| wl / w)
}

/// Global tempo in BPM from the onset envelope.
///
/// The mean-removed envelope's autocorrelation is enhanced by subtracting
/// half its value at half the lag (so a lag that is also a multiple of a
/// faster pulse loses to that pulse), weighted by a log-normal prior over
/// BPM, and maximized over the allowed range. Equal scores go to the
/// slower tempo. The winning lag is then refined from the centroids of the
/// autocorrelation peaks at its first few multiples.
pub fn estimate_tempo<T: Real>(env: &OnsetEnvelope<T>, params: &RhythmParams) -> Result<f64, RhythmError> {
    if env.duration() < MIN_TEMPO_SECONDS {
        return Err(RhythmError::TooShort {
            seconds: env.duration(),
            needed: MIN_TEMPO_SECONDS,
        });
    }
    let x: Vec<f64> = env.strengths.iter().map(|v| v.as_f64()).collect();
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let x: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let spread = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // A flat envelope (silence or a steady drone) has no periodicity.
    if scale == 0.0 || spread <= 1e-9 * scale {
        return Err(RhythmError::NoTempo);
    }

    let hop = env.frame_hop;
    let lag_of = |bpm: f64| 60.0 / (bpm * hop);
    let min_lag = lag_of(params.max_bpm).ceil().max(1.0) as usize;
    let max_lag = lag_of(params.min_bpm).floor() as usize;
    let r_len = (max_lag * REFINE_MULTIPLES + REFINE_RADIUS + 1).min(x.len() - 1);
    if max_lag >= x.len() || min_lag > max_lag {
        return Err(RhythmError::TooShort {
            seconds: env.duration(),
            needed: MIN_TEMPO_SECONDS,
        });
    }
    let r = autocorrelation(&x, r_len);
    let r_pos: Vec<f64> = r.iter().map(|v| v.max(0.0)).collect();

    let mut best: Option<(usize, f64)> = None;
    for lag in (min_lag..=max_lag).rev() {
        let bpm = 60.0 / (lag as f64 * hop);
        let octaves = (bpm / params.prior_center_bpm).log2() / params.prior_octaves;
        let weight = (-0.5 * octaves * octaves).exp();
        let score = weight * (r_pos[lag] - 0.5 * interp(&r_pos, lag as f64 / 2.0));
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((lag, score));
        }
    }
    let (lag, score) = best.expect("non-empty lag range");
    if !(score > 0.0) {
        return Err(RhythmError::NoTempo);
    }

    let mut period = lag as f64;
    for _ in 0..2 {
        let (mut num, mut den) = (0.0, 0.0);
        for k in 1..=REFINE_MULTIPLES {
            let center = k as f64 * period;
            if center.round() as usize + REFINE_RADIUS >= r.len() {
                break;
            }
            if let Some(c) = local_centroid(&r, center) {
                num += c * k as f64;
                den += (k * k) as f64;
            }
        }
        if den > 0.0 {
            period = num / den;
        }
    }
    let bpm = 60.0 / (period * hop);
    Ok(bpm.clamp(params.min_bpm, params.max_bpm))
}
