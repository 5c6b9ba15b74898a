use super::{FeatureError, Spectrogram};
use crate::scalar::Real;

const MIN_HZ: f64 = 40.0;

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular mel filters (HTK mel scale) between 40 Hz and Nyquist, as
/// per-band `(bin, weight)` lists.
fn mel_filters(n_bands: usize, n_bins: usize, sample_rate: u32, window: usize) -> Vec<Vec<(usize, f64)>> {
    let nyquist = f64::from(sample_rate) / 2.0;
    let (lo, hi) = (hz_to_mel(MIN_HZ), hz_to_mel(nyquist));
    let edges: Vec<f64> = (0..n_bands + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (n_bands + 1) as f64))
        .collect();
    let bin_hz = f64::from(sample_rate) / window as f64;
    (0..n_bands)
        .map(|b| {
            let (l, c, r) = (edges[b], edges[b + 1], edges[b + 2]);
            (0..n_bins)
                .filter_map(|k| {
                    let f = k as f64 * bin_hz;
                    let w = if f > l && f <= c {
                        (f - l) / (c - l)
                    } else if f > c && f < r {
                        (r - f) / (r - c)
                    } else {
                        0.0
                    };
                    (w > 0.0).then_some((k, w))
                })
                .collect()
        })
        .collect()
}

/// Natural-log mel band energies per frame: `ln(energy + energy_floor)`.
pub fn timbre_features<T: Real>(
    spec: &Spectrogram<T>,
    n_bands: usize,
    energy_floor: f64,
) -> Result<Vec<Vec<T>>, FeatureError> {
    if n_bands < 4 {
        return Err(FeatureError::InvalidParams(format!(
            "timbre needs at least 4 bands, got {n_bands}"
        )));
    }
    let filters = mel_filters(n_bands, spec.n_bins(), spec.sample_rate(), spec.window_size());
    let floor = T::lit(energy_floor);
    Ok(spec
        .frames()
        .map(|mags| {
            filters
                .iter()
                .map(|band| {
                    let e: T = band.iter().map(|&(k, w)| T::lit(w) * mags[k] * mags[k]).sum();
                    (e + floor).ln()
                })
                .collect()
        })
        .collect())
}
