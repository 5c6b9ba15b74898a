use super::{FeatureError, Spectrogram};
use crate::scalar::Real;

/// Log-power dynamic range kept below the spectrogram peak.
const DYNAMIC_RANGE_DB: f64 = 80.0;

/// Spectral-flux onset strength, one value per pair of adjacent frames.
#[derive(Debug, Clone, PartialEq)]
pub struct OnsetEnvelope<T> {
    pub strengths: Vec<T>,
    /// Seconds between consecutive values.
    pub frame_hop: f64,
    /// Time of `strengths[0]` in seconds.
    pub offset: f64,
}

impl<T: Real> OnsetEnvelope<T> {
    pub fn len(&self) -> usize {
        self.strengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strengths.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.offset + i as f64 * self.frame_hop
    }

    pub fn duration(&self) -> f64 {
        self.strengths.len() as f64 * self.frame_hop
    }
}

/// Half-wave rectified first difference of log power, averaged over bins.
///
/// Log power is `10 log10(max(|X|^2, floor))` where the floor is the larger
/// of `energy_floor` and 80 dB below the spectrogram's peak power. Value
/// `i` measures the change from frame `i` to frame `i + 1`; it is stamped at
/// the centre of the hop of samples that frame `i + 1` adds at its leading
/// edge, which is where log flux responds to a new event.
pub fn onset_envelope<T: Real>(
    spec: &Spectrogram<T>,
    energy_floor: f64,
) -> Result<OnsetEnvelope<T>, FeatureError> {
    let n = spec.n_frames();
    if n < 2 {
        return Err(FeatureError::TooFewFrames { frames: n, needed: 2 });
    }
    let peak = spec
        .frames()
        .flatten()
        .fold(T::zero(), |m, &v| m.max(v * v));
    let floor = T::lit(energy_floor).max(peak * T::lit(10f64.powf(-DYNAMIC_RANGE_DB / 10.0)));
    let log_power = |m: T| T::lit(10.0) * (m * m).max(floor).log10();

    let n_bins = T::from_count(spec.n_bins());
    let mut prev: Vec<T> = spec.frame(0).iter().map(|&m| log_power(m)).collect();
    let mut strengths = Vec::with_capacity(n - 1);
    for i in 1..n {
        let cur: Vec<T> = spec.frame(i).iter().map(|&m| log_power(m)).collect();
        let flux: T = cur
            .iter()
            .zip(&prev)
            .map(|(&c, &p)| (c - p).max(T::zero()))
            .sum();
        strengths.push(flux / n_bins);
        prev = cur;
    }

    let sr = f64::from(spec.sample_rate());
    let lead = spec.window_size() as f64 - spec.hop_size() as f64 / 2.0;
    Ok(OnsetEnvelope {
        strengths,
        frame_hop: spec.frame_hop(),
        offset: (spec.hop_size() as f64 + lead) / sr,
    })
}
