//! Floating-point abstraction shared by the signal-processing code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst};
use rustfft::FftNum;

/// Sample and feature scalar: `f32` or `f64`.
///
/// Everything that touches PCM samples, spectra, chroma or pitch is generic
/// over this trait. Event times (beats, boundaries, chord intervals) and the
/// final metric values are always `f64`.
pub trait Real:
    FftNum + Float + FloatConst + Sum + Default + Display + Debug + Send + Sync + 'static
{
    /// Converts an `f64` constant into `Self`.
    fn lit(x: f64) -> Self;

    /// Converts a count into `Self`.
    fn from_count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    fn as_f64(self) -> f64;
}

impl Real for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

/// Root-mean-square of a slice; zero for an empty slice.
pub(crate) fn rms<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    let sum: T = xs.iter().map(|&x| x * x).sum();
    (sum / T::from_count(xs.len())).sqrt()
}
