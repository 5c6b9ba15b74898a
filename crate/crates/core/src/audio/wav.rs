use std::io::ErrorKind;
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::{AudioClip, AudioError};
use crate::scalar::Real;

const I16_SCALE: f64 = 32_768.0;

/// Decodes a 16-bit integer or 32-bit float PCM WAV file (mono or stereo).
///
/// Stereo is mixed down by averaging the two channels. Integer samples are
/// divided by 32768; float files whose peak exceeds 1 are peak-scaled into
/// [-1, 1].
pub fn load_wav<T: Real>(path: impl AsRef<Path>) -> Result<AudioClip<T>, AudioError> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(|e| map_open_error(path, e))?;
    let spec = reader.spec();
    let channels = usize::from(spec.channels);
    if channels == 0 || channels > 2 {
        return Err(unsupported(path, format!("{} channels", spec.channels)));
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) / I16_SCALE))
            .collect::<Result<_, _>>()
            .map_err(|e| malformed(path, e))?,
        (SampleFormat::Float, 32) => {
            let raw: Vec<f32> = reader
                .into_samples::<f32>()
                .collect::<Result<_, _>>()
                .map_err(|e| malformed(path, e))?;
            if raw.iter().any(|s| !s.is_finite()) {
                return Err(AudioError::Malformed {
                    path: path.to_path_buf(),
                    reason: "non-finite float sample".into(),
                });
            }
            let peak = raw.iter().fold(0.0f64, |m, &s| m.max(f64::from(s).abs()));
            let scale = if peak > 1.0 { 1.0 / peak } else { 1.0 };
            raw.into_iter().map(|s| f64::from(s) * scale).collect()
        }
        (format, bits) => {
            return Err(unsupported(path, format!("{bits}-bit {format:?} samples")));
        }
    };

    let frames = interleaved.len() / channels;
    if frames == 0 {
        return Err(AudioError::Empty {
            path: path.to_path_buf(),
        });
    }
    let mono: Vec<T> = interleaved
        .chunks_exact(channels)
        .map(|frame| T::lit(frame.iter().sum::<f64>() / channels as f64))
        .collect();

    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    AudioClip::new(mono, spec.sample_rate, id)
}

/// Writes a clip as 16-bit mono PCM. Samples are clamped to [-1, 1).
pub fn write_wav<T: Real>(clip: &AudioClip<T>, path: impl AsRef<Path>) -> Result<(), AudioError> {
    let path = path.as_ref();
    let spec = WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let err = |e: hound::Error| AudioError::Write {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    let mut writer = WavWriter::create(path, spec).map_err(err)?;
    for &s in clip.samples() {
        let q = (s.as_f64() * I16_SCALE).round().clamp(-32_768.0, 32_767.0) as i16;
        writer.write_sample(q).map_err(err)?;
    }
    writer.finalize().map_err(err)
}

fn map_open_error(path: &Path, e: hound::Error) -> AudioError {
    match e {
        hound::Error::IoError(io) if io.kind() == ErrorKind::UnexpectedEof => AudioError::Malformed {
            path: path.to_path_buf(),
            reason: "truncated header".into(),
        },
        hound::Error::IoError(source) => AudioError::Unreadable {
            path: path.to_path_buf(),
            source,
        },
        hound::Error::Unsupported => unsupported(path, "non-PCM format tag".into()),
        hound::Error::TooWide => unsupported(path, "sample width too large".into()),
        other => malformed(path, other),
    }
}

fn unsupported(path: &Path, detail: String) -> AudioError {
    AudioError::UnsupportedEncoding {
        path: path.to_path_buf(),
        detail,
    }
}

fn malformed(path: &Path, e: hound::Error) -> AudioError {
    AudioError::Malformed {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}
