use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::features::FeatureParams;
use crate::harmony::{CofMapping, HarmonyParams};
use crate::melody::MelodyParams;
use crate::rhythm::RhythmParams;
use crate::structure::StructureParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("config line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: key '{key}' given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("config value {key} = {value} out of range: expected {expected}")]
    Range { key: &'static str, value: String, expected: String },
}

/// Floating-point type used for signal analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    F64,
}

/// Every tunable of the evaluation pipeline.
///
/// Text form is one `key = value` per line; `#` starts a comment. Keys
/// not listed fall back to their defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalConfig {
    pub precision: Precision,
    pub silence_rms: f64,
    pub cof_mapping: CofMapping,
    pub majmin_partial_credit: bool,
    pub chord_median_frames: usize,
    pub dtw_steps: String,
    pub tempo_min_bpm: f64,
    pub tempo_max_bpm: f64,
    pub tempo_prior_bpm: f64,
    pub tempo_prior_octaves: f64,
    pub beat_tightness: f64,
    pub beat_window: f64,
    pub ig_bins: usize,
    pub novelty_kernel: f64,
    pub novelty_floor: f64,
    pub min_boundary_gap: f64,
    pub cluster_tau: f64,
    pub label_hop: f64,
    pub boundary_window: f64,
    pub boundary_window_short: f64,
    pub yin_threshold: f64,
    pub note_gap: f64,
    pub min_note: f64,
    pub pitch_tolerance_cents: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        let f = FeatureParams::default();
        let h = HarmonyParams::default();
        let r = RhythmParams::default();
        let s = StructureParams::default();
        let m = MelodyParams::default();
        Self {
            precision: Precision::F64,
            silence_rms: f.silence_rms,
            cof_mapping: h.cof_mapping,
            majmin_partial_credit: h.majmin_partial_credit,
            chord_median_frames: h.chord_median_frames,
            dtw_steps: "standard".into(),
            tempo_min_bpm: r.min_bpm,
            tempo_max_bpm: r.max_bpm,
            tempo_prior_bpm: r.prior_center_bpm,
            tempo_prior_octaves: r.prior_octaves,
            beat_tightness: r.tightness,
            beat_window: r.beat_window,
            ig_bins: r.ig_bins,
            novelty_kernel: s.kernel_seconds,
            novelty_floor: s.novelty_floor,
            min_boundary_gap: s.min_separation,
            cluster_tau: s.cluster_tau,
            label_hop: s.label_hop,
            boundary_window: s.boundary_window,
            boundary_window_short: s.boundary_window_short,
            yin_threshold: m.yin_threshold,
            note_gap: m.max_gap,
            min_note: m.min_note,
            pitch_tolerance_cents: m.pitch_tolerance_cents,
        }
    }
}

struct Value<'a> {
    key: &'static str,
    raw: &'a str,
    line: usize,
}

impl Value<'_> {
    fn syntax(&self, what: &str) -> ConfigError {
        ConfigError::Syntax {
            line: self.line,
            message: format!("{} expects {what}, got '{}'", self.key, self.raw),
        }
    }

    fn f64(&self) -> Result<f64, ConfigError> {
        self.raw
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.syntax("a number"))
    }

    fn usize(&self) -> Result<usize, ConfigError> {
        self.raw.parse().map_err(|_| self.syntax("a non-negative integer"))
    }

    fn bool(&self) -> Result<bool, ConfigError> {
        match self.raw {
            "true" | "yes" | "on" => Ok(true),
            "false" | "no" | "off" => Ok(false),
            _ => Err(self.syntax("true or false")),
        }
    }
}

const KEYS: [&str; 24] = [
    "precision",
    "silence_rms",
    "cof_mapping",
    "majmin_partial_credit",
    "chord_median_frames",
    "dtw_steps",
    "tempo_min_bpm",
    "tempo_max_bpm",
    "tempo_prior_bpm",
    "tempo_prior_octaves",
    "beat_tightness",
    "beat_window",
    "ig_bins",
    "novelty_kernel",
    "novelty_floor",
    "min_boundary_gap",
    "cluster_tau",
    "label_hop",
    "boundary_window",
    "boundary_window_short",
    "yin_threshold",
    "note_gap",
    "min_note",
    "pitch_tolerance_cents",
];

fn check(key: &'static str, value: f64, ok: bool, expected: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::Range {
            key,
            value: value.to_string(),
            expected: expected.into(),
        })
    }
}

impl EvalConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen: Vec<&'static str> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: line_no,
                message: format!("expected 'key = value', got '{content}'"),
            })?;
            let k = k.trim();
            let key = KEYS.iter().copied().find(|&name| name == k).ok_or_else(|| ConfigError::UnknownKey {
                line: line_no,
                key: k.to_string(),
            })?;
            if seen.contains(&key) {
                return Err(ConfigError::DuplicateKey {
                    line: line_no,
                    key: key.to_string(),
                });
            }
            seen.push(key);
            cfg.set(&Value {
                key,
                raw: v.trim(),
                line: line_no,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    fn set(&mut self, v: &Value<'_>) -> Result<(), ConfigError> {
        match v.key {
            "precision" => {
                self.precision = match v.raw {
                    "f32" => Precision::F32,
                    "f64" => Precision::F64,
                    _ => return Err(v.syntax("f32 or f64")),
                }
            }
            "silence_rms" => self.silence_rms = v.f64()?,
            "cof_mapping" => {
                self.cof_mapping = match v.raw {
                    "relative" => CofMapping::Relative,
                    "parallel" => CofMapping::Parallel,
                    _ => return Err(v.syntax("relative or parallel")),
                }
            }
            "majmin_partial_credit" => self.majmin_partial_credit = v.bool()?,
            "chord_median_frames" => self.chord_median_frames = v.usize()?,
            "dtw_steps" => self.dtw_steps = v.raw.to_string(),
            "tempo_min_bpm" => self.tempo_min_bpm = v.f64()?,
            "tempo_max_bpm" => self.tempo_max_bpm = v.f64()?,
            "tempo_prior_bpm" => self.tempo_prior_bpm = v.f64()?,
            "tempo_prior_octaves" => self.tempo_prior_octaves = v.f64()?,
            "beat_tightness" => self.beat_tightness = v.f64()?,
            "beat_window" => self.beat_window = v.f64()?,
            "ig_bins" => self.ig_bins = v.usize()?,
            "novelty_kernel" => self.novelty_kernel = v.f64()?,
            "novelty_floor" => self.novelty_floor = v.f64()?,
            "min_boundary_gap" => self.min_boundary_gap = v.f64()?,
            "cluster_tau" => self.cluster_tau = v.f64()?,
            "label_hop" => self.label_hop = v.f64()?,
            "boundary_window" => self.boundary_window = v.f64()?,
            "boundary_window_short" => self.boundary_window_short = v.f64()?,
            "yin_threshold" => self.yin_threshold = v.f64()?,
            "note_gap" => self.note_gap = v.f64()?,
            "min_note" => self.min_note = v.f64()?,
            "pitch_tolerance_cents" => self.pitch_tolerance_cents = v.f64()?,
            other => unreachable!("key {other} listed but not handled"),
        }
        Ok(())
    }

    /// Checks every field against its documented range.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let c = self;
        check("silence_rms", c.silence_rms, c.silence_rms > 0.0 && c.silence_rms <= 0.1, "(0, 0.1]")?;
        check(
            "chord_median_frames",
            c.chord_median_frames as f64,
            c.chord_median_frames % 2 == 1 && c.chord_median_frames <= 99,
            "an odd count in [1, 99]",
        )?;
        if c.dtw_steps != "standard" {
            return Err(ConfigError::Range {
                key: "dtw_steps",
                value: c.dtw_steps.clone(),
                expected: "'standard' (steps (1,0), (0,1), (1,1))".into(),
            });
        }
        let bpm_ok = |v: f64| (40.0..=240.0).contains(&v);
        check("tempo_min_bpm", c.tempo_min_bpm, bpm_ok(c.tempo_min_bpm), "[40, 240]")?;
        check(
            "tempo_max_bpm",
            c.tempo_max_bpm,
            bpm_ok(c.tempo_max_bpm) && c.tempo_max_bpm > c.tempo_min_bpm,
            "[40, 240] and above tempo_min_bpm",
        )?;
        check("tempo_prior_bpm", c.tempo_prior_bpm, bpm_ok(c.tempo_prior_bpm), "[40, 240]")?;
        check(
            "tempo_prior_octaves",
            c.tempo_prior_octaves,
            c.tempo_prior_octaves > 0.0 && c.tempo_prior_octaves <= 4.0,
            "(0, 4]",
        )?;
        check("beat_tightness", c.beat_tightness, c.beat_tightness >= 0.0 && c.beat_tightness <= 1e4, "[0, 10000]")?;
        check("beat_window", c.beat_window, c.beat_window > 0.0 && c.beat_window <= 1.0, "(0, 1] seconds")?;
        check("ig_bins", c.ig_bins as f64, (2..=1000).contains(&c.ig_bins), "[2, 1000]")?;
        check("novelty_kernel", c.novelty_kernel, c.novelty_kernel >= 1.0 && c.novelty_kernel <= 60.0, "[1, 60] seconds")?;
        check("novelty_floor", c.novelty_floor, (0.0..=1.0).contains(&c.novelty_floor), "[0, 1]")?;
        check(
            "min_boundary_gap",
            c.min_boundary_gap,
            c.min_boundary_gap > 0.0 && c.min_boundary_gap <= 60.0,
            "(0, 60] seconds",
        )?;
        check("cluster_tau", c.cluster_tau, c.cluster_tau >= 0.0 && c.cluster_tau <= 2.0, "[0, 2]")?;
        check("label_hop", c.label_hop, c.label_hop >= 0.05 && c.label_hop <= 10.0, "[0.05, 10] seconds")?;
        check(
            "boundary_window",
            c.boundary_window,
            c.boundary_window > 0.0 && c.boundary_window <= 30.0,
            "(0, 30] seconds",
        )?;
        check(
            "boundary_window_short",
            c.boundary_window_short,
            c.boundary_window_short > 0.0 && c.boundary_window_short <= 30.0,
            "(0, 30] seconds",
        )?;
        check("yin_threshold", c.yin_threshold, c.yin_threshold > 0.0 && c.yin_threshold < 1.0, "(0, 1)")?;
        check("note_gap", c.note_gap, c.note_gap >= 0.0 && c.note_gap <= 2.0, "[0, 2] seconds")?;
        check("min_note", c.min_note, c.min_note >= 0.0 && c.min_note <= 2.0, "[0, 2] seconds")?;
        check(
            "pitch_tolerance_cents",
            c.pitch_tolerance_cents,
            c.pitch_tolerance_cents > 0.0 && c.pitch_tolerance_cents <= 1200.0,
            "(0, 1200] cents",
        )?;
        Ok(())
    }

    /// Canonical text form: every key in fixed order, one per line.
    pub fn canonical(&self) -> String {
        let c = self;
        let mut out = String::new();
        let mut put = |k: &str, v: &dyn fmt::Display| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("precision", &match c.precision {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        });
        put("silence_rms", &c.silence_rms);
        put("cof_mapping", &match c.cof_mapping {
            CofMapping::Relative => "relative",
            CofMapping::Parallel => "parallel",
        });
        put("majmin_partial_credit", &c.majmin_partial_credit);
        put("chord_median_frames", &c.chord_median_frames);
        put("dtw_steps", &c.dtw_steps);
        put("tempo_min_bpm", &c.tempo_min_bpm);
        put("tempo_max_bpm", &c.tempo_max_bpm);
        put("tempo_prior_bpm", &c.tempo_prior_bpm);
        put("tempo_prior_octaves", &c.tempo_prior_octaves);
        put("beat_tightness", &c.beat_tightness);
        put("beat_window", &c.beat_window);
        put("ig_bins", &c.ig_bins);
        put("novelty_kernel", &c.novelty_kernel);
        put("novelty_floor", &c.novelty_floor);
        put("min_boundary_gap", &c.min_boundary_gap);
        put("cluster_tau", &c.cluster_tau);
        put("label_hop", &c.label_hop);
        put("boundary_window", &c.boundary_window);
        put("boundary_window_short", &c.boundary_window_short);
        put("yin_threshold", &c.yin_threshold);
        put("note_gap", &c.note_gap);
        put("min_note", &c.min_note);
        put("pitch_tolerance_cents", &c.pitch_tolerance_cents);
        out
    }

    /// SHA-256 of [`canonical`](Self::canonical), hex encoded.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn features(&self) -> FeatureParams {
        FeatureParams {
            silence_rms: self.silence_rms,
            ..FeatureParams::default()
        }
    }

    pub fn harmony(&self) -> HarmonyParams {
        HarmonyParams {
            cof_mapping: self.cof_mapping,
            majmin_partial_credit: self.majmin_partial_credit,
            chord_median_frames: self.chord_median_frames,
        }
    }

    pub fn rhythm(&self) -> RhythmParams {
        RhythmParams {
            min_bpm: self.tempo_min_bpm,
            max_bpm: self.tempo_max_bpm,
            prior_center_bpm: self.tempo_prior_bpm,
            prior_octaves: self.tempo_prior_octaves,
            tightness: self.beat_tightness,
            beat_window: self.beat_window,
            ig_bins: self.ig_bins,
        }
    }

    pub fn structure(&self) -> StructureParams {
        StructureParams {
            kernel_seconds: self.novelty_kernel,
            min_separation: self.min_boundary_gap,
            novelty_floor: self.novelty_floor,
            cluster_tau: self.cluster_tau,
            label_hop: self.label_hop,
            boundary_window: self.boundary_window,
            boundary_window_short: self.boundary_window_short,
            ..StructureParams::default()
        }
    }

    pub fn melody(&self) -> MelodyParams {
        MelodyParams {
            yin_threshold: self.yin_threshold,
            silence_rms: self.silence_rms,
            max_gap: self.note_gap,
            min_note: self.min_note,
            pitch_tolerance_cents: self.pitch_tolerance_cents,
            ..MelodyParams::default()
        }
    }
}
