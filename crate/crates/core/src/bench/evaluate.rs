use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use super::{EvalConfig, EvalPair, Precision};
use crate::audio::{load_wav, resample, AudioClip, AudioError, ANALYSIS_RATE};
use crate::features::{Analysis, FeatureError};
use crate::harmony::{eval_harmony, HarmonyScores};
use crate::melody::{eval_melody, MelodyScores};
use crate::metric::{Facet, Measure, Metric, MissingReason};
use crate::rhythm::{eval_rhythm, RhythmScores};
use crate::scalar::Real;
use crate::structure::{eval_structure, StructureScores};

/// Clips shorter than this (after truncation to the common span) are not
/// evaluated.
pub const MIN_CLIP_SECONDS: f64 = 1.0;

#[derive(Debug, Error)]
pub enum PairError {
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error("common span of the two clips is {seconds:.3} s, need at least {MIN_CLIP_SECONDS} s")]
    TooShort { seconds: f64 },
    #[error("feature extraction failed: {0}")]
    Features(#[from] FeatureError),
}

/// Metric value or missing-reason, as it appears in reports.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricValue {
    Value(f64),
    Missing(MissingReason),
}

impl Serialize for MetricValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(1))?;
        match self {
            MetricValue::Value(v) => m.serialize_entry("value", v)?,
            MetricValue::Missing(r) => m.serialize_entry("missing", r)?,
        }
        m.end()
    }
}

impl From<Measure> for MetricValue {
    fn from(m: Measure) -> Self {
        match m {
            Ok(v) => MetricValue::Value(v),
            Err(r) => MetricValue::Missing(r),
        }
    }
}

impl MetricValue {
    pub fn value(self) -> Option<f64> {
        match self {
            MetricValue::Value(v) => Some(v),
            MetricValue::Missing(_) => None,
        }
    }
}

/// Wall-clock cost of one pair, kept out of the deterministic report.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PairTimings {
    pub load: Duration,
    pub analysis: Duration,
    pub harmony: Duration,
    pub rhythm: Duration,
    pub structure: Duration,
    pub melody: Duration,
}

impl PairTimings {
    pub fn total(&self) -> Duration {
        self.load + self.analysis + self.harmony + self.rhythm + self.structure + self.melody
    }
}

/// All facet scores for one pair of admitted clips.
#[derive(Debug, Clone)]
pub struct ClipEvaluation {
    /// Seconds of audio compared (the common span).
    pub duration: f64,
    pub harmony: HarmonyScores,
    pub rhythm: RhythmScores,
    pub structure: StructureScores,
    pub melody: MelodyScores,
    pub timings: PairTimings,
}

impl ClipEvaluation {
    pub fn measure(&self, m: Metric) -> Measure {
        match m {
            Metric::CofDistance => self.harmony.cof_distance,
            Metric::ChromaDtwSimilarity => self.harmony.chroma_dtw_similarity,
            Metric::MajminScore => self.harmony.majmin_score,
            Metric::DeltaBpm => self.rhythm.delta_bpm,
            Metric::BeatFMeasure => self.rhythm.beat_f_measure,
            Metric::InformationGain => self.rhythm.information_gain,
            Metric::AdjustedRandIndex => self.structure.adjusted_rand_index,
            Metric::BoundaryFMeasure => self.structure.boundary_f_measure,
            Metric::VoicingRecall => self.melody.voicing_recall,
            Metric::MotifJaccard => self.melody.motif_jaccard,
            Metric::MotifRecall => self.melody.motif_recall,
        }
    }
}

fn timed<R>(slot: &mut Duration, f: impl FnOnce() -> R) -> R {
    let start = Instant::now();
    let out = f();
    *slot += start.elapsed();
    out
}

/// Resamples both clips to the analysis rate, truncates them to their
/// common length and rejects spans under [`MIN_CLIP_SECONDS`].
pub fn admit_clips<T: Real>(
    reference: &AudioClip<T>,
    edited: &AudioClip<T>,
) -> Result<(AudioClip<T>, AudioClip<T>), PairError> {
    let r = resample(reference, ANALYSIS_RATE);
    let e = resample(edited, ANALYSIS_RATE);
    let n = r.len().min(e.len());
    let seconds = n as f64 / f64::from(ANALYSIS_RATE);
    if seconds < MIN_CLIP_SECONDS {
        return Err(PairError::TooShort { seconds });
    }
    Ok((r.truncated(n), e.truncated(n)))
}

/// Runs all four facets on an (original, edited) clip pair.
pub fn evaluate_clips<T: Real>(
    reference: &AudioClip<T>,
    edited: &AudioClip<T>,
    config: &EvalConfig,
) -> Result<ClipEvaluation, PairError> {
    let mut timings = PairTimings::default();
    let (r, e) = timed(&mut timings.load, || admit_clips(reference, edited))?;
    let fp = config.features();
    let (ra, ea) = timed(&mut timings.analysis, || -> Result<_, FeatureError> {
        Ok((Analysis::new(&r, &fp)?, Analysis::new(&e, &fp)?))
    })?;
    let harmony = timed(&mut timings.harmony, || eval_harmony(&ra, &ea, &config.harmony()));
    let rhythm = timed(&mut timings.rhythm, || eval_rhythm(&ra, &ea, &config.rhythm()));
    let structure = timed(&mut timings.structure, || eval_structure(&ra, &ea, &config.structure()));
    let melody = timed(&mut timings.melody, || eval_melody(&r, &e, &config.melody()));
    Ok(ClipEvaluation {
        duration: r.duration(),
        harmony,
        rhythm,
        structure,
        melody,
        timings,
    })
}

/// Diagnostic values reported next to the headline metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDetails {
    pub reference_key: Option<String>,
    pub edited_key: Option<String>,
    pub reference_tempo_bpm: Option<f64>,
    pub edited_tempo_bpm: Option<f64>,
    pub information_gain_raw: MetricValue,
    pub adjusted_rand_index_raw: MetricValue,
    pub boundary_f_measure_short: MetricValue,
    pub voicing_recall_pitch: MetricValue,
    pub reference_boundaries: Vec<f64>,
    pub edited_boundaries: Vec<f64>,
}

/// Deterministic per-pair result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRecord {
    pub pair_id: String,
    pub system_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instruction: Option<String>,
    pub duration_seconds: f64,
    pub metrics: BTreeMap<Facet, BTreeMap<Metric, MetricValue>>,
    pub details: PairDetails,
}

impl PairRecord {
    pub fn from_evaluation(pair_id: &str, system_id: &str, instruction: Option<String>, ev: &ClipEvaluation) -> Self {
        let mut metrics: BTreeMap<Facet, BTreeMap<Metric, MetricValue>> = BTreeMap::new();
        for m in Metric::ALL {
            metrics.entry(m.facet()).or_default().insert(m, ev.measure(m).into());
        }
        let inner = |s: &Option<crate::structure::Segmentation>| {
            s.as_ref().map(|s| s.internal_boundaries().to_vec()).unwrap_or_default()
        };
        Self {
            pair_id: pair_id.to_string(),
            system_id: system_id.to_string(),
            instruction,
            duration_seconds: ev.duration,
            metrics,
            details: PairDetails {
                reference_key: ev.harmony.reference_key.map(|k| k.to_string()),
                edited_key: ev.harmony.edited_key.map(|k| k.to_string()),
                reference_tempo_bpm: ev.rhythm.reference_beats.as_ref().map(|g| g.tempo_bpm()),
                edited_tempo_bpm: ev.rhythm.edited_beats.as_ref().map(|g| g.tempo_bpm()),
                information_gain_raw: ev.rhythm.information_gain_raw.into(),
                adjusted_rand_index_raw: ev.structure.adjusted_rand_index_raw.into(),
                boundary_f_measure_short: ev.structure.boundary_f_measure_short.into(),
                voicing_recall_pitch: ev.melody.voicing_recall_pitch.into(),
                reference_boundaries: inner(&ev.structure.reference_segments),
                edited_boundaries: inner(&ev.structure.edited_segments),
            },
        }
    }

    pub fn metric(&self, m: Metric) -> MetricValue {
        self.metrics[&m.facet()][&m]
    }

    /// Metrics that could not be measured, with their reasons.
    pub fn missing(&self) -> Vec<(Metric, MissingReason)> {
        Metric::ALL
            .into_iter()
            .filter_map(|m| match self.metric(m) {
                MetricValue::Missing(r) => Some((m, r)),
                MetricValue::Value(_) => None,
            })
            .collect()
    }
}

/// A pair that could not be evaluated at all.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairFailure {
    pub pair_id: String,
    pub system_id: String,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct PairOutcome {
    pub result: Result<PairRecord, PairFailure>,
    pub timings: PairTimings,
}

fn evaluate_as<T: Real>(pair: &EvalPair, config: &EvalConfig) -> Result<(PairRecord, PairTimings), PairError> {
    let start = Instant::now();
    let r: AudioClip<T> = load_wav(&pair.original_path)?;
    let e: AudioClip<T> = load_wav(&pair.edited_path)?;
    let load = start.elapsed();
    let mut ev = evaluate_clips(&r, &e, config)?;
    ev.timings.load += load;
    let record = PairRecord::from_evaluation(&pair.pair_id, &pair.system_id, pair.instruction.clone(), &ev);
    Ok((record, ev.timings))
}

/// Loads and evaluates one manifest pair. Errors become a [`PairFailure`].
pub fn evaluate_pair(pair: &EvalPair, config: &EvalConfig) -> PairOutcome {
    let result = match config.precision {
        Precision::F32 => evaluate_as::<f32>(pair, config),
        Precision::F64 => evaluate_as::<f64>(pair, config),
    };
    match result {
        Ok((record, timings)) => PairOutcome {
            result: Ok(record),
            timings,
        },
        Err(e) => PairOutcome {
            result: Err(PairFailure {
                pair_id: pair.pair_id.clone(),
                system_id: pair.system_id.clone(),
                error: e.to_string(),
            }),
            timings: PairTimings::default(),
        },
    }
}

/// Successful records and failures, each sorted by pair id.
#[derive(Debug, Clone, Default)]
pub struct CorpusResult {
    pub records: Vec<PairRecord>,
    pub failures: Vec<PairFailure>,
    pub timings: Vec<(String, PairTimings)>,
}

/// Evaluates every pair on a pool of `jobs` threads. `progress` is called
/// once per finished pair, from the worker thread.
pub fn evaluate_corpus(
    pairs: &[EvalPair],
    config: &EvalConfig,
    jobs: usize,
    progress: &(dyn Fn(&EvalPair, &PairOutcome) + Sync),
) -> Result<CorpusResult, rayon::ThreadPoolBuildError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    let outcomes: Vec<(String, PairOutcome)> = pool.install(|| {
        pairs
            .par_iter()
            .map(|p| {
                let o = evaluate_pair(p, config);
                progress(p, &o);
                (p.pair_id.clone(), o)
            })
            .collect()
    });
    let mut out = CorpusResult::default();
    for (id, o) in outcomes {
        out.timings.push((id, o.timings));
        match o.result {
            Ok(r) => out.records.push(r),
            Err(f) => out.failures.push(f),
        }
    }
    out.records.sort_by(|a, b| a.pair_id.cmp(&b.pair_id));
    out.failures.sort_by(|a, b| a.pair_id.cmp(&b.pair_id));
    out.timings.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}
