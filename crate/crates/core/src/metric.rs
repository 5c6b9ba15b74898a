//! The eleven context-preservation metrics, their facets and directions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Facet {
    Harmony,
    Rhythm,
    Structure,
    Melody,
}

impl Facet {
    pub const ALL: [Facet; 4] = [Facet::Harmony, Facet::Rhythm, Facet::Structure, Facet::Melody];

    pub fn title(self) -> &'static str {
        match self {
            Facet::Harmony => "Harmony & Tonality",
            Facet::Rhythm => "Rhythm & Meter",
            Facet::Structure => "Structural Form",
            Facet::Melody => "Melodic Content & Motifs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

impl Direction {
    pub fn arrow(self) -> &'static str {
        match self {
            Direction::HigherIsBetter => "↑",
            Direction::LowerIsBetter => "↓",
        }
    }

    /// True if `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Direction::HigherIsBetter => a > b,
            Direction::LowerIsBetter => a < b,
        }
    }
}

/// Declaration order is report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    CofDistance,
    ChromaDtwSimilarity,
    MajminScore,
    DeltaBpm,
    BeatFMeasure,
    InformationGain,
    AdjustedRandIndex,
    BoundaryFMeasure,
    VoicingRecall,
    MotifJaccard,
    MotifRecall,
}

impl Metric {
    pub const ALL: [Metric; 11] = [
        Metric::CofDistance,
        Metric::ChromaDtwSimilarity,
        Metric::MajminScore,
        Metric::DeltaBpm,
        Metric::BeatFMeasure,
        Metric::InformationGain,
        Metric::AdjustedRandIndex,
        Metric::BoundaryFMeasure,
        Metric::VoicingRecall,
        Metric::MotifJaccard,
        Metric::MotifRecall,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Metric::CofDistance => "cof_distance",
            Metric::ChromaDtwSimilarity => "chroma_dtw_similarity",
            Metric::MajminScore => "majmin_score",
            Metric::DeltaBpm => "delta_bpm",
            Metric::BeatFMeasure => "beat_f_measure",
            Metric::InformationGain => "information_gain",
            Metric::AdjustedRandIndex => "adjusted_rand_index",
            Metric::BoundaryFMeasure => "boundary_f_measure",
            Metric::VoicingRecall => "voicing_recall",
            Metric::MotifJaccard => "motif_jaccard",
            Metric::MotifRecall => "motif_recall",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Metric::CofDistance => "Circle of Fifths Distance",
            Metric::ChromaDtwSimilarity => "Chroma DTW Similarity",
            Metric::MajminScore => "Major Minor Score",
            Metric::DeltaBpm => "Δ BPM",
            Metric::BeatFMeasure => "Beat F-measure",
            Metric::InformationGain => "Information Gain",
            Metric::AdjustedRandIndex => "Adjusted Rand Index",
            Metric::BoundaryFMeasure => "Boundary F-measure",
            Metric::VoicingRecall => "Voicing Recall",
            Metric::MotifJaccard => "Motif Overlap Jaccard",
            Metric::MotifRecall => "Motif Overlap Recall",
        }
    }

    pub fn facet(self) -> Facet {
        match self {
            Metric::CofDistance | Metric::ChromaDtwSimilarity | Metric::MajminScore => Facet::Harmony,
            Metric::DeltaBpm | Metric::BeatFMeasure | Metric::InformationGain => Facet::Rhythm,
            Metric::AdjustedRandIndex | Metric::BoundaryFMeasure => Facet::Structure,
            Metric::VoicingRecall | Metric::MotifJaccard | Metric::MotifRecall => Facet::Melody,
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Metric::CofDistance | Metric::DeltaBpm => Direction::LowerIsBetter,
            _ => Direction::HigherIsBetter,
        }
    }

    /// Value for a perfectly preserved edit.
    pub fn perfect_value(self) -> f64 {
        match self.direction() {
            Direction::LowerIsBetter => 0.0,
            Direction::HigherIsBetter => 1.0,
        }
    }

    /// Definition text for `--explain`.
    pub fn explanation(self) -> &'static str {
        match self {
            Metric::CofDistance => {
                "Global key of each clip from Krumhansl-Kessler profile correlation on the \
                 time-averaged chromagram. Minor keys are mapped to their relative major, then \
                 the shortest number of fifth steps between the two tonics is divided by 6. \
                 Range [0, 1]; 0 = same key position, 1 = tritone apart."
            }
            Metric::ChromaDtwSimilarity => {
                "Frame-level chromagrams aligned by dynamic time warping with steps \
                 (1,0), (0,1), (1,1) and cosine-distance frame cost. Similarity is \
                 1 - (optimal path cost / path length). Range [0, 1]; 1 = identical sequences."
            }
            Metric::MajminScore => {
                "Chord labels from 24 major/minor triad templates (median filtered) on each \
                 clip. Duration-weighted fraction of the common timeline where root and \
                 major/minor quality agree (or both are no-chord). Range [0, 1]."
            }
            Metric::DeltaBpm => {
                "Absolute difference between the global tempo estimates of the two clips, \
                 in beats per minute. 0 = same tempo."
            }
            Metric::BeatFMeasure => {
                "Beats tracked independently on both clips; edited beats are matched \
                 one-to-one to original beats within ±70 ms. Harmonic mean of precision and \
                 recall. Range [0, 1]."
            }
            Metric::InformationGain => {
                "Each edited beat's offset to the nearest original beat, as a fraction of the \
                 local beat period, is histogrammed into 41 bins. Gain = log2(41) - entropy, \
                 divided by log2(41). 0 = errors uniformly spread, 1 = all in one bin."
            }
            Metric::AdjustedRandIndex => {
                "Sections found by novelty-based segmentation and clustered into labels; \
                 the two 0.5 s label sequences are compared with the chance-corrected Rand \
                 index, negative values clamped to 0. Range [0, 1]."
            }
            Metric::BoundaryFMeasure => {
                "Internal section boundaries matched one-to-one within ±3 s; F-score of \
                 precision and recall. Two clips without internal boundaries score 1."
            }
            Metric::VoicingRecall => {
                "YIN pitch tracking on both clips; fraction of frames voiced in the original \
                 that are also voiced in the edit. Range [0, 1]."
            }
            Metric::MotifJaccard => {
                "Pitch tracks are segmented into notes; every run of three consecutive \
                 semitone intervals is a motif. Jaccard index of the two motif sets \
                 (1 when both are empty)."
            }
            Metric::MotifRecall => {
                "Fraction of the original's interval 3-grams that also occur in the edit. \
                 Missing when the original has no motifs."
            }
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Metric::ALL
            .into_iter()
            .find(|m| m.key() == norm)
            .ok_or_else(|| {
                let names: Vec<&str> = Metric::ALL.iter().map(|m| m.key()).collect();
                format!("unknown metric '{s}' (expected one of: {})", names.join(", "))
            })
    }
}

/// Why a metric could not be measured for a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingReason {
    /// One of the clips is entirely below the silence threshold.
    NoSignal,
    /// Key estimation found no non-silent frame.
    NoKey,
    /// Tempo estimation failed (flat onset envelope).
    NoTempo,
    /// Clip shorter than the analysis needs.
    TooShort,
    /// Fewer beats than the metric requires.
    TooFewBeats,
    /// The original has no voiced frames.
    RefUnvoiced,
    /// The original yields no interval 3-grams.
    RefNoMotifs,
    /// Chord sequences share no positive-duration span.
    NoOverlap,
}

impl MissingReason {
    pub fn code(self) -> &'static str {
        match self {
            MissingReason::NoSignal => "no-signal",
            MissingReason::NoKey => "no-key",
            MissingReason::NoTempo => "no-tempo",
            MissingReason::TooShort => "too-short",
            MissingReason::TooFewBeats => "too-few-beats",
            MissingReason::RefUnvoiced => "ref-unvoiced",
            MissingReason::RefNoMotifs => "ref-no-motifs",
            MissingReason::NoOverlap => "no-overlap",
        }
    }
}

impl fmt::Display for MissingReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// A metric value or the reason it is missing.
pub type Measure = Result<f64, MissingReason>;
