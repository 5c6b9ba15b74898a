//! Corpus evaluation: configuration, manifests, per-pair scoring,
//! per-system aggregation and report rendering.

mod config;
mod evaluate;
pub mod fixtures;
mod manifest;
mod report;

pub use config::{ConfigError, EvalConfig, Precision};
pub use evaluate::{
    admit_clips, evaluate_clips, evaluate_corpus, evaluate_pair, ClipEvaluation, CorpusResult, MetricValue,
    PairDetails, PairError, PairFailure, PairOutcome, PairRecord, PairTimings, MIN_CLIP_SECONDS,
};
pub use manifest::{load_manifest, parse_manifest, EvalPair, ManifestError};
pub use report::{aggregate, emit_report, McpReport, MetricInfo, MetricSummary, ReportError, ReportFormat, SystemSummary};
