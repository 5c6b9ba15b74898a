use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use super::{EvalConfig, MetricValue, PairFailure, PairRecord};
use crate::metric::{Direction, Facet, Metric};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unknown report format '{0}' (expected json, csv or md)")]
    UnknownFormat(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            _ => Err(ReportError::UnknownFormat(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    /// Mean over pairs where the metric was measured.
    pub mean: Option<f64>,
    pub count: usize,
    pub missing: usize,
    /// True for the best mean among systems (ties all flagged).
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemSummary {
    pub pairs: usize,
    pub metrics: BTreeMap<Metric, MetricSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricInfo {
    pub key: Metric,
    pub facet: Facet,
    pub direction: Direction,
}

/// Full benchmark report. Contains no timings, so identical inputs give
/// byte-identical output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McpReport {
    pub config_fingerprint: String,
    pub metrics: Vec<MetricInfo>,
    pub per_system: BTreeMap<String, SystemSummary>,
    pub per_pair: BTreeMap<String, PairRecord>,
    pub failures: Vec<PairFailure>,
}

impl McpReport {
    pub fn succeeded(&self) -> usize {
        self.per_pair.len()
    }
}

/// Groups records by system and averages each metric over the pairs
/// where it is present. Input order does not matter.
pub fn aggregate(records: &[PairRecord], failures: &[PairFailure], config: &EvalConfig) -> McpReport {
    let per_pair: BTreeMap<String, PairRecord> =
        records.iter().map(|r| (r.pair_id.clone(), r.clone())).collect();
    let mut failures = failures.to_vec();
    failures.sort_by(|a, b| (&a.pair_id, &a.system_id).cmp(&(&b.pair_id, &b.system_id)));

    let mut by_system: BTreeMap<&str, Vec<&PairRecord>> = BTreeMap::new();
    for r in per_pair.values() {
        by_system.entry(&r.system_id).or_default().push(r);
    }
    let mut per_system: BTreeMap<String, SystemSummary> = by_system
        .into_iter()
        .map(|(sys, recs)| {
            let metrics = Metric::ALL
                .into_iter()
                .map(|m| {
                    let values: Vec<f64> = recs.iter().filter_map(|r| r.metric(m).value()).collect();
                    let mean = (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
                    let summary = MetricSummary {
                        mean,
                        count: values.len(),
                        missing: recs.len() - values.len(),
                        best: false,
                    };
                    (m, summary)
                })
                .collect();
            (
                sys.to_string(),
                SystemSummary {
                    pairs: recs.len(),
                    metrics,
                },
            )
        })
        .collect();

    for m in Metric::ALL {
        let best = per_system
            .values()
            .filter_map(|s| s.metrics[&m].mean)
            .reduce(|a, b| if m.direction().better(b, a) { b } else { a });
        if let Some(best) = best {
            for s in per_system.values_mut() {
                let entry = s.metrics.get_mut(&m).expect("all metrics present");
                entry.best = entry.mean == Some(best);
            }
        }
    }

    McpReport {
        config_fingerprint: config.fingerprint(),
        metrics: Metric::ALL
            .into_iter()
            .map(|m| MetricInfo {
                key: m,
                facet: m.facet(),
                direction: m.direction(),
            })
            .collect(),
        per_system,
        per_pair,
        failures,
    }
}

pub fn emit_report(report: &McpReport, format: ReportFormat) -> Result<String, ReportError> {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Csv => emit_csv(report),
        ReportFormat::Markdown => Ok(emit_markdown(report)),
    }
}

fn emit_csv(report: &McpReport) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["pair_id", "system_id", "status"];
    header.extend(Metric::ALL.iter().map(|m| m.key()));
    header.extend(["missing", "error", "config_fingerprint"]);
    w.write_record(&header)?;

    let mut rows: Vec<Vec<String>> = report
        .per_pair
        .values()
        .map(|r| {
            let mut row = vec![r.pair_id.clone(), r.system_id.clone(), "ok".to_string()];
            row.extend(Metric::ALL.iter().map(|&m| match r.metric(m) {
                MetricValue::Value(v) => format!("{v}"),
                MetricValue::Missing(_) => String::new(),
            }));
            let missing: Vec<String> = r.missing().iter().map(|(m, why)| format!("{m}:{why}")).collect();
            row.extend([missing.join(";"), String::new(), report.config_fingerprint.clone()]);
            row
        })
        .collect();
    rows.extend(report.failures.iter().map(|f| {
        let mut row = vec![f.pair_id.clone(), f.system_id.clone(), "failed".to_string()];
        row.extend(std::iter::repeat_n(String::new(), Metric::ALL.len() + 1));
        row.extend([f.error.clone(), report.config_fingerprint.clone()]);
        row
    }));
    rows.sort_by(|a, b| a[0].cmp(&b[0]));
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn cell(s: &MetricSummary) -> String {
    match s.mean {
        Some(v) if s.best => format!("**{v:.3}**"),
        Some(v) => format!("{v:.3}"),
        None => "n/a".to_string(),
    }
}

fn table(out: &mut String, report: &McpReport, facets: [Facet; 2]) {
    let metrics: Vec<Metric> = Metric::ALL
        .into_iter()
        .filter(|m| facets.contains(&m.facet()))
        .collect();
    let _ = writeln!(out, "### {} / {}\n", facets[0].title(), facets[1].title());
    out.push_str("| System | Pairs |");
    for m in &metrics {
        let _ = write!(out, " {} {} |", m.title(), m.direction().arrow());
    }
    out.push_str("\n|---|---:|");
    for _ in &metrics {
        out.push_str("---:|");
    }
    out.push('\n');
    for (name, s) in &report.per_system {
        let _ = write!(out, "| {name} | {} |", s.pairs);
        for m in &metrics {
            let _ = write!(out, " {} |", cell(&s.metrics[m]));
        }
        out.push('\n');
    }
    out.push('\n');
}

fn emit_markdown(report: &McpReport) -> String {
    let mut out = String::from("## Music context preservation\n\n");
    let _ = writeln!(out, "Config fingerprint: `{}`\n", report.config_fingerprint);
    let _ = writeln!(
        out,
        "{} pairs evaluated, {} failed. Means are over pairs where the metric was measured; best per column in bold.\n",
        report.succeeded(),
        report.failures.len()
    );
    table(&mut out, report, [Facet::Harmony, Facet::Rhythm]);
    table(&mut out, report, [Facet::Structure, Facet::Melody]);

    let missing: Vec<String> = report
        .per_system
        .iter()
        .flat_map(|(name, s)| {
            Metric::ALL
                .iter()
                .filter(|m| s.metrics[m].missing > 0)
                .map(move |m| format!("- {name} `{m}`: missing in {}/{} pairs", s.metrics[m].missing, s.pairs))
        })
        .collect();
    if !missing.is_empty() {
        out.push_str("Missing values:\n\n");
        for line in missing {
            out.push_str(&line);
            out.push('\n');
        }
        out.push('\n');
    }
    if !report.failures.is_empty() {
        out.push_str("Failed pairs:\n\n");
        for f in &report.failures {
            let _ = writeln!(out, "- `{}` ({}): {}", f.pair_id, f.system_id, f.error);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::PairDetails;
    use crate::metric::MissingReason;

    fn record(id: &str, sys: &str, v: f64) -> PairRecord {
        let mut metrics: BTreeMap<Facet, BTreeMap<Metric, MetricValue>> = BTreeMap::new();
        for m in Metric::ALL {
            let value = if m == Metric::MotifRecall && v < 0.2 {
                MetricValue::Missing(MissingReason::RefNoMotifs)
            } else {
                MetricValue::Value(v)
            };
            metrics.entry(m.facet()).or_default().insert(m, value);
        }
        let na = MetricValue::Missing(MissingReason::NoSignal);
        PairRecord {
            pair_id: id.into(),
            system_id: sys.into(),
            instruction: None,
            duration_seconds: 10.0,
            metrics,
            details: PairDetails {
                reference_key: None,
                edited_key: None,
                reference_tempo_bpm: None,
                edited_tempo_bpm: None,
                information_gain_raw: na,
                adjusted_rand_index_raw: na,
                boundary_f_measure_short: na,
                voicing_recall_pitch: na,
                reference_boundaries: vec![],
                edited_boundaries: vec![],
            },
        }
    }

    fn sample() -> Vec<PairRecord> {
        vec![
            record("p1", "a", 0.5),
            record("p2", "a", 0.7),
            record("p3", "b", 0.9),
            record("p4", "b", 0.1),
        ]
    }

    #[test]
    fn means_skip_missing_values() {
        let rep = aggregate(&sample(), &[], &EvalConfig::default());
        let b = &rep.per_system["b"].metrics;
        assert!((b[&Metric::BeatFMeasure].mean.unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(b[&Metric::MotifRecall].mean, Some(0.9));
        assert_eq!(b[&Metric::MotifRecall].missing, 1);
        assert_eq!(b[&Metric::MotifRecall].count, 1);
    }

    #[test]
    fn best_follows_direction() {
        let rep = aggregate(&sample(), &[], &EvalConfig::default());
        let a = &rep.per_system["a"].metrics;
        let b = &rep.per_system["b"].metrics;
        // a: 0.6, b: 0.5 on every metric measured over both pairs.
        assert!(a[&Metric::BeatFMeasure].best && !b[&Metric::BeatFMeasure].best);
        assert!(b[&Metric::CofDistance].best && !a[&Metric::CofDistance].best);
        assert!(b[&Metric::MotifRecall].best);
    }

    #[test]
    fn aggregation_ignores_input_order() {
        let cfg = EvalConfig::default();
        let mut recs = sample();
        let fails = vec![
            PairFailure {
                pair_id: "z".into(),
                system_id: "a".into(),
                error: "bad".into(),
            },
            PairFailure {
                pair_id: "y".into(),
                system_id: "b".into(),
                error: "bad".into(),
            },
        ];
        let first = aggregate(&recs, &fails, &cfg);
        recs.reverse();
        let mut f2 = fails.clone();
        f2.reverse();
        let second = aggregate(&recs, &f2, &cfg);
        assert_eq!(first, second);
        for fmt in [ReportFormat::Json, ReportFormat::Csv, ReportFormat::Markdown] {
            assert_eq!(emit_report(&first, fmt).unwrap(), emit_report(&second, fmt).unwrap());
        }
    }

    #[test]
    fn formats_parse_and_reject_unknown() {
        assert_eq!("JSON".parse::<ReportFormat>().unwrap(), ReportFormat::Json);
        assert_eq!("markdown".parse::<ReportFormat>().unwrap(), ReportFormat::Markdown);
        assert!(matches!("xml".parse::<ReportFormat>(), Err(ReportError::UnknownFormat(_))));
    }

    #[test]
    fn json_marks_missing_with_reason() {
        let rep = aggregate(&sample(), &[], &EvalConfig::default());
        let v: serde_json::Value = serde_json::from_str(&emit_report(&rep, ReportFormat::Json).unwrap()).unwrap();
        assert_eq!(v["per_pair"]["p4"]["metrics"]["melody"]["motif_recall"]["missing"], "ref-no-motifs");
        assert_eq!(v["per_pair"]["p1"]["metrics"]["rhythm"]["beat_f_measure"]["value"], 0.5);
        assert_eq!(v["metrics"][0]["direction"], "lower_is_better");
        assert_eq!(v["config_fingerprint"].as_str().unwrap().len(), 64);
    }

    #[test]
    fn csv_has_one_row_per_pair_and_failure() {
        let fails = vec![PairFailure {
            pair_id: "p0".into(),
            system_id: "a".into(),
            error: "unreadable".into(),
        }];
        let rep = aggregate(&sample(), &fails, &EvalConfig::default());
        let text = emit_report(&rep, ReportFormat::Csv).unwrap();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
        assert_eq!(rows.len(), 5);
        assert_eq!(&rows[0][2], "failed");
        let headers = rd.headers().unwrap().clone();
        assert_eq!(headers.len(), 3 + 11 + 3);
        let col = headers.iter().position(|h| h == "missing").unwrap();
        assert_eq!(&rows[4][col], "motif_recall:ref-no-motifs");
    }

    #[test]
    fn markdown_bolds_best_and_formats_three_decimals() {
        let rep = aggregate(&sample(), &[], &EvalConfig::default());
        let md = emit_report(&rep, ReportFormat::Markdown).unwrap();
        assert!(md.contains("| a | 2 | 0.600 |") || md.contains("| a | 2 | 0.600"));
        assert!(md.contains("**0.500**"));
        assert!(md.contains("Chroma DTW Similarity ↑"));
        assert!(md.contains("Motif Overlap Recall ↑"));
    }
}
