use std::fs;
use std::sync::atomic::{AtomicUsize, Ordering};

use mcp_eval::audio::{resample, synth_fixture, write_wav, AudioClip, FixtureSpec, ANALYSIS_RATE};
use mcp_eval::bench::fixtures::song;
use mcp_eval::bench::{
    admit_clips, aggregate, emit_report, evaluate_clips, evaluate_corpus, parse_manifest, EvalConfig, PairError,
    PairRecord, ReportFormat,
};
use mcp_eval::{AudioClipF32, AudioClipF64, Metric};

fn clip<T: mcp_eval::scalar::Real>(spec: &FixtureSpec, rate: u32) -> AudioClip<T> {
    synth_fixture(spec, rate).unwrap()
}

#[test]
fn f32_and_f64_agree_on_an_edited_song() {
    let cfg = EvalConfig::default();
    let (orig, edit) = (song(2), song(2).time_stretched(1.1));
    let r64: AudioClipF64 = clip(&orig, ANALYSIS_RATE);
    let e64: AudioClipF64 = clip(&edit, ANALYSIS_RATE);
    let r32: AudioClipF32 = r64.cast();
    let e32: AudioClipF32 = e64.cast();
    let a = evaluate_clips(&r64, &e64, &cfg).unwrap();
    let b = evaluate_clips(&r32, &e32, &cfg).unwrap();
    for m in Metric::ALL {
        let (x, y) = (a.measure(m).unwrap(), b.measure(m).unwrap());
        let tol = if m == Metric::DeltaBpm { 0.05 } else { 0.02 };
        assert!((x - y).abs() <= tol, "{m}: f64 {x} f32 {y}");
    }
}

#[test]
fn admission_resamples_and_truncates_to_common_span() {
    let long: AudioClipF64 = clip(&FixtureSpec::Silence { duration: 3.0 }, 44_100);
    let short: AudioClipF64 = clip(&FixtureSpec::Silence { duration: 2.0 }, ANALYSIS_RATE);
    let (a, b) = admit_clips(&long, &short).unwrap();
    assert_eq!(a.sample_rate(), ANALYSIS_RATE);
    assert_eq!(a.len(), b.len());
    assert_eq!(a.len(), resample(&short, ANALYSIS_RATE).len());

    let tiny: AudioClipF64 = clip(&FixtureSpec::Silence { duration: 0.5 }, ANALYSIS_RATE);
    assert!(matches!(admit_clips(&long, &tiny), Err(PairError::TooShort { .. })));
}

#[test]
fn silent_edit_marks_metrics_missing_instead_of_failing() {
    let cfg = EvalConfig::default();
    let r: AudioClipF64 = clip(&song(0), ANALYSIS_RATE);
    let e: AudioClipF64 = clip(&FixtureSpec::Silence { duration: 12.0 }, ANALYSIS_RATE);
    let ev = evaluate_clips(&r, &e, &cfg).unwrap();
    assert!(ev.measure(Metric::BeatFMeasure).is_err());
    assert!(ev.measure(Metric::VoicingRecall).is_err());
    assert_eq!(ev.measure(Metric::ChromaDtwSimilarity), Ok(0.0));
}

#[test]
fn corpus_is_sorted_and_reports_every_pair() {
    let tmp = tempfile::tempdir().unwrap();
    for (name, spec) in [("s0", song(0)), ("s1", song(1)), ("s1t", song(1).transposed(2.0))] {
        let c: AudioClipF64 = clip(&spec, ANALYSIS_RATE);
        write_wav(&c, tmp.path().join(format!("{name}.wav"))).unwrap();
    }
    fs::write(tmp.path().join("junk.wav"), b"not a wav").unwrap();
    let text = r#"
{"pair_id": "z", "system_id": "id", "original_path": "s0.wav", "edited_path": "s0.wav"}
{"pair_id": "m", "system_id": "tr", "original_path": "s1.wav", "edited_path": "s1t.wav", "instruction": "up a tone"}
{"pair_id": "a", "system_id": "tr", "original_path": "s1.wav", "edited_path": "junk.wav"}
"#;
    let pairs = parse_manifest(text, tmp.path()).unwrap();
    let calls = AtomicUsize::new(0);
    let res = evaluate_corpus(&pairs, &EvalConfig::default(), 3, &|_, _| {
        calls.fetch_add(1, Ordering::Relaxed);
    })
    .unwrap();
    assert_eq!(calls.load(Ordering::Relaxed), 3);
    let ids: Vec<&str> = res.records.iter().map(|r| r.pair_id.as_str()).collect();
    assert_eq!(ids, ["m", "z"]);
    assert_eq!(res.failures.len(), 1);
    assert_eq!(res.timings.len(), 3);

    let m: &PairRecord = &res.records[0];
    assert_eq!(m.instruction.as_deref(), Some("up a tone"));
    assert_eq!(m.details.reference_key.as_deref(), Some("G minor"));
    assert_eq!(m.details.edited_key.as_deref(), Some("A minor"));

    let report = aggregate(&res.records, &res.failures, &EvalConfig::default());
    assert_eq!(report.per_system["tr"].pairs, 1);
    let json = emit_report(&report, ReportFormat::Json).unwrap();
    assert!(json.contains("\"failures\""));
    assert!(!json.contains("timings"));
}
