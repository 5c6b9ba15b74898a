//! Deterministic synthetic corpus: ten short songs with a click track, a
//! sustained tonic triad and an arpeggiated melody, single-facet probe
//! clips, and manipulated versions for a small system comparison.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use super::EvalPair;
use crate::audio::{synth_fixture, write_wav, AudioClip, AudioError, ChordQuality, FixtureSpec, Triad, ANALYSIS_RATE};

pub const SONG_COUNT: usize = 10;
pub const SONG_SECONDS: f64 = 12.0;
const SONG_TEMPI: [f64; SONG_COUNT] = [120.0, 96.0, 108.0, 132.0, 100.0, 112.0, 126.0, 90.0, 116.0, 104.0];
const SONG_TONICS: [i32; SONG_COUNT] = [0, 7, 2, 9, 4, 5, 10, 3, 8, 1];
/// Chord-tone indices (0..=3, where 3 is the octave) cycled by the melody.
const PATTERNS: [[usize; 8]; 4] = [
    [0, 1, 2, 3, 2, 1, 0, 2],
    [0, 2, 1, 3, 1, 2, 0, 1],
    [3, 2, 0, 1, 2, 0, 3, 1],
    [0, 1, 0, 2, 1, 3, 2, 0],
];

/// Named synthetic clip.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: String,
    pub spec: FixtureSpec,
}

fn fixture(name: impl Into<String>, spec: FixtureSpec) -> Fixture {
    Fixture {
        name: name.into(),
        spec,
    }
}

pub fn song_quality(i: usize) -> ChordQuality {
    if i.is_multiple_of(2) {
        ChordQuality::Major
    } else {
        ChordQuality::Minor
    }
}

/// Song `i` of the corpus: all four facets are measurable on it.
pub fn song(i: usize) -> FixtureSpec {
    let bpm = SONG_TEMPI[i % SONG_COUNT];
    let tonic = SONG_TONICS[i % SONG_COUNT];
    let quality = song_quality(i);
    let beat = 60.0 / bpm;
    let [_, third, fifth] = quality.intervals();
    let tones = [0, third, fifth, 12];
    let beats = (SONG_SECONDS / beat).floor() as usize;
    let pattern = PATTERNS[i % PATTERNS.len()];
    let notes = (0..beats)
        .map(|k| (f64::from(60 + tonic + tones[pattern[k % pattern.len()]]), beat))
        .collect();
    FixtureSpec::Mix(vec![
        FixtureSpec::Clicks {
            bpm,
            duration: SONG_SECONDS,
            offset: 0.0,
            amplitude: 0.3,
            dropped: vec![],
        },
        FixtureSpec::Triads {
            chords: vec![Triad {
                root_midi: 60 + tonic,
                quality,
            }],
            chord_duration: SONG_SECONDS,
            repeats: 1,
            amplitude: 0.06,
        },
        FixtureSpec::Notes { notes, amplitude: 0.4 },
    ])
}

/// Single-facet probe clips.
pub fn probe_fixtures() -> Vec<Fixture> {
    let clicks = |bpm: f64| FixtureSpec::Clicks {
        bpm,
        duration: 8.0,
        offset: 0.0,
        amplitude: 0.5,
        dropped: vec![],
    };
    let triads = |root: i32, quality| FixtureSpec::Triads {
        chords: vec![Triad { root_midi: root, quality }],
        chord_duration: 2.0,
        repeats: 3,
        amplitude: 0.3,
    };
    // I-IV-V-I in major.
    let cadence = |tonic: i32| FixtureSpec::Triads {
        chords: [0, 5, 7, 0]
            .iter()
            .map(|&d| Triad {
                root_midi: tonic + d,
                quality: ChordQuality::Major,
            })
            .collect(),
        chord_duration: 1.0,
        repeats: 2,
        amplitude: 0.3,
    };
    let scale = |tonic: f64, quality| FixtureSpec::Scale {
        tonic_midi: tonic,
        quality,
        note_duration: 0.5,
        amplitude: 0.5,
    };
    let melody = |shift: f64| FixtureSpec::Notes {
        notes: [60.0, 62.0, 64.0, 65.0, 67.0, 65.0, 64.0, 62.0, 60.0, 67.0, 64.0, 60.0]
            .iter()
            .map(|&p| (p + shift, 0.4))
            .collect(),
        amplitude: 0.5,
    };
    let noise = |seed, band| FixtureSpec::Noise {
        duration: 8.0,
        amplitude: 0.4,
        seed,
        band: Some(band),
    };
    let low = noise(21, (100.0, 800.0));
    let high = noise(22, (3000.0, 8000.0));
    let mut out = vec![];
    for bpm in [60.0, 90.0, 120.0, 150.0, 180.0] {
        out.push(fixture(format!("clicks_{bpm:.0}"), clicks(bpm)));
    }
    out.extend([
        fixture("triads_c_major", triads(60, ChordQuality::Major)),
        fixture("cadence_c", cadence(60)),
        fixture("cadence_fs", cadence(66)),
        fixture("triads_a_minor", triads(57, ChordQuality::Minor)),
        fixture("scale_c_major", scale(60.0, ChordQuality::Major)),
        fixture("scale_a_minor", scale(57.0, ChordQuality::Minor)),
        fixture("melody", melody(0.0)),
        fixture("melody_up5", melody(5.0)),
        fixture("texture_ab", FixtureSpec::Concat(vec![low.clone(), high.clone()])),
        fixture("texture_aba", FixtureSpec::Concat(vec![low.clone(), high, low.clone()])),
        fixture("texture_flat", FixtureSpec::Concat(vec![low.clone(), low])),
        fixture(
            "sine_440",
            FixtureSpec::Sine {
                freq: 440.0,
                duration: 4.0,
                amplitude: 0.5,
            },
        ),
        fixture(
            "noise",
            FixtureSpec::Noise {
                duration: 6.0,
                amplitude: 0.3,
                seed: 7,
                band: None,
            },
        ),
        fixture("silence", FixtureSpec::Silence { duration: 6.0 }),
    ]);
    out
}

/// Every clip the corpus writer produces.
pub fn all_fixtures() -> Vec<Fixture> {
    let mut out = Vec::new();
    for i in 0..SONG_COUNT {
        let s = song(i);
        out.push(fixture(format!("song_{i:02}_stretch10"), s.time_stretched(1.1)));
        out.push(fixture(format!("song_{i:02}_transpose2"), s.transposed(2.0)));
        out.push(fixture(format!("song_{i:02}"), s));
    }
    out.extend(probe_fixtures());
    out
}

/// Evaluation pairs over the corpus, ids unique.
///
/// - `identity`: every clip against itself.
/// - `stretch10`: each song against a 10% slower rendition.
/// - `transpose2`: each song against a two-semitone transposition.
/// - `probe`: pairs that isolate one facet.
pub fn corpus_pairs(dir: &Path) -> Vec<EvalPair> {
    let wav = |name: &str| dir.join(format!("{name}.wav"));
    let pair = |id: String, sys: &str, a: &str, b: &str, what: &str| EvalPair {
        pair_id: id,
        system_id: sys.to_string(),
        original_path: wav(a),
        edited_path: wav(b),
        instruction: Some(what.to_string()),
    };
    let mut out = Vec::new();
    for f in all_fixtures().iter().filter(|f| !f.name.contains("_stretch") && !f.name.contains("_transpose")) {
        out.push(pair(format!("identity/{}", f.name), "identity", &f.name, &f.name, "no change"));
    }
    for i in 0..SONG_COUNT {
        let s = format!("song_{i:02}");
        out.push(pair(format!("stretch10/{s}"), "stretch10", &s, &format!("{s}_stretch10"), "slow down by 10%"));
        out.push(pair(format!("transpose2/{s}"), "transpose2", &s, &format!("{s}_transpose2"), "transpose up two semitones"));
    }
    for (id, a, b, what) in [
        ("tempo", "clicks_120", "clicks_90", "change the tempo"),
        ("key", "cadence_c", "cadence_fs", "move to the tritone key"),
        ("relative", "scale_c_major", "scale_a_minor", "switch to the relative minor"),
        ("melody", "melody", "melody_up5", "transpose the melody"),
        ("form", "texture_ab", "texture_flat", "remove the second section"),
        ("silenced", "song_00", "silence", "mute everything"),
    ] {
        out.push(pair(format!("probe/{id}"), "probe", a, b, what));
    }
    out
}

/// Writes every fixture as 16-bit WAV at the analysis rate, plus a
/// `fixtures.jsonl` manifest. Output is byte-identical across runs.
pub fn write_fixture_corpus(dir: &Path) -> Result<Vec<EvalPair>, AudioError> {
    fs::create_dir_all(dir).map_err(|e| AudioError::Write {
        path: dir.to_path_buf(),
        reason: e.to_string(),
    })?;
    for f in all_fixtures() {
        let clip: AudioClip<f64> = synth_fixture(&f.spec, ANALYSIS_RATE)?;
        write_wav(&clip.with_source_id(f.name.clone()), dir.join(format!("{}.wav", f.name)))?;
    }
    let pairs = corpus_pairs(dir);
    let manifest = dir.join("fixtures.jsonl");
    let io = |e: std::io::Error| AudioError::Write {
        path: manifest.clone(),
        reason: e.to_string(),
    };
    let mut file = fs::File::create(&manifest).map_err(io)?;
    for p in &pairs {
        let mut line = serde_json::json!({
            "pair_id": p.pair_id,
            "system_id": p.system_id,
            "original_path": p.original_path.file_name().map(|n| n.to_string_lossy().into_owned()),
            "edited_path": p.edited_path.file_name().map(|n| n.to_string_lossy().into_owned()),
        });
        if let Some(what) = &p.instruction {
            line["instruction"] = what.clone().into();
        }
        writeln!(file, "{line}").map_err(io)?;
    }
    Ok(pairs)
}
