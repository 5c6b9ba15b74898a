use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::{Parser, Subcommand, ValueEnum};
use mcp_eval::audio::{load_wav, resample, AudioClip, ANALYSIS_RATE};
use mcp_eval::bench::{
    aggregate, emit_report, evaluate_corpus, evaluate_pair, fixtures, load_manifest, EvalConfig, EvalPair,
    PairOutcome, Precision, ReportFormat,
};
use mcp_eval::features::{dump_chroma, dump_onset, dump_timbre, Analysis};
use mcp_eval::melody::{dump_notes, segment_notes, track_pitch};
use mcp_eval::rhythm::{beat_grid, dump_beats};
use mcp_eval::scalar::Real;
use mcp_eval::structure::{dump_segments, segment_structure};
use mcp_eval::Metric;

const EXIT_OK: u8 = 0;
const EXIT_PARTIAL: u8 = 1;
const EXIT_ERROR: u8 = 2;

/// Music context preservation metrics for (original, edited) audio pairs.
///
/// Scores how well an edit keeps harmony, rhythm, structure and melody of
/// the original. Reports go to stdout (or --out); diagnostics to stderr.
///
/// Exit codes: 0 success, 1 some metrics missing (pair) or every pair
/// failed (corpus), 2 usage, I/O or validation errors.
#[derive(Debug, Parser)]
#[command(name = "mcp-eval", version, arg_required_else_help = true)]
struct Cli {
    /// Key-value config file; defaults apply when absent.
    #[arg(long, global = true, env = "MCP_EVAL_CONFIG")]
    config: Option<PathBuf>,

    /// Print the definition and facet of a metric, then exit.
    #[arg(long, value_name = "METRIC")]
    explain: Option<String>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a single (original, edited) pair.
    Pair {
        original: PathBuf,
        edited: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate every pair in a JSON-lines manifest and aggregate per system.
    Corpus {
        manifest: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads.
        #[arg(long, default_value_t = default_jobs())]
        jobs: usize,
        /// Suppress per-pair progress lines.
        #[arg(long)]
        quiet: bool,
    },
    /// Write the synthetic fixture corpus and its fixtures.jsonl manifest.
    Fixtures { out_dir: PathBuf },
    /// Dump one analysis layer of a clip as whitespace-separated columns.
    Features {
        clip: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
    },
    /// List metric keys with facet and direction.
    Metrics,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Md,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
            Format::Md => ReportFormat::Markdown,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Chroma,
    Onset,
    Timbre,
    Beats,
    Segments,
    Notes,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Error that maps to exit code 2.
struct Fatal(String);

impl<E: std::fmt::Display> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.to_string())
    }
}

fn load_config(path: Option<&Path>) -> Result<EvalConfig, Fatal> {
    match path {
        Some(p) => Ok(EvalConfig::load(p)?),
        None => Ok(EvalConfig::default()),
    }
}

fn write_output(text: &str, out: Option<&Path>) -> Result<(), Fatal> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Fatal(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn explain(name: &str) -> Result<String, Fatal> {
    let m: Metric = name.parse().map_err(Fatal)?;
    Ok(format!(
        "{} ({})\nfacet: {}\ndirection: {} {}\nperfect value: {}\n\n{}\n",
        m.title(),
        m.key(),
        m.facet().title(),
        m.direction().arrow(),
        match m.direction() {
            mcp_eval::Direction::HigherIsBetter => "higher is better",
            mcp_eval::Direction::LowerIsBetter => "lower is better",
        },
        m.perfect_value(),
        m.explanation()
    ))
}

fn run_pair(cfg: &EvalConfig, original: PathBuf, edited: PathBuf, format: Format, out: Option<&Path>) -> Result<u8, Fatal> {
    let pair = EvalPair {
        pair_id: "pair".into(),
        system_id: "edit".into(),
        original_path: original,
        edited_path: edited,
        instruction: None,
    };
    let record = evaluate_pair(&pair, cfg).result.map_err(|f| Fatal(f.error))?;
    let missing = record.missing();
    for (m, why) in &missing {
        eprintln!("{m}: missing ({why})");
    }
    let report = aggregate(&[record], &[], cfg);
    write_output(&emit_report(&report, format.into())?, out)?;
    Ok(if missing.is_empty() { EXIT_OK } else { EXIT_PARTIAL })
}

fn run_corpus(
    cfg: &EvalConfig,
    manifest: &Path,
    format: Format,
    out: Option<&Path>,
    jobs: usize,
    quiet: bool,
) -> Result<u8, Fatal> {
    if jobs == 0 {
        return Err(Fatal("--jobs must be at least 1".into()));
    }
    let pairs = load_manifest(manifest)?;
    let total = pairs.len();
    let done = AtomicUsize::new(0);
    let progress = |p: &EvalPair, o: &PairOutcome| {
        let k = done.fetch_add(1, Ordering::Relaxed) + 1;
        match &o.result {
            Ok(_) if !quiet => eprintln!("[{k}/{total}] {} ok ({:.2} s)", p.pair_id, o.timings.total().as_secs_f64()),
            Ok(_) => {}
            Err(f) => eprintln!("[{k}/{total}] {} failed: {}", p.pair_id, f.error),
        }
    };
    let result = evaluate_corpus(&pairs, cfg, jobs, &progress)?;
    let report = aggregate(&result.records, &result.failures, cfg);
    write_output(&emit_report(&report, format.into())?, out)?;
    eprintln!("{} of {total} pairs evaluated, {} failed", result.records.len(), result.failures.len());
    Ok(if result.records.is_empty() { EXIT_PARTIAL } else { EXIT_OK })
}

fn features<T: Real>(cfg: &EvalConfig, path: &Path, kind: Kind) -> Result<String, Fatal> {
    let clip: AudioClip<T> = resample(&load_wav::<T>(path)?, ANALYSIS_RATE);
    if matches!(kind, Kind::Notes) {
        let mp = cfg.melody();
        return Ok(dump_notes(&segment_notes(&track_pitch(&clip, &mp), &mp)));
    }
    let a = Analysis::new(&clip, &cfg.features())?;
    Ok(match kind {
        Kind::Chroma => dump_chroma(&a.chroma),
        Kind::Onset => dump_onset(&a.onset),
        Kind::Timbre => dump_timbre(&a.spectrogram, &a.timbre),
        Kind::Beats => dump_beats(&beat_grid(&a, &cfg.rhythm())?),
        Kind::Segments => dump_segments(&segment_structure(&a.chroma, &a.timbre, a.duration, &cfg.structure())?),
        Kind::Notes => unreachable!("handled above"),
    })
}

fn metrics_table() -> String {
    let mut out = String::from("# metric facet direction\n");
    for m in Metric::ALL {
        let dir = match m.direction() {
            mcp_eval::Direction::HigherIsBetter => "higher",
            mcp_eval::Direction::LowerIsBetter => "lower",
        };
        out.push_str(&format!("{} {:?} {dir}\n", m.key(), m.facet()).to_lowercase());
    }
    out
}

fn run(cli: Cli) -> Result<u8, Fatal> {
    if let Some(name) = &cli.explain {
        write_output(&explain(name)?, None)?;
        return Ok(EXIT_OK);
    }
    let Some(command) = cli.command else {
        return Err(Fatal("no command given (see --help)".into()));
    };
    let cfg = load_config(cli.config.as_deref())?;
    match command {
        Command::Pair {
            original,
            edited,
            format,
            out,
        } => run_pair(&cfg, original, edited, format, out.as_deref()),
        Command::Corpus {
            manifest,
            format,
            out,
            jobs,
            quiet,
        } => run_corpus(&cfg, &manifest, format, out.as_deref(), jobs, quiet),
        Command::Fixtures { out_dir } => {
            let pairs = fixtures::write_fixture_corpus(&out_dir)?;
            eprintln!("wrote {} pairs to {}", pairs.len(), out_dir.join("fixtures.jsonl").display());
            Ok(EXIT_OK)
        }
        Command::Features { clip, kind } => {
            let text = match cfg.precision {
                Precision::F32 => features::<f32>(&cfg, &clip, kind)?,
                Precision::F64 => features::<f64>(&cfg, &clip, kind)?,
            };
            write_output(&text, None)?;
            Ok(EXIT_OK)
        }
        Command::Metrics => {
            write_output(&metrics_table(), None)?;
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Fatal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
