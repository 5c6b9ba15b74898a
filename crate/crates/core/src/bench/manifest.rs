use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("manifest line {line}: duplicate pair_id '{pair_id}' (first on line {first})")]
    DuplicatePair { line: usize, pair_id: String, first: usize },
    #[error("manifest {0} has no pairs")]
    Empty(PathBuf),
}

/// One (original, edited) pair produced by an editing system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalPair {
    pub pair_id: String,
    pub system_id: String,
    pub original_path: PathBuf,
    pub edited_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instruction: Option<String>,
}

/// Parses JSON-lines manifest text. Blank lines are skipped; relative
/// paths are resolved against `base_dir`.
pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<Vec<EvalPair>, ManifestError> {
    let mut pairs: Vec<EvalPair> = Vec::new();
    let mut first_line: HashMap<String, usize> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let mut pair: EvalPair = serde_json::from_str(raw).map_err(|e| ManifestError::Line {
            line,
            message: e.to_string(),
        })?;
        for (name, value) in [("pair_id", &pair.pair_id), ("system_id", &pair.system_id)] {
            if value.trim().is_empty() {
                return Err(ManifestError::Line {
                    line,
                    message: format!("field `{name}` is empty"),
                });
            }
        }
        if let Some(&first) = first_line.get(&pair.pair_id) {
            return Err(ManifestError::DuplicatePair {
                line,
                pair_id: pair.pair_id,
                first,
            });
        }
        first_line.insert(pair.pair_id.clone(), line);
        for p in [&mut pair.original_path, &mut pair.edited_path] {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        }
        pairs.push(pair);
    }
    Ok(pairs)
}

/// Reads and validates a JSON-lines manifest. Audio paths are not checked
/// here; unreadable files fail their own pair at evaluation time.
pub fn load_manifest(path: &Path) -> Result<Vec<EvalPair>, ManifestError> {
    let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let pairs = parse_manifest(&text, base)?;
    if pairs.is_empty() {
        return Err(ManifestError::Empty(path.to_path_buf()));
    }
    Ok(pairs)
}
