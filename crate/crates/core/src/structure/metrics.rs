use std::collections::HashMap;

use serde::Serialize;

use super::{Segmentation, StructureError};
use crate::matching::{f_measure, greedy_matches};

/// F-measure of internal boundaries matched one-to-one within `window`
/// seconds. Two segmentations without internal boundaries agree fully.
pub fn boundary_f_measure(reference: &Segmentation, estimate: &Segmentation, window: f64) -> f64 {
    let (r, e) = (reference.internal_boundaries(), estimate.internal_boundaries());
    match (r.is_empty(), e.is_empty()) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => f_measure(greedy_matches(r, e, window).len(), r.len(), e.len()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandIndex {
    /// Raw value clamped to [0, 1].
    pub clamped: f64,
    /// Chance-corrected Rand index, in [-1, 1].
    pub raw: f64,
}

fn pairs(n: u64) -> i128 {
    i128::from(n) * (i128::from(n) - 1) / 2
}

/// Adjusted Rand index of two label sequences, compared over their common
/// prefix. When both labelings are trivial (all one cluster, or all
/// singletons on both sides) the index is 1.
pub fn adjusted_rand_index_labels(a: &[usize], b: &[usize]) -> Result<RandIndex, StructureError> {
    let n = a.len().min(b.len());
    if n < 2 {
        return Err(StructureError::TooFewFrames(n));
    }
    let mut joint: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a[..n].iter().zip(&b[..n]) {
        *joint.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: i128 = joint.values().map(|&c| pairs(c)).sum();
    let sa: i128 = rows.values().map(|&c| pairs(c)).sum();
    let sb: i128 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(n as u64);
    let num = 2 * (index * total - sa * sb);
    let den = (sa + sb) * total - 2 * sa * sb;
    let raw = if den == 0 { 1.0 } else { num as f64 / den as f64 };
    Ok(RandIndex {
        clamped: raw.clamp(0.0, 1.0),
        raw,
    })
}

/// [`adjusted_rand_index_labels`] on the frame labels of two segmentations.
pub fn adjusted_rand_index(reference: &Segmentation, estimate: &Segmentation) -> Result<RandIndex, StructureError> {
    if (reference.label_hop() - estimate.label_hop()).abs() > 1e-12 {
        return Err(StructureError::Invalid("segmentations use different label hops".into()));
    }
    adjusted_rand_index_labels(reference.frame_labels(), estimate.frame_labels())
}
