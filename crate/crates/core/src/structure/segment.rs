use serde::{Deserialize, Serialize};

use super::{StructureError, StructureParams};
use crate::features::Chromagram;
use crate::scalar::Real;

/// Dynamic range (dB below the clip's loudest band) mapped onto [0, 1].
const TIMBRE_RANGE_DB: f64 = 80.0;

/// Section boundaries plus a label per `label_hop` seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segmentation {
    boundaries: Vec<f64>,
    frame_labels: Vec<usize>,
    label_hop: f64,
}

impl Segmentation {
    /// Builds a segmentation from boundaries (including 0 and the duration)
    /// and one label per segment.
    pub fn from_segments(boundaries: Vec<f64>, segment_labels: &[usize], label_hop: f64) -> Result<Self, StructureError> {
        if !(label_hop > 0.0) {
            return Err(StructureError::Invalid(format!("label hop {label_hop} must be positive")));
        }
        if boundaries.len() < 2 || boundaries[0] != 0.0 || boundaries.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(StructureError::Invalid(
                "boundaries must start at 0 and strictly increase".into(),
            ));
        }
        if segment_labels.len() != boundaries.len() - 1 {
            return Err(StructureError::Invalid(format!(
                "{} labels for {} segments",
                segment_labels.len(),
                boundaries.len() - 1
            )));
        }
        let duration = boundaries[boundaries.len() - 1];
        let n = (duration / label_hop - 1e-9).ceil().max(1.0) as usize;
        let mut seg = 0;
        let raw: Vec<usize> = (0..n)
            .map(|i| {
                let t = ((i as f64 + 0.5) * label_hop).min(duration);
                while seg + 2 < boundaries.len() && t >= boundaries[seg + 1] {
                    seg += 1;
                }
                segment_labels[seg]
            })
            .collect();
        Ok(Self {
            boundaries,
            frame_labels: relabel_by_first_appearance(&raw),
            label_hop,
        })
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Boundaries excluding the clip start and end.
    pub fn internal_boundaries(&self) -> &[f64] {
        &self.boundaries[1..self.boundaries.len() - 1]
    }

    pub fn frame_labels(&self) -> &[usize] {
        &self.frame_labels
    }

    pub fn label_hop(&self) -> f64 {
        self.label_hop
    }

    pub fn duration(&self) -> f64 {
        self.boundaries[self.boundaries.len() - 1]
    }

    /// Label of each segment, read at the segment midpoint.
    pub fn segment_labels(&self) -> Vec<usize> {
        self.boundaries
            .windows(2)
            .map(|w| {
                let i = ((0.5 * (w[0] + w[1])) / self.label_hop) as usize;
                self.frame_labels[i.min(self.frame_labels.len() - 1)]
            })
            .collect()
    }
}

fn relabel_by_first_appearance(labels: &[usize]) -> Vec<usize> {
    let mut map: Vec<(usize, usize)> = Vec::new();
    labels
        .iter()
        .map(|&l| match map.iter().find(|(k, _)| *k == l) {
            Some(&(_, v)) => v,
            None => {
                map.push((l, map.len()));
                map.len() - 1
            }
        })
        .collect()
}

fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    match (na > 0.0, nb > 0.0) {
        (false, false) => 1.0,
        (true, true) => a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb),
        _ => 0.0,
    }
}

/// Per-frame chroma ⊕ timbre, timbre rescaled from log energy to [0, 1]
/// over the top 80 dB of the clip.
fn frame_features<T: Real>(ch: &Chromagram<T>, timbre: &[Vec<T>]) -> Vec<Vec<f64>> {
    let to_db = 10.0 / std::f64::consts::LN_10;
    let max_db = timbre
        .iter()
        .flatten()
        .fold(f64::NEG_INFINITY, |m, v| m.max(v.as_f64() * to_db));
    let floor_db = max_db - TIMBRE_RANGE_DB;
    ch.frames
        .iter()
        .zip(timbre)
        .map(|(c, t)| {
            c.iter()
                .map(|v| v.as_f64())
                .chain(t.iter().map(|v| ((v.as_f64() * to_db - floor_db) / TIMBRE_RANGE_DB).clamp(0.0, 1.0)))
                .collect()
        })
        .collect()
}

fn mean_rows(rows: &[Vec<f64>]) -> Vec<f64> {
    let mut m = vec![0.0; rows[0].len()];
    for r in rows {
        for (a, v) in m.iter_mut().zip(r) {
            *a += v;
        }
    }
    m.iter_mut().for_each(|v| *v /= rows.len() as f64);
    m
}

/// Foote novelty: Gaussian-tapered checkerboard correlation along the
/// diagonal of the self-similarity matrix: weighted mean within-section
/// similarity minus weighted mean cross-section similarity. `None` where
/// the kernel does not fit.
fn novelty(ssm: &[Vec<f64>], half: usize) -> Vec<Option<f64>> {
    let n = ssm.len();
    let sigma = 0.5 * half as f64;
    let taper: Vec<f64> = (0..2 * half)
        .map(|k| {
            let x = k as f64 + 0.5 - half as f64;
            (-0.5 * (x / sigma).powi(2)).exp()
        })
        .collect();
    let norm = 0.5 * taper.iter().sum::<f64>().powi(2);
    (0..=n)
        .map(|t| {
            if t < half || t + half > n {
                return None;
            }
            let mut acc = 0.0;
            for (ki, wi) in taper.iter().enumerate() {
                let i = t + ki - half;
                let si = if ki < half { -1.0 } else { 1.0 };
                for (kj, wj) in taper.iter().enumerate() {
                    let j = t + kj - half;
                    let sj = if kj < half { -1.0 } else { 1.0 };
                    acc += si * sj * wi * wj * ssm[i][j];
                }
            }
            Some(acc / norm)
        })
        .collect()
}

/// Average-linkage agglomerative clustering on cosine distance; clusters
/// merge while the closest pair is nearer than `tau`.
fn cluster(means: &[Vec<f64>], tau: f64) -> Vec<usize> {
    let n = means.len();
    let dist: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| 1.0 - cosine_similarity(&means[i], &means[j])).collect())
        .collect();
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut s = 0.0;
                for &i in &clusters[a] {
                    for &j in &clusters[b] {
                        s += dist[i][j];
                    }
                }
                let d = s / (clusters[a].len() * clusters[b].len()) as f64;
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, a, b));
                }
            }
        }
        match best {
            Some((d, a, b)) if d < tau => {
                let merged = clusters.remove(b);
                clusters[a].extend(merged);
            }
            _ => break,
        }
    }
    let mut labels = vec![0; n];
    for (c, members) in clusters.iter().enumerate() {
        for &i in members {
            labels[i] = c;
        }
    }
    labels
}

/// Novelty-based segmentation of a clip of `duration` seconds.
///
/// Frames are averaged into blocks of half a label hop, compared by cosine
/// similarity, and scored with an 8 s checkerboard kernel. Novelty peaks
/// above both `mean + std` and the absolute floor, at least
/// `min_separation` apart, become boundaries; segment means are then
/// clustered into labels.
pub fn segment_structure<T: Real>(
    ch: &Chromagram<T>,
    timbre: &[Vec<T>],
    duration: f64,
    params: &StructureParams,
) -> Result<Segmentation, StructureError> {
    if ch.len() != timbre.len() || ch.is_empty() {
        return Err(StructureError::Invalid("chroma and timbre frame counts differ".into()));
    }
    let feats = frame_features(ch, timbre);
    let block_seconds = params.label_hop / 2.0;
    let per_block = (block_seconds / ch.frame_hop).round().max(1.0) as usize;
    let blocks: Vec<Vec<f64>> = feats.chunks(per_block).map(mean_rows).collect();
    let block_hop = per_block as f64 * ch.frame_hop;
    let block_time = |b: usize| ch.time(b * per_block) + 0.5 * (per_block - 1) as f64 * ch.frame_hop;

    let mut internal: Vec<f64> = Vec::new();
    let half = (params.kernel_seconds / 2.0 / block_hop).round() as usize;
    if duration >= params.min_duration && half >= 1 && blocks.len() > 2 * half {
        let ssm: Vec<Vec<f64>> = blocks
            .iter()
            .map(|a| blocks.iter().map(|b| cosine_similarity(a, b)).collect())
            .collect();
        let nov = novelty(&ssm, half);
        let valid: Vec<(usize, f64)> = nov.iter().enumerate().filter_map(|(t, v)| v.map(|v| (t, v))).collect();
        let mean = valid.iter().map(|v| v.1).sum::<f64>() / valid.len() as f64;
        let std = (valid.iter().map(|v| (v.1 - mean).powi(2)).sum::<f64>() / valid.len() as f64).sqrt();
        let threshold = (mean + std).max(params.novelty_floor);
        let value = |t: usize| nov.get(t).copied().flatten();
        let mut peaks: Vec<(usize, f64)> = valid
            .iter()
            .copied()
            .filter(|&(t, v)| {
                v > threshold
                    && value(t.wrapping_sub(1)).is_none_or(|p| v > p)
                    && value(t + 1).is_none_or(|q| v >= q)
            })
            .collect();
        peaks.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let boundary_time = |t: usize| 0.5 * (block_time(t - 1) + block_time(t));
        for (t, _) in peaks {
            let bt = boundary_time(t);
            if bt > 0.0
                && bt < duration
                && internal.iter().all(|&o| (o - bt).abs() >= params.min_separation)
            {
                internal.push(bt);
            }
        }
        internal.sort_by(f64::total_cmp);
    }

    let mut boundaries = vec![0.0];
    boundaries.extend(internal);
    boundaries.push(duration);
    let means: Vec<Vec<f64>> = boundaries
        .windows(2)
        .map(|w| {
            let members: Vec<Vec<f64>> = blocks
                .iter()
                .enumerate()
                .filter(|(b, _)| {
                    let t = block_time(*b);
                    t >= w[0] && t < w[1]
                })
                .map(|(_, v)| v.clone())
                .collect();
            if members.is_empty() {
                vec![0.0; blocks[0].len()]
            } else {
                mean_rows(&members)
            }
        })
        .collect();
    let labels = cluster(&means, params.cluster_tau);
    Segmentation::from_segments(boundaries, &labels, params.label_hop)
}
