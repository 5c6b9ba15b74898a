//! Structural form: novelty-based section boundaries, clustered section
//! labels, boundary F-measure and adjusted Rand index.

mod metrics;
mod segment;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::Analysis;
use crate::metric::{Measure, MissingReason};
use crate::scalar::Real;

pub use metrics::{adjusted_rand_index, adjusted_rand_index_labels, boundary_f_measure, RandIndex};
pub use segment::{segment_structure, Segmentation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructureError {
    #[error("label sequences have {0} common frames, need at least 2")]
    TooFewFrames(usize),
    #[error("invalid segmentation: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureParams {
    pub kernel_seconds: f64,
    pub min_separation: f64,
    /// Novelty peaks must also exceed this absolute value.
    pub novelty_floor: f64,
    pub cluster_tau: f64,
    pub label_hop: f64,
    pub boundary_window: f64,
    /// Second, tighter window reported alongside the headline one.
    pub boundary_window_short: f64,
    /// Clips shorter than this are a single segment.
    pub min_duration: f64,
}

impl Default for StructureParams {
    fn default() -> Self {
        Self {
            kernel_seconds: 8.0,
            min_separation: 4.0,
            novelty_floor: 0.05,
            cluster_tau: 0.15,
            label_hop: 0.5,
            boundary_window: 3.0,
            boundary_window_short: 0.5,
            min_duration: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureScores {
    pub adjusted_rand_index: Measure,
    pub adjusted_rand_index_raw: Measure,
    pub boundary_f_measure: Measure,
    pub boundary_f_measure_short: Measure,
    pub reference_segments: Option<Segmentation>,
    pub edited_segments: Option<Segmentation>,
}

/// Segments both clips and scores the edit against the reference.
pub fn eval_structure<T: Real>(
    reference: &Analysis<T>,
    edited: &Analysis<T>,
    params: &StructureParams,
) -> StructureScores {
    let seg = |a: &Analysis<T>| segment_structure(&a.chroma, &a.timbre, a.duration, params);
    let (r, e) = match (seg(reference), seg(edited)) {
        (Ok(r), Ok(e)) => (r, e),
        _ => {
            let m = Err(MissingReason::TooShort);
            return StructureScores {
                adjusted_rand_index: m,
                adjusted_rand_index_raw: m,
                boundary_f_measure: m,
                boundary_f_measure_short: m,
                reference_segments: None,
                edited_segments: None,
            };
        }
    };
    let ari = adjusted_rand_index(&r, &e).map_err(|_| MissingReason::TooShort);
    StructureScores {
        adjusted_rand_index: ari.map(|v| v.clamped),
        adjusted_rand_index_raw: ari.map(|v| v.raw),
        boundary_f_measure: Ok(boundary_f_measure(&r, &e, params.boundary_window)),
        boundary_f_measure_short: Ok(boundary_f_measure(&r, &e, params.boundary_window_short)),
        reference_segments: Some(r),
        edited_segments: Some(e),
    }
}

/// `start end label` rows, one per segment.
pub fn dump_segments(s: &Segmentation) -> String {
    let mut out = String::new();
    for (w, label) in s.boundaries().windows(2).zip(s.segment_labels()) {
        let _ = writeln!(out, "{:.6} {:.6} {label}", w[0], w[1]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{synth_fixture, AudioClip, FixtureSpec};
    use crate::features::FeatureParams;
    use proptest::prelude::*;

    fn texture(band: (f64, f64), seed: u64, duration: f64) -> FixtureSpec {
        FixtureSpec::Noise {
            duration,
            amplitude: 0.5,
            seed,
            band: Some(band),
        }
    }

    const LOW: (f64, f64) = (100.0, 800.0);
    const HIGH: (f64, f64) = (3000.0, 8000.0);
    const MID: (f64, f64) = (900.0, 2500.0);

    fn analyse(spec: &FixtureSpec) -> Analysis<f64> {
        let clip: AudioClip<f64> = synth_fixture(spec, 22_050).unwrap();
        Analysis::new(&clip, &FeatureParams::default()).unwrap()
    }

    fn segment(spec: &FixtureSpec) -> Segmentation {
        let a = analyse(spec);
        segment_structure(&a.chroma, &a.timbre, a.duration, &StructureParams::default()).unwrap()
    }

    fn seg(bounds: &[f64]) -> Segmentation {
        let labels: Vec<usize> = (0..bounds.len() - 1).collect();
        Segmentation::from_segments(bounds.to_vec(), &labels, 0.5).unwrap()
    }

    #[test]
    fn two_textures_split_near_the_join() {
        let s = segment(&FixtureSpec::Concat(vec![texture(LOW, 1, 8.0), texture(HIGH, 2, 8.0)]));
        assert_eq!(s.internal_boundaries().len(), 1, "{:?}", s.boundaries());
        assert!((s.internal_boundaries()[0] - 8.0).abs() <= 1.0);
        assert_eq!(s.segment_labels(), vec![0, 1]);
        assert_eq!(s.frame_labels().len(), 32);
    }

    #[test]
    fn homogeneous_texture_is_one_section() {
        let s = segment(&texture(LOW, 4, 16.0));
        assert!(s.internal_boundaries().is_empty(), "{:?}", s.boundaries());
        assert!(s.frame_labels().iter().all(|&l| l == 0));
    }

    #[test]
    fn returning_texture_reuses_its_label() {
        let s = segment(&FixtureSpec::Concat(vec![
            texture(LOW, 1, 8.0),
            texture(HIGH, 2, 8.0),
            texture(LOW, 3, 8.0),
        ]));
        let labels = s.segment_labels();
        assert_eq!(labels.len(), 3, "{:?}", s.boundaries());
        assert_eq!(labels[0], labels[2]);
        assert_ne!(labels[0], labels[1]);
    }

    #[test]
    fn short_clip_is_single_segment() {
        let s = segment(&FixtureSpec::Concat(vec![texture(LOW, 1, 1.5), texture(HIGH, 2, 1.5)]));
        assert_eq!(s.boundaries(), &[0.0, 3.0]);
    }

    #[test]
    fn eval_examples() {
        let p = StructureParams::default();
        let ab = analyse(&FixtureSpec::Concat(vec![texture(LOW, 1, 8.0), texture(HIGH, 2, 8.0)]));
        let ab2 = analyse(&FixtureSpec::Concat(vec![texture(LOW, 5, 8.0), texture(MID, 6, 8.0)]));
        let flat = analyse(&texture(LOW, 7, 16.0));
        let s = eval_structure(&ab, &ab, &p);
        assert_eq!((s.adjusted_rand_index, s.boundary_f_measure), (Ok(1.0), Ok(1.0)));
        assert_eq!(eval_structure(&ab, &ab2, &p).boundary_f_measure, Ok(1.0));
        assert_eq!(eval_structure(&ab, &flat, &p).boundary_f_measure, Ok(0.0));
    }

    #[test]
    fn boundary_f_examples() {
        let r = seg(&[0.0, 8.0, 16.0, 40.0]);
        let e = seg(&[0.0, 9.0, 30.0, 40.0]);
        assert_eq!(boundary_f_measure(&r, &e, 3.0), 0.5);
        assert_eq!(boundary_f_measure(&r, &r, 3.0), 1.0);
        assert_eq!(boundary_f_measure(&seg(&[0.0, 8.0, 16.0]), &seg(&[0.0, 16.0]), 3.0), 0.0);
        assert_eq!(boundary_f_measure(&seg(&[0.0, 16.0]), &seg(&[0.0, 16.0]), 3.0), 1.0);
    }

    #[test]
    fn ari_examples() {
        assert_eq!(adjusted_rand_index_labels(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap().clamped, 1.0);
        let r = adjusted_rand_index_labels(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap();
        assert_eq!((r.raw, r.clamped), (-0.5, 0.0));
        assert!(adjusted_rand_index_labels(&[0], &[0]).is_err());
    }

    /// Pair-counting oracle: visit every unordered pair of frames and
    /// tally agreement, then apply the Hubert-Arabie form.
    fn ari_oracle(a: &[usize], b: &[usize]) -> f64 {
        let (mut ss, mut sd, mut ds, mut dd) = (0i128, 0i128, 0i128, 0i128);
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                match (a[i] == a[j], b[i] == b[j]) {
                    (true, true) => ss += 1,
                    (true, false) => sd += 1,
                    (false, true) => ds += 1,
                    (false, false) => dd += 1,
                }
            }
        }
        let den = (ss + sd) * (sd + dd) + (ss + ds) * (ds + dd);
        if den == 0 {
            1.0
        } else {
            (2 * (ss * dd - sd * ds)) as f64 / den as f64
        }
    }

    fn arb_labels() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
        (2usize..=200, 1usize..8, 1usize..8).prop_flat_map(|(n, ka, kb)| {
            (prop::collection::vec(0..ka, n), prop::collection::vec(0..kb, n))
        })
    }

    fn arb_bounds() -> impl Strategy<Value = Segmentation> {
        prop::collection::btree_set(1u32..600, 0..8).prop_map(|s| {
            let mut b = vec![0.0];
            b.extend(s.into_iter().map(|v| f64::from(v) / 10.0));
            b.push(60.0);
            seg(&b)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn ari_matches_pair_counting((a, b) in arb_labels()) {
            let fast = adjusted_rand_index_labels(&a, &b).unwrap().raw;
            prop_assert_eq!(fast, ari_oracle(&a, &b));
            prop_assert_eq!(fast, adjusted_rand_index_labels(&b, &a).unwrap().raw);
        }

        #[test]
        fn boundary_f_symmetric_and_monotone(a in arb_bounds(), b in arb_bounds(), w in 0.0f64..5.0) {
            let f = boundary_f_measure(&a, &b, w);
            prop_assert_eq!(f, boundary_f_measure(&b, &a, w));
            prop_assert!(boundary_f_measure(&a, &b, w * 0.5) <= f);
        }
    }
}
