use crate::features::Chromagram;
use crate::scalar::Real;

/// Costs within this tolerance count as tied; ties prefer the longer path.
const COST_TIE: f64 = 1e-12;

/// Cosine distance between two non-negative chroma rows, in [0, 1].
/// Two silent rows are at distance 0, a silent and a non-silent row at 1.
pub fn cosine_distance(a: &[f64; 12], b: &[f64; 12]) -> f64 {
    if a == b {
        return 0.0;
    }
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    match (na > 0.0, nb > 0.0) {
        (false, false) => 0.0,
        (true, true) => {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            (1.0 - dot / (na * nb)).clamp(0.0, 1.0)
        }
        _ => 1.0,
    }
}

#[derive(Clone, Copy)]
struct Cell {
    cost: f64,
    len: u32,
}

impl Cell {
    fn better_than(self, other: Cell) -> bool {
        self.cost < other.cost - COST_TIE || (self.cost <= other.cost + COST_TIE && self.len > other.len)
    }
}

/// Full DTW over the two frame sequences with steps (1,0), (0,1), (1,1);
/// returns `1 - cost / path_length` for the cheapest path (longest on ties).
pub fn dtw_similarity(a: &[[f64; 12]], b: &[[f64; 12]]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "DTW needs at least one frame per side");
    let m = b.len();
    let mut prev: Vec<Cell> = Vec::with_capacity(m);
    let mut cur: Vec<Cell> = Vec::with_capacity(m);
    for (i, ra) in a.iter().enumerate() {
        cur.clear();
        for (j, rb) in b.iter().enumerate() {
            let mut best: Option<Cell> = None;
            let mut offer = |c: Cell| {
                if best.is_none_or(|b| c.better_than(b)) {
                    best = Some(c);
                }
            };
            if i > 0 {
                offer(prev[j]);
                if j > 0 {
                    offer(prev[j - 1]);
                }
            }
            if j > 0 {
                offer(cur[j - 1]);
            }
            let d = cosine_distance(ra, rb);
            cur.push(match best {
                Some(c) => Cell {
                    cost: c.cost + d,
                    len: c.len + 1,
                },
                None => Cell { cost: d, len: 1 },
            });
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let end = prev[m - 1];
    (1.0 - end.cost / f64::from(end.len)).clamp(0.0, 1.0)
}

/// [`dtw_similarity`] on two chromagrams.
pub fn chroma_dtw_similarity<T: Real>(reference: &Chromagram<T>, estimate: &Chromagram<T>) -> f64 {
    let conv = |ch: &Chromagram<T>| -> Vec<[f64; 12]> { ch.frames.iter().map(|r| r.map(|v| v.as_f64())).collect() };
    dtw_similarity(&conv(reference), &conv(estimate))
}
