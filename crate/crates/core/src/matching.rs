//! Greedy one-to-one matching of event times within a tolerance window.

/// Pairs `(reference index, estimate index)` matched one-to-one.
///
/// All candidate pairs within `window` seconds are visited in order of
/// increasing distance (ties by reference then estimate index) and taken
/// when both events are still free. Both inputs must be sorted.
pub(crate) fn greedy_matches(reference: &[f64], estimate: &[f64], window: f64) -> Vec<(usize, usize)> {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &r) in reference.iter().enumerate() {
        let lo = estimate.partition_point(|&e| e < r - window);
        for (j, &e) in estimate.iter().enumerate().skip(lo) {
            let d = (e - r).abs();
            if e > r + window {
                break;
            }
            if d <= window {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut ref_used = vec![false; reference.len()];
    let mut est_used = vec![false; estimate.len()];
    let mut out = Vec::new();
    for (_, i, j) in candidates {
        if !ref_used[i] && !est_used[j] {
            ref_used[i] = true;
            est_used[j] = true;
            out.push((i, j));
        }
    }
    out
}

/// Precision/recall F-score from a match count; 0 when either side is empty.
pub(crate) fn f_measure(matches: usize, n_ref: usize, n_est: usize) -> f64 {
    if matches == 0 || n_ref == 0 || n_est == 0 {
        return 0.0;
    }
    let p = matches as f64 / n_est as f64;
    let r = matches as f64 / n_ref as f64;
    2.0 * p * r / (p + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closest_pair_wins_contention() {
        let m = greedy_matches(&[1.0, 1.1], &[1.08], 0.1);
        assert_eq!(m, vec![(1, 0)]);
    }

    #[test]
    fn window_is_inclusive() {
        assert_eq!(greedy_matches(&[1.0], &[1.5], 0.5).len(), 1);
        assert!(greedy_matches(&[1.0], &[1.5000001], 0.5).is_empty());
    }

    #[test]
    fn f_of_three_of_four() {
        assert_eq!(f_measure(3, 4, 4), 0.75);
        assert_eq!(f_measure(0, 4, 4), 0.0);
        assert!((f_measure(2, 2, 6) - 0.5).abs() < 1e-15);
    }
}
