//! Head patterns `{σ₁(n), σ₂(n), σ₃(n)}` and their point-set statistics.

use crate::schedule::ScheduleConfig;
use crate::state::{BlochVector, Evolution, NetworkState, Spin, StateError};

/// Head Bloch vectors after steps `1 ..= steps`.
pub fn head_pattern(
    schedule: &ScheduleConfig,
    initial: NetworkState,
    steps: u64,
) -> Result<Vec<BlochVector>, StateError> {
    Evolution::new(schedule, initial)
        .take(steps as usize)
        .map(|s| s.bloch(Spin::Head))
        .collect()
}

fn close(a: &BlochVector, b: &BlochVector, tol: f64) -> bool {
    (a.s2 - b.s2).abs() <= tol && (a.s3 - b.s3).abs() <= tol
}

/// For each point, the index of the earliest other point whose `(s2, s3)`
/// lies within `tol` in both coordinates, found by a sweep over `s2`.
fn neighbours(points: &[BlochVector], tol: f64, mut visit: impl FnMut(usize, usize)) {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[i].s2.total_cmp(&points[j].s2).then(i.cmp(&j)));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if points[j].s2 - points[i].s2 > tol {
                break;
            }
            if close(&points[i], &points[j], tol) {
                visit(i.min(j), i.max(j));
            }
        }
    }
}

/// Index pairs `(i, j)`, `i < j`, whose `(s2, s3)` coincide within `tol`.
pub fn revisit_pairs(points: &[BlochVector], tol: f64) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    neighbours(points, tol, |i, j| pairs.push((i, j)));
    pairs.sort_unstable();
    pairs
}

/// Number of points with no earlier point within `tol`.
pub fn distinct_count(points: &[BlochVector], tol: f64) -> usize {
    let mut repeated = vec![false; points.len()];
    neighbours(points, tol, |_, j| repeated[j] = true);
    repeated.iter().filter(|r| !**r).count()
}

/// Smallest `p ≤ max_period` with `points[n + p] ≈ points[n]` for every `n`
/// in range, if any.
pub fn pattern_period(points: &[BlochVector], tol: f64, max_period: usize) -> Option<usize> {
    (1..=max_period.min(points.len().saturating_sub(1))).find(|&p| {
        points
            .iter()
            .zip(&points[p..])
            .all(|(a, b)| a.max_abs_diff(b) <= tol)
    })
}
