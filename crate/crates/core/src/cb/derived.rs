//! Finite-resolution derived sets and the Cantor–Bendixson level iteration.

use crate::cb::centers::{CenterRecord, RankBound, StratifiedCenters};
use crate::error::{Error, Result};
use crate::grid::{cells_for_radius, BucketGrid};
use crate::space::{SpacePoint, GRID_SCALE};

const MAX_CELLS_CIRCLE: u64 = 1 << 22;
const MAX_CELLS_TORUS: u64 = 1 << 11;

/// Grid units `t` with `d <= delta  <=>  units(d) <= t`.
fn closed_threshold(delta: f64) -> u64 {
    let scaled = (delta * GRID_SCALE).floor();
    if scaled >= u64::MAX as f64 {
        u64::MAX
    } else {
        scaled as u64
    }
}

/// For each point, whether some other (coordinate-distinct) point lies within `delta`.
pub fn accumulation_mask(points: &[SpacePoint], delta: f64) -> Vec<bool> {
    if points.is_empty() {
        return Vec::new();
    }
    let kind = points[0].kind();
    let cap = match kind {
        crate::space::SpaceKind::Circle => MAX_CELLS_CIRCLE,
        crate::space::SpaceKind::Torus => MAX_CELLS_TORUS,
    };
    let threshold = closed_threshold(delta);
    let mut grid = BucketGrid::new(kind, cells_for_radius(delta, cap));
    for (id, p) in points.iter().enumerate() {
        grid.insert(p, id as u32);
    }
    points
        .iter()
        .map(|q| {
            let mut hit = false;
            grid.for_each_near(q, |id| {
                let p = &points[id as usize];
                if !hit && p != q && p.dist_units(q) <= threshold {
                    hit = true;
                }
            });
            hit
        })
        .collect()
}

/// `{q in points : exists p in points, p != q, d(p, q) <= delta}`, in input order.
pub fn derived_set_approx(points: &[SpacePoint], delta: f64) -> Vec<SpacePoint> {
    accumulation_mask(points, delta)
        .into_iter()
        .zip(points)
        .filter_map(|(keep, p)| keep.then_some(*p))
        .collect()
}

/// Levels by iterated derived sets: the level of a point is the number of
/// successive `derived_set_approx` passes (one per schedule entry) it survives.
///
/// If points still survive when the schedule runs out, the rank is reported
/// as a lower bound.
pub fn cb_stratify(points: &[SpacePoint], schedule: &[f64]) -> Result<StratifiedCenters> {
    if points.is_empty() {
        return Err(Error::usage("cannot stratify an empty point set"));
    }
    if let Some(bad) = schedule.iter().find(|d| !(**d > 0.0) || !d.is_finite()) {
        return Err(Error::usage(format!("delta schedule entries must be positive, got {bad}")));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::usage("delta schedule must be strictly decreasing"));
    }
    let kind = points[0].kind();
    if points.iter().any(|p| p.kind() != kind) {
        return Err(Error::usage("points belong to different spaces"));
    }

    let mut level = vec![0usize; points.len()];
    let mut alive: Vec<usize> = (0..points.len()).collect();
    for &delta in schedule {
        if alive.is_empty() {
            break;
        }
        let subset: Vec<SpacePoint> = alive.iter().map(|&i| points[i]).collect();
        let mask = accumulation_mask(&subset, delta);
        alive = alive
            .into_iter()
            .zip(mask)
            .filter_map(|(i, keep)| keep.then_some(i))
            .collect();
        for &i in &alive {
            level[i] += 1;
        }
    }
    let top = level.iter().copied().max().unwrap_or(0);
    let rank = if alive.is_empty() {
        RankBound::Exact(top)
    } else {
        RankBound::AtLeast(schedule.len())
    };
    let records = points
        .iter()
        .zip(level)
        .enumerate()
        .map(|(i, (p, lvl))| CenterRecord {
            index: i + 1,
            point: *p,
            level: lvl,
            parent: 0,
            envelope: 0.0,
        })
        .collect();
    let mut out = StratifiedCenters::new(kind, records)?;
    out.set_rank(rank);
    out.set_delta_schedule(schedule.to_vec());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(points: &[SpacePoint], delta: f64) -> Vec<SpacePoint> {
        points
            .iter()
            .filter(|q| points.iter().any(|p| p != *q && p.dist(q) <= delta))
            .copied()
            .collect()
    }

    fn circle(xs: &[f64]) -> Vec<SpacePoint> {
        xs.iter().map(|&x| SpacePoint::circle(x)).collect()
    }

    #[test]
    fn derived_set_examples() {
        assert!(derived_set_approx(&circle(&[0.0, 0.5]), 0.1).is_empty());
        assert_eq!(
            derived_set_approx(&circle(&[0.0, 0.05, 0.5]), 0.1),
            circle(&[0.0, 0.05])
        );
        assert!(derived_set_approx(&[], 0.1).is_empty());
    }

    #[test]
    fn geometric_cluster_matches_oracle() {
        let mut xs: Vec<f64> = (1..=20).map(|k| 0.5f64.powi(k)).collect();
        xs.push(0.0);
        let pts = circle(&xs);
        for delta in [0.001, 0.1, 1e-7, 0.3] {
            assert_eq!(derived_set_approx(&pts, delta), naive(&pts, delta));
        }
    }

    #[test]
    fn duplicates_are_not_neighbours() {
        let pts = circle(&[0.2, 0.2, 0.7]);
        assert!(derived_set_approx(&pts, 0.1).is_empty());
    }

    #[test]
    fn boundary_distance_counts() {
        let pts = circle(&[0.0, 0.125]);
        assert_eq!(derived_set_approx(&pts, 0.125).len(), 2);
        assert!(derived_set_approx(&pts, 0.124_999_999).is_empty());
    }

    #[test]
    fn isolated_pair_has_rank_zero() {
        let s = cb_stratify(&circle(&[0.1, 0.6]), &[0.2, 0.01]).unwrap();
        assert!(s.records().iter().all(|r| r.level == 0));
        assert_eq!(s.rank(), RankBound::Exact(0));
    }

    #[test]
    fn geometric_cluster_levels() {
        // Nearest-distance surrogate: every point with a neighbour within 0.1
        // survives the first pass, so the tail 1/8 .. 2^-20 rises with 0.
        let mut xs: Vec<f64> = (1..=20).map(|k| 0.5f64.powi(k)).collect();
        xs.push(0.0);
        let s = cb_stratify(&circle(&xs), &[0.1, 1e-7]).unwrap();
        let levels: Vec<usize> = s.records().iter().map(|r| r.level).collect();
        let mut expected = vec![0, 0];
        expected.extend(std::iter::repeat_n(1, 18));
        expected.push(1);
        assert_eq!(levels, expected);
        assert_eq!(s.rank(), RankBound::Exact(1));
    }

    #[test]
    fn exhausted_schedule_is_a_lower_bound() {
        let s = cb_stratify(&circle(&[0.0, 0.01]), &[0.1]).unwrap();
        assert_eq!(s.rank(), RankBound::AtLeast(1));
    }

    #[test]
    fn schedule_must_decrease() {
        assert!(cb_stratify(&circle(&[0.0]), &[0.1, 0.2]).is_err());
        assert!(cb_stratify(&circle(&[0.0]), &[0.1, -0.2]).is_err());
    }
}
