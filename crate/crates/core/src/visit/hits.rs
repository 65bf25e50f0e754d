//! Hit times, per-scale winners and single-pass winner traces.

use std::fmt;

use crate::error::{Error, Result};
use crate::space::{circle_units, radius_threshold, Ball, DynamicalMap, SpacePoint};
use crate::target::TargetFamily;

/// First entrance time of an orbit into a ball, within a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HitOutcome {
    HitAt(u64),
    NoHitWithin(u64),
}

impl HitOutcome {
    /// Hit time with a miss mapped to `u64::MAX`, for comparisons.
    pub fn rank(&self) -> u64 {
        match *self {
            HitOutcome::HitAt(k) => k,
            HitOutcome::NoHitWithin(_) => u64::MAX,
        }
    }

    pub fn time(&self) -> Option<u64> {
        match *self {
            HitOutcome::HitAt(k) => Some(k),
            HitOutcome::NoHitWithin(_) => None,
        }
    }
}

/// Smallest `k` in `0..=horizon` with `f^k(x)` in `ball`, by stepwise iteration.
pub fn hit_time(map: &DynamicalMap, x: &SpacePoint, ball: &Ball, horizon: u64) -> Result<HitOutcome> {
    if x.kind() != map.space_kind() || ball.center.kind() != map.space_kind() {
        return Err(Error::usage("map, point and ball must share a space"));
    }
    let mut y = *x;
    for k in 0..=horizon {
        if ball.contains(&y) {
            return Ok(HitOutcome::HitAt(k));
        }
        if k < horizon {
            y = map.step(&y);
        }
    }
    Ok(HitOutcome::NoHitWithin(horizon))
}

/// Outcome of the first-visit race at one scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Winner {
    Index(usize),
    /// Two or more balls entered first at the same time.
    Tie,
    /// No tracked ball entered within the horizon.
    NoHit,
}

impl Winner {
    pub fn index(&self) -> Option<usize> {
        match *self {
            Winner::Index(i) => Some(i),
            _ => None,
        }
    }
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Winner::Index(i) => write!(f, "{i}"),
            Winner::Tie => f.write_str("tie"),
            Winner::NoHit => f.write_str("none"),
        }
    }
}

/// Hit times of the tracked balls at scale `n` (aligned with the tracked
/// index list) and the resulting winner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaleRow {
    pub n: usize,
    pub hits: Vec<HitOutcome>,
    pub winner: Winner,
}

/// Strict minimum of the hit times; ties and universal misses have no winner.
pub fn decide(tracked: &[usize], hits: &[HitOutcome]) -> Winner {
    let best = hits.iter().map(HitOutcome::rank).min().unwrap_or(u64::MAX);
    if best == u64::MAX {
        return Winner::NoHit;
    }
    let mut holders = tracked.iter().zip(hits).filter(|(_, h)| h.rank() == best);
    let (first, _) = holders.next().expect("minimum is attained");
    if holders.next().is_some() {
        Winner::Tie
    } else {
        Winner::Index(*first)
    }
}

fn check_tracked(family: &TargetFamily, tracked: &[usize]) -> Result<()> {
    if tracked.is_empty() {
        return Err(Error::usage("at least one center must be tracked"));
    }
    if let Some(i) = tracked.iter().find(|&&i| i == 0 || i > family.len()) {
        return Err(Error::usage(format!("tracked index {i} outside 1..={}", family.len())));
    }
    let mut sorted = tracked.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::usage("tracked indices must be distinct"));
    }
    Ok(())
}

/// Winner at scale `n` from one independent stepwise hit-time scan per ball.
pub fn winner_at_scale(
    map: &DynamicalMap,
    x: &SpacePoint,
    family: &TargetFamily,
    tracked: &[usize],
    n: usize,
    horizon: u64,
) -> Result<ScaleRow> {
    check_tracked(family, tracked)?;
    let hits = tracked
        .iter()
        .map(|&i| hit_time(map, x, &family.ball(i, n)?, horizon))
        .collect::<Result<Vec<_>>>()?;
    let winner = decide(tracked, &hits);
    Ok(ScaleRow { n, hits, winner })
}

/// Per-scale hit times and winners for one sample point, scales `1..=N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WinnerTrace {
    pub sample: SpacePoint,
    pub tracked: Vec<usize>,
    pub horizon: u64,
    pub rows: Vec<ScaleRow>,
}

/// Integer membership thresholds `t` with `d < rho^i_n  <=>  units(d) < t`,
/// one non-increasing row per tracked center.
fn threshold_table(family: &TargetFamily, tracked: &[usize], scales: usize) -> Result<Vec<Vec<u64>>> {
    tracked
        .iter()
        .map(|&i| {
            (1..=scales)
                .map(|n| family.radius_at(i, n).map(radius_threshold))
                .collect()
        })
        .collect()
}

/// First hit per (tracked center, scale), filled in by one forward orbit pass.
struct Sweep<'a> {
    thresholds: &'a [Vec<u64>],
    first_hit: Vec<Vec<Option<u64>>>,
    resolved: Vec<usize>,
    next: Vec<u64>,
    done: usize,
}

impl<'a> Sweep<'a> {
    fn new(thresholds: &'a [Vec<u64>]) -> Self {
        let scales = thresholds.first().map_or(0, Vec::len);
        Sweep {
            thresholds,
            first_hit: vec![vec![None; scales]; thresholds.len()],
            resolved: vec![0; thresholds.len()],
            next: thresholds.iter().map(|row| row[0]).collect(),
            done: 0,
        }
    }

    /// Records step `k` at distance `d` (grid units) from tracked center `t`.
    /// Balls are nested, so the scales containing the point form a prefix.
    #[inline]
    fn observe(&mut self, t: usize, d: u64, k: u64) {
        if d >= self.next[t] {
            return;
        }
        let row = &self.thresholds[t];
        let inside = row.partition_point(|&thr| d < thr);
        for slot in &mut self.first_hit[t][self.resolved[t]..inside] {
            *slot = Some(k);
        }
        self.resolved[t] = inside;
        self.next[t] = row.get(inside).copied().unwrap_or(0);
        if inside == row.len() {
            self.done += 1;
        }
    }

    fn finished(&self) -> bool {
        self.done == self.thresholds.len()
    }
}

/// Winner trace from a single orbit pass of length `horizon`.
///
/// At every step each tracked center contributes one distance, compared
/// against that center's whole radius ladder. The pass stops early once
/// every (center, scale) pair has been hit.
pub fn winner_trace(
    map: &DynamicalMap,
    x: &SpacePoint,
    family: &TargetFamily,
    tracked: &[usize],
    scales: usize,
    horizon: u64,
) -> Result<WinnerTrace> {
    check_tracked(family, tracked)?;
    if scales == 0 {
        return Err(Error::usage("at least one scale is required"));
    }
    if x.kind() != map.space_kind() || family.centers().kind() != map.space_kind() {
        return Err(Error::usage("map, sample and centers must share a space"));
    }
    let thresholds = threshold_table(family, tracked, scales)?;
    let centers: Vec<SpacePoint> = tracked.iter().map(|&i| family.centers().point(i)).collect();
    let mut sweep = Sweep::new(&thresholds);

    match (map, *x) {
        (DynamicalMap::Rotation { step, .. }, SpacePoint::Circle(start)) => {
            // hot path: raw grid arithmetic, no enum dispatch per step
            let c: Vec<u64> = centers.iter().map(|p| p.units().0).collect();
            let mask = (1u64 << crate::space::GRID_BITS) - 1;
            let mut y = start;
            for k in 0..=horizon {
                for (t, &ct) in c.iter().enumerate() {
                    sweep.observe(t, circle_units(y, ct), k);
                }
                if sweep.finished() {
                    break;
                }
                y = y.wrapping_add(*step) & mask;
            }
        }
        _ => {
            let mut y = *x;
            for k in 0..=horizon {
                for (t, ct) in centers.iter().enumerate() {
                    sweep.observe(t, y.dist_units(ct), k);
                }
                if sweep.finished() {
                    break;
                }
                y = map.step(&y);
            }
        }
    }

    let rows = (0..scales)
        .map(|s| {
            let hits: Vec<HitOutcome> = sweep
                .first_hit
                .iter()
                .map(|h| h[s].map_or(HitOutcome::NoHitWithin(horizon), HitOutcome::HitAt))
                .collect();
            let winner = decide(tracked, &hits);
            ScaleRow { n: s + 1, hits, winner }
        })
        .collect();
    Ok(WinnerTrace {
        sample: *x,
        tracked: tracked.to_vec(),
        horizon,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cb::StratifiedCenters;
    use crate::target::{select_tails_nowhere_dense, RadiusSchedule, Regime};

    fn golden() -> DynamicalMap {
        DynamicalMap::golden_rotation()
    }

    fn family(xs: &[f64], c: f64) -> TargetFamily {
        let centers = StratifiedCenters::isolated(&xs.iter().map(|&x| SpacePoint::circle(x)).collect::<Vec<_>>()).unwrap();
        TargetFamily::new(
            centers,
            vec![RadiusSchedule::harmonic(c).unwrap(); xs.len()],
            vec![0; xs.len()],
            Regime::NowhereDense,
        )
        .unwrap()
    }

    #[test]
    fn hit_time_examples() {
        let f = golden();
        let x = SpacePoint::circle(0.0);
        let inside = Ball::new(SpacePoint::circle(0.001), 0.01).unwrap();
        assert_eq!(hit_time(&f, &x, &inside, 10).unwrap(), HitOutcome::HitAt(0));
        let b = Ball::new(SpacePoint::circle(0.618033988749895), 1e-3).unwrap();
        assert_eq!(hit_time(&f, &x, &b, 10).unwrap(), HitOutcome::HitAt(1));
        let half = DynamicalMap::rotation(0.5);
        let b = Ball::new(SpacePoint::circle(0.25), 0.1).unwrap();
        assert_eq!(hit_time(&half, &x, &b, 1000).unwrap(), HitOutcome::NoHitWithin(1000));
    }

    #[test]
    fn hit_time_matches_linear_scan() {
        let f = golden();
        let x = SpacePoint::circle(0.0);
        let target = SpacePoint::circle(0.25);
        let expected = (0u64..).find(|&k| f.iterate(&x, k as i64).unwrap().dist(&target) < 0.01).unwrap();
        let b = Ball::new(target, 0.01).unwrap();
        assert_eq!(hit_time(&f, &x, &b, 1_000_000).unwrap(), HitOutcome::HitAt(expected));
    }

    #[test]
    fn symmetric_miss_and_single_index() {
        let half = DynamicalMap::rotation(0.5);
        let fam = family(&[0.25, 0.75], 0.1);
        let row = winner_at_scale(&half, &SpacePoint::circle(0.0), &fam, &[1, 2], 1, 1000).unwrap();
        assert_eq!(row.winner, Winner::NoHit);
        let row = winner_at_scale(&golden(), &SpacePoint::circle(0.0), &fam, &[2], 1, 100_000).unwrap();
        assert_eq!(row.winner, Winner::Index(2));
    }

    #[test]
    fn ties_have_no_winner() {
        let fam = family(&[0.2, 0.2 + 1e-9], 0.01);
        let row = winner_at_scale(&golden(), &SpacePoint::circle(0.2), &fam, &[1, 2], 1, 10).unwrap();
        assert_eq!(row.winner, Winner::Tie);
    }

    #[test]
    fn trace_rows_match_independent_scans() {
        let f = golden();
        let centers = StratifiedCenters::isolated(
            &[0.05, 0.61, 0.33, 0.87, 0.18, 0.74, 0.46, 0.95].map(SpacePoint::circle),
        )
        .unwrap();
        let fam = select_tails_nowhere_dense(&centers, &vec![RadiusSchedule::harmonic(0.5).unwrap(); 8]).unwrap();
        let tracked: Vec<usize> = (1..=8).collect();
        for s in 0..10 {
            let x = SpacePoint::circle(0.0137 + 0.0971 * s as f64);
            let trace = winner_trace(&f, &x, &fam, &tracked, 6, 20_000).unwrap();
            for row in &trace.rows {
                assert_eq!(*row, winner_at_scale(&f, &x, &fam, &tracked, row.n, 20_000).unwrap());
            }
        }
    }

    #[test]
    fn trace_on_torus_matches_scans() {
        let cat = DynamicalMap::cat_map();
        let centers = StratifiedCenters::isolated(&[SpacePoint::torus(0.2, 0.3), SpacePoint::torus(0.7, 0.6)]).unwrap();
        let fam = TargetFamily::new(
            centers,
            vec![RadiusSchedule::geometric(0.1, 0.7).unwrap(); 2],
            vec![0; 2],
            Regime::NowhereDense,
        )
        .unwrap();
        let x = SpacePoint::torus(0.123, 0.456);
        let trace = winner_trace(&cat, &x, &fam, &[1, 2], 5, 10_000).unwrap();
        for row in &trace.rows {
            assert_eq!(*row, winner_at_scale(&cat, &x, &fam, &[1, 2], row.n, 10_000).unwrap());
        }
    }

    #[test]
    fn bad_tracking_rejected() {
        let fam = family(&[0.1, 0.2], 0.01);
        let x = SpacePoint::circle(0.5);
        assert!(winner_trace(&golden(), &x, &fam, &[], 1, 10).is_err());
        assert!(winner_trace(&golden(), &x, &fam, &[3], 1, 10).is_err());
        assert!(winner_trace(&golden(), &x, &fam, &[1, 1], 1, 10).is_err());
        assert!(winner_trace(&golden(), &x, &fam, &[1], 0, 10).is_err());
    }
}
