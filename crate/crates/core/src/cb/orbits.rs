//! Finite check that distinct centers lie on distinct orbits.

use crate::cb::centers::StratifiedCenters;
use crate::error::{Error, Result};
use crate::grid::BucketGrid;
use crate::space::{DynamicalMap, SpaceKind, SpacePoint};

/// Closest approach between orbit segments of two different centers.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitReport {
    /// `None` when there is only one center.
    pub closest: Option<OrbitApproach>,
    pub horizon: i64,
    pub tol: f64,
    pub passed: bool,
}

/// `d(f^k(p_i), f^h(p_j))` attained at the recorded indices and exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitApproach {
    pub i: usize,
    pub j: usize,
    pub k: i64,
    pub h: i64,
    pub distance: f64,
}

/// Preference among equally close approaches: fewest total steps, then
/// smallest `|h|`, smallest `|k|`, forward before backward.
fn tie_key(k: i64, h: i64) -> (u64, u64, u64, bool) {
    let (ak, ah) = (k.unsigned_abs(), h.unsigned_abs());
    (ak + ah, ah, ak, k < 0)
}

/// Minimum of `d(f^k(p_i), f^h(p_j))` over `i != j` and `|k|, |h| <= horizon`;
/// passes when it exceeds `tol`.
pub fn orbit_disjointness_check(
    centers: &StratifiedCenters,
    map: &DynamicalMap,
    horizon: i64,
    tol: f64,
) -> Result<OrbitReport> {
    if horizon < 1 {
        return Err(Error::usage("orbit horizon must be at least 1"));
    }
    if centers.kind() != map.space_kind() {
        return Err(Error::usage("centers and map live on different spaces"));
    }
    if centers.len() < 2 {
        return Ok(OrbitReport { closest: None, horizon, tol, passed: true });
    }

    // labelled orbit points: (center index, exponent, point)
    let mut labelled: Vec<(usize, i64, SpacePoint)> = Vec::new();
    for r in centers.records() {
        labelled.push((r.index, 0, r.point));
        let (mut fwd, mut back) = (r.point, r.point);
        for k in 1..=horizon {
            fwd = map.step(&fwd);
            back = map.step_back(&back);
            labelled.push((r.index, k, fwd));
            labelled.push((r.index, -k, back));
        }
    }

    let kind = centers.kind();
    let total = labelled.len() as f64;
    let mut m = match kind {
        SpaceKind::Circle => (4.0 * total) as u64,
        SpaceKind::Torus => (4.0 * total).sqrt() as u64,
    }
    .clamp(1, 1 << 24);
    loop {
        let grid = {
            let mut g = BucketGrid::new(kind, m);
            for (id, (_, _, p)) in labelled.iter().enumerate() {
                g.insert(p, id as u32);
            }
            g
        };
        // (distance, tie key, center i, center j, label a, label b)
        type Candidate = (u64, (u64, u64, u64, bool), usize, usize, usize, usize);
        let mut best: Option<Candidate> = None;
        for (a, &(ci, ka, pa)) in labelled.iter().enumerate() {
            grid.for_each_near(&pa, |id| {
                let (cj, kb, pb) = labelled[id as usize];
                if ci >= cj {
                    return;
                }
                let cand = (pa.dist_units(&pb), tie_key(ka, kb), ci, cj, a, id as usize);
                if best.is_none_or(|b| cand < b) {
                    best = Some(cand);
                }
            });
        }
        let width = grid.cell_width();
        let resolved = match best {
            Some((d, ..)) => crate::space::units_to_distance(d) <= width,
            None => false,
        };
        if resolved || m == 1 {
            let (d, _, i, j, a, b) = best.expect("at least two centers give at least one pair");
            let distance = crate::space::units_to_distance(d);
            let approach = OrbitApproach { i, j, k: labelled[a].1, h: labelled[b].1, distance };
            return Ok(OrbitReport { closest: Some(approach), horizon, tol, passed: distance > tol });
        }
        m /= 2;
        if m < 3 {
            m = 1;
        }
    }
}
