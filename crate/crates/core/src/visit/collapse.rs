//! How much of a ball is swallowed by the balls of centers it contains.

use crate::error::{Error, Result};
use crate::space::{net_resolution, radius_threshold, SpaceKind, SpacePoint};
use crate::target::TargetFamily;

/// Net coordinates `j / m` lying within `r` of `x` along one axis.
fn axis_window(x: f64, r: f64, m: usize) -> Vec<usize> {
    if 2.0 * r >= 1.0 {
        return (0..m).collect();
    }
    let lo = ((x - r) * m as f64).floor() as i64;
    let hi = ((x + r) * m as f64).ceil() as i64;
    let mut out: Vec<usize> = (lo..=hi).map(|j| j.rem_euclid(m as i64) as usize).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Fraction of the `grid_eps` net inside `B^i_n` that also lies in some
/// `B^j_n` with `j != i` and `p_j` in `B^i_n`.
///
/// Only net points in a window around the ball are enumerated; the count
/// equals filtering the full net.
pub fn collapse_diagnostic(family: &TargetFamily, i: usize, n: usize, grid_eps: f64) -> Result<f64> {
    if i == 0 || i > family.len() {
        return Err(Error::usage(format!("center index {i} outside 1..={}", family.len())));
    }
    if !(grid_eps > 0.0 && grid_eps < 1.0) {
        return Err(Error::usage(format!("grid epsilon must lie in (0, 1), got {grid_eps}")));
    }
    let ball = family.ball(i, n)?;
    let siblings: Vec<(SpacePoint, u64)> = (1..=family.len())
        .filter(|&j| j != i && ball.contains(&family.centers().point(j)))
        .map(|j| Ok((family.centers().point(j), radius_threshold(family.radius_at(j, n)?))))
        .collect::<Result<_>>()?;

    let m = net_resolution(grid_eps);
    let coord = |j: usize| j as f64 / m as f64;
    let xs = axis_window(ball.center.x(), ball.radius, m);
    let candidates: Vec<SpacePoint> = match family.centers().kind() {
        SpaceKind::Circle => xs.iter().map(|&a| SpacePoint::circle(coord(a))).collect(),
        SpaceKind::Torus => {
            let ys = axis_window(ball.center.y().unwrap(), ball.radius, m);
            xs.iter()
                .flat_map(|&a| ys.iter().map(move |&b| SpacePoint::torus(coord(a), coord(b))))
                .collect()
        }
    };
    let mut inside = 0usize;
    let mut covered = 0usize;
    for q in candidates.iter().filter(|q| ball.contains(q)) {
        inside += 1;
        if siblings.iter().any(|(c, thr)| c.dist_units(q) < *thr) {
            covered += 1;
        }
    }
    if inside == 0 {
        let r = ball.radius;
        return Err(Error::Resolution(format!(
            "no grid point of spacing {grid_eps:e} falls inside ball {i} at scale {n} (radius {r:e}); use a grid epsilon below {r:e}"
        )));
    }
    Ok(covered as f64 / inside as f64)
}
