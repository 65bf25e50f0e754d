//! Membership in the first-visit sets `C_n` and constructive searches for
//! neighbourhoods and approach sequences inside them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::space::{radius_threshold, DynamicalMap, SpacePoint};
use crate::target::TargetFamily;

/// Open-ball thresholds of every center at scale `n`.
fn scale_thresholds(family: &TargetFamily, n: usize) -> Result<Vec<u64>> {
    (1..=family.len())
        .map(|j| family.radius_at(j, n).map(radius_threshold))
        .collect()
}

/// Steps `h = 1..=horizon`: `true` as soon as the orbit enters ball `i`
/// without having entered (at that step or before) any other ball.
fn first_visit_from_step_one(
    map: &DynamicalMap,
    x: &SpacePoint,
    centers: &[SpacePoint],
    thresholds: &[u64],
    i: usize,
    horizon: u64,
) -> bool {
    let mut y = *x;
    for _ in 1..=horizon {
        y = map.step(&y);
        let mut in_target = false;
        for (j, (c, &thr)) in centers.iter().zip(thresholds).enumerate() {
            if y.dist_units(c) < thr {
                if j + 1 != i {
                    return false;
                }
                in_target = true;
            }
        }
        if in_target {
            return true;
        }
    }
    false
}

/// Whether some `m` in `1..=horizon` has `f^m(x)` in `B^i_n` while no
/// `f^h(x)`, `1 <= h <= m`, lies in a competing ball `B^j_n`.
///
/// Step 0 is deliberately excluded here, unlike in hit times.
pub fn cn_membership(
    map: &DynamicalMap,
    x: &SpacePoint,
    family: &TargetFamily,
    i: usize,
    n: usize,
    horizon: u64,
) -> Result<bool> {
    if horizon < 1 {
        return Err(Error::usage("horizon must be at least 1"));
    }
    if i == 0 || i > family.len() {
        return Err(Error::usage(format!("center index {i} outside 1..={}", family.len())));
    }
    if x.kind() != map.space_kind() {
        return Err(Error::usage("sample and map live on different spaces"));
    }
    let thresholds = scale_thresholds(family, n)?;
    let centers = family.centers().points();
    Ok(first_visit_from_step_one(map, x, &centers, &thresholds, i, horizon))
}

/// Uniform point of the open ball `B_r(c)` (a square on the torus).
fn sample_in_ball(rng: &mut ChaCha8Rng, c: &SpacePoint, r: f64) -> SpacePoint {
    loop {
        let mut off = || r * (2.0 * rng.gen::<f64>() - 1.0);
        let offset = match c {
            SpacePoint::Circle(_) => SpacePoint::circle(off()),
            SpacePoint::Torus(..) => {
                let dx = off();
                SpacePoint::torus(dx, off())
            }
        };
        let p = c.translate(&offset).expect("offset matches the center's space");
        if c.dist(&p) < r {
            return p;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpenWitnessParams {
    pub max_scale: usize,
    /// Candidate radii, tried in order at each scale.
    pub radius_ladder: Vec<f64>,
    pub samples: usize,
    pub horizon: u64,
    pub seed: u64,
}

impl Default for OpenWitnessParams {
    fn default() -> Self {
        OpenWitnessParams {
            max_scale: 200,
            radius_ladder: (0..=40).map(|k| 0.1 * 0.5f64.powi(k)).collect(),
            samples: 1000,
            horizon: 100_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OpenWitness {
    /// Every sampled point of `B_radius(center)` lies in `C_n`.
    Found { n: usize, center: SpacePoint, radius: f64, fraction: f64 },
    /// Best pilot fraction seen over all tried `(n, radius)`.
    Exhausted { best_n: usize, best_radius: f64, best_fraction: f64 },
}

/// Size of the fully evaluated pilot batch that estimates a ball's fraction.
const PILOT: usize = 32;

/// Fraction of `samples` points of `B_r(c)` in `C_n`. Beyond the pilot
/// batch the count stops at the first failure, so a value below 1 is exact
/// only for the pilot.
#[allow(clippy::too_many_arguments)]
fn ball_fraction(
    map: &DynamicalMap,
    family_centers: &[SpacePoint],
    thresholds: &[u64],
    i: usize,
    c: &SpacePoint,
    r: f64,
    samples: usize,
    horizon: u64,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let pilot = samples.min(PILOT);
    let mut good = 0usize;
    for _ in 0..pilot {
        let y = sample_in_ball(rng, c, r);
        if first_visit_from_step_one(map, &y, family_centers, thresholds, i, horizon) {
            good += 1;
        }
    }
    if good < pilot {
        return good as f64 / pilot as f64;
    }
    for _ in pilot..samples {
        let y = sample_in_ball(rng, c, r);
        if !first_visit_from_step_one(map, &y, family_centers, thresholds, i, horizon) {
            return (samples - 1) as f64 / samples as f64;
        }
    }
    1.0
}

/// Searches for a ball around `f^{-m}(p_i)` contained (by sampling) in
/// `C_n`, for an isolated center `i`. Scales ascend, radii follow the ladder.
pub fn open_witness_search(
    map: &DynamicalMap,
    family: &TargetFamily,
    i: usize,
    m: u64,
    params: &OpenWitnessParams,
) -> Result<OpenWitness> {
    check_center(family, i, m)?;
    if family.centers().level(i) != 0 {
        return Err(Error::usage(format!(
            "center {i} is an accumulation point; use the boundary search"
        )));
    }
    if params.samples == 0 || params.radius_ladder.is_empty() {
        return Err(Error::usage("open witness search needs samples and a radius ladder"));
    }
    let c = map.iterate(&family.centers().point(i), -(m as i64))?;
    let centers = family.centers().points();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best = (0, 0.0, -1.0);
    for n in 1..=params.max_scale {
        let thresholds = scale_thresholds(family, n)?;
        for &r in &params.radius_ladder {
            let fraction = ball_fraction(map, &centers, &thresholds, i, &c, r, params.samples, params.horizon, &mut rng);
            if fraction == 1.0 {
                return Ok(OpenWitness::Found { n, center: c, radius: r, fraction });
            }
            if fraction > best.2 {
                best = (n, r, fraction);
            }
        }
    }
    Ok(OpenWitness::Exhausted { best_n: best.0, best_radius: best.1, best_fraction: best.2.max(0.0) })
}

/// Re-samples a found ball with a fresh seed; returns the fraction in `C_n`.
#[allow(clippy::too_many_arguments)]
pub fn recheck_open_witness(
    map: &DynamicalMap,
    family: &TargetFamily,
    i: usize,
    n: usize,
    center: &SpacePoint,
    radius: f64,
    samples: usize,
    horizon: u64,
    seed: u64,
) -> Result<f64> {
    let thresholds = scale_thresholds(family, n)?;
    let centers = family.centers().points();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let good = (0..samples)
        .filter(|_| {
            let y = sample_in_ball(&mut rng, center, radius);
            first_visit_from_step_one(map, &y, &centers, &thresholds, i, horizon)
        })
        .count();
    Ok(if samples == 0 { 1.0 } else { good as f64 / samples as f64 })
}

fn check_center(family: &TargetFamily, i: usize, m: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::usage("witness searches need m >= 1"));
    }
    if i == 0 || i > family.len() {
        return Err(Error::usage(format!("center index {i} outside 1..={}", family.len())));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryWitnessParams {
    pub max_scale: usize,
    /// Number of approach points `t = 1..=approach`, at distances `< 2^-t`.
    pub approach: u32,
    /// Draws per approach point before moving to the next scale.
    pub attempts: usize,
    pub horizon: u64,
    pub seed: u64,
}

impl Default for BoundaryWitnessParams {
    fn default() -> Self {
        BoundaryWitnessParams { max_scale: 200, approach: 6, attempts: 500, horizon: 100_000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryWitness {
    /// `points[t-1]` lies in `C_n` within `2^-t` of `f^{-m}(p_i)`.
    Found { n: usize, target: SpacePoint, points: Vec<SpacePoint> },
    /// Largest number of consecutive approach points obtained at any scale.
    Exhausted { best_n: usize, reached: u32 },
}

/// Approach witnesses for an accumulation center: points of `C_n`
/// converging to `f^{-m}(p_i)`, drawn as preimages of points of `B^i_n`
/// near `p_i` that avoid the closures of all other balls.
pub fn boundary_witness_search(
    map: &DynamicalMap,
    family: &TargetFamily,
    i: usize,
    m: u64,
    params: &BoundaryWitnessParams,
) -> Result<BoundaryWitness> {
    check_center(family, i, m)?;
    if family.centers().level(i) == 0 {
        return Err(Error::usage(format!("center {i} is isolated; use the open search")));
    }
    let p = family.centers().point(i);
    let target = map.iterate(&p, -(m as i64))?;
    if params.approach == 0 {
        return Ok(BoundaryWitness::Found { n: 1, target, points: Vec::new() });
    }
    let centers = family.centers().points();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best = (0, 0);
    for n in 1..=params.max_scale {
        let thresholds = scale_thresholds(family, n)?;
        let radii: Vec<f64> = (1..=family.len()).map(|j| family.radius_at(j, n)).collect::<Result<_>>()?;
        let rho = radii[i - 1];
        let mut points = Vec::new();
        'approach: for t in 1..=params.approach {
            let reach = 0.5f64.powi(t as i32);
            for _ in 0..params.attempts {
                let z = sample_in_ball(&mut rng, &p, rho.min(reach));
                let near_other = centers
                    .iter()
                    .zip(&radii)
                    .enumerate()
                    .any(|(j, (c, r))| j + 1 != i && z.dist(c) <= *r);
                if near_other {
                    continue;
                }
                let y = map.iterate_unchecked(&z, -(m as i64));
                if y.dist(&target) < reach
                    && first_visit_from_step_one(map, &y, &centers, &thresholds, i, params.horizon)
                {
                    points.push(y);
                    continue 'approach;
                }
            }
            break;
        }
        if points.len() == params.approach as usize {
            return Ok(BoundaryWitness::Found { n, target, points });
        }
        if points.len() as u32 > best.1 {
            best = (n, points.len() as u32);
        }
    }
    Ok(BoundaryWitness::Exhausted { best_n: best.0, reached: best.1 })
}
