//! Annulus cluster and finite-rank constructors for center sequences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cb::centers::{CenterRecord, RankBound, StratifiedCenters};
use crate::error::{Error, Result};
use crate::grid::BucketGrid;
use crate::space::{backward_density_score, radius_threshold, DynamicalMap, SpaceKind, SpacePoint};

/// Default cap on the population of a rank construction.
pub const DEFAULT_POPULATION_CAP: usize = 10_000;

/// Tunables for the anchor sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorParams {
    /// Backward-orbit length used for the density score.
    pub density_budget: usize,
    pub density_eps: f64,
    /// Minimal accepted density score.
    pub density_threshold: f64,
    /// Orbit segment `|k| <= orbit_span` compared against accepted anchors.
    pub orbit_span: i64,
    pub orbit_tol: f64,
    /// Draws per annulus before giving up.
    pub max_draws: usize,
}

impl Default for AnchorParams {
    fn default() -> Self {
        AnchorParams {
            density_budget: 100_000,
            density_eps: 0.01,
            density_threshold: 0.99,
            orbit_span: 1_000,
            orbit_tol: 1e-9,
            max_draws: 64,
        }
    }
}

/// Seeded sampler of cluster points. A candidate is accepted only if its
/// backward orbit is dense at the configured resolution and its orbit
/// segment stays clear of every previously accepted orbit.
pub struct AnchorSource {
    map: DynamicalMap,
    params: AnchorParams,
    seed: u64,
    rng: ChaCha8Rng,
    orbits: BucketGrid,
    orbit_points: Vec<SpacePoint>,
}

impl AnchorSource {
    pub fn new(map: DynamicalMap, seed: u64) -> Self {
        Self::with_params(map, seed, AnchorParams::default())
    }

    pub fn with_params(map: DynamicalMap, seed: u64, params: AnchorParams) -> Self {
        let kind = map.space_kind();
        let m = match kind {
            SpaceKind::Circle => 1 << 20,
            SpaceKind::Torus => 1 << 14,
        };
        AnchorSource {
            map,
            params,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            orbits: BucketGrid::new(kind, m),
            orbit_points: Vec::new(),
        }
    }

    pub fn map(&self) -> &DynamicalMap {
        &self.map
    }

    /// Restarts the random stream for a cluster, keeping accepted orbits.
    fn reseed(&mut self, cluster_index: usize) {
        self.rng = ChaCha8Rng::seed_from_u64(self.seed ^ cluster_index as u64);
    }

    fn orbit_segment(&self, p: &SpacePoint) -> Vec<SpacePoint> {
        let span = self.params.orbit_span;
        let mut seg = Vec::with_capacity(2 * span as usize + 1);
        seg.push(*p);
        let (mut fwd, mut back) = (*p, *p);
        for _ in 0..span {
            fwd = self.map.step(&fwd);
            back = self.map.step_back(&back);
            seg.push(fwd);
            seg.push(back);
        }
        seg
    }

    fn clear_of_accepted(&self, segment: &[SpacePoint]) -> bool {
        let tol = radius_threshold(self.params.orbit_tol);
        segment.iter().all(|q| {
            let mut clear = true;
            self.orbits.for_each_near(q, |id| {
                if clear && self.orbit_points[id as usize].dist_units(q) <= tol {
                    clear = false;
                }
            });
            clear
        })
    }

    fn record_orbit(&mut self, segment: Vec<SpacePoint>) {
        for q in segment {
            let id = self.orbit_points.len() as u32;
            self.orbits.insert(&q, id);
            self.orbit_points.push(q);
        }
    }

    /// Registers a point chosen elsewhere (a construction root) without testing it.
    pub fn register(&mut self, p: &SpacePoint) {
        let seg = self.orbit_segment(p);
        self.record_orbit(seg);
    }

    fn acceptable(&self, p: &SpacePoint) -> Result<Option<Vec<SpacePoint>>> {
        let score = backward_density_score(
            &self.map,
            p,
            self.params.density_budget,
            self.params.density_eps,
        )?;
        if score < self.params.density_threshold {
            return Ok(None);
        }
        let seg = self.orbit_segment(p);
        Ok(self.clear_of_accepted(&seg).then_some(seg))
    }

    /// Draws a point strictly inside the annulus `inner < d(x, .) < outer`,
    /// at a distance from the central half of the annulus.
    fn draw_in_annulus(&mut self, x: &SpacePoint, inner: f64, outer: f64, label: &str) -> Result<(SpacePoint, f64)> {
        for _ in 0..self.params.max_draws {
            let d = inner + (outer - inner) * (0.25 + 0.5 * self.rng.gen::<f64>());
            let candidate = match *x {
                SpacePoint::Circle(_) => {
                    let side = if self.rng.gen::<bool>() { d } else { -d };
                    x.translate(&SpacePoint::circle(side))?
                }
                SpacePoint::Torus(..) => {
                    // a uniform point on the max-norm sphere of radius d
                    let along = if self.rng.gen::<bool>() { d } else { -d };
                    let across = d * (2.0 * self.rng.gen::<f64>() - 1.0);
                    let offset = if self.rng.gen::<bool>() {
                        SpacePoint::torus(along, across)
                    } else {
                        SpacePoint::torus(across, along)
                    };
                    x.translate(&offset)?
                }
            };
            let actual = x.dist(&candidate);
            if !(actual > inner && actual < outer) {
                continue;
            }
            if let Some(seg) = self.acceptable(&candidate)? {
                self.record_orbit(seg);
                return Ok((candidate, actual));
            }
        }
        Err(Error::Construction {
            annulus: label.to_string(),
            reason: format!(
                "no acceptable anchor after {} draws (density >= {}, orbit clearance > {})",
                self.params.max_draws, self.params.density_threshold, self.params.orbit_tol
            ),
        })
    }
}

/// Places `count - 1` cluster points around `x`: the `n`-th in the annulus
/// `delta/2^n < d < delta/2^(n-1)`, with an envelope of 0.9 times the
/// distance to the nearer annulus boundary.
fn place_cluster(
    source: &mut AnchorSource,
    x: &SpacePoint,
    x_index: usize,
    delta: f64,
    count: usize,
) -> Result<Vec<(SpacePoint, f64)>> {
    source.reseed(x_index);
    (2..=count)
        .map(|n| {
            let outer = delta / 2f64.powi(n as i32 - 1);
            let inner = delta / 2f64.powi(n as i32);
            let label = format!("n={n} around center {x_index}: ({inner:e}, {outer:e})");
            let (p, d) = source.draw_in_annulus(x, inner, outer, &label)?;
            Ok((p, 0.9 * (outer - d).min(d - inner)))
        })
        .collect()
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 0.25) {
        return Err(Error::usage(format!("cluster radius delta must lie in (0, 0.25], got {delta}")));
    }
    Ok(())
}

/// `x` together with `count - 1` points converging to it inside `B_delta(x)`.
pub fn construct_cluster_sequence(
    x: SpacePoint,
    delta: f64,
    count: usize,
    source: &mut AnchorSource,
) -> Result<StratifiedCenters> {
    if count < 2 {
        return Err(Error::usage("a cluster needs count >= 2"));
    }
    construct(x, delta, 1, count - 1, usize::MAX, source)
}

/// Finite truncation of a rank-`rank` sequence converging to `x`: every
/// point of level `l >= 1` heads a cluster of `branching` level-`(l-1)`
/// points inside its envelope. Indices follow breadth-first order.
pub fn construct_rank_sequence(
    x: SpacePoint,
    delta: f64,
    rank: usize,
    branching: usize,
    cap: usize,
    source: &mut AnchorSource,
) -> Result<StratifiedCenters> {
    if rank < 1 {
        return Err(Error::usage("rank must be at least 1"));
    }
    if branching < 2 {
        return Err(Error::usage("branching must be at least 2"));
    }
    construct(x, delta, rank, branching, cap, source)
}

/// Total number of points in a rank construction, saturating.
pub fn rank_population(rank: usize, branching: usize) -> usize {
    (0..=rank).fold(0usize, |acc, t| {
        acc.saturating_add(branching.saturating_pow(t as u32))
    })
}

fn construct(
    x: SpacePoint,
    delta: f64,
    rank: usize,
    branching: usize,
    cap: usize,
    source: &mut AnchorSource,
) -> Result<StratifiedCenters> {
    check_delta(delta)?;
    if x.kind() != source.map().space_kind() {
        return Err(Error::usage("root point and anchor map live on different spaces"));
    }
    let required = rank_population(rank, branching);
    if required > cap {
        return Err(Error::PopulationCap { required, cap });
    }

    source.register(&x);
    let mut records = vec![CenterRecord {
        index: 1,
        point: x,
        level: rank,
        parent: 0,
        envelope: delta,
    }];
    let mut head = 0;
    while head < records.len() {
        let limit = records[head];
        head += 1;
        if limit.level == 0 {
            continue;
        }
        let members = place_cluster(source, &limit.point, limit.index, limit.envelope, branching + 1)?;
        for (p, r) in members {
            let index = records.len() + 1;
            records.push(CenterRecord {
                index,
                point: p,
                level: limit.level - 1,
                parent: limit.index,
                envelope: r,
            });
        }
    }

    let mut centers = StratifiedCenters::new(x.kind(), records)?;
    centers.set_rank(RankBound::Exact(rank));
    let schedule = matched_schedule(&centers.points(), rank);
    centers.set_delta_schedule(schedule);
    Ok(centers)
}

/// Delta schedule under which the root (index 1) survives exactly `rank`
/// derived-set passes: `rank` scales just above the root's nearest-neighbour
/// distance, then half the smallest pairwise gap.
fn matched_schedule(points: &[SpacePoint], rank: usize) -> Vec<f64> {
    const STEP: f64 = 1e-3;
    let root = points[0];
    let nearest = points[1..]
        .iter()
        .map(|p| root.dist(p))
        .fold(f64::INFINITY, f64::min);
    let mut min_gap = f64::INFINITY;
    for (a, p) in points.iter().enumerate() {
        for q in &points[a + 1..] {
            min_gap = min_gap.min(p.dist(q));
        }
    }
    let mut schedule: Vec<f64> = (1..=rank)
        .map(|t| nearest * (1.0 + (rank + 1 - t) as f64 * STEP))
        .collect();
    schedule.push(min_gap / 2.0);
    schedule
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cb::derived::cb_stratify;

    fn source(seed: u64) -> AnchorSource {
        AnchorSource::new(DynamicalMap::golden_rotation(), seed)
    }

    #[test]
    fn cluster_points_sit_in_their_annuli() {
        let x = SpacePoint::circle(0.5);
        let delta = 0.1;
        let c = construct_cluster_sequence(x, delta, 4, &mut source(7)).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c.point(1), x);
        for n in 2..=4 {
            let d = c.point(n).dist(&x);
            assert!(d > delta / 2f64.powi(n as i32) && d < delta / 2f64.powi(n as i32 - 1));
        }
        // closed envelopes pairwise disjoint
        for a in 2..=4 {
            for b in a + 1..=4 {
                let (ra, rb) = (c.records()[a - 1], c.records()[b - 1]);
                assert!(ra.point.dist(&rb.point) > ra.envelope + rb.envelope);
            }
        }
    }

    #[test]
    fn cluster_round_trips_through_stratify() {
        let x = SpacePoint::circle(0.5);
        let c = construct_cluster_sequence(x, 0.1, 4, &mut source(3)).unwrap();
        let s = cb_stratify(&c.points(), c.delta_schedule()).unwrap();
        assert_eq!(s.level(1), 1);
        assert_eq!(s.rank(), RankBound::Exact(1));
    }

    #[test]
    fn rank_two_population_and_containment() {
        let x = SpacePoint::circle(0.3);
        let c = construct_rank_sequence(x, 0.1, 2, 3, DEFAULT_POPULATION_CAP, &mut source(11)).unwrap();
        assert_eq!(c.len(), 13);
        for r in c.records().iter().skip(1) {
            let parent = c.record(r.parent).unwrap();
            assert!(parent.point.dist(&r.point) + r.envelope < parent.envelope);
        }
        let s = cb_stratify(&c.points(), c.delta_schedule()).unwrap();
        assert_eq!(s.level(1), 2);
    }

    #[test]
    fn rank_one_equals_cluster() {
        let x = SpacePoint::circle(0.5);
        let a = construct_rank_sequence(x, 0.1, 1, 3, DEFAULT_POPULATION_CAP, &mut source(5)).unwrap();
        let b = construct_cluster_sequence(x, 0.1, 4, &mut source(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn population_cap_is_enforced() {
        let err = construct_rank_sequence(SpacePoint::circle(0.5), 0.1, 3, 10, 1000, &mut source(1)).unwrap_err();
        match err {
            Error::PopulationCap { required, cap } => {
                assert_eq!(required, 1111);
                assert_eq!(cap, 1000);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn impossible_annulus_names_itself() {
        // a rational rotation never passes the density filter
        let mut src = AnchorSource::new(DynamicalMap::rotation(0.5), 1);
        let err = construct_cluster_sequence(SpacePoint::circle(0.5), 0.1, 3, &mut src).unwrap_err();
        match err {
            Error::Construction { annulus, .. } => assert!(annulus.starts_with("n=2")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn torus_cluster() {
        let src = &mut AnchorSource::new(DynamicalMap::cat_map(), 9);
        let c = construct_cluster_sequence(SpacePoint::torus(0.4, 0.6), 0.1, 4, src).unwrap();
        let s = cb_stratify(&c.points(), c.delta_schedule()).unwrap();
        assert_eq!(s.level(1), 1);
    }
}
