//! Quick invariant suite behind the `selftest` subcommand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cb::{accumulation_mask, cb_stratify, construct_rank_sequence, fmt_real, AnchorSource, RankBound};
use crate::space::{DynamicalMap, SpaceKind, SpacePoint};
use crate::target::{select_tails_countable, select_tails_nowhere_dense, verify_certificate, RadiusSchedule};
use crate::visit::{winner_at_scale, winner_trace};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, failures: usize, trials: usize) -> Check {
    Check { name, passed: failures == 0, detail: format!("{failures} failures in {trials} trials") }
}

fn random_point(rng: &mut ChaCha8Rng, kind: SpaceKind) -> SpacePoint {
    match kind {
        SpaceKind::Circle => SpacePoint::circle(rng.gen()),
        SpaceKind::Torus => SpacePoint::torus(rng.gen(), rng.gen()),
    }
}

pub fn selftest() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f);
    let mut out = Vec::new();

    let mut bad = 0;
    for t in 0..2000 {
        let kind = if t % 2 == 0 { SpaceKind::Circle } else { SpaceKind::Torus };
        let [a, b, c] = [0; 3].map(|_| random_point(&mut rng, kind));
        let ok = a.dist(&a) == 0.0
            && a.dist(&b) == b.dist(&a)
            && a.dist(&c) <= a.dist(&b) + b.dist(&c) + 1e-15
            && a.dist(&b) <= 0.5 * (kind.dim() as f64).sqrt();
        bad += !ok as usize;
    }
    out.push(check("metric axioms", bad, 2000));

    let mut bad = 0;
    for _ in 0..2000 {
        let p = random_point(&mut rng, SpaceKind::Torus);
        let back: Vec<f64> = p.coords().iter().map(|c| fmt_real(*c).parse().unwrap()).collect();
        bad += (SpacePoint::torus(back[0], back[1]) != p) as usize;
    }
    out.push(check("text round-trip", bad, 2000));

    let mut bad = 0;
    let maps = [DynamicalMap::golden_rotation(), DynamicalMap::cat_map()];
    for t in 0..400 {
        let map = &maps[t % 2];
        let p = random_point(&mut rng, map.space_kind());
        let (j, k) = (rng.gen_range(-500i64..500), rng.gen_range(-500i64..500));
        let lhs = map.iterate(&map.iterate(&p, j).unwrap(), k).unwrap();
        bad += (lhs != map.iterate(&p, j + k).unwrap()) as usize;
    }
    out.push(check("iterate additivity", bad, 400));

    let mut bad = 0;
    for _ in 0..100 {
        let n = rng.gen_range(1..60);
        let pts: Vec<SpacePoint> = (0..n).map(|_| random_point(&mut rng, SpaceKind::Circle)).collect();
        let delta = rng.gen_range(1e-3..0.2);
        let oracle: Vec<bool> = pts
            .iter()
            .map(|q| pts.iter().any(|p| p != q && p.dist(q) <= delta))
            .collect();
        bad += (accumulation_mask(&pts, delta) != oracle) as usize;
    }
    out.push(check("derived set oracle", bad, 100));

    let mut bad = 0;
    let mut trials = 0;
    for seed in 0..3u64 {
        for rank in 1..=2 {
            trials += 1;
            let mut src = AnchorSource::new(DynamicalMap::golden_rotation(), seed);
            let Ok(c) = construct_rank_sequence(SpacePoint::circle(0.3), 0.1, rank, 3, 1000, &mut src) else {
                bad += 1;
                continue;
            };
            let strat = cb_stratify(&c.points(), c.delta_schedule()).unwrap();
            let family = select_tails_countable(&c, &vec![RadiusSchedule::harmonic(1.0).unwrap(); c.len()]);
            let certified = family.map(|f| verify_certificate(&f).verified()).unwrap_or(false);
            bad += !(strat.level(1) == rank && strat.rank() == RankBound::Exact(rank) && certified) as usize;
        }
    }
    out.push(check("rank recovery and certificates", bad, trials));

    let mut bad = 0;
    let pts: Vec<SpacePoint> = [0.0, 0.5, 0.25].map(SpacePoint::circle).to_vec();
    let fam = select_tails_nowhere_dense(
        &crate::cb::StratifiedCenters::isolated(&pts).unwrap(),
        &vec![RadiusSchedule::harmonic(1.0).unwrap(); 3],
    )
    .unwrap();
    bad += (fam.tails() != [1, 2, 4]) as usize;
    let map = DynamicalMap::golden_rotation();
    for _ in 0..20 {
        let x = random_point(&mut rng, SpaceKind::Circle);
        let trace = winner_trace(&map, &x, &fam, &[1, 2, 3], 8, 5000).unwrap();
        for row in &trace.rows {
            let direct = winner_at_scale(&map, &x, &fam, &[1, 2, 3], row.n, 5000).unwrap();
            bad += (direct != *row) as usize;
        }
    }
    out.push(check("winner trace against direct scans", bad, 161));
    out
}
