use proptest::prelude::*;

use stlab::cb::{
    accumulation_mask, construct_rank_sequence, derived_set_approx, fmt_real, AnchorSource, StratifiedCenters,
};
use stlab::space::{Ball, DynamicalMap, SpacePoint};
use stlab::target::{
    select_tails_countable, select_tails_nowhere_dense, verify_certificate, RadiusSchedule, SEPARATION_GUARD,
};
use stlab::visit::{cn_membership, hit_time, winner_at_scale, winner_trace, HitOutcome, Winner};

fn circle() -> impl Strategy<Value = SpacePoint> {
    (0.0..1.0f64).prop_map(SpacePoint::circle)
}

fn torus() -> impl Strategy<Value = SpacePoint> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(|(x, y)| SpacePoint::torus(x, y))
}

fn cat() -> DynamicalMap {
    DynamicalMap::cat_map()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn circle_metric_axioms(a in circle(), b in circle(), c in circle()) {
        prop_assert_eq!(a.dist(&a), 0.0);
        prop_assert_eq!(a.dist(&b), b.dist(&a));
        prop_assert!(a.dist(&c) <= a.dist(&b) + b.dist(&c));
        prop_assert!(a.dist(&b) <= 0.5);
        prop_assert_eq!(a.dist(&b) == 0.0, a == b);
    }

    #[test]
    fn torus_metric_axioms(a in torus(), b in torus(), c in torus()) {
        prop_assert_eq!(a.dist(&b), b.dist(&a));
        prop_assert!(a.dist(&c) <= a.dist(&b) + b.dist(&c));
        prop_assert!(a.dist(&b) <= 0.5);
    }

    #[test]
    fn text_round_trip_is_exact(p in torus()) {
        let c = p.coords();
        let back = SpacePoint::torus(fmt_real(c[0]).parse().unwrap(), fmt_real(c[1]).parse().unwrap());
        prop_assert_eq!(back, p);
    }

    #[test]
    fn iterates_compose(p in torus(), q in circle(), alpha in 0.0..1.0f64, j in -2000i64..2000, k in -2000i64..2000) {
        let f = cat();
        prop_assert_eq!(f.iterate(&f.iterate(&p, j).unwrap(), k).unwrap(), f.iterate(&p, j + k).unwrap());
        let r = DynamicalMap::rotation(alpha);
        prop_assert_eq!(r.iterate(&r.iterate(&q, j).unwrap(), k).unwrap(), r.iterate(&q, j + k).unwrap());
        let mut stepped = q;
        for _ in 0..k.unsigned_abs().min(50) {
            stepped = r.apply(&stepped, stlab::Direction::Forward).unwrap();
        }
        prop_assert_eq!(stepped, r.iterate(&q, k.unsigned_abs().min(50) as i64).unwrap());
    }

    #[test]
    fn derived_set_matches_definition(
        pts in prop::collection::vec(0.0..0.2f64, 0..80),
        d1 in 1e-4..0.05f64,
        d2 in 1e-4..0.05f64,
    ) {
        let pts: Vec<SpacePoint> = pts.into_iter().map(SpacePoint::circle).collect();
        let (lo, hi) = (d1.min(d2), d1.max(d2));
        let oracle: Vec<bool> = pts.iter().map(|q| pts.iter().any(|p| p != q && p.dist(q) <= lo)).collect();
        prop_assert_eq!(accumulation_mask(&pts, lo), oracle);
        let small = derived_set_approx(&pts, lo);
        let large = derived_set_approx(&pts, hi);
        prop_assert!(small.iter().all(|p| pts.contains(p)));
        prop_assert!(small.iter().all(|p| large.contains(p)));
    }

    #[test]
    fn hits_are_monotone_and_horizon_stable(x in circle(), c in circle(), r in 1e-4..0.2f64, shrink in 0.05..1.0f64, k1 in 1u64..3000) {
        let f = DynamicalMap::golden_rotation();
        let big = hit_time(&f, &x, &Ball::new(c, r).unwrap(), 5000).unwrap();
        let small = hit_time(&f, &x, &Ball::new(c, r * shrink).unwrap(), 5000).unwrap();
        prop_assert!(big.rank() <= small.rank());
        let short = hit_time(&f, &x, &Ball::new(c, r).unwrap(), k1).unwrap();
        match short {
            HitOutcome::HitAt(k) => prop_assert_eq!(big, HitOutcome::HitAt(k)),
            HitOutcome::NoHitWithin(_) => prop_assert!(big.rank() > k1),
        }
    }
}

fn nowhere_dense(xs: &[f64]) -> Option<stlab::target::TargetFamily> {
    let pts: Vec<SpacePoint> = xs.iter().map(|&x| SpacePoint::circle(x)).collect();
    let centers = StratifiedCenters::isolated(&pts).ok()?;
    select_tails_nowhere_dense(&centers, &vec![RadiusSchedule::harmonic(1.0).unwrap(); xs.len()]).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tails_are_minimal(xs in prop::collection::vec(0.0..1.0f64, 1..12)) {
        let Some(fam) = nowhere_dense(&xs) else { return Ok(()) };
        prop_assert!(verify_certificate(&fam).verified());
        let pts = fam.centers().points();
        for i in 1..=fam.len() {
            let n = fam.tails()[i - 1];
            if n == 0 {
                continue;
            }
            // one step shorter must break a constraint
            let a = fam.schedules()[i - 1].value(n).unwrap();
            let bound = pts[..i - 1].iter().map(|q| q.dist(&pts[i - 1])).fold(1.0 / i as f64, f64::min);
            prop_assert!(bound - a <= SEPARATION_GUARD);
        }
    }

    #[test]
    fn winner_trace_agrees_with_direct_scans(xs in prop::collection::vec(0.0..1.0f64, 2..6), x in circle()) {
        let Some(fam) = nowhere_dense(&xs) else { return Ok(()) };
        let f = DynamicalMap::golden_rotation();
        let tracked: Vec<usize> = (1..=fam.len()).collect();
        let trace = winner_trace(&f, &x, &fam, &tracked, 6, 3000).unwrap();
        for row in &trace.rows {
            prop_assert_eq!(row, &winner_at_scale(&f, &x, &fam, &tracked, row.n, 3000).unwrap());
        }
    }

    #[test]
    fn winners_survive_translation(xs in prop::collection::vec(0.0..1.0f64, 2..6), x in circle(), t in circle()) {
        // rotations commute with translations, so shifting everything by t changes nothing
        let Some(fam) = nowhere_dense(&xs) else { return Ok(()) };
        let shifted: Vec<f64> = fam.centers().points().iter().map(|p| p.translate(&t).unwrap().x()).collect();
        let Some(moved) = nowhere_dense(&shifted) else { return Ok(()) };
        prop_assume!(moved.tails() == fam.tails());
        let f = DynamicalMap::golden_rotation();
        let tracked: Vec<usize> = (1..=fam.len()).collect();
        let a = winner_trace(&f, &x, &fam, &tracked, 6, 3000).unwrap();
        let b = winner_trace(&f, &x.translate(&t).unwrap(), &moved, &tracked, 6, 3000).unwrap();
        prop_assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn membership_is_a_shifted_first_visit(xs in prop::collection::vec(0.0..1.0f64, 2..5), x in circle(), n in 1usize..6) {
        let Some(fam) = nowhere_dense(&xs) else { return Ok(()) };
        let f = DynamicalMap::golden_rotation();
        let tracked: Vec<usize> = (1..=fam.len()).collect();
        let k = 2000;
        let fx = f.apply(&x, stlab::Direction::Forward).unwrap();
        let row = winner_at_scale(&f, &fx, &fam, &tracked, n, k - 1).unwrap();
        for i in 1..=fam.len() {
            prop_assert_eq!(cn_membership(&f, &x, &fam, i, n, k).unwrap(), row.winner == Winner::Index(i));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rank_constructions_are_laminar_and_contained(seed in 0u64..1000, rank in 1usize..=2, x in 0.0..1.0f64) {
        let mut src = AnchorSource::new(DynamicalMap::golden_rotation(), seed);
        let c = construct_rank_sequence(SpacePoint::circle(x), 0.1, rank, 3, 1000, &mut src).unwrap();
        let clusters = c.clusters();
        for a in &clusters {
            for &m in &a.members {
                prop_assert!(a.envelope.contains(&c.point(m)));
            }
            for b in &clusters {
                let d = a.envelope.center.dist(&b.envelope.center);
                let (ra, rb) = (a.envelope.radius, b.envelope.radius);
                let nested = d + ra.min(rb) <= ra.max(rb);
                let disjoint = d >= ra + rb;
                prop_assert!(nested || disjoint);
            }
        }
        let fam = select_tails_countable(&c, &vec![RadiusSchedule::harmonic(1.0).unwrap(); c.len()]).unwrap();
        prop_assert!(verify_certificate(&fam).verified());
        for i in 1..=fam.len() {
            let rho_i = fam.radius_at(i, 1).unwrap();
            for j in (1..=fam.len()).filter(|&j| j != i) {
                let d = c.point(i).dist(&c.point(j));
                if d < rho_i {
                    for n in [1, 5] {
                        prop_assert!(d + fam.radius_at(j, n).unwrap() < 2.0 * rho_i);
                    }
                }
            }
        }
    }
}
