//! Batch execution of a scenario over sample points.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harness::scenario::{Sampler, ScenarioSpec};
use crate::space::{SpaceKind, SpacePoint};
use crate::target::{verify_certificate, Regime, SeparationCertificate, TargetFamily};
use crate::visit::{classify_point, winner_trace, ClassificationReport, Winner, WinnerTrace};

/// Samples closer than this to a center are redrawn (or nudged on a grid).
pub const CENTER_CLEARANCE: f64 = 1e-12;

/// Result of one sample, keyed by its index in the sampler's sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub sample_id: usize,
    pub point: SpacePoint,
    /// A numeric anomaly leaves the message here instead of aborting the batch.
    pub outcome: std::result::Result<(WinnerTrace, ClassificationReport), String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub scenario_hash: String,
    pub space: SpaceKind,
    pub regime: Regime,
    pub sampler: Sampler,
    pub seed: u64,
    pub tracked: Vec<usize>,
    pub scales: usize,
    pub horizon: u64,
    pub threshold: usize,
    pub certificate: SeparationCertificate,
    pub rows: Vec<SampleRow>,
    /// Not exported; everything else is reproducible bit for bit.
    pub wall_clock: Duration,
}

/// Winner counts at one scale; `wins` is aligned with the tracked list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaleHistogram {
    pub n: usize,
    pub wins: Vec<usize>,
    pub ties: usize,
    pub none: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregates {
    /// Rows with a classification; fractions are relative to this.
    pub classified: usize,
    pub anomalies: usize,
    pub misses_all: usize,
    pub eventual_winner: usize,
    pub indecisive: usize,
    pub completely_indecisive: usize,
    pub histogram: Vec<ScaleHistogram>,
}

impl Aggregates {
    pub fn fraction(&self, count: usize) -> f64 {
        if self.classified == 0 {
            0.0
        } else {
            count as f64 / self.classified as f64
        }
    }
}

impl RunResult {
    /// Aggregates recomputed from the per-sample rows.
    pub fn aggregates(&self) -> Aggregates {
        let mut histogram: Vec<ScaleHistogram> = (1..=self.scales)
            .map(|n| ScaleHistogram { n, wins: vec![0; self.tracked.len()], ties: 0, none: 0 })
            .collect();
        let mut agg = Aggregates {
            classified: 0,
            anomalies: 0,
            misses_all: 0,
            eventual_winner: 0,
            indecisive: 0,
            completely_indecisive: 0,
            histogram: Vec::new(),
        };
        for row in &self.rows {
            let Ok((trace, report)) = &row.outcome else {
                agg.anomalies += 1;
                continue;
            };
            agg.classified += 1;
            agg.misses_all += report.misses_all as usize;
            agg.eventual_winner += report.eventual_winner.is_some() as usize;
            agg.indecisive += report.indecisive as usize;
            agg.completely_indecisive += report.completely_indecisive as usize;
            for (h, r) in histogram.iter_mut().zip(&trace.rows) {
                match r.winner {
                    Winner::Index(i) => {
                        let slot = self.tracked.iter().position(|&t| t == i).expect("winners are tracked");
                        h.wins[slot] += 1;
                    }
                    Winner::Tie => h.ties += 1,
                    Winner::NoHit => h.none += 1,
                }
            }
        }
        agg.histogram = histogram;
        agg
    }
}

/// Sample points in sampler order, each at least [`CENTER_CLEARANCE`] from
/// every center.
pub fn draw_samples(kind: SpaceKind, sampler: Sampler, count: usize, seed: u64, centers: &[SpacePoint]) -> Vec<SpacePoint> {
    let clear = |p: &SpacePoint| centers.iter().all(|c| c.dist(p) >= CENTER_CLEARANCE);
    let make = |a: f64, b: f64| match kind {
        SpaceKind::Circle => SpacePoint::circle(a),
        SpaceKind::Torus => SpacePoint::torus(a, b),
    };
    match sampler {
        Sampler::SeededUniform => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| loop {
                    let p = make(rng.gen(), rng.gen());
                    if clear(&p) {
                        break p;
                    }
                })
                .collect()
        }
        Sampler::UniformGrid => {
            let side = match kind {
                SpaceKind::Circle => count.max(1),
                SpaceKind::Torus => (count as f64).sqrt().ceil() as usize,
            };
            let coord = |j: usize| (j as f64 + 0.5) / side as f64;
            (0..count)
                .map(|s| {
                    let (a, b) = match kind {
                        SpaceKind::Circle => (coord(s), 0.0),
                        SpaceKind::Torus => (coord(s % side), coord(s / side)),
                    };
                    let mut p = make(a, b);
                    while !clear(&p) {
                        p = p.translate(&make(1e-9, 1e-9)).expect("same space");
                    }
                    p
                })
                .collect()
        }
    }
}

/// Runs every sample of the scenario. `threads` fixes the worker count;
/// results are identical for any value.
pub fn run_scenario(spec: &ScenarioSpec, threads: Option<usize>) -> Result<(TargetFamily, RunResult)> {
    let start = Instant::now();
    spec.validate()?;
    let map = spec.dynamical_map()?;
    let family = spec.target_family()?;
    let certificate = verify_certificate(&family);
    if spec.run.regime != Regime::SomewhereDense {
        if let Some(v) = certificate.first_violation() {
            return Err(Error::config(format!(
                "separation certificate fails: {} constraint ({}, {}) has margin {:e}",
                v.kind, v.i, v.j, v.margin
            )));
        }
    }
    let tracked = match &spec.run.tracked {
        Some(t) => t.clone(),
        None => (1..=family.len()).collect(),
    };
    let run = &spec.run;
    let points = draw_samples(spec.space, run.sampler, run.samples, run.seed, &family.centers().points());

    let work = || -> Vec<SampleRow> {
        points
            .par_iter()
            .enumerate()
            .map(|(sample_id, &point)| {
                let outcome = winner_trace(&map, &point, &family, &tracked, run.scales, run.horizon)
                    .and_then(|t| classify_point(&t, run.threshold).map(|r| (t, r)))
                    .map_err(|e| e.to_string());
                SampleRow { sample_id, point, outcome }
            })
            .collect()
    };
    // An invalid tracked list fails every row identically; report it once.
    if let Some(&i) = tracked.iter().find(|&&i| i == 0 || i > family.len()) {
        return Err(Error::config(format!("tracked index {i} outside 1..={}", family.len())));
    }
    if tracked.is_empty() || (1..tracked.len()).any(|a| tracked[..a].contains(&tracked[a])) {
        return Err(Error::config("tracked indices must be distinct and non-empty"));
    }
    let rows = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let result = RunResult {
        scenario_hash: spec.hash()?,
        space: spec.space,
        regime: run.regime,
        sampler: run.sampler,
        seed: run.seed,
        tracked,
        scales: run.scales,
        horizon: run.horizon,
        threshold: run.threshold,
        certificate,
        rows,
        wall_clock: start.elapsed(),
    };
    Ok((family, result))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_avoid_centers() {
        let centers = [SpacePoint::circle(0.5)];
        // the grid of two points is {0.25, 0.75}; with one point it is {0.5}
        let pts = draw_samples(SpaceKind::Circle, Sampler::UniformGrid, 1, 0, &centers);
        assert!(pts[0].dist(&centers[0]) >= CENTER_CLEARANCE);
        assert!(pts[0].dist(&centers[0]) < 1e-8);
        let pts = draw_samples(SpaceKind::Torus, Sampler::UniformGrid, 5, 0, &[]);
        assert_eq!(pts.len(), 5);
        // side 3: sample 4 is the middle cell
        assert_eq!(pts[4].coords(), vec![0.5, 0.5]);
    }

    #[test]
    fn seeded_samples_are_reproducible() {
        let a = draw_samples(SpaceKind::Torus, Sampler::SeededUniform, 50, 9, &[]);
        let b = draw_samples(SpaceKind::Torus, Sampler::SeededUniform, 50, 9, &[]);
        assert_eq!(a, b);
        assert_ne!(a, draw_samples(SpaceKind::Torus, Sampler::SeededUniform, 50, 10, &[]));
    }
}
