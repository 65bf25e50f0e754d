//! Scenario files: one TOML document fully determines a run.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cb::{construct_rank_sequence, AnchorSource, StratifiedCenters, DEFAULT_POPULATION_CAP};
use crate::error::{Error, Result};
use crate::space::{DynamicalMap, SpaceKind, SpacePoint, GOLDEN_ALPHA};
use crate::target::{
    select_tails_countable, select_tails_nowhere_dense, somewhere_dense_family, RadiusSchedule, Regime,
    TargetFamily,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub space: SpaceKind,
    pub map: MapSpec,
    pub centers: CenterSpec,
    pub schedule: ScheduleSpec,
    pub run: RunSpec,
    /// Directory that relative `explicit-file` paths resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapSpec {
    Rotation {
        #[serde(default = "golden")]
        alpha: f64,
    },
    Toral {
        matrix: [[i64; 2]; 2],
    },
}

fn golden() -> f64 {
    GOLDEN_ALPHA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CenterSpec {
    /// Coordinates per point (one for the circle, two for the torus).
    IsolatedFinite { points: Vec<Vec<f64>> },
    RankCluster {
        x: Vec<f64>,
        delta: f64,
        rank: usize,
        branching: usize,
        #[serde(default = "default_cap")]
        cap: usize,
        /// Seed of the anchor search; the run seed when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    CantorEmbedding { interval: [f64; 2], depth: u32 },
    DenseInterval { interval: [f64; 2], count: usize, seed: u64 },
    ExplicitFile { path: PathBuf },
}

fn default_cap() -> usize {
    DEFAULT_POPULATION_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScheduleFamily {
    Harmonic { c: f64 },
    Geometric { c: f64, q: f64 },
    Explicit { values: Vec<f64> },
}

impl ScheduleFamily {
    pub fn build(&self) -> Result<RadiusSchedule> {
        match self {
            ScheduleFamily::Harmonic { c } => RadiusSchedule::harmonic(*c),
            ScheduleFamily::Geometric { c, q } => RadiusSchedule::geometric(*c, *q),
            ScheduleFamily::Explicit { values } => RadiusSchedule::explicit(values.clone()),
        }
    }
}

/// A default family for every center plus per-index overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    #[serde(flatten)]
    pub default: ScheduleFamily,
    #[serde(default, rename = "override", skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<ScheduleOverride>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleOverride {
    pub index: usize,
    #[serde(flatten)]
    pub schedule: ScheduleFamily,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampler {
    UniformGrid,
    SeededUniform,
}

impl Sampler {
    pub fn name(self) -> &'static str {
        match self {
            Sampler::UniformGrid => "uniform-grid",
            Sampler::SeededUniform => "seeded-uniform",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub regime: Regime,
    pub scales: usize,
    pub horizon: u64,
    pub samples: usize,
    pub sampler: Sampler,
    pub threshold: usize,
    pub seed: u64,
    /// Centers whose first visits are raced; all centers when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tracked: Option<Vec<usize>>,
}

impl ScenarioSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ScenarioSpec = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut spec = Self::from_toml(&text)?;
        spec.base_dir = path.parent().map(Path::to_path_buf);
        Ok(spec)
    }

    /// Canonical serialization; fails only for integers TOML cannot hold.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(format!("scenario does not serialize: {e}")))
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }

    pub fn validate(&self) -> Result<()> {
        let run = &self.run;
        if run.scales < 1 {
            return Err(Error::config("scales must be at least 1"));
        }
        if run.horizon < 1 {
            return Err(Error::config("horizon must be at least 1"));
        }
        if run.threshold < 2 {
            return Err(Error::config("win threshold must be at least 2"));
        }
        let map_space = match self.map {
            MapSpec::Rotation { .. } => SpaceKind::Circle,
            MapSpec::Toral { .. } => SpaceKind::Torus,
        };
        if map_space != self.space {
            return Err(Error::config(format!("a {} map does not act on the {}", map_kind(&self.map), self.space)));
        }
        let compatible = match (&self.centers, run.regime) {
            (CenterSpec::DenseInterval { .. }, r) => r == Regime::SomewhereDense,
            (_, Regime::SomewhereDense) => false,
            (CenterSpec::CantorEmbedding { .. }, r) => r == Regime::NowhereDense,
            (CenterSpec::RankCluster { .. }, r) => r == Regime::Countable,
            _ => true,
        };
        if !compatible {
            return Err(Error::config(format!(
                "generator {} is incompatible with the {} regime",
                generator_name(&self.centers),
                run.regime
            )));
        }
        if matches!(self.centers, CenterSpec::CantorEmbedding { .. } | CenterSpec::DenseInterval { .. })
            && self.space != SpaceKind::Circle
        {
            return Err(Error::config("interval generators live on the circle"));
        }
        if let CenterSpec::CantorEmbedding { interval: [a, b], .. } | CenterSpec::DenseInterval { interval: [a, b], .. } =
            self.centers
        {
            if !(0.0 <= a && a < b && b <= 1.0) {
                return Err(Error::config(format!("interval [{a}, {b}] must satisfy 0 <= a < b <= 1")));
            }
        }
        self.to_toml()?;
        self.schedule.default.build()?;
        for o in &self.schedule.overrides {
            if o.index == 0 {
                return Err(Error::config("schedule overrides are 1-based"));
            }
            o.schedule.build()?;
        }
        Ok(())
    }

    pub fn dynamical_map(&self) -> Result<DynamicalMap> {
        match &self.map {
            MapSpec::Rotation { alpha } => Ok(DynamicalMap::rotation(*alpha)),
            MapSpec::Toral { matrix } => DynamicalMap::toral(*matrix),
        }
    }

    /// Per-center schedules, overrides applied.
    pub fn schedules(&self, count: usize) -> Result<Vec<RadiusSchedule>> {
        let mut out = vec![self.schedule.default.build()?; count];
        for o in &self.schedule.overrides {
            if o.index > count {
                return Err(Error::config(format!("schedule override for center {} of {count}", o.index)));
            }
            out[o.index - 1] = o.schedule.build()?;
        }
        Ok(out)
    }

    /// Tails selected by the regime's rule.
    pub fn target_family(&self) -> Result<TargetFamily> {
        let centers = generate_centers(self)?;
        let schedules = self.schedules(centers.len())?;
        match self.run.regime {
            Regime::Countable => select_tails_countable(&centers, &schedules),
            Regime::NowhereDense => select_tails_nowhere_dense(&centers, &schedules),
            Regime::SomewhereDense => somewhere_dense_family(&centers, &schedules),
        }
    }
}

fn map_kind(map: &MapSpec) -> &'static str {
    match map {
        MapSpec::Rotation { .. } => "rotation",
        MapSpec::Toral { .. } => "toral",
    }
}

fn generator_name(c: &CenterSpec) -> &'static str {
    match c {
        CenterSpec::IsolatedFinite { .. } => "isolated-finite",
        CenterSpec::RankCluster { .. } => "rank-cluster",
        CenterSpec::CantorEmbedding { .. } => "cantor-embedding",
        CenterSpec::DenseInterval { .. } => "dense-interval",
        CenterSpec::ExplicitFile { .. } => "explicit-file",
    }
}

fn point_from(kind: SpaceKind, coords: &[f64]) -> Result<SpacePoint> {
    if coords.len() != kind.dim() {
        return Err(Error::config(format!("{} points need {} coordinates, got {}", kind, kind.dim(), coords.len())));
    }
    Ok(match kind {
        SpaceKind::Circle => SpacePoint::circle(coords[0]),
        SpaceKind::Torus => SpacePoint::torus(coords[0], coords[1]),
    })
}

/// Gap midpoints of the middle-thirds construction on `[a, b]`, level by
/// level and left to right: `2^depth - 1` points.
pub fn cantor_midpoints(a: f64, b: f64, depth: u32) -> Vec<f64> {
    let mut out = Vec::new();
    let mut intervals = vec![(a, b)];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(2 * intervals.len());
        for (l, r) in intervals {
            out.push((l + r) / 2.0);
            let third = (r - l) / 3.0;
            next.push((l, l + third));
            next.push((r - third, r));
        }
        intervals = next;
    }
    out
}

pub fn generate_centers(spec: &ScenarioSpec) -> Result<StratifiedCenters> {
    let kind = spec.space;
    match &spec.centers {
        CenterSpec::IsolatedFinite { points } => {
            let pts = points.iter().map(|c| point_from(kind, c)).collect::<Result<Vec<_>>>()?;
            StratifiedCenters::isolated(&pts)
        }
        CenterSpec::RankCluster { x, delta, rank, branching, cap, seed } => {
            let x = point_from(kind, x)?;
            let mut source = AnchorSource::new(spec.dynamical_map()?, seed.unwrap_or(spec.run.seed));
            construct_rank_sequence(x, *delta, *rank, *branching, *cap, &mut source)
        }
        CenterSpec::CantorEmbedding { interval: [a, b], depth } => {
            if *depth == 0 || *depth > 24 {
                return Err(Error::config(format!("cantor depth must lie in 1..=24, got {depth}")));
            }
            let pts: Vec<SpacePoint> = cantor_midpoints(*a, *b, *depth).into_iter().map(SpacePoint::circle).collect();
            StratifiedCenters::isolated(&pts)
        }
        CenterSpec::DenseInterval { interval: [a, b], count, seed } => {
            if *count == 0 {
                return Err(Error::config("dense interval needs at least one center"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let pts: Vec<SpacePoint> = (0..*count).map(|_| SpacePoint::circle(rng.gen_range(*a..*b))).collect();
            StratifiedCenters::isolated(&pts)
        }
        CenterSpec::ExplicitFile { path } => {
            let full = match &spec.base_dir {
                Some(dir) if path.is_relative() => dir.join(path),
                _ => path.clone(),
            };
            let centers = StratifiedCenters::from_table(&std::fs::read_to_string(&full)?)?;
            if centers.kind() != kind {
                return Err(Error::config(format!("{} holds {} centers, scenario is on the {}", full.display(), centers.kind(), kind)));
            }
            Ok(centers)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const ROTATION: &str = r#"
space = "circle"

[map]
kind = "rotation"

[centers]
generator = "isolated-finite"
points = [[0.1], [0.5], [0.8]]

[schedule]
family = "harmonic"
c = 0.5

[[schedule.override]]
index = 2
family = "geometric"
c = 0.5
q = 0.5

[run]
regime = "nowhere-dense"
scales = 10
horizon = 1000
samples = 20
sampler = "seeded-uniform"
threshold = 3
seed = 7
"#;

    #[test]
    fn parses_and_round_trips() {
        let spec = ScenarioSpec::from_toml(ROTATION).unwrap();
        assert_eq!(spec.map, MapSpec::Rotation { alpha: GOLDEN_ALPHA });
        assert_eq!(spec.schedule.overrides.len(), 1);
        let again = ScenarioSpec::from_toml(&spec.to_toml().unwrap()).unwrap();
        assert_eq!(again, spec);
        assert_eq!(again.hash().unwrap(), spec.hash().unwrap());
        let s = spec.schedules(3).unwrap();
        assert_eq!(s[1], RadiusSchedule::geometric(0.5, 0.5).unwrap());
        assert_eq!(s[2], RadiusSchedule::harmonic(0.5).unwrap());
    }

    #[test]
    fn cantor_depth_two() {
        let m = cantor_midpoints(0.0, 1.0, 2);
        // middle-thirds oracle: gaps (1/3,2/3), (1/9,2/9), (7/9,8/9)
        let oracle = [0.5, 1.5 / 9.0, 7.5 / 9.0];
        assert_eq!(m.len(), 3);
        for (a, b) in m.iter().zip(oracle) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(cantor_midpoints(0.0, 1.0, 5).len(), 31);
    }

    #[test]
    fn dense_interval_is_reproducible() {
        let text = ROTATION
            .replace("generator = \"isolated-finite\"\npoints = [[0.1], [0.5], [0.8]]", "generator = \"dense-interval\"\ninterval = [0.0, 0.3]\ncount = 10\nseed = 3")
            .replace("nowhere-dense", "somewhere-dense");
        let spec = ScenarioSpec::from_toml(&text).unwrap();
        let a = generate_centers(&spec).unwrap();
        let b = generate_centers(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
        assert!(a.points().iter().all(|p| (0.0..0.3).contains(&p.x())));
    }

    #[test]
    fn isolated_passthrough() {
        let spec = ScenarioSpec::from_toml(ROTATION).unwrap();
        let c = generate_centers(&spec).unwrap();
        let expected: Vec<SpacePoint> = [0.1, 0.5, 0.8].map(SpacePoint::circle).to_vec();
        assert_eq!(c.points(), expected);
    }

    #[test]
    fn incompatible_generator_rejected() {
        let text = ROTATION.replace("nowhere-dense", "somewhere-dense");
        assert!(matches!(ScenarioSpec::from_toml(&text), Err(Error::Config(_))));
        let text = ROTATION.replace("threshold = 3", "threshold = 1");
        assert!(ScenarioSpec::from_toml(&text).is_err());
        let text = ROTATION.replace("space = \"circle\"", "space = \"torus\"");
        assert!(ScenarioSpec::from_toml(&text).is_err());
        let text = ROTATION.replace("seed = 7", "seed = 7\nbogus = 1");
        assert!(ScenarioSpec::from_toml(&text).is_err());
        let mut spec = ScenarioSpec::from_toml(ROTATION).unwrap();
        spec.run.seed = u64::MAX;
        assert!(matches!(spec.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn oversized_rank_is_config_error() {
        let text = ROTATION
            .replace(
                "generator = \"isolated-finite\"\npoints = [[0.1], [0.5], [0.8]]",
                "generator = \"rank-cluster\"\nx = [0.5]\ndelta = 0.1\nrank = 3\nbranching = 100\ncap = 1000",
            )
            .replace("nowhere-dense", "countable");
        let spec = ScenarioSpec::from_toml(&text).unwrap();
        assert!(matches!(generate_centers(&spec), Err(Error::PopulationCap { .. })));
    }
}
