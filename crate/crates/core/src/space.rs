//! Compact phase spaces, their homeomorphisms, and the metric plumbing around them.
//!
//! Coordinates live on the dyadic grid `k / 2^53`, `0 <= k < 2^53`. Every such
//! value is an exact `f64`, wraparound is a bit mask, and both the rotation and
//! the toral automorphisms act on the grid as exact group automorphisms of
//! `Z / 2^53`. Distances between grid points are therefore exact, inverse maps
//! undo forward maps bit for bit, and `k`-fold iterates agree with stepwise
//! iteration.

use std::fmt;

use crate::error::{Error, Result};

/// Number of fractional bits of a coordinate.
pub const GRID_BITS: u32 = 53;
const MASK: u64 = (1u64 << GRID_BITS) - 1;
/// `2^53` as a float.
pub const GRID_SCALE: f64 = (1u64 << GRID_BITS) as f64;

/// Golden-ratio rotation angle `1/phi`.
pub const GOLDEN_ALPHA: f64 = 0.618033988749895;

#[inline]
fn to_units(x: f64) -> u64 {
    assert!(x.is_finite(), "coordinate must be finite, got {x}");
    let w = x.rem_euclid(1.0);
    // rem_euclid may return 1.0 for tiny negative inputs; the mask folds it to 0.
    ((w * GRID_SCALE).round() as u64) & MASK
}

#[inline]
fn to_f64(u: u64) -> f64 {
    u as f64 / GRID_SCALE
}

/// Circle distance between two coordinates, in grid units (at most `2^52`).
#[inline]
pub(crate) fn circle_units(a: u64, b: u64) -> u64 {
    let diff = a.wrapping_sub(b) & MASK;
    diff.min((1u64 << GRID_BITS) - diff)
}

/// Smallest integer threshold `t` with `d < r  <=>  units(d) < t` on the grid.
#[inline]
pub(crate) fn radius_threshold(r: f64) -> u64 {
    if r <= 0.0 || r.is_nan() {
        return 0;
    }
    let scaled = (r * GRID_SCALE).ceil();
    if scaled >= u64::MAX as f64 {
        u64::MAX
    } else {
        scaled as u64
    }
}

#[inline]
pub(crate) fn units_to_distance(u: u64) -> f64 {
    u as f64 / GRID_SCALE
}

/// Which compact space a point or map belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Circle,
    Torus,
}

impl SpaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::Circle => "circle",
            SpaceKind::Torus => "torus",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "circle" => Ok(SpaceKind::Circle),
            "torus" => Ok(SpaceKind::Torus),
            other => Err(Error::usage(format!("unknown space kind `{other}`"))),
        }
    }

    pub fn dim(self) -> usize {
        match self {
            SpaceKind::Circle => 1,
            SpaceKind::Torus => 2,
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A point of the circle `R/Z` or of the torus `R^2/Z^2`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpacePoint {
    Circle(u64),
    Torus(u64, u64),
}

impl SpacePoint {
    /// Circle point at angle `x` (in turns), wrapped into `[0, 1)`.
    pub fn circle(x: f64) -> Self {
        SpacePoint::Circle(to_units(x))
    }

    /// Torus point `(x, y)`, each coordinate wrapped into `[0, 1)`.
    pub fn torus(x: f64, y: f64) -> Self {
        SpacePoint::Torus(to_units(x), to_units(y))
    }

    /// Builds a point of the given kind from coordinates; `y` is ignored on the circle.
    pub fn from_coords(kind: SpaceKind, x: f64, y: f64) -> Self {
        match kind {
            SpaceKind::Circle => SpacePoint::circle(x),
            SpaceKind::Torus => SpacePoint::torus(x, y),
        }
    }

    pub fn kind(&self) -> SpaceKind {
        match self {
            SpacePoint::Circle(_) => SpaceKind::Circle,
            SpacePoint::Torus(..) => SpaceKind::Torus,
        }
    }

    /// First coordinate (the angle on the circle).
    pub fn x(&self) -> f64 {
        match *self {
            SpacePoint::Circle(a) | SpacePoint::Torus(a, _) => to_f64(a),
        }
    }

    /// Second coordinate; `None` on the circle.
    pub fn y(&self) -> Option<f64> {
        match *self {
            SpacePoint::Circle(_) => None,
            SpacePoint::Torus(_, b) => Some(to_f64(b)),
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        match *self {
            SpacePoint::Circle(a) => vec![to_f64(a)],
            SpacePoint::Torus(a, b) => vec![to_f64(a), to_f64(b)],
        }
    }

    pub(crate) fn units(&self) -> (u64, u64) {
        match *self {
            SpacePoint::Circle(a) => (a, 0),
            SpacePoint::Torus(a, b) => (a, b),
        }
    }

    /// Adds `offset` coordinatewise (mod 1). The offset must be of the same kind.
    pub fn translate(&self, offset: &SpacePoint) -> Result<SpacePoint> {
        match (*self, *offset) {
            (SpacePoint::Circle(a), SpacePoint::Circle(b)) => {
                Ok(SpacePoint::Circle(a.wrapping_add(b) & MASK))
            }
            (SpacePoint::Torus(a, b), SpacePoint::Torus(c, d)) => Ok(SpacePoint::Torus(
                a.wrapping_add(c) & MASK,
                b.wrapping_add(d) & MASK,
            )),
            _ => Err(mismatch(self.kind(), offset.kind())),
        }
    }

    /// Distance in grid units; caller guarantees matching kinds.
    #[inline]
    pub(crate) fn dist_units(&self, other: &SpacePoint) -> u64 {
        match (*self, *other) {
            (SpacePoint::Circle(a), SpacePoint::Circle(b)) => circle_units(a, b),
            (SpacePoint::Torus(a, b), SpacePoint::Torus(c, d)) => {
                circle_units(a, c).max(circle_units(b, d))
            }
            _ => unreachable!("distance between points of different spaces"),
        }
    }

    /// Metric distance to `other`; errors when the spaces differ.
    pub fn distance(&self, other: &SpacePoint) -> Result<f64> {
        if self.kind() != other.kind() {
            return Err(mismatch(self.kind(), other.kind()));
        }
        Ok(units_to_distance(self.dist_units(other)))
    }

    /// Infallible distance for points already known to share a space.
    #[inline]
    pub fn dist(&self, other: &SpacePoint) -> f64 {
        units_to_distance(self.dist_units(other))
    }
}

impl fmt::Debug for SpacePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpacePoint::Circle(_) => write!(f, "Circle({})", self.x()),
            SpacePoint::Torus(..) => write!(f, "Torus({}, {})", self.x(), self.y().unwrap()),
        }
    }
}

fn mismatch(a: SpaceKind, b: SpaceKind) -> Error {
    Error::usage(format!("points belong to different spaces ({a} vs {b})"))
}

/// Metric on the chosen space: circle distance, or the max of the two
/// per-coordinate circle distances on the torus.
pub fn distance(kind: SpaceKind, a: &SpacePoint, b: &SpacePoint) -> Result<f64> {
    if a.kind() != kind {
        return Err(mismatch(kind, a.kind()));
    }
    a.distance(b)
}

/// Direction in which a map is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// An invertible map of the circle or torus.
#[derive(Debug, Clone, PartialEq)]
pub enum DynamicalMap {
    /// `x -> x + alpha (mod 1)`. The angle is snapped to the coordinate grid.
    Rotation { alpha: f64, step: u64 },
    /// `v -> A v (mod 1)` for an integer matrix with `|det A| = 1`.
    ToralAutomorphism {
        matrix: [[i64; 2]; 2],
        inverse: [[i64; 2]; 2],
    },
}

type UnitMatrix = [[u64; 2]; 2];

fn to_unit_matrix(m: &[[i64; 2]; 2]) -> UnitMatrix {
    [
        [m[0][0] as u64, m[0][1] as u64],
        [m[1][0] as u64, m[1][1] as u64],
    ]
}

fn mat_mul(a: &UnitMatrix, b: &UnitMatrix) -> UnitMatrix {
    let mut out = [[0u64; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0]
                .wrapping_mul(b[0][j])
                .wrapping_add(a[i][1].wrapping_mul(b[1][j]))
                & MASK;
        }
    }
    out
}

fn mat_pow(m: &UnitMatrix, mut e: u64) -> UnitMatrix {
    let mut result = [[1, 0], [0, 1]];
    let mut base = *m;
    while e > 0 {
        if e & 1 == 1 {
            result = mat_mul(&result, &base);
        }
        base = mat_mul(&base, &base);
        e >>= 1;
    }
    result
}

#[inline]
fn mat_apply(m: &UnitMatrix, x: u64, y: u64) -> (u64, u64) {
    (
        m[0][0].wrapping_mul(x).wrapping_add(m[0][1].wrapping_mul(y)) & MASK,
        m[1][0].wrapping_mul(x).wrapping_add(m[1][1].wrapping_mul(y)) & MASK,
    )
}

impl DynamicalMap {
    /// Rotation by `alpha` turns.
    pub fn rotation(alpha: f64) -> Self {
        let step = to_units(alpha);
        DynamicalMap::Rotation {
            alpha: to_f64(step),
            step,
        }
    }

    /// Golden-ratio rotation, the default circle map.
    pub fn golden_rotation() -> Self {
        Self::rotation(GOLDEN_ALPHA)
    }

    /// Toral automorphism for an integer matrix; rejects `|det| != 1`.
    pub fn toral(matrix: [[i64; 2]; 2]) -> Result<Self> {
        let [[a, b], [c, d]] = matrix;
        let det = a
            .checked_mul(d)
            .zip(b.checked_mul(c))
            .and_then(|(ad, bc)| ad.checked_sub(bc))
            .ok_or_else(|| Error::usage("toral matrix entries overflow"))?;
        if det.abs() != 1 {
            return Err(Error::usage(format!(
                "toral matrix must have determinant +-1, got {det}"
            )));
        }
        // A^{-1} = det * [[d, -b], [-c, a]]
        let inverse = [[det * d, -det * b], [-det * c, det * a]];
        Ok(DynamicalMap::ToralAutomorphism { matrix, inverse })
    }

    /// Arnold's cat map `[[2, 1], [1, 1]]`.
    pub fn cat_map() -> Self {
        Self::toral([[2, 1], [1, 1]]).expect("cat map is unimodular")
    }

    pub fn space_kind(&self) -> SpaceKind {
        match self {
            DynamicalMap::Rotation { .. } => SpaceKind::Circle,
            DynamicalMap::ToralAutomorphism { .. } => SpaceKind::Torus,
        }
    }

    fn check(&self, p: &SpacePoint) -> Result<()> {
        if p.kind() != self.space_kind() {
            return Err(Error::usage(format!(
                "map acts on the {} but the point lies on the {}",
                self.space_kind(),
                p.kind()
            )));
        }
        Ok(())
    }

    /// One application of the map or of its inverse.
    pub fn apply(&self, p: &SpacePoint, direction: Direction) -> Result<SpacePoint> {
        self.check(p)?;
        Ok(match direction {
            Direction::Forward => self.step(p),
            Direction::Inverse => self.step_back(p),
        })
    }

    /// Forward step without kind checking.
    #[inline]
    pub(crate) fn step(&self, p: &SpacePoint) -> SpacePoint {
        match (self, *p) {
            (DynamicalMap::Rotation { step, .. }, SpacePoint::Circle(a)) => {
                SpacePoint::Circle(a.wrapping_add(*step) & MASK)
            }
            (DynamicalMap::ToralAutomorphism { matrix, .. }, SpacePoint::Torus(x, y)) => {
                let (u, v) = mat_apply(&to_unit_matrix(matrix), x, y);
                SpacePoint::Torus(u, v)
            }
            _ => unreachable!("map and point kinds checked by caller"),
        }
    }

    #[inline]
    pub(crate) fn step_back(&self, p: &SpacePoint) -> SpacePoint {
        match (self, *p) {
            (DynamicalMap::Rotation { step, .. }, SpacePoint::Circle(a)) => {
                SpacePoint::Circle(a.wrapping_sub(*step) & MASK)
            }
            (DynamicalMap::ToralAutomorphism { inverse, .. }, SpacePoint::Torus(x, y)) => {
                let (u, v) = mat_apply(&to_unit_matrix(inverse), x, y);
                SpacePoint::Torus(u, v)
            }
            _ => unreachable!("map and point kinds checked by caller"),
        }
    }

    /// `f^k(p)`; negative `k` iterates the inverse.
    ///
    /// Rotations use `k * step` modulo the grid, which coincides exactly with
    /// `k` repeated additions. Toral maps raise the matrix to the `|k|`-th
    /// power by squaring, again exact modulo the grid.
    pub fn iterate(&self, p: &SpacePoint, k: i64) -> Result<SpacePoint> {
        self.check(p)?;
        Ok(self.iterate_unchecked(p, k))
    }

    pub(crate) fn iterate_unchecked(&self, p: &SpacePoint, k: i64) -> SpacePoint {
        match (self, *p) {
            (DynamicalMap::Rotation { step, .. }, SpacePoint::Circle(a)) => {
                SpacePoint::Circle(a.wrapping_add((k as u64).wrapping_mul(*step)) & MASK)
            }
            (DynamicalMap::ToralAutomorphism { matrix, inverse }, SpacePoint::Torus(x, y)) => {
                let m = if k >= 0 { matrix } else { inverse };
                let power = mat_pow(&to_unit_matrix(m), k.unsigned_abs());
                let (u, v) = mat_apply(&power, x, y);
                SpacePoint::Torus(u, v)
            }
            _ => unreachable!("map and point kinds checked by caller"),
        }
    }
}

/// An open ball `{q : d(center, q) < radius}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: SpacePoint,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: SpacePoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::usage(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Ball { center, radius })
    }

    /// Strict open-ball membership.
    #[inline]
    pub fn contains(&self, q: &SpacePoint) -> bool {
        self.center.dist_units(q) < radius_threshold(self.radius)
    }

    /// Membership in the closed ball.
    pub fn closure_contains(&self, q: &SpacePoint) -> bool {
        self.center.dist(q) <= self.radius
    }
}

/// Number of grid cells per axis used by an epsilon net.
pub(crate) fn net_resolution(eps: f64) -> usize {
    // the small slack absorbs representation error in 1/eps
    ((1.0 / eps) - 1e-9).ceil().max(1.0) as usize
}

/// Regular grid with spacing at most `eps`, row-major on the torus.
pub fn epsilon_net(kind: SpaceKind, eps: f64) -> Result<Vec<SpacePoint>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::usage(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    let n = net_resolution(eps);
    let coord = |j: usize| j as f64 / n as f64;
    Ok(match kind {
        SpaceKind::Circle => (0..n).map(|j| SpacePoint::circle(coord(j))).collect(),
        SpaceKind::Torus => (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| SpacePoint::torus(coord(i), coord(j)))
            .collect(),
    })
}

/// Index of the net cell `[j/n, (j+1)/n)` (per axis) containing `p`.
#[inline]
pub(crate) fn cell_index(p: &SpacePoint, n: usize) -> usize {
    let axis = |u: u64| ((u as u128 * n as u128) >> GRID_BITS) as usize;
    match *p {
        SpacePoint::Circle(a) => axis(a),
        SpacePoint::Torus(a, b) => axis(a) * n + axis(b),
    }
}

/// `max_{a in A} min_{b in B} d(a, b)`.
pub fn directed_hausdorff(a: &[SpacePoint], b: &[SpacePoint]) -> Result<f64> {
    check_sets(a, b)?;
    let worst = a
        .iter()
        .map(|p| b.iter().map(|q| p.dist_units(q)).min().unwrap_or(0))
        .max()
        .unwrap_or(0);
    Ok(units_to_distance(worst))
}

/// Hausdorff distance between two finite point sets.
pub fn hausdorff_distance(a: &[SpacePoint], b: &[SpacePoint]) -> Result<f64> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

fn check_sets(a: &[SpacePoint], b: &[SpacePoint]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::usage("Hausdorff distance needs two nonempty sets"));
    }
    let kind = a[0].kind();
    if let Some(p) = a.iter().chain(b).find(|p| p.kind() != kind) {
        return Err(mismatch(kind, p.kind()));
    }
    Ok(())
}

/// Fraction of epsilon-net cells visited by the backward segment
/// `{f^{-k}(p) : 1 <= k <= budget}`. A budget of zero visits nothing.
pub fn backward_density_score(
    map: &DynamicalMap,
    p: &SpacePoint,
    budget: usize,
    eps: f64,
) -> Result<f64> {
    map.check(p)?;
    let n = net_resolution(eps);
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::usage(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    let cells = n.pow(map.space_kind().dim() as u32);
    let mut seen = vec![false; cells];
    let mut visited = 0usize;
    let mut y = *p;
    for _ in 0..budget {
        y = map.step_back(&y);
        let c = cell_index(&y, n);
        if !seen[c] {
            seen[c] = true;
            visited += 1;
            if visited == cells {
                break;
            }
        }
    }
    Ok(visited as f64 / cells as f64)
}
