//! Uniform bucket grid over the circle or torus for near-neighbour queries.
//!
//! With `m` cells per axis, two points at distance at most `1/m` sit in the
//! same or adjacent cells (mod `m`). Callers pick `m` so their query radius
//! is at most one cell width.

use std::collections::HashMap;

use crate::space::{SpaceKind, SpacePoint, GRID_BITS};

pub(crate) struct BucketGrid {
    kind: SpaceKind,
    m: u64,
    cells: HashMap<(u64, u64), Vec<u32>>,
}

/// Largest per-axis cell count whose width is at least `radius`, capped.
pub(crate) fn cells_for_radius(radius: f64, cap: u64) -> u64 {
    if !(radius > 0.0) {
        return cap;
    }
    // shave a hair off so rounding in 1/radius never yields a too-narrow cell
    let m = ((1.0 / radius) * (1.0 - 1e-12)).floor();
    let m = if m >= cap as f64 { cap } else { m as u64 };
    m.max(1)
}

impl BucketGrid {
    pub(crate) fn new(kind: SpaceKind, m: u64) -> Self {
        // fewer than three cells would make neighbouring cells coincide
        let m = if m < 3 { 1 } else { m };
        BucketGrid {
            kind,
            m,
            cells: HashMap::new(),
        }
    }

    pub(crate) fn cell_width(&self) -> f64 {
        1.0 / self.m as f64
    }

    #[inline]
    fn axis(&self, u: u64) -> u64 {
        ((u as u128 * self.m as u128) >> GRID_BITS) as u64
    }

    #[inline]
    fn key(&self, p: &SpacePoint) -> (u64, u64) {
        let (a, b) = p.units();
        match self.kind {
            SpaceKind::Circle => (self.axis(a), 0),
            SpaceKind::Torus => (self.axis(a), self.axis(b)),
        }
    }

    pub(crate) fn insert(&mut self, p: &SpacePoint, id: u32) {
        let k = self.key(p);
        self.cells.entry(k).or_default().push(id);
    }

    /// Visits every id stored in the cells adjacent to (or containing) `p`.
    pub(crate) fn for_each_near(&self, p: &SpacePoint, mut visit: impl FnMut(u32)) {
        let (cx, cy) = self.key(p);
        let m = self.m;
        let offsets: &[u64] = if m == 1 { &[0] } else { &[m - 1, 0, 1] };
        let y_offsets: &[u64] = match self.kind {
            SpaceKind::Circle => &[0],
            SpaceKind::Torus => offsets,
        };
        for &dx in offsets {
            for &dy in y_offsets {
                let y = if self.kind == SpaceKind::Circle { 0 } else { (cy + dy) % m };
                if let Some(ids) = self.cells.get(&((cx + dx) % m, y)) {
                    ids.iter().for_each(|&id| visit(id));
                }
            }
        }
    }
}
