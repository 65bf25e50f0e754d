//! Shrinking-target laboratory.
//!
//! Circle rotations and toral automorphisms, finite Cantor–Bendixson
//! constructions of center sequences, radius-tail selection with exact
//! separation certificates, and first-visit winner statistics over shrinking
//! ball scales.

// `!(x > 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cb;
pub mod error;
pub mod harness;
mod grid;
pub mod space;
pub mod target;
pub mod visit;

pub use error::{Error, Result};
pub use space::{Ball, Direction, DynamicalMap, SpaceKind, SpacePoint};
