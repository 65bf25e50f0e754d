//! Supremum distance between truncated point sequences.

use crate::error::{Error, Result};
use crate::space::SpacePoint;

/// Two sequences truncated at a common length, plus a bound on how much the
/// untruncated tails can add to the supremum.
#[derive(Debug, Clone, PartialEq)]
pub struct SequencePair {
    pub left: Vec<SpacePoint>,
    pub right: Vec<SpacePoint>,
    pub tail_bound: f64,
}

impl SequencePair {
    pub fn new(left: Vec<SpacePoint>, right: Vec<SpacePoint>, tail_bound: f64) -> Result<Self> {
        if left.is_empty() || left.len() != right.len() {
            return Err(Error::usage(format!(
                "sequences need a common positive truncation length, got {} and {}",
                left.len(),
                right.len()
            )));
        }
        if !(tail_bound >= 0.0) {
            return Err(Error::usage("tail bound must be nonnegative"));
        }
        if left.iter().chain(&right).any(|p| p.kind() != left[0].kind()) {
            return Err(Error::usage("sequences must live on one space"));
        }
        Ok(SequencePair { left, right, tail_bound })
    }
}

/// The supremum distance is known to lie in `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupInterval {
    pub lower: f64,
    pub upper: f64,
}

pub fn sup_metric_distance(pair: &SequencePair) -> SupInterval {
    let lower = pair
        .left
        .iter()
        .zip(&pair.right)
        .map(|(p, q)| p.dist(q))
        .fold(0.0, f64::max);
    SupInterval {
        lower,
        upper: lower.max(pair.tail_bound),
    }
}

/// The sequence `p_n = a_n + b` for `n != i`, `p_i = b`, on the circle.
/// Each such sequence converges to its own member `b`, yet as `b -> 0` the
/// sequences approach `{a_n}`, which does not contain its limit 0.
pub fn shifted_sequence(a: &[SpacePoint], b: f64, i: usize) -> Result<Vec<SpacePoint>> {
    let shift = SpacePoint::circle(b);
    a.iter()
        .enumerate()
        .map(|(pos, an)| {
            if pos + 1 == i {
                Ok(shift)
            } else {
                an.translate(&shift)
            }
        })
        .collect()
}

/// `a_n = 1/n` on the circle for `n = 1..=len`.
pub fn harmonic_sequence(len: usize) -> Vec<SpacePoint> {
    (1..=len).map(|n| SpacePoint::circle(1.0 / n as f64)).collect()
}
