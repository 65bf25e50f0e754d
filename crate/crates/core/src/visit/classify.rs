//! Scale-truncated decisiveness classes of a single sample point.

use crate::error::{Error, Result};
use crate::visit::hits::{Winner, WinnerTrace};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationReport {
    /// The finest scale has no hit at all: the orbit misses every ball from
    /// some scale on (hits are monotone in the scale).
    pub misses_all: bool,
    /// One index wins every one of the last `threshold` (or more) scales.
    pub eventual_winner: Option<usize>,
    /// `(tracked index, number of scales won)`, in tracked order.
    pub wins: Vec<(usize, usize)>,
    /// At least two indices win `threshold` or more scales.
    pub indecisive: bool,
    /// Every tracked index wins `threshold` or more scales.
    pub completely_indecisive: bool,
    pub scales: usize,
    pub horizon: u64,
    pub threshold: usize,
}

pub fn classify_point(trace: &WinnerTrace, threshold: usize) -> Result<ClassificationReport> {
    if threshold < 2 {
        return Err(Error::usage("win threshold m must be at least 2"));
    }
    let wins: Vec<(usize, usize)> = trace
        .tracked
        .iter()
        .map(|&i| (i, trace.rows.iter().filter(|r| r.winner == Winner::Index(i)).count()))
        .collect();
    let misses_all = trace
        .rows
        .last()
        .is_some_and(|r| r.hits.iter().all(|h| h.time().is_none()));
    let eventual_winner = trace.rows.last().and_then(|last| {
        let i = last.winner.index()?;
        let run = trace
            .rows
            .iter()
            .rev()
            .take_while(|r| r.winner == Winner::Index(i))
            .count();
        (run >= threshold).then_some(i)
    });
    let strong = wins.iter().filter(|(_, c)| *c >= threshold).count();
    Ok(ClassificationReport {
        misses_all,
        eventual_winner,
        indecisive: strong >= 2,
        completely_indecisive: strong == wins.len(),
        wins,
        scales: trace.rows.len(),
        horizon: trace.horizon,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::SpacePoint;
    use crate::visit::hits::{HitOutcome, ScaleRow};

    fn trace(winners: &[Winner]) -> WinnerTrace {
        let tracked = vec![1, 2, 3];
        let rows = winners
            .iter()
            .enumerate()
            .map(|(s, w)| {
                let hits = tracked
                    .iter()
                    .map(|&i| match w {
                        Winner::Index(j) if *j == i => HitOutcome::HitAt(1),
                        Winner::NoHit => HitOutcome::NoHitWithin(10),
                        _ => HitOutcome::HitAt(5),
                    })
                    .collect();
                ScaleRow { n: s + 1, hits, winner: *w }
            })
            .collect();
        WinnerTrace { sample: SpacePoint::circle(0.5), tracked, horizon: 10, rows }
    }

    #[test]
    fn constant_winner() {
        let r = classify_point(&trace(&[Winner::Index(3); 10]), 3).unwrap();
        assert_eq!(r.eventual_winner, Some(3));
        assert!(!r.indecisive);
        assert_eq!(r.wins, vec![(1, 0), (2, 0), (3, 10)]);
    }

    #[test]
    fn alternating_winners() {
        let w: Vec<Winner> = (0..20).map(|s| Winner::Index(1 + s % 2)).collect();
        let r = classify_point(&trace(&w), 3).unwrap();
        assert!(r.indecisive);
        assert!(!r.completely_indecisive);
        assert_eq!(r.eventual_winner, None);
    }

    #[test]
    fn all_three_win() {
        let w: Vec<Winner> = (0..12).map(|s| Winner::Index(1 + s % 3)).collect();
        assert!(classify_point(&trace(&w), 3).unwrap().completely_indecisive);
    }

    #[test]
    fn no_hits() {
        let r = classify_point(&trace(&[Winner::NoHit; 8]), 2).unwrap();
        assert!(r.misses_all);
        assert!(r.wins.iter().all(|(_, c)| *c == 0));
        assert_eq!(r.eventual_winner, None);
    }

    #[test]
    fn short_tail_is_not_eventual() {
        let mut w = vec![Winner::Index(1); 6];
        w.push(Winner::Index(2));
        w.push(Winner::Index(2));
        let r = classify_point(&trace(&w), 3).unwrap();
        assert_eq!(r.eventual_winner, None);
    }

    #[test]
    fn threshold_below_two_rejected() {
        assert!(classify_point(&trace(&[Winner::NoHit]), 1).is_err());
    }
}
