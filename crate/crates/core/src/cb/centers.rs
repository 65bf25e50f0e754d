//! Finite center sequences with their Cantor–Bendixson levels and cluster envelopes.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::space::{Ball, SpaceKind, SpacePoint};

/// One center: 1-based index, position, level, parent cluster limit
/// (0 for roots) and envelope radius (0 when no envelope was constructed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterRecord {
    pub index: usize,
    pub point: SpacePoint,
    pub level: usize,
    pub parent: usize,
    pub envelope: f64,
}

/// Cantor–Bendixson rank of a truncation, exact or only bounded below.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankBound {
    Exact(usize),
    AtLeast(usize),
}

/// A constructed cluster: its limit point, enclosing ball and member indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub representative: usize,
    pub envelope: Ball,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StratifiedCenters {
    kind: SpaceKind,
    records: Vec<CenterRecord>,
    rank: RankBound,
    delta_schedule: Vec<f64>,
}

impl StratifiedCenters {
    /// Validates and wraps a record list. Rank defaults to the top level.
    pub fn new(kind: SpaceKind, records: Vec<CenterRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::config("a center sequence needs at least one point"));
        }
        for (pos, r) in records.iter().enumerate() {
            if r.index != pos + 1 {
                return Err(Error::config(format!(
                    "center indices must run 1, 2, ...; found {} at position {}",
                    r.index,
                    pos + 1
                )));
            }
            if r.point.kind() != kind {
                return Err(Error::config(format!("center {} is not on the {kind}", r.index)));
            }
            if !(r.envelope >= 0.0) || !r.envelope.is_finite() {
                return Err(Error::config(format!(
                    "center {} has invalid envelope radius {}",
                    r.index, r.envelope
                )));
            }
            if r.parent != 0 {
                if r.parent >= r.index {
                    return Err(Error::config(format!(
                        "center {} names parent {} which does not precede it",
                        r.index, r.parent
                    )));
                }
                let parent_level = records[r.parent - 1].level;
                if r.level >= parent_level {
                    return Err(Error::config(format!(
                        "center {} (level {}) cannot belong to the cluster of {} (level {})",
                        r.index, r.level, r.parent, parent_level
                    )));
                }
            }
        }
        let top = records.iter().map(|r| r.level).max().unwrap_or(0);
        Ok(StratifiedCenters {
            kind,
            records,
            rank: RankBound::Exact(top),
            delta_schedule: Vec::new(),
        })
    }

    /// Level-0 centers with no cluster structure.
    pub fn isolated(points: &[SpacePoint]) -> Result<Self> {
        let kind = points
            .first()
            .ok_or_else(|| Error::config("a center sequence needs at least one point"))?
            .kind();
        let records = points
            .iter()
            .enumerate()
            .map(|(i, p)| CenterRecord {
                index: i + 1,
                point: *p,
                level: 0,
                parent: 0,
                envelope: 0.0,
            })
            .collect();
        Self::new(kind, records)
    }

    pub(crate) fn set_rank(&mut self, rank: RankBound) {
        self.rank = rank;
    }

    pub(crate) fn set_delta_schedule(&mut self, schedule: Vec<f64>) {
        self.delta_schedule = schedule;
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[CenterRecord] {
        &self.records
    }

    /// Record of 1-based index `i`.
    pub fn record(&self, i: usize) -> Option<&CenterRecord> {
        i.checked_sub(1).and_then(|j| self.records.get(j))
    }

    pub fn points(&self) -> Vec<SpacePoint> {
        self.records.iter().map(|r| r.point).collect()
    }

    pub fn point(&self, i: usize) -> SpacePoint {
        self.records[i - 1].point
    }

    pub fn level(&self, i: usize) -> usize {
        self.records[i - 1].level
    }

    pub fn rank(&self) -> RankBound {
        self.rank
    }

    /// Delta schedule matched to this truncation (empty if none was recorded).
    pub fn delta_schedule(&self) -> &[f64] {
        &self.delta_schedule
    }

    /// Indices whose parent is `i`, ascending.
    pub fn children(&self, i: usize) -> Vec<usize> {
        self.records
            .iter()
            .filter(|r| r.parent == i)
            .map(|r| r.index)
            .collect()
    }

    /// Every center that heads a constructed cluster.
    pub fn clusters(&self) -> Vec<Cluster> {
        self.records
            .iter()
            .filter(|r| r.envelope > 0.0)
            .filter_map(|r| {
                let members = self.children(r.index);
                (!members.is_empty()).then_some(Cluster {
                    representative: r.index,
                    envelope: Ball {
                        center: r.point,
                        radius: r.envelope,
                    },
                    members,
                })
            })
            .collect()
    }

    /// Ball around a cluster limit that holds the untruncated remainder of
    /// its cluster: the members beyond the last annulus present, with their
    /// own sub-clusters.
    pub fn remainder_ball(&self, i: usize) -> Option<Ball> {
        let r = self.record(i)?;
        if r.level == 0 || r.envelope <= 0.0 {
            return None;
        }
        let b = self.children(i).len() as i32;
        Some(Ball {
            center: r.point,
            radius: r.envelope * 0.5f64.powi(b + 1),
        })
    }

    /// Versioned plain-text table; coordinates and radii carry 17 significant digits.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str("#stratified-centers v1\n");
        writeln!(out, "space,{}", self.kind).unwrap();
        match self.rank {
            RankBound::Exact(r) => writeln!(out, "rank,exact,{r}").unwrap(),
            RankBound::AtLeast(r) => writeln!(out, "rank,at-least,{r}").unwrap(),
        }
        out.push_str("schedule");
        for d in &self.delta_schedule {
            write!(out, ",{}", fmt_real(*d)).unwrap();
        }
        out.push('\n');
        out.push_str("index,level,x,y,parent,envelope\n");
        for r in &self.records {
            let y = r.point.y().map(fmt_real).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.index,
                r.level,
                fmt_real(r.point.x()),
                y,
                r.parent,
                fmt_real(r.envelope)
            )
            .unwrap();
        }
        out
    }

    pub fn from_table(text: &str) -> Result<Self> {
        Self::parse_lines(&mut text.lines().enumerate().peekable())
    }

    /// Parses a table from a line stream, stopping at the next `#` section header.
    pub(crate) fn parse_lines<'a, I>(lines: &mut std::iter::Peekable<I>) -> Result<Self>
    where
        I: Iterator<Item = (usize, &'a str)>,
    {
        let mut next = |what: &str| -> Result<(usize, &'a str)> {
            lines
                .next()
                .map(|(n, l)| (n + 1, l))
                .ok_or_else(|| Error::parse(0, format!("missing {what}")))
        };
        let (n, header) = next("table header")?;
        if header.trim() != "#stratified-centers v1" {
            return Err(Error::parse(n, "expected `#stratified-centers v1`"));
        }
        let (n, space) = next("space line")?;
        let kind = match space.trim().strip_prefix("space,") {
            Some(k) => SpaceKind::parse(k).map_err(|_| Error::parse(n, "unknown space kind"))?,
            None => return Err(Error::parse(n, "expected `space,<kind>`")),
        };
        let (n, rank_line) = next("rank line")?;
        let fields: Vec<&str> = rank_line.trim().split(',').collect();
        let rank = match fields.as_slice() {
            ["rank", "exact", r] => RankBound::Exact(parse_usize(r, n)?),
            ["rank", "at-least", r] => RankBound::AtLeast(parse_usize(r, n)?),
            _ => return Err(Error::parse(n, "expected `rank,exact|at-least,<r>`")),
        };
        let (n, sched_line) = next("schedule line")?;
        let mut fields = sched_line.trim().split(',');
        if fields.next() != Some("schedule") {
            return Err(Error::parse(n, "expected `schedule,...`"));
        }
        let schedule = fields.map(|f| parse_real(f, n)).collect::<Result<Vec<_>>>()?;
        let (n, cols) = next("column header")?;
        if cols.trim() != "index,level,x,y,parent,envelope" {
            return Err(Error::parse(n, "unexpected column header"));
        }
        let mut records = Vec::new();
        while let Some((_, line)) = lines.peek() {
            if line.starts_with('#') {
                break;
            }
            let (n, line) = lines.next().map(|(n, l)| (n + 1, l)).unwrap();
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.trim().split(',').collect();
            if f.len() != 6 {
                return Err(Error::parse(n, format!("expected 6 fields, found {}", f.len())));
            }
            let x = parse_real(f[2], n)?;
            let point = match kind {
                SpaceKind::Circle => SpacePoint::circle(x),
                SpaceKind::Torus => SpacePoint::torus(x, parse_real(f[3], n)?),
            };
            records.push(CenterRecord {
                index: parse_usize(f[0], n)?,
                level: parse_usize(f[1], n)?,
                point,
                parent: parse_usize(f[4], n)?,
                envelope: parse_real(f[5], n)?,
            });
        }
        let mut out = Self::new(kind, records)?;
        out.rank = rank;
        out.delta_schedule = schedule;
        Ok(out)
    }
}

/// Shortest-round-trip-safe scientific formatting with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn parse_real(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::parse(line, format!("`{s}` is not a number")))
}

pub(crate) fn parse_usize(s: &str, line: usize) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| Error::parse(line, format!("`{s}` is not a nonnegative integer")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> StratifiedCenters {
        let records = vec![
            CenterRecord { index: 1, point: SpacePoint::circle(0.5), level: 1, parent: 0, envelope: 0.1 },
            CenterRecord { index: 2, point: SpacePoint::circle(0.537), level: 0, parent: 1, envelope: 0.0099 },
            CenterRecord { index: 3, point: SpacePoint::circle(0.1 / 3.0), level: 0, parent: 1, envelope: 0.004 },
        ];
        StratifiedCenters::new(SpaceKind::Circle, records).unwrap()
    }

    #[test]
    fn table_round_trip_is_bit_exact() {
        let mut s = sample();
        s.set_delta_schedule(vec![0.1 / 7.0, 1e-9]);
        let back = StratifiedCenters::from_table(&s.to_table()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_table(), s.to_table());

        let t = StratifiedCenters::isolated(&[SpacePoint::torus(0.1, 0.7), SpacePoint::torus(1.0 / 3.0, 0.2)]).unwrap();
        assert_eq!(StratifiedCenters::from_table(&t.to_table()).unwrap(), t);
    }

    #[test]
    fn clusters_and_remainder() {
        let s = sample();
        let c = s.clusters();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].representative, 1);
        assert_eq!(c[0].members, vec![2, 3]);
        assert_eq!(s.remainder_ball(1).unwrap().radius, 0.1 / 8.0);
        assert!(s.remainder_ball(2).is_none());
    }

    #[test]
    fn rejects_bad_structure() {
        let bad = vec![CenterRecord { index: 2, point: SpacePoint::circle(0.1), level: 0, parent: 0, envelope: 0.0 }];
        assert!(StratifiedCenters::new(SpaceKind::Circle, bad).is_err());
        let bad = vec![
            CenterRecord { index: 1, point: SpacePoint::circle(0.1), level: 0, parent: 0, envelope: 0.0 },
            CenterRecord { index: 2, point: SpacePoint::circle(0.2), level: 0, parent: 1, envelope: 0.0 },
        ];
        assert!(StratifiedCenters::new(SpaceKind::Circle, bad).is_err());
        assert!(StratifiedCenters::isolated(&[]).is_err());
    }

    #[test]
    fn malformed_tables_report_lines() {
        let text = sample().to_table().replace("\n1,1,", "\n1,x,");
        match StratifiedCenters::from_table(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
