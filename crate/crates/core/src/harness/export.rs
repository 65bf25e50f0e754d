//! CSV exports of a run, their parser, and the human-readable summary.
//!
//! Every file is LF-terminated, comma-separated with a header row, and
//! prints reals with 17 significant digits, so exports are bit-exact and
//! parse back to the same result.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use crate::cb::fmt_real;
use crate::error::{Error, Result};
use crate::harness::run::{RunResult, SampleRow};
use crate::harness::scenario::Sampler;
use crate::space::{SpaceKind, SpacePoint};
use crate::target::{Constraint, ConstraintKind, Regime, SeparationCertificate};
use crate::visit::export::{classification_header, write_classification_row, write_trace_rows, TRACE_HEADER};
use crate::visit::{classify_point, ClassificationReport, HitOutcome, ScaleRow, Winner, WinnerTrace};

/// Labels the sampling distribution wherever results are reported.
pub const SAMPLING_NOTE: &str =
    "uniform sampling is a pragmatic stand-in for typical points, not a statement about residual sets";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunExports {
    pub run: String,
    pub samples: String,
    pub trace: String,
    pub classification: String,
    pub certificate: String,
    pub histogram: String,
    pub summary: String,
}

impl RunExports {
    pub const FILES: [&'static str; 7] = [
        "run.csv",
        "samples.csv",
        "trace.csv",
        "classification.csv",
        "certificate.csv",
        "histogram.csv",
        "summary.txt",
    ];

    fn parts(&self) -> [&String; 7] {
        [
            &self.run,
            &self.samples,
            &self.trace,
            &self.classification,
            &self.certificate,
            &self.histogram,
            &self.summary,
        ]
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, body) in Self::FILES.iter().zip(self.parts()) {
            std::fs::write(dir.join(name), body)?;
        }
        Ok(())
    }

    pub fn read_from(dir: &Path) -> Result<Self> {
        let read = |name: &str| std::fs::read_to_string(dir.join(name));
        Ok(RunExports {
            run: read("run.csv")?,
            samples: read("samples.csv")?,
            trace: read("trace.csv")?,
            classification: read("classification.csv")?,
            certificate: read("certificate.csv")?,
            histogram: read("histogram.csv")?,
            summary: read("summary.txt")?,
        })
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

pub fn export(result: &RunResult) -> RunExports {
    let mut run = String::from("key,value\n");
    let tracked = join(&result.tracked);
    for (k, v) in [
        ("scenario_hash", result.scenario_hash.clone()),
        ("space", result.space.to_string()),
        ("regime", result.regime.to_string()),
        ("sampler", result.sampler.name().to_string()),
        ("seed", result.seed.to_string()),
        ("samples", result.rows.len().to_string()),
        ("tracked", tracked),
        ("scales", result.scales.to_string()),
        ("horizon", result.horizon.to_string()),
        ("threshold", result.threshold.to_string()),
    ] {
        writeln!(run, "{k},{v}").unwrap();
    }

    let mut samples = String::from("sample_id,x,y,status\n");
    let mut trace = format!("{TRACE_HEADER}\n");
    let mut classification = classification_header(&result.tracked) + "\n";
    for row in &result.rows {
        let y = row.point.y().map(fmt_real).unwrap_or_default();
        let status = match &row.outcome {
            Ok(_) => "ok".to_string(),
            Err(msg) => format!("anomaly: {}", msg.replace([',', '\n'], ";")),
        };
        writeln!(samples, "{},{},{y},{status}", row.sample_id, fmt_real(row.point.x())).unwrap();
        if let Ok((t, report)) = &row.outcome {
            write_trace_rows(&mut trace, row.sample_id, t);
            write_classification_row(&mut classification, row.sample_id, report);
        }
    }
    let (summary, histogram) = summarize(result);
    RunExports {
        run,
        samples,
        trace,
        classification,
        certificate: result.certificate.to_csv(),
        histogram,
        summary,
    }
}

/// Summary text and the per-scale winner histogram CSV.
pub fn summarize(result: &RunResult) -> (String, String) {
    let agg = result.aggregates();
    let mut hist = String::from("n");
    for i in &result.tracked {
        write!(hist, ",wins_{i}").unwrap();
    }
    hist.push_str(",tie,none\n");
    for h in &agg.histogram {
        write!(hist, "{}", h.n).unwrap();
        for c in &h.wins {
            write!(hist, ",{c}").unwrap();
        }
        writeln!(hist, ",{},{}", h.ties, h.none).unwrap();
    }

    let mut s = String::new();
    let frac = |c: usize| format!("{:.6} ({c}/{})", agg.fraction(c), agg.classified);
    writeln!(s, "scenario {}", result.scenario_hash).unwrap();
    writeln!(s, "space {}, regime {}", result.space, result.regime).unwrap();
    writeln!(s, "samples {} from {} with seed {}", result.rows.len(), result.sampler.name(), result.seed).unwrap();
    writeln!(s, "note: {SAMPLING_NOTE}").unwrap();
    writeln!(
        s,
        "scales 1..={}, horizon {}, win threshold {}, tracked [{}]",
        result.scales,
        result.horizon,
        result.threshold,
        join(&result.tracked)
    )
    .unwrap();
    writeln!(s, "anomalies {}", agg.anomalies).unwrap();
    writeln!(s, "misses all balls: {}", frac(agg.misses_all)).unwrap();
    writeln!(s, "eventual winner: {}", frac(agg.eventual_winner)).unwrap();
    writeln!(s, "indecisive: {}", frac(agg.indecisive)).unwrap();
    writeln!(s, "completely indecisive: {}", frac(agg.completely_indecisive)).unwrap();
    let cert = &result.certificate;
    let min = cert.min_margin().map_or_else(|| "none".to_string(), fmt_real);
    writeln!(
        s,
        "certificate: {} constraints, {} violated, min margin {min}",
        cert.constraints.len(),
        cert.violations()
    )
    .unwrap();
    if let Some(v) = cert.first_violation() {
        writeln!(s, "first violation: {} ({}, {}) margin {}", v.kind, v.i, v.j, fmt_real(v.margin)).unwrap();
    }
    (s, hist)
}

/// CSV body rows with their 1-based line numbers, after checking the header.
fn body<'a>(text: &'a str, header: &str, file: &str) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == header => {}
        other => {
            return Err(Error::parse(1, format!("{file}: expected header `{header}`, found `{}`", other.unwrap_or(""))))
        }
    }
    Ok(lines.enumerate().map(|(k, l)| (k + 2, l.split(',').collect())).collect())
}

fn field<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::parse(line, format!("bad {what} `{s}`")))
}

fn parse_winner(s: &str, line: usize) -> Result<Winner> {
    Ok(match s {
        "tie" => Winner::Tie,
        "none" => Winner::NoHit,
        _ => Winner::Index(field(s, line, "winner")?),
    })
}

fn parse_kind(s: &str, line: usize) -> Result<ConstraintKind> {
    use ConstraintKind::*;
    [Pair, Higher, Remainder, Containment, Predecessor, Decay]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::parse(line, format!("unknown constraint kind `{s}`")))
}

/// Rebuilds a run from its exports. The classification file is checked
/// against the classification recomputed from the trace.
pub fn parse(exports: &RunExports) -> Result<RunResult> {
    let mut meta = std::collections::HashMap::new();
    for (line, f) in body(&exports.run, "key,value", "run.csv")? {
        if f.len() != 2 {
            return Err(Error::parse(line, "run.csv rows are key,value"));
        }
        meta.insert(f[0], (line, f[1]));
    }
    let get = |k: &str| meta.get(k).copied().ok_or_else(|| Error::parse(0, format!("run.csv lacks `{k}`")));
    let (_, hash) = get("scenario_hash")?;
    let (l, space) = get("space")?;
    let space = SpaceKind::parse(space).map_err(|_| Error::parse(l, "bad space"))?;
    let (l, regime) = get("regime")?;
    let regime = Regime::parse(regime).map_err(|_| Error::parse(l, "bad regime"))?;
    let (l, sampler) = get("sampler")?;
    let sampler = match sampler {
        "uniform-grid" => Sampler::UniformGrid,
        "seeded-uniform" => Sampler::SeededUniform,
        _ => return Err(Error::parse(l, format!("bad sampler `{sampler}`"))),
    };
    let num = |k: &str| -> Result<u64> {
        let (l, v) = get(k)?;
        field(v, l, k)
    };
    let seed = num("seed")?;
    let scales = num("scales")? as usize;
    let horizon = num("horizon")?;
    let threshold = num("threshold")? as usize;
    let (l, tracked) = get("tracked")?;
    let tracked: Vec<usize> = tracked.split_whitespace().map(|t| field(t, l, "tracked index")).collect::<Result<_>>()?;

    let mut rows: Vec<SampleRow> = Vec::new();
    for (line, f) in body(&exports.samples, "sample_id,x,y,status", "samples.csv")? {
        if f.len() != 4 {
            return Err(Error::parse(line, "samples.csv rows have 4 fields"));
        }
        let x: f64 = field(f[1], line, "coordinate")?;
        let point = match space {
            SpaceKind::Circle => SpacePoint::circle(x),
            SpaceKind::Torus => SpacePoint::torus(x, field(f[2], line, "coordinate")?),
        };
        let outcome = match f[3].strip_prefix("anomaly: ") {
            Some(msg) => Err(msg.to_string()),
            // the report is recomputed once the trace is complete
            None if f[3] == "ok" => Ok((
                WinnerTrace { sample: point, tracked: tracked.clone(), horizon, rows: Vec::new() },
                placeholder_report(),
            )),
            None => return Err(Error::parse(line, format!("bad status `{}`", f[3]))),
        };
        let sample_id = field(f[0], line, "sample id")?;
        if sample_id != rows.len() {
            return Err(Error::parse(line, "sample ids must be consecutive from 0"));
        }
        rows.push(SampleRow { sample_id, point, outcome });
    }

    for (line, f) in body(&exports.trace, TRACE_HEADER, "trace.csv")? {
        if f.len() != 5 {
            return Err(Error::parse(line, "trace.csv rows have 5 fields"));
        }
        let id: usize = field(f[0], line, "sample id")?;
        let n: usize = field(f[1], line, "scale")?;
        let time: i64 = field(f[3], line, "hit time")?;
        let winner = parse_winner(f[4], line)?;
        let Some(SampleRow { outcome: Ok((trace, _)), .. }) = rows.get_mut(id) else {
            return Err(Error::parse(line, format!("trace row for unknown or anomalous sample {id}")));
        };
        if trace.rows.last().is_none_or(|r| r.n != n) {
            trace.rows.push(ScaleRow { n, hits: Vec::new(), winner });
        }
        let row = trace.rows.last_mut().unwrap();
        row.hits.push(if time < 0 { HitOutcome::NoHitWithin(horizon) } else { HitOutcome::HitAt(time as u64) });
    }

    let mut expected = classification_header(&tracked) + "\n";
    for row in &mut rows {
        if let Ok((trace, report)) = &mut row.outcome {
            *report = classify_point(trace, threshold)?;
            write_classification_row(&mut expected, row.sample_id, report);
        }
    }
    if expected != exports.classification {
        return Err(Error::parse(0, "classification.csv disagrees with the trace"));
    }

    let mut constraints = Vec::new();
    for (line, f) in body(&exports.certificate, "kind,i,j,margin", "certificate.csv")? {
        if f.len() != 4 {
            return Err(Error::parse(line, "certificate.csv rows have 4 fields"));
        }
        constraints.push(Constraint {
            kind: parse_kind(f[0], line)?,
            i: field(f[1], line, "index")?,
            j: field(f[2], line, "index")?,
            margin: field(f[3], line, "margin")?,
        });
    }

    Ok(RunResult {
        scenario_hash: hash.to_string(),
        space,
        regime,
        sampler,
        seed,
        tracked,
        scales,
        horizon,
        threshold,
        certificate: SeparationCertificate { regime, constraints },
        rows,
        wall_clock: Duration::ZERO,
    })
}

fn placeholder_report() -> ClassificationReport {
    ClassificationReport {
        misses_all: false,
        eventual_winner: None,
        wins: Vec::new(),
        indecisive: false,
        completely_indecisive: false,
        scales: 0,
        horizon: 0,
        threshold: 0,
    }
}
