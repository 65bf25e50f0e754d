//! CSV rows for traces and classifications.

use std::fmt::Write as _;

use crate::visit::classify::ClassificationReport;
use crate::visit::hits::WinnerTrace;

pub const TRACE_HEADER: &str = "sample_id,n,index,hit_time,winner";

/// One row per (scale, tracked index); a miss has hit time -1.
pub fn write_trace_rows(out: &mut String, sample_id: usize, trace: &WinnerTrace) {
    for row in &trace.rows {
        for (i, hit) in trace.tracked.iter().zip(&row.hits) {
            let time = hit.time().map_or(-1, |k| k as i64);
            writeln!(out, "{sample_id},{},{i},{time},{}", row.n, row.winner).unwrap();
        }
    }
}

pub fn classification_header(tracked: &[usize]) -> String {
    let mut h = String::from("sample_id,misses_all,eventual_winner");
    for i in tracked {
        write!(h, ",wins_{i}").unwrap();
    }
    h.push_str(",indecisive,completely_indecisive");
    h
}

pub fn write_classification_row(out: &mut String, sample_id: usize, report: &ClassificationReport) {
    let eventual = report.eventual_winner.map_or_else(|| "none".to_string(), |i| i.to_string());
    write!(out, "{sample_id},{},{eventual}", report.misses_all).unwrap();
    for (_, c) in &report.wins {
        write!(out, ",{c}").unwrap();
    }
    writeln!(out, ",{},{}", report.indecisive, report.completely_indecisive).unwrap();
}
