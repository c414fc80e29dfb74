//! CSV output: per-iteration traces and per-condition summaries.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sim::{Outcome, SummaryStats, TrialResult};
use crate::statespace::StateSpaceKind;

pub const TRACE_HEADER: &str = "trial,iter,t_now,replan_ms,n_aff,n_c,k,coll_checks,c_robot,path_len,outcome";
pub const SUMMARY_HEADER: &str = "space,n,c_mult,obstacles,trials,median_ms,std_ms,success_rate";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub trial: usize,
    pub iter: usize,
    pub t_now: f64,
    pub replan_ms: f64,
    pub n_aff: u64,
    pub n_c: u64,
    pub k: u64,
    pub coll_checks: u64,
    pub c_robot: f64,
    pub path_len: usize,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub space: StateSpaceKind,
    pub n: usize,
    pub c_mult: f64,
    pub obstacles: usize,
    pub trials: usize,
    pub median_ms: f64,
    pub std_ms: f64,
    pub success_rate: f64,
}

impl From<&SummaryStats> for SummaryRow {
    fn from(s: &SummaryStats) -> Self {
        Self {
            space: s.space,
            n: s.n,
            c_mult: s.c_mult,
            obstacles: s.obstacles,
            trials: s.trials,
            median_ms: s.median_ms,
            std_ms: s.std_ms,
            success_rate: s.success_rate,
        }
    }
}

/// Rows of one trial. Every row carries the trial's final outcome. With
/// `timing` off the wall-clock column is zero so traces are reproducible
/// byte for byte.
pub fn trace_rows(result: &TrialResult, timing: bool) -> Vec<TraceRow> {
    result
        .records
        .iter()
        .map(|r| TraceRow {
            trial: result.trial,
            iter: r.iter,
            t_now: r.t_now,
            replan_ms: if timing { r.metrics.wall_ms() } else { 0.0 },
            n_aff: r.metrics.n_aff,
            n_c: r.metrics.n_c,
            k: r.metrics.k,
            coll_checks: r.metrics.coll_checks,
            c_robot: r.c_robot,
            path_len: r.path_len,
            outcome: result.outcome,
        })
        .collect()
}

/// The single owner of a trace file: trials are appended in order.
pub struct TraceWriter<W: Write> {
    inner: csv::Writer<W>,
    timing: bool,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(w: W, timing: bool) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        inner.write_record(TRACE_HEADER.split(','))?;
        Ok(Self { inner, timing })
    }

    pub fn write_trial(&mut self, result: &TrialResult) -> Result<()> {
        for row in trace_rows(result, self.timing) {
            self.inner.serialize(row)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

pub fn write_summary<W: Write>(w: W, rows: &[SummaryStats]) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(SUMMARY_HEADER.split(','))?;
    for s in rows {
        out.serialize(SummaryRow::from(s))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trace<R: Read>(r: R) -> Result<Vec<TraceRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let rows = rd.deserialize().collect::<std::result::Result<Vec<TraceRow>, _>>()?;
    Ok(rows)
}

pub fn read_summary<R: Read>(r: R) -> Result<Vec<SummaryRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let rows = rd.deserialize().collect::<std::result::Result<Vec<SummaryRow>, _>>()?;
    Ok(rows)
}

/// Per-trial median replanning times (ms) recomputed from trace rows, in
/// trial order, with each trial's outcome.
pub fn trial_medians(rows: &[TraceRow]) -> Vec<(usize, f64, Outcome)> {
    let mut by_trial: std::collections::BTreeMap<usize, (Vec<f64>, Outcome)> = Default::default();
    for r in rows {
        by_trial.entry(r.trial).or_insert_with(|| (Vec::new(), r.outcome)).0.push(r.replan_ms);
    }
    by_trial.into_iter().map(|(t, (xs, o))| (t, crate::sim::median(xs), o)).collect()
}
