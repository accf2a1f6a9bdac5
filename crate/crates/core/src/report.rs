//! CSV and JSON serialization of trace sets and criterion results.
//!
//! Floats are written with Rust's shortest round-trip formatting so that
//! identical inputs give byte-identical files.

use std::io::Write;

use serde::Serialize;

use crate::criteria::CriterionResult;
use crate::error::{Error, Result};
use crate::oracle::OracleCheck;
use crate::scalar::Real;
use crate::scenarios::TraceSet;

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Config(format!("write failed: {e}"))
}

fn num<T: Real>(x: T) -> String {
    format!("{}", x.as_f64())
}

fn opt<T: Real>(x: Option<T>) -> String {
    x.map(num).unwrap_or_default()
}

pub const TRACE_HEADER: [&str; 6] = ["scenario", "trace", "variance", "shot_ref", "rel_db", "abs_dbm"];
pub const ORACLE_HEADER: [&str; 4] = ["oracle_variance", "oracle_std_err", "oracle_z", "oracle_n"];
pub const CRITERIA_HEADER: [&str; 5] = ["criterion", "params", "value", "threshold", "verdict"];

/// Writes one row per trace. With `oracle`, appends Monte Carlo columns; the
/// slice must hold one check per trace.
pub fn write_traces<T: Real, W: Write>(out: W, set: &TraceSet<T>, oracle: Option<(&[OracleCheck<T>], usize)>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = TRACE_HEADER.to_vec();
    if let Some((checks, _)) = oracle {
        if checks.len() != set.traces().len() {
            return Err(Error::DimensionMismatch { expected: set.traces().len(), found: checks.len() });
        }
        header.extend(ORACLE_HEADER);
    }
    w.write_record(&header).map_err(io_err)?;
    for (i, t) in set.traces().iter().enumerate() {
        let r = &t.report;
        let mut row = vec![set.scenario.clone(), t.name.clone(), num(r.variance), num(r.shot_ref), opt(r.rel_db), opt(r.abs_dbm)];
        if let Some((checks, n)) = oracle {
            let c = &checks[i];
            row.extend([num(c.empirical), num(c.std_err), num(c.z_score()), n.to_string()]);
        }
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_criteria<T: Real, W: Write>(out: W, results: &[CriterionResult<T>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CRITERIA_HEADER).map_err(io_err)?;
    for r in results {
        w.write_record([
            r.criterion.to_string(),
            r.params.to_string(),
            num(r.value),
            num(r.threshold),
            r.verdict.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

#[derive(Serialize)]
struct TraceRow<'a> {
    trace: &'a str,
    variance: f64,
    shot_ref: f64,
    rel_db: Option<f64>,
    abs_dbm: Option<f64>,
}

#[derive(Serialize)]
struct TraceDoc<'a> {
    scenario: &'a str,
    metadata: &'a crate::scenarios::TraceMetadata,
    traces: Vec<TraceRow<'a>>,
}

/// Pretty JSON with the trace metadata.
pub fn traces_json<T: Real>(set: &TraceSet<T>) -> String {
    let doc = TraceDoc {
        scenario: &set.scenario,
        metadata: &set.metadata,
        traces: set
            .traces()
            .iter()
            .map(|t| TraceRow {
                trace: &t.name,
                variance: t.report.variance.as_f64(),
                shot_ref: t.report.shot_ref.as_f64(),
                rel_db: t.report.rel_db.map(|x| x.as_f64()),
                abs_dbm: t.report.abs_dbm.map(|x| x.as_f64()),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("trace document serializes")
}

pub fn criteria_json<T: Real + Serialize>(results: &[CriterionResult<T>]) -> String {
    serde_json::to_string_pretty(results).expect("criteria serialize")
}
