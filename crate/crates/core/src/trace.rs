//! Per-phase run records and their CSV form.
//!
//! Header: `phase,r2,psi,gap,grad_f,grad_g,matvec_B,matvec_Bt,exec_time`.
//! Reals are written with 17 significant digits so every file parses back
//! to identical values; missing metrics are empty cells.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::oracles::LedgerCounts;

pub const TRACE_HEADER: [&str; 9] =
    ["phase", "r2", "psi", "gap", "grad_f", "grad_g", "matvec_B", "matvec_Bt", "exec_time"];

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    /// Restart index for the sliding method, iteration index for baselines.
    pub phase: usize,
    pub r2: Option<f64>,
    pub psi: Option<f64>,
    pub gap: Option<f64>,
    /// Cumulative counts at the end of the phase.
    pub counts: LedgerCounts,
    pub exec_time: f64,
}

/// 17 significant digits, round-trip exact.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_real).unwrap_or_default()
}

fn parse_opt(s: &str, line: usize) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|e| Error::Parse { line, msg: format!("bad number `{s}`: {e}") })
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e| Error::Parse { line, msg: format!("bad number `{s}`: {e}") })
}

pub fn write_trace<W: Write>(out: W, records: &[TraceRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in records {
        w.write_record([
            r.phase.to_string(),
            fmt_opt(r.r2),
            fmt_opt(r.psi),
            fmt_opt(r.gap),
            r.counts.grad_f.to_string(),
            r.counts.grad_g.to_string(),
            r.counts.matvec_b.to_string(),
            r.counts.matvec_bt.to_string(),
            fmt_real(r.exec_time),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(Error::Parse { line: 1, msg: format!("unexpected header {:?}", header) });
    }
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != TRACE_HEADER.len() {
            return Err(Error::Parse { line, msg: format!("expected 9 fields, got {}", rec.len()) });
        }
        out.push(TraceRecord {
            phase: parse_num(&rec[0], line)?,
            r2: parse_opt(&rec[1], line)?,
            psi: parse_opt(&rec[2], line)?,
            gap: parse_opt(&rec[3], line)?,
            counts: LedgerCounts {
                grad_f: parse_num(&rec[4], line)?,
                grad_g: parse_num(&rec[5], line)?,
                matvec_b: parse_num(&rec[6], line)?,
                matvec_bt: parse_num(&rec[7], line)?,
            },
            exec_time: parse_num(&rec[8], line)?,
        });
    }
    Ok(out)
}
