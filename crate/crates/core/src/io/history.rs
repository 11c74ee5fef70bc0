//! Optimization history as CSV.
//!
//! One header row, one row per iteration and a trailing summary row:
//!
//! ```text
//! iteration,compliance,volume,volume_fraction,t_tdf,t_fea,t_sen,t_mma,t_total
//! 1,229.71,27.1,0.376,0.011,0.017,0.002,0.002,0.031
//! ...
//! summary,n_iter=97,c_obj=76.91,c_post=82.85,relative_error=0.0627,converged=true
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so identical runs give
//! byte-identical files.

use std::io::{BufRead, Write};

use crate::driver::{IterationRecord, RunResult, StageTimes};
use crate::error::{Error, Result};

pub const HISTORY_HEADER: &str = "iteration,compliance,volume,volume_fraction,t_tdf,t_fea,t_sen,t_mma,t_total";

/// Final-row values of a history file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistorySummary {
    pub iterations: usize,
    pub c_obj: f64,
    pub c_post: Option<f64>,
    pub relative_error: Option<f64>,
    pub converged: bool,
}

impl HistorySummary {
    pub fn from_result(r: &RunResult) -> Self {
        Self {
            iterations: r.iterations(),
            c_obj: r.c_obj,
            c_post: r.c_post,
            relative_error: r.relative_error,
            converged: r.converged,
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

/// Writes the history. With `zero_timings` every timing column is written
/// as `0` so the file depends only on the numerics.
pub fn write_history<W: Write>(
    mut out: W,
    records: &[IterationRecord],
    summary: &HistorySummary,
    zero_timings: bool,
) -> Result<()> {
    writeln!(out, "{HISTORY_HEADER}")?;
    for r in records {
        let t = if zero_timings { StageTimes::default() } else { r.times };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.index, r.compliance, r.volume, r.volume_fraction, t.tdf, t.fea, t.sensitivity, t.mma, t.total
        )?;
    }
    writeln!(
        out,
        "summary,n_iter={},c_obj={},c_post={},relative_error={},converged={}",
        summary.iterations,
        summary.c_obj,
        opt(summary.c_post),
        opt(summary.relative_error),
        summary.converged
    )?;
    Ok(())
}

/// Per-iteration stage timings, always with real values.
pub fn write_timings<W: Write>(mut out: W, records: &[IterationRecord]) -> Result<()> {
    writeln!(out, "iteration,t_tdf,t_fea,t_sen,t_mma,t_total")?;
    for r in records {
        let t = r.times;
        writeln!(out, "{},{},{},{},{},{}", r.index, t.tdf, t.fea, t.sensitivity, t.mma, t.total)?;
    }
    Ok(())
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse(format!("line {line}: bad number `{s}`")))
}

/// Reads a file produced by [`write_history`].
pub fn read_history<R: BufRead>(input: R) -> Result<(Vec<IterationRecord>, HistorySummary)> {
    let mut records = Vec::new();
    let mut summary = None;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if i == 0 {
            if line != HISTORY_HEADER {
                return Err(Error::Parse(format!("line 1: unexpected header `{line}`")));
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("summary,") {
            let mut s = HistorySummary { iterations: 0, c_obj: 0.0, c_post: None, relative_error: None, converged: false };
            for field in rest.split(',') {
                let (key, value) = field
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("line {lineno}: summary field `{field}` lacks `=`")))?;
                let optional = |v: &str| if v == "NA" { Ok(None) } else { parse_f64(v, lineno).map(Some) };
                match key {
                    "n_iter" => {
                        s.iterations =
                            value.parse().map_err(|_| Error::Parse(format!("line {lineno}: bad count `{value}`")))?
                    }
                    "c_obj" => s.c_obj = parse_f64(value, lineno)?,
                    "c_post" => s.c_post = optional(value)?,
                    "relative_error" => s.relative_error = optional(value)?,
                    "converged" => s.converged = value == "true",
                    _ => return Err(Error::Parse(format!("line {lineno}: unknown summary field `{key}`"))),
                }
            }
            summary = Some(s);
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 9 {
            return Err(Error::Parse(format!("line {lineno}: expected 9 columns, found {}", cols.len())));
        }
        let v: Vec<f64> = cols[1..].iter().map(|c| parse_f64(c, lineno)).collect::<Result<_>>()?;
        records.push(IterationRecord {
            index: cols[0].parse().map_err(|_| Error::Parse(format!("line {lineno}: bad iteration `{}`", cols[0])))?,
            compliance: v[0],
            volume: v[1],
            volume_fraction: v[2],
            times: StageTimes { tdf: v[3], fea: v[4], sensitivity: v[5], mma: v[6], total: v[7] },
        });
    }
    let summary = summary.ok_or_else(|| Error::Parse("missing summary row".into()))?;
    Ok((records, summary))
}
