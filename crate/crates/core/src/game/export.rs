//! Trace files: a CSV of the moves and a JSON sidecar with the lasso and verdict.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::{Lasso, RunTrace, Verdict};
use crate::error::{Error, Result};

pub fn trace_csv(trace: &RunTrace) -> String {
    let mut out = String::from("t,x_t,v_t,w_t\n");
    for (t, r) in trace.rounds.iter().enumerate() {
        let w = r.mv.w().map(|w| w.to_string()).unwrap_or_default();
        writeln!(out, "{t},{},{},{w}", r.letter, r.mv.v()).expect("write to string");
    }
    out
}

#[derive(Serialize)]
struct LassoRef {
    start: usize,
    period: usize,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    lasso: Option<LassoRef>,
    verdict: Option<&'a Verdict>,
    fault: Option<&'a super::Fault>,
    rounds: usize,
}

pub fn trace_sidecar_json(trace: &RunTrace, verdict: Option<&Verdict>) -> String {
    let sidecar = Sidecar {
        lasso: trace.lasso.as_ref().map(|&Lasso { start, period, .. }| LassoRef { start, period }),
        verdict,
        fault: trace.fault.as_ref(),
        rounds: trace.rounds.len(),
    };
    serde_json::to_string_pretty(&sidecar).expect("sidecar serializes")
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`.
pub fn write_trace(dir: &Path, stem: &str, trace: &RunTrace, verdict: Option<&Verdict>) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(e.to_string());
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join(format!("{stem}.csv")), trace_csv(trace)).map_err(io)?;
    std::fs::write(dir.join(format!("{stem}.json")), trace_sidecar_json(trace, verdict) + "\n").map_err(io)?;
    Ok(())
}
