use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::io::{create_csv, io_err};
use crate::Result;

pub const TRACE_HEADER: [&str; 9] =
    ["iter", "objective", "f", "g1", "g2", "primal_err", "dual_err", "cg_iters", "elapsed_s"];

/// One row of the per-iteration diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub objective: f64,
    pub f: f64,
    pub g1: f64,
    pub g2: f64,
    pub primal_err: f64,
    pub dual_err: f64,
    pub cg_iters: usize,
    pub elapsed_s: f64,
}

pub fn write_trace_csv(path: &Path, trace: &[IterationRecord]) -> Result<()> {
    let mut w = create_csv(path)?;
    if trace.is_empty() {
        w.write_record(TRACE_HEADER)?;
    }
    for row in trace {
        w.serialize(row)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}
