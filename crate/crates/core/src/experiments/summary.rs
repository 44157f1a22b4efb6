use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentRecord, GridResult};
use crate::io::{create_csv, io_err, open_csv};
use crate::solver::Configuration;
use crate::Result;

pub const RECORD_HEADER: [&str; 11] = [
    "config",
    "n",
    "sigma",
    "lambda1",
    "lambda2",
    "seed",
    "r_snr_db",
    "outer_iters",
    "total_cg_iters",
    "runtime_s",
    "converged",
];
pub const SUMMARY_HEADER: [&str; 7] =
    ["config", "n", "sigma", "mean_r_snr_db", "std_r_snr_db", "mean_runtime_s", "count"];
pub const RUNTIME_HEADER: [&str; 4] = ["config", "n", "mean_runtime_s", "count"];
pub const BEST_HEADER: [&str; 7] = ["config", "n", "sigma", "lambda1", "lambda2", "mean_r_snr_db", "count"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub config: Configuration,
    pub n: usize,
    pub sigma: f64,
    pub mean_r_snr_db: f64,
    /// Sample standard deviation; 0 for a single record.
    pub std_r_snr_db: f64,
    pub mean_runtime_s: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuntimeRow {
    pub config: Configuration,
    pub n: usize,
    pub mean_runtime_s: f64,
    pub count: usize,
}

#[derive(Serialize)]
struct BestRow {
    config: Configuration,
    n: usize,
    sigma: f64,
    lambda1: f64,
    lambda2: f64,
    mean_r_snr_db: f64,
    count: usize,
}

// Sorted before summing so the result does not depend on record order.
fn mean(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_std(values: &mut [f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mut sq: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    sq.sort_by(f64::total_cmp);
    (sq.iter().sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// Mean and spread of r-SNR per (config, N, sigma). Failed runs (NaN score)
/// are left out of every statistic.
pub fn aggregate(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(Configuration, usize, u64), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.r_snr_db.is_nan()) {
        let g = groups.entry((r.config, r.n, r.sigma.to_bits())).or_default();
        g.0.push(r.r_snr_db);
        g.1.push(r.runtime_s);
    }
    groups
        .into_iter()
        .map(|((config, n, sigma), (mut snr, mut runtime))| {
            let m = mean(&mut snr);
            SummaryRow {
                config,
                n,
                sigma: f64::from_bits(sigma),
                mean_r_snr_db: m,
                std_r_snr_db: sample_std(&mut snr, m),
                mean_runtime_s: mean(&mut runtime),
                count: snr.len(),
            }
        })
        .collect()
}

/// Mean solver runtime per (config, N), over all noise levels.
pub fn runtime_table(records: &[ExperimentRecord]) -> Vec<RuntimeRow> {
    let mut groups: BTreeMap<(Configuration, usize), Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.r_snr_db.is_nan()) {
        groups.entry((r.config, r.n)).or_default().push(r.runtime_s);
    }
    groups
        .into_iter()
        .map(|((config, n), mut t)| RuntimeRow { config, n, mean_runtime_s: mean(&mut t), count: t.len() })
        .collect()
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>, header: &[&str]) -> Result<()> {
    let mut w = create_csv(path)?;
    let mut any = false;
    for row in rows {
        w.serialize(row)?;
        any = true;
    }
    if !any {
        w.write_record(header)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

pub fn write_records_csv(path: &Path, records: &[ExperimentRecord]) -> Result<()> {
    write_rows(path, records, &RECORD_HEADER)
}

pub fn read_records_csv(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let mut reader = open_csv(path, &RECORD_HEADER)?;
    Ok(reader.deserialize().collect::<std::result::Result<Vec<_>, _>>()?)
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_rows(path, rows, &SUMMARY_HEADER)
}

pub fn write_runtime_csv(path: &Path, rows: &[RuntimeRow]) -> Result<()> {
    write_rows(path, rows, &RUNTIME_HEADER)
}

/// One row per searched (config, N, sigma) cell with the selected lambdas.
pub fn write_best_csv(path: &Path, grids: &[GridResult]) -> Result<()> {
    let rows = grids.iter().map(|g| BestRow {
        config: g.config,
        n: g.n,
        sigma: g.sigma,
        lambda1: g.best.lambda1,
        lambda2: g.best.lambda2,
        mean_r_snr_db: g.best.mean_r_snr_db,
        count: g.best.count,
    });
    write_rows(path, rows, &BEST_HEADER)
}
