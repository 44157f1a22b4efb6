use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{grid_points, tabulate, GridResult};
use super::{ExperimentPlan, ExperimentRecord, Scenario, SeedRole};
use crate::solver::Configuration;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct CampaignOptions {
    /// Worker threads; 1 runs everything on the calling thread.
    pub threads: usize,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        Self { threads: 1 }
    }
}

/// A run that errored instead of producing a score. Its row is still
/// emitted, with a NaN r-SNR and `converged = false`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub config: Configuration,
    pub n: usize,
    pub sigma: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub seed: u64,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct Campaign {
    /// Evaluation runs at the tuned lambdas, one per
    /// (config, N, sigma, repetition).
    pub records: Vec<ExperimentRecord>,
    /// Every tuning run.
    pub tuning: Vec<ExperimentRecord>,
    pub grids: Vec<GridResult>,
    pub failures: Vec<RunFailure>,
}

struct Job {
    n: usize,
    sigma: f64,
    seed: u64,
    runs: Vec<(Configuration, f64, f64)>,
}

fn execute(plan: &ExperimentPlan, job: &Job) -> Vec<(ExperimentRecord, Option<RunFailure>)> {
    let scenario = Scenario::build(&plan.generator(job.n, job.seed), job.sigma, plan.channels);
    job.runs
        .iter()
        .map(|&(config, lambda1, lambda2)| {
            let outcome = scenario
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|s| s.run(config, lambda1, lambda2, &plan.solver).map_err(|e| e.to_string()));
            match outcome {
                Ok(record) => (record, None),
                Err(message) => {
                    let record = ExperimentRecord {
                        config,
                        n: job.n,
                        sigma: job.sigma,
                        lambda1,
                        lambda2,
                        seed: job.seed,
                        r_snr_db: f64::NAN,
                        outer_iters: 0,
                        total_cg_iters: 0,
                        runtime_s: 0.0,
                        converged: false,
                    };
                    let failure =
                        RunFailure { config, n: job.n, sigma: job.sigma, lambda1, lambda2, seed: job.seed, message };
                    (record, Some(failure))
                }
            }
        })
        .collect()
}

fn execute_all(
    plan: &ExperimentPlan,
    jobs: &[Job],
    pool: Option<&rayon::ThreadPool>,
) -> Vec<(ExperimentRecord, Option<RunFailure>)> {
    match pool {
        Some(pool) => pool.install(|| jobs.par_iter().map(|j| execute(plan, j)).collect::<Vec<_>>()),
        None => jobs.iter().map(|j| execute(plan, j)).collect(),
    }
    .into_iter()
    .flatten()
    .collect()
}

/// Tunes each configuration per (N, sigma) cell on the tuning seeds, then
/// evaluates the tuned lambdas on the evaluation seeds. Output order does not
/// depend on the thread count.
pub fn run_campaign(plan: &ExperimentPlan, options: &CampaignOptions) -> Result<Campaign> {
    plan.validate()?;
    let pool = if options.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(options.threads)
                .build()
                .map_err(|e| Error::param(format!("cannot start {} worker threads: {e}", options.threads)))?,
        )
    } else {
        None
    };

    let cells: Vec<(usize, f64)> =
        plan.n_values.iter().flat_map(|&n| plan.sigma_values.iter().map(move |&s| (n, s))).collect();
    let searched: Vec<(Configuration, Vec<(f64, f64)>)> =
        plan.configs.iter().map(|&c| (c, grid_points(plan, c))).filter(|(_, pts)| pts.len() > 1).collect();
    let (tuning_role, tuning_reps) = if plan.tuning_repetitions > 0 {
        (SeedRole::Tuning, plan.tuning_repetitions)
    } else {
        (SeedRole::Evaluation, plan.repetitions)
    };

    let mut failures = Vec::new();
    let mut tuning = Vec::new();
    if !searched.is_empty() {
        let jobs: Vec<Job> = cells
            .iter()
            .flat_map(|&(n, sigma)| {
                let searched = &searched;
                (0..tuning_reps).map(move |rep| Job {
                    n,
                    sigma,
                    seed: plan.run_seed(tuning_role, n, sigma, rep),
                    runs: searched.iter().flat_map(|(c, pts)| pts.iter().map(move |&(a, b)| (*c, a, b))).collect(),
                })
            })
            .collect();
        for (record, failure) in execute_all(plan, &jobs, pool.as_ref()) {
            tuning.push(record);
            failures.extend(failure);
        }
    }

    let mut grids = Vec::new();
    let mut chosen: Vec<Vec<(Configuration, f64, f64)>> = Vec::with_capacity(cells.len());
    for &(n, sigma) in &cells {
        let mut runs = Vec::with_capacity(plan.configs.len());
        for &config in &plan.configs {
            let points = grid_points(plan, config);
            let (l1, l2) = if points.len() > 1 {
                let records: Vec<&ExperimentRecord> =
                    tuning.iter().filter(|r| r.config == config && r.n == n && r.sigma == sigma).collect();
                let grid = tabulate(config, n, sigma, &points, &records);
                let best = (grid.best.lambda1, grid.best.lambda2);
                grids.push(grid);
                best
            } else {
                points[0]
            };
            runs.push((config, l1, l2));
        }
        chosen.push(runs);
    }

    let jobs: Vec<Job> = cells
        .iter()
        .zip(&chosen)
        .flat_map(|(&(n, sigma), runs)| {
            (0..plan.repetitions).map(move |rep| Job {
                n,
                sigma,
                seed: plan.run_seed(SeedRole::Evaluation, n, sigma, rep),
                runs: runs.clone(),
            })
        })
        .collect();
    let mut records = Vec::new();
    for (record, failure) in execute_all(plan, &jobs, pool.as_ref()) {
        records.push(record);
        failures.extend(failure);
    }

    Ok(Campaign { records, tuning, grids, failures })
}
