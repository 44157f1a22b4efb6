use serde::{Deserialize, Serialize};

use super::{ExperimentPlan, ExperimentRecord, Scenario, SeedRole};
use crate::solver::Configuration;
use crate::Result;

/// Mean score of one `(lambda1, lambda2)` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub lambda1: f64,
    pub lambda2: f64,
    pub mean_r_snr_db: f64,
    /// Successful runs behind the mean.
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub config: Configuration,
    pub n: usize,
    pub sigma: f64,
    pub best: GridPoint,
    pub table: Vec<GridPoint>,
}

/// The lambda pairs searched for `config`, sorted lexicographically. Inactive
/// weights are pinned to zero.
pub fn grid_points(plan: &ExperimentPlan, config: Configuration) -> Vec<(f64, f64)> {
    let sorted = |g: &[f64]| {
        let mut g = g.to_vec();
        g.sort_by(f64::total_cmp);
        g.dedup();
        g
    };
    let l1 = if config.uses_lambda1() { sorted(&plan.lambda1_grid) } else { vec![0.0] };
    let l2 = if config.uses_lambda2() { sorted(&plan.lambda2_grid) } else { vec![0.0] };
    l1.iter().flat_map(|&a| l2.iter().map(move |&b| (a, b))).collect()
}

/// Builds the score table from finished runs and picks the best point.
/// Equal means go to the lexicographically smaller pair.
pub(crate) fn tabulate(
    config: Configuration,
    n: usize,
    sigma: f64,
    points: &[(f64, f64)],
    records: &[&ExperimentRecord],
) -> GridResult {
    let table: Vec<GridPoint> = points
        .iter()
        .map(|&(lambda1, lambda2)| {
            let scores: Vec<f64> = records
                .iter()
                .filter(|r| r.lambda1 == lambda1 && r.lambda2 == lambda2 && !r.r_snr_db.is_nan())
                .map(|r| r.r_snr_db)
                .collect();
            let mean_r_snr_db =
                if scores.is_empty() { f64::NEG_INFINITY } else { scores.iter().sum::<f64>() / scores.len() as f64 };
            GridPoint { lambda1, lambda2, mean_r_snr_db, count: scores.len() }
        })
        .collect();
    let mut best = table[0].clone();
    for p in &table[1..] {
        if p.mean_r_snr_db > best.mean_r_snr_db {
            best = p.clone();
        }
    }
    GridResult { config, n, sigma, best, table }
}

/// Scores every grid point of `config` in cell `(n, sigma)` on the plan's
/// tuning seeds (or on the evaluation seeds when `tuning_repetitions` is
/// zero) and returns the table with its argmax.
pub fn grid_search(plan: &ExperimentPlan, config: Configuration, n: usize, sigma: f64) -> Result<GridResult> {
    plan.validate()?;
    let points = grid_points(plan, config);
    let (role, reps) = if plan.tuning_repetitions > 0 {
        (SeedRole::Tuning, plan.tuning_repetitions)
    } else {
        (SeedRole::Evaluation, plan.repetitions)
    };
    let mut records = Vec::with_capacity(points.len() * reps);
    for rep in 0..reps {
        let seed = plan.run_seed(role, n, sigma, rep);
        let scenario = Scenario::build(&plan.generator(n, seed), sigma, plan.channels)?;
        for &(l1, l2) in &points {
            if let Ok(r) = scenario.run(config, l1, l2, &plan.solver) {
                records.push(r);
            }
        }
    }
    let refs: Vec<&ExperimentRecord> = records.iter().collect();
    Ok(tabulate(config, n, sigma, &points, &refs))
}
