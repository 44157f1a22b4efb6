//! Reproducible reconstruction experiments: single runs, hyperparameter grid
//! search, campaigns over (N, sigma) cells and their summaries.
//!
//! Every run draws its scenario (signal, channels, noise, initial iterate)
//! from one derived seed. Seeds do not depend on the configuration, so the
//! four configurations of a cell are compared on identical data.

mod campaign;
mod grid;
mod summary;

pub use campaign::{run_campaign, Campaign, CampaignOptions, RunFailure};
pub use grid::{grid_points, grid_search, GridPoint, GridResult};
pub use summary::{
    aggregate, read_records_csv, runtime_table, write_best_csv, write_records_csv, write_runtime_csv,
    write_summary_csv, RuntimeRow, SummaryRow, BEST_HEADER, RECORD_HEADER, RUNTIME_HEADER, SUMMARY_HEADER,
};

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::forward::simulate;
use crate::io::{read_json, write_json};
use crate::seeds::derive_seed;
use crate::signal::{generate_signal, r_snr, BivariateSignal, GeneratorConfig};
use crate::solver::{solve, Configuration, Problem, SolverConfig};
use crate::{Error, Result};

/// Seven log-spaced noise levels from 0.1 to 10.
pub fn default_sigma_values() -> Vec<f64> {
    (0..7).map(|k| 10f64.powf(-1.0 + k as f64 / 3.0)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentPlan {
    pub n_values: Vec<usize>,
    pub sigma_values: Vec<f64>,
    pub lambda1_grid: Vec<f64>,
    pub lambda2_grid: Vec<f64>,
    /// Evaluation runs per (config, N, sigma).
    pub repetitions: usize,
    /// Runs per grid point during tuning, on seeds disjoint from the
    /// evaluation seeds.
    pub tuning_repetitions: usize,
    pub base_seed: u64,
    pub configs: Vec<Configuration>,
    pub channels: usize,
    /// Frequency band of the generated signals, in cycles over the record.
    pub band_cycles: [f64; 2],
    /// Solver settings shared by all runs; the lambdas and seed are
    /// overwritten per run.
    pub solver: SolverConfig,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            n_values: vec![512, 1024, 4096],
            sigma_values: default_sigma_values(),
            lambda1_grid: vec![1e-1, 1e0, 1e1, 1e2, 1e3],
            lambda2_grid: vec![1e2, 1e3, 1e4, 1e5, 1e6],
            repetitions: 10,
            tuning_repetitions: 3,
            base_seed: 0,
            configs: Configuration::ALL.to_vec(),
            channels: 3,
            band_cycles: [25.0, 35.0],
            solver: SolverConfig::default(),
        }
    }
}

/// Which seed family a run belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedRole {
    Tuning,
    Evaluation,
}

impl SeedRole {
    fn label(self) -> &'static str {
        match self {
            SeedRole::Tuning => "tune",
            SeedRole::Evaluation => "eval",
        }
    }
}

impl ExperimentPlan {
    pub fn load(path: &Path) -> Result<Self> {
        let plan: Self = read_json(path)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn validate(&self) -> Result<()> {
        let nonempty = |name: &str, len: usize| {
            if len == 0 {
                Err(Error::param(format!("{name} must not be empty")))
            } else {
                Ok(())
            }
        };
        nonempty("n_values", self.n_values.len())?;
        nonempty("sigma_values", self.sigma_values.len())?;
        nonempty("configs", self.configs.len())?;
        if self.repetitions == 0 {
            return Err(Error::param("repetitions must be at least 1"));
        }
        if self.channels == 0 {
            return Err(Error::param("channels must be at least 1"));
        }
        if let Some(s) = self.sigma_values.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::param(format!("sigma = {s} must be positive")));
        }
        for (name, grid) in [("lambda1_grid", &self.lambda1_grid), ("lambda2_grid", &self.lambda2_grid)] {
            if let Some(l) = grid.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
                return Err(Error::param(format!("{name} entry {l} must be positive")));
            }
        }
        if self.configs.iter().any(|c| c.uses_lambda1()) {
            nonempty("lambda1_grid", self.lambda1_grid.len())?;
        }
        if self.configs.iter().any(|c| c.uses_lambda2()) {
            nonempty("lambda2_grid", self.lambda2_grid.len())?;
        }
        for &n in &self.n_values {
            self.generator(n, 0).validate()?;
        }
        self.solver.validate()
    }

    pub fn generator(&self, n: usize, seed: u64) -> GeneratorConfig {
        let mut cfg = GeneratorConfig::new(n, seed);
        cfg.band = (self.band_cycles[0] / n as f64, self.band_cycles[1] / n as f64);
        cfg
    }

    /// Seed of repetition `rep` in cell `(n, sigma)`.
    pub fn run_seed(&self, role: SeedRole, n: usize, sigma: f64, rep: usize) -> u64 {
        derive_seed(
            self.base_seed,
            &[role.label(), &n.to_string(), &format!("{:016x}", sigma.to_bits()), &rep.to_string()],
        )
    }

    /// Number of runs a campaign performs (tuning plus evaluation).
    pub fn run_count(&self) -> usize {
        let cells = self.n_values.len() * self.sigma_values.len();
        let per_cell: usize = self
            .configs
            .iter()
            .map(|&c| {
                let points = grid_points(self, c).len();
                let tuning = if points > 1 { points * self.tuning_repetitions } else { 0 };
                tuning + self.repetitions
            })
            .sum();
        cells * per_cell
    }
}

/// One solver run against a known ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub config: Configuration,
    pub n: usize,
    pub sigma: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub seed: u64,
    pub r_snr_db: f64,
    pub outer_iters: usize,
    pub total_cg_iters: usize,
    pub runtime_s: f64,
    pub converged: bool,
}

impl ExperimentRecord {
    /// Equality ignoring the wall-clock field.
    pub fn same_outcome(&self, other: &Self) -> bool {
        let strip = |r: &Self| Self { runtime_s: 0.0, ..r.clone() };
        strip(self) == strip(other)
    }
}

/// Ground truth and observations for one seed; shared by every grid point
/// and configuration evaluated on it.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub n: usize,
    pub sigma: f64,
    pub seed: u64,
    pub truth: BivariateSignal,
    pub problem: Problem,
}

impl Scenario {
    pub fn build(generator: &GeneratorConfig, sigma: f64, channels: usize) -> Result<Self> {
        let (truth, _) = generate_signal(generator)?;
        let sim = simulate(&truth, sigma, channels, generator.seed)?;
        let problem = Problem::new(sim.model, sim.bundle.observations)?;
        Ok(Self { n: generator.n, sigma, seed: generator.seed, truth, problem })
    }

    /// Solves with the given lambdas and scores against the truth. Runtime
    /// covers the solve only.
    pub fn run(
        &self,
        config: Configuration,
        lambda1: f64,
        lambda2: f64,
        template: &SolverConfig,
    ) -> Result<ExperimentRecord> {
        let solver = SolverConfig { lambda1, lambda2, seed: self.seed, ..template.clone() };
        let start = Instant::now();
        let solution = solve(&self.problem, &solver)?;
        let runtime_s = start.elapsed().as_secs_f64();
        Ok(ExperimentRecord {
            config,
            n: self.n,
            sigma: self.sigma,
            lambda1,
            lambda2,
            seed: self.seed,
            r_snr_db: r_snr(&self.truth, &solution.signal)?,
            outer_iters: solution.state.iteration,
            total_cg_iters: solution.total_cg_iterations,
            runtime_s,
            converged: solution.converged,
        })
    }
}

/// Generate, observe through `D = 3` whitened channels, solve and score.
/// The configuration label is taken from which lambdas are nonzero.
pub fn run_single(n: usize, sigma: f64, lambda1: f64, lambda2: f64, seed: u64) -> Result<ExperimentRecord> {
    let plan = ExperimentPlan::default();
    let scenario = Scenario::build(&plan.generator(n, seed), sigma, plan.channels)?;
    scenario.run(Configuration::from_lambdas(lambda1, lambda2), lambda1, lambda2, &plan.solver)
}
