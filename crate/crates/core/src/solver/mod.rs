//! Time and covariance smoothing: objective, ADMM steps and driver.
//!
//! The problem is
//!
//! ```text
//! min_X  sum_d ||T_d X r_d - y_d||^2 + l1 ||D X||_F^2 + l2 sum_n ||Sigma[n] - Sigma[n-1]||_F^2
//! ```
//!
//! with `Sigma[n]` the instantaneous covariance of the analytic signal
//! `H X`. Splitting `Z = H X` in one slot of the quartic term makes both
//! ADMM subproblems quadratic: the X-step is a real SPD system solved by
//! matrix-free CG, the Z-step a Hermitian tridiagonal system solved by
//! Thomas elimination.
//!
//! Both steps solve the exact first-order conditions of the augmented
//! Lagrangian
//!
//! ```text
//! L(X, Z, U) = f + l1 g1 + l2 sum_n ||(HX)^H J_n Z||_F^2 + rho/2 (||HX - Z + U||^2 - ||U||^2)
//! ```
//!
//! which gives, column by column,
//!
//! ```text
//! X-step: [Phi^H Phi + l1 D^T D + Re{H (l2 M(Z) + rho/2 I) H}] X = Phi^H y + rho/2 Re{H (Z - U)}
//! Z-step: (2 l2 M(HX) + rho I) Z = rho (HX + U)
//! ```
//!
//! where `M(A) = sum_n J_n A A^H J_n` is tridiagonal and `H^H = H`.

mod admm;
mod objective;
mod trace;

pub use admm::{coupling_matrix, solve, u_step, x_step, z_step, AdmmState, Solution, XStep, QUADRATIC_CG_TOL};
pub use objective::{
    augmented_lagrangian, covariance_penalty, data_misfit, lagrangian_gradient_x, lagrangian_gradient_z, objective,
    objective_gradient, smoothness_penalty, split_penalty, ObjectiveGradient, ObjectiveValue,
};
pub use trace::{write_trace_csv, IterationRecord, TRACE_HEADER};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::forward::{ForwardModel, ObservationBundle};
use crate::numerics::{AnalyticFilter, DifferenceOperator};
use crate::signal::BivariateSignal;
use crate::{Error, Result};

pub type RealColumns = [Vec<f64>; 2];
pub type ComplexColumns = [Vec<Complex64>; 2];

/// Which regularizers are active.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Configuration {
    /// No regularization (maximum likelihood).
    Mle,
    /// Time smoothing only.
    Ts,
    /// Covariance smoothing only.
    Cos,
    /// Both.
    Tacos,
}

impl Configuration {
    pub const ALL: [Configuration; 4] =
        [Configuration::Mle, Configuration::Ts, Configuration::Cos, Configuration::Tacos];

    pub fn from_lambdas(lambda1: f64, lambda2: f64) -> Self {
        match (lambda1 > 0.0, lambda2 > 0.0) {
            (false, false) => Configuration::Mle,
            (true, false) => Configuration::Ts,
            (false, true) => Configuration::Cos,
            (true, true) => Configuration::Tacos,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Configuration::Mle => "MLE",
            Configuration::Ts => "TS",
            Configuration::Cos => "COS",
            Configuration::Tacos => "TACOS",
        }
    }

    pub fn uses_lambda1(self) -> bool {
        matches!(self, Configuration::Ts | Configuration::Tacos)
    }

    pub fn uses_lambda2(self) -> bool {
        matches!(self, Configuration::Cos | Configuration::Tacos)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Configuration::ALL
            .into_iter()
            .find(|c| c.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::param(format!("unknown configuration `{s}` (expected MLE, TS, COS or TACOS)")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    pub rho: f64,
    pub max_outer_iters: usize,
    pub primal_tol: f64,
    pub dual_tol: f64,
    pub cg_tol: f64,
    pub cg_max_iters: usize,
    /// Seed of the random initial iterate.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda1: 0.0,
            lambda2: 0.0,
            rho: 1.0,
            max_outer_iters: 100,
            primal_tol: 1e-3,
            dual_tol: 1e-3,
            cg_tol: 1e-8,
            cg_max_iters: 500,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_lambdas(lambda1: f64, lambda2: f64) -> Self {
        Self { lambda1, lambda2, ..Self::default() }
    }

    pub fn configuration(&self) -> Configuration {
        Configuration::from_lambdas(self.lambda1, self.lambda2)
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(format!("{name} = {v} must be finite and non-negative")))
            }
        };
        nonneg("lambda1", self.lambda1)?;
        nonneg("lambda2", self.lambda2)?;
        nonneg("primal_tol", self.primal_tol)?;
        nonneg("dual_tol", self.dual_tol)?;
        nonneg("cg_tol", self.cg_tol)?;
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::param(format!("rho = {} must be positive", self.rho)));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::param("max_outer_iters must be at least 1"));
        }
        Ok(())
    }
}

/// Observations together with their forward model and the fixed operators
/// the solver needs.
#[derive(Clone, Debug)]
pub struct Problem {
    model: ForwardModel,
    observations: Vec<Vec<f64>>,
    filter: AnalyticFilter,
    difference: DifferenceOperator,
    bin_gram: Vec<[[f64; 2]; 2]>,
    adjoint_observations: RealColumns,
}

impl Problem {
    pub fn new(model: ForwardModel, observations: Vec<Vec<f64>>) -> Result<Self> {
        let adjoint_observations = model.apply_adjoint(&observations)?;
        if !observations.iter().all(|y| y.iter().all(|v| v.is_finite())) {
            return Err(Error::NonFinite("observations"));
        }
        let filter = AnalyticFilter::with_fourier(model.fourier().clone())?;
        let difference = DifferenceOperator::new(model.len())?;
        let bin_gram = model.bin_gram();
        Ok(Self { model, observations, filter, difference, bin_gram, adjoint_observations })
    }

    pub fn from_bundle(bundle: &ObservationBundle) -> Result<Self> {
        Self::new(bundle.model()?, bundle.observations.clone())
    }

    pub fn len(&self) -> usize {
        self.model.len()
    }

    pub fn is_empty(&self) -> bool {
        self.model.is_empty()
    }

    pub fn model(&self) -> &ForwardModel {
        &self.model
    }

    pub fn observations(&self) -> &[Vec<f64>] {
        &self.observations
    }

    pub fn filter(&self) -> &AnalyticFilter {
        &self.filter
    }

    pub fn difference(&self) -> &DifferenceOperator {
        &self.difference
    }

    pub(crate) fn check_signal(&self, x: &BivariateSignal) -> Result<()> {
        if x.len() != self.len() {
            return Err(Error::dim(format!("problem has {} samples, signal {}", self.len(), x.len())));
        }
        Ok(())
    }

    /// `H X`, column by column.
    pub fn analytic(&self, x: [&[f64]; 2]) -> ComplexColumns {
        [self.filter.apply_real(x[0]), self.filter.apply_real(x[1])]
    }
}
