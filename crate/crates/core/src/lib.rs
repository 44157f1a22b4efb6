//! Restoration of polarized bivariate signals from noisy multi-channel
//! linear measurements.
//!
//! The reconstruction minimizes a data-fidelity term plus two smoothness
//! priors: one on the time samples themselves and one on the instantaneous
//! covariance track of the analytic signal, which encodes the polarization
//! ellipse. The quartic covariance term is handled by splitting the analytic
//! signal into a separate variable and running ADMM; each subproblem is a
//! linear system solved matrix-free (conjugate gradient for the signal,
//! Thomas elimination for the split variable).
//!
//! Module map:
//!
//! - [`numerics`]: FFT-diagonal operators, the analytic filter, finite
//!   differences, the tridiagonal and CG solvers.
//! - [`signal`]: the bivariate signal type, synthetic ellipse-track
//!   generator, instantaneous covariance and r-SNR.
//! - [`forward`]: multi-channel measurement model, colored noise and
//!   whitening.
//! - [`solver`]: objective terms, ADMM steps and the driver.
//! - [`experiments`]: seeded campaigns, grid search and aggregation.

pub mod error;
pub mod experiments;
pub mod forward;
pub mod io;
pub mod numerics;
pub mod seeds;
pub mod signal;
pub mod solver;

pub use error::{Error, Result};
pub use num_complex::Complex64;
