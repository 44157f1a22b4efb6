//! Matrix-free linear operators and the two inner solvers.
//!
//! Every operator here acts on plain slices; nothing materializes an N×N
//! matrix. Frequency-domain operators cost O(N log N) per application,
//! finite differences and tridiagonal products O(N).

mod analytic;
mod cg;
mod difference;
mod fourier;
mod tridiagonal;

pub use analytic::{analytic_gains, AnalyticFilter};
pub use cg::{conjugate_gradient, conjugate_gradient_monitored, CgOptions, CgOutcome};
pub use difference::DifferenceOperator;
pub use fourier::{Fourier, SpectralMultiplier};
pub use tridiagonal::{ThomasFactorization, TridiagonalSystem, DEFAULT_PIVOT_TOLERANCE};

use num_complex::Complex64;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub(crate) fn complex_norm_sq(a: &[Complex64]) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum()
}

pub(crate) fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

pub(crate) fn all_finite_complex(a: &[Complex64]) -> bool {
    a.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}
