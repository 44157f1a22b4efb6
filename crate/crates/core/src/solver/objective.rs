use num_complex::Complex64;

use super::admm::coupling_matrix;
use super::{ComplexColumns, Problem, RealColumns, SolverConfig};
use crate::numerics::complex_norm_sq;
use crate::signal::{BivariateSignal, CovarianceTrack};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectiveValue {
    /// Data misfit `sum_d ||T_d X r_d - y_d||^2`.
    pub f: f64,
    /// Time smoothness `||D X||_F^2`.
    pub g1: f64,
    /// Covariance smoothness `sum_n ||Sigma[n] - Sigma[n-1]||_F^2`.
    pub g2: f64,
    pub total: f64,
}

pub fn data_misfit(problem: &Problem, x: [&[f64]; 2]) -> f64 {
    problem
        .model()
        .forward_columns(x)
        .iter()
        .zip(problem.observations())
        .map(|(p, y)| p.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        .sum()
}

pub fn smoothness_penalty(x: [&[f64]; 2]) -> f64 {
    x.iter().map(|col| col.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum::<f64>()).sum()
}

/// Covariance smoothness via the instantaneous covariance track.
pub fn covariance_penalty(problem: &Problem, x: [&[f64]; 2]) -> f64 {
    let [ua, va] = problem.analytic(x);
    CovarianceTrack::from_analytic(&ua, &va).smoothness()
}

/// The split covariance term `sum_n ||A^H J_n Z||_F^2`, where `A = H X`.
pub fn split_penalty(analytic: &ComplexColumns, z: &ComplexColumns) -> f64 {
    let n = analytic[0].len();
    let mut total = 0.0;
    for t in 1..n {
        for i in 0..2 {
            for j in 0..2 {
                let m = analytic[i][t].conj() * z[j][t] - analytic[i][t - 1].conj() * z[j][t - 1];
                total += m.norm_sqr();
            }
        }
    }
    total
}

pub fn objective(problem: &Problem, x: &BivariateSignal, config: &SolverConfig) -> Result<ObjectiveValue> {
    problem.check_signal(x)?;
    Ok(objective_columns(problem, x.columns(), config))
}

pub(crate) fn objective_columns(problem: &Problem, x: [&[f64]; 2], config: &SolverConfig) -> ObjectiveValue {
    let f = data_misfit(problem, x);
    let g1 = smoothness_penalty(x);
    let g2 = covariance_penalty(problem, x);
    ObjectiveValue { f, g1, g2, total: f + config.lambda1 * g1 + config.lambda2 * g2 }
}

/// Evaluates `L(X, Z, U)` term by term as written in the module docs.
pub fn augmented_lagrangian(
    problem: &Problem,
    x: &BivariateSignal,
    z: &ComplexColumns,
    u: &ComplexColumns,
    config: &SolverConfig,
) -> Result<f64> {
    problem.check_signal(x)?;
    config.validate()?;
    let cols = x.columns();
    let f = data_misfit(problem, cols);
    let g1 = smoothness_penalty(cols);
    let a = problem.analytic(cols);
    let g2_split = split_penalty(&a, z);
    let mut coupling = 0.0;
    for c in 0..2 {
        let diff: Vec<Complex64> = (0..a[c].len()).map(|i| a[c][i] - z[c][i] + u[c][i]).collect();
        coupling += complex_norm_sq(&diff) - complex_norm_sq(&u[c]);
    }
    Ok(f + config.lambda1 * g1 + config.lambda2 * g2_split + 0.5 * config.rho * coupling)
}

/// Gradients (with respect to the real entries of `X`) of each objective
/// term and of the weighted total.
#[derive(Clone, Debug)]
pub struct ObjectiveGradient {
    pub f: RealColumns,
    pub g1: RealColumns,
    pub g2: RealColumns,
    pub total: RealColumns,
}

pub fn objective_gradient(problem: &Problem, x: &BivariateSignal, config: &SolverConfig) -> Result<ObjectiveGradient> {
    problem.check_signal(x)?;
    let cols = x.columns();
    let n = problem.len();

    let residual: Vec<Vec<f64>> = problem
        .model()
        .forward_columns(cols)
        .into_iter()
        .zip(problem.observations())
        .map(|(p, y)| p.iter().zip(y).map(|(a, b)| 2.0 * (a - b)).collect())
        .collect();
    let f = problem.model().adjoint_unchecked(&residual);

    let mut g1 = [vec![0.0; n], vec![0.0; n]];
    for c in 0..2 {
        problem.difference().gram_accumulate(cols[c], 2.0, &mut g1[c]);
    }

    // grad g2 = 4 Re{H M(A) A}, A = H X
    let a = problem.analytic(cols);
    let m = coupling_matrix(&a);
    let g2 = [0, 1].map(|c| {
        let mut w = m.matvec(&a[c]);
        problem.filter().apply_in_place(&mut w);
        w.iter().map(|v| 4.0 * v.re).collect::<Vec<f64>>()
    });

    let total = [0, 1]
        .map(|c| (0..n).map(|i| f[c][i] + config.lambda1 * g1[c][i] + config.lambda2 * g2[c][i]).collect::<Vec<f64>>());
    Ok(ObjectiveGradient { f, g1, g2, total })
}

/// Gradient of `L` with respect to the real entries of `X`.
pub fn lagrangian_gradient_x(
    problem: &Problem,
    x: &BivariateSignal,
    z: &ComplexColumns,
    u: &ComplexColumns,
    config: &SolverConfig,
) -> Result<RealColumns> {
    let base = objective_gradient(problem, x, &SolverConfig { lambda2: 0.0, ..config.clone() })?;
    let cols = x.columns();
    let a = problem.analytic(cols);
    let mz = coupling_matrix(z);
    let mut out = base.total;
    for c in 0..2 {
        // 2 l2 Re{H M(Z) H x} + rho Re{H (H x - z + u)}
        let mut split = mz.matvec(&a[c]);
        problem.filter().apply_in_place(&mut split);
        let mut aug: Vec<Complex64> = (0..a[c].len()).map(|i| a[c][i] - z[c][i] + u[c][i]).collect();
        problem.filter().apply_in_place(&mut aug);
        for i in 0..out[c].len() {
            out[c][i] += 2.0 * config.lambda2 * split[i].re + config.rho * aug[i].re;
        }
    }
    Ok(out)
}

/// Gradient of `L` with respect to `Z`, packed as
/// `dL/dRe(Z) + i dL/dIm(Z)`.
pub fn lagrangian_gradient_z(
    problem: &Problem,
    x: &BivariateSignal,
    z: &ComplexColumns,
    u: &ComplexColumns,
    config: &SolverConfig,
) -> Result<ComplexColumns> {
    problem.check_signal(x)?;
    let a = problem.analytic(x.columns());
    let ma = coupling_matrix(&a);
    Ok([0, 1].map(|c| {
        let mz = ma.matvec(&z[c]);
        (0..z[c].len()).map(|i| 2.0 * config.lambda2 * mz[i] + config.rho * (z[c][i] - a[c][i] - u[c][i])).collect()
    }))
}

pub(crate) fn relative_change(new: &ComplexColumns, old: &ComplexColumns) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for c in 0..2 {
        for (a, b) in new[c].iter().zip(&old[c]) {
            num += (a - b).norm_sqr();
            den += b.norm_sqr();
        }
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}
