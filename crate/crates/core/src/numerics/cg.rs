use super::{all_finite, dot, norm_sq};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOptions {
    /// Target relative residual `||Ax - b|| / ||b||`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 500 }
    }
}

#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// Relative residual of the returned iterate (absolute when `b = 0`).
    pub relative_residual: f64,
    pub converged: bool,
}

/// Conjugate gradient for a symmetric positive (semi)definite map given only
/// through `matvec(x, out)`, which must overwrite `out` with `A x`.
///
/// Hitting `max_iter` is not an error; check [`CgOutcome::converged`].
pub fn conjugate_gradient<F>(matvec: F, b: &[f64], x0: &[f64], opts: CgOptions) -> Result<CgOutcome>
where
    F: FnMut(&[f64], &mut [f64]),
{
    conjugate_gradient_monitored(matvec, b, x0, opts, |_, _| {})
}

/// Same as [`conjugate_gradient`], calling `monitor(k, x_k)` after every
/// iteration.
pub fn conjugate_gradient_monitored<F, M>(
    mut matvec: F,
    b: &[f64],
    x0: &[f64],
    opts: CgOptions,
    mut monitor: M,
) -> Result<CgOutcome>
where
    F: FnMut(&[f64], &mut [f64]),
    M: FnMut(usize, &[f64]),
{
    let n = b.len();
    if x0.len() != n {
        return Err(Error::dim(format!("cg: rhs length {n}, initial guess length {}", x0.len())));
    }
    if !all_finite(b) || !all_finite(x0) {
        return Err(Error::NonFinite("conjugate gradient input"));
    }
    let b_norm = norm_sq(b).sqrt();
    if b_norm == 0.0 {
        // A x = 0 has x = 0 among its solutions.
        return Ok(CgOutcome { solution: vec![0.0; n], iterations: 0, relative_residual: 0.0, converged: true });
    }

    let mut x = x0.to_vec();
    let mut ap = vec![0.0; n];
    matvec(&x, &mut ap);
    let mut r: Vec<f64> = b.iter().zip(&ap).map(|(bi, ai)| bi - ai).collect();
    let mut rr = norm_sq(&r);
    let target = opts.tol * b_norm;
    if rr.sqrt() <= target {
        return Ok(CgOutcome { solution: x, iterations: 0, relative_residual: rr.sqrt() / b_norm, converged: true });
    }
    let mut p = r.clone();
    let mut iterations = 0;
    while iterations < opts.max_iter {
        matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !pap.is_finite() {
            return Err(Error::NonFinite("conjugate gradient iterate"));
        }
        if pap <= 0.0 {
            // Direction in the null space (or numerically indefinite): stop here.
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations += 1;
        monitor(iterations, &x);
        let rr_next = norm_sq(&r);
        if !rr_next.is_finite() {
            return Err(Error::NonFinite("conjugate gradient residual"));
        }
        if rr_next.sqrt() <= target {
            rr = rr_next;
            break;
        }
        let beta = rr_next / rr;
        rr = rr_next;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    let relative_residual = rr.sqrt() / b_norm;
    Ok(CgOutcome { solution: x, iterations, relative_residual, converged: relative_residual <= opts.tol })
}
