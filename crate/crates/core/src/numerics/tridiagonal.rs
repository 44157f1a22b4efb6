use num_complex::Complex64;

use crate::{Error, Result};

/// Relative pivot threshold used by [`TridiagonalSystem::factor`].
pub const DEFAULT_PIVOT_TOLERANCE: f64 = 1e-14;

/// Tridiagonal matrix stored by its three bands.
///
/// `lower[i]` sits at `(i+1, i)`, `upper[i]` at `(i, i+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalSystem {
    lower: Vec<Complex64>,
    diag: Vec<Complex64>,
    upper: Vec<Complex64>,
}

impl TridiagonalSystem {
    pub fn new(lower: Vec<Complex64>, diag: Vec<Complex64>, upper: Vec<Complex64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::TooShort { got: 0, min: 1 });
        }
        if lower.len() != n - 1 || upper.len() != n - 1 {
            return Err(Error::dim(format!(
                "tridiagonal bands: diag {n}, lower {}, upper {}",
                lower.len(),
                upper.len()
            )));
        }
        Ok(Self { lower, diag, upper })
    }

    pub fn identity(n: usize) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            lower: vec![zero; n.saturating_sub(1)],
            diag: vec![Complex64::new(1.0, 0.0); n],
            upper: vec![zero; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn lower(&self) -> &[Complex64] {
        &self.lower
    }

    pub fn diag(&self) -> &[Complex64] {
        &self.diag
    }

    pub fn upper(&self) -> &[Complex64] {
        &self.upper
    }

    /// Returns `scale * self + shift * I`.
    pub fn scaled_shifted(&self, scale: f64, shift: f64) -> Self {
        Self {
            lower: self.lower.iter().map(|v| v * scale).collect(),
            diag: self.diag.iter().map(|v| v * scale + shift).collect(),
            upper: self.upper.iter().map(|v| v * scale).collect(),
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        self.matvec_into(x, &mut out);
        out
    }

    pub fn matvec_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.len();
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.upper[i] * x[i + 1];
            }
            out[i] = acc;
        }
    }

    /// Forward elimination with the default pivot tolerance.
    pub fn factor(&self) -> Result<ThomasFactorization> {
        self.factor_with_tolerance(DEFAULT_PIVOT_TOLERANCE)
    }

    /// Forward elimination; fails when some pivot magnitude drops below
    /// `tolerance * max_i |diag[i]|`.
    pub fn factor_with_tolerance(&self, tolerance: f64) -> Result<ThomasFactorization> {
        let n = self.len();
        let scale = self.diag.iter().map(|d| d.norm()).fold(0.0, f64::max);
        let threshold = tolerance * scale;
        let mut upper_mod = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];
        let mut pivots = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let pivot = if i == 0 { self.diag[0] } else { self.diag[i] - self.lower[i - 1] * upper_mod[i - 1] };
            // Negated so that a NaN pivot is rejected too.
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(pivot.norm() > threshold) {
                return Err(Error::SingularPivot { row: i, magnitude: pivot.norm() });
            }
            pivots[i] = pivot;
            if i + 1 < n {
                upper_mod[i] = self.upper[i] / pivot;
            }
        }
        Ok(ThomasFactorization { lower: self.lower.clone(), pivots, upper_mod })
    }

    /// Solves `self * z = b` for one right-hand side.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        self.factor()?.solve(b)
    }

    /// Solves for every column of `b`, sharing one elimination pass.
    pub fn solve_columns(&self, b: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
        let factor = self.factor()?;
        b.iter().map(|col| factor.solve(col)).collect()
    }
}

/// Result of the Thomas forward sweep, reusable across right-hand sides.
#[derive(Clone, Debug)]
pub struct ThomasFactorization {
    lower: Vec<Complex64>,
    pivots: Vec<Complex64>,
    upper_mod: Vec<Complex64>,
}

impl ThomasFactorization {
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.pivots.len();
        if b.len() != n {
            return Err(Error::dim(format!("tridiagonal system of size {n}, rhs of length {}", b.len())));
        }
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        z[0] = b[0] / self.pivots[0];
        for i in 1..n {
            z[i] = (b[i] - self.lower[i - 1] * z[i - 1]) / self.pivots[i];
        }
        for i in (0..n - 1).rev() {
            let next = z[i + 1];
            z[i] -= self.upper_mod[i] * next;
        }
        Ok(z)
    }
}
