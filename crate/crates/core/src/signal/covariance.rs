use num_complex::Complex64;

use super::BivariateSignal;
use crate::numerics::AnalyticFilter;
use crate::Result;

/// A 2×2 complex matrix, row-major.
pub type Covariance2 = [[Complex64; 2]; 2];

/// Instantaneous covariance `Sigma[n] = x_a[n]^H x_a[n]` of the analytic
/// signal rows.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceTrack {
    sigma: Vec<Covariance2>,
}

impl CovarianceTrack {
    /// Builds the track from the two analytic columns.
    pub fn from_analytic(ua: &[Complex64], va: &[Complex64]) -> Self {
        let sigma =
            ua.iter().zip(va).map(|(&a, &b)| [[a.conj() * a, a.conj() * b], [b.conj() * a, b.conj() * b]]).collect();
        Self { sigma }
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn get(&self, n: usize) -> &Covariance2 {
        &self.sigma[n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Covariance2> {
        self.sigma.iter()
    }

    /// `sum_n ||Sigma[n] - Sigma[n-1]||_F^2`.
    pub fn smoothness(&self) -> f64 {
        self.sigma
            .windows(2)
            .map(|w| {
                let mut acc = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        acc += (w[1][i][j] - w[0][i][j]).norm_sqr();
                    }
                }
                acc
            })
            .sum()
    }
}

pub fn trace(m: &Covariance2) -> f64 {
    m[0][0].re + m[1][1].re
}

pub fn determinant(m: &Covariance2) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Eigenvalues of a Hermitian 2×2 matrix, ascending.
pub fn hermitian_eigenvalues(m: &Covariance2) -> [f64; 2] {
    let a = m[0][0].re;
    let d = m[1][1].re;
    let half_gap = ((a - d) * 0.5).hypot(m[0][1].norm());
    let mid = (a + d) * 0.5;
    [mid - half_gap, mid + half_gap]
}

pub fn instantaneous_covariance(x: &BivariateSignal) -> Result<CovarianceTrack> {
    let filter = AnalyticFilter::new(x.len())?;
    let ua = filter.transform(x.u())?;
    let va = filter.transform(x.v())?;
    Ok(CovarianceTrack::from_analytic(&ua, &va))
}

/// The covariance-smoothness penalty, computed from covariance differences.
pub fn covariance_smoothness(x: &BivariateSignal) -> Result<f64> {
    Ok(instantaneous_covariance(x)?.smoothness())
}
