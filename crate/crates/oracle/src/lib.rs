//! Dense, deliberately naive reference implementations. Everything here is
//! built from explicit sums and matrices, never from the FFT-based code it
//! is used to check.

use std::f64::consts::PI;

pub use num_complex::Complex64 as C;

pub type CMat = Vec<Vec<C>>;
pub type RMat = Vec<Vec<f64>>;

pub fn czero(rows: usize, cols: usize) -> CMat {
    vec![vec![C::new(0.0, 0.0); cols]; rows]
}

pub fn rzero(rows: usize, cols: usize) -> RMat {
    vec![vec![0.0; cols]; rows]
}

/// Unnormalized DFT matrix, `F[k][m] = exp(-2 pi i k m / N)`.
pub fn dft(n: usize) -> CMat {
    (0..n).map(|k| (0..n).map(|m| C::from_polar(1.0, -2.0 * PI * ((k * m) % n) as f64 / n as f64)).collect()).collect()
}

/// `F^{-1} diag(g) F` assembled from explicit exponentials.
pub fn spectral_matrix(gains: &[f64]) -> CMat {
    let n = gains.len();
    let f = dft(n);
    let mut out = czero(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = C::new(0.0, 0.0);
            for k in 0..n {
                acc += f[k][i].conj() * gains[k] * f[k][j];
            }
            out[i][j] = acc / n as f64;
        }
    }
    out
}

/// Analytic-signal gains written out from their definition: keep DC (and
/// Nyquist for even N), double positive frequencies, drop the rest.
pub fn analytic_gains(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            if k == 0 || 2 * k == n {
                1.0
            } else if 2 * k < n {
                2.0
            } else {
                0.0
            }
        })
        .collect()
}

pub fn analytic_matrix(n: usize) -> CMat {
    spectral_matrix(&analytic_gains(n))
}

/// Forward differences, `(N-1) x N`.
pub fn difference_matrix(n: usize) -> RMat {
    let mut d = rzero(n - 1, n);
    for i in 0..n - 1 {
        d[i][i] = -1.0;
        d[i][i + 1] = 1.0;
    }
    d
}

pub fn cmatvec(a: &CMat, x: &[C]) -> Vec<C> {
    a.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

pub fn rmatvec(a: &RMat, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

pub fn cmatmul(a: &CMat, b: &CMat) -> CMat {
    let (r, k, c) = (a.len(), b.len(), b[0].len());
    let mut out = czero(r, c);
    for i in 0..r {
        for l in 0..k {
            let s = a[i][l];
            for j in 0..c {
                out[i][j] += s * b[l][j];
            }
        }
    }
    out
}

pub fn adjoint(a: &CMat) -> CMat {
    let (r, c) = (a.len(), a[0].len());
    (0..c).map(|j| (0..r).map(|i| a[i][j].conj()).collect()).collect()
}

pub fn rtranspose(a: &RMat) -> RMat {
    let (r, c) = (a.len(), a[0].len());
    (0..c).map(|j| (0..r).map(|i| a[i][j]).collect()).collect()
}

pub fn rmatmul(a: &RMat, b: &RMat) -> RMat {
    let (r, k, c) = (a.len(), b.len(), b[0].len());
    let mut out = rzero(r, c);
    for i in 0..r {
        for l in 0..k {
            let s = a[i][l];
            if s == 0.0 {
                continue;
            }
            for j in 0..c {
                out[i][j] += s * b[l][j];
            }
        }
    }
    out
}

/// Real part of a complex matrix.
pub fn real_part(a: &CMat) -> RMat {
    a.iter().map(|row| row.iter().map(|v| v.re).collect()).collect()
}

/// Dense real channel operator `T = Re{F^{-1} diag(g) F}` for conjugate
/// symmetric gains, from the cosine sum `T[i][j] = 1/N sum_k g_k cos(2 pi k (i-j) / N)`.
pub fn circulant_real(gains: &[f64]) -> RMat {
    let n = gains.len();
    let col: Vec<f64> = (0..n)
        .map(|m| {
            gains.iter().enumerate().map(|(k, g)| g * (2.0 * PI * ((k * m) % n) as f64 / n as f64).cos()).sum::<f64>()
                / n as f64
        })
        .collect();
    (0..n).map(|i| (0..n).map(|j| col[(i + n - j) % n]).collect()).collect()
}

/// Stacked observation operator acting on `vec(X) = [u; v]`: block row `d`
/// is `[r_d0 T_d, r_d1 T_d]`.
pub fn forward_matrix(channels: &[(RMat, [f64; 2])]) -> RMat {
    let n = channels[0].0.len();
    let mut phi = rzero(channels.len() * n, 2 * n);
    for (d, (t, r)) in channels.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                phi[d * n + i][j] = r[0] * t[i][j];
                phi[d * n + i][n + j] = r[1] * t[i][j];
            }
        }
    }
    phi
}

/// Solves a symmetric positive definite system by Cholesky factorization.
pub fn cholesky_solve(a: &RMat, b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut l = rzero(n, n);
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        assert!(d > 0.0, "matrix is not positive definite (pivot {j}: {d})");
        let d = d.sqrt();
        l[j][j] = d;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / d;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i][k] * y[k];
        }
        y[i] /= l[i][i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[k][i] * y[k];
        }
        y[i] /= l[i][i];
    }
    y
}

/// Gaussian elimination with partial pivoting on a complex system.
pub fn complex_solve(a: &CMat, b: &[C]) -> Vec<C> {
    let n = a.len();
    let mut m: CMat =
        a.iter().zip(b).map(|(row, &bi)| row.iter().copied().chain(std::iter::once(bi)).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm())).unwrap();
        m.swap(col, piv);
        let p = m[col][col];
        assert!(p.norm() > 0.0, "singular matrix");
        for i in col + 1..n {
            let f = m[i][col] / p;
            if f.norm() == 0.0 {
                continue;
            }
            for j in col..=n {
                let v = m[col][j];
                m[i][j] -= f * v;
            }
        }
    }
    let mut x = vec![C::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut s = m[i][n];
        for j in i + 1..n {
            s -= m[i][j] * x[j];
        }
        x[i] = s / m[i][i];
    }
    x
}

/// Least squares `min ||A x - y||` through the normal equations.
pub fn least_squares(a: &RMat, y: &[f64]) -> Vec<f64> {
    let at = rtranspose(a);
    let gram = rmatmul(&at, a);
    cholesky_solve(&gram, &rmatvec(&at, y))
}

/// `J_n` as a dense `N x N` matrix: `+1` at `(n, n)`, `-1` at `(n-1, n-1)`.
pub fn jump_matrix(n: usize, at: usize) -> CMat {
    let mut j = czero(n, n);
    j[at][at] = C::new(1.0, 0.0);
    j[at - 1][at - 1] = C::new(-1.0, 0.0);
    j
}

/// `sum_n J_n A A^H J_n` with `A` given as its two columns.
pub fn dense_coupling(a: &[Vec<C>; 2]) -> CMat {
    let n = a[0].len();
    let mut aah = czero(n, n);
    for i in 0..n {
        for j in 0..n {
            aah[i][j] = a[0][i] * a[0][j].conj() + a[1][i] * a[1][j].conj();
        }
    }
    let mut out = czero(n, n);
    for t in 1..n {
        let jm = jump_matrix(n, t);
        let term = cmatmul(&cmatmul(&jm, &aah), &jm);
        for i in 0..n {
            for j in 0..n {
                out[i][j] += term[i][j];
            }
        }
    }
    out
}

/// `sum_n ||S[n] - S[n-1]||_F^2` with `S[n] = conj(a_n) a_n^T` built
/// entrywise from the analytic rows.
pub fn covariance_jumps(a: &[Vec<C>; 2]) -> f64 {
    let n = a[0].len();
    let sigma = |t: usize| {
        let mut s = [[C::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                s[i][j] = a[i][t].conj() * a[j][t];
            }
        }
        s
    };
    (1..n)
        .map(|t| {
            let (p, q) = (sigma(t), sigma(t - 1));
            (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| (p[i][j] - q[i][j]).norm_sqr()).sum::<f64>()
        })
        .sum()
}

/// Central finite-difference gradient.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let fp = f(&probe);
            probe[i] = orig - h;
            let fm = f(&probe);
            probe[i] = orig;
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Central finite-difference derivative along `dir`.
pub fn fd_directional(f: impl Fn(&[f64]) -> f64, x: &[f64], dir: &[f64], h: f64) -> f64 {
    let plus: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + h * d).collect();
    let minus: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a - h * d).collect();
    (f(&plus) - f(&minus)) / (2.0 * h)
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

pub fn crel_err(a: &[C], b: &[C]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

pub fn cmat_rel_err(a: &CMat, b: &CMat) -> f64 {
    let fa: Vec<C> = a.iter().flatten().copied().collect();
    let fb: Vec<C> = b.iter().flatten().copied().collect();
    crel_err(&fa, &fb)
}

/// `10 log10(||reference||^2 / ||reference - estimate||^2)`.
pub fn snr_db(reference: &[f64], estimate: &[f64]) -> f64 {
    let num: f64 = reference.iter().map(|v| v * v).sum();
    let den: f64 = reference.iter().zip(estimate).map(|(a, b)| (a - b) * (a - b)).sum();
    10.0 * (num / den).log10()
}
