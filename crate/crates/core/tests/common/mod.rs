#![allow(dead_code)]

use bivar::forward::{ChannelModel, ForwardModel};
use bivar::numerics::{Fourier, SpectralMultiplier};
use bivar::signal::BivariateSignal;
use bivar::solver::{
    augmented_lagrangian, data_misfit, smoothness_penalty, split_penalty, ComplexColumns, Problem, SolverConfig,
};
use bivar::Complex64;
use bivar_oracle as oracle;
use oracle::RMat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn complex_normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect()
}

pub fn random_signal(rng: &mut ChaCha8Rng, n: usize) -> BivariateSignal {
    BivariateSignal::new(normals(rng, n), normals(rng, n)).unwrap()
}

pub fn random_columns(rng: &mut ChaCha8Rng, n: usize) -> ComplexColumns {
    [complex_normals(rng, n), complex_normals(rng, n)]
}

/// Positive gains with `g[k] = g[N-k]`, so the channel maps reals to reals.
pub fn symmetric_gains(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut g = vec![0.0; n];
    for k in 0..=n / 2 {
        let v = rng.gen_range(0.3..3.0);
        g[k] = v;
        g[(n - k) % n] = v;
    }
    g
}

/// A random problem and its dense twin.
pub struct Fixture {
    pub n: usize,
    pub problem: Problem,
    pub channels: Vec<(RMat, [f64; 2])>,
    pub phi: RMat,
    pub y: Vec<f64>,
}

impl Fixture {
    pub fn new(n: usize, d: usize, seed: u64) -> Self {
        let mut rng = rng(seed);
        let fourier = Fourier::new(n);
        let mut models = Vec::new();
        let mut channels = Vec::new();
        for _ in 0..d {
            let gains = symmetric_gains(&mut rng, n);
            let mixing = [rng.sample(StandardNormal), rng.sample(StandardNormal)];
            channels.push((oracle::circulant_real(&gains), mixing));
            models.push(ChannelModel::new(SpectralMultiplier::new(fourier.clone(), gains), mixing).unwrap());
        }
        let observations: Vec<Vec<f64>> = (0..d).map(|_| normals(&mut rng, n)).collect();
        let y = observations.concat();
        let problem = Problem::new(ForwardModel::new(models).unwrap(), observations).unwrap();
        let phi = oracle::forward_matrix(&channels);
        Self { n, problem, channels, phi, y }
    }

    /// Dense least-squares solution of the data term.
    pub fn least_squares(&self) -> Vec<f64> {
        oracle::least_squares(&self.phi, &self.y)
    }
}

pub fn stack(x: &BivariateSignal) -> Vec<f64> {
    x.u().iter().chain(x.v()).copied().collect()
}

pub fn unstack(v: &[f64]) -> BivariateSignal {
    let n = v.len() / 2;
    BivariateSignal::new(v[..n].to_vec(), v[n..].to_vec()).unwrap()
}

/// Packs complex columns as `[Re z0, Im z0, Re z1, Im z1]`.
pub fn pack(z: &ComplexColumns) -> Vec<f64> {
    z.iter().flat_map(|c| c.iter().map(|v| v.re).chain(c.iter().map(|v| v.im))).collect()
}

pub fn unpack(v: &[f64]) -> ComplexColumns {
    let n = v.len() / 4;
    [0, 1].map(|c| {
        let base = 2 * c * n;
        (0..n).map(|i| Complex64::new(v[base + i], v[base + n + i])).collect()
    })
}

pub fn dense_analytic(x: &[f64], h: &oracle::CMat) -> Vec<Complex64> {
    let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    oracle::cmatvec(h, &xc)
}

/// Dense operator and stacked observations of an arbitrary problem.
pub fn densify_problem(problem: &Problem) -> (RMat, Vec<f64>) {
    let channels: Vec<(RMat, [f64; 2])> = problem
        .model()
        .channels()
        .iter()
        .map(|c| (oracle::circulant_real(c.transform().gains()), c.mixing()))
        .collect();
    (oracle::forward_matrix(&channels), problem.observations().concat())
}

pub fn lagrangian_at(problem: &Problem, v: &[f64], z: &ComplexColumns, u: &ComplexColumns, cfg: &SolverConfig) -> f64 {
    augmented_lagrangian(problem, &unstack(v), z, u, cfg).unwrap()
}

fn coupling_term(a: &ComplexColumns, z: &ComplexColumns, u: &ComplexColumns, rho: f64) -> f64 {
    0.5 * rho
        * (0..2).map(|c| (0..a[c].len()).map(|i| (a[c][i] - z[c][i] + u[c][i]).norm_sqr()).sum::<f64>()).sum::<f64>()
}

/// `|D_v L|` in `X` against the sum of the magnitudes of its terms'
/// directional derivatives; vanishes at a stationary point.
pub fn stationarity_ratio_x(
    p: &Problem,
    x: &[f64],
    z: &ComplexColumns,
    u: &ComplexColumns,
    cfg: &SolverConfig,
    dir: &[f64],
) -> f64 {
    let h = 1e-5;
    let d = |f: &dyn Fn(&[f64]) -> f64| oracle::fd_directional(f, x, dir, h);
    let total = d(&|w| lagrangian_at(p, w, z, u, cfg));
    let f = d(&|w| data_misfit(p, unstack(w).columns()));
    let g1 = d(&|w| cfg.lambda1 * smoothness_penalty(unstack(w).columns()));
    let g2 = d(&|w| cfg.lambda2 * split_penalty(&p.analytic(unstack(w).columns()), z));
    let aug = d(&|w| coupling_term(&p.analytic(unstack(w).columns()), z, u, cfg.rho));
    total.abs() / (f.abs() + g1.abs() + g2.abs() + aug.abs())
}

/// Same measure in `Z` (real and imaginary parts as separate coordinates).
pub fn stationarity_ratio_z(
    p: &Problem,
    x: &BivariateSignal,
    z: &ComplexColumns,
    u: &ComplexColumns,
    cfg: &SolverConfig,
    dir: &[f64],
) -> f64 {
    let h = 1e-5;
    let a = p.analytic(x.columns());
    let zp = pack(z);
    let d = |f: &dyn Fn(&[f64]) -> f64| oracle::fd_directional(f, &zp, dir, h);
    let total = d(&|w| augmented_lagrangian(p, x, &unpack(w), u, cfg).unwrap());
    let g2 = d(&|w| cfg.lambda2 * split_penalty(&a, &unpack(w)));
    let aug = d(&|w| coupling_term(&a, &unpack(w), u, cfg.rho));
    total.abs() / (g2.abs() + aug.abs())
}
