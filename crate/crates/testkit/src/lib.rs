//! Random instance generators shared by the integration and acceptance tests.

use bfvar::moments::DataGeneratingProcess;
use bfvar::{ModelSet, RegressionModel};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// `|a - b| <= tol * max(|a|, |b|)`.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// `n x n` orthogonal matrix from the QR factorization of a Gaussian matrix.
pub fn orthogonal(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    gaussian(rng, n, n).qr().q()
}

/// Invertible `p x p` matrix with condition number at most 4.
pub fn well_conditioned(rng: &mut impl Rng, p: usize) -> DMatrix<f64> {
    let d = DVector::from_fn(p, |_, _| rng.random_range(0.5..2.0));
    orthogonal(rng, p) * DMatrix::from_diagonal(&d) * orthogonal(rng, p)
}

/// Random symmetric positive definite `q x q` matrix with eigenvalues in `[0.3, 3]`.
pub fn random_spd(rng: &mut impl Rng, q: usize) -> DMatrix<f64> {
    let u = orthogonal(rng, q);
    let d = DVector::from_fn(q, |_, _| rng.random_range(0.3..3.0));
    let m = &u * DMatrix::from_diagonal(&d) * u.transpose();
    (&m + m.transpose()) * 0.5
}

/// Two Gaussian designs sharing their first `shared` columns exactly, in shuffled column order.
pub fn design_pair(rng: &mut impl Rng, n: usize, p1: usize, p2: usize, shared: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    assert!(shared <= p1.min(p2));
    let pool = gaussian(rng, n, p1 + p2 - shared);
    let mut c1: Vec<usize> = (0..p1).collect();
    let mut c2: Vec<usize> = (0..shared).chain(p1..p1 + p2 - shared).collect();
    c1.shuffle(rng);
    c2.shuffle(rng);
    (pool.select_columns(&c1), pool.select_columns(&c2))
}

/// Designs whose column spaces are orthogonal, each multiplied by a random invertible matrix.
pub fn orthogonal_pair(rng: &mut impl Rng, n: usize, p1: usize, p2: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let q = orthogonal(rng, n);
    let a = q.columns(0, p1) * well_conditioned(rng, p1);
    let b = q.columns(p1, p2) * well_conditioned(rng, p2);
    (a, b)
}

/// A true mean partly explained by both designs plus an unexplained component.
pub fn mean_near(rng: &mut impl Rng, x1: &DMatrix<f64>, x2: &DMatrix<f64>, scale: f64) -> DVector<f64> {
    let n = x1.nrows();
    let b1 = gaussian_vector(rng, x1.ncols()) / (x1.ncols() as f64).sqrt();
    let b2 = gaussian_vector(rng, x2.ncols()) / (x2.ncols() as f64).sqrt();
    (x1 * b1 + x2 * b2 + gaussian_vector(rng, n)) * scale
}

pub struct Instance {
    pub x1: DMatrix<f64>,
    pub x2: DMatrix<f64>,
    pub m1: RegressionModel,
    pub m2: RegressionModel,
    pub dgp: DataGeneratingProcess,
}

#[derive(Debug, Clone, Copy)]
pub struct UnivariateSpec {
    pub n: usize,
    pub p1: usize,
    pub p2: usize,
    pub shared: usize,
    pub sigma2_1: f64,
    pub sigma2_2: f64,
    pub sigma_star2: f64,
    pub g: f64,
    pub mean_scale: f64,
}

impl UnivariateSpec {
    /// Random dimensions and parameters in the ranges used by the oracle suites.
    pub fn random(rng: &mut impl Rng, n_range: std::ops::RangeInclusive<usize>, max_p: usize) -> Self {
        let n = rng.random_range(n_range);
        let p1 = rng.random_range(1..=max_p);
        let p2 = rng.random_range(1..=max_p);
        let mut shared = rng.random_range(0..=p1.min(p2));
        if shared == p1 && shared == p2 {
            // identical column spaces make every moment zero up to rounding
            shared -= 1;
        }
        let sigma2 = rng.random_range(0.5..2.0);
        let ratio = [0.5, 1.0, 2.0][rng.random_range(0..3)];
        let g = [1.0, 10.0][rng.random_range(0..2)];
        Self {
            n,
            p1,
            p2,
            shared,
            sigma2_1: sigma2,
            sigma2_2: sigma2,
            sigma_star2: ratio * ratio * sigma2,
            g,
            mean_scale: rng.random_range(0.1..0.4),
        }
    }

    pub fn build(&self, rng: &mut impl Rng) -> Instance {
        let (x1, x2) = design_pair(rng, self.n, self.p1, self.p2, self.shared);
        let mu = mean_near(rng, &x1, &x2, self.mean_scale);
        Instance {
            m1: RegressionModel::univariate(x1.clone(), self.sigma2_1, self.g).unwrap(),
            m2: RegressionModel::univariate(x2.clone(), self.sigma2_2, self.g).unwrap(),
            dgp: DataGeneratingProcess::univariate(mu, self.sigma_star2).unwrap(),
            x1,
            x2,
        }
    }
}

pub struct MvInstance {
    pub m1: RegressionModel,
    pub m2: RegressionModel,
    pub dgp: DataGeneratingProcess,
}

/// Matrix-response instance with `Sigma != Sigma*`.
pub fn mv_instance(rng: &mut impl Rng, n: usize, q: usize, p1: usize, p2: usize, shared: usize, g: f64) -> MvInstance {
    let (x1, x2) = design_pair(rng, n, p1, p2, shared);
    let sigma = random_spd(rng, q);
    let sigma_star = random_spd(rng, q);
    let mut mean = DMatrix::zeros(n, q);
    for j in 0..q {
        mean.set_column(j, &mean_near(rng, &x1, &x2, 0.25));
    }
    MvInstance {
        m1: RegressionModel::multivariate(x1, sigma.clone(), g).unwrap(),
        m2: RegressionModel::multivariate(x2, sigma, g).unwrap(),
        dgp: DataGeneratingProcess::multivariate(mean, sigma_star).unwrap(),
    }
}

/// Two single-regressor models on orthogonal indicators (first and second half
/// of `n = 100` rows), a constant true mean equidistant from both, model noise
/// variance 1 and true noise variance 4.
pub struct Overconfident {
    pub set: ModelSet,
    pub dgp: DataGeneratingProcess,
}

pub const OVERCONFIDENT_N: usize = 100;

pub fn overconfident(level: f64, g: f64) -> Overconfident {
    let n = OVERCONFIDENT_N;
    let half = n / 2;
    let x1 = DMatrix::from_fn(n, 1, |i, _| if i < half { 1.0 } else { 0.0 });
    let x2 = DMatrix::from_fn(n, 1, |i, _| if i < half { 0.0 } else { 1.0 });
    let mu = DVector::from_element(n, level / (half as f64).sqrt());
    Overconfident {
        set: ModelSet::uniform(vec![
            ("first".into(), RegressionModel::univariate(x1, 1.0, g).unwrap()),
            ("second".into(), RegressionModel::univariate(x2, 1.0, g).unwrap()),
        ])
        .unwrap(),
        dgp: DataGeneratingProcess::univariate(mu, 4.0).unwrap(),
    }
}
