//! Gaussian linear regression under Zellner's g-prior.
//!
//! With `beta | sigma2 ~ N(0, g sigma2 (X'X)^-1)` the coefficients integrate
//! out in closed form. Posterior predictive means are `H y` with the shrunken
//! projector `H = kappa P`, `P = X (X'X)^-1 X'`, `kappa = g / (g + 1)`, and
//!
//! ```text
//! log p(y | M) = -(n/2) log(2 pi sigma2) + (p/2) log(1 - kappa) - y'(I - H) y / (2 sigma2)
//! ```
//!
//! All logarithms are natural.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, ColumnBasis};

/// `kappa = g / (g + 1)`.
pub fn shrinkage(g: f64) -> Result<f64> {
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::InvalidShrinkage(g));
    }
    Ok(g / (g + 1.0))
}

/// `log(1 - kappa) = -log(1 + g)`, evaluated without cancellation for tiny `g`.
pub fn log_one_minus_kappa(g: f64) -> f64 {
    -g.ln_1p()
}

/// Exponent convention for the `(1 - kappa)` factor of the matrix-response marginal.
///
/// `Paper` uses `p/2`, so pairwise differences give `((p1 - p2)/2) log(1 - kappa)`.
/// `PerResponse` uses `pq/2`, the value implied by a matrix-normal g-prior on
/// the `p x q` coefficient matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KappaExponent {
    #[default]
    Paper,
    PerResponse,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Noise {
    /// Known scalar variance `sigma2` of a univariate response.
    Scalar(f64),
    /// Known `q x q` row covariance of a matrix response.
    Matrix(DMatrix<f64>),
}

#[derive(Debug, Clone)]
enum NoiseState {
    Scalar(f64),
    Matrix {
        cov: DMatrix<f64>,
        inv: DMatrix<f64>,
        log_det: f64,
    },
}

/// Response data: a vector for univariate models, an `n x q` matrix otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    Vector(DVector<f64>),
    Matrix(DMatrix<f64>),
}

impl Response {
    pub fn nrows(&self) -> usize {
        match self {
            Response::Vector(v) => v.len(),
            Response::Matrix(m) => m.nrows(),
        }
    }

    /// Rows selected by `indices`, in order.
    pub fn select_rows(&self, indices: &[usize]) -> Response {
        match self {
            Response::Vector(v) => Response::Vector(v.select_rows(indices)),
            Response::Matrix(m) => Response::Matrix(m.select_rows(indices)),
        }
    }
}

impl From<DVector<f64>> for Response {
    fn from(v: DVector<f64>) -> Self {
        Response::Vector(v)
    }
}

impl From<DMatrix<f64>> for Response {
    fn from(m: DMatrix<f64>) -> Self {
        Response::Matrix(m)
    }
}

/// A g-prior regression model with a full-column-rank design and known noise.
#[derive(Debug, Clone)]
pub struct RegressionModel {
    design: DMatrix<f64>,
    basis: ColumnBasis,
    noise: NoiseState,
    g: f64,
    kappa: f64,
    kappa_exponent: KappaExponent,
}

impl RegressionModel {
    pub fn new(design: DMatrix<f64>, noise: Noise, g: f64) -> Result<Self> {
        let kappa = shrinkage(g)?;
        let basis = linalg::column_basis(&design, "design matrix")?;
        let noise = match noise {
            Noise::Scalar(s2) => {
                if !(s2.is_finite() && s2 > 0.0) {
                    return Err(Error::InvalidVariance(s2));
                }
                NoiseState::Scalar(s2)
            }
            Noise::Matrix(cov) => {
                let (cov, l) = linalg::positive_definite(&cov, "noise covariance")?;
                let log_det = linalg::log_det_from_cholesky(&l);
                let inv = cov
                    .clone()
                    .cholesky()
                    .ok_or(Error::NotPositiveDefinite {
                        what: "noise covariance",
                    })?
                    .inverse();
                let inv = (&inv + inv.transpose()) * 0.5;
                NoiseState::Matrix { cov, inv, log_det }
            }
        };
        Ok(Self {
            design,
            basis,
            noise,
            g,
            kappa,
            kappa_exponent: KappaExponent::Paper,
        })
    }

    pub fn univariate(design: DMatrix<f64>, sigma2: f64, g: f64) -> Result<Self> {
        Self::new(design, Noise::Scalar(sigma2), g)
    }

    pub fn multivariate(design: DMatrix<f64>, sigma: DMatrix<f64>, g: f64) -> Result<Self> {
        Self::new(design, Noise::Matrix(sigma), g)
    }

    pub fn with_kappa_exponent(mut self, exponent: KappaExponent) -> Self {
        self.kappa_exponent = exponent;
        self
    }

    /// Same noise, `g` and conventions on the design rows picked by `indices`.
    pub fn with_rows(&self, indices: &[usize]) -> Result<Self> {
        let design = self.design.select_rows(indices);
        Ok(Self {
            basis: linalg::column_basis(&design, "resampled design matrix")?,
            design,
            noise: self.noise.clone(),
            g: self.g,
            kappa: self.kappa,
            kappa_exponent: self.kappa_exponent,
        })
    }

    pub fn n(&self) -> usize {
        self.design.nrows()
    }

    pub fn p(&self) -> usize {
        self.design.ncols()
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn kappa_exponent(&self) -> KappaExponent {
        self.kappa_exponent
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn is_multivariate(&self) -> bool {
        matches!(self.noise, NoiseState::Matrix { .. })
    }

    pub(crate) fn kind(&self) -> &'static str {
        if self.is_multivariate() {
            "multivariate"
        } else {
            "univariate"
        }
    }

    /// Response dimension `q` (1 for univariate models).
    pub fn response_dim(&self) -> usize {
        match &self.noise {
            NoiseState::Scalar(_) => 1,
            NoiseState::Matrix { cov, .. } => cov.nrows(),
        }
    }

    pub fn noise(&self) -> Noise {
        match &self.noise {
            NoiseState::Scalar(s) => Noise::Scalar(*s),
            NoiseState::Matrix { cov, .. } => Noise::Matrix(cov.clone()),
        }
    }

    pub fn noise_variance(&self) -> Option<f64> {
        match &self.noise {
            NoiseState::Scalar(s) => Some(*s),
            NoiseState::Matrix { .. } => None,
        }
    }

    pub fn noise_covariance(&self) -> Option<&DMatrix<f64>> {
        match &self.noise {
            NoiseState::Scalar(_) => None,
            NoiseState::Matrix { cov, .. } => Some(cov),
        }
    }

    pub(crate) fn noise_precision(&self) -> Option<&DMatrix<f64>> {
        match &self.noise {
            NoiseState::Scalar(_) => None,
            NoiseState::Matrix { inv, .. } => Some(inv),
        }
    }

    /// Orthonormal basis of the design column space.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis.q
    }

    /// `P m` for an `n x k` matrix `m`, without forming `P`.
    pub fn project(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let q = &self.basis.q;
        q * (q.transpose() * m)
    }

    /// `H m = kappa P m`.
    pub fn smooth(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        self.project(m) * self.kappa
    }

    pub fn smooth_vector(&self, y: &DVector<f64>) -> DVector<f64> {
        let q = &self.basis.q;
        (q * (q.transpose() * y)) * self.kappa
    }

    /// `Y'(I - H)Y` for an `n x k` response, as `R'R + (1 - kappa) C'C` with
    /// `C = Q'Y` and `R = Y - QC`.
    fn residual_gram(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        let q = &self.basis.q;
        let coords = q.transpose() * y;
        let resid = y - q * &coords;
        resid.transpose() * &resid + coords.transpose() * &coords * (1.0 - self.kappa)
    }

    fn kappa_power(&self) -> f64 {
        match self.kappa_exponent {
            KappaExponent::Paper => self.p() as f64,
            KappaExponent::PerResponse => (self.p() * self.response_dim()) as f64,
        }
    }
}

/// Shrunken least-squares projector `H = kappa P`.
#[derive(Debug, Clone, PartialEq)]
pub struct HatMatrix {
    pub matrix: DMatrix<f64>,
    pub kappa: f64,
    pub projection: DMatrix<f64>,
}

impl HatMatrix {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    /// `tr(H) = kappa p`, the effective degrees of freedom.
    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

pub fn hat_matrix(model: &RegressionModel) -> HatMatrix {
    let q = &model.basis.q;
    let projection = q * q.transpose();
    let projection = (&projection + projection.transpose()) * 0.5;
    HatMatrix {
        matrix: &projection * model.kappa,
        kappa: model.kappa,
        projection,
    }
}

fn check_rows(model: &RegressionModel, rows: usize) -> Result<()> {
    if rows != model.n() {
        return Err(Error::dims("response rows", model.n(), rows));
    }
    Ok(())
}

/// Posterior mean `kappa (X'X)^-1 X'y` of the coefficients.
pub fn posterior_mean(model: &RegressionModel, y: &DVector<f64>) -> Result<DVector<f64>> {
    check_rows(model, y.len())?;
    let b = &model.basis;
    let mut coords = b.q.transpose() * y;
    for (c, s) in coords.iter_mut().zip(b.singular_values.iter()) {
        *c /= *s;
    }
    Ok((&b.v * coords) * model.kappa)
}

/// Log marginal likelihood of a univariate response.
pub fn log_marginal(model: &RegressionModel, y: &DVector<f64>) -> Result<f64> {
    let sigma2 = match model.noise {
        NoiseState::Scalar(s) => s,
        NoiseState::Matrix { .. } => {
            return Err(Error::ModelKind {
                expected: "univariate",
                found: "multivariate",
            })
        }
    };
    check_rows(model, y.len())?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("response"));
    }
    let n = model.n() as f64;
    let p = model.p() as f64;
    let q = &model.basis.q;
    let coords = q.transpose() * y;
    let resid = y - q * &coords;
    let quad = resid.norm_squared() + (1.0 - model.kappa) * coords.norm_squared();
    Ok(-0.5 * n * (2.0 * PI * sigma2).ln() + 0.5 * p * log_one_minus_kappa(model.g) - quad / (2.0 * sigma2))
}

/// Log marginal likelihood of an `n x q` response with row covariance `Sigma`:
///
/// ```text
/// -(nq/2) log(2 pi) - (n/2) log|Sigma| + (p/2) log(1 - kappa) - tr(Y'(I - H) Y Sigma^-1) / 2
/// ```
///
/// The `(1 - kappa)` exponent follows the model's [`KappaExponent`].
pub fn log_marginal_mv(model: &RegressionModel, y: &DMatrix<f64>) -> Result<f64> {
    let (inv, log_det) = match &model.noise {
        NoiseState::Matrix { inv, log_det, .. } => (inv, *log_det),
        NoiseState::Scalar(_) => {
            return Err(Error::ModelKind {
                expected: "multivariate",
                found: "univariate",
            })
        }
    };
    check_rows(model, y.nrows())?;
    if y.ncols() != inv.nrows() {
        return Err(Error::dims("response columns", inv.nrows(), y.ncols()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("response"));
    }
    let n = model.n() as f64;
    let q = y.ncols() as f64;
    let gram = model.residual_gram(y);
    let quad = linalg::trace_of_product(&gram, inv);
    Ok(
        -0.5 * n * q * (2.0 * PI).ln() - 0.5 * n * log_det + 0.5 * model.kappa_power() * log_one_minus_kappa(model.g)
            - 0.5 * quad,
    )
}

/// Dispatches to [`log_marginal`] or [`log_marginal_mv`] by response shape.
pub fn log_marginal_response(model: &RegressionModel, y: &Response) -> Result<f64> {
    match (y, model.is_multivariate()) {
        (Response::Vector(v), false) => log_marginal(model, v),
        (Response::Matrix(m), true) => log_marginal_mv(model, m),
        (Response::Matrix(m), false) if m.ncols() == 1 => log_marginal(model, &m.column(0).into_owned()),
        (Response::Vector(_), true) => Err(Error::ModelKind {
            expected: "univariate",
            found: "multivariate",
        }),
        (Response::Matrix(_), false) => Err(Error::ModelKind {
            expected: "multivariate",
            found: "univariate",
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn col(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(v.len(), 1, v)
    }

    #[test]
    fn shrinkage_values() {
        assert_eq!(shrinkage(1.0).unwrap(), 0.5);
        assert_eq!(shrinkage(3.0).unwrap(), 0.75);
        assert!((shrinkage(0.25).unwrap() - 0.2).abs() < 1e-15);
        assert!(matches!(shrinkage(0.0), Err(Error::InvalidShrinkage(_))));
        assert!(matches!(shrinkage(-1.0), Err(Error::InvalidShrinkage(_))));
    }

    #[test]
    fn hat_matrix_small_cases() {
        let m = RegressionModel::univariate(col(&[1.0, 1.0]), 1.0, 1.0).unwrap();
        let h = hat_matrix(&m);
        for v in h.matrix.iter() {
            assert!((v - 0.25).abs() < 1e-15);
        }
        let sat = RegressionModel::univariate(DMatrix::identity(4, 4), 1.0, 3.0).unwrap();
        let h = hat_matrix(&sat);
        assert!((h.matrix - DMatrix::<f64>::identity(4, 4) * 0.75).abs().max() < 1e-14);
    }

    #[test]
    fn hat_matrix_is_shrunk_projector() {
        let x = DMatrix::from_fn(10, 3, |i, j| {
            ((i * 7 + j * 3) % 5) as f64 + (i as f64).sin() * (j + 1) as f64
        });
        let m = RegressionModel::univariate(x, 2.0, 4.0).unwrap();
        let h = hat_matrix(&m);
        assert!((h.projection.trace() - 3.0).abs() < 1e-10);
        assert!((&h.projection * &h.projection - &h.projection).abs().max() < 1e-10);
        assert!((h.trace() - 0.8 * 3.0).abs() < 1e-10);
        let eig = nalgebra::SymmetricEigen::new(h.matrix.clone());
        for e in eig.eigenvalues.iter() {
            assert!(e.abs() < 1e-8 || (e - 0.8).abs() < 1e-8, "eigenvalue {e}");
        }
    }

    #[test]
    fn posterior_mean_cases() {
        let m = RegressionModel::univariate(col(&[1.0, 1.0]), 1.0, 1.0).unwrap();
        let b = posterior_mean(&m, &DVector::from_vec(vec![2.0, 4.0])).unwrap();
        assert!((b[0] - 1.5).abs() < 1e-14);
        let zero = posterior_mean(&m, &DVector::zeros(2)).unwrap();
        assert_eq!(zero[0], 0.0);

        let x = DMatrix::from_fn(12, 3, |i, j| {
            (0.3 * (i + 1) as f64).powi(j as i32) + ((i * j) as f64).sin() * 0.1
        });
        let y = DVector::from_fn(12, |i, _| (i as f64 * 0.7).cos());
        let m = RegressionModel::univariate(x.clone(), 1.0, 5.0).unwrap();
        let b = posterior_mean(&m, &y).unwrap();
        let fitted = &x * b;
        let smoothed = &hat_matrix(&m).matrix * &y;
        assert!((fitted - smoothed).abs().max() < 1e-10);
        assert!(matches!(
            posterior_mean(&m, &DVector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn log_marginal_zero_response() {
        let m = RegressionModel::univariate(col(&[1.0]), 1.0, 1.0).unwrap();
        let lm = log_marginal(&m, &DVector::zeros(1)).unwrap();
        let expected = -0.5 * (2.0 * PI).ln() + 0.5 * 0.5f64.ln();
        assert!((lm - expected).abs() < 1e-14);
        assert!((lm - -1.26551).abs() < 1e-5);

        let x = DMatrix::from_fn(6, 2, |i, j| (i + j * j) as f64);
        let m = RegressionModel::univariate(x, 2.5, 9.0).unwrap();
        let lm = log_marginal(&m, &DVector::zeros(6)).unwrap();
        let expected = -3.0 * (2.0 * PI * 2.5).ln() + (0.1f64).ln();
        assert!((lm - expected).abs() < 1e-12);
    }

    #[test]
    fn kind_errors() {
        let uni = RegressionModel::univariate(col(&[1.0, 2.0]), 1.0, 1.0).unwrap();
        let mv = RegressionModel::multivariate(col(&[1.0, 2.0]), DMatrix::identity(2, 2), 1.0).unwrap();
        assert!(matches!(
            log_marginal(&mv, &DVector::zeros(2)),
            Err(Error::ModelKind { .. })
        ));
        assert!(matches!(
            log_marginal_mv(&uni, &DMatrix::zeros(2, 2)),
            Err(Error::ModelKind { .. })
        ));
        let not_pd = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            RegressionModel::multivariate(col(&[1.0, 2.0]), not_pd, 1.0),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(RegressionModel::univariate(col(&[1.0, 2.0]), 0.0, 1.0).is_err());
    }

    #[test]
    fn mv_reduces_to_univariate() {
        let x = DMatrix::from_fn(8, 2, |i, j| {
            ((i + 2) as f64).ln() * (j as f64 + 1.0) + (j * i % 3) as f64
        });
        let y = DVector::from_fn(8, |i, _| 0.3 * i as f64 - 1.0);
        let uni = RegressionModel::univariate(x.clone(), 1.7, 2.0).unwrap();
        let mv = RegressionModel::multivariate(x, DMatrix::from_element(1, 1, 1.7), 2.0).unwrap();
        let a = log_marginal(&uni, &y).unwrap();
        let b = log_marginal_mv(&mv, &DMatrix::from_column_slice(8, 1, y.as_slice())).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn mv_zero_response() {
        let x = DMatrix::from_fn(5, 2, |i, j| (i * (j + 1)) as f64 + 1.0 - j as f64);
        let sigma = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let m = RegressionModel::multivariate(x, sigma.clone(), 4.0).unwrap();
        let lm = log_marginal_mv(&m, &DMatrix::zeros(5, 2)).unwrap();
        let expected = -5.0 * (2.0 * PI).ln() - 2.5 * sigma.determinant().ln() + (0.2f64).ln();
        assert!((lm - expected).abs() < 1e-12);

        let pq = m.clone().with_kappa_exponent(KappaExponent::PerResponse);
        let lm_pq = log_marginal_mv(&pq, &DMatrix::zeros(5, 2)).unwrap();
        assert!((lm_pq - lm - (0.2f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn mv_difference_matches_bayes_factor_display() {
        // log B12 = ((p1 - p2)/2) log(1 - kappa) - tr(Y'(H2 - H1) Y Sigma^-1) / 2
        let n = 9;
        let x1 = DMatrix::from_fn(n, 3, |i, j| ((i * 3 + j * 5) % 7) as f64 - 3.0 + 0.1 * j as f64);
        let x2 = DMatrix::from_fn(n, 1, |i, _| (i as f64).sqrt());
        let sigma = DMatrix::from_row_slice(2, 2, &[1.5, -0.4, -0.4, 0.8]);
        let y = DMatrix::from_fn(n, 2, |i, j| ((i + 1) as f64 * (j + 2) as f64).sin() * 2.0);
        let g = 6.0;
        let m1 = RegressionModel::multivariate(x1, sigma.clone(), g).unwrap();
        let m2 = RegressionModel::multivariate(x2, sigma.clone(), g).unwrap();
        let diff = log_marginal_mv(&m1, &y).unwrap() - log_marginal_mv(&m2, &y).unwrap();
        let h1 = hat_matrix(&m1).matrix;
        let h2 = hat_matrix(&m2).matrix;
        let inv = sigma.try_inverse().unwrap();
        let display =
            (3.0 - 1.0) / 2.0 * (1.0 - g / (g + 1.0)).ln() - 0.5 * (y.transpose() * (h2 - h1) * &y * inv).trace();
        assert!((diff - display).abs() < 1e-10);
    }

    /// Log of the Gaussian density `N(y | mean, s2 I)`.
    fn log_normal_iso(y: &DVector<f64>, mean: &DVector<f64>, s2: f64) -> f64 {
        let n = y.len() as f64;
        -0.5 * n * (2.0 * PI * s2).ln() - (y - mean).norm_squared() / (2.0 * s2)
    }

    /// Trapezoid quadrature of `int N(y | X b, s2 I) N(b | 0, g s2 (X'X)^-1) db`
    /// over a box of +-10 posterior standard deviations, p <= 2.
    fn quadrature_log_marginal(x: &DMatrix<f64>, y: &DVector<f64>, s2: f64, g: f64) -> f64 {
        let p = x.ncols();
        let xtx = x.transpose() * x;
        let prior_cov = xtx.clone().try_inverse().unwrap() * (g * s2);
        let prior_prec = prior_cov.clone().try_inverse().unwrap();
        let log_prior_norm = -0.5 * p as f64 * (2.0 * PI).ln() - 0.5 * prior_cov.determinant().ln();
        let post_cov = (xtx / s2 + &prior_prec).try_inverse().unwrap();
        let post_mean = &post_cov * (x.transpose() * y) / s2;
        let sd: Vec<f64> = (0..p).map(|i| post_cov[(i, i)].sqrt()).collect();
        let steps = if p == 1 { 4001 } else { 601 };
        let half = 10.0;
        let h: Vec<f64> = sd.iter().map(|s| 2.0 * half * s / (steps - 1) as f64).collect();
        let log_integrand = |b: &DVector<f64>| {
            log_normal_iso(y, &(x * b), s2) + log_prior_norm - 0.5 * (b.transpose() * &prior_prec * b)[0]
        };
        let mut logs = Vec::new();
        let weight = |k: usize| -> f64 {
            if k == 0 || k == steps - 1 {
                0.5
            } else {
                1.0
            }
        };
        if p == 1 {
            for k in 0..steps {
                let b = DVector::from_element(1, post_mean[0] - half * sd[0] + k as f64 * h[0]);
                logs.push(log_integrand(&b) + weight(k).ln());
            }
        } else {
            for k in 0..steps {
                for l in 0..steps {
                    let b = DVector::from_vec(vec![
                        post_mean[0] - half * sd[0] + k as f64 * h[0],
                        post_mean[1] - half * sd[1] + l as f64 * h[1],
                    ]);
                    logs.push(log_integrand(&b) + (weight(k) * weight(l)).ln());
                }
            }
        }
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = logs.iter().map(|l| (l - max).exp()).sum();
        max + sum.ln() + h.iter().map(|v| v.ln()).sum::<f64>()
    }

    #[test]
    fn log_marginal_matches_quadrature() {
        let cases: [(usize, f64, f64); 3] = [(1, 1.3, 2.0), (2, 0.7, 10.0), (2, 2.0, 0.5)];
        for (case, &(p, s2, g)) in cases.iter().enumerate() {
            let n = 7;
            let x = DMatrix::from_fn(n, p, |i, j| {
                ((i as f64 + 1.0) * (j as f64 + 0.5) + case as f64).sin() + j as f64
            });
            let y = DVector::from_fn(n, |i, _| ((i * 13 + case) % 5) as f64 * 0.4 - 0.8);
            let m = RegressionModel::univariate(x.clone(), s2, g).unwrap();
            let closed = log_marginal(&m, &y).unwrap();
            let quad = quadrature_log_marginal(&x, &y, s2, g);
            assert!((closed - quad).abs() < 1e-4, "case {case}: {closed} vs {quad}");
        }
    }

    proptest! {
        #[test]
        fn log_marginal_invariant_to_orthonormal_reparameterization(
            xs in prop::collection::vec(-2.0..2.0f64, 30),
            ys in prop::collection::vec(-3.0..3.0f64, 10),
            angle in 0.0..std::f64::consts::TAU,
        ) {
            let x = DMatrix::from_column_slice(10, 3, &xs);
            prop_assume!(linalg::column_basis(&x, "x").map(|b| b.singular_values.min() > 1e-3).unwrap_or(false));
            let y = DVector::from_column_slice(&ys);
            let (c, s) = (angle.cos(), angle.sin());
            let rot = DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
            let m1 = RegressionModel::univariate(x.clone(), 1.3, 4.0).unwrap();
            let m2 = RegressionModel::univariate(x * rot, 1.3, 4.0).unwrap();
            let a = log_marginal(&m1, &y).unwrap();
            let b = log_marginal(&m2, &y).unwrap();
            prop_assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
        }

        #[test]
        fn log_marginal_decreases_in_residual_quadratic(
            xs in prop::collection::vec(-2.0..2.0f64, 16),
            ys in prop::collection::vec(-3.0..3.0f64, 8),
            scale in 1.01..3.0f64,
        ) {
            let x = DMatrix::from_column_slice(8, 2, &xs);
            prop_assume!(linalg::column_basis(&x, "x").is_ok());
            let y = DVector::from_column_slice(&ys);
            prop_assume!(y.norm() > 1e-6);
            let m = RegressionModel::univariate(x, 0.9, 2.0).unwrap();
            // scaling y multiplies y'(I - H)y by scale^2 > 1
            let a = log_marginal(&m, &y).unwrap();
            let b = log_marginal(&m, &(&y * scale)).unwrap();
            prop_assert!(b < a);
        }
    }
}
