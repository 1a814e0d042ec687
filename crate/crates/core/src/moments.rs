//! Sampling mean and variance of the log Bayes factor `log B12(y)` when the
//! data come from a fixed data-generating process (DGP).
//!
//! Three closed-form routes are provided:
//!
//! * [`bf_moments_equal_var`]: univariate models sharing a known variance
//!   `sigma2`, DGP noise `sigma*2 I`. Variance splits into a divergence term
//!   `(sigma*2/sigma2) ||mu1 - mu2||^2 / sigma2` and a non-shared degrees of
//!   freedom term `(sigma*2 / (sqrt(2) sigma2))^2 ||H1 - H2||_F^2`.
//! * [`bf_moments_general`]: univariate models with arbitrary known variances
//!   and an arbitrary DGP noise covariance, built from [`crate::quadform`].
//! * [`bf_moments_mv`]: matrix responses with a shared row covariance `Sigma`,
//!   where `Omega = Sigma^-1/2 Sigma* Sigma^-1/2` plays the role of the
//!   variance ratio.
//!
//! The equal-variance and general routes are algebraically independent; their
//! agreement is checked in the test suite.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gprior::{self, KappaExponent, RegressionModel, Response};
use crate::linalg;
use crate::quadform::{self, GaussianSpec, QuadForm};

const SAME_PARAM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum DgpMean {
    Vector(DVector<f64>),
    Matrix(DMatrix<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DgpNoise {
    /// `sigma*2 I_n`.
    Scalar(f64),
    /// Rows iid `N(0, Sigma*)` for an `n x q` response.
    Rows(DMatrix<f64>),
    /// Full `n x n` error covariance of a univariate response.
    General(DMatrix<f64>),
}

/// The true process `y = mu* + e*`. Only `mu*` and the noise enter the moment formulas.
#[derive(Debug, Clone)]
pub struct DataGeneratingProcess {
    mean: DgpMean,
    noise: DgpNoise,
    /// Lower Cholesky factor of the noise covariance (`Rows` and `General`).
    noise_factor: Option<DMatrix<f64>>,
}

impl DataGeneratingProcess {
    pub fn univariate(mean: DVector<f64>, sigma2: f64) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::InvalidVariance(sigma2));
        }
        check_finite_vec(&mean)?;
        Ok(Self {
            mean: DgpMean::Vector(mean),
            noise: DgpNoise::Scalar(sigma2),
            noise_factor: None,
        })
    }

    /// `y = X* beta* + e*`, `e* ~ N(0, sigma*2 I)`, with `X*` of full column rank.
    pub fn from_design(design: &DMatrix<f64>, beta: &DVector<f64>, sigma2: f64) -> Result<Self> {
        linalg::column_basis(design, "true design matrix")?;
        if beta.len() != design.ncols() {
            return Err(Error::dims("true coefficients", design.ncols(), beta.len()));
        }
        Self::univariate(design * beta, sigma2)
    }

    /// Univariate response with a general (e.g. heteroscedastic) `n x n` error covariance.
    pub fn heteroscedastic(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        check_finite_vec(&mean)?;
        let (cov, l) = linalg::positive_definite(&covariance, "true error covariance")?;
        if cov.nrows() != mean.len() {
            return Err(Error::dims("true error covariance", mean.len(), cov.nrows()));
        }
        Ok(Self {
            mean: DgpMean::Vector(mean),
            noise: DgpNoise::General(cov),
            noise_factor: Some(l),
        })
    }

    /// Matrix response `Y = mu* + E*` with rows of `E*` iid `N(0, Sigma*)`.
    pub fn multivariate(mean: DMatrix<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        linalg::check_finite(&mean, "true mean")?;
        let (cov, l) = linalg::positive_definite(&sigma, "true row covariance")?;
        if cov.nrows() != mean.ncols() {
            return Err(Error::dims("true row covariance", mean.ncols(), cov.nrows()));
        }
        Ok(Self {
            mean: DgpMean::Matrix(mean),
            noise: DgpNoise::Rows(cov),
            noise_factor: Some(l),
        })
    }

    pub fn multivariate_from_design(
        design: &DMatrix<f64>,
        coefficients: &DMatrix<f64>,
        sigma: DMatrix<f64>,
    ) -> Result<Self> {
        linalg::column_basis(design, "true design matrix")?;
        if coefficients.nrows() != design.ncols() {
            return Err(Error::dims("true coefficients", design.ncols(), coefficients.nrows()));
        }
        Self::multivariate(design * coefficients, sigma)
    }

    pub fn n(&self) -> usize {
        match &self.mean {
            DgpMean::Vector(v) => v.len(),
            DgpMean::Matrix(m) => m.nrows(),
        }
    }

    pub fn response_dim(&self) -> usize {
        match &self.mean {
            DgpMean::Vector(_) => 1,
            DgpMean::Matrix(m) => m.ncols(),
        }
    }

    pub fn mean(&self) -> &DgpMean {
        &self.mean
    }

    pub fn noise(&self) -> &DgpNoise {
        &self.noise
    }

    pub(crate) fn noise_factor(&self) -> Option<&DMatrix<f64>> {
        self.noise_factor.as_ref()
    }

    /// Same process with the noise variance replaced (scalar-noise processes only).
    pub fn with_sigma2(&self, sigma2: f64) -> Result<Self> {
        match &self.mean {
            DgpMean::Vector(v) if matches!(self.noise, DgpNoise::Scalar(_)) => Self::univariate(v.clone(), sigma2),
            _ => Err(Error::IncompatibleDgp("scalar noise required")),
        }
    }

    /// `mu*` as an `n x q` matrix (`q = 1` for vector means).
    pub fn mean_matrix(&self) -> DMatrix<f64> {
        match &self.mean {
            DgpMean::Vector(v) => DMatrix::from_column_slice(v.len(), 1, v.as_slice()),
            DgpMean::Matrix(m) => m.clone(),
        }
    }

    fn mean_vector(&self) -> Result<&DVector<f64>> {
        match &self.mean {
            DgpMean::Vector(v) => Ok(v),
            DgpMean::Matrix(_) => Err(Error::IncompatibleDgp("univariate mean required")),
        }
    }

    fn row_covariance(&self) -> Result<&DMatrix<f64>> {
        match &self.noise {
            DgpNoise::Rows(s) => Ok(s),
            _ => Err(Error::IncompatibleDgp("matrix response with row covariance required")),
        }
    }

    /// Noise covariance of a univariate response as an `n x n` matrix.
    fn univariate_covariance(&self) -> Result<DMatrix<f64>> {
        let n = self.n();
        match &self.noise {
            DgpNoise::Scalar(s) => Ok(DMatrix::identity(n, n) * *s),
            DgpNoise::General(c) => Ok(c.clone()),
            DgpNoise::Rows(_) => Err(Error::IncompatibleDgp("univariate noise required")),
        }
    }
}

fn check_finite_vec(v: &DVector<f64>) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("true mean"))
    }
}

/// Closed-form sampling moments of `log B12` with named summands.
///
/// `mean = kl_difference_term + complexity_penalty_term` and
/// `variance = divergence_term + nonshared_dof_term`. The KL part collects
/// everything driven by `mu*`; the complexity part is the remainder, which
/// depends on the model dimensions and the noise only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfMoments {
    pub mean: f64,
    pub variance: f64,
    pub kl_difference_term: f64,
    pub complexity_penalty_term: f64,
    pub divergence_term: f64,
    pub nonshared_dof_term: f64,
}

impl BfMoments {
    pub fn sd(&self) -> f64 {
        self.variance.max(0.0).sqrt()
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= SAME_PARAM_TOL * a.abs().max(b.abs())
}

fn check_pair(m1: &RegressionModel, m2: &RegressionModel, dgp: &DataGeneratingProcess) -> Result<()> {
    if m1.is_multivariate() != m2.is_multivariate() {
        return Err(Error::ModelKind {
            expected: m1.kind(),
            found: m2.kind(),
        });
    }
    if m1.n() != m2.n() {
        return Err(Error::dims("compared models", m1.n(), m2.n()));
    }
    if dgp.n() != m1.n() {
        return Err(Error::dims("data-generating process rows", m1.n(), dgp.n()));
    }
    if m1.response_dim() != m2.response_dim() {
        return Err(Error::dims("response dimension", m1.response_dim(), m2.response_dim()));
    }
    if dgp.response_dim() != m1.response_dim() {
        return Err(Error::dims(
            "data-generating process columns",
            m1.response_dim(),
            dgp.response_dim(),
        ));
    }
    Ok(())
}

fn check_same_g(m1: &RegressionModel, m2: &RegressionModel) -> Result<()> {
    if !close(m1.g(), m2.g()) {
        return Err(Error::UnequalShrinkage(m1.g(), m2.g()));
    }
    Ok(())
}

fn shared_variance(m1: &RegressionModel, m2: &RegressionModel) -> Result<f64> {
    match (m1.noise_variance(), m2.noise_variance()) {
        (Some(a), Some(b)) if close(a, b) => Ok(a),
        (Some(_), Some(_)) => Err(Error::UnequalVariances),
        _ => Err(Error::ModelKind {
            expected: "univariate",
            found: "multivariate",
        }),
    }
}

fn shared_covariance<'a>(m1: &'a RegressionModel, m2: &RegressionModel) -> Result<&'a DMatrix<f64>> {
    match (m1.noise_covariance(), m2.noise_covariance()) {
        (Some(a), Some(b)) => {
            let scale = linalg::max_abs(a).max(linalg::max_abs(b));
            if (a - b).abs().max() <= SAME_PARAM_TOL * scale {
                Ok(a)
            } else {
                Err(Error::UnequalVariances)
            }
        }
        _ => Err(Error::ModelKind {
            expected: "multivariate",
            found: "univariate",
        }),
    }
}

/// `log B12(y) = log p(y | M1) - log p(y | M2)`.
pub fn log_bf(m1: &RegressionModel, m2: &RegressionModel, y: &Response) -> Result<f64> {
    if m1.is_multivariate() != m2.is_multivariate() {
        return Err(Error::ModelKind {
            expected: m1.kind(),
            found: m2.kind(),
        });
    }
    if m1.n() != m2.n() {
        return Err(Error::dims("compared models", m1.n(), m2.n()));
    }
    Ok(gprior::log_marginal_response(m1, y)? - gprior::log_marginal_response(m2, y)?)
}

fn projected(model: &RegressionModel, dgp: &DataGeneratingProcess) -> Result<DMatrix<f64>> {
    if dgp.n() != model.n() {
        return Err(Error::dims("data-generating process rows", model.n(), dgp.n()));
    }
    Ok(model.smooth(&dgp.mean_matrix()))
}

/// `mu_i = H_i mu*`, the model's best shrunken approximation of the true mean.
pub fn projected_mean(model: &RegressionModel, dgp: &DataGeneratingProcess) -> Result<Response> {
    let m = projected(model, dgp)?;
    Ok(match dgp.mean() {
        DgpMean::Vector(_) => Response::Vector(m.column(0).into_owned()),
        DgpMean::Matrix(_) => Response::Matrix(m),
    })
}

/// `KL(M* || M_i)` between the true density and model `i` evaluated at `mu_i = H_i mu*`.
///
/// Univariate, `sigma*2 I` noise:
/// `-(n/2) log(sigma*2/sigma_i2) + (n/2) sigma*2/sigma_i2 + ||mu* - mu_i||^2 / (2 sigma_i2) - n/2`.
/// A general noise covariance `S` replaces the first two terms by the usual Gaussian
/// expressions in `tr(S)` and `log|S|`. Matrix responses use
/// `(n log(|Sigma_i|/|Sigma*|) - nq + n tr(Sigma_i^-1 Sigma*) + ||(mu* - mu_i) Sigma_i^-1/2||_F^2) / 2`.
pub fn kl_dgp_to_model(model: &RegressionModel, dgp: &DataGeneratingProcess) -> Result<f64> {
    let mu = dgp.mean_matrix();
    let resid = &mu - projected(model, dgp)?;
    let n = model.n() as f64;
    if let Some(s2) = model.noise_variance() {
        if dgp.response_dim() != 1 {
            return Err(Error::IncompatibleDgp("univariate mean required"));
        }
        let dist = resid.norm_squared();
        match dgp.noise() {
            DgpNoise::Scalar(t2) => {
                let ratio = t2 / s2;
                Ok(-0.5 * n * ratio.ln() + 0.5 * n * ratio + 0.5 * dist / s2 - 0.5 * n)
            }
            DgpNoise::General(cov) => {
                let l = dgp.noise_factor().expect("general noise has a factor");
                let log_det = linalg::log_det_from_cholesky(l);
                Ok(0.5 * (cov.trace() / s2 - n + n * s2.ln() - log_det + dist / s2))
            }
            DgpNoise::Rows(_) => Err(Error::IncompatibleDgp("univariate noise required")),
        }
    } else {
        let sigma = model.noise_covariance().expect("multivariate model");
        let prec = model.noise_precision().expect("multivariate model");
        let sigma_star = dgp.row_covariance()?;
        if sigma_star.nrows() != sigma.nrows() {
            return Err(Error::dims("true row covariance", sigma.nrows(), sigma_star.nrows()));
        }
        let q = sigma.nrows() as f64;
        let l = sigma.clone().cholesky().ok_or(Error::NotPositiveDefinite {
            what: "noise covariance",
        })?;
        let log_det_model = linalg::log_det_from_cholesky(&l.l());
        let log_det_true = linalg::log_det_from_cholesky(dgp.noise_factor().expect("rows noise"));
        let mahalanobis = linalg::trace_of_product(&(resid.transpose() * &resid), prec);
        Ok(0.5
            * (n * (log_det_model - log_det_true) - n * q
                + n * linalg::trace_of_product(prec, sigma_star)
                + mahalanobis))
    }
}

/// `KL(M1(mu_1) || M2(mu_2)) = ||mu_1 - mu_2||^2 / (2 sigma2)` for models sharing
/// `sigma2` (Mahalanobis norm in `Sigma` for matrix responses).
pub fn kl_between_models(m1: &RegressionModel, m2: &RegressionModel, dgp: &DataGeneratingProcess) -> Result<f64> {
    check_pair(m1, m2, dgp)?;
    let diff = projected(m1, dgp)? - projected(m2, dgp)?;
    if m1.is_multivariate() {
        shared_covariance(m1, m2)?;
        let prec = m1.noise_precision().expect("multivariate model");
        Ok(0.5 * linalg::trace_of_product(&(diff.transpose() * &diff), prec))
    } else {
        let s2 = shared_variance(m1, m2)?;
        Ok(diff.norm_squared() / (2.0 * s2))
    }
}

/// Triangle-inequality bound on how far apart the two best approximations can be.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceBound {
    /// `||mu_1 - mu_2||^2`.
    pub distance_sq: f64,
    /// `(||mu* - mu_1|| + ||mu* - mu_2||)^2`; equals `4 ||mu* - mu_i||^2` under
    /// equal misspecification.
    pub bound: f64,
    pub holds: bool,
}

pub fn divergence_bound(
    m1: &RegressionModel,
    m2: &RegressionModel,
    dgp: &DataGeneratingProcess,
) -> Result<DivergenceBound> {
    check_pair(m1, m2, dgp)?;
    let mu = dgp.mean_matrix();
    let fit1 = projected(m1, dgp)?;
    let fit2 = projected(m2, dgp)?;
    let d1 = (&mu - &fit1).norm();
    let d2 = (&mu - &fit2).norm();
    let distance_sq = (fit1 - fit2).norm_squared();
    let bound = (d1 + d2) * (d1 + d2);
    // rounding slack for the m1 == m2 and collinear cases
    let holds = distance_sq <= bound * (1.0 + 1e-12) + 1e-300;
    Ok(DivergenceBound {
        distance_sq,
        bound,
        holds,
    })
}

/// Sampling moments of `log B12` for univariate models with a common known
/// variance `sigma2` and DGP noise `sigma*2 I`:
///
/// ```text
/// E   = (KL2 - KL1)/(2 - kappa) + ((p1 - p2)/2) (log(1 - kappa) + kappa sigma*2/sigma2)
/// Var = (sigma*2/sigma2) ||mu_1 - mu_2||^2 / sigma2 + (sigma*2 / (sqrt(2) sigma2))^2 ||H1 - H2||_F^2
/// ```
pub fn bf_moments_equal_var(
    m1: &RegressionModel,
    m2: &RegressionModel,
    dgp: &DataGeneratingProcess,
) -> Result<BfMoments> {
    check_pair(m1, m2, dgp)?;
    check_same_g(m1, m2)?;
    let sigma2 = shared_variance(m1, m2)?;
    let sigma_star2 = match dgp.noise() {
        DgpNoise::Scalar(s) => *s,
        _ => {
            return Err(Error::IncompatibleDgp(
                "equal-variance path needs isotropic noise; use the general path",
            ))
        }
    };
    let mu = dgp.mean_vector()?;
    let kappa = m1.kappa();
    let fit1 = m1.smooth_vector(mu);
    let fit2 = m2.smooth_vector(mu);

    // With sigma_1 = sigma_2 every term of KL2 - KL1 except the distances cancels.
    let kl_diff = 0.5 * ((mu - &fit2).norm_squared() - (mu - &fit1).norm_squared()) / sigma2;
    let kl_difference_term = kl_diff / (2.0 - kappa);
    let dp = m1.p() as f64 - m2.p() as f64;
    let complexity_penalty_term = 0.5 * dp * (gprior::log_one_minus_kappa(m1.g()) + kappa * sigma_star2 / sigma2);

    let dist = (&fit1 - &fit2).norm_squared();
    let hat_gap = linalg::frobenius_sq(&(gprior::hat_matrix(m1).matrix - gprior::hat_matrix(m2).matrix));
    let sigma4 = sigma2 * sigma2;
    let divergence_term = sigma_star2 * dist / sigma4;
    let nonshared_dof_term = sigma_star2 * sigma_star2 * hat_gap / (2.0 * sigma4);

    Ok(BfMoments {
        mean: kl_difference_term + complexity_penalty_term,
        variance: divergence_term + nonshared_dof_term,
        kl_difference_term,
        complexity_penalty_term,
        divergence_term,
        nonshared_dof_term,
    })
}

/// Sampling moments of `log B12` for univariate models with possibly different
/// known variances and any DGP noise covariance `S` (isotropic or general).
///
/// Writes `log B12 = (n/2) log(s2^2/s1^2) + ((p1 - p2)/2) log(1 - kappa) + y'A2 y - y'A1 y`
/// with `A_i = (I - H_i)/(2 sigma_i2)` and evaluates the moments of the two
/// quadratic forms under `y ~ N(mu*, S)`.
pub fn bf_moments_general(
    m1: &RegressionModel,
    m2: &RegressionModel,
    dgp: &DataGeneratingProcess,
) -> Result<BfMoments> {
    check_pair(m1, m2, dgp)?;
    check_same_g(m1, m2)?;
    let (s1, s2) = match (m1.noise_variance(), m2.noise_variance()) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::ModelKind {
                expected: "univariate",
                found: "multivariate",
            })
        }
    };
    let n = m1.n();
    let spec = GaussianSpec::new(dgp.mean_vector()?.clone(), dgp.univariate_covariance()?)?;
    let residual_form = |m: &RegressionModel, s: f64| {
        let h = gprior::hat_matrix(m).matrix;
        QuadForm::new((DMatrix::identity(n, n) - h) / (2.0 * s))
    };
    let a1 = residual_form(m1, s1)?;
    let a2 = residual_form(m2, s2)?;

    let constant =
        0.5 * n as f64 * (s2 / s1).ln() + 0.5 * (m1.p() as f64 - m2.p() as f64) * gprior::log_one_minus_kappa(m1.g());
    let mean = constant + quadform::quad_mean(&a2, &spec)? - quadform::quad_mean(&a1, &spec)?;
    // Var(y'A2 y) + Var(y'A1 y) - 2 Cov(y'A2 y, y'A1 y) = Var(y'(A2 - A1) y) by
    // bilinearity; the difference form avoids cancellation when the two are close.
    let gap = QuadForm::new(a2.matrix() - a1.matrix())?;
    let (nonshared_dof_term, divergence_term) = quadform::quad_cov_parts(&gap, &gap, &spec)?;
    let variance = nonshared_dof_term + divergence_term;

    let mu = spec.mean();
    let kl_difference_term = (a2.matrix() * mu).dot(mu) - (a1.matrix() * mu).dot(mu);
    let cov = spec.covariance();
    let complexity_penalty_term =
        constant + linalg::trace_of_product(a2.matrix(), cov) - linalg::trace_of_product(a1.matrix(), cov);

    Ok(BfMoments {
        mean,
        variance,
        kl_difference_term,
        complexity_penalty_term,
        divergence_term,
        nonshared_dof_term,
    })
}

/// `Omega = Sigma^-1/2 Sigma* Sigma^-1/2` with the symmetric inverse square root.
pub fn omega(model: &RegressionModel, dgp: &DataGeneratingProcess) -> Result<DMatrix<f64>> {
    let sigma = model.noise_covariance().ok_or(Error::ModelKind {
        expected: "multivariate",
        found: "univariate",
    })?;
    let sigma_star = dgp.row_covariance()?;
    if sigma.nrows() != sigma_star.nrows() {
        return Err(Error::dims("true row covariance", sigma.nrows(), sigma_star.nrows()));
    }
    Ok(omega_of(sigma, sigma_star))
}

fn omega_of(sigma: &DMatrix<f64>, sigma_star: &DMatrix<f64>) -> DMatrix<f64> {
    let root = linalg::sym_power(sigma, -0.5);
    let om = &root * sigma_star * &root;
    (&om + om.transpose()) * 0.5
}

/// Sampling moments of `log B12` for matrix responses with a shared row covariance `Sigma`:
///
/// ```text
/// E   = (KL2 - KL1)/(2 - kappa) + ((p1 - p2)/2) (log(1 - kappa) + kappa tr(Sigma^-1 Sigma*))
/// Var = tr(Omega^2) ||H2 - H1||_F^2 / 2 + ||(mu_2 - mu_1) Sigma^-1/2 Omega^1/2||_F^2
/// ```
///
/// With [`KappaExponent::PerResponse`] the `log(1 - kappa)` coefficient is multiplied by `q`.
pub fn bf_moments_mv(m1: &RegressionModel, m2: &RegressionModel, dgp: &DataGeneratingProcess) -> Result<BfMoments> {
    check_pair(m1, m2, dgp)?;
    check_same_g(m1, m2)?;
    if m1.kappa_exponent() != m2.kappa_exponent() {
        return Err(Error::UnequalKappaExponent);
    }
    let sigma = shared_covariance(m1, m2)?;
    let sigma_star = dgp.row_covariance()?;
    let prec = m1.noise_precision().expect("multivariate model");
    let q = sigma.nrows();
    let kappa = m1.kappa();
    let mu = dgp.mean_matrix();
    let fit1 = m1.smooth(&mu);
    let fit2 = m2.smooth(&mu);

    let mahalanobis = |r: &DMatrix<f64>| linalg::trace_of_product(&(r.transpose() * r), prec);
    let kl_diff = 0.5 * (mahalanobis(&(&mu - &fit2)) - mahalanobis(&(&mu - &fit1)));
    let kl_difference_term = kl_diff / (2.0 - kappa);

    let dp = m1.p() as f64 - m2.p() as f64;
    let log_coef = match m1.kappa_exponent() {
        KappaExponent::Paper => 1.0,
        KappaExponent::PerResponse => q as f64,
    };
    let ratio_trace = linalg::trace_of_product(prec, sigma_star);
    let complexity_penalty_term = 0.5 * dp * (log_coef * gprior::log_one_minus_kappa(m1.g()) + kappa * ratio_trace);

    let om = omega_of(sigma, sigma_star);
    let hat_gap = linalg::frobenius_sq(&(gprior::hat_matrix(m2).matrix - gprior::hat_matrix(m1).matrix));
    let nonshared_dof_term = 0.5 * linalg::frobenius_sq(&om) * hat_gap;
    let scaled = (&fit2 - &fit1) * linalg::sym_power(sigma, -0.5) * linalg::sym_power(&om, 0.5);
    let divergence_term = scaled.norm_squared();

    Ok(BfMoments {
        mean: kl_difference_term + complexity_penalty_term,
        variance: divergence_term + nonshared_dof_term,
        kl_difference_term,
        complexity_penalty_term,
        divergence_term,
        nonshared_dof_term,
    })
}

/// Decomposition of the multivariate divergence term along the principal
/// directions of `Sigma = U L U'` and `Sigma* = U* L* U*'`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentDecomposition {
    /// `L^-1/2 U' U* L*^1/2`; entry `(i, j)` is `sqrt(l*_j / l_i) cos(angle(u_i, u*_j))`.
    pub alignment: DMatrix<f64>,
    /// `Z = (mu_2 - mu_1) U L^-1/2`: prediction differences along the
    /// principal directions of `Sigma`, rescaled to unit variance.
    pub scaled_differences: DMatrix<f64>,
    /// `C_ij = M_ij (Z'Z M)_ij` with `M` the alignment matrix; entries sum to
    /// `||Z M||_F^2`, the divergence term of the variance.
    pub contributions: DMatrix<f64>,
    pub eigenvalues: DVector<f64>,
    pub true_eigenvalues: DVector<f64>,
}

impl AlignmentDecomposition {
    pub fn total(&self) -> f64 {
        self.contributions.sum()
    }
}

pub fn alignment_decomposition(
    m1: &RegressionModel,
    m2: &RegressionModel,
    dgp: &DataGeneratingProcess,
) -> Result<AlignmentDecomposition> {
    check_pair(m1, m2, dgp)?;
    let sigma = shared_covariance(m1, m2)?;
    let sigma_star = dgp.row_covariance()?;
    let (lam, u) = linalg::sorted_eigen(sigma);
    let (lam_star, u_star) = linalg::sorted_eigen(sigma_star);
    let q = lam.len();
    let mut alignment = u.transpose() * &u_star;
    for i in 0..q {
        for j in 0..q {
            alignment[(i, j)] *= (lam_star[j].max(0.0) / lam[i]).sqrt();
        }
    }
    let mu = dgp.mean_matrix();
    let mut z = (m2.smooth(&mu) - m1.smooth(&mu)) * &u;
    for (i, l) in lam.iter().enumerate() {
        z.column_mut(i).scale_mut(1.0 / l.sqrt());
    }
    let gram_m = z.transpose() * &z * &alignment;
    let contributions = alignment.component_mul(&gram_m);
    Ok(AlignmentDecomposition {
        alignment,
        scaled_differences: z,
        contributions,
        eigenvalues: lam,
        true_eigenvalues: lam_star,
    })
}
