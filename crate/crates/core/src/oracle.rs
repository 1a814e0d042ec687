//! Monte Carlo ground truth for the closed-form moments of `log B12`.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gprior::{RegressionModel, Response};
use crate::moments::{self, BfMoments, DataGeneratingProcess, DgpMean, DgpNoise};
use crate::posterior::{self, ModelSet};
use crate::resample::PmpMatrix;
use crate::rng;

pub const MIN_SIMULATIONS: usize = 1000;
pub const DEFAULT_SIMULATIONS: usize = 200_000;

/// Draws one dataset `y = mu* + e*` from the process.
pub fn simulate_dgp<R: Rng + ?Sized>(dgp: &DataGeneratingProcess, rng: &mut R) -> Response {
    let n = dgp.n();
    match (dgp.mean(), dgp.noise()) {
        (DgpMean::Vector(mu), DgpNoise::Scalar(s2)) => {
            Response::Vector(mu + rng::standard_normal_vector(rng, n) * s2.sqrt())
        }
        (DgpMean::Vector(mu), DgpNoise::General(_)) => {
            let l = dgp.noise_factor().expect("general noise has a factor");
            Response::Vector(mu + l * rng::standard_normal_vector(rng, n))
        }
        (DgpMean::Matrix(mu), DgpNoise::Rows(_)) => {
            let l = dgp.noise_factor().expect("row noise has a factor");
            Response::Matrix(mu + rng::standard_normal_matrix(rng, n, mu.ncols()) * l.transpose())
        }
        (DgpMean::Matrix(mu), DgpNoise::Scalar(s2)) => {
            Response::Matrix(mu + rng::standard_normal_matrix(rng, n, mu.ncols()) * s2.sqrt())
        }
        (DgpMean::Vector(_), DgpNoise::Rows(_)) | (DgpMean::Matrix(_), DgpNoise::General(_)) => {
            unreachable!("constructors pair means and noise consistently")
        }
    }
}

/// Which closed form an oracle run is scored against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentPath {
    EqualVariance,
    General,
    Multivariate,
}

impl MomentPath {
    /// Multivariate for matrix responses, equal-variance when both models share
    /// `sigma2` under isotropic noise, general otherwise.
    pub fn select(m1: &RegressionModel, m2: &RegressionModel, dgp: &DataGeneratingProcess) -> Self {
        if m1.is_multivariate() {
            return MomentPath::Multivariate;
        }
        match (m1.noise_variance(), m2.noise_variance(), dgp.noise()) {
            (Some(a), Some(b), DgpNoise::Scalar(_)) if a == b => MomentPath::EqualVariance,
            _ => MomentPath::General,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MomentPath::EqualVariance => "equal_variance",
            MomentPath::General => "general",
            MomentPath::Multivariate => "multivariate",
        }
    }

    pub fn closed_form(
        self,
        m1: &RegressionModel,
        m2: &RegressionModel,
        dgp: &DataGeneratingProcess,
    ) -> Result<BfMoments> {
        match self {
            MomentPath::EqualVariance => moments::bf_moments_equal_var(m1, m2, dgp),
            MomentPath::General => moments::bf_moments_general(m1, m2, dgp),
            MomentPath::Multivariate => moments::bf_moments_mv(m1, m2, dgp),
        }
    }
}

/// Sample mean and unbiased variance with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMoments {
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    /// From the fourth central moment: `sqrt((m4 - (m-3)/(m-1) s^4) / m)`.
    pub se_variance: f64,
    pub count: usize,
}

pub fn sample_moments(values: &[f64]) -> SampleMoments {
    let m = values.len();
    let mf = m as f64;
    let mean = values.iter().sum::<f64>() / mf;
    let (mut s2, mut s4) = (0.0, 0.0);
    for v in values {
        let d = v - mean;
        let d2 = d * d;
        s2 += d2;
        s4 += d2 * d2;
    }
    let variance = if m > 1 { s2 / (mf - 1.0) } else { 0.0 };
    let m4 = s4 / mf;
    let se_variance = if m > 1 {
        ((m4 - (mf - 3.0) / (mf - 1.0) * variance * variance) / mf)
            .max(0.0)
            .sqrt()
    } else {
        0.0
    };
    SampleMoments {
        mean,
        variance,
        se_mean: (variance / mf).sqrt(),
        se_variance,
        count: m,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub empirical_mean: f64,
    pub empirical_var: f64,
    pub se_mean: f64,
    pub se_var: f64,
    pub closed_mean: f64,
    pub closed_var: f64,
    /// `(empirical - closed) / se`, or 0 when the standard error vanishes.
    pub z_mean: f64,
    pub z_var: f64,
    pub n_sims: usize,
    pub seed: u64,
    pub path: MomentPath,
}

fn z_score(empirical: f64, closed: f64, se: f64) -> f64 {
    if se > 0.0 {
        (empirical - closed) / se
    } else {
        0.0
    }
}

impl OracleReport {
    /// The same simulations scored against other closed-form values.
    pub fn rescore(&self, closed_mean: f64, closed_var: f64) -> Self {
        Self {
            closed_mean,
            closed_var,
            z_mean: z_score(self.empirical_mean, closed_mean, self.se_mean),
            z_var: z_score(self.empirical_var, closed_var, self.se_var),
            ..*self
        }
    }

    pub fn passes(&self, z_limit: f64) -> bool {
        self.z_mean.abs() < z_limit && self.z_var.abs() < z_limit
    }
}

/// `log B12` on `n_sims` datasets drawn from the process, in simulation order.
pub fn simulate_log_bf(
    dgp: &DataGeneratingProcess,
    m1: &RegressionModel,
    m2: &RegressionModel,
    n_sims: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if dgp.n() != m1.n() {
        return Err(Error::dims("data-generating process rows", m1.n(), dgp.n()));
    }
    (0..n_sims)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, rng::domain::SIMULATE, i as u64);
            let y = simulate_dgp(dgp, &mut r);
            moments::log_bf(m1, m2, &y)
        })
        .collect()
}

pub fn empirical_bf_moments(
    dgp: &DataGeneratingProcess,
    m1: &RegressionModel,
    m2: &RegressionModel,
    n_sims: usize,
    seed: u64,
) -> Result<OracleReport> {
    empirical_bf_moments_with(dgp, m1, m2, n_sims, seed, MomentPath::select(m1, m2, dgp))
}

pub fn empirical_bf_moments_with(
    dgp: &DataGeneratingProcess,
    m1: &RegressionModel,
    m2: &RegressionModel,
    n_sims: usize,
    seed: u64,
    path: MomentPath,
) -> Result<OracleReport> {
    if n_sims < MIN_SIMULATIONS {
        return Err(Error::TooFewSimulations {
            min: MIN_SIMULATIONS,
            got: n_sims,
        });
    }
    let closed = path.closed_form(m1, m2, dgp)?;
    let values = simulate_log_bf(dgp, m1, m2, n_sims, seed)?;
    let s = sample_moments(&values);
    let report = OracleReport {
        empirical_mean: s.mean,
        empirical_var: s.variance,
        se_mean: s.se_mean,
        se_var: s.se_variance,
        closed_mean: 0.0,
        closed_var: 0.0,
        z_mean: 0.0,
        z_var: 0.0,
        n_sims,
        seed,
        path,
    };
    Ok(report.rescore(closed.mean, closed.variance))
}

/// Posterior model probabilities on `n_sims` fresh datasets from the process:
/// the sampling distribution the bootstrap tries to approximate.
pub fn fresh_data_pmp(dgp: &DataGeneratingProcess, set: &ModelSet, n_sims: usize, seed: u64) -> Result<PmpMatrix> {
    if n_sims == 0 {
        return Err(Error::EmptyInput("simulations"));
    }
    if dgp.n() != set.n() {
        return Err(Error::dims("data-generating process rows", set.n(), dgp.n()));
    }
    let values = (0..n_sims)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, rng::domain::FRESH_DATA, i as u64);
            let y = simulate_dgp(dgp, &mut r);
            let lm = set.log_marginals(&y)?;
            posterior::pmp(&lm, set.priors()).map(|p| p.probs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PmpMatrix {
        labels: set.labels().to_vec(),
        values,
        replicate_ids: (0..n_sims).collect(),
        failed: Vec::new(),
    })
}
