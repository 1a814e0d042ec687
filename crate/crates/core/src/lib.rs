//! Bayesian model comparison for Gaussian linear regression under Zellner's
//! g-prior, with closed-form sampling moments of the log Bayes factor.
//!
//! The crate is organised bottom-up:
//!
//! * [`quadform`]: moments of Gaussian quadratic forms.
//! * [`gprior`]: hat matrices, posterior means and marginal likelihoods.
//! * [`moments`]: sampling mean and variance of `log B12` under a data-generating process.
//! * [`geometry`]: principal angles and non-shared degrees of freedom.
//! * [`posterior`]: posterior model probabilities and evidence classes.
//! * [`resample`]: bootstrap sampling distributions of PMPs and log Bayes factors.
//! * [`oracle`]: Monte Carlo estimates that check the closed forms.

pub mod error;
pub mod geometry;
pub mod gprior;
pub mod linalg;
pub mod moments;
pub mod oracle;
pub mod posterior;
pub mod quadform;
pub mod resample;
pub mod rng;

pub use error::{Error, Result};
pub use geometry::PrincipalAngleReport;
pub use gprior::{KappaExponent, Noise, RegressionModel, Response};
pub use moments::{BfMoments, DataGeneratingProcess};
pub use posterior::{KassRaftery, ModelSet, PmpVector};
pub use resample::{PmpMatrix, ResamplePlan, Scheme};
