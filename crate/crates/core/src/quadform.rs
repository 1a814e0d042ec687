//! Moments of quadratic forms `y'Ay` in a Gaussian vector `y ~ N(mu, Sigma)`.
//!
//! Every closed-form sampling moment of a log Bayes factor reduces to these
//! three identities:
//!
//! ```text
//! E(y'A y)            = mu'A mu + tr(A Sigma)
//! Var(y'A y)          = 2 tr((A Sigma)^2) + 4 mu'A Sigma A mu
//! Cov(y'A1 y, y'A2 y) = 2 tr(A1 Sigma A2 Sigma) + 4 mu'A1 Sigma A2 mu
//! ```

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// A Gaussian vector `N(mean, covariance)` with a symmetric PSD covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
}

impl GaussianSpec {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let covariance = linalg::symmetrize_checked(&covariance, "covariance")?;
        if covariance.nrows() != mean.len() {
            return Err(Error::dims(
                "gaussian spec",
                format!("{0}x{0} covariance", mean.len()),
                format!("{0}x{0}", covariance.nrows()),
            ));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("mean"));
        }
        linalg::check_psd(&covariance, "covariance")?;
        Ok(Self { mean, covariance })
    }

    /// `N(mean, variance * I)`.
    pub fn isotropic(mean: DVector<f64>, variance: f64) -> Result<Self> {
        if !(variance.is_finite() && variance >= 0.0) {
            return Err(Error::InvalidVariance(variance));
        }
        let n = mean.len();
        Self::new(mean, DMatrix::identity(n, n) * variance)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }
}

/// Symmetric coefficient matrix of a quadratic form `y'Ay`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadForm {
    matrix: DMatrix<f64>,
}

impl QuadForm {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let matrix = linalg::symmetrize_checked(&matrix, "quadratic form")?;
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Evaluates `y'Ay`.
    pub fn eval(&self, y: &DVector<f64>) -> f64 {
        (&self.matrix * y).dot(y)
    }
}

fn check_dims(a: &QuadForm, g: &GaussianSpec) -> Result<()> {
    if a.dim() != g.dim() {
        return Err(Error::dims("quadratic form", g.dim(), a.dim()));
    }
    Ok(())
}

/// `E(y'Ay) = mu'A mu + tr(A Sigma)`.
pub fn quad_mean(a: &QuadForm, g: &GaussianSpec) -> Result<f64> {
    check_dims(a, g)?;
    let mu = g.mean();
    let quad = (a.matrix() * mu).dot(mu);
    Ok(quad + linalg::trace_of_product(a.matrix(), g.covariance()))
}

/// The two summands of `Cov(y'A1 y, y'A2 y)`: the trace part
/// `2 tr(A1 Sigma A2 Sigma)` and the mean part `4 mu'A1 Sigma A2 mu`.
pub fn quad_cov_parts(a1: &QuadForm, a2: &QuadForm, g: &GaussianSpec) -> Result<(f64, f64)> {
    check_dims(a1, g)?;
    check_dims(a2, g)?;
    let sigma = g.covariance();
    let a1s = a1.matrix() * sigma;
    let a2s = a2.matrix() * sigma;
    let trace_part = 2.0 * linalg::trace_of_product(&a1s, &a2s);
    let mu = g.mean();
    // mu'A1 Sigma A2 mu = (Sigma A1 mu)'(A2 mu), symmetric in A1, A2
    let left = a1s.transpose() * mu;
    let right = a2.matrix() * mu;
    let mean_part = 4.0 * left.dot(&right);
    Ok((trace_part, mean_part))
}

/// `Cov(y'A1 y, y'A2 y) = 2 tr(A1 Sigma A2 Sigma) + 4 mu'A1 Sigma A2 mu`.
pub fn quad_cov(a1: &QuadForm, a2: &QuadForm, g: &GaussianSpec) -> Result<f64> {
    let (t, m) = quad_cov_parts(a1, a2, g)?;
    Ok(t + m)
}

/// `Var(y'Ay)`; the same computation as `quad_cov(a, a, g)`.
pub fn quad_var(a: &QuadForm, g: &GaussianSpec) -> Result<f64> {
    quad_cov(a, a, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn identity_spec(mean: &[f64]) -> GaussianSpec {
        GaussianSpec::isotropic(DVector::from_column_slice(mean), 1.0).unwrap()
    }

    #[test]
    fn mean_identity_cases() {
        let a = QuadForm::new(DMatrix::identity(3, 3)).unwrap();
        assert_eq!(quad_mean(&a, &identity_spec(&[0.0, 0.0, 0.0])).unwrap(), 3.0);
        assert_eq!(quad_mean(&a, &identity_spec(&[1.0, 0.0, 0.0])).unwrap(), 4.0);
    }

    #[test]
    fn cov_identity_and_disjoint() {
        let a = QuadForm::new(DMatrix::identity(3, 3)).unwrap();
        assert_eq!(quad_cov(&a, &a, &identity_spec(&[0.0; 3])).unwrap(), 6.0);
        let a1 = QuadForm::new(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]))).unwrap();
        let a2 = QuadForm::new(DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0]))).unwrap();
        assert_eq!(quad_cov(&a1, &a2, &identity_spec(&[0.0; 2])).unwrap(), 0.0);
    }

    #[test]
    fn var_chi_square_and_degenerate() {
        for n in 1..6 {
            let a = QuadForm::new(DMatrix::identity(n, n)).unwrap();
            let g = identity_spec(&vec![0.0; n]);
            assert_eq!(quad_var(&a, &g).unwrap(), 2.0 * n as f64);
        }
        let zero = QuadForm::new(DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(quad_var(&zero, &identity_spec(&[1.0, 2.0, 3.0])).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        let a = QuadForm::new(DMatrix::identity(3, 3)).unwrap();
        let g = identity_spec(&[0.0, 0.0]);
        assert!(matches!(quad_mean(&a, &g), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(quad_cov(&a, &a, &g), Err(Error::DimensionMismatch { .. })));
        let skew = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(matches!(QuadForm::new(skew), Err(Error::NotSymmetric { .. })));
        let not_psd = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            GaussianSpec::new(DVector::zeros(2), not_psd),
            Err(Error::NotPositiveSemiDefinite { .. })
        ));
    }

    fn sym_from(vals: &[f64], n: usize) -> DMatrix<f64> {
        let m = DMatrix::from_column_slice(n, n, &vals[..n * n]);
        (&m + m.transpose()) * 0.5
    }

    fn spec_from(vals: &[f64], n: usize) -> GaussianSpec {
        let l = DMatrix::from_column_slice(n, n, &vals[..n * n]);
        let cov = &l * l.transpose();
        GaussianSpec::new(DVector::from_column_slice(&vals[n * n..n * n + n]), cov).unwrap()
    }

    proptest! {
        #[test]
        fn var_equals_self_cov(vals in prop::collection::vec(-2.0..2.0f64, 50), gv in prop::collection::vec(-2.0..2.0f64, 50)) {
            let n = 4;
            let a = QuadForm::new(sym_from(&vals, n)).unwrap();
            let g = spec_from(&gv, n);
            let v = quad_var(&a, &g).unwrap();
            let c = quad_cov(&a, &a, &g).unwrap();
            prop_assert_eq!(v, c);
            prop_assert!(v >= -1e-12 * (1.0 + v.abs()));
        }

        #[test]
        fn cov_symmetric_and_bilinear(
            v1 in prop::collection::vec(-2.0..2.0f64, 25),
            v2 in prop::collection::vec(-2.0..2.0f64, 25),
            v3 in prop::collection::vec(-2.0..2.0f64, 25),
            gv in prop::collection::vec(-2.0..2.0f64, 30),
            alpha in -3.0..3.0f64,
            beta in -3.0..3.0f64,
        ) {
            let n = 5;
            let m1 = sym_from(&v1, n);
            let m2 = sym_from(&v2, n);
            let a1 = QuadForm::new(m1.clone()).unwrap();
            let a2 = QuadForm::new(m2.clone()).unwrap();
            let a3 = QuadForm::new(sym_from(&v3, n)).unwrap();
            let g = spec_from(&gv, n);

            let c12 = quad_cov(&a1, &a2, &g).unwrap();
            let c21 = quad_cov(&a2, &a1, &g).unwrap();
            prop_assert!((c12 - c21).abs() <= 1e-12 * c12.abs().max(1.0));

            let combo = QuadForm::new(m1 * alpha + m2 * beta).unwrap();
            let lhs = quad_cov(&combo, &a3, &g).unwrap();
            let c13 = quad_cov(&a1, &a3, &g).unwrap();
            let c23 = quad_cov(&a2, &a3, &g).unwrap();
            let rhs = alpha * c13 + beta * c23;
            let scale = (alpha * c13).abs() + (beta * c23).abs() + 1.0;
            prop_assert!((lhs - rhs).abs() <= 1e-10 * scale);
        }
    }
}
