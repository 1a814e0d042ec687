//! Principal angles between the column spaces of two designs and the
//! non-shared degrees of freedom `||H1 - H2||_F^2`.
//!
//! With `s` exactly shared dimensions and `r` partially aligned ones,
//!
//! ```text
//! ||H1 - H2||_F^2 = kappa^2 (p1 + p2 - 2 (s + sum_{partial} cos^2 theta_j))
//! ```

use nalgebra::{DMatrix, SVD};

use crate::error::{Error, Result};
use crate::gprior::{self, HatMatrix};
use crate::linalg;

/// `cos^2` above `1 - SHARED_TOL` counts as a shared dimension, below `SHARED_TOL` as orthogonal.
pub const SHARED_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalAngleReport {
    /// Ascending, length `min(p1, p2)`. Shared dimensions are reported as exactly 0.
    pub angles: Vec<f64>,
    pub cos_squared: Vec<f64>,
    pub shared_dims: usize,
    pub partial_dims: usize,
    /// Unshrunk count `p1 + p2 - 2 (s + sum_partial cos^2)`; multiply by `kappa^2`
    /// for `||H1 - H2||_F^2`.
    pub nonshared_dof: f64,
    /// Some `cos^2` lies within a factor 10 of a classification boundary, so
    /// `s` and `r` may be fragile.
    pub near_threshold: bool,
    pub p1: usize,
    pub p2: usize,
}

pub fn principal_angles(x1: &DMatrix<f64>, x2: &DMatrix<f64>) -> Result<PrincipalAngleReport> {
    if x1.nrows() != x2.nrows() {
        return Err(Error::dims("design rows", x1.nrows(), x2.nrows()));
    }
    let q1 = linalg::column_basis(x1, "first design")?.q;
    let q2 = linalg::column_basis(x2, "second design")?.q;
    let (p1, p2) = (q1.ncols(), q2.ncols());
    // the singular values of Q1'Q2 and Q2'Q1 coincide, so no reordering is needed
    let cross = q1.transpose() * q2;
    let mut cosines: Vec<f64> = SVD::new(cross, false, false)
        .singular_values
        .iter()
        .map(|c| c.clamp(0.0, 1.0))
        .collect();
    cosines.sort_by(|a, b| b.total_cmp(a));

    let mut angles = Vec::with_capacity(cosines.len());
    let mut cos_squared = Vec::with_capacity(cosines.len());
    let (mut shared, mut partial, mut aligned) = (0usize, 0usize, 0.0);
    let mut near_threshold = false;
    for &c in &cosines {
        let c2 = c * c;
        let gap_to_one = 1.0 - c2;
        if gap_to_one < SHARED_TOL {
            shared += 1;
            angles.push(0.0);
            cos_squared.push(1.0);
        } else {
            if c2 >= SHARED_TOL {
                partial += 1;
                aligned += c2;
            }
            angles.push(c.acos());
            cos_squared.push(c2);
        }
        let near = |v: f64| v > SHARED_TOL / 10.0 && v < SHARED_TOL * 10.0;
        near_threshold |= near(c2) || near(gap_to_one);
    }
    let nonshared_dof = (p1 + p2) as f64 - 2.0 * (shared as f64 + aligned);
    Ok(PrincipalAngleReport {
        angles,
        cos_squared,
        shared_dims: shared,
        partial_dims: partial,
        nonshared_dof: nonshared_dof.max(0.0),
        near_threshold,
        p1,
        p2,
    })
}

/// `||H1 - H2||_F^2` computed entrywise.
pub fn nonshared_dof_direct(h1: &HatMatrix, h2: &HatMatrix) -> Result<f64> {
    if h1.n() != h2.n() {
        return Err(Error::dims("hat matrices", h1.n(), h2.n()));
    }
    if (h1.kappa - h2.kappa).abs() > 1e-12 * h1.kappa.max(h2.kappa) {
        return Err(Error::UnequalShrinkage(h1.kappa, h2.kappa));
    }
    Ok(linalg::frobenius_sq(&(&h1.matrix - &h2.matrix)))
}

/// `||H1 - H2||_F^2` from the principal angles of the two designs.
pub fn nonshared_dof_via_angles(x1: &DMatrix<f64>, x2: &DMatrix<f64>, g: f64) -> Result<f64> {
    let kappa = gprior::shrinkage(g)?;
    Ok(kappa * kappa * principal_angles(x1, x2)?.nonshared_dof)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gprior::{hat_matrix, RegressionModel};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn col(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(v.len(), 1, v)
    }

    #[test]
    fn identical_designs() {
        let x = DMatrix::from_fn(8, 3, |i, j| ((i * 3 + j) as f64).sin() + j as f64);
        let r = principal_angles(&x, &x).unwrap();
        assert_eq!(r.angles, vec![0.0; 3]);
        assert_eq!((r.shared_dims, r.partial_dims), (3, 0));
        assert_eq!(r.nonshared_dof, 0.0);
        assert_eq!(nonshared_dof_via_angles(&x, &x, 4.0).unwrap(), 0.0);
    }

    #[test]
    fn unit_vector_cases() {
        let r = principal_angles(&col(&[1.0, 0.0]), &col(&[0.0, 1.0])).unwrap();
        assert!((r.angles[0] - FRAC_PI_2).abs() < 1e-15);
        assert_eq!((r.shared_dims, r.partial_dims), (0, 0));
        let r = principal_angles(&col(&[1.0, 0.0]), &col(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2])).unwrap();
        assert!((r.angles[0] - FRAC_PI_4).abs() < 1e-12);
        assert!((r.cos_squared[0] - 0.5).abs() < 1e-15);
        assert_eq!((r.shared_dims, r.partial_dims), (0, 1));
        let v = nonshared_dof_via_angles(&col(&[1.0, 0.0]), &col(&[0.0, 1.0]), 1.0).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn direct_cases() {
        let m1 = RegressionModel::univariate(col(&[1.0, 0.0, 0.0]), 1.0, 1.0).unwrap();
        let m2 = RegressionModel::univariate(col(&[0.0, 1.0, 0.0]), 1.0, 1.0).unwrap();
        let (h1, h2) = (hat_matrix(&m1), hat_matrix(&m2));
        assert_eq!(nonshared_dof_direct(&h1, &h1).unwrap(), 0.0);
        assert!((nonshared_dof_direct(&h1, &h2).unwrap() - 0.5).abs() < 1e-15);
        let m3 = RegressionModel::univariate(col(&[0.0, 1.0, 0.0]), 1.0, 3.0).unwrap();
        assert!(matches!(
            nonshared_dof_direct(&h1, &hat_matrix(&m3)),
            Err(Error::UnequalShrinkage(..))
        ));
        let m4 = RegressionModel::univariate(col(&[0.0, 1.0]), 1.0, 1.0).unwrap();
        assert!(matches!(
            nonshared_dof_direct(&h1, &hat_matrix(&m4)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rank_deficiency_rejected() {
        let bad = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        assert!(matches!(
            principal_angles(&bad, &col(&[1.0, 0.0, 0.0])),
            Err(Error::RankDeficient { .. })
        ));
    }
}
