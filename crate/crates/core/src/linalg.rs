//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

/// Largest tolerated relative asymmetry before a matrix is rejected.
pub const SYMMETRY_TOL: f64 = 1e-8;
/// Relative eigenvalue floor below which a covariance is not PSD.
pub const PSD_TOL: f64 = 1e-10;
/// Relative singular-value threshold for full column rank.
pub const RANK_TOL: f64 = 1e-10;
/// Relative eigenvalue floor used by symmetric matrix powers.
pub const ROOT_FLOOR: f64 = 1e-12;

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub(crate) fn check_finite(m: &DMatrix<f64>, what: &'static str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn check_square(m: &DMatrix<f64>, what: &'static str) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::dims(
            what,
            format!("{0}x{0}", m.nrows()),
            format!("{}x{}", m.nrows(), m.ncols()),
        ))
    }
}

/// Relative asymmetry `max|A - A'| / max|A|` (0 for the zero matrix).
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = max_abs(m);
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0_f64;
    for j in 0..m.ncols() {
        for i in 0..j {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst / scale
}

/// Returns `(A + A')/2` after rejecting matrices whose asymmetry exceeds [`SYMMETRY_TOL`].
pub fn symmetrize_checked(m: &DMatrix<f64>, what: &'static str) -> Result<DMatrix<f64>> {
    check_square(m, what)?;
    check_finite(m, what)?;
    let asym = asymmetry(m);
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { what, asymmetry: asym });
    }
    Ok((m + m.transpose()) * 0.5)
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted in
/// descending order and each eigenvector signed so that its largest-magnitude
/// entry is positive.
pub fn sorted_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let k = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(k, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(m.nrows(), k);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        let pivot = col
            .iter()
            .fold(0.0_f64, |best, &v| if v.abs() > best.abs() { v } else { best });
        if pivot < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(dst, &col);
    }
    (values, vectors)
}

/// Rejects symmetric matrices with an eigenvalue below `-PSD_TOL * max|eigenvalue|`.
pub fn check_psd(m: &DMatrix<f64>, what: &'static str) -> Result<()> {
    if m.nrows() == 0 {
        return Ok(());
    }
    let eig = SymmetricEigen::new(m.clone());
    let scale = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let min = eig.eigenvalues.min();
    if min < -PSD_TOL * scale {
        return Err(Error::NotPositiveSemiDefinite {
            what,
            min_eigenvalue: min,
        });
    }
    Ok(())
}

/// Symmetrizes and checks a positive definite matrix, returning it with its Cholesky factor.
pub fn positive_definite(m: &DMatrix<f64>, what: &'static str) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let sym = symmetrize_checked(m, what)?;
    if sym.nrows() == 0 {
        return Err(Error::EmptyInput(what));
    }
    let chol = sym.clone().cholesky().ok_or(Error::NotPositiveDefinite { what })?;
    let l = chol.l();
    if l.diagonal().iter().any(|d| d.is_nan() || *d <= 0.0) {
        return Err(Error::NotPositiveDefinite { what });
    }
    Ok((sym, l))
}

/// Log-determinant of a positive definite matrix from its lower Cholesky factor.
pub fn log_det_from_cholesky(l: &DMatrix<f64>) -> f64 {
    2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

/// `m^power` for a symmetric positive definite `m` through its eigen-decomposition,
/// with eigenvalues floored at `ROOT_FLOOR * max eigenvalue`.
pub fn sym_power(m: &DMatrix<f64>, power: f64) -> DMatrix<f64> {
    let (values, vectors) = sorted_eigen(m);
    let top = values.iter().fold(0.0_f64, |a, v| a.max(*v));
    let floor = ROOT_FLOOR * top;
    let scaled = DVector::from_iterator(values.len(), values.iter().map(|&v| v.max(floor).powf(power)));
    let mut left = vectors.clone();
    for (j, s) in scaled.iter().enumerate() {
        left.column_mut(j).scale_mut(*s);
    }
    left * vectors.transpose()
}

/// Thin orthonormal basis of the column space of a full-column-rank matrix.
#[derive(Debug, Clone)]
pub struct ColumnBasis {
    /// `n x p` orthonormal columns spanning the column space.
    pub q: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    /// Right singular vectors, `p x p`.
    pub v: DMatrix<f64>,
}

pub fn column_basis(x: &DMatrix<f64>, what: &'static str) -> Result<ColumnBasis> {
    let (n, p) = x.shape();
    if p == 0 || n == 0 {
        return Err(Error::EmptyInput(what));
    }
    check_finite(x, what)?;
    if p > n {
        return Err(Error::RankDeficient { what, ratio: 0.0 });
    }
    let svd = SVD::new(x.clone(), true, true);
    let sv = svd.singular_values;
    let largest = sv.max();
    let smallest = sv.min();
    if largest.is_nan() || largest <= 0.0 || smallest <= RANK_TOL * largest {
        let ratio = if largest > 0.0 { smallest / largest } else { 0.0 };
        return Err(Error::RankDeficient { what, ratio });
    }
    let q = svd.u.expect("requested u");
    let v = svd.v_t.expect("requested v_t").transpose();
    Ok(ColumnBasis {
        q,
        singular_values: sv,
        v,
    })
}

pub fn frobenius_sq(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum()
}

pub(crate) fn trace_of_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    // tr(AB) = sum_ij A_ij B_ji
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrize_rejects_large_asymmetry() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(matches!(symmetrize_checked(&m, "m"), Err(Error::NotSymmetric { .. })));
        let jitter = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5 + 1e-12, 1.0]);
        let s = symmetrize_checked(&jitter, "m").unwrap();
        assert_eq!(s[(0, 1)], s[(1, 0)]);
    }

    #[test]
    fn psd_floor_tolerates_jitter() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0 - 1e-14]);
        assert!(check_psd(&m, "m").is_ok());
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-3]);
        assert!(check_psd(&bad, "m").is_err());
    }

    #[test]
    fn sym_power_roundtrip() {
        let m = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let half = sym_power(&m, 0.5);
        assert!((&half * &half - &m).abs().max() < 1e-12);
        let inv_half = sym_power(&m, -0.5);
        let id = &inv_half * &m * &inv_half;
        assert!((id - DMatrix::<f64>::identity(3, 3)).abs().max() < 1e-12);
    }

    #[test]
    fn rank_deficient_design_rejected() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert!(matches!(column_basis(&x, "design"), Err(Error::RankDeficient { .. })));
    }
}
