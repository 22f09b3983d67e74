//! Polar decomposition `a = q * h` with a partial-isometry angular factor,
//! unitary extensions of that factor, and the square dilation that removes
//! the index obstruction for non-square matrices.

use crate::error::Error;
use crate::matrix::{Matrix, TolerancePolicy};
use crate::spectral::{svd, SvdResult};
use crate::subspace::{gap_report, Subspace};
use crate::Result;
use serde::Serialize;

/// Polar decomposition of an `m x n` matrix: `q` is the `m x n` angular
/// factor with `N(q) = N(a)`, `h = (a*a)^(1/2)` is `n x n` positive
/// semidefinite, `sigma` is the reduced minimum modulus and `rank` the
/// numerical rank.
#[derive(Debug, Clone, Serialize)]
pub struct PolarResult {
    pub q: Matrix,
    pub h: Matrix,
    pub sigma: f64,
    pub rank: usize,
}

/// Unitary `u` extending the angular factor `q` of a square matrix: `u`
/// agrees with `q` on `N(a)-perp` and maps `N(a)` onto `R(a)-perp`.
#[derive(Debug, Clone, Serialize)]
pub struct UnitaryExtension {
    pub u: Matrix,
    pub q: Matrix,
}

/// Everything downstream analysis needs from one SVD pass.
pub(crate) struct Decomposition {
    pub polar: PolarResult,
    pub range: Subspace,
    pub kernel: Subspace,
    pub svd: SvdResult,
}

pub(crate) fn decompose(a: &Matrix, tol: &TolerancePolicy) -> Result<Decomposition> {
    if a.is_empty() {
        return Err(Error::EmptyMatrix("polar decomposition".into()));
    }
    let svd = svd(a, tol)?;
    let rank = svd.rank;
    if rank == 0 {
        return Err(Error::ZeroOperator);
    }
    let u_r = svd.u.columns(0, rank);
    let v_r = svd.v.columns(0, rank);
    let q = &u_r * &v_r.adjoint();

    let n = a.cols();
    let mut padded = svd.singvals.clone();
    padded.resize(n, 0.0);
    let h = &(&svd.v * &Matrix::from_real_diag(&padded)) * &svd.v.adjoint();

    let range = Subspace::from_orthonormal(u_r);
    let kernel = Subspace::from_orthonormal(svd.v.columns(rank, n));

    Ok(Decomposition {
        polar: PolarResult {
            q,
            h,
            sigma: svd.singvals[rank - 1],
            rank,
        },
        range,
        kernel,
        svd,
    })
}

/// Polar decomposition `a = q * h`.
///
/// # Errors
/// `ZeroOperator` when every singular value is below the rank cut,
/// `EmptyMatrix` and `NonConvergence` as in the SVD.
pub fn polar_decompose(a: &Matrix, tol: &TolerancePolicy) -> Result<PolarResult> {
    Ok(decompose(a, tol)?.polar)
}

/// Checks that the angular factor of `a*` is the adjoint of the angular
/// factor of `a` and that `R(q) = R(a)`, both within `1e-8`.
pub fn angular_factor_adjoint_check(a: &Matrix, tol: &TolerancePolicy) -> Result<bool> {
    let direct = decompose(a, tol)?;
    let adjoint = decompose(&a.adjoint(), tol)?;
    let factor_ok = (&adjoint.polar.q - &direct.polar.q.adjoint()).spectral_norm() <= 1e-8;
    let range_a = Subspace::from_span(a, tol)?;
    let range_q = Subspace::from_span(&direct.polar.q, tol)?;
    let range_ok = gap_report(&range_q, &range_a)?.gap_hat <= 1e-8;
    Ok(factor_ok && range_ok)
}

/// Extends the angular factor of a square matrix to a unitary by pairing
/// the k-th kernel basis vector with the k-th basis vector of the range
/// complement.
///
/// # Errors
/// `NotIndexZero` for non-square input, `ZeroOperator` for the zero matrix.
pub fn unitary_extension(a: &Matrix, tol: &TolerancePolicy) -> Result<UnitaryExtension> {
    if !a.is_square() {
        return Err(Error::NotIndexZero {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let decomp = decompose(a, tol)?;
    let u = &decomp.svd.u * &decomp.svd.v.adjoint();
    Ok(UnitaryExtension {
        u,
        q: decomp.polar.q,
    })
}

/// Pads `a` with zero columns (tall case) or zero rows (wide case) to a
/// square matrix of size `max(rows, cols)`; square input is returned
/// unchanged. The dilation keeps all singular values and appends zeros.
pub fn dilate_to_index_zero(a: &Matrix) -> Matrix {
    let (m, n) = (a.rows(), a.cols());
    let size = m.max(n);
    if m == n {
        return a.clone();
    }
    Matrix::from_fn(size, size, |i, j| {
        if i < m && j < n {
            a[(i, j)]
        } else {
            num_complex::Complex64::new(0.0, 0.0)
        }
    })
}
