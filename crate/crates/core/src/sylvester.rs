//! Solver for the operator equation `x s - t x = y` with Hermitian `s` and
//! `t`, plus the disc-separation bound `|x| <= |y| / delta` that applies
//! when the spectrum of `s` stays at distance `delta` from an interval
//! enclosing the spectrum of `t`.

use crate::error::Error;
use crate::matrix::Matrix;
use crate::spectral::eigh;
use crate::Result;
use num_complex::Complex64;
use serde::Serialize;

/// Solution of `x s - t x = y` together with the achieved residual and,
/// when the disc geometry applies, the separation and the resulting norm
/// bound.
#[derive(Debug, Clone, Serialize)]
pub struct SylvesterSolution {
    pub x: Matrix,
    pub residual: f64,
    pub separation: Option<f64>,
    pub bound_value: Option<f64>,
}

/// Solves `x s - t x = y` by diagonalizing both Hermitian coefficients and
/// dividing componentwise in the eigenbases.
///
/// With `s = v_s d_s v_s*` and `t = v_t d_t v_t*` the equation becomes
/// `z d_s - d_t z = v_t* y v_s` for `z = v_t* x v_s`, which splits into
/// scalar equations `z_ij (d_s_j - d_t_i) = (v_t* y v_s)_ij`.
///
/// # Errors
/// `ShapeMismatch` when the dimensions are inconsistent, `NotHermitian`
/// from the eigensolver, and `SpectraOverlap` when some eigenvalue pair is
/// closer than `1e-12 * max(|s|, |t|, 1)`.
pub fn solve_sylvester(s: &Matrix, t: &Matrix, y: &Matrix) -> Result<SylvesterSolution> {
    if s.rows() == 0 || t.rows() == 0 {
        return Err(Error::EmptyMatrix("sylvester coefficient".into()));
    }
    if y.rows() != t.rows() || y.cols() != s.cols() {
        return Err(Error::ShapeMismatch(format!(
            "right-hand side is {}x{}, expected {}x{}",
            y.rows(),
            y.cols(),
            t.rows(),
            s.cols()
        )));
    }
    let es = eigh(s)?;
    let et = eigh(t)?;

    let tol = 1e-12 * s.spectral_norm().max(t.spectral_norm()).max(1.0);
    let mut min_dist = f64::INFINITY;
    for &ds in &es.eigvals {
        for &dt in &et.eigvals {
            min_dist = min_dist.min((ds - dt).abs());
        }
    }
    if min_dist <= tol {
        return Err(Error::SpectraOverlap { min_dist, tol });
    }

    let rhs = &(&et.q.adjoint() * y) * &es.q;
    let z = Matrix::from_fn(y.rows(), y.cols(), |i, j| {
        rhs[(i, j)] / Complex64::new(es.eigvals[j] - et.eigvals[i], 0.0)
    });
    let x = &(&et.q * &z) * &es.q.adjoint();

    let residual = (&(&(&x * s) - &(t * &x)) - y).spectral_norm();
    let (separation, bound_value) = match separation_bound(&es.eigvals, &et.eigvals) {
        Ok(delta) => (Some(delta), Some(y.spectral_norm() / delta)),
        Err(_) => (None, None),
    };

    Ok(SylvesterSolution {
        x,
        residual,
        separation,
        bound_value,
    })
}

/// Distance from the spectrum of `s` to the smallest interval enclosing
/// the spectrum of `t`, measured through the enclosing disc: with `a` the
/// interval midpoint and `r` its radius, returns `min_j |ds_j - a| - r`.
///
/// # Errors
/// `GeometryViolated` when the distance is not positive, i.e. some
/// eigenvalue of `s` lies inside the closed disc.
pub fn separation_bound(s_eigvals: &[f64], t_eigvals: &[f64]) -> Result<f64> {
    if s_eigvals.is_empty() || t_eigvals.is_empty() {
        return Err(Error::EmptyMatrix("eigenvalue list".into()));
    }
    let lo = t_eigvals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = t_eigvals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let center = 0.5 * (lo + hi);
    let radius = 0.5 * (hi - lo);
    let delta = s_eigvals
        .iter()
        .map(|ds| (ds - center).abs() - radius)
        .fold(f64::INFINITY, f64::min);
    if delta <= 0.0 {
        return Err(Error::GeometryViolated { delta });
    }
    Ok(delta)
}
