//! Singular value and Hermitian eigenvalue decompositions.
//!
//! Both factorizations run cyclic Jacobi sweeps: the SVD is one-sided Jacobi
//! on the columns of the (implicitly transposed, so rows >= cols) input,
//! which preserves the relative accuracy of the smallest singular values.
//! Downstream code divides by those values, so this is where the numerical
//! quality of the whole crate is decided.

use num_complex::Complex64;

use crate::error::Error;
use crate::matrix::{Matrix, TolerancePolicy};
use crate::Result;

/// Hard cap on Jacobi sweeps; reaching it is reported as non-convergence.
const MAX_SWEEPS: usize = 60;

/// Relative Gram-orthogonality threshold below which a column pair is left
/// alone. A full sweep without any rotation ends the iteration.
const ORTHO_TOL: f64 = 1e-14;

/// Full singular value decomposition `a = u * diag(singvals) * v*`.
///
/// `u` is `m x m` unitary, `v` is `n x n` unitary, `singvals` has
/// `min(m, n)` entries in descending order, and `rank` counts the singular
/// values above the rank cut of `tol`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: Matrix,
    pub singvals: Vec<f64>,
    pub v: Matrix,
    pub rank: usize,
}

/// Eigendecomposition `a = q * diag(eigvals) * q*` of a Hermitian matrix,
/// eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EighResult {
    pub q: Matrix,
    pub eigvals: Vec<f64>,
}

struct JacobiColumns {
    w: Vec<Vec<Complex64>>,
    v: Option<Vec<Vec<Complex64>>>,
}

/// One-sided Jacobi on the columns of `b` (which must satisfy
/// rows >= cols). On return the columns of `w` are mutually orthogonal and
/// `w = b * v`.
fn jacobi_onesided(b: &Matrix, accumulate_v: bool) -> Result<JacobiColumns> {
    let m = b.rows();
    let n = b.cols();
    let mut w: Vec<Vec<Complex64>> = (0..n).map(|j| (0..m).map(|i| b[(i, j)]).collect()).collect();
    let mut v: Option<Vec<Vec<Complex64>>> = if accumulate_v {
        Some(
            (0..n)
                .map(|j| {
                    let mut col = vec![Complex64::new(0.0, 0.0); n];
                    col[j] = Complex64::new(1.0, 0.0);
                    col
                })
                .collect(),
        )
    } else {
        None
    };

    // Columns whose norm has collapsed to rounding level carry no usable
    // direction; rotating them against a large column stalls the sweep
    // (the null component keeps re-emerging at machine scale), so pairs
    // containing one are treated as already orthogonal. The floor scales
    // with the input so the kernel stays scale invariant, and it sits
    // below every rank cut, so frozen columns never count toward the rank.
    let frob_sqr: f64 = w.iter().flatten().map(|z| z.norm_sqr()).sum();
    let col_floor = f64::EPSILON * f64::EPSILON * frob_sqr;

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    app += w[p][i].norm_sqr();
                    aqq += w[q][i].norm_sqr();
                    apq += w[p][i].conj() * w[q][i];
                }
                let r = apq.norm();
                if r <= ORTHO_TOL * (app * aqq).sqrt() || r == 0.0 {
                    continue;
                }
                if app <= col_floor || aqq <= col_floor {
                    continue;
                }
                // Unitary 2x2 that diagonalizes the Gram block
                // [[app, apq], [conj(apq), aqq]].
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + tau.hypot(1.0))
                };
                let cth = 1.0 / (1.0 + t * t).sqrt();
                let sth = cth * t;
                let alpha = apq.conj() / r;
                let (sa, ca) = (alpha * sth, alpha * cth);
                for i in 0..m {
                    let (wp, wq) = (w[p][i], w[q][i]);
                    w[p][i] = cth * wp - sa * wq;
                    w[q][i] = sth * wp + ca * wq;
                }
                if let Some(v) = v.as_mut() {
                    for i in 0..n {
                        let (vp, vq) = (v[p][i], v[q][i]);
                        v[p][i] = cth * vp - sa * vq;
                        v[q][i] = sth * vp + ca * vq;
                    }
                }
                rotated = true;
            }
        }
        if !rotated {
            return Ok(JacobiColumns { w, v });
        }
    }
    Err(Error::NonConvergence { sweeps: MAX_SWEEPS })
}

fn column_norm(col: &[Complex64]) -> f64 {
    col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Descending singular values without the factors; cheaper than [`svd`]
/// when only norms are needed.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    if a.is_empty() {
        return Err(Error::EmptyMatrix("singular values".into()));
    }
    let b = if a.rows() >= a.cols() { a.clone() } else { a.adjoint() };
    let cols = jacobi_onesided(&b, false)?;
    let mut s: Vec<f64> = cols.w.iter().map(|col| column_norm(col)).collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(s)
}

/// Count of singular values above the rank cut.
fn count_rank(s_desc: &[f64], rows: usize, cols: usize, tol: &TolerancePolicy) -> usize {
    let sigma_max = s_desc.first().copied().unwrap_or(0.0);
    let cut = tol.rank_cut(rows, cols, sigma_max);
    s_desc.iter().take_while(|&&x| x > cut && x > 0.0).count()
}

/// Extends the orthonormal set `cols` (vectors of length `m`) to `m`
/// vectors, picking at each step the standard basis vector with the largest
/// residual and orthogonalizing it twice.
fn complete_basis(cols: &mut Vec<Vec<Complex64>>, m: usize) {
    while cols.len() < m {
        let mut best = 0;
        let mut best_res = -1.0;
        for i in 0..m {
            let coverage: f64 = cols.iter().map(|q| q[i].norm_sqr()).sum();
            let res = 1.0 - coverage;
            if res > best_res {
                best_res = res;
                best = i;
            }
        }
        let mut v = vec![Complex64::new(0.0, 0.0); m];
        v[best] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for q in cols.iter() {
                let inner: Complex64 = q.iter().zip(&v).map(|(qi, vi)| qi.conj() * vi).sum();
                for i in 0..m {
                    v[i] -= inner * q[i];
                }
            }
        }
        let norm = column_norm(&v);
        assert!(norm > 0.0, "basis completion ran out of directions");
        for z in v.iter_mut() {
            *z /= norm;
        }
        cols.push(v);
    }
}

fn columns_to_matrix(cols: &[Vec<Complex64>], rows: usize) -> Matrix {
    Matrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

/// Full SVD with square unitary factors.
///
/// Left singular vectors for singular values below the rank cut carry no
/// information about `a`; they are completed to an orthonormal basis instead
/// of being normalized from numerically zero columns.
///
/// # Errors
/// `EmptyMatrix` when `a` has no rows or no columns, `NonConvergence` when
/// the sweep cap is hit.
pub fn svd(a: &Matrix, tol: &TolerancePolicy) -> Result<SvdResult> {
    if a.is_empty() {
        return Err(Error::EmptyMatrix("svd".into()));
    }
    let transposed = a.rows() < a.cols();
    let b = if transposed { a.adjoint() } else { a.clone() };
    let (m, n) = (b.rows(), b.cols());

    let JacobiColumns { w, v } = jacobi_onesided(&b, true)?;
    let v = v.expect("v accumulated");

    let norms: Vec<f64> = w.iter().map(|col| column_norm(col)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));

    let singvals: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let rank = count_rank(&singvals, m, n, tol);

    let v_cols: Vec<Vec<Complex64>> = order.iter().map(|&k| v[k].clone()).collect();
    let mut u_cols: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    for (idx, &k) in order.iter().enumerate().take(rank) {
        let s = singvals[idx];
        u_cols.push(w[k].iter().map(|z| z / s).collect());
    }
    complete_basis(&mut u_cols, m);

    let u_mat = columns_to_matrix(&u_cols, m);
    let v_mat = columns_to_matrix(&v_cols, n);

    if transposed {
        Ok(SvdResult {
            u: v_mat,
            singvals,
            v: u_mat,
            rank,
        })
    } else {
        Ok(SvdResult {
            u: u_mat,
            singvals,
            v: v_mat,
            rank,
        })
    }
}

/// Numerical rank of `a` under the rank cut of `tol`.
pub fn rank(a: &Matrix, tol: &TolerancePolicy) -> Result<usize> {
    let s = singular_values(a)?;
    Ok(count_rank(&s, a.rows(), a.cols(), tol))
}

/// Smallest singular value above the rank cut: the reduced minimum modulus.
///
/// # Errors
/// `ZeroOperator` when every singular value sits below the cut.
pub fn reduced_min_modulus(a: &Matrix, tol: &TolerancePolicy) -> Result<f64> {
    let s = singular_values(a)?;
    let r = count_rank(&s, a.rows(), a.cols(), tol);
    if r == 0 {
        return Err(Error::ZeroOperator);
    }
    Ok(s[r - 1])
}

/// Moore-Penrose pseudoinverse built from the rank-cut SVD. The zero matrix
/// maps to the zero matrix of the adjoint shape.
pub fn pinv(a: &Matrix, tol: &TolerancePolicy) -> Result<Matrix> {
    let decomp = svd(a, tol)?;
    let mut out = Matrix::zeros(a.cols(), a.rows());
    for k in 0..decomp.rank {
        let inv = 1.0 / decomp.singvals[k];
        for i in 0..a.cols() {
            for j in 0..a.rows() {
                out[(i, j)] += decomp.v[(i, k)] * inv * decomp.u[(j, k)].conj();
            }
        }
    }
    Ok(out)
}

/// Hermitian eigendecomposition, validating the input against the default
/// residual tolerance.
///
/// # Errors
/// `NotHermitian`, `EmptyMatrix`, `ShapeMismatch` for non-square input, and
/// `NonConvergence`.
pub fn eigh(a: &Matrix) -> Result<EighResult> {
    if a.is_empty() {
        return Err(Error::EmptyMatrix("eigh".into()));
    }
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "eigh needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let tol = TolerancePolicy::default();
    let defect = a.hermitian_defect();
    let allowed = tol.residual_tol * a.spectral_norm();
    if defect > allowed {
        return Err(Error::NotHermitian { defect, tol: allowed });
    }
    eigh_unchecked(a)
}

/// Same as [`eigh`] but trusts the caller that `a` is Hermitian; the strict
/// lower triangle and imaginary diagonal parts are ignored through
/// symmetrized updates.
pub(crate) fn eigh_unchecked(a: &Matrix) -> Result<EighResult> {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = Matrix::identity(n);
    let thr = 1e-14 * a.frobenius_norm();

    let mut converged = thr == 0.0;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for qq in p + 1..n {
                let hpq = h[(p, qq)];
                let r = hpq.norm();
                if r <= thr {
                    continue;
                }
                let tau = (h[(qq, qq)].re - h[(p, p)].re) / (2.0 * r);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let cth = 1.0 / (1.0 + t * t).sqrt();
                let sth = cth * t;
                let alpha = hpq.conj() / r;

                // Right multiplication by the rotation.
                for i in 0..n {
                    let (hp, hq) = (h[(i, p)], h[(i, qq)]);
                    h[(i, p)] = cth * hp - sth * alpha * hq;
                    h[(i, qq)] = sth * hp + cth * alpha * hq;
                }
                // Left multiplication by its adjoint.
                for j in 0..n {
                    let (hp, hq) = (h[(p, j)], h[(qq, j)]);
                    h[(p, j)] = cth * hp - sth * alpha.conj() * hq;
                    h[(qq, j)] = sth * hp + cth * alpha.conj() * hq;
                }
                let zero = Complex64::new(0.0, 0.0);
                h[(p, qq)] = zero;
                h[(qq, p)] = zero;
                h[(p, p)] = Complex64::new(h[(p, p)].re, 0.0);
                h[(qq, qq)] = Complex64::new(h[(qq, qq)].re, 0.0);

                for i in 0..n {
                    let (qp, qn) = (q[(i, p)], q[(i, qq)]);
                    q[(i, p)] = cth * qp - sth * alpha * qn;
                    q[(i, qq)] = sth * qp + cth * alpha * qn;
                }
                rotated = true;
            }
        }
        sweeps += 1;
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NonConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| h[(i, i)].re.partial_cmp(&h[(j, j)].re).unwrap().then(i.cmp(&j)));
    let eigvals: Vec<f64> = order.iter().map(|&k| h[(k, k)].re).collect();
    let q_sorted = Matrix::from_fn(n, n, |i, j| q[(i, order[j])]);
    Ok(EighResult {
        q: q_sorted,
        eigvals,
    })
}
