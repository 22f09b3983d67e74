//! Perturbation certificates for the angular factor of the polar
//! decomposition.
//!
//! For a pair of nonzero operators the distance between their angular
//! factors admits several upper bounds in terms of `dist = |a1 - a2|` and
//! the reduced minimum moduli `sigma1`, `sigma2`:
//!
//! * `bound_main = 4 * dist / (sigma1 + sigma2)`, valid when the indices
//!   agree and the gap difference of the ranges or of the kernels
//!   vanishes;
//! * `bound_improved`, the same hypothesis with the sharper constant
//!   `1 + sqrt(1 + (sigma1^2 + sigma2^2) / max(sigma1, sigma2)^2)`;
//! * `bound_cr_plain = dist * (3 / (sigma1 + sigma2) + 1 / min(sigma1,
//!   sigma2))`, valid without any hypothesis;
//! * `bound_cr_gap = 5 * dist / (sigma1 + sigma2)`, valid when the gap
//!   between the ranges or between the kernels is below one.
//!
//! [`certify`] evaluates all four against the measured angular distance.
//! The two `proof_trace_*` functions replay the operator identities behind
//! the bounds summand by summand, so a violation can be localized to the
//! step that broke. [`small_pert_implication`] and
//! [`scan_resolvent_angular`] cover the derived consequences: small
//! equal-rank perturbations keep the range gap below one (with a pseudo-
//! inverse Lipschitz estimate), and the angular factor of `a - lambda` is
//! continuous in `lambda` on circles avoiding the spectrum.

use crate::error::Error;
use crate::matrix::{Matrix, TolerancePolicy};
use crate::polar::{decompose, Decomposition};
use crate::spectral::pinv;
use crate::subspace::{classify_cross_projections, gap_report, GapReport, SurjectivityClass};
use crate::Result;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Margin for the discrete gap decisions: a gap difference counts as zero
/// below this value, and "gap < 1" requires at least this much distance
/// from 1. Strict inequalities need a buffer in floating point.
const GAP_DECISION_TOL: f64 = 1e-8;

/// Structural hypotheses of a pair, as needed by the conditional bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Hypotheses {
    pub same_shape: bool,
    /// `cols1 - rows1 == cols2 - rows2`; the index of a matrix acting
    /// between finite-dimensional spaces.
    pub index_equal: bool,
    pub rank1: usize,
    pub rank2: usize,
    /// Gap difference of the ranges is numerically zero: the two directed
    /// gaps agree within `1e-8` AND the cross-projection classification is
    /// `BothSurjective` or `NeitherSurjective`. Both tests must agree; a
    /// pair where they disagree is numerically ambiguous and not accepted.
    pub delta_range_zero: bool,
    /// Same decision for the kernels.
    pub delta_kernel_zero: bool,
    /// Symmetric range gap is below `1 - 1e-8`.
    pub gap_range_lt1: bool,
    /// Symmetric kernel gap is below `1 - 1e-8`.
    pub gap_kernel_lt1: bool,
}

/// All bound evaluations for one pair. A `*_holds` flag is the verdict
/// `qdist <= bound * (1 + bound_slack)` when the bound applies, and
/// vacuously `true` when it does not; `main_applicable` and
/// `cr_gap_applicable` say which case occurred. `bound_cr_plain` applies
/// unconditionally.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub sigma1: f64,
    pub sigma2: f64,
    pub dist: f64,
    pub qdist: f64,
    pub bound_main: f64,
    pub bound_improved: f64,
    pub bound_cr_plain: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_cr_gap: Option<f64>,
    pub hyp: Hypotheses,
    pub main_applicable: bool,
    pub cr_gap_applicable: bool,
    pub main_holds: bool,
    pub improved_holds: bool,
    pub cr_plain_holds: bool,
    pub cr_gap_holds: bool,
}

/// Replay of the four-summand identity behind the main bound. With the
/// inputs labeled so `sigma1 <= sigma2`, `u2` the unitary extension of the
/// second angular factor, `x = u2* q1 - p` (`p` the projector onto the
/// orthogonal complement of the second kernel) and `d_j = h_j + sigma_j *
/// p_kernel_j`, the identity `x d1 + d2 x = s1 + s2 + s3 + s4` holds with
/// every summand norm at most `dist`, and `|x| <= |x d1 + d2 x| /
/// (sigma1 + sigma2)` by spectra separation. `x_norm` equals the angular
/// distance of the pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MainTrace {
    pub sigma1: f64,
    pub sigma2: f64,
    pub dist: f64,
    pub x_norm: f64,
    pub summand_norms: [f64; 4],
    pub summands_hold: bool,
    /// `|x d1 + d2 x - (s1 + s2 + s3 + s4)|`, zero up to rounding.
    pub identity_residual: f64,
    /// `|x d1 + d2 x| / (sigma1 + sigma2)`.
    pub sylvester_bound: f64,
    pub sylvester_holds: bool,
}

/// Replay of the unconditional-bound identity, with `x = q2* q1 - p`.
/// The first and second summands are bounded by `dist`, the kernel term by
/// `(sigma1 / sigma2) * dist` (inputs labeled so `sigma1 <= sigma2`), the
/// third term vanishes identically, and the residual range term
/// `|(i - q2 q2*) q1|` never exceeds the symmetric range gap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrTrace {
    pub sigma1: f64,
    pub sigma2: f64,
    pub dist: f64,
    pub x_norm: f64,
    pub first_term_norm: f64,
    pub first_holds: bool,
    pub second_term_norm: f64,
    pub second_holds: bool,
    pub kernel_term_norm: f64,
    pub kernel_bound: f64,
    pub kernel_holds: bool,
    pub vanishing_term_norm: f64,
    pub vanishing_ok: bool,
    pub range_term_norm: f64,
    pub range_gap_hat: f64,
    pub range_holds: bool,
    /// `3 * dist / (sigma1 + sigma2)`, an upper bound for `x_norm`.
    pub x_bound: f64,
    pub x_bound_holds: bool,
}

/// Consequences of a small equal-rank perturbation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmallPertReport {
    /// Ranks agree and `dist < max(sigma1, sigma2) / 3`. Implies
    /// `gap_lt1`.
    pub applies: bool,
    /// Symmetric range gap is below `1 - 1e-8`.
    pub gap_lt1: bool,
    /// `|pinv(a1) - pinv(a2)| <= 2 |pinv(a1)| |pinv(a2)| dist`, checked
    /// whenever the ranks agree and vacuously true otherwise.
    pub wedin_holds: bool,
}

/// One step of the punctured-circle scan: the sample point and the
/// distance from its angular factor to the next sample's (wrapping
/// around).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanPoint {
    /// Sample point as `[re, im]`.
    pub lambda: [f64; 2],
    pub qdist: f64,
}

fn ensure_same_shape(a1: &Matrix, a2: &Matrix) -> Result<()> {
    if a1.rows() != a2.rows() || a1.cols() != a2.cols() {
        return Err(Error::ShapeMismatch(format!(
            "operators are {}x{} and {}x{}",
            a1.rows(),
            a1.cols(),
            a2.rows(),
            a2.cols()
        )));
    }
    Ok(())
}

fn gap_says_zero(report: &GapReport, class: SurjectivityClass) -> bool {
    report.gap_diff <= GAP_DECISION_TOL
        && matches!(
            class,
            SurjectivityClass::BothSurjective | SurjectivityClass::NeitherSurjective
        )
}

fn hypotheses_from(
    shape1: (usize, usize),
    shape2: (usize, usize),
    d1: &Decomposition,
    d2: &Decomposition,
) -> Result<Hypotheses> {
    let ranges = gap_report(&d1.range, &d2.range)?;
    let kernels = gap_report(&d1.kernel, &d2.kernel)?;
    let range_class = classify_cross_projections(&d1.range, &d2.range)?;
    let kernel_class = classify_cross_projections(&d1.kernel, &d2.kernel)?;
    Ok(Hypotheses {
        same_shape: shape1 == shape2,
        index_equal: shape1.1 as i64 - shape1.0 as i64 == shape2.1 as i64 - shape2.0 as i64,
        rank1: d1.polar.rank,
        rank2: d2.polar.rank,
        delta_range_zero: gap_says_zero(&ranges, range_class),
        delta_kernel_zero: gap_says_zero(&kernels, kernel_class),
        gap_range_lt1: ranges.gap_hat < 1.0 - GAP_DECISION_TOL,
        gap_kernel_lt1: kernels.gap_hat < 1.0 - GAP_DECISION_TOL,
    })
}

/// Computes ranks, range/kernel gap decisions and the index comparison for
/// a same-shape pair of nonzero operators.
///
/// # Errors
/// `ShapeMismatch`, `ZeroOperator`.
pub fn check_hypotheses(a1: &Matrix, a2: &Matrix, tol: &TolerancePolicy) -> Result<Hypotheses> {
    ensure_same_shape(a1, a2)?;
    let d1 = decompose(a1, tol)?;
    let d2 = decompose(a2, tol)?;
    hypotheses_from(
        (a1.rows(), a1.cols()),
        (a2.rows(), a2.cols()),
        &d1,
        &d2,
    )
}

pub(crate) fn certificate_from(
    a1: &Matrix,
    a2: &Matrix,
    d1: &Decomposition,
    d2: &Decomposition,
    tol: &TolerancePolicy,
) -> Result<Certificate> {
    let hyp = hypotheses_from((a1.rows(), a1.cols()), (a2.rows(), a2.cols()), d1, d2)?;
    let dist = (a1 - a2).spectral_norm();
    let qdist = (&d1.polar.q - &d2.polar.q).spectral_norm();
    let (s1, s2) = (d1.polar.sigma, d2.polar.sigma);
    let sum = s1 + s2;
    let smax = s1.max(s2);
    let smin = s1.min(s2);

    let bound_main = 4.0 * dist / sum;
    let bound_improved = dist * (1.0 + (1.0 + (s1 * s1 + s2 * s2) / (smax * smax)).sqrt()) / sum;
    let bound_cr_plain = dist * (3.0 / sum + 1.0 / smin);
    let main_applicable = hyp.index_equal && (hyp.delta_range_zero || hyp.delta_kernel_zero);
    let cr_gap_applicable = hyp.gap_range_lt1 || hyp.gap_kernel_lt1;
    let bound_cr_gap = if cr_gap_applicable {
        Some(5.0 * dist / sum)
    } else {
        None
    };

    let holds = |bound: f64| qdist <= bound * (1.0 + tol.bound_slack);
    Ok(Certificate {
        sigma1: s1,
        sigma2: s2,
        dist,
        qdist,
        bound_main,
        bound_improved,
        bound_cr_plain,
        bound_cr_gap,
        main_applicable,
        cr_gap_applicable,
        main_holds: !main_applicable || holds(bound_main),
        improved_holds: !main_applicable || holds(bound_improved),
        cr_plain_holds: holds(bound_cr_plain),
        cr_gap_holds: bound_cr_gap.map_or(true, holds),
        hyp,
    })
}

/// Evaluates all four bounds against the measured angular distance of a
/// same-shape pair of nonzero operators.
///
/// # Errors
/// `ShapeMismatch`, `ZeroOperator`.
pub fn certify(a1: &Matrix, a2: &Matrix, tol: &TolerancePolicy) -> Result<Certificate> {
    ensure_same_shape(a1, a2)?;
    let d1 = decompose(a1, tol)?;
    let d2 = decompose(a2, tol)?;
    certificate_from(a1, a2, &d1, &d2, tol)
}

/// Orders a decomposed pair so the first component has the smaller reduced
/// minimum modulus.
fn labeled<'a>(
    d1: &'a Decomposition,
    d2: &'a Decomposition,
) -> (&'a Decomposition, &'a Decomposition) {
    if d1.polar.sigma <= d2.polar.sigma {
        (d1, d2)
    } else {
        (d2, d1)
    }
}

/// Replays the four-summand identity behind the main bound for a square
/// pair whose range gap difference vanishes.
///
/// # Errors
/// `NotApplicable` when the pair is not square, some operator is zero, the
/// indices differ or the range gap difference is not numerically zero.
pub fn proof_trace_main(a1: &Matrix, a2: &Matrix, tol: &TolerancePolicy) -> Result<MainTrace> {
    if a1.rows() != a1.cols() || a2.rows() != a2.cols() || a1.rows() != a2.rows() {
        return Err(Error::NotApplicable(
            "the main-bound trace needs square operators of equal size".into(),
        ));
    }
    let as_not_applicable = |e: Error| match e {
        Error::ZeroOperator => Error::NotApplicable("zero operator".into()),
        other => other,
    };
    let d1 = decompose(a1, tol).map_err(as_not_applicable)?;
    let d2 = decompose(a2, tol).map_err(as_not_applicable)?;
    let hyp = hypotheses_from((a1.rows(), a1.cols()), (a2.rows(), a2.cols()), &d1, &d2)?;
    if !hyp.delta_range_zero {
        return Err(Error::NotApplicable(
            "the range gap difference of the pair is not zero".into(),
        ));
    }

    let (lo, hi) = labeled(&d1, &d2);
    let (a_lo, a_hi) = if std::ptr::eq(lo, &d1) { (a1, a2) } else { (a2, a1) };
    let n = a_lo.rows();
    let (sig_lo, sig_hi) = (lo.polar.sigma, hi.polar.sigma);
    let dist = (a_lo - a_hi).spectral_norm();

    let u2 = &hi.svd.u * &hi.svd.v.adjoint();
    let pn1 = lo.kernel.projector();
    let pn2 = hi.kernel.projector();
    let pn2_perp = &Matrix::identity(n) - &pn2;
    let h1 = &lo.polar.h;
    let h2 = &hi.polar.h;
    let u2q1 = &u2.adjoint() * &lo.polar.q;

    let x = &u2q1 - &pn2_perp;
    let s1 = &(&u2q1 * h1) - h2;
    let s2 = &(h2 * &u2q1) - &(&pn2_perp * h1);
    let s3 = (&pn2_perp * &pn1).scale(-sig_lo);
    let s4 = (&pn2 * &u2q1).scale(sig_hi);

    let d1m = h1 + &pn1.scale(sig_lo);
    let d2m = h2 + &pn2.scale(sig_hi);
    let lhs = &(&x * &d1m) + &(&d2m * &x);
    let total = &(&(&s1 + &s2) + &s3) + &s4;

    let summand_norms = [
        s1.spectral_norm(),
        s2.spectral_norm(),
        s3.spectral_norm(),
        s4.spectral_norm(),
    ];
    let slack = 1.0 + tol.bound_slack;
    let lhs_norm = lhs.spectral_norm();
    let x_norm = x.spectral_norm();
    let sylvester_bound = lhs_norm / (sig_lo + sig_hi);
    Ok(MainTrace {
        sigma1: sig_lo,
        sigma2: sig_hi,
        dist,
        x_norm,
        summand_norms,
        summands_hold: summand_norms.iter().all(|&s| s <= dist * slack),
        identity_residual: (&lhs - &total).spectral_norm(),
        sylvester_bound,
        sylvester_holds: x_norm <= sylvester_bound * slack,
    })
}

/// Replays the identity behind the unconditional bound for any same-shape
/// pair of nonzero operators.
///
/// # Errors
/// `ShapeMismatch`, `ZeroOperator`.
pub fn proof_trace_cr(a1: &Matrix, a2: &Matrix, tol: &TolerancePolicy) -> Result<CrTrace> {
    ensure_same_shape(a1, a2)?;
    let d1 = decompose(a1, tol)?;
    let d2 = decompose(a2, tol)?;
    let (lo, hi) = labeled(&d1, &d2);
    let (a_lo, a_hi) = if std::ptr::eq(lo, &d1) { (a1, a2) } else { (a2, a1) };
    let (m, n) = (a_lo.rows(), a_lo.cols());
    let (sig_lo, sig_hi) = (lo.polar.sigma, hi.polar.sigma);
    let dist = (a_lo - a_hi).spectral_norm();

    let q1 = &lo.polar.q;
    let q2 = &hi.polar.q;
    let h1 = &lo.polar.h;
    let h2 = &hi.polar.h;
    let pn1 = lo.kernel.projector();
    let pn2 = hi.kernel.projector();
    let pn1_perp = &Matrix::identity(n) - &pn1;
    let pn2_perp = &Matrix::identity(n) - &pn2;
    let q2q1 = &q2.adjoint() * q1;

    let x = &q2q1 - &pn2_perp;
    let first = &(&q2q1 * h1) - h2;
    let second = &(h2 * &q2q1) - &(&pn2_perp * h1);
    let kernel_term = (&pn2_perp * &pn1).scale(sig_lo);
    let vanishing = (&(&pn2 * &q2q1) * &pn1_perp).scale(sig_hi);
    let range_term = &(&Matrix::identity(m) - &(q2 * &q2.adjoint())) * q1;
    let range_gap_hat = gap_report(&hi.range, &lo.range)?.gap_hat;

    let slack = 1.0 + tol.bound_slack;
    let first_term_norm = first.spectral_norm();
    let second_term_norm = second.spectral_norm();
    let kernel_term_norm = kernel_term.spectral_norm();
    let kernel_bound = sig_lo / sig_hi * dist;
    let vanishing_term_norm = vanishing.spectral_norm();
    let range_term_norm = range_term.spectral_norm();
    let x_norm = x.spectral_norm();
    let x_bound = 3.0 * dist / (sig_lo + sig_hi);
    Ok(CrTrace {
        sigma1: sig_lo,
        sigma2: sig_hi,
        dist,
        x_norm,
        first_term_norm,
        first_holds: first_term_norm <= dist * slack,
        second_term_norm,
        second_holds: second_term_norm <= dist * slack,
        kernel_term_norm,
        kernel_bound,
        kernel_holds: kernel_term_norm <= kernel_bound * slack,
        vanishing_term_norm,
        vanishing_ok: vanishing_term_norm <= 1e-10,
        range_term_norm,
        range_gap_hat,
        range_holds: range_term_norm <= range_gap_hat + GAP_DECISION_TOL,
        x_bound,
        x_bound_holds: x_norm <= x_bound * slack,
    })
}

/// Checks the small-perturbation consequences on a same-shape pair: equal
/// ranks with `dist < max(sigma1, sigma2) / 3` force the range gap below
/// one, and equal ranks give the pseudo-inverse Lipschitz estimate.
///
/// # Errors
/// `ShapeMismatch`, `ZeroOperator`.
pub fn small_pert_implication(
    a1: &Matrix,
    a2: &Matrix,
    tol: &TolerancePolicy,
) -> Result<SmallPertReport> {
    ensure_same_shape(a1, a2)?;
    let d1 = decompose(a1, tol)?;
    let d2 = decompose(a2, tol)?;
    let dist = (a1 - a2).spectral_norm();
    let ranks_equal = d1.polar.rank == d2.polar.rank;
    let applies = ranks_equal && dist < d1.polar.sigma.max(d2.polar.sigma) / 3.0;
    let gap_lt1 = gap_report(&d1.range, &d2.range)?.gap_hat < 1.0 - GAP_DECISION_TOL;
    let wedin_holds = if ranks_equal {
        let p1 = pinv(a1, tol)?;
        let p2 = pinv(a2, tol)?;
        let lhs = (&p1 - &p2).spectral_norm();
        let rhs = 2.0 * p1.spectral_norm() * p2.spectral_norm() * dist;
        lhs <= rhs * (1.0 + tol.bound_slack)
    } else {
        true
    };
    Ok(SmallPertReport {
        applies,
        gap_lt1,
        wedin_holds,
    })
}

/// Samples `lambda` equally spaced on the circle of the given center and
/// radius and returns, for every sample, the distance between the angular
/// factors of `a - lambda` at this sample and at the next one (the last
/// pair wraps around). Shrinking consecutive distances as `samples` grows
/// witness continuity of the angular factor along the circle.
///
/// # Errors
/// `NotIndexZero` for non-square `a`, `InvalidInput` for a non-positive
/// radius or zero samples, `ZeroOperator` when some sample hits `a`
/// exactly.
pub fn scan_resolvent_angular(
    a: &Matrix,
    center: Complex64,
    radius: f64,
    samples: usize,
    tol: &TolerancePolicy,
) -> Result<Vec<ScanPoint>> {
    if !a.is_square() {
        return Err(Error::NotIndexZero {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be positive".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidInput("radius must be positive".into()));
    }
    let n = a.rows();
    let mut points = Vec::with_capacity(samples);
    let mut factors = Vec::with_capacity(samples);
    for k in 0..samples {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
        let lambda = center + Complex64::from_polar(radius, theta);
        let shifted = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                a[(i, j)] - lambda
            } else {
                a[(i, j)]
            }
        });
        points.push(lambda);
        factors.push(polar_factor(&shifted, tol)?);
    }
    Ok((0..samples)
        .map(|k| ScanPoint {
            lambda: [points[k].re, points[k].im],
            qdist: (&factors[k] - &factors[(k + 1) % samples]).spectral_norm(),
        })
        .collect())
}

fn polar_factor(a: &Matrix, tol: &TolerancePolicy) -> Result<Matrix> {
    Ok(decompose(a, tol)?.polar.q)
}
