//! Subspaces of C^n, directed gaps between them, and the surjectivity
//! classification of their cross-projections.
//!
//! The directed gap `delta(V, W) = ‖(I - P_W) B_V‖` measures how far V
//! sticks out of W; it is not symmetric. `gap_hat` is the max of both
//! directions and equals `‖P_V - P_W‖`; `gap_diff` is the absolute
//! difference of the two directions. By convention the zero subspace has
//! directed gap 0 into anything.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::matrix::{orthonormalize, Matrix, TolerancePolicy};
use crate::Result;

/// Singular values of a cross-projection Gram matrix live on the scale of
/// principal cosines, bounded by 1. Surjectivity decisions therefore use
/// this fixed cut instead of the sigma-max-relative rank cut, which would
/// count pure roundoff in exactly-orthogonal configurations as rank.
const SURJECTIVITY_CUT: f64 = 1e-8;

/// Subspace of C^n, stored as an orthonormal basis. The zero subspace has a
/// basis with no columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient: usize,
    basis: Matrix,
}

/// Both directed gaps plus their max and absolute difference.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GapReport {
    pub delta_vw: f64,
    pub delta_wv: f64,
    pub gap_hat: f64,
    pub gap_diff: f64,
}

/// Joint surjectivity of the two cross-projections `P_V|W` and `P_W|V`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurjectivityClass {
    BothSurjective,
    NeitherSurjective,
    Mixed,
}

impl Subspace {
    /// Wraps a basis that must already be orthonormal within `1e-12`.
    ///
    /// # Errors
    /// `EmptyMatrix` for an ambient dimension of zero, `NotOrthonormal` when
    /// the Gram residual is too large.
    pub fn new(basis: Matrix) -> Result<Self> {
        if basis.rows() == 0 {
            return Err(Error::EmptyMatrix("subspace ambient dimension".into()));
        }
        if basis.cols() > 0 {
            let gram = &basis.adjoint() * &basis;
            let residual = (&gram - &Matrix::identity(basis.cols())).spectral_norm();
            if residual > 1e-12 {
                return Err(Error::NotOrthonormal { residual });
            }
        }
        Ok(Subspace {
            ambient: basis.rows(),
            basis,
        })
    }

    /// Wraps a basis known to be orthonormal by construction (columns of a
    /// computed unitary factor), skipping the Gram check.
    pub(crate) fn from_orthonormal(basis: Matrix) -> Self {
        debug_assert!(basis.rows() > 0);
        Subspace {
            ambient: basis.rows(),
            basis,
        }
    }

    /// Column space of an arbitrary matrix, orthonormalized; the dimension
    /// is the numerical rank.
    pub fn from_span(a: &Matrix, tol: &TolerancePolicy) -> Result<Self> {
        if a.rows() == 0 {
            return Err(Error::EmptyMatrix("subspace ambient dimension".into()));
        }
        Ok(Subspace::from_orthonormal(orthonormalize(a, tol)?))
    }

    pub fn zero(ambient: usize) -> Self {
        assert!(ambient > 0);
        Subspace {
            ambient,
            basis: Matrix::zeros(ambient, 0),
        }
    }

    pub fn full(ambient: usize) -> Self {
        assert!(ambient > 0);
        Subspace {
            ambient,
            basis: Matrix::identity(ambient),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Orthogonal projector onto the subspace; the zero subspace yields the
    /// zero matrix.
    pub fn projector(&self) -> Matrix {
        if self.dim() == 0 {
            return Matrix::zeros(self.ambient, self.ambient);
        }
        &self.basis * &self.basis.adjoint()
    }

    /// Orthogonal complement, materialized as an explicit basis.
    pub fn complement(&self) -> Result<Subspace> {
        let tol = TolerancePolicy::default();
        let residual = &Matrix::identity(self.ambient) - &self.projector();
        // The residual's singular values cluster at 0 and 1, but the small
        // cluster sits at the orthonormality defect of the stored basis,
        // which can exceed the generic rank cut. Splitting at 1/2 keeps the
        // dimension exact no matter how much rounding the basis carries.
        let f = crate::spectral::svd(&residual, &tol)?;
        let dim = f.singvals.iter().take_while(|s| **s > 0.5).count();
        Ok(Subspace::from_orthonormal(f.u.columns(0, dim)))
    }

    /// Serializes to the interchange JSON format.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("subspace serialization")
    }

    /// Parses the interchange format. The basis is re-orthonormalized; the
    /// returned flag is true when the input already was orthonormal within
    /// `1e-12`.
    pub fn from_json(text: &str) -> Result<(Subspace, bool)> {
        #[derive(Deserialize)]
        struct Repr {
            ambient: usize,
            basis: Matrix,
        }
        let repr: Repr =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("subspace JSON: {e}")))?;
        if repr.ambient == 0 {
            return Err(Error::InvalidInput("subspace ambient dimension must be positive".into()));
        }
        if repr.basis.rows() != repr.ambient {
            return Err(Error::InvalidInput(format!(
                "basis has {} rows but ambient dimension is {}",
                repr.basis.rows(),
                repr.ambient
            )));
        }
        let was_orthonormal = if repr.basis.cols() == 0 {
            true
        } else {
            let gram = &repr.basis.adjoint() * &repr.basis;
            (&gram - &Matrix::identity(repr.basis.cols())).spectral_norm() <= 1e-12
        };
        let tol = TolerancePolicy::default();
        let subspace = Subspace::from_span(&repr.basis, &tol)?;
        Ok((subspace, was_orthonormal))
    }
}

impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            ambient: usize,
            basis: &'a Matrix,
        }
        Repr {
            ambient: self.ambient,
            basis: &self.basis,
        }
        .serialize(serializer)
    }
}

fn check_ambient(v: &Subspace, w: &Subspace) -> Result<()> {
    if v.ambient != w.ambient {
        return Err(Error::AmbientMismatch {
            left: v.ambient,
            right: w.ambient,
        });
    }
    Ok(())
}

/// Directed gap `delta(V, W) = ‖(I - P_W) B_V‖`, clamped into [0, 1].
pub fn directed_gap(v: &Subspace, w: &Subspace) -> Result<f64> {
    check_ambient(v, w)?;
    if v.dim() == 0 {
        return Ok(0.0);
    }
    let coeff = &w.basis().adjoint() * v.basis();
    let residual = v.basis() - &(w.basis() * &coeff);
    Ok(residual.spectral_norm().clamp(0.0, 1.0))
}

/// Both directed gaps, their maximum and their absolute difference.
pub fn gap_report(v: &Subspace, w: &Subspace) -> Result<GapReport> {
    let delta_vw = directed_gap(v, w)?;
    let delta_wv = directed_gap(w, v)?;
    Ok(GapReport {
        delta_vw,
        delta_wv,
        gap_hat: delta_vw.max(delta_wv),
        gap_diff: (delta_vw - delta_wv).abs(),
    })
}

/// Decides whether `P_V|W` and `P_W|V` are surjective, from the rank of the
/// cross Gram matrix `B_V* B_W`. A map onto the zero space counts as
/// surjective; a map from the zero space onto a nonzero space does not.
pub fn classify_cross_projections(v: &Subspace, w: &Subspace) -> Result<SurjectivityClass> {
    check_ambient(v, w)?;
    let (dv, dw) = (v.dim(), w.dim());
    if dv == 0 && dw == 0 {
        return Ok(SurjectivityClass::BothSurjective);
    }
    if dv == 0 || dw == 0 {
        return Ok(SurjectivityClass::Mixed);
    }
    let gram = &v.basis().adjoint() * w.basis();
    let rank = crate::spectral::singular_values(&gram)?
        .iter()
        .filter(|&&s| s > SURJECTIVITY_CUT)
        .count();
    let onto_v = rank == dv;
    let onto_w = rank == dw;
    Ok(match (onto_v, onto_w) {
        (true, true) => SurjectivityClass::BothSurjective,
        (false, false) => SurjectivityClass::NeitherSurjective,
        _ => SurjectivityClass::Mixed,
    })
}
