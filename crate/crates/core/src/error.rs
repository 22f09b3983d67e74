//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Two operators that must act between the same spaces do not.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The operation needs a matrix with at least one row and one column.
    #[error("empty matrix: {0}")]
    EmptyMatrix(String),

    /// The operation is undefined for the zero operator.
    #[error("zero operator: every singular value is below the rank cut")]
    ZeroOperator,

    /// A unitary extension of the angular factor only exists for square
    /// matrices.
    #[error("not index zero: matrix is {rows}x{cols}, dilate it to a square matrix first")]
    NotIndexZero { rows: usize, cols: usize },

    /// The input was expected to be Hermitian.
    #[error("not Hermitian: ‖a − a*‖ = {defect:.3e} exceeds {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },

    /// The two spectra in a Sylvester equation come too close.
    #[error("spectra overlap: smallest eigenvalue distance {min_dist:.3e} is within {tol:.3e}")]
    SpectraOverlap { min_dist: f64, tol: f64 },

    /// The enclosing-disc geometry behind the Sylvester norm bound fails.
    #[error("geometry violated: spectral separation {delta:.3e} is not positive")]
    GeometryViolated { delta: f64 },

    /// A proof trace was requested for a pair outside its hypotheses.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// Rank-preserving perturbations must stay below half the reduced
    /// minimum modulus.
    #[error("epsilon too large: {epsilon:.3e} is not below {limit:.3e}")]
    EpsilonTooLarge { epsilon: f64, limit: f64 },

    /// Jacobi sweeps did not converge within the iteration cap.
    #[error("no convergence after {sweeps} Jacobi sweeps")]
    NonConvergence { sweeps: usize },

    /// A subspace basis failed the orthonormality check.
    #[error("basis not orthonormal: ‖b*b − I‖ = {residual:.3e}")]
    NotOrthonormal { residual: f64 },

    /// Subspaces of different ambient spaces cannot be compared.
    #[error("ambient dimension mismatch: {left} vs {right}")]
    AmbientMismatch { left: usize, right: usize },

    /// An instance or corpus specification is inconsistent.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// `named_instance` was asked for a name it does not know.
    #[error("unknown instance name: {0:?}")]
    UnknownInstance(String),

    /// A matrix or subspace could not be parsed from JSON.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
