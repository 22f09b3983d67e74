//! Dense complex-matrix toolkit for polar decompositions and their
//! stability under perturbation.
//!
//! The crate computes polar decompositions `A = Q |A|` with the angular
//! factor `Q` a partial isometry, measures directed gaps between subspaces,
//! solves small Hermitian Sylvester equations, and certifies perturbation
//! inequalities of the form `‖Q₁ − Q₂‖ ≤ c(σ₁, σ₂) · ‖A₁ − A₂‖` on concrete
//! instances. A seeded instance generator and corpus runner make the checks
//! reproducible.
//!
//! All numerics are done on row-major dense matrices over `Complex64` with
//! a hand-written one-sided Jacobi SVD, chosen for its high relative
//! accuracy on the smallest singular values, which the certified bounds
//! divide by.

pub mod ensemble;
pub mod error;
pub mod matrix;
pub mod perturb;
pub mod polar;
pub mod spectral;
pub mod subspace;
pub mod sylvester;

pub use error::Error;
pub use matrix::{Matrix, TolerancePolicy};
pub use num_complex::Complex64;

/// Shorthand used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
