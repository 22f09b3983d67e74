//! Dense row-major complex matrices and the tolerance policy used by every
//! rank and residual decision in the crate.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::Result;

/// Tolerances shared by all operations.
///
/// `rank_cut_factor` scales the rank cut: a singular value counts as nonzero
/// iff it exceeds `rank_cut_factor * max(rows, cols) * ε * σ_max`.
/// `bound_slack` is the multiplicative slack granted to certified
/// inequalities, `residual_tol` the relative tolerance for residual checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TolerancePolicy {
    pub rank_cut_factor: f64,
    pub bound_slack: f64,
    pub residual_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy {
            rank_cut_factor: 1.0,
            bound_slack: 1e-8,
            residual_tol: 1e-10,
        }
    }
}

impl TolerancePolicy {
    /// Threshold below which a singular value of a `rows x cols` matrix with
    /// largest singular value `sigma_max` is treated as zero.
    pub fn rank_cut(&self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        self.rank_cut_factor * rows.max(cols) as f64 * f64::EPSILON * sigma_max
    }
}

/// Dense complex matrix, row-major.
///
/// Zero columns (and, for adjoints of such matrices, zero rows) are legal so
/// that bases of the zero subspace can be represented; operator-level
/// routines reject empty matrices explicitly.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    /// Builds a matrix from row-major data.
    ///
    /// # Panics
    /// Panics if `data.len() != rows * cols` or any entry is not finite.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "matrix data length {} does not match {}x{}",
            data.len(),
            rows,
            cols
        );
        assert!(
            data.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
            "matrix entries must be finite"
        );
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Square diagonal matrix with real diagonal entries.
    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Matrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Rectangular diagonal matrix: entry `(k, k)` is `diag[k]`, rest zero.
    pub fn rect_diag(rows: usize, cols: usize, diag: &[f64]) -> Self {
        assert!(diag.len() <= rows.min(cols));
        let mut m = Matrix::zeros(rows, cols);
        for (k, &d) in diag.iter().enumerate() {
            m[(k, k)] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// True when the matrix has no entries at all.
    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Copy of columns `start..end` as a `rows x (end - start)` matrix.
    pub fn columns(&self, start: usize, end: usize) -> Matrix {
        assert!(start <= end && end <= self.cols);
        Matrix::from_fn(self.rows, end - start, |i, j| self[(i, start + j)])
    }

    pub fn scale(&self, s: f64) -> Matrix {
        self.scale_c(Complex64::new(s, 0.0))
    }

    pub fn scale_c(&self, s: Complex64) -> Matrix {
        let data = self.data.iter().map(|z| z * s).collect();
        Matrix::new(self.rows, self.cols, data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value; 0 for the zero matrix and for matrices
    /// without entries.
    pub fn spectral_norm(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        crate::spectral::singular_values(self)
            .expect("Jacobi SVD convergence")
            .first()
            .copied()
            .unwrap_or(0.0)
    }

    /// `‖a - a*‖` in the spectral norm; the matrix must be square.
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square(), "hermitian defect needs a square matrix");
        (self - &self.adjoint()).spectral_norm()
    }

    /// Serializes to the interchange JSON format.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization")
    }

    /// Parses the interchange JSON format, rejecting shape mismatches and
    /// non-finite entries.
    pub fn from_json(text: &str) -> Result<Matrix> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("matrix JSON: {e}")))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:.4}{:+.4}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Matrix::new(self.rows, self.cols, data)
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Matrix::new(self.rows, self.cols, data)
    }
}

impl Neg for &Matrix {
    type Output = Matrix;

    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}

/// Matrix product.
///
/// # Panics
/// Panics on an inner-dimension mismatch.
impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.data[i * self.cols + k];
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += aik * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }
}

impl Add for Matrix {
    type Output = Matrix;

    fn add(self, rhs: Matrix) -> Matrix {
        &self + &rhs
    }
}

impl Sub for Matrix {
    type Output = Matrix;

    fn sub(self, rhs: Matrix) -> Matrix {
        &self - &rhs
    }
}

impl Mul for Matrix {
    type Output = Matrix;

    fn mul(self, rhs: Matrix) -> Matrix {
        &self * &rhs
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = MatrixRepr {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| [z.re, z.im]).collect(),
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        if repr.rows == 0 {
            return Err(D::Error::custom("matrix must have at least one row"));
        }
        if repr.data.len() != repr.rows * repr.cols {
            return Err(D::Error::custom(format!(
                "data length {} does not match {}x{}",
                repr.data.len(),
                repr.rows,
                repr.cols
            )));
        }
        if repr.data.iter().any(|[re, im]| !re.is_finite() || !im.is_finite()) {
            return Err(D::Error::custom("matrix entries must be finite"));
        }
        let data = repr.data.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        Ok(Matrix {
            rows: repr.rows,
            cols: repr.cols,
            data,
        })
    }
}

/// Orthonormal basis of the column space of `a`, with as many columns as the
/// numerical rank of `a` under `tol`. The zero matrix yields a basis with no
/// columns.
pub fn orthonormalize(a: &Matrix, tol: &TolerancePolicy) -> Result<Matrix> {
    if a.cols() == 0 {
        return Ok(Matrix::zeros(a.rows(), 0));
    }
    let svd = crate::spectral::svd(a, tol)?;
    Ok(svd.u.columns(0, svd.rank))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn seeded(seed: u64, rows: usize, cols: usize) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_fn(rows, cols, |_, _| {
            c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))
        })
    }

    #[test]
    fn adjoint_conjugates_scalar() {
        let a = Matrix::new(1, 1, vec![c(0.0, 1.0)]);
        assert_eq!(a.adjoint()[(0, 0)], c(0.0, -1.0));
    }

    #[test]
    fn adjoint_swaps_shape() {
        let z = Matrix::zeros(2, 3);
        let zt = z.adjoint();
        assert_eq!((zt.rows(), zt.cols()), (3, 2));
        assert!(zt.data().iter().all(|v| *v == c(0.0, 0.0)));
    }

    #[test]
    fn adjoint_is_an_involution() {
        let a = seeded(7, 4, 3);
        assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn matmul_matches_naive_oracle() {
        let a = seeded(11, 3, 4);
        let b = seeded(12, 4, 2);
        let fast = &a * &b;
        // Naive triple loop, written independently of Mul.
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..2 {
                let mut acc = c(0.0, 0.0);
                for k in 0..4 {
                    acc += a[(i, k)] * b[(k, j)];
                }
                worst = worst.max((fast[(i, j)] - acc).norm());
            }
        }
        assert!(worst <= 1e-13, "matmul deviates from oracle by {worst}");
    }

    #[test]
    fn matmul_identity_fixes_input() {
        let a = seeded(5, 3, 3);
        assert_eq!(&Matrix::identity(3) * &a, a);
        assert_eq!(&a * &Matrix::identity(3), a);
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn matmul_rejects_bad_shapes() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(2, 3);
        let _ = &a * &b;
    }

    #[test]
    fn spectral_norm_examples() {
        assert!((Matrix::identity(3).spectral_norm() - 1.0).abs() <= 1e-12);
        assert!((Matrix::from_real_diag(&[3.0, -4.0]).spectral_norm() - 4.0).abs() <= 1e-12);
        let nilpotent = Matrix::new(2, 2, vec![c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!((nilpotent.spectral_norm() - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn orthonormalize_collapses_dependent_columns() {
        let a = Matrix::new(2, 2, vec![c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let b = orthonormalize(&a, &TolerancePolicy::default()).unwrap();
        assert_eq!(b.cols(), 1);
        assert!((b[(0, 0)].norm() - 1.0).abs() <= 1e-12);
        assert!(b[(1, 0)].norm() <= 1e-12);
    }

    #[test]
    fn orthonormalize_keeps_full_rank_spans() {
        let a = seeded(21, 5, 3);
        let tol = TolerancePolicy::default();
        let b = orthonormalize(&a, &tol).unwrap();
        assert_eq!(b.cols(), 3);
        let gram_residual = (&(&b.adjoint() * &b) - &Matrix::identity(3)).spectral_norm();
        assert!(gram_residual <= 1e-12);
        // The basis reproduces the columns of a.
        let proj = &b * &(&b.adjoint() * &a);
        assert!((&proj - &a).spectral_norm() <= 1e-10 * a.spectral_norm());
    }

    #[test]
    fn orthonormalize_of_zero_matrix_is_empty() {
        let b = orthonormalize(&Matrix::zeros(3, 2), &TolerancePolicy::default()).unwrap();
        assert_eq!((b.rows(), b.cols()), (3, 0));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let a = seeded(33, 3, 2);
        let back = Matrix::from_json(&a.to_json()).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn json_rejects_length_mismatch() {
        let text = r#"{"rows": 2, "cols": 2, "data": [[1.0, 0.0]]}"#;
        assert!(Matrix::from_json(text).is_err());
    }

    #[test]
    fn json_rejects_non_finite_entries() {
        let text = r#"{"rows": 1, "cols": 1, "data": [[1e999, 0.0]]}"#;
        assert!(Matrix::from_json(text).is_err());
    }

    #[test]
    fn json_accepts_empty_basis_shape() {
        let text = r#"{"rows": 3, "cols": 0, "data": []}"#;
        let m = Matrix::from_json(text).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 0));
    }

    fn small_matrix(seed: u64) -> impl Strategy<Value = Matrix> {
        (1usize..5, 1usize..5).prop_map(move |(r, c)| seeded(seed.wrapping_add((r * 7 + c) as u64), r, c))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn norm_of_adjoint_matches(seed in 0u64..1000) {
            let a = seeded(seed, 4, 3);
            let lhs = a.spectral_norm();
            let rhs = a.adjoint().spectral_norm();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
        }

        #[test]
        fn triangle_inequality(a in small_matrix(1), seed in 0u64..1000) {
            let b = seeded(seed, a.rows(), a.cols());
            let sum = (&a + &b).spectral_norm();
            prop_assert!(sum <= a.spectral_norm() + b.spectral_norm() + 1e-10);
        }

        #[test]
        fn submultiplicative(seed in 0u64..1000) {
            let a = seeded(seed, 3, 4);
            let b = seeded(seed.wrapping_add(1), 4, 2);
            let prod = (&a * &b).spectral_norm();
            prop_assert!(prod <= a.spectral_norm() * b.spectral_norm() + 1e-10);
        }
    }
}
