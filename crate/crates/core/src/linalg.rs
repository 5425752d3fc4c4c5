//! Dense symmetric matrices.
//!
//! [`SymMatrix`] wraps an `nalgebra` matrix and only exposes operations that
//! keep `(i, j)` and `(j, i)` bit-identical: element writes go to both
//! positions, and every arithmetic operator is elementwise.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::{Cholesky, DMatrix, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative pivot tolerance below which a Cholesky factorization is treated
/// as a failure.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn zeros(p: usize) -> Self {
        SymMatrix(DMatrix::zeros(p, p))
    }

    pub fn identity(p: usize) -> Self {
        SymMatrix(DMatrix::identity(p, p))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let p = diag.len();
        let mut m = DMatrix::zeros(p, p);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        SymMatrix(m)
    }

    /// Builds a matrix by evaluating `f(i, j)` on the upper triangle only.
    pub fn from_fn(p: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(p, p);
        for j in 0..p {
            for i in 0..=j {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix(m)
    }

    /// Averages `m` with its transpose. The result is exactly symmetric since
    /// floating-point addition commutes.
    pub fn symmetrize(m: &DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let sym = (m + m.transpose()) * 0.5;
        Ok(SymMatrix(sym))
    }

    /// Accepts a dense matrix whose asymmetry is at most `rel_tol` relative
    /// to its largest entry, then symmetrizes it.
    pub fn try_from_dense(m: DMatrix<f64>, rel_tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let p = m.nrows();
        for j in 0..p {
            for i in 0..p {
                if !m[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        let scale = m.amax().max(f64::MIN_POSITIVE);
        for j in 0..p {
            for i in 0..j {
                let asymmetry = (m[(i, j)] - m[(j, i)]).abs() / scale;
                if asymmetry > rel_tol {
                    return Err(Error::Asymmetric {
                        row: i,
                        col: j,
                        asymmetry,
                    });
                }
            }
        }
        Self::symmetrize(&m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.0[(i, j)] = value;
        self.0[(j, i)] = value;
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)]).collect()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// `Tr(A B)` for symmetric `A`, `B`, i.e. the Frobenius inner product.
    pub fn trace_product(&self, other: &SymMatrix) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn add_to_diagonal(&mut self, value: f64) {
        for i in 0..self.dim() {
            self.0[(i, i)] += value;
        }
    }

    /// Principal submatrix on `idx`.
    pub fn submatrix(&self, idx: &[usize]) -> SymMatrix {
        let m = idx.len();
        let mut out = DMatrix::zeros(m, m);
        for (b, &j) in idx.iter().enumerate() {
            for (a, &i) in idx.iter().enumerate() {
                out[(a, b)] = self.0[(i, j)];
            }
        }
        SymMatrix(out)
    }

    /// `self[idx, idx] += scale * block`.
    pub fn accumulate_block(&mut self, block: &SymMatrix, idx: &[usize], scale: f64) {
        debug_assert_eq!(block.dim(), idx.len());
        for (b, &j) in idx.iter().enumerate() {
            for (a, &i) in idx.iter().enumerate() {
                self.0[(i, j)] += scale * block.0[(a, b)];
            }
        }
    }

    /// Cholesky factorization with a scaled pivot check: any squared pivot at or
    /// below `PIVOT_TOLERANCE * max_i |A_ii|` counts as a failure.
    pub fn cholesky(&self) -> Result<Cholesky<f64, Dyn>> {
        if !self.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let chol = Cholesky::new(self.0.clone()).ok_or(Error::NotPositiveDefinite)?;
        let scale = (0..self.dim())
            .map(|i| self.0[(i, i)].abs())
            .fold(0.0_f64, f64::max);
        let l = chol.l_dirty();
        for i in 0..self.dim() {
            let pivot = l[(i, i)];
            if !(pivot * pivot > PIVOT_TOLERANCE * scale) {
                return Err(Error::NotPositiveDefinite);
            }
        }
        Ok(chol)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.cholesky().is_ok()
    }

    /// Inverse of a positive definite matrix.
    pub fn inverse_spd(&self) -> Result<SymMatrix> {
        let chol = self.cholesky()?;
        SymMatrix::symmetrize(&chol.inverse())
    }

    pub fn eigen(&self) -> Result<SymmetricEigen<f64, Dyn>> {
        if !self.is_finite() {
            return Err(Error::NonFinite { row: 0, col: 0 });
        }
        Ok(SymmetricEigen::new(self.0.clone()))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        if self.dim() == 0 {
            return Ok(f64::INFINITY);
        }
        Ok(self.eigen()?.eigenvalues.min())
    }

    /// Rebuilds `U diag(values) U^T` from an eigenbasis.
    pub fn from_eigen(vectors: &DMatrix<f64>, values: &[f64]) -> Result<SymMatrix> {
        let p = values.len();
        let mut scaled = vectors.clone();
        for (j, &v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        let m = &scaled * vectors.transpose();
        debug_assert_eq!(m.nrows(), p);
        SymMatrix::symmetrize(&m)
    }
}

impl From<SymMatrix> for DMatrix<f64> {
    fn from(m: SymMatrix) -> Self {
        m.0
    }
}

impl Add<&SymMatrix> for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 + &rhs.0)
    }
}

impl Add for SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: SymMatrix) -> SymMatrix {
        SymMatrix(self.0 + rhs.0)
    }
}

impl Sub<&SymMatrix> for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 - &rhs.0)
    }
}

impl Sub for SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: SymMatrix) -> SymMatrix {
        SymMatrix(self.0 - rhs.0)
    }
}

impl AddAssign<&SymMatrix> for SymMatrix {
    fn add_assign(&mut self, rhs: &SymMatrix) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&SymMatrix> for SymMatrix {
    fn sub_assign(&mut self, rhs: &SymMatrix) {
        self.0 -= &rhs.0;
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, rhs: f64) -> SymMatrix {
        SymMatrix(&self.0 * rhs)
    }
}

impl Mul<f64> for SymMatrix {
    type Output = SymMatrix;
    fn mul(self, rhs: f64) -> SymMatrix {
        SymMatrix(self.0 * rhs)
    }
}

impl Neg for SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        SymMatrix(-self.0)
    }
}
