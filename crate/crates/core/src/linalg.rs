//! Dense Hermitian eigendecomposition and the matrix functions built on it.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operators::{dagger, ComplexMatrix};

/// Eigendecomposition `H = V diag(values) V†` with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Decomposes the Hermitian part `(H + H†)/2` of `h`.
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "eigendecomposition needs a square matrix, got {}x{}",
                h.nrows(),
                h.ncols()
            )));
        }
        let sym = hermitian_part(h);
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors =
            DMatrix::from_fn(h.nrows(), h.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(Self { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (mut col, &lam) in scaled.column_iter_mut().zip(&self.values) {
            col *= f(lam);
        }
        scaled * dagger(&self.vectors)
    }

    /// Frobenius norm of `H V − V Λ`.
    pub fn residual(&self, h: &ComplexMatrix) -> f64 {
        let mut vl = self.vectors.clone();
        for (mut col, &lam) in vl.column_iter_mut().zip(&self.values) {
            col *= C64::new(lam, 0.0);
        }
        (h * &self.vectors - vl).norm()
    }
}

pub fn hermitian_part(h: &ComplexMatrix) -> ComplexMatrix {
    (h + h.adjoint()) * C64::new(0.5, 0.0)
}

/// Exponential of an anti-Hermitian generator `G`, computed as `exp(-iK)` with
/// `K = iG` Hermitian, so the result is unitary to working precision.
pub fn expm_anti_hermitian(generator: &ComplexMatrix) -> Result<ComplexMatrix> {
    let k = generator * C64::i();
    let eig = HermitianEigen::new(&k)?;
    Ok(eig.map(|lam| C64::new(0.0, -lam).exp()))
}

/// Sorted eigenvalues of the Hermitian part of `h`.
pub fn eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(HermitianEigen::new(h)?.values)
}

/// Largest absolute entry of `a`.
pub fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
