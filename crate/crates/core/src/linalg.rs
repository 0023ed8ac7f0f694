//! Dense complex linear algebra shared by the state, generator and entropy code.
//!
//! Matrices are stored as `nalgebra::DMatrix<Complex64>`; the Hermitian
//! eigensolver and the SVD run through `faer`.

use faer::{c64, Mat, Side};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Spectral decomposition `A = U diag(values) U†` of a Hermitian matrix.
/// Eigenvalues ascend.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `U diag(f(λ)) U†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        let mut scaled = self.vectors.clone();
        for (j, &w) in fv.iter().enumerate() {
            scaled.column_mut(j).scale_mut(w);
        }
        let mut out = CMatrix::zeros(n, n);
        out.gemm(ONE, &scaled, &self.vectors.adjoint(), ZERO);
        out
    }

    /// Diagonal of `U† A U`, i.e. the weight `A` puts on each eigenvector.
    pub fn weights_of(&self, a: &CMatrix) -> Vec<f64> {
        let au = a * &self.vectors;
        (0..self.values.len())
            .map(|j| self.vectors.column(j).dotc(&au.column(j)).re)
            .collect()
    }
}

fn to_faer(m: &CMatrix) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        c64::new(z.re, z.im)
    })
}

pub(crate) fn is_diagonal(m: &CMatrix) -> bool {
    let n = m.nrows();
    (0..n).all(|j| (0..n).all(|i| i == j || m[(i, j)] == ZERO))
}

/// Eigendecomposition of a Hermitian matrix. Only the lower triangle is read.
/// Exactly diagonal inputs skip the solver.
pub fn hermitian_eigen(m: &CMatrix) -> Result<HermitianEigen> {
    let n = m.nrows();
    if is_diagonal(m) {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| m[(a, a)].re.total_cmp(&m[(b, b)].re));
        let values = idx.iter().map(|&i| m[(i, i)].re).collect();
        let mut vectors = CMatrix::zeros(n, n);
        for (col, &i) in idx.iter().enumerate() {
            vectors[(i, col)] = ONE;
        }
        return Ok(HermitianEigen { values, vectors });
    }
    let evd = to_faer(m)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let values = (0..n).map(|i| s[i].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| {
        let z = u[(i, j)];
        Complex64::new(z.re, z.im)
    });
    Ok(HermitianEigen { values, vectors })
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    if is_diagonal(m) {
        let mut v: Vec<f64> = m.diagonal().iter().map(|z| z.re).collect();
        v.sort_by(f64::total_cmp);
        return Ok(v);
    }
    to_faer(m)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Linalg(format!("{e:?}")))
}

/// Singular values (descending) and the right singular vector belonging to the
/// smallest one.
pub(crate) fn smallest_right_singular(m: &CMatrix) -> Result<(Vec<f64>, DVector<Complex64>)> {
    let svd = to_faer(m).svd().map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    let v = svd.V();
    let k = m.ncols().min(m.nrows());
    let sigma: Vec<f64> = (0..k).map(|i| s[i].re).collect();
    let last = m.ncols() - 1;
    let null = DVector::from_fn(m.ncols(), |i, _| {
        let z = v[(i, last)];
        Complex64::new(z.re, z.im)
    });
    Ok((sigma, null))
}

/// `(A + A†) / 2`
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// `Tr(A B)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for j in 0..n {
        for i in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}
