//! Truncated single-mode Fock spaces, operators on them, and the standard
//! states of a bosonic mode.
//!
//! A [`HilbertSpace`] of dimension `D` keeps the number states `|0⟩ … |D−1⟩`.
//! Finite-level systems (qubits, qutrits) use the same containers with
//! [`SpaceKind::Levels`]; only the laser generators insist on a Fock space.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ZERO};

/// Default Hermiticity / positivity / trace tolerance for state validation.
pub const DEFAULT_STATE_TOLERANCE: f64 = 1e-10;

/// Coherent-state constructors refuse truncations whose discarded mass exceeds this.
pub const COHERENT_LEAKAGE_LIMIT: f64 = 1e-10;

static STATE_TOLERANCE: AtomicU64 = AtomicU64::new(0x3DDB7CDFD9D7BDBB); // 1e-10

/// Current global tolerance used by [`DensityMatrix::new`].
pub fn state_tolerance() -> f64 {
    f64::from_bits(STATE_TOLERANCE.load(Ordering::Relaxed))
}

/// Override the global validation tolerance. Affects every thread.
pub fn set_state_tolerance(tol: f64) {
    assert!(tol > 0.0 && tol.is_finite(), "tolerance must be positive");
    STATE_TOLERANCE.store(tol.to_bits(), Ordering::Relaxed);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// Bosonic mode truncated to `dim` number states.
    Fock,
    /// Generic finite-level system.
    Levels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    dim: usize,
    kind: SpaceKind,
}

impl HilbertSpace {
    pub fn fock(dim: usize) -> Result<Self> {
        Self::with_kind(dim, SpaceKind::Fock)
    }

    pub fn levels(dim: usize) -> Result<Self> {
        Self::with_kind(dim, SpaceKind::Levels)
    }

    fn with_kind(dim: usize, kind: SpaceKind) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!("space dimension must be >= 2, got {dim}")));
        }
        Ok(HilbertSpace { dim, kind })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn is_fock(&self) -> bool {
        self.kind == SpaceKind::Fock
    }

    pub(crate) fn check_same(&self, other: &HilbertSpace) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::dims(self.dim, other.dim));
        }
        Ok(())
    }
}

/// Dense operator on a [`HilbertSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    mat: CMatrix,
}

impl Operator {
    pub fn new(space: HilbertSpace, mat: CMatrix) -> Result<Self> {
        if mat.nrows() != space.dim || mat.ncols() != space.dim {
            return Err(Error::dims(space.dim, mat.nrows().max(mat.ncols())));
        }
        Ok(Operator { space, mat })
    }

    pub(crate) fn from_parts(space: HilbertSpace, mat: CMatrix) -> Self {
        debug_assert_eq!(mat.nrows(), space.dim);
        Operator { space, mat }
    }

    pub fn zeros(space: HilbertSpace) -> Self {
        Operator::from_parts(space, CMatrix::zeros(space.dim, space.dim))
    }

    pub fn identity(space: HilbertSpace) -> Self {
        Operator::from_parts(space, CMatrix::identity(space.dim, space.dim))
    }

    /// Diagonal operator with real entries `diag[n]`.
    pub fn diagonal(space: HilbertSpace, diag: &[f64]) -> Result<Self> {
        if diag.len() != space.dim {
            return Err(Error::dims(space.dim, diag.len()));
        }
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| Complex64::new(x, 0.0)));
        Ok(Operator::from_parts(space, CMatrix::from_diagonal(&d)))
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn adjoint(&self) -> Operator {
        Operator::from_parts(self.space, self.mat.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        linalg::max_abs(&(&self.mat - self.mat.adjoint())) <= tol
    }

    pub fn product(&self, other: &Operator) -> Result<Operator> {
        self.space.check_same(&other.space)?;
        Ok(Operator::from_parts(self.space, &self.mat * &other.mat))
    }

    pub fn plus(&self, other: &Operator) -> Result<Operator> {
        self.space.check_same(&other.space)?;
        Ok(Operator::from_parts(self.space, &self.mat + &other.mat))
    }

    pub fn minus(&self, other: &Operator) -> Result<Operator> {
        self.space.check_same(&other.space)?;
        Ok(Operator::from_parts(self.space, &self.mat - &other.mat))
    }

    pub fn scaled(&self, factor: Complex64) -> Operator {
        Operator::from_parts(self.space, self.mat.map(|z| z * factor))
    }
}

/// Annihilation operator `a` with `a[n−1, n] = √n`.
pub fn annihilation_matrix(space: HilbertSpace) -> Operator {
    let d = space.dim;
    let mut m = CMatrix::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    Operator::from_parts(space, m)
}

pub fn creation_matrix(space: HilbertSpace) -> Operator {
    annihilation_matrix(space).adjoint()
}

/// `a†a = diag(0, 1, …, D−1)`.
pub fn number_operator(space: HilbertSpace) -> Operator {
    function_of_number(space, |n| n as f64)
}

/// `f(a†a)` as the diagonal matrix `diag(f(0), …, f(D−1))`.
pub fn function_of_number(space: HilbertSpace, f: impl Fn(usize) -> f64) -> Operator {
    let diag: Vec<f64> = (0..space.dim).map(f).collect();
    Operator::diagonal(space, &diag).expect("length matches by construction")
}

/// Unit-trace, Hermitian, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    /// Validate against the global [`state_tolerance`].
    pub fn new(op: Operator) -> Result<Self> {
        Self::with_tolerance(op, state_tolerance())
    }

    pub fn with_tolerance(op: Operator, tol: f64) -> Result<Self> {
        if !op.is_hermitian(tol) {
            return Err(Error::InvalidState("not Hermitian".into()));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let herm = linalg::hermitian_part(op.matrix());
        let min = linalg::hermitian_eigenvalues(&herm)?
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(DensityMatrix { op })
    }

    /// Caller guarantees validity (already Hermitized and normalized).
    pub(crate) fn from_trusted(op: Operator) -> Self {
        DensityMatrix { op }
    }

    /// `|ψ⟩⟨ψ|` for the normalized `amplitudes`.
    pub fn pure(space: HilbertSpace, amplitudes: &[Complex64]) -> Result<Self> {
        if amplitudes.len() != space.dim {
            return Err(Error::dims(space.dim, amplitudes.len()));
        }
        let v = DVector::from_column_slice(amplitudes);
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = v / Complex64::new(norm, 0.0);
        let m = &v * v.adjoint();
        Ok(DensityMatrix::from_trusted(Operator::from_parts(space, m)))
    }

    /// Diagonal state with populations `p`, renormalized to unit trace.
    pub fn from_populations(space: HilbertSpace, p: &[f64]) -> Result<Self> {
        if p.len() != space.dim {
            return Err(Error::dims(space.dim, p.len()));
        }
        if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidState("negative or non-finite population".into()));
        }
        let total: f64 = p.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidState("populations sum to zero".into()));
        }
        let scaled: Vec<f64> = p.iter().map(|x| x / total).collect();
        Ok(DensityMatrix::from_trusted(Operator::diagonal(space, &scaled)?))
    }

    pub fn fock_state(space: HilbertSpace, n: usize) -> Result<Self> {
        if n >= space.dim {
            return Err(Error::Truncation(format!("level {n} outside dimension {}", space.dim)));
        }
        let mut p = vec![0.0; space.dim];
        p[n] = 1.0;
        Self::from_populations(space, &p)
    }

    pub fn maximally_mixed(space: HilbertSpace) -> Self {
        let p = vec![1.0 / space.dim as f64; space.dim];
        DensityMatrix::from_trusted(Operator::diagonal(space, &p).expect("sized"))
    }

    pub fn space(&self) -> HilbertSpace {
        self.op.space
    }

    pub fn dim(&self) -> usize {
        self.op.space.dim
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.op.mat
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    /// Diagonal elements `⟨n|ρ|n⟩`.
    pub fn populations(&self) -> Vec<f64> {
        self.op.mat.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::hermitian_eigenvalues(&self.op.mat)
    }

    /// Occupation of the highest retained level.
    pub fn top_occupancy(&self) -> f64 {
        let d = self.dim();
        self.op.mat[(d - 1, d - 1)].re
    }
}

fn coherent_amplitudes(alpha: Complex64, dim: usize) -> (DVector<Complex64>, f64) {
    let r2 = alpha.norm_sqr();
    let (ln_r, phase) = (alpha.norm().ln(), alpha.arg());
    let mut ln_fact = 0.0;
    let v = DVector::from_fn(dim, |n, _| {
        if n == 0 {
            return Complex64::new((-r2 / 2.0).exp(), 0.0);
        }
        if alpha == ZERO {
            return ZERO;
        }
        ln_fact += (n as f64).ln();
        let ln_mag = -r2 / 2.0 + n as f64 * ln_r - 0.5 * ln_fact;
        Complex64::from_polar(ln_mag.exp(), n as f64 * phase)
    });
    let kept = v.norm_squared();
    (v, (1.0 - kept).max(0.0))
}

/// Normalized truncated coherent vector `|α⟩` and the discarded tail mass.
pub fn coherent_vector(alpha: Complex64, space: HilbertSpace) -> Result<(DVector<Complex64>, f64)> {
    let (v, leakage) = coherent_amplitudes(alpha, space.dim);
    if leakage >= COHERENT_LEAKAGE_LIMIT {
        return Err(Error::Truncation(format!(
            "coherent state |{alpha}> loses {leakage:.3e} of its norm at dimension {}",
            space.dim
        )));
    }
    let norm = v.norm();
    Ok((v / Complex64::new(norm, 0.0), leakage))
}

pub fn coherent_state(alpha: Complex64, space: HilbertSpace) -> Result<DensityMatrix> {
    let (v, _) = coherent_vector(alpha, space)?;
    let m = &v * v.adjoint();
    Ok(DensityMatrix::from_trusted(Operator::from_parts(space, m)))
}

/// Geometric populations `p_n ∝ e^{−βω n}` renormalized on the kept levels.
pub fn thermal_state(beta_omega: f64, space: HilbertSpace) -> Result<DensityMatrix> {
    if !(beta_omega > 0.0) || !beta_omega.is_finite() {
        return Err(Error::Domain(format!("beta*omega must be positive, got {beta_omega}")));
    }
    let p: Vec<f64> = (0..space.dim).map(|n| (-beta_omega * n as f64).exp()).collect();
    DensityMatrix::from_populations(space, &p)
}

/// Diagonal Poisson state `e^{−n̄} Σ n̄^k/k! |k⟩⟨k|`, the phase average of `|α⟩⟨α|`
/// with `|α|² = n̄`.
pub fn phase_averaged_coherent(mean: f64, space: HilbertSpace) -> Result<DensityMatrix> {
    if !(mean >= 0.0) {
        return Err(Error::Domain(format!("mean photon number must be >= 0, got {mean}")));
    }
    let (v, leakage) = coherent_amplitudes(Complex64::new(mean.sqrt(), 0.0), space.dim);
    if leakage >= COHERENT_LEAKAGE_LIMIT {
        return Err(Error::Truncation(format!("Poisson({mean}) tail {leakage:.3e} at dimension {}", space.dim)));
    }
    let p: Vec<f64> = v.iter().map(|z| z.norm_sqr()).collect();
    DensityMatrix::from_populations(space, &p)
}

/// Random full-rank state `G G† / Tr(G G†)` with complex Gaussian `G`.
pub fn random_state<R: Rng + ?Sized>(space: HilbertSpace, rng: &mut R) -> DensityMatrix {
    let d = space.dim;
    let g = CMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let m = &g * g.adjoint();
    let tr = m.trace();
    let m = linalg::hermitian_part(&(m / tr));
    DensityMatrix::from_trusted(Operator::from_parts(space, m))
}

/// `Tr(ρ A)`.
pub fn expectation(rho: &DensityMatrix, a: &Operator) -> Result<Complex64> {
    rho.space().check_same(&a.space)?;
    Ok(linalg::trace_product(rho.matrix(), a.matrix()))
}

/// Husimi function `Q(α) = ⟨α|ρ|α⟩/π` on a rectangular grid.
///
/// Row `i` runs over `im_range`, column `j` over `re_range`, both with
/// `resolution` equally spaced points including the endpoints.
pub fn husimi_grid(
    rho: &DensityMatrix,
    re_range: (f64, f64),
    im_range: (f64, f64),
    resolution: usize,
) -> Result<DMatrix<f64>> {
    if resolution < 2 {
        return Err(Error::Domain("husimi resolution must be >= 2".into()));
    }
    let space = rho.space();
    let axis = |(lo, hi): (f64, f64), k: usize| lo + (hi - lo) * k as f64 / (resolution - 1) as f64;
    let mut q = DMatrix::zeros(resolution, resolution);
    for i in 0..resolution {
        for j in 0..resolution {
            let alpha = Complex64::new(axis(re_range, j), axis(im_range, i));
            let (v, _) = coherent_vector(alpha, space)?;
            let rv = rho.matrix() * &v;
            q[(i, j)] = v.dotc(&rv).re / PI;
        }
    }
    Ok(q)
}
