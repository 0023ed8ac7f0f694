use num_complex::Complex64;

use crate::fock::HilbertSpace;
use crate::linalg::{CMatrix, ONE, ZERO};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Jump operator storage. Every laser jump operator is a single shifted
/// diagonal, which keeps `VρV†` at O(D²).
#[derive(Debug, Clone)]
pub(crate) enum Jump {
    /// Entries `(n + shift, n) = coeffs[n]`; coefficients whose target falls
    /// outside the space are zero.
    Band { shift: isize, coeffs: Vec<f64> },
    Dense(CMatrix),
}

impl Jump {
    pub(crate) fn band(dim: usize, shift: isize, f: impl Fn(usize) -> f64) -> Self {
        let coeffs = (0..dim)
            .map(|n| {
                let target = n as isize + shift;
                if target < 0 || target >= dim as isize {
                    0.0
                } else {
                    f(n)
                }
            })
            .collect();
        Jump::Band { shift, coeffs }
    }

    pub(crate) fn to_dense(&self, dim: usize) -> CMatrix {
        match self {
            Jump::Dense(m) => m.clone(),
            Jump::Band { shift, coeffs } => {
                let mut m = CMatrix::zeros(dim, dim);
                for (n, c) in coeffs.iter().enumerate() {
                    let t = n as isize + shift;
                    if t >= 0 && (t as usize) < dim {
                        m[(t as usize, n)] = Complex64::new(*c, 0.0);
                    }
                }
                m
            }
        }
    }
}

/// `G = −iH − ½ Σ V†V`, so that the no-jump part of the generator is
/// `Gρ + ρG†`.
#[derive(Debug, Clone)]
enum Effective {
    Diagonal(Vec<Complex64>),
    Dense(CMatrix),
}

/// A generator lowered to matrices on a concrete space.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    space: HilbertSpace,
    effective: Effective,
    jumps: Vec<Jump>,
}

impl Liouvillian {
    pub(crate) fn new(space: HilbertSpace, hamiltonian_diag: Option<Vec<f64>>, hamiltonian: Option<CMatrix>, jumps: Vec<Jump>) -> Self {
        let d = space.dim();
        let all_band = jumps.iter().all(|j| matches!(j, Jump::Band { .. }));
        let effective = match (hamiltonian_diag, hamiltonian, all_band) {
            (Some(h), None, true) => {
                let mut g: Vec<Complex64> = h.iter().map(|&e| -I * e).collect();
                for j in &jumps {
                    if let Jump::Band { coeffs, .. } = j {
                        for (n, c) in coeffs.iter().enumerate() {
                            g[n] -= 0.5 * c * c;
                        }
                    }
                }
                Effective::Diagonal(g)
            }
            (hd, hm, _) => {
                let h = match (hd, hm) {
                    (Some(diag), _) => CMatrix::from_fn(d, d, |i, j| if i == j { Complex64::new(diag[i], 0.0) } else { ZERO }),
                    (None, Some(m)) => m,
                    (None, None) => CMatrix::zeros(d, d),
                };
                let mut g = h.map(|z| -I * z);
                for j in &jumps {
                    let v = j.to_dense(d);
                    g -= (v.adjoint() * &v).scale(0.5);
                }
                Effective::Dense(g)
            }
        };
        Liouvillian { space, effective, jumps }
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    /// `out = L(rho)`.
    pub fn apply_into(&self, rho: &CMatrix, out: &mut CMatrix) {
        let d = self.space.dim();
        match &self.effective {
            Effective::Diagonal(g) => {
                let src = rho.as_slice();
                for (j, col) in out.as_mut_slice().chunks_exact_mut(d).enumerate() {
                    let gj = g[j].conj();
                    for ((o, r), gi) in col.iter_mut().zip(&src[j * d..(j + 1) * d]).zip(g) {
                        *o = (gi + gj) * r;
                    }
                }
            }
            Effective::Dense(g) => {
                out.gemm(ONE, g, rho, ZERO);
                out.gemm(ONE, rho, &g.adjoint(), ONE);
            }
        }
        for jump in &self.jumps {
            match jump {
                Jump::Band { shift, coeffs } => {
                    // (VρV†)[n+s, m+s] = c_n ρ[n, m] c_m
                    let (lo, hi) = band_range(d, *shift);
                    let s = *shift;
                    let src = rho.as_slice();
                    let dst = out.as_mut_slice();
                    for m in lo..hi {
                        let cm = coeffs[m];
                        if cm == 0.0 {
                            continue;
                        }
                        let jo = (m as isize + s) as usize;
                        let io = (lo as isize + s) as usize;
                        let out_col = &mut dst[jo * d + io..jo * d + io + (hi - lo)];
                        let in_col = &src[m * d + lo..m * d + hi];
                        for ((o, r), cn) in out_col.iter_mut().zip(in_col).zip(&coeffs[lo..hi]) {
                            *o += r * (cn * cm);
                        }
                    }
                }
                Jump::Dense(v) => {
                    let vr = v * rho;
                    out.gemm(ONE, &vr, &v.adjoint(), ONE);
                }
            }
        }
    }

    /// `out = L*(a)` (Heisenberg picture).
    pub fn adjoint_into(&self, a: &CMatrix, out: &mut CMatrix) {
        let d = self.space.dim();
        match &self.effective {
            Effective::Diagonal(g) => {
                let src = a.as_slice();
                for (j, col) in out.as_mut_slice().chunks_exact_mut(d).enumerate() {
                    let gj = g[j];
                    for ((o, x), gi) in col.iter_mut().zip(&src[j * d..(j + 1) * d]).zip(g) {
                        *o = (gi.conj() + gj) * x;
                    }
                }
            }
            Effective::Dense(g) => {
                out.gemm(ONE, &g.adjoint(), a, ZERO);
                out.gemm(ONE, a, g, ONE);
            }
        }
        for jump in &self.jumps {
            match jump {
                Jump::Band { shift, coeffs } => {
                    // (V†AV)[n, m] = c_n A[n+s, m+s] c_m
                    let (lo, hi) = band_range(d, *shift);
                    let s = *shift;
                    let src = a.as_slice();
                    let dst = out.as_mut_slice();
                    for m in lo..hi {
                        let cm = coeffs[m];
                        if cm == 0.0 {
                            continue;
                        }
                        let js = (m as isize + s) as usize;
                        let is = (lo as isize + s) as usize;
                        let in_col = &src[js * d + is..js * d + is + (hi - lo)];
                        let out_col = &mut dst[m * d + lo..m * d + hi];
                        for ((o, x), cn) in out_col.iter_mut().zip(in_col).zip(&coeffs[lo..hi]) {
                            *o += x * (cn * cm);
                        }
                    }
                }
                Jump::Dense(v) => {
                    let av = a * v;
                    out.gemm(ONE, &v.adjoint(), &av, ONE);
                }
            }
        }
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = self.space.dim();
        let mut out = CMatrix::zeros(d, d);
        self.apply_into(rho, &mut out);
        out
    }

    pub fn adjoint(&self, a: &CMatrix) -> CMatrix {
        let d = self.space.dim();
        let mut out = CMatrix::zeros(d, d);
        self.adjoint_into(a, &mut out);
        out
    }

    /// Matrix of `L` acting on column-stacked `vec(ρ)`: index `i + j·D` ↔ `ρ_ij`.
    pub fn superoperator(&self) -> CMatrix {
        let d = self.space.dim();
        let mut sup = CMatrix::zeros(d * d, d * d);
        let mut basis = CMatrix::zeros(d, d);
        let mut out = CMatrix::zeros(d, d);
        for l in 0..d {
            for k in 0..d {
                basis[(k, l)] = ONE;
                self.apply_into(&basis, &mut out);
                basis[(k, l)] = ZERO;
                let col = k + l * d;
                for j in 0..d {
                    for i in 0..d {
                        sup[(i + j * d, col)] = out[(i, j)];
                    }
                }
            }
        }
        sup
    }

    /// Crude bound on the stiffness of the generator, in inverse time units.
    pub fn rate_scale(&self) -> f64 {
        let g_part = match &self.effective {
            Effective::Diagonal(g) => g.iter().map(|z| z.norm()).fold(0.0, f64::max),
            Effective::Dense(g) => column_norm(g),
        };
        let jump_part: f64 = self
            .jumps
            .iter()
            .map(|j| match j {
                Jump::Band { coeffs, .. } => coeffs.iter().map(|c| c * c).fold(0.0, f64::max),
                Jump::Dense(v) => column_norm(v).powi(2),
            })
            .sum();
        2.0 * g_part + jump_part
    }

    /// Number-changing rates `(Γ↑[n], Γ↓[n])` read off the jump operators:
    /// `Σ |⟨n+1|V|n⟩|²` over raising jumps and `Σ |⟨n−1|V|n⟩|²` over lowering
    /// ones. Dense jumps contribute their matching off-diagonal entries.
    pub fn ladder_rates(&self, n: usize) -> (f64, f64) {
        let d = self.space.dim();
        let (mut up, mut down) = (0.0, 0.0);
        for j in &self.jumps {
            let m = j.to_dense(d);
            if n + 1 < d {
                up += m[(n + 1, n)].norm_sqr();
            }
            if n >= 1 && n < d {
                down += m[(n - 1, n)].norm_sqr();
            }
        }
        (up, down)
    }
}

/// Source indices `n` with `n + shift` inside `0..d`.
fn band_range(d: usize, shift: isize) -> (usize, usize) {
    let lo = (-shift).clamp(0, d as isize) as usize;
    let hi = (d as isize - shift).clamp(0, d as isize) as usize;
    (lo, hi.max(lo))
}

fn column_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}
