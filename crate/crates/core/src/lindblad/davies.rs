//! Davies (weak-coupling, secular) generators for a static Hamiltonian coupled
//! to several thermal baths.
//!
//! For a Hamiltonian with nondegenerate Bohr frequencies each transition
//! `|l⟩ → |k⟩` with `ω = ε_l − ε_k > 0` gets a lowering jump with rate `γ(ω)`
//! and a raising jump with rate `e^{−βω} γ(ω)`, which makes every per-bath
//! dissipator annihilate its own Gibbs state.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, Operator};
use crate::linalg::{self, CMatrix};

use super::GeneratorSpec;

/// Downward transition rate `γ(ω)` as a function of the Bohr frequency `ω ≥ 0`.
pub type SpectralFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Bohr frequencies closer than this are treated as colliding.
pub const BOHR_RESOLUTION: f64 = 1e-9;

#[derive(Clone)]
pub struct DaviesCoupling {
    pub bath: usize,
    /// System side of the interaction; should be Hermitian.
    pub operator: Operator,
    pub spectral_density: SpectralFn,
}

impl DaviesCoupling {
    pub fn new(bath: usize, operator: Operator, spectral_density: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        DaviesCoupling { bath, operator, spectral_density: Arc::new(spectral_density) }
    }
}

#[derive(Debug, Clone)]
pub struct DaviesBath {
    pub beta: f64,
    /// Jump operators with the rates folded in.
    pub jumps: Vec<Operator>,
}

#[derive(Clone)]
pub struct DaviesGenerator {
    hamiltonian: Operator,
    baths: Vec<DaviesBath>,
}

impl fmt::Debug for DaviesGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Davies")
            .field("dim", &self.hamiltonian.dim())
            .field("betas", &self.baths.iter().map(|b| b.beta).collect::<Vec<_>>())
            .finish()
    }
}

impl DaviesGenerator {
    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn baths(&self) -> &[DaviesBath] {
        &self.baths
    }

    /// Dissipator of bath `k` alone (no Hamiltonian part).
    pub fn bath_generator(&self, k: usize) -> Result<GeneratorSpec> {
        let bath = self
            .baths
            .get(k)
            .ok_or_else(|| Error::Domain(format!("no bath with index {k}")))?;
        Ok(GeneratorSpec::General {
            hamiltonian: Operator::zeros(self.hamiltonian.space()),
            jumps: bath.jumps.clone(),
        })
    }

    /// `e^{−βH} / Z`.
    pub fn gibbs_state(&self, beta: f64) -> Result<DensityMatrix> {
        gibbs_state(&self.hamiltonian, beta)
    }
}

pub(crate) fn gibbs_state(h: &Operator, beta: f64) -> Result<DensityMatrix> {
    let eig = linalg::hermitian_eigen(h.matrix())?;
    let e0 = eig.values[0];
    let unnorm = eig.map(|e| (-beta * (e - e0)).exp());
    let z = unnorm.trace();
    let m = linalg::hermitian_part(&(unnorm / z));
    DensityMatrix::new(Operator::new(h.space(), m)?)
}

/// Build the Davies generator for `h` with the given couplings and inverse
/// temperatures `bath_temps[k] = β_k`.
pub fn davies_generator(h: &Operator, couplings: &[DaviesCoupling], bath_temps: &[f64]) -> Result<GeneratorSpec> {
    if !h.is_hermitian(1e-10) {
        return Err(Error::Domain("Hamiltonian is not Hermitian".into()));
    }
    for &b in bath_temps {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::Domain(format!("inverse temperature must be positive, got {b}")));
        }
    }
    let d = h.dim();
    let eig = linalg::hermitian_eigen(h.matrix())?;
    let energies = &eig.values;

    let mut bohr: Vec<f64> = Vec::new();
    for l in 0..d {
        for k in 0..l {
            bohr.push(energies[l] - energies[k]);
        }
    }
    bohr.sort_by(f64::total_cmp);
    if bohr[0] < BOHR_RESOLUTION {
        return Err(Error::DegenerateSpectrum(format!("degenerate energy levels (gap {:.3e})", bohr[0])));
    }
    if let Some(w) = bohr.windows(2).find(|w| w[1] - w[0] < BOHR_RESOLUTION) {
        return Err(Error::DegenerateSpectrum(format!("Bohr frequencies {} and {} collide", w[0], w[1])));
    }

    let u = &eig.vectors;
    let outer = |k: usize, l: usize| -> CMatrix { u.column(k) * u.column(l).adjoint() };

    let mut baths: Vec<DaviesBath> = bath_temps.iter().map(|&beta| DaviesBath { beta, jumps: Vec::new() }).collect();
    for c in couplings {
        h.space().check_same(&c.operator.space())?;
        let bath = baths
            .get_mut(c.bath)
            .ok_or_else(|| Error::Domain(format!("coupling refers to bath {} of {}", c.bath, bath_temps.len())))?;
        let beta = bath.beta;
        let s = u.adjoint() * c.operator.matrix() * u;
        for l in 0..d {
            for k in 0..l {
                let omega = energies[l] - energies[k];
                let rate = (c.spectral_density)(omega);
                if !(rate >= 0.0) || !rate.is_finite() {
                    return Err(Error::Domain(format!("rate {rate} at Bohr frequency {omega}")));
                }
                if rate == 0.0 {
                    continue;
                }
                let down = s[(k, l)] * rate.sqrt();
                let up = s[(l, k)] * (rate * (-beta * omega).exp()).sqrt();
                if down.norm() > 0.0 {
                    bath.jumps.push(Operator::new(h.space(), outer(k, l) * down)?);
                }
                if up.norm() > 0.0 {
                    bath.jumps.push(Operator::new(h.space(), outer(l, k) * up)?);
                }
            }
        }
        // ω = 0 component: pure dephasing in the energy basis
        let rate0 = (c.spectral_density)(0.0);
        if rate0 > 0.0 && rate0.is_finite() {
            let mut m = CMatrix::zeros(d, d);
            for k in 0..d {
                m += outer(k, k) * s[(k, k)];
            }
            if m.norm() > 0.0 {
                bath.jumps.push(Operator::new(h.space(), m * Complex64::new(rate0.sqrt(), 0.0))?);
            }
        }
    }

    Ok(GeneratorSpec::Davies(DaviesGenerator { hamiltonian: h.clone(), baths }))
}
