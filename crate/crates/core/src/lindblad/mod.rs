//! GKLS generators in the Schrödinger and Heisenberg pictures, time evolution,
//! and stationary states.
//!
//! Every [`GeneratorSpec`] variant is lowered to a [`Liouvillian`] on a concrete
//! space: a Hamiltonian plus a list of jump operators `V_j`, with
//!
//! ```text
//! L ρ  = −i[H, ρ] + Σ_j ( V_j ρ V_j† − ½{V_j†V_j, ρ} )
//! L* A =  i[H, A] + Σ_j ( V_j† A V_j − ½{V_j†V_j, A} )
//! ```

mod davies;
mod evolve;
mod liouvillian;
mod stationary;

use std::fmt;
use std::sync::Arc;

pub use davies::{davies_generator, DaviesBath, DaviesCoupling, DaviesGenerator, SpectralFn};
pub use evolve::{evolve, Trajectory, TRACE_DRIFT_LIMIT, TOP_LEVEL_LIMIT};
pub use liouvillian::Liouvillian;
pub use stationary::{stationary_state, KERNEL_THRESHOLD, STATIONARY_RESIDUAL};

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, HilbertSpace, Operator};
use crate::linalg::CMatrix;
use liouvillian::Jump;

/// Photon-number dependent coupling `g(n)` entering `a·g(a†a)` or `a†·g(a†a)`.
pub type LadderFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum GeneratorSpec {
    /// Arbitrary Hamiltonian and jump operators.
    General { hamiltonian: Operator, jumps: Vec<Operator> },
    /// `−iω[a†a, ·] + γ↓ D[a] + γ↑ D[a†]`.
    LinearLaser { omega: f64, gamma_up: f64, gamma_down: f64 },
    /// `−iω[a†a, ·] + D[a g↓(a†a)] + D[a† g↑(a†a)]`.
    NonlinearLaser { omega: f64, g_up: LadderFn, g_down: LadderFn },
    /// Linear bath plus the friction load `δ D[a √(a†a)]`.
    LoadedLaser { omega: f64, gamma_up: f64, gamma_down: f64, delta: f64 },
    /// Secular weak-coupling generator with one dissipator per bath.
    Davies(DaviesGenerator),
}

impl fmt::Debug for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::General { hamiltonian, jumps } => f
                .debug_struct("General")
                .field("dim", &hamiltonian.dim())
                .field("jumps", &jumps.len())
                .finish(),
            GeneratorSpec::LinearLaser { omega, gamma_up, gamma_down } => f
                .debug_struct("LinearLaser")
                .field("omega", omega)
                .field("gamma_up", gamma_up)
                .field("gamma_down", gamma_down)
                .finish(),
            GeneratorSpec::NonlinearLaser { omega, .. } => {
                f.debug_struct("NonlinearLaser").field("omega", omega).finish_non_exhaustive()
            }
            GeneratorSpec::LoadedLaser { omega, gamma_up, gamma_down, delta } => f
                .debug_struct("LoadedLaser")
                .field("omega", omega)
                .field("gamma_up", gamma_up)
                .field("gamma_down", gamma_down)
                .field("delta", delta)
                .finish(),
            GeneratorSpec::Davies(d) => d.fmt(f),
        }
    }
}

fn check_rate(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")));
    }
    Ok(())
}

impl GeneratorSpec {
    pub fn linear_laser(omega: f64, gamma_up: f64, gamma_down: f64) -> Result<Self> {
        let g = GeneratorSpec::LinearLaser { omega, gamma_up, gamma_down };
        g.validate()?;
        Ok(g)
    }

    pub fn loaded_laser(omega: f64, gamma_up: f64, gamma_down: f64, delta: f64) -> Result<Self> {
        let g = GeneratorSpec::LoadedLaser { omega, gamma_up, gamma_down, delta };
        g.validate()?;
        Ok(g)
    }

    pub fn nonlinear_laser(
        omega: f64,
        g_up: impl Fn(usize) -> f64 + Send + Sync + 'static,
        g_down: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        GeneratorSpec::NonlinearLaser { omega, g_up: Arc::new(g_up), g_down: Arc::new(g_down) }
    }

    pub fn general(hamiltonian: Operator, jumps: Vec<Operator>) -> Result<Self> {
        let g = GeneratorSpec::General { hamiltonian, jumps };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GeneratorSpec::General { hamiltonian, jumps } => {
                if !hamiltonian.is_hermitian(1e-10) {
                    return Err(Error::Domain("Hamiltonian is not Hermitian".into()));
                }
                for j in jumps {
                    hamiltonian.space().check_same(&j.space())?;
                }
                Ok(())
            }
            GeneratorSpec::LinearLaser { omega, gamma_up, gamma_down } => {
                check_finite("omega", *omega)?;
                check_rate("gamma_up", *gamma_up)?;
                check_rate("gamma_down", *gamma_down)
            }
            GeneratorSpec::LoadedLaser { omega, gamma_up, gamma_down, delta } => {
                check_finite("omega", *omega)?;
                check_rate("gamma_up", *gamma_up)?;
                check_rate("gamma_down", *gamma_down)?;
                check_rate("delta", *delta)
            }
            GeneratorSpec::NonlinearLaser { omega, .. } => check_finite("omega", *omega),
            GeneratorSpec::Davies(_) => Ok(()),
        }
    }

    pub fn is_laser(&self) -> bool {
        matches!(
            self,
            GeneratorSpec::LinearLaser { .. } | GeneratorSpec::NonlinearLaser { .. } | GeneratorSpec::LoadedLaser { .. }
        )
    }

    /// Mode frequency for the laser variants.
    pub fn omega(&self) -> Option<f64> {
        match self {
            GeneratorSpec::LinearLaser { omega, .. }
            | GeneratorSpec::NonlinearLaser { omega, .. }
            | GeneratorSpec::LoadedLaser { omega, .. } => Some(*omega),
            _ => None,
        }
    }

    /// Chemical-bath part `−iω[a†a,·] + γ↓D[a] + γ↑D[a†]` of a loaded laser;
    /// other laser variants are returned unchanged.
    pub fn bath_part(&self) -> GeneratorSpec {
        match self {
            GeneratorSpec::LoadedLaser { omega, gamma_up, gamma_down, .. } => GeneratorSpec::LinearLaser {
                omega: *omega,
                gamma_up: *gamma_up,
                gamma_down: *gamma_down,
            },
            other => other.clone(),
        }
    }

    /// Load dissipator `δ D[a√(a†a)]` of a loaded laser, without Hamiltonian.
    pub fn load_part(&self) -> Option<GeneratorSpec> {
        match self {
            GeneratorSpec::LoadedLaser { delta, .. } => Some(GeneratorSpec::LoadedLaser {
                omega: 0.0,
                gamma_up: 0.0,
                gamma_down: 0.0,
                delta: *delta,
            }),
            _ => None,
        }
    }

    /// Lower to matrices on `space`.
    pub fn compile(&self, space: HilbertSpace) -> Result<Liouvillian> {
        self.validate()?;
        let d = space.dim();
        if self.is_laser() && !space.is_fock() {
            return Err(Error::VariantMismatch("laser generators act on a Fock space".into()));
        }
        let number_diag = |omega: f64| Some((0..d).map(|n| omega * n as f64).collect::<Vec<_>>());
        let lower = |f: Box<dyn Fn(usize) -> f64>| Jump::band(d, -1, f);
        let raise = |f: Box<dyn Fn(usize) -> f64>| Jump::band(d, 1, f);
        let l = match self {
            GeneratorSpec::LinearLaser { omega, gamma_up, gamma_down } => {
                let (gu, gd) = (gamma_up.sqrt(), gamma_down.sqrt());
                Liouvillian::new(
                    space,
                    number_diag(*omega),
                    None,
                    vec![
                        lower(Box::new(move |n| gd * (n as f64).sqrt())),
                        raise(Box::new(move |n| gu * ((n + 1) as f64).sqrt())),
                    ],
                )
            }
            GeneratorSpec::NonlinearLaser { omega, g_up, g_down } => {
                let (gu, gd) = (g_up.clone(), g_down.clone());
                Liouvillian::new(
                    space,
                    number_diag(*omega),
                    None,
                    vec![
                        lower(Box::new(move |n| (n as f64).sqrt() * gd(n))),
                        raise(Box::new(move |n| ((n + 1) as f64).sqrt() * gu(n))),
                    ],
                )
            }
            GeneratorSpec::LoadedLaser { omega, gamma_up, gamma_down, delta } => {
                let (gu, gd, dl) = (gamma_up.sqrt(), gamma_down.sqrt(), delta.sqrt());
                Liouvillian::new(
                    space,
                    number_diag(*omega),
                    None,
                    vec![
                        lower(Box::new(move |n| gd * (n as f64).sqrt())),
                        raise(Box::new(move |n| gu * ((n + 1) as f64).sqrt())),
                        lower(Box::new(move |n| dl * n as f64)),
                    ],
                )
            }
            GeneratorSpec::General { hamiltonian, jumps } => {
                space.check_same(&hamiltonian.space())?;
                let jumps = jumps.iter().map(|j| Jump::Dense(j.matrix().clone())).collect();
                dense_or_diagonal(space, hamiltonian.matrix(), jumps)
            }
            GeneratorSpec::Davies(dav) => {
                space.check_same(&dav.hamiltonian().space())?;
                let jumps = dav
                    .baths()
                    .iter()
                    .flat_map(|b| b.jumps.iter())
                    .map(|j| Jump::Dense(j.matrix().clone()))
                    .collect();
                dense_or_diagonal(space, dav.hamiltonian().matrix(), jumps)
            }
        };
        Ok(l)
    }
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::Domain(format!("{name} must be finite")));
    }
    Ok(())
}

fn dense_or_diagonal(space: HilbertSpace, h: &CMatrix, jumps: Vec<Jump>) -> Liouvillian {
    Liouvillian::new(space, None, Some(h.clone()), jumps)
}

/// `D[V]ρ = ½([Vρ, V†] + [V, ρV†]) = VρV† − ½{V†V, ρ}`.
pub fn dissipator_apply(v: &Operator, rho: &Operator) -> Result<Operator> {
    v.space().check_same(&rho.space())?;
    let vm = v.matrix();
    let r = rho.matrix();
    let vr = vm * r;
    let vd = vm.adjoint();
    let out = (&vr * &vd - r * &vd * vm + vm * r * &vd - &vd * &vr).scale(0.5);
    Ok(Operator::new(rho.space(), out)?)
}

/// `L ρ` for the generator `gen`.
pub fn generator_apply(gen: &GeneratorSpec, rho: &DensityMatrix) -> Result<Operator> {
    apply_to_operator(gen, rho.operator())
}

/// `L X` for an arbitrary operator `X` (not necessarily a state).
pub fn apply_to_operator(gen: &GeneratorSpec, x: &Operator) -> Result<Operator> {
    let l = gen.compile(x.space())?;
    Operator::new(x.space(), l.apply(x.matrix()))
}

/// `L* A` (Heisenberg picture).
pub fn adjoint_apply(gen: &GeneratorSpec, a: &Operator) -> Result<Operator> {
    let l = gen.compile(a.space())?;
    Operator::new(a.space(), l.adjoint(a.matrix()))
}

#[cfg(test)]
mod tests;
