use log::debug;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, HilbertSpace, Operator};
use crate::linalg::{self, CMatrix};

use super::GeneratorSpec;

/// Singular values below this count towards the kernel of `L`.
pub const KERNEL_THRESHOLD: f64 = 1e-6;
/// Required Frobenius norm of `L ρ_st`.
pub const STATIONARY_RESIDUAL: f64 = 1e-8;

fn check_existence(gen: &GeneratorSpec, space: HilbertSpace) -> Result<()> {
    match gen {
        GeneratorSpec::LinearLaser { gamma_up, gamma_down, .. } if gamma_up >= gamma_down => {
            Err(Error::NoStationaryState(format!(
                "pumping {gamma_up} >= damping {gamma_down}: photon number grows without bound"
            )))
        }
        GeneratorSpec::LoadedLaser { gamma_up, gamma_down, delta, .. } if *delta == 0.0 && gamma_up >= gamma_down => {
            Err(Error::NoStationaryState(format!(
                "unloaded laser with pumping {gamma_up} >= damping {gamma_down}"
            )))
        }
        GeneratorSpec::NonlinearLaser { g_up, g_down, .. } => {
            // Γ↑[n−1]/Γ↓[n] = g↑(n−1)² / g↓(n)² at the cutoff
            let n = space.dim() - 1;
            let ratio = g_up(n - 1).powi(2) / g_down(n).powi(2);
            if !(ratio < 1.0) {
                return Err(Error::NoStationaryState(format!(
                    "birth/death ratio {ratio:.4} at n = {n} is not below 1"
                )));
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Unique normalized solution of `L ρ = 0`, from the SVD null space of the
/// vectorized generator.
pub fn stationary_state(gen: &GeneratorSpec, space: HilbertSpace) -> Result<DensityMatrix> {
    check_existence(gen, space)?;
    let l = gen.compile(space)?;
    let d = space.dim();
    let sup = l.superoperator();
    let (sigma, null) = linalg::smallest_right_singular(&sup)?;
    let smallest = *sigma.last().expect("non-empty");
    if smallest > KERNEL_THRESHOLD {
        return Err(Error::NoStationaryState(format!("smallest singular value {smallest:.3e}")));
    }
    let kernel = sigma.iter().filter(|&&s| s <= KERNEL_THRESHOLD).count();
    if kernel > 1 {
        return Err(Error::DegenerateKernel(kernel));
    }
    debug!("stationary state: sigma_min = {smallest:.3e}, next = {:.3e}", sigma[sigma.len() - 2]);

    let m = CMatrix::from_fn(d, d, |i, j| null[i + j * d]);
    let tr = m.trace();
    if tr.norm() < 1e-12 {
        return Err(Error::NoStationaryState("null vector is traceless".into()));
    }
    let m = linalg::hermitian_part(&(m / tr));
    let tr = m.trace().re;
    let m = m / Complex64::new(tr, 0.0);
    let residual = l.apply(&m).norm();
    if residual > STATIONARY_RESIDUAL {
        return Err(Error::NoStationaryState(format!("residual {residual:.3e} after normalization")));
    }
    DensityMatrix::with_tolerance(Operator::new(space, m)?, 1e-8)
}
