use log::{debug, warn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, Operator};
use crate::linalg::{self, CMatrix};

use super::GeneratorSpec;

/// Largest tolerated change of `Tr ρ` over one step.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;
/// Largest tolerated population of the top Fock level.
pub const TOP_LEVEL_LIMIT: f64 = 1e-6;
/// Entries below this are set to zero after each step; keeps far-off
/// coherences out of the subnormal range, where arithmetic is very slow.
const FLUSH_BELOW: f64 = 1e-250;

/// Sampled solution of `dρ/dt = Lρ`.
///
/// `leakage[k]` is the top-level population of `states[k]` (zero for
/// non-Fock spaces) and `corrections[k]` the size of the Hermitization and
/// trace renormalization applied to that sample.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub leakage: Vec<f64>,
    pub corrections: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    pub fn max_leakage(&self) -> f64 {
        self.leakage.iter().cloned().fold(0.0, f64::max)
    }
}

/// Fixed-step classic RK4.
///
/// The number of steps is `⌈t_final/dt⌉`, with the step shortened so the last
/// one lands on `t_final`. States are recorded every `sample_every` steps and
/// at the end; recorded states are re-Hermitized and renormalized to unit
/// trace, and integration continues from the corrected state.
pub fn evolve(
    gen: &GeneratorSpec,
    rho0: &DensityMatrix,
    t_final: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::Domain(format!("t_final must be >= 0, got {t_final}")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("dt must be > 0, got {dt}")));
    }
    if sample_every == 0 {
        return Err(Error::Domain("sample_every must be >= 1".into()));
    }
    let space = rho0.space();
    let l = gen.compile(space)?;
    let fock = space.is_fock();
    let top = |m: &CMatrix| if fock { m[(space.dim() - 1, space.dim() - 1)].re } else { 0.0 };

    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![rho0.clone()],
        leakage: vec![top(rho0.matrix())],
        corrections: vec![0.0],
    };
    if t_final == 0.0 {
        return Ok(traj);
    }

    let steps = ((t_final / dt) - 1e-9).ceil().max(1.0) as usize;
    let h = t_final / steps as f64;
    let scale = l.rate_scale();
    if h * scale > 1.0 {
        warn!("step {h:.3e} is large for generator rate scale {scale:.3e} (product {:.2})", h * scale);
    }

    let d = space.dim();
    let mut rho = rho0.matrix().clone();
    let mut k1 = CMatrix::zeros(d, d);
    let mut k2 = CMatrix::zeros(d, d);
    let mut k3 = CMatrix::zeros(d, d);
    let mut k4 = CMatrix::zeros(d, d);
    let mut tmp = CMatrix::zeros(d, d);

    for step in 1..=steps {
        let tr_before = rho.trace().re;

        l.apply_into(&rho, &mut k1);
        tmp.copy_from(&rho);
        axpy(&mut tmp, 0.5 * h, &k1);
        l.apply_into(&tmp, &mut k2);
        tmp.copy_from(&rho);
        axpy(&mut tmp, 0.5 * h, &k2);
        l.apply_into(&tmp, &mut k3);
        tmp.copy_from(&rho);
        axpy(&mut tmp, h, &k3);
        l.apply_into(&tmp, &mut k4);

        k2 += &k3;
        k1 += &k4;
        axpy(&mut rho, h / 6.0, &k1);
        axpy(&mut rho, h / 3.0, &k2);
        flush_tiny(&mut rho);

        let tr_after = rho.trace().re;
        let drift = (tr_after - tr_before).abs();
        if !(drift <= TRACE_DRIFT_LIMIT) {
            return Err(Error::Stability(format!(
                "trace drift {drift:.3e} at step {step} (t = {:.6})",
                step as f64 * h
            )));
        }
        let occupancy = top(&rho);
        if occupancy > TOP_LEVEL_LIMIT {
            return Err(Error::Truncation(format!(
                "top level holds {occupancy:.3e} at t = {:.6}; increase the dimension",
                step as f64 * h
            )));
        }

        if step % sample_every == 0 || step == steps {
            let herm = linalg::hermitian_part(&rho);
            let asym = linalg::max_abs(&(&rho - &herm));
            let tr = herm.trace().re;
            rho = herm / re(tr);
            let correction = asym.max((tr - 1.0).abs());
            if correction > 0.0 {
                debug!("t = {:.6}: hermitization {asym:.2e}, renormalization {:.2e}", step as f64 * h, (tr - 1.0).abs());
            }
            traj.times.push(if step == steps { t_final } else { step as f64 * h });
            traj.leakage.push(occupancy);
            traj.corrections.push(correction);
            traj.states.push(DensityMatrix::from_trusted(Operator::from_parts(space, rho.clone())));
        }
    }
    Ok(traj)
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn flush_tiny(m: &mut CMatrix) {
    for z in m.iter_mut() {
        if z.re.abs() < FLUSH_BELOW {
            z.re = 0.0;
        }
        if z.im.abs() < FLUSH_BELOW {
            z.im = 0.0;
        }
    }
}

/// `y += a·x`.
fn axpy(y: &mut CMatrix, a: f64, x: &CMatrix) {
    for (yi, xi) in y.iter_mut().zip(x.iter()) {
        *yi += xi * a;
    }
}
