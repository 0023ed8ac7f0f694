//! Entropies, currents, work and the first/second-law balance of the
//! chemically pumped laser and of multi-bath Davies engines.

use log::debug;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{annihilation_matrix, number_operator, DensityMatrix, HilbertSpace, Operator};
use crate::lindblad::{DaviesGenerator, GeneratorSpec, Trajectory};
use crate::linalg::{self, hermitian_eigen, CMatrix, HermitianEigen};

/// Eigenvalues below this contribute nothing to `−λ ln λ`.
pub const ENTROPY_CUTOFF: f64 = 1e-14;
/// Weight of the maximally mixed state mixed into rank-deficient states
/// before taking their logarithm.
pub const LOG_REGULARIZATION: f64 = 1e-12;
const SUPPORT_EIGEN: f64 = 1e-12;
const SUPPORT_WEIGHT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChemicalPotentials {
    pub beta: f64,
    pub mu_a: f64,
    pub mu_b: f64,
    pub omega: f64,
}

impl ChemicalPotentials {
    pub fn new(beta: f64, mu_a: f64, mu_b: f64, omega: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Domain(format!("beta must be > 0, got {beta}")));
        }
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::Domain(format!("omega must be > 0, got {omega}")));
        }
        if !mu_a.is_finite() || !mu_b.is_finite() {
            return Err(Error::Domain("chemical potentials must be finite".into()));
        }
        Ok(ChemicalPotentials { beta, mu_a, mu_b, omega })
    }

    /// Gibbs free energy released per emitted photon, `ω + μ_B − μ_A`.
    pub fn delta_g(&self) -> f64 {
        self.omega + self.mu_b - self.mu_a
    }
}

/// One sample of the thermodynamic bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoReport {
    pub time: f64,
    pub energy: f64,
    pub photon_number: f64,
    pub entropy: f64,
    pub photon_flux: f64,
    pub heat_current: f64,
    pub j_a: f64,
    pub j_b: f64,
    pub load_power: f64,
    pub residual_production: f64,
    /// `−Tr(L_bath ρ ln σ_bath)`; equals `βJ` for the chemical reference.
    pub entropy_flow: f64,
    /// Spohn production of the bath part alone.
    pub bath_production: f64,
    pub first_law_residual: f64,
    pub second_law_lhs: f64,
    pub leakage: f64,
}

/// Eigendecomposition of a state, mixed with `ε·I/D` first when rank deficient.
/// Also returns the unregularized eigenvalues.
fn regularized_eigen(rho: &CMatrix) -> Result<(CMatrix, HermitianEigen, Vec<f64>)> {
    let eig = hermitian_eigen(rho)?;
    if eig.values[0] > ENTROPY_CUTOFF {
        let raw = eig.values.clone();
        return Ok((rho.clone(), eig, raw));
    }
    debug!("state is rank deficient (λ_min = {:.2e}); mixing in {LOG_REGULARIZATION:e}", eig.values[0]);
    let d = rho.nrows();
    let eps = LOG_REGULARIZATION;
    let mixed = rho.scale(1.0 - eps) + CMatrix::identity(d, d).scale(eps / d as f64);
    let values = eig.values.iter().map(|&l| (1.0 - eps) * l.max(0.0) + eps / d as f64).collect();
    Ok((mixed, HermitianEigen { values, vectors: eig.vectors }, eig.values))
}

fn entropy_of(values: &[f64]) -> f64 {
    values
        .iter()
        .map(|&l| l.clamp(0.0, 1.0))
        .filter(|&l| l >= ENTROPY_CUTOFF)
        .map(|l| -l * l.ln())
        .sum()
}

/// `S = −Tr ρ ln ρ`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(entropy_of(&rho.eigenvalues()?))
}

/// `S(ρ₁|ρ₂) = Tr ρ₁(ln ρ₁ − ln ρ₂)`, or `+∞` when the support of `ρ₁` is not
/// contained in that of `ρ₂`.
pub fn relative_entropy(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    rho1.space().check_same(&rho2.space())?;
    let e2 = hermitian_eigen(rho2.matrix())?;
    let w = e2.weights_of(rho1.matrix());
    let mut cross = 0.0;
    for (&mu, &wk) in e2.values.iter().zip(&w) {
        if mu < SUPPORT_EIGEN {
            if wk > SUPPORT_WEIGHT {
                return Ok(f64::INFINITY);
            }
        } else {
            cross += wk * mu.min(1.0).ln();
        }
    }
    Ok(-von_neumann_entropy(rho1)? - cross)
}

/// `ln ρ_st = −βΔG a†a` for the (possibly unnormalizable) chemical reference.
pub fn log_reference_chemical(pot: &ChemicalPotentials, space: HilbertSpace) -> Operator {
    let s = -pot.beta * pot.delta_g();
    let diag: Vec<f64> = (0..space.dim()).map(|n| s * n as f64).collect();
    Operator::diagonal(space, &diag).expect("diagonal has the space dimension")
}

/// `ln p̄_n` of a birth–death stationary weight as a diagonal operator.
pub fn log_reference_from_weights(space: HilbertSpace, log_weights: &[f64]) -> Result<Operator> {
    if let Some(w) = log_weights.iter().find(|w| !w.is_finite()) {
        return Err(Error::Domain(format!("log-weight {w} is not finite")));
    }
    Operator::diagonal(space, log_weights)
}

fn spohn_from_parts(l_rho: &CMatrix, log_rho: &CMatrix, log_sigma: &CMatrix) -> f64 {
    -linalg::trace_product(l_rho, &(log_rho - log_sigma)).re
}

/// Entropy production `−Tr(Lρ (ln ρ − ln σ))` relative to a stationary
/// reference given by its logarithm; `σ` need not be normalized.
pub fn spohn_production(gen: &GeneratorSpec, rho: &DensityMatrix, log_sigma: &Operator) -> Result<f64> {
    rho.space().check_same(&log_sigma.space())?;
    let l = gen.compile(rho.space())?;
    let (r, eig, _) = regularized_eigen(rho.matrix())?;
    let log_rho = eig.map(f64::ln);
    Ok(spohn_from_parts(&l.apply(&r), &log_rho, log_sigma.matrix()))
}

/// `J_k = Tr(ρ L_k* H)`.
pub fn heat_current_additive(rho: &DensityMatrix, gen_k: &GeneratorSpec, h: &Operator) -> Result<f64> {
    rho.space().check_same(&h.space())?;
    let l = gen_k.compile(rho.space())?;
    Ok(linalg::trace_product(rho.matrix(), &l.adjoint(h.matrix())).re)
}

/// `j = Tr(ρ L_bath* a†a)`.
pub fn photon_flux(rho: &DensityMatrix, gen_bath: &GeneratorSpec) -> Result<f64> {
    if !rho.space().is_fock() {
        return Err(Error::VariantMismatch("photon flux needs a Fock space".into()));
    }
    heat_current_additive(rho, gen_bath, &number_operator(rho.space()))
}

/// `J = ΔG·j`.
pub fn heat_current_chemical(j: f64, pot: &ChemicalPotentials) -> f64 {
    pot.delta_g() * j
}

fn second_moment(p: &[f64]) -> f64 {
    p.iter().enumerate().map(|(n, q)| (n * n) as f64 * q).sum()
}

/// `P = ωδ ⟨(a†a)²⟩`.
pub fn load_power(rho: &DensityMatrix, omega: f64, delta: f64) -> f64 {
    omega * delta * second_moment(&rho.populations())
}

/// `δṠ = −Tr(ρ L_load* ln ρ)`.
pub fn residual_entropy_production(rho: &DensityMatrix, gen_load: &GeneratorSpec) -> Result<f64> {
    let l = gen_load.compile(rho.space())?;
    let (r, eig, _) = regularized_eigen(rho.matrix())?;
    Ok(-linalg::trace_product(&l.apply(&r), &eig.map(f64::ln)).re)
}

/// `δ Σ_k [k² p_k − (k+1)² p_{k+1}] ln p_k` for a diagonal state; levels with
/// `p_k = 0` are skipped.
pub fn residual_production_diagonal(p: &[f64], delta: f64) -> f64 {
    let mut sum = 0.0;
    for k in 0..p.len() {
        if p[k] <= 0.0 {
            continue;
        }
        let next = p.get(k + 1).copied().unwrap_or(0.0);
        let kk = k as f64;
        sum += (kk * kk * p[k] - (kk + 1.0) * (kk + 1.0) * next) * p[k].ln();
    }
    delta * sum
}

/// Populations sorted descending paired with energies sorted ascending.
/// Ties keep their original index order.
fn passive_pairing(rho: &DensityMatrix, h: &Operator) -> Result<(Vec<f64>, HermitianEigen)> {
    rho.space().check_same(&h.space())?;
    let mut pops = rho.eigenvalues()?;
    pops.reverse();
    let mut order: Vec<usize> = (0..pops.len()).collect();
    order.sort_by(|&a, &b| pops[b].total_cmp(&pops[a]));
    let pops = order.into_iter().map(|i| pops[i]).collect();
    Ok((pops, hermitian_eigen(h.matrix())?))
}

/// Energy-ordered state with the spectrum of `rho`.
pub fn passive_state(rho: &DensityMatrix, h: &Operator) -> Result<DensityMatrix> {
    let (pops, eig) = passive_pairing(rho, h)?;
    let u = &eig.vectors;
    let d = rho.dim();
    let diag = CMatrix::from_fn(d, d, |i, j| if i == j { pops[i].into() } else { 0.0.into() });
    let m = linalg::hermitian_part(&(u * diag * u.adjoint()));
    Ok(DensityMatrix::from_trusted(Operator::from_parts(rho.space(), m)))
}

/// `W_e = Tr(ρH) − Tr(ρ^P H)`.
pub fn ergotropy(rho: &DensityMatrix, h: &Operator) -> Result<f64> {
    let (pops, eig) = passive_pairing(rho, h)?;
    let energy = linalg::trace_product(rho.matrix(), h.matrix()).re;
    let passive: f64 = pops.iter().zip(&eig.values).map(|(p, e)| p * e).sum();
    Ok(energy - passive)
}

/// `W_sc = ω |Tr(ρ a)|²`.
pub fn semiclassical_work(rho: &DensityMatrix, omega: f64) -> Result<f64> {
    if !rho.space().is_fock() {
        return Err(Error::VariantMismatch("semiclassical work needs a Fock space".into()));
    }
    let a = annihilation_matrix(rho.space());
    Ok(omega * linalg::trace_product(rho.matrix(), a.matrix()).norm_sqr())
}

/// Derivative of samples `f(t_i)` on a possibly nonuniform grid: three-point
/// centered differences inside, three-point one-sided at the ends (two-point
/// when only two samples exist).
pub fn finite_difference(t: &[f64], f: &[f64]) -> Vec<f64> {
    let n = t.len();
    assert_eq!(n, f.len());
    if n < 2 {
        return vec![0.0; n];
    }
    if n == 2 {
        let d = (f[1] - f[0]) / (t[1] - t[0]);
        return vec![d, d];
    }
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        let (h1, h2) = (t[i] - t[i - 1], t[i + 1] - t[i]);
        out[i] = (h1 * h1 * f[i + 1] - h2 * h2 * f[i - 1] + (h2 * h2 - h1 * h1) * f[i]) / (h1 * h2 * (h1 + h2));
    }
    let (h1, h2) = (t[1] - t[0], t[2] - t[1]);
    out[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1] - h1 / (h2 * (h1 + h2)) * f[2];
    let (h1, h2) = (t[n - 2] - t[n - 3], t[n - 1] - t[n - 2]);
    out[n - 1] = h2 / (h1 * (h1 + h2)) * f[n - 3] - (h1 + h2) / (h1 * h2) * f[n - 2]
        + (2.0 * h2 + h1) / (h2 * (h1 + h2)) * f[n - 1];
    out
}

/// Bath, optional load and chemistry of a laser run.
#[derive(Debug, Clone)]
pub struct LaserBookkeeping {
    pub bath: GeneratorSpec,
    pub load: Option<GeneratorSpec>,
    pub pot: ChemicalPotentials,
    /// `ln σ` of the bath's stationary weight; `None` selects the chemical
    /// reference `−βΔG a†a`, for which the entropy flow is `βJ`.
    pub bath_reference: Option<Operator>,
}

/// Full per-sample report for a laser trajectory.
///
/// `first_law_residual = dE/dt − (J − μ_A j_A − μ_B j_B − P)` and
/// `second_law_lhs = dS/dt − Φ + δṠ`, with `Φ` the bath entropy flow.
pub fn laser_reports(traj: &Trajectory, book: &LaserBookkeeping) -> Result<Vec<ThermoReport>> {
    if traj.len() < 3 {
        return Err(Error::InsufficientSamples(traj.len()));
    }
    let space = traj.states[0].space();
    if !space.is_fock() {
        return Err(Error::VariantMismatch("laser bookkeeping needs a Fock space".into()));
    }
    let pot = &book.pot;
    let omega = pot.omega;
    let bath = book.bath.compile(space)?;
    let load = book.load.as_ref().map(|g| g.compile(space)).transpose()?;
    let delta = match &book.load {
        Some(GeneratorSpec::LoadedLaser { delta, .. }) => *delta,
        Some(_) => return Err(Error::VariantMismatch("load must be a loaded-laser load part".into())),
        None => 0.0,
    };
    let log_sigma = match &book.bath_reference {
        Some(op) => {
            space.check_same(&op.space())?;
            op.clone()
        }
        None => log_reference_chemical(pot, space),
    };
    let number = number_operator(space);

    let mut reports: Vec<ThermoReport> = traj
        .states
        .par_iter()
        .zip(traj.times.par_iter())
        .zip(traj.leakage.par_iter())
        .map(|((rho, &time), &leakage)| -> Result<ThermoReport> {
            let pops = rho.populations();
            let n_mean: f64 = pops.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
            let (r, eig, raw) = regularized_eigen(rho.matrix())?;
            let entropy = entropy_of(&raw);
            let log_rho = eig.map(f64::ln);
            let l_bath_rho = bath.apply(&r);
            let j = linalg::trace_product(rho.matrix(), &bath.adjoint(number.matrix())).re;
            let heat = heat_current_chemical(j, pot);
            let entropy_flow = if book.bath_reference.is_none() {
                pot.beta * heat
            } else {
                -linalg::trace_product(&l_bath_rho, log_sigma.matrix()).re
            };
            let bath_production = spohn_from_parts(&l_bath_rho, &log_rho, log_sigma.matrix());
            let residual = match &load {
                Some(l) => -linalg::trace_product(&l.apply(&r), &log_rho).re,
                None => 0.0,
            };
            Ok(ThermoReport {
                time,
                energy: omega * n_mean,
                photon_number: n_mean,
                entropy,
                photon_flux: j,
                heat_current: heat,
                j_a: -j,
                j_b: j,
                load_power: omega * delta * second_moment(&pops),
                residual_production: residual,
                entropy_flow,
                bath_production,
                first_law_residual: 0.0,
                second_law_lhs: 0.0,
                leakage,
            })
        })
        .collect::<Result<_>>()?;

    let dedt = finite_difference(&traj.times, &reports.iter().map(|r| r.energy).collect::<Vec<_>>());
    let dsdt = finite_difference(&traj.times, &reports.iter().map(|r| r.entropy).collect::<Vec<_>>());
    for (k, r) in reports.iter_mut().enumerate() {
        let supplied = r.heat_current - pot.mu_a * r.j_a - pot.mu_b * r.j_b - r.load_power;
        r.first_law_residual = dedt[k] - supplied;
        r.second_law_lhs = dsdt[k] - r.entropy_flow + r.residual_production;
    }
    Ok(reports)
}

/// Reports for a laser trajectory, used for the energy balance.
pub fn first_law_report(
    traj: &Trajectory,
    gen_bath: &GeneratorSpec,
    gen_load: Option<&GeneratorSpec>,
    pot: &ChemicalPotentials,
) -> Result<Vec<ThermoReport>> {
    laser_reports(
        traj,
        &LaserBookkeeping { bath: gen_bath.clone(), load: gen_load.cloned(), pot: *pot, bath_reference: None },
    )
}

/// Reports for a laser trajectory with the chemical entropy flow `βJ`.
pub fn second_law_report(
    traj: &Trajectory,
    gen_bath: &GeneratorSpec,
    gen_load: Option<&GeneratorSpec>,
    pot: &ChemicalPotentials,
) -> Result<Vec<ThermoReport>> {
    first_law_report(traj, gen_bath, gen_load, pot)
}

/// One sample of a multi-bath Davies run.
#[derive(Debug, Clone, PartialEq)]
pub struct DaviesReport {
    pub time: f64,
    pub energy: f64,
    pub entropy: f64,
    /// `J_k = Tr(ρ L_k* H)` per bath.
    pub heat_currents: Vec<f64>,
    pub first_law_residual: f64,
    /// `dS/dt − Σ_k β_k J_k`.
    pub second_law_lhs: f64,
}

pub fn davies_reports(traj: &Trajectory, gen: &DaviesGenerator) -> Result<Vec<DaviesReport>> {
    if traj.len() < 3 {
        return Err(Error::InsufficientSamples(traj.len()));
    }
    let space = traj.states[0].space();
    let h = gen.hamiltonian();
    space.check_same(&h.space())?;
    let mut lh = Vec::with_capacity(gen.baths().len());
    for k in 0..gen.baths().len() {
        lh.push(gen.bath_generator(k)?.compile(space)?.adjoint(h.matrix()));
    }
    let mut reports: Vec<DaviesReport> = traj
        .states
        .par_iter()
        .zip(traj.times.par_iter())
        .map(|(rho, &time)| -> Result<DaviesReport> {
            Ok(DaviesReport {
                time,
                energy: linalg::trace_product(rho.matrix(), h.matrix()).re,
                entropy: von_neumann_entropy(rho)?,
                heat_currents: lh.iter().map(|m| linalg::trace_product(rho.matrix(), m).re).collect(),
                first_law_residual: 0.0,
                second_law_lhs: 0.0,
            })
        })
        .collect::<Result<_>>()?;
    let dedt = finite_difference(&traj.times, &reports.iter().map(|r| r.energy).collect::<Vec<_>>());
    let dsdt = finite_difference(&traj.times, &reports.iter().map(|r| r.entropy).collect::<Vec<_>>());
    for (k, r) in reports.iter_mut().enumerate() {
        let total: f64 = r.heat_currents.iter().sum();
        let flow: f64 = r.heat_currents.iter().zip(gen.baths()).map(|(j, b)| b.beta * j).sum();
        r.first_law_residual = dedt[k] - total;
        r.second_law_lhs = dsdt[k] - flow;
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, phase_averaged_coherent, random_state, thermal_state};
    use crate::lindblad::{evolve, stationary_state};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag_state(p: &[f64]) -> DensityMatrix {
        DensityMatrix::from_populations(HilbertSpace::levels(p.len()).unwrap(), p).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let fock = HilbertSpace::fock(5).unwrap();
        assert!(von_neumann_entropy(&DensityMatrix::fock_state(fock, 2).unwrap()).unwrap().abs() < 1e-14);
        let s = von_neumann_entropy(&diag_state(&[0.5, 0.5])).unwrap();
        assert!((s - 2f64.ln()).abs() < 1e-15);

        // geometric distribution p_n = (1 − q) q^n with q = 1/2
        let space = HilbertSpace::fock(64).unwrap();
        let rho = thermal_state(2f64.ln(), space).unwrap();
        let q: f64 = 0.5;
        let exact = -(1.0 - q).ln() - q * q.ln() / (1.0 - q);
        assert!((von_neumann_entropy(&rho).unwrap() - exact).abs() < 1e-10);
    }

    #[test]
    fn relative_entropy_examples() {
        let a = diag_state(&[0.75, 0.25]);
        let b = diag_state(&[0.5, 0.5]);
        assert!(relative_entropy(&a, &a).unwrap().abs() < 1e-14);
        let exact = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
        assert!((relative_entropy(&a, &b).unwrap() - exact).abs() < 1e-14);
        assert!((exact - 0.13081).abs() < 1e-5);

        let space = HilbertSpace::fock(3).unwrap();
        let one = DensityMatrix::fock_state(space, 1).unwrap();
        let zero = DensityMatrix::fock_state(space, 0).unwrap();
        assert_eq!(relative_entropy(&one, &zero).unwrap(), f64::INFINITY);
        let other = DensityMatrix::fock_state(HilbertSpace::fock(4).unwrap(), 0).unwrap();
        assert!(matches!(relative_entropy(&one, &other), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn chemical_reference() {
        let space = HilbertSpace::fock(6).unwrap();
        let flat = log_reference_chemical(&ChemicalPotentials::new(1.0, 1.0, 0.0, 1.0).unwrap(), space);
        assert_eq!(flat.norm(), 0.0);
        let pot = ChemicalPotentials::new(2.0, 3.0, 1.0, 1.0).unwrap();
        let inverted = log_reference_chemical(&pot, space);
        for n in 0..6 {
            assert_eq!(inverted.matrix()[(n, n)].re, -2.0 * -1.0 * n as f64);
        }
    }

    #[test]
    fn spohn_signs() {
        let space = HilbertSpace::fock(12).unwrap();
        let pot = ChemicalPotentials::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let gen = GeneratorSpec::linear_laser(1.0, (-1.0f64).exp(), 1.0).unwrap();
        let log_sigma = log_reference_chemical(&pot, space);
        let st = stationary_state(&gen, space).unwrap();
        assert!(spohn_production(&gen, &st, &log_sigma).unwrap().abs() < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let rho = random_state(space, &mut rng);
            assert!(spohn_production(&gen, &rho, &log_sigma).unwrap() > 0.0);
        }
    }

    #[test]
    fn spohn_above_threshold_unnormalized_reference() {
        let space = HilbertSpace::fock(96).unwrap();
        let pot = ChemicalPotentials::new(1.0, 1.5, 0.0, 1.0).unwrap();
        let gen = GeneratorSpec::linear_laser(1.0, (-pot.beta * pot.delta_g()).exp(), 1.0).unwrap();
        let log_sigma = log_reference_chemical(&pot, space);
        let rho0 = coherent_state(Complex64::new(1.0, 0.0), space).unwrap();
        let traj = evolve(&gen, &rho0, 1.0, 1e-3, 50).unwrap();
        for rho in &traj.states {
            assert!(spohn_production(&gen, rho, &log_sigma).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn currents_and_power() {
        let space = HilbertSpace::fock(30).unwrap();
        let gen = GeneratorSpec::linear_laser(1.0, 0.3, 1.0).unwrap();
        let vac = DensityMatrix::fock_state(space, 0).unwrap();
        assert!((photon_flux(&vac, &gen).unwrap() - 0.3).abs() < 1e-14);
        let th = thermal_state((1.0f64 / 0.3).ln(), space).unwrap();
        assert!(photon_flux(&th, &gen).unwrap().abs() < 1e-10);

        let pot = ChemicalPotentials::new(1.0, 3.0, 1.0, 1.0).unwrap();
        assert_eq!(heat_current_chemical(0.0, &pot), 0.0);
        assert!(heat_current_chemical(2.0, &pot) < 0.0);
        assert_eq!(heat_current_chemical(4.0, &pot), 2.0 * heat_current_chemical(2.0, &pot));

        let f = DensityMatrix::fock_state(space, 7).unwrap();
        assert!((load_power(&f, 2.0, 0.01) - 2.0 * 0.01 * 49.0).abs() < 1e-14);
        assert_eq!(load_power(&vac, 2.0, 0.01), 0.0);
    }

    #[test]
    fn residual_production_dual_path() {
        let space = HilbertSpace::fock(40).unwrap();
        let rho = phase_averaged_coherent(6.0, space).unwrap();
        let load = GeneratorSpec::loaded_laser(1.0, 1.0, 1.0, 0.02).unwrap().load_part().unwrap();
        let op = residual_entropy_production(&rho, &load).unwrap();
        let sum = residual_production_diagonal(&rho.populations(), 0.02);
        assert!((op - sum).abs() < 1e-8, "{op} vs {sum}");

        let none = GeneratorSpec::loaded_laser(1.0, 1.0, 1.0, 0.0).unwrap().load_part().unwrap();
        assert_eq!(residual_entropy_production(&rho, &none).unwrap(), 0.0);
    }

    #[test]
    fn passive_and_ergotropy() {
        let space = HilbertSpace::fock(3).unwrap();
        let h = number_operator(space);
        let rho = DensityMatrix::from_populations(space, &[0.2, 0.5, 0.3]).unwrap();
        let p = passive_state(&rho, &h).unwrap();
        let pops = p.populations();
        for (a, b) in pops.iter().zip([0.5, 0.3, 0.2]) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((ergotropy(&rho, &h).unwrap() - 0.4).abs() < 1e-14);
        assert!(ergotropy(&p, &h).unwrap().abs() < 1e-14);

        let big = HilbertSpace::fock(40).unwrap();
        let hb = number_operator(big);
        let th = thermal_state(0.8, big).unwrap();
        assert!(ergotropy(&th, &hb).unwrap().abs() < 1e-12);
        let alpha = Complex64::new(1.2, -0.7);
        let coh = coherent_state(alpha, big).unwrap();
        let pass = passive_state(&coh, &hb).unwrap();
        assert!((pass.populations()[0] - 1.0).abs() < 1e-10);
        assert!((ergotropy(&coh, &hb).unwrap() - alpha.norm_sqr()).abs() < 1e-9);
    }

    #[test]
    fn semiclassical_work_examples() {
        let space = HilbertSpace::fock(40).unwrap();
        let alpha = Complex64::new(0.9, 1.1);
        let coh = coherent_state(alpha, space).unwrap();
        assert!((semiclassical_work(&coh, 2.0).unwrap() - 2.0 * alpha.norm_sqr()).abs() < 1e-9);
        let pac = phase_averaged_coherent(2.0, space).unwrap();
        assert_eq!(semiclassical_work(&pac, 1.0).unwrap(), 0.0);
        let f = DensityMatrix::fock_state(space, 3).unwrap();
        assert_eq!(semiclassical_work(&f, 1.0).unwrap(), 0.0);
        let lv = DensityMatrix::maximally_mixed(HilbertSpace::levels(2).unwrap());
        assert!(semiclassical_work(&lv, 1.0).is_err());
    }

    #[test]
    fn finite_difference_exact_for_quadratics() {
        let t = [0.0, 0.1, 0.25, 0.3, 0.5];
        let f: Vec<f64> = t.iter().map(|x| 3.0 * x * x - x + 2.0).collect();
        for (x, d) in t.iter().zip(finite_difference(&t, &f)) {
            assert!((d - (6.0 * x - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn reports_need_three_samples() {
        let space = HilbertSpace::fock(8).unwrap();
        let gen = GeneratorSpec::linear_laser(1.0, 0.2, 1.0).unwrap();
        let traj = evolve(&gen, &DensityMatrix::fock_state(space, 0).unwrap(), 0.1, 0.05, 1).unwrap();
        assert_eq!(traj.len(), 3);
        let pot = ChemicalPotentials::new(1.0, 0.0, 0.0, 1.0).unwrap();
        assert!(first_law_report(&traj, &gen, None, &pot).is_ok());
        let short = evolve(&gen, &DensityMatrix::fock_state(space, 0).unwrap(), 0.05, 0.05, 1).unwrap();
        assert!(matches!(first_law_report(&short, &gen, None, &pot), Err(Error::InsufficientSamples(2))));
    }

    #[test]
    fn equilibrium_report_is_flat() {
        let space = HilbertSpace::fock(40).unwrap();
        let pot = ChemicalPotentials::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let gen = GeneratorSpec::linear_laser(1.0, (-1.0f64).exp(), 1.0).unwrap();
        let rho0 = thermal_state(1.0, space).unwrap();
        let traj = evolve(&gen, &rho0, 1.0, 1e-2, 5).unwrap();
        for r in second_law_report(&traj, &gen, None, &pot).unwrap() {
            assert!(r.second_law_lhs.abs() < 1e-9);
            assert!(r.first_law_residual.abs() < 1e-9);
            assert!((r.j_a + r.photon_flux).abs() == 0.0 && r.j_b == r.photon_flux);
        }
    }

    #[test]
    fn amplifier_without_load_obeys_second_law() {
        let space = HilbertSpace::fock(120).unwrap();
        let pot = ChemicalPotentials::new(1.0, 1.5, 0.0, 1.0).unwrap();
        let gen = GeneratorSpec::linear_laser(1.0, 0.5f64.exp(), 1.0).unwrap();
        let rho0 = coherent_state(Complex64::new(1.0, 0.0), space).unwrap();
        let traj = evolve(&gen, &rho0, 1.5, 1e-3, 10).unwrap();
        for r in second_law_report(&traj, &gen, None, &pot).unwrap() {
            assert!(r.second_law_lhs >= -1e-7, "t = {} lhs = {}", r.time, r.second_law_lhs);
            let chem = r.heat_current - pot.mu_a * r.j_a - pot.mu_b * r.j_b;
            assert!((chem - pot.omega * r.photon_flux).abs() < 1e-9);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn relative_entropy_nonnegative(seed in any::<u64>(), dim in 2usize..7) {
            let space = HilbertSpace::levels(dim).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_state(space, &mut rng);
            let b = random_state(space, &mut rng);
            let s = relative_entropy(&a, &b).unwrap();
            prop_assert!(s > 1e-9);
            prop_assert!(relative_entropy(&a, &a).unwrap().abs() < 1e-9);
        }

        #[test]
        fn ergotropy_phase_invariant(seed in any::<u64>(), theta in -3.2f64..3.2) {
            let space = HilbertSpace::fock(6).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_state(space, &mut rng);
            let h = number_operator(space);
            let u = CMatrix::from_fn(6, 6, |i, j| if i == j { Complex64::from_polar(1.0, theta * i as f64) } else { 0.0.into() });
            let rotated = DensityMatrix::new(Operator::new(space, &u * rho.matrix() * u.adjoint()).unwrap()).unwrap();
            let w0 = ergotropy(&rho, &h).unwrap();
            prop_assert!(w0 >= -1e-12);
            prop_assert!((ergotropy(&rotated, &h).unwrap() - w0).abs() < 1e-10);
            let p = passive_state(&rho, &h).unwrap();
            prop_assert!(ergotropy(&p, &h).unwrap().abs() < 1e-10);
            prop_assert!(semiclassical_work(&rho, 1.0).unwrap() <= linalg::trace_product(rho.matrix(), h.matrix()).re + 1e-10);
        }
    }
}
