//! Model presets: chemistry-derived rates, Fock dimension, initial state and
//! integration defaults bundled under a name.
//!
//! All numeric defaults below are choices made for this crate.

use num_complex::Complex64;

use crate::birthdeath::{stationary_distribution_auto, BirthDeathModel};
use crate::error::{Error, Result};
use crate::fock::{coherent_state, thermal_state, DensityMatrix, HilbertSpace, Operator};
use crate::lindblad::{davies_generator, DaviesCoupling, GeneratorSpec};
use crate::thermo::{log_reference_from_weights, ChemicalPotentials, LaserBookkeeping};

pub const PRESET_NAMES: [&str; 6] = [
    "below_threshold",
    "above_threshold_transient",
    "saturated_pump",
    "saturated_damp",
    "loaded_laser",
    "two_bath_qubit",
];

/// Largest Fock dimension chosen automatically.
pub const MAX_AUTO_DIM: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChemicalEngineParams {
    pub pot: ChemicalPotentials,
    pub gamma_down: f64,
    pub gamma_up: f64,
    pub delta_g: f64,
    pub amplifying: bool,
}

/// Pump rate from detailed balance, `γ↑ = γ↓ e^{−βΔG}`.
pub fn chemical_engine(pot: ChemicalPotentials, gamma_down: f64) -> Result<ChemicalEngineParams> {
    if !(gamma_down > 0.0) || !gamma_down.is_finite() {
        return Err(Error::Domain(format!("gamma_down must be > 0, got {gamma_down}")));
    }
    let delta_g = pot.delta_g();
    Ok(ChemicalEngineParams {
        pot,
        gamma_down,
        gamma_up: gamma_down * (-pot.beta * delta_g).exp(),
        delta_g,
        amplifying: delta_g < 0.0,
    })
}

/// Mean energy of the linear laser started with energy `e0`:
/// `e^{rt} E0 + (e^{rt} − 1) ωγ↑/r` with `r = γ↑ − γ↓`, and `E0 + ωγ↑t` at `r = 0`.
pub fn analytic_energy(params: &ChemicalEngineParams, e0: f64, t: f64) -> f64 {
    let r = params.gamma_up - params.gamma_down;
    let wg = params.pot.omega * params.gamma_up;
    if r == 0.0 {
        return e0 + wg * t;
    }
    let growth = (r * t).exp_m1();
    e0 + growth * e0 + growth * wg / r
}

/// Time at which the mean photon number of the linear laser reaches `n_max`,
/// or `+∞` if it never does.
pub fn time_to_reach(params: &ChemicalEngineParams, n0: f64, n_max: f64) -> f64 {
    let r = params.gamma_up - params.gamma_down;
    let gu = params.gamma_up;
    if n_max <= n0 {
        return 0.0;
    }
    if r == 0.0 {
        return if gu > 0.0 { (n_max - n0) / gu } else { f64::INFINITY };
    }
    let ratio = (n_max + gu / r) / (n0 + gu / r);
    if ratio <= 0.0 {
        f64::INFINITY
    } else {
        let t = ratio.ln() / r;
        if t > 0.0 {
            t
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Fock(usize),
    /// Coherent state with a real amplitude.
    Coherent(f64),
    /// Thermal state at the given `βω`.
    Thermal(f64),
    Populations(Vec<f64>),
}

impl InitialState {
    pub fn build(&self, space: HilbertSpace) -> Result<DensityMatrix> {
        match self {
            InitialState::Fock(n) => DensityMatrix::fock_state(space, *n),
            InitialState::Coherent(a) => coherent_state(Complex64::new(*a, 0.0), space),
            InitialState::Thermal(x) => thermal_state(*x, space),
            InitialState::Populations(p) => DensityMatrix::from_populations(space, p),
        }
    }

    pub fn mean_photons(&self) -> f64 {
        match self {
            InitialState::Fock(n) => *n as f64,
            InitialState::Coherent(a) => a * a,
            InitialState::Thermal(x) => 1.0 / x.exp_m1(),
            InitialState::Populations(p) => p.iter().enumerate().map(|(n, q)| n as f64 * q).sum(),
        }
    }
}

/// A ready-to-run model.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub space: HilbertSpace,
    pub generator: GeneratorSpec,
    /// Photon-number chain of the laser variants.
    pub model: Option<BirthDeathModel>,
    pub pot: Option<ChemicalPotentials>,
    pub initial: InitialState,
    pub t_final: f64,
    pub dt: f64,
    pub sample_every: usize,
    /// Longest `t_final` that keeps truncation under control, when bounded.
    pub horizon: Option<f64>,
}

impl Scenario {
    /// Laser scenario driven by a birth–death model. The Fock dimension is
    /// sized from the stationary distribution unless given.
    #[allow(clippy::too_many_arguments)]
    pub fn laser(
        name: &str,
        model: BirthDeathModel,
        pot: ChemicalPotentials,
        initial: InitialState,
        dim: Option<usize>,
        t_final: f64,
        dt: f64,
        sample_every: usize,
    ) -> Result<Self> {
        model.validate()?;
        let generator = generator_for(&model, pot.omega);
        let dim = match dim {
            Some(d) => d,
            None => auto_dim(&model, initial.mean_photons())?,
        };
        let space = HilbertSpace::fock(dim)?;
        Ok(Scenario {
            name: name.to_string(),
            space,
            generator,
            model: Some(model),
            pot: Some(pot),
            initial,
            t_final,
            dt,
            sample_every,
            horizon: None,
        })
    }

    pub fn is_laser(&self) -> bool {
        self.generator.is_laser()
    }

    pub fn initial_state(&self) -> Result<DensityMatrix> {
        self.initial.build(self.space)
    }

    /// Bath/load split and entropy reference for the thermodynamic reports.
    pub fn bookkeeping(&self) -> Result<Option<LaserBookkeeping>> {
        let (Some(model), Some(pot)) = (&self.model, self.pot) else {
            return Ok(None);
        };
        let bath_reference = match model {
            BirthDeathModel::Linear { .. } | BirthDeathModel::Loaded { .. } => None,
            _ => Some(self.log_stationary_reference()?.expect("laser scenario has a model")),
        };
        Ok(Some(LaserBookkeeping {
            bath: self.generator.bath_part(),
            load: self.generator.load_part(),
            pot,
            bath_reference,
        }))
    }

    /// `ln σ` of the (possibly unnormalizable) stationary weight of the full
    /// laser generator on the truncated space.
    pub fn log_stationary_reference(&self) -> Result<Option<Operator>> {
        let Some(model) = &self.model else { return Ok(None) };
        let lw = model.stationary_log_weights(self.space.dim())?;
        log_reference_from_weights(self.space, &lw).map(Some)
    }
}

/// Nonlinear couplings reproducing arbitrary birth–death rates:
/// `g↑(n) = √(Γ↑[n]/(n+1))`, `g↓(n) = √(Γ↓[n]/n)`.
pub fn generator_for(model: &BirthDeathModel, omega: f64) -> GeneratorSpec {
    match *model {
        BirthDeathModel::Linear { gamma_up, gamma_down } => {
            GeneratorSpec::LinearLaser { omega, gamma_up, gamma_down }
        }
        BirthDeathModel::Loaded { gamma_up, gamma_down, delta } => {
            GeneratorSpec::LoadedLaser { omega, gamma_up, gamma_down, delta }
        }
        BirthDeathModel::SaturatedPump { a, b, c } => GeneratorSpec::nonlinear_laser(
            omega,
            move |n| (a / (1.0 + c * (n + 1) as f64)).sqrt(),
            move |_| b.sqrt(),
        ),
        BirthDeathModel::SaturatedDamp { a, b, c } => GeneratorSpec::nonlinear_laser(
            omega,
            move |_| a.sqrt(),
            move |n| (b * (1.0 + c * n as f64)).sqrt(),
        ),
        BirthDeathModel::Custom { .. } => {
            let (m_up, m_down) = (model.clone(), model.clone());
            GeneratorSpec::nonlinear_laser(
                omega,
                move |n| (m_up.rates(n).0 / (n + 1) as f64).sqrt(),
                move |n| if n == 0 { 0.0 } else { (m_down.rates(n).1 / n as f64).sqrt() },
            )
        }
    }
}

/// Fock dimension for a model: at least `n̄ + 8√n̄` and past the point where
/// stationary weights fall below `1e-12` of their peak; also fits the initial
/// state. Falls back to 256 when there is no stationary state.
fn auto_dim(model: &BirthDeathModel, initial_mean: f64) -> Result<usize> {
    let init = (initial_mean + 10.0 * initial_mean.sqrt() + 20.0).ceil() as usize;
    let dim = match stationary_distribution_auto(model) {
        Ok(p) => {
            let mean = p.mean();
            let probs = p.probs();
            let peak = probs.iter().cloned().fold(0.0, f64::max);
            let tail = probs.iter().rposition(|&q| q >= 1e-12 * peak).unwrap_or(0) + 1;
            let spread = (mean + 8.0 * mean.sqrt()).ceil() as usize;
            tail.max(spread).max(init).max(16)
        }
        Err(Error::NoStationaryState(_)) => 256.max(init),
        Err(e) => return Err(e),
    };
    if dim > MAX_AUTO_DIM {
        return Err(Error::Config(format!("model needs a Fock dimension of {dim} (limit {MAX_AUTO_DIM})")));
    }
    Ok(dim)
}

fn pot(beta: f64, mu_a: f64, mu_b: f64, omega: f64) -> ChemicalPotentials {
    ChemicalPotentials::new(beta, mu_a, mu_b, omega).expect("preset potentials are valid")
}

fn two_bath_qubit() -> Result<Scenario> {
    let space = HilbertSpace::levels(2)?;
    let h = Operator::diagonal(space, &[0.0, 1.0])?;
    let sx = Operator::new(
        space,
        crate::linalg::CMatrix::from_row_slice(2, 2, &[0.0.into(), 1.0.into(), 1.0.into(), 0.0.into()]),
    )?;
    let couplings = [
        DaviesCoupling::new(0, sx.clone(), |w| 0.3 * w),
        DaviesCoupling::new(1, sx, |w| 0.5 * w),
    ];
    Ok(Scenario {
        name: "two_bath_qubit".into(),
        space,
        generator: davies_generator(&h, &couplings, &[0.5, 2.0])?,
        model: None,
        pot: None,
        initial: InitialState::Populations(vec![0.1, 0.9]),
        t_final: 10.0,
        dt: 0.01,
        sample_every: 5,
        horizon: None,
    })
}

/// Named preset.
///
/// | name | model | notes |
/// |---|---|---|
/// | `below_threshold` | linear, `β = ω = 1`, `μ_A = μ_B = 0` | thermal stationary state |
/// | `above_threshold_transient` | linear, `μ_A = 1.5`, `D = 256` | horizon where `⟨n⟩ = D/25` |
/// | `saturated_pump` | `A = 2, B = 1, C = 0.05` | `n̄ ≈ 20` |
/// | `saturated_damp` | same constants, saturating loss | same stationary state |
/// | `loaded_laser` | `γ↓ = 1, γ↑ = 2, δ = 0.01` | `γ↑/δ = 200` |
/// | `two_bath_qubit` | Davies qubit, `β = 0.5` and `2` | hot bath index 0 |
pub fn preset(name: &str) -> Result<Scenario> {
    match name {
        "below_threshold" => {
            let p = pot(1.0, 0.0, 0.0, 1.0);
            let e = chemical_engine(p, 1.0)?;
            let model = BirthDeathModel::linear(e.gamma_up, e.gamma_down)?;
            Scenario::laser(name, model, p, InitialState::Coherent(1.5), None, 8.0, 5e-3, 8)
        }
        "above_threshold_transient" => {
            let p = pot(1.0, 1.5, 0.0, 1.0);
            let e = chemical_engine(p, 1.0)?;
            let model = BirthDeathModel::linear(e.gamma_up, e.gamma_down)?;
            let dim = 256;
            let horizon = time_to_reach(&e, 4.0, dim as f64 / 25.0);
            let mut s = Scenario::laser(name, model, p, InitialState::Coherent(2.0), Some(dim), horizon, 1e-3, 5)?;
            s.horizon = Some(horizon);
            Ok(s)
        }
        "saturated_pump" | "saturated_damp" => {
            let (a, b, c) = (2.0, 1.0, 0.05);
            let p = pot(1.0, 1.0 + (a / b as f64).ln(), 0.0, 1.0);
            let model = if name == "saturated_pump" {
                BirthDeathModel::saturated_pump(a, b, c)?
            } else {
                BirthDeathModel::saturated_damp(a, b, c)?
            };
            Scenario::laser(name, model, p, InitialState::Coherent(1.0), None, 10.0, 1e-3, 50)
        }
        "loaded_laser" => {
            let (gd, gu, delta) = (1.0, 2.0, 0.01);
            let p = pot(1.0, 1.0 + (gu / gd as f64).ln(), 0.0, 1.0);
            let model = BirthDeathModel::loaded(gu, gd, delta)?;
            Scenario::laser(name, model, p, InitialState::Coherent(1.0), None, 8.0, 5e-4, 80)
        }
        "two_bath_qubit" => two_bath_qubit(),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}
