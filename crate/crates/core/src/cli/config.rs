use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::Failure;
use crate::birthdeath::BirthDeathModel;
use crate::error::Error;
use crate::fock::HilbertSpace;
use crate::lindblad::GeneratorSpec;
use crate::scenarios::{chemical_engine, preset, time_to_reach, InitialState, Scenario};
use crate::thermo::ChemicalPotentials;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Timeseries,
    Stationary,
    Husimi,
    Sweep,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ScenarioRef {
    Preset(String),
    Inline(InlineScenario),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Linear,
    Loaded,
    SaturatedPump,
    SaturatedDamp,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialSpec {
    Fock(usize),
    Coherent(f64),
    Thermal(f64),
    Populations(Vec<f64>),
}

impl From<InitialSpec> for InitialState {
    fn from(s: InitialSpec) -> Self {
        match s {
            InitialSpec::Fock(n) => InitialState::Fock(n),
            InitialSpec::Coherent(a) => InitialState::Coherent(a),
            InitialSpec::Thermal(x) => InitialState::Thermal(x),
            InitialSpec::Populations(p) => InitialState::Populations(p),
        }
    }
}

/// Laser given by its parameters.
///
/// Linear and loaded models take `γ↑` from detailed balance with the
/// reservoirs, so `mu_a` is required. Saturated models take `a, b, c`
/// directly; `mu_a` then defaults to the value matching the small-`n` gain
/// `a/b`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineScenario {
    pub model: ModelKind,
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default = "one")]
    pub beta: f64,
    pub mu_a: Option<f64>,
    #[serde(default)]
    pub mu_b: f64,
    pub gamma_down: Option<f64>,
    pub delta: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub initial: Option<InitialSpec>,
}

fn one() -> f64 {
    1.0
}

fn need(v: Option<f64>, name: &str, model: ModelKind) -> Result<f64, Failure> {
    v.ok_or_else(|| Failure::config(format!("model {model:?} needs `{name}`")))
}

impl InlineScenario {
    fn from_model(model: &BirthDeathModel, pot: &ChemicalPotentials, initial: &InitialState) -> Option<Self> {
        let mut s = InlineScenario {
            model: ModelKind::Linear,
            omega: pot.omega,
            beta: pot.beta,
            mu_a: Some(pot.mu_a),
            mu_b: pot.mu_b,
            gamma_down: None,
            delta: None,
            a: None,
            b: None,
            c: None,
            initial: Some(match initial {
                InitialState::Fock(n) => InitialSpec::Fock(*n),
                InitialState::Coherent(a) => InitialSpec::Coherent(*a),
                InitialState::Thermal(x) => InitialSpec::Thermal(*x),
                InitialState::Populations(p) => InitialSpec::Populations(p.clone()),
            }),
        };
        match *model {
            BirthDeathModel::Linear { gamma_down, .. } => s.gamma_down = Some(gamma_down),
            BirthDeathModel::Loaded { gamma_down, delta, .. } => {
                s.model = ModelKind::Loaded;
                s.gamma_down = Some(gamma_down);
                s.delta = Some(delta);
            }
            BirthDeathModel::SaturatedPump { a, b, c } | BirthDeathModel::SaturatedDamp { a, b, c } => {
                s.model = if matches!(model, BirthDeathModel::SaturatedPump { .. }) {
                    ModelKind::SaturatedPump
                } else {
                    ModelKind::SaturatedDamp
                };
                s.a = Some(a);
                s.b = Some(b);
                s.c = Some(c);
            }
            BirthDeathModel::Custom { .. } => return None,
        }
        Some(s)
    }

    fn saturated(&self) -> bool {
        matches!(self.model, ModelKind::SaturatedPump | ModelKind::SaturatedDamp)
    }

    /// `μ_A` giving a pump-to-loss ratio `r`.
    fn mu_a_for_ratio(&self, r: f64) -> f64 {
        self.omega + self.mu_b + r.ln() / self.beta
    }

    pub fn potentials(&self) -> Result<ChemicalPotentials, Failure> {
        let mu_a = match self.mu_a {
            Some(m) => m,
            None if self.saturated() => {
                let a = need(self.a, "a", self.model)?;
                let b = need(self.b, "b", self.model)?;
                self.mu_a_for_ratio(a / b)
            }
            None => return Err(Failure::config(format!("model {:?} needs `mu_a`", self.model))),
        };
        Ok(ChemicalPotentials::new(self.beta, mu_a, self.mu_b, self.omega)?)
    }

    pub fn model_and_potentials(&self) -> Result<(BirthDeathModel, ChemicalPotentials), Failure> {
        let pot = self.potentials()?;
        let m = self.model;
        let model = match m {
            ModelKind::Linear | ModelKind::Loaded => {
                let e = chemical_engine(pot, need(self.gamma_down, "gamma_down", m)?)?;
                if m == ModelKind::Linear {
                    BirthDeathModel::linear(e.gamma_up, e.gamma_down)?
                } else {
                    BirthDeathModel::loaded(e.gamma_up, e.gamma_down, need(self.delta, "delta", m)?)?
                }
            }
            ModelKind::SaturatedPump => {
                BirthDeathModel::saturated_pump(need(self.a, "a", m)?, need(self.b, "b", m)?, need(self.c, "c", m)?)?
            }
            ModelKind::SaturatedDamp => {
                BirthDeathModel::saturated_damp(need(self.a, "a", m)?, need(self.b, "b", m)?, need(self.c, "c", m)?)?
            }
        };
        Ok((model, pot))
    }

    /// Copy with one sweep parameter set.
    ///
    /// `pump_ratio` sets `γ↑/γ↓` (or `a/b`) through `μ_A`; `a` also moves `μ_A`
    /// when it was implied.
    pub fn with_parameter(&self, name: &str, v: f64) -> Result<Self, Failure> {
        let mut s = self.clone();
        match name {
            "mu_a" => s.mu_a = Some(v),
            "mu_b" => s.mu_b = v,
            "beta" => s.beta = v,
            "gamma_down" => s.gamma_down = Some(v),
            "delta" => s.delta = Some(v),
            "a" => s.a = Some(v),
            "b" => s.b = Some(v),
            "c" => s.c = Some(v),
            "pump_ratio" => {
                if !(v > 0.0) {
                    return Err(Failure::config(format!("pump_ratio must be > 0, got {v}")));
                }
                if s.saturated() {
                    let b = need(s.b, "b", s.model)?;
                    s.a = Some(v * b);
                }
                s.mu_a = Some(s.mu_a_for_ratio(v));
            }
            other => return Err(Failure::config(format!("unknown sweep parameter `{other}`"))),
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HusimiConfig {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub resolution: usize,
}

impl Default for HusimiConfig {
    fn default() -> Self {
        HusimiConfig { re: (-5.0, 5.0), im: (-5.0, 5.0), resolution: 61 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub scenario: ScenarioRef,
    pub dim: Option<usize>,
    pub t_final: Option<f64>,
    pub dt: Option<f64>,
    pub sample_every: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputKind>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub allow_long_horizon: bool,
    #[serde(default)]
    pub husimi: HusimiConfig,
    pub sweep: Option<SweepConfig>,
    /// Extra Gillespie histogram in `stationary.csv` when positive.
    #[serde(default)]
    pub gillespie_samples: usize,
    #[serde(default = "default_gillespie_time")]
    pub gillespie_time: f64,
}

fn default_outputs() -> Vec<OutputKind> {
    vec![OutputKind::Timeseries]
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_gillespie_time() -> f64 {
    50.0
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Failure::config(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Failure::config(format!(
                "schema_version {} not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if let Some(t) = self.t_final {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Failure::config(format!("t_final must be > 0, got {t}")));
            }
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Failure::config(format!("dt must be > 0, got {dt}")));
            }
        }
        if matches!(self.dim, Some(d) if d < 2) {
            return Err(Failure::config("dim must be >= 2"));
        }
        if self.sample_every == Some(0) {
            return Err(Failure::config("sample_every must be >= 1"));
        }
        if self.outputs.is_empty() {
            return Err(Failure::config("no outputs requested"));
        }
        let h = &self.husimi;
        if h.resolution < 2 || !(h.re.0 < h.re.1) || !(h.im.0 < h.im.1) {
            return Err(Failure::config("husimi grid needs increasing ranges and resolution >= 2"));
        }
        if self.gillespie_samples > 0 && !(self.gillespie_time > 0.0) {
            return Err(Failure::config("gillespie_time must be > 0"));
        }
        Ok(())
    }

    /// Resolve the scenario with the run-level overrides applied.
    pub fn scenario(&self) -> Result<Scenario, Failure> {
        let mut s = match &self.scenario {
            ScenarioRef::Preset(name) => preset(name)?,
            ScenarioRef::Inline(inline) => {
                let (model, pot) = inline.model_and_potentials()?;
                let initial = inline.initial.clone().map(InitialState::from).unwrap_or(InitialState::Fock(0));
                Scenario::laser("inline", model, pot, initial, self.dim, 10.0, 1e-3, 10)?
            }
        };
        if let Some(d) = self.dim {
            if d != s.space.dim() {
                if !s.is_laser() {
                    return Err(Failure::config(format!("scenario {} has fixed dimension {}", s.name, s.space.dim())));
                }
                s.space = HilbertSpace::fock(d).map_err(Failure::from)?;
                if s.horizon.is_some() {
                    s.horizon = Some(horizon_for(&s, d)?);
                    s.t_final = s.horizon.unwrap();
                }
            }
        }
        if let Some(t) = self.t_final {
            s.t_final = t;
        }
        if let Some(dt) = self.dt {
            s.dt = dt;
        }
        if let Some(k) = self.sample_every {
            s.sample_every = k;
        }
        if let Some(h) = s.horizon {
            if s.t_final > h * (1.0 + 1e-12) && !self.allow_long_horizon {
                return Err(Failure::config(format!(
                    "t_final {} exceeds the truncation horizon {h:.6} of {}; set allow_long_horizon to override",
                    s.t_final, s.name
                )));
            }
        }
        Ok(s)
    }

    /// Parameters of the scenario as an inline laser, for sweeps.
    pub fn inline_scenario(&self) -> Result<InlineScenario, Failure> {
        match &self.scenario {
            ScenarioRef::Inline(s) => Ok(s.clone()),
            ScenarioRef::Preset(name) => {
                let s = preset(name)?;
                match (&s.model, &s.pot) {
                    (Some(m), Some(p)) => InlineScenario::from_model(m, p, &s.initial),
                    _ => None,
                }
                .ok_or_else(|| Failure::config(format!("sweeps need a laser scenario, got {name}")))
            }
        }
    }
}

fn horizon_for(s: &Scenario, dim: usize) -> Result<f64, Failure> {
    let (GeneratorSpec::LinearLaser { gamma_down, .. }, Some(pot)) = (&s.generator, s.pot) else {
        return Err(Error::Config("horizon needs a linear laser".into()).into());
    };
    let e = chemical_engine(pot, *gamma_down)?;
    Ok(time_to_reach(&e, s.initial.mean_photons(), dim as f64 / 25.0))
}
