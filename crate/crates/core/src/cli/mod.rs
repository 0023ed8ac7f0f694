//! Config-driven runner behind the `gkls-thermo` binary.
//!
//! Everything is computed in memory first; files are written only after all
//! requested outputs succeeded, so a failed run leaves no partial output.

mod config;
mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::info;
use rayon::prelude::*;

use crate::birthdeath::{gillespie_final_states, moments, stationary_distribution_auto, BirthDeathModel, PhotonDistribution};
use crate::error::Error;
use crate::fock::husimi_grid;
use crate::lindblad::{evolve, stationary_state, GeneratorSpec, Trajectory};
use crate::linalg;
use crate::scenarios::Scenario;
use crate::thermo::{davies_reports, laser_reports, residual_production_diagonal, ChemicalPotentials};

pub use config::{HusimiConfig, InlineScenario, OutputKind, RunConfig, ScenarioRef, SweepConfig, SCHEMA_VERSION};
use output::{format_row, Csv};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_NO_STATIONARY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "gkls-thermo", version, about = "Open-system laser and engine simulations")]
pub struct Cli {
    /// Override the seed in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Only print errors.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write the requested outputs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `out_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scan one parameter and write one stationary summary row per grid point.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Failure of a CLI invocation, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_CONFIG, message: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::NoStationaryState(_) | Error::DegenerateKernel(_) => EXIT_NO_STATIONARY,
            Error::Config(_)
            | Error::UnknownPreset(_)
            | Error::Domain(_)
            | Error::InsufficientSamples(_)
            | Error::VariantMismatch(_)
            | Error::DimensionMismatch { .. } => EXIT_CONFIG,
            _ => EXIT_NUMERICAL,
        };
        Failure { code, message: e.to_string() }
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let level = if cli.quiet { log::LevelFilter::Error } else { log::LevelFilter::Info };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();
    match execute(&cli) {
        Ok(files) => {
            for f in files {
                info!("wrote {}", f.display());
            }
            EXIT_OK
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

/// Run the parsed command; returns the files written.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>, Failure> {
    match &cli.command {
        Command::Run { config, out } => {
            let mut cfg = RunConfig::load(config)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if let Some(o) = out {
                cfg.out_dir = o.clone();
            }
            let files = run(&cfg)?;
            write_all(&cfg.out_dir, files)
        }
        Command::Sweep { config } => {
            let mut cfg = RunConfig::load(config)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let sweep = cfg.sweep.clone().ok_or_else(|| Failure::config("sweep needs a `sweep` section"))?;
            let csv = sweep_csv(&cfg, &sweep)?;
            write_all(&cfg.out_dir, vec![("sweep.csv".into(), csv.render())])
        }
    }
}

fn write_all(dir: &Path, files: Vec<(String, String)>) -> Result<Vec<PathBuf>, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::config(format!("cannot create {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}

/// Compute every requested output of a run as `(file name, contents)`.
pub fn run(cfg: &RunConfig) -> Result<Vec<(String, String)>, Failure> {
    let scenario = cfg.scenario()?;
    let mut files = Vec::new();

    let needs_traj = cfg.outputs.iter().any(|o| matches!(o, OutputKind::Timeseries | OutputKind::Husimi));
    let traj = if needs_traj {
        info!(
            "evolving {} on dimension {} to t = {} (dt = {})",
            scenario.name,
            scenario.space.dim(),
            scenario.t_final,
            scenario.dt
        );
        let rho0 = scenario.initial_state()?;
        Some(evolve(&scenario.generator, &rho0, scenario.t_final, scenario.dt, scenario.sample_every)?)
    } else {
        None
    };

    for kind in &cfg.outputs {
        match kind {
            OutputKind::Timeseries => {
                let traj = traj.as_ref().expect("trajectory computed");
                files.push(("timeseries.csv".into(), timeseries_csv(&scenario, traj)?.render()));
            }
            OutputKind::Stationary => {
                let (dist, report) = stationary_outputs(&scenario, cfg)?;
                files.push(("stationary.csv".into(), dist.render()));
                files.push(("stationary_report.csv".into(), report.render()));
            }
            OutputKind::Husimi => {
                let traj = traj.as_ref().expect("trajectory computed");
                let (csv, meta) = husimi_outputs(traj, &cfg.husimi)?;
                files.push(("husimi.csv".into(), csv));
                files.push(("husimi.json".into(), meta));
            }
            OutputKind::Sweep => {
                let sweep = cfg.sweep.clone().ok_or_else(|| Failure::config("`sweep` output needs a `sweep` section"))?;
                files.push(("sweep.csv".into(), sweep_csv(cfg, &sweep)?.render()));
            }
        }
    }
    Ok(files)
}

pub const TIMESERIES_COLUMNS: [&str; 13] =
    ["t", "E", "N", "S", "j", "J", "jA", "jB", "P", "dS_res", "first_law_residual", "second_law_lhs", "leakage"];

fn timeseries_csv(s: &Scenario, traj: &Trajectory) -> Result<Csv, Failure> {
    let mut csv = Csv::new(&TIMESERIES_COLUMNS);
    if let Some(book) = s.bookkeeping()? {
        for r in laser_reports(traj, &book)? {
            csv.push(vec![
                r.time,
                r.energy,
                r.photon_number,
                r.entropy,
                r.photon_flux,
                r.heat_current,
                r.j_a,
                r.j_b,
                r.load_power,
                r.residual_production,
                r.first_law_residual,
                r.second_law_lhs,
                r.leakage,
            ]);
        }
    } else if let GeneratorSpec::Davies(dav) = &s.generator {
        // no photon number or particle currents; J is the total heat current
        for (r, leak) in davies_reports(traj, dav)?.into_iter().zip(&traj.leakage) {
            let total: f64 = r.heat_currents.iter().sum();
            csv.push(vec![
                r.time,
                r.energy,
                f64::NAN,
                r.entropy,
                f64::NAN,
                total,
                f64::NAN,
                f64::NAN,
                0.0,
                0.0,
                r.first_law_residual,
                r.second_law_lhs,
                *leak,
            ]);
        }
    }
    Ok(csv)
}

pub const SUMMARY_COLUMNS: [&str; 9] = [
    "parameter",
    "value",
    "mean_n",
    "fano",
    "power",
    "heat_current",
    "residual_production",
    "second_law_lhs_min",
    "hot_heat_current",
];

/// Stationary summary of a laser model: `(n̄, Fano, P̄, J, δṠ, second-law lhs)`.
struct Summary {
    mean: f64,
    fano: f64,
    power: f64,
    heat: f64,
    residual: f64,
    lhs: f64,
}

fn laser_summary(model: &BirthDeathModel, pot: &ChemicalPotentials) -> Result<(PhotonDistribution, Summary), Failure> {
    let p = stationary_distribution_auto(model)?;
    let m = moments(&p);
    let probs = p.probs();
    let (bath, delta) = match *model {
        BirthDeathModel::Loaded { gamma_up, gamma_down, delta } => (BirthDeathModel::linear(gamma_up, gamma_down)?, delta),
        _ => (model.clone(), 0.0),
    };
    let j: f64 = probs
        .iter()
        .enumerate()
        .map(|(n, q)| {
            let (up, down) = bath.rates(n);
            q * (up - down)
        })
        .sum();
    let second: f64 = probs.iter().enumerate().map(|(n, q)| (n * n) as f64 * q).sum();
    let heat = pot.delta_g() * j;
    let residual = residual_production_diagonal(probs, delta);
    // stationary: dS/dt = 0; the entropy flow is βJ for the chemical reference
    // and zero when the reference is the chain's own stationary weight
    let flow = match model {
        BirthDeathModel::Linear { .. } | BirthDeathModel::Loaded { .. } => pot.beta * heat,
        _ => 0.0,
    };
    let summary = Summary {
        mean: m.mean,
        fano: m.fano,
        power: pot.omega * delta * second,
        heat,
        residual,
        lhs: -flow + residual,
    };
    Ok((p, summary))
}

fn summary_row(parameter: &str, value: f64, s: &Summary, hot: f64) -> (String, Vec<f64>) {
    (parameter.to_string(), vec![value, s.mean, s.fano, s.power, s.heat, s.residual, s.lhs, hot])
}

fn stationary_outputs(s: &Scenario, cfg: &RunConfig) -> Result<(Csv, Csv), Failure> {
    let mut report = Csv::new(&SUMMARY_COLUMNS);
    if let (Some(model), Some(pot)) = (&s.model, &s.pot) {
        let (p, summary) = laser_summary(model, pot)?;
        let mut cols = vec!["n", "p_n"];
        let sampled = if cfg.gillespie_samples > 0 {
            cols.push("p_n_sampled");
            let start = p.mean().round() as usize;
            let finals = gillespie_final_states(model, start, cfg.gillespie_time, cfg.seed, cfg.gillespie_samples);
            let top = finals.iter().copied().max().unwrap_or(0).max(p.cutoff());
            Some(PhotonDistribution::from_samples(&finals, top)?)
        } else {
            None
        };
        let mut dist = Csv::new(&cols);
        for (n, q) in p.probs().iter().enumerate() {
            let mut row = vec![n as f64, *q];
            if let Some(h) = &sampled {
                row.push(h.probs().get(n).copied().unwrap_or(0.0));
            }
            dist.push(row);
        }
        let (name, row) = summary_row("none", f64::NAN, &summary, f64::NAN);
        report.push_labeled(&name, row);
        Ok((dist, report))
    } else {
        let st = stationary_state(&s.generator, s.space)?;
        let mut dist = Csv::new(&["n", "p_n"]);
        for (n, q) in st.populations().iter().enumerate() {
            dist.push(vec![n as f64, *q]);
        }
        let GeneratorSpec::Davies(dav) = &s.generator else {
            return Err(Failure::config("stationary report needs a laser or Davies scenario"));
        };
        let h = dav.hamiltonian();
        let mut currents = Vec::new();
        for k in 0..dav.baths().len() {
            let lk = dav.bath_generator(k)?.compile(s.space)?;
            currents.push(linalg::trace_product(st.matrix(), &lk.adjoint(h.matrix())).re);
        }
        let hot = dav
            .baths()
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.beta.total_cmp(&b.1.beta))
            .map(|(k, _)| currents[k])
            .unwrap_or(f64::NAN);
        let flow: f64 = currents.iter().zip(dav.baths()).map(|(j, b)| b.beta * j).sum();
        let summary = Summary {
            mean: f64::NAN,
            fano: f64::NAN,
            power: 0.0,
            heat: currents.iter().sum(),
            residual: 0.0,
            lhs: -flow,
        };
        let (name, row) = summary_row("none", f64::NAN, &summary, hot);
        report.push_labeled(&name, row);
        Ok((dist, report))
    }
}

fn husimi_outputs(traj: &Trajectory, cfg: &HusimiConfig) -> Result<(String, String), Failure> {
    let rho = traj.final_state();
    let time = *traj.times.last().expect("nonempty trajectory");
    let q = husimi_grid(rho, cfg.re, cfg.im, cfg.resolution)?;
    let mut body = String::new();
    for i in 0..q.nrows() {
        let row: Vec<String> = (0..q.ncols()).map(|j| format_row(q[(i, j)])).collect();
        body.push_str(&row.join(","));
        body.push('\n');
    }
    let meta = serde_json::json!({
        "time": time,
        "re_range": [cfg.re.0, cfg.re.1],
        "im_range": [cfg.im.0, cfg.im.1],
        "resolution": cfg.resolution,
        "rows": "imaginary part, ascending",
        "columns": "real part, ascending",
    });
    Ok((body, serde_json::to_string_pretty(&meta).expect("json") + "\n"))
}

fn sweep_csv(cfg: &RunConfig, sweep: &SweepConfig) -> Result<Csv, Failure> {
    if sweep.values.is_empty() {
        return Err(Failure::config("sweep grid is empty"));
    }
    let base = cfg.inline_scenario()?;
    let rows: Vec<Result<(String, Vec<f64>), Failure>> = sweep
        .values
        .par_iter()
        .map(|&v| {
            let point = base.with_parameter(&sweep.parameter, v)?;
            let (model, pot) = point.model_and_potentials()?;
            let (_, summary) = laser_summary(&model, &pot)?;
            Ok(summary_row(&sweep.parameter, v, &summary, f64::NAN))
        })
        .collect();
    let mut csv = Csv::new(&SUMMARY_COLUMNS);
    for r in rows {
        let (name, row) = r?;
        csv.push_labeled(&name, row);
    }
    Ok(csv)
}
