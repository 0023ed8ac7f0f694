//! Photon-number birth–death chains.
//!
//! The diagonal `p_n = ⟨n|ρ|n⟩` of every laser generator obeys
//!
//! ```text
//! dp_n/dt = Γ↓[n+1] p_{n+1} + Γ↑[n−1] p_{n−1} − (Γ↓[n] + Γ↑[n]) p_n
//! ```
//!
//! This module integrates that chain, builds its product-form stationary
//! distribution, and samples it with the Gillespie algorithm.

use std::fmt;
use std::sync::Arc;

use log::debug;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest tolerated probability flux out of the top retained level.
pub const BOUNDARY_FLUX_LIMIT: f64 = 1e-10;
/// Largest tolerated probability mass beyond the cutoff of a stationary distribution.
pub const TAIL_LIMIT: f64 = 1e-12;

pub type RateFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum BirthDeathModel {
    /// `Γ↑[n] = γ↑(n+1)`, `Γ↓[n] = γ↓ n`.
    Linear { gamma_up: f64, gamma_down: f64 },
    /// `Γ↑[n] = A(n+1)/(1 + C(n+1))`, `Γ↓[n] = B n`.
    SaturatedPump { a: f64, b: f64, c: f64 },
    /// `Γ↑[n] = A(n+1)`, `Γ↓[n] = B(n + C n²)`.
    SaturatedDamp { a: f64, b: f64, c: f64 },
    /// `Γ↑[n] = γ↑(n+1)`, `Γ↓[n] = γ↓ n + δ n²`.
    Loaded { gamma_up: f64, gamma_down: f64, delta: f64 },
    Custom { up: RateFn, down: RateFn },
}

impl fmt::Debug for BirthDeathModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Linear { gamma_up, gamma_down } => write!(f, "Linear(up={gamma_up}, down={gamma_down})"),
            Self::SaturatedPump { a, b, c } => write!(f, "SaturatedPump(A={a}, B={b}, C={c})"),
            Self::SaturatedDamp { a, b, c } => write!(f, "SaturatedDamp(A={a}, B={b}, C={c})"),
            Self::Loaded { gamma_up, gamma_down, delta } => {
                write!(f, "Loaded(up={gamma_up}, down={gamma_down}, delta={delta})")
            }
            Self::Custom { .. } => write!(f, "Custom(..)"),
        }
    }
}

fn nonneg(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")));
    }
    Ok(())
}

impl BirthDeathModel {
    pub fn linear(gamma_up: f64, gamma_down: f64) -> Result<Self> {
        let m = Self::Linear { gamma_up, gamma_down };
        m.validate()?;
        Ok(m)
    }

    pub fn saturated_pump(a: f64, b: f64, c: f64) -> Result<Self> {
        let m = Self::SaturatedPump { a, b, c };
        m.validate()?;
        Ok(m)
    }

    pub fn saturated_damp(a: f64, b: f64, c: f64) -> Result<Self> {
        let m = Self::SaturatedDamp { a, b, c };
        m.validate()?;
        Ok(m)
    }

    pub fn loaded(gamma_up: f64, gamma_down: f64, delta: f64) -> Result<Self> {
        let m = Self::Loaded { gamma_up, gamma_down, delta };
        m.validate()?;
        Ok(m)
    }

    pub fn custom(
        up: impl Fn(usize) -> f64 + Send + Sync + 'static,
        down: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::Custom { up: Arc::new(up), down: Arc::new(down) }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Linear { gamma_up, gamma_down } => {
                nonneg("gamma_up", *gamma_up)?;
                nonneg("gamma_down", *gamma_down)
            }
            Self::SaturatedPump { a, b, c } | Self::SaturatedDamp { a, b, c } => {
                nonneg("A", *a)?;
                nonneg("B", *b)?;
                if !(*c > 0.0) || !c.is_finite() {
                    return Err(Error::Domain(format!("C must be > 0, got {c}")));
                }
                Ok(())
            }
            Self::Loaded { gamma_up, gamma_down, delta } => {
                nonneg("gamma_up", *gamma_up)?;
                nonneg("gamma_down", *gamma_down)?;
                nonneg("delta", *delta)
            }
            Self::Custom { .. } => Ok(()),
        }
    }

    /// `(Γ↑[n], Γ↓[n])`; `Γ↓[0]` is always zero.
    pub fn rates(&self, n: usize) -> (f64, f64) {
        let x = n as f64;
        let (up, down) = match self {
            Self::Linear { gamma_up, gamma_down } => (gamma_up * (x + 1.0), gamma_down * x),
            Self::SaturatedPump { a, b, c } => (a * (x + 1.0) / (1.0 + c * (x + 1.0)), b * x),
            Self::SaturatedDamp { a, b, c } => (a * (x + 1.0), b * (x + c * x * x)),
            Self::Loaded { gamma_up, gamma_down, delta } => (gamma_up * (x + 1.0), gamma_down * x + delta * x * x),
            Self::Custom { up, down } => (up(n), down(n)),
        };
        (up, if n == 0 { 0.0 } else { down })
    }

    /// `ln(Γ↑[n−1] / Γ↓[n])` for `n ≥ 1`, with the common factor `n` cancelled
    /// analytically for the named families.
    pub fn log_ratio(&self, n: usize) -> f64 {
        debug_assert!(n >= 1);
        let x = n as f64;
        match self {
            Self::Linear { gamma_up, gamma_down } => gamma_up.ln() - gamma_down.ln(),
            Self::SaturatedPump { a, b, c } | Self::SaturatedDamp { a, b, c } => {
                a.ln() - b.ln() - (c * x).ln_1p()
            }
            Self::Loaded { gamma_up, gamma_down, delta } => gamma_up.ln() - (gamma_down + delta * x).ln(),
            Self::Custom { up, down } => up(n - 1).ln() - down(n).ln(),
        }
    }

    fn check_stationary_exists(&self, cutoff: usize) -> Result<()> {
        let fail = |why: String| Err(Error::NoStationaryState(why));
        match self {
            Self::Linear { gamma_up, gamma_down }
            | Self::Loaded { gamma_up, gamma_down, delta: 0.0 } => {
                if gamma_up >= gamma_down {
                    return fail(format!("linear chain at or above threshold (up {gamma_up}, down {gamma_down})"));
                }
            }
            Self::SaturatedPump { b, .. } | Self::SaturatedDamp { b, .. } if *b == 0.0 => {
                return fail("no damping (B = 0)".into());
            }
            Self::Custom { .. } => {
                let r = self.log_ratio(cutoff.max(1));
                if !(r < 0.0) {
                    return fail(format!("ratio Γ↑[n−1]/Γ↓[n] = {:.4} at n = {cutoff}", r.exp()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Unnormalized `ln p̄_n` for `n = 0..levels` from the product form
    /// `p̄_n = p̄_0 Π_{k=1..n} Γ↑[k−1]/Γ↓[k]`. Entries are `−∞` past a zero
    /// birth rate.
    pub fn stationary_log_weights(&self, levels: usize) -> Result<Vec<f64>> {
        let mut lw = Vec::with_capacity(levels);
        let mut acc = 0.0;
        for n in 0..levels {
            if n > 0 {
                let (up_prev, _) = self.rates(n - 1);
                let (_, down) = self.rates(n);
                if up_prev == 0.0 {
                    acc = f64::NEG_INFINITY;
                } else if down == 0.0 {
                    return Err(Error::NoStationaryState(format!("death rate vanishes at n = {n}")));
                } else if acc.is_finite() {
                    acc += self.log_ratio(n);
                }
            }
            lw.push(acc);
        }
        Ok(lw)
    }

    /// Rough location of the stationary peak: the first `n` where the chain
    /// starts to drift downward.
    pub fn mode_estimate(&self) -> usize {
        let mut n = 1;
        while n < 10_000_000 && self.log_ratio(n) >= 0.0 {
            n = if n < 1024 { n + 1 } else { n + n / 64 };
        }
        n - 1
    }
}

/// Probability distribution over photon numbers `0..=cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    p: Vec<f64>,
}

impl PhotonDistribution {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Domain("empty distribution".into()));
        }
        if let Some(x) = p.iter().find(|&&x| !(x >= -1e-12) || !x.is_finite()) {
            return Err(Error::Domain(format!("invalid probability {x}")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("probabilities sum to {total}")));
        }
        Ok(PhotonDistribution { p })
    }

    /// Point mass at `n` on `0..=cutoff`.
    pub fn delta(n: usize, cutoff: usize) -> Result<Self> {
        if n > cutoff {
            return Err(Error::Domain(format!("level {n} beyond cutoff {cutoff}")));
        }
        let mut p = vec![0.0; cutoff + 1];
        p[n] = 1.0;
        Ok(PhotonDistribution { p })
    }

    /// Normalize nonnegative weights.
    pub fn from_weights(w: &[f64]) -> Result<Self> {
        let total: f64 = w.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Domain("weights do not sum to a positive number".into()));
        }
        Self::new(w.iter().map(|x| x / total).collect())
    }

    /// Normalize from log-weights (log-sum-exp).
    pub fn from_log_weights(lw: &[f64]) -> Result<Self> {
        let max = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::Domain("all log-weights are -inf".into()));
        }
        let w: Vec<f64> = lw.iter().map(|x| (x - max).exp()).collect();
        Self::from_weights(&w)
    }

    /// Poisson(`mean`) restricted to `0..=cutoff` and renormalized.
    pub fn poisson(mean: f64, cutoff: usize) -> Result<Self> {
        if !(mean > 0.0) {
            return Self::delta(0, cutoff);
        }
        let lm = mean.ln();
        let mut lf = 0.0;
        let lw: Vec<f64> = (0..=cutoff)
            .map(|k| {
                if k > 0 {
                    lf += (k as f64).ln();
                }
                k as f64 * lm - mean - lf
            })
            .collect();
        Self::from_log_weights(&lw)
    }

    /// Empirical histogram; samples above `cutoff` are rejected.
    pub fn from_samples(samples: &[usize], cutoff: usize) -> Result<Self> {
        let mut counts = vec![0.0; cutoff + 1];
        for &s in samples {
            if s > cutoff {
                return Err(Error::Domain(format!("sample {s} beyond cutoff {cutoff}")));
            }
            counts[s] += 1.0;
        }
        Self::from_weights(&counts)
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn cutoff(&self) -> usize {
        self.p.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.p.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// `½ Σ |p_n − q_n|`, padding the shorter distribution with zeros.
    pub fn total_variation(&self, other: &PhotonDistribution) -> f64 {
        let len = self.p.len().max(other.p.len());
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        0.5 * (0..len).map(|i| (get(&self.p, i) - get(&other.p, i)).abs()).sum::<f64>()
    }

    pub fn max_abs_diff(&self, other: &PhotonDistribution) -> f64 {
        let len = self.p.len().max(other.p.len());
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        (0..len).map(|i| (get(&self.p, i) - get(&other.p, i)).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    /// `variance / mean`; NaN when the mean is zero.
    pub fano: f64,
}

pub fn moments(p: &PhotonDistribution) -> Moments {
    let mean = p.mean();
    let second: f64 = p.p.iter().enumerate().map(|(n, q)| (n * n) as f64 * q).sum();
    let variance = (second - mean * mean).max(0.0);
    let fano = if mean == 0.0 { f64::NAN } else { variance / mean };
    Moments { mean, variance, fano }
}

/// Sampled solution of the birth–death master equation.
#[derive(Debug, Clone)]
pub struct DistributionSeries {
    pub times: Vec<f64>,
    pub distributions: Vec<PhotonDistribution>,
    /// Largest suppressed birth flux `Γ↑[cutoff] p_cutoff` seen during the run.
    pub max_boundary_flux: f64,
}

/// RK4 on the tridiagonal rate equations with a reflecting top boundary.
///
/// Step placement and sampling follow [`crate::lindblad::evolve`], so the two
/// produce samples at identical times.
pub fn evolve_distribution(
    model: &BirthDeathModel,
    p0: &PhotonDistribution,
    t_final: f64,
    dt: f64,
    sample_every: usize,
) -> Result<DistributionSeries> {
    if !(t_final >= 0.0) || !(dt > 0.0) || sample_every == 0 {
        return Err(Error::Domain("need t_final >= 0, dt > 0, sample_every >= 1".into()));
    }
    let levels = p0.p.len();
    let top = levels - 1;
    let mut up: Vec<f64> = (0..levels).map(|n| model.rates(n).0).collect();
    let down: Vec<f64> = (0..levels).map(|n| model.rates(n).1).collect();
    let top_birth = up[top];
    up[top] = 0.0;

    let mut series = DistributionSeries {
        times: vec![0.0],
        distributions: vec![p0.clone()],
        max_boundary_flux: top_birth * p0.p[top],
    };
    if series.max_boundary_flux > BOUNDARY_FLUX_LIMIT {
        return Err(Error::BoundaryLeak { flux: series.max_boundary_flux, time: 0.0 });
    }
    if t_final == 0.0 {
        return Ok(series);
    }

    let rhs = |p: &[f64], out: &mut [f64]| {
        for n in 0..levels {
            let mut v = -(up[n] + down[n]) * p[n];
            if n + 1 < levels {
                v += down[n + 1] * p[n + 1];
            }
            if n > 0 {
                v += up[n - 1] * p[n - 1];
            }
            out[n] = v;
        }
    };

    let steps = ((t_final / dt) - 1e-9).ceil().max(1.0) as usize;
    let h = t_final / steps as f64;
    let mut p = p0.p.clone();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; levels], vec![0.0; levels], vec![0.0; levels], vec![0.0; levels]);
    let mut tmp = vec![0.0; levels];
    for step in 1..=steps {
        rhs(&p, &mut k1);
        for n in 0..levels {
            tmp[n] = p[n] + 0.5 * h * k1[n];
        }
        rhs(&tmp, &mut k2);
        for n in 0..levels {
            tmp[n] = p[n] + 0.5 * h * k2[n];
        }
        rhs(&tmp, &mut k3);
        for n in 0..levels {
            tmp[n] = p[n] + h * k3[n];
        }
        rhs(&tmp, &mut k4);
        for n in 0..levels {
            p[n] += h / 6.0 * (k1[n] + k4[n]) + h / 3.0 * (k2[n] + k3[n]);
        }

        let flux = top_birth * p[top];
        series.max_boundary_flux = series.max_boundary_flux.max(flux);
        if flux > BOUNDARY_FLUX_LIMIT {
            return Err(Error::BoundaryLeak { flux, time: step as f64 * h });
        }
        if step % sample_every == 0 || step == steps {
            series.times.push(if step == steps { t_final } else { step as f64 * h });
            series.distributions.push(PhotonDistribution { p: p.clone() });
        }
    }
    if series.max_boundary_flux > 0.0 {
        debug!("suppressed boundary flux up to {:.3e}", series.max_boundary_flux);
    }
    Ok(series)
}

/// Product-form stationary distribution on `0..=cutoff`.
pub fn stationary_distribution(model: &BirthDeathModel, cutoff: usize) -> Result<PhotonDistribution> {
    model.validate()?;
    model.check_stationary_exists(cutoff)?;
    let lw = model.stationary_log_weights(cutoff + 1)?;
    let dist = PhotonDistribution::from_log_weights(&lw)?;

    // geometric bound on the mass beyond the cutoff, using the ratio at the
    // first discarded level (the ratios of every named family are nonincreasing)
    let r = model.log_ratio(cutoff + 1).exp();
    let tail = if r < 1.0 { dist.p[cutoff] * r / (1.0 - r) } else { f64::INFINITY };
    if !(tail < TAIL_LIMIT) {
        return Err(Error::CutoffTooSmall { cutoff, tail });
    }
    Ok(dist)
}

/// [`stationary_distribution`] with the cutoff chosen automatically: start at
/// `max(50, 10·mode)` and double until the tail bound is met.
pub fn stationary_distribution_auto(model: &BirthDeathModel) -> Result<PhotonDistribution> {
    let mut cutoff = 50.max(10 * model.mode_estimate());
    loop {
        match stationary_distribution(model, cutoff) {
            Err(Error::CutoffTooSmall { .. }) if cutoff < 1 << 26 => cutoff *= 2,
            other => return other,
        }
    }
}

/// Piecewise-constant sample path of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpTrajectory {
    /// Jump times, starting with 0.
    pub times: Vec<f64>,
    /// State held from `times[k]` until `times[k+1]`.
    pub states: Vec<usize>,
    pub t_final: f64,
}

impl JumpTrajectory {
    pub fn state_at(&self, t: f64) -> usize {
        let k = self.times.partition_point(|&s| s <= t);
        self.states[k.saturating_sub(1)]
    }

    pub fn final_state(&self) -> usize {
        *self.states.last().expect("trajectory has an initial state")
    }

    pub fn n_jumps(&self) -> usize {
        self.states.len() - 1
    }
}

/// Direct-method Gillespie sampling on the unbounded ladder.
pub fn gillespie_sample(model: &BirthDeathModel, n0: usize, t_final: f64, seed: u64) -> JumpTrajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut traj = JumpTrajectory { times: vec![0.0], states: vec![n0], t_final };
    let (mut t, mut n) = (0.0, n0);
    loop {
        let (up, down) = model.rates(n);
        let total = up + down;
        if !(total > 0.0) {
            break;
        }
        let wait: f64 = Exp::new(total).expect("positive rate").sample(&mut rng);
        t += wait;
        if t > t_final {
            break;
        }
        let u: f64 = rand::Rng::random::<f64>(&mut rng) * total;
        n = if u < up { n + 1 } else { n - 1 };
        traj.times.push(t);
        traj.states.push(n);
    }
    traj
}

/// Final states of `runs` independent trajectories; run `i` uses seed `seed + i`.
pub fn gillespie_final_states(model: &BirthDeathModel, n0: usize, t_final: f64, seed: u64, runs: usize) -> Vec<usize> {
    (0..runs)
        .into_par_iter()
        .map(|i| gillespie_sample(model, n0, t_final, seed.wrapping_add(i as u64)).final_state())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_rates() {
        let lin = BirthDeathModel::linear(2.0, 3.0).unwrap();
        assert_eq!(lin.rates(4), (10.0, 12.0));
        let sp = BirthDeathModel::saturated_pump(1.0, 1.0, 0.1).unwrap();
        assert!((sp.rates(9).0 - 5.0).abs() < 1e-15);
        let ld = BirthDeathModel::loaded(1.5, 0.5, 0.25).unwrap();
        for n in 0..20 {
            let x = n as f64;
            assert_eq!(ld.rates(n).1, 0.5 * x + 0.25 * x * x);
        }
        let custom = BirthDeathModel::custom(|_| 1.0, |_| 7.0);
        assert_eq!(custom.rates(0), (1.0, 0.0));
    }

    #[test]
    fn validation() {
        assert!(BirthDeathModel::linear(-1.0, 1.0).is_err());
        assert!(BirthDeathModel::saturated_pump(1.0, 1.0, 0.0).is_err());
        assert!(BirthDeathModel::saturated_damp(1.0, 1.0, -0.1).is_err());
        assert!(BirthDeathModel::loaded(1.0, 1.0, -1e-3).is_err());
    }

    #[test]
    fn loaded_equals_saturated_damp() {
        let (gu, gd, d) = (2.0, 0.5, 0.125);
        let ld = BirthDeathModel::loaded(gu, gd, d).unwrap();
        let sd = BirthDeathModel::saturated_damp(gu, gd, d / gd).unwrap();
        for n in 0..500 {
            assert_eq!(ld.rates(n), sd.rates(n), "n = {n}");
        }
    }

    #[test]
    fn thermal_geometric_distribution() {
        let x: f64 = 0.7;
        let m = BirthDeathModel::linear((-x).exp(), 1.0).unwrap();
        let p = stationary_distribution(&m, 80).unwrap();
        for (n, &pn) in p.probs().iter().enumerate() {
            let exact = (1.0 - (-x).exp()) * (-x * n as f64).exp();
            assert!((pn - exact).abs() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn detailed_balance_termwise() {
        for m in [
            BirthDeathModel::loaded(2.0, 1.0, 0.05).unwrap(),
            BirthDeathModel::saturated_pump(3.0, 1.0, 0.1).unwrap(),
            BirthDeathModel::linear(0.3, 1.0).unwrap(),
        ] {
            let p = stationary_distribution_auto(&m).unwrap();
            let q = p.probs();
            for n in 1..q.len() {
                let lhs = m.rates(n - 1).0 * q[n - 1];
                let rhs = m.rates(n).1 * q[n];
                if lhs > 1e-250 {
                    assert!((lhs - rhs).abs() <= 1e-10 * lhs, "{m:?} n = {n}");
                }
            }
        }
    }

    #[test]
    fn pump_and_damp_saturation_agree() {
        let sp = BirthDeathModel::saturated_pump(20.0, 1.0, 0.1).unwrap();
        let sd = BirthDeathModel::saturated_damp(20.0, 1.0, 0.1).unwrap();
        let a = stationary_distribution(&sp, 1200).unwrap();
        let b = stationary_distribution(&sd, 1200).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn no_stationary_state_at_threshold() {
        let m = BirthDeathModel::linear(1.0, 1.0).unwrap();
        assert!(matches!(stationary_distribution(&m, 100), Err(Error::NoStationaryState(_))));
        let m = BirthDeathModel::loaded(2.0, 1.0, 0.0).unwrap();
        assert!(matches!(stationary_distribution(&m, 100), Err(Error::NoStationaryState(_))));
        let m = BirthDeathModel::custom(|n| (n + 1) as f64, |n| 0.5 * n as f64);
        assert!(matches!(stationary_distribution(&m, 100), Err(Error::NoStationaryState(_))));
    }

    #[test]
    fn cutoff_too_small_detected() {
        let m = BirthDeathModel::loaded(2.0, 1.0, 0.01).unwrap();
        assert!(matches!(stationary_distribution(&m, 100), Err(Error::CutoffTooSmall { .. })));
        let p = stationary_distribution_auto(&m).unwrap();
        assert!((moments(&p).mean - 100.0).abs() < 1.0);
    }

    #[test]
    fn moments_examples() {
        let m = moments(&PhotonDistribution::delta(5, 10).unwrap());
        assert_eq!((m.mean, m.variance, m.fano), (5.0, 0.0, 0.0));

        let m = moments(&PhotonDistribution::poisson(7.5, 200).unwrap());
        assert!((m.mean - 7.5).abs() < 1e-12);
        assert!((m.variance - 7.5).abs() < 1e-10);
        assert!((m.fano - 1.0).abs() < 1e-11);

        let thermal = stationary_distribution(&BirthDeathModel::linear(0.5, 1.0).unwrap(), 120).unwrap();
        assert!((moments(&thermal).mean - 1.0).abs() < 1e-12);

        assert!(moments(&PhotonDistribution::delta(0, 3).unwrap()).fano.is_nan());
    }

    #[test]
    fn decay_from_single_photon() {
        let gd = 0.8;
        let m = BirthDeathModel::linear(0.0, gd).unwrap();
        let s = evolve_distribution(&m, &PhotonDistribution::delta(1, 6).unwrap(), 3.0, 1e-3, 100).unwrap();
        for (t, p) in s.times.iter().zip(&s.distributions) {
            assert!((p.probs()[1] - (-gd * t).exp()).abs() < 1e-12);
            assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn stationary_input_is_fixed_point() {
        let m = BirthDeathModel::saturated_pump(3.0, 1.0, 0.2).unwrap();
        let p = stationary_distribution(&m, 200).unwrap();
        let s = evolve_distribution(&m, &p, 2.0, 1e-3, 500).unwrap();
        for q in &s.distributions {
            assert!(q.max_abs_diff(&p) < 1e-13);
        }
    }

    #[test]
    fn boundary_leak_detected() {
        let m = BirthDeathModel::linear(2.0, 1.0).unwrap();
        let err = evolve_distribution(&m, &PhotonDistribution::delta(1, 10).unwrap(), 5.0, 1e-3, 10).unwrap_err();
        assert!(matches!(err, Error::BoundaryLeak { .. }));
    }

    #[test]
    fn gillespie_zero_rates_constant() {
        let m = BirthDeathModel::custom(|_| 0.0, |_| 0.0);
        let t = gillespie_sample(&m, 7, 100.0, 1);
        assert_eq!(t.states, vec![7]);
        assert_eq!(t.state_at(50.0), 7);
    }

    #[test]
    fn gillespie_reproducible() {
        let m = BirthDeathModel::loaded(2.0, 1.0, 0.1).unwrap();
        assert_eq!(gillespie_sample(&m, 3, 20.0, 99), gillespie_sample(&m, 3, 20.0, 99));
        assert_ne!(gillespie_sample(&m, 3, 20.0, 99), gillespie_sample(&m, 3, 20.0, 100));
    }

    #[test]
    fn gillespie_holding_time_is_exponential() {
        let gd = 2.5;
        let m = BirthDeathModel::linear(0.0, gd).unwrap();
        let runs = 10_000;
        let waits: Vec<f64> = (0..runs)
            .map(|i| {
                let t = gillespie_sample(&m, 1, 1e6, 1000 + i);
                assert_eq!(t.states, vec![1, 0]);
                t.times[1]
            })
            .collect();
        let mean = waits.iter().sum::<f64>() / runs as f64;
        let var = waits.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
        let se = (var / runs as f64).sqrt();
        assert!((mean - 1.0 / gd).abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn state_at_steps() {
        let t = JumpTrajectory { times: vec![0.0, 1.0, 2.5], states: vec![3, 4, 3], t_final: 5.0 };
        assert_eq!(t.state_at(0.5), 3);
        assert_eq!(t.state_at(1.0), 4);
        assert_eq!(t.state_at(4.0), 3);
    }
}
