//! Initial data for the `m = 2` scale dynamics, the explicit prediction of `log s(t)` from the
//! initial far field, and a coarse classifier of `log s` trajectories.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::evolve::SphereMap;
use crate::gauge::{circ_frame, GaugeState};
use crate::grid::RadialGrid;
use crate::harmonic::{HarmonicProfile, Mu};
use crate::modulation::{bump_phi, crossing_seed, fit_mu_scoped, FitScope};
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailKind {
    None,
    /// `P(u) = kappa u`: `v1 ~ kappa / ln r`, a steady drift of `log s` in `ln ln t`.
    LogDrift,
    /// `P(u) = kappa sin(lambda u)`.
    LnLnOscillation,
    /// `P(u) = kappa (u + sin(lambda u))`.
    Mixed,
}

impl TailKind {
    pub fn name(&self) -> &'static str {
        match self {
            TailKind::None => "none",
            TailKind::LogDrift => "log_drift",
            TailKind::LnLnOscillation => "ln_ln_oscillation",
            TailKind::Mixed => "mixed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(TailKind::None),
            "log_drift" => Ok(TailKind::LogDrift),
            "ln_ln_oscillation" => Ok(TailKind::LnLnOscillation),
            "mixed" => Ok(TailKind::Mixed),
            other => Err(Error::Config(format!("unknown tail family {other:?}"))),
        }
    }
}

/// Far-field angle perturbation `beta = beta_h(r / s0) + p(r)` with
/// `p(r) = -sign chi(r) P'(ln ln r) / ln r`, switched on smoothly over `[r1, 2 r1]`.
///
/// With this sign, `v1 ~ sign P'(ln ln r) / ln r` at large `r` and the predicted
/// `[log s]` follows `sign (2 / pi) P(ln ln sqrt(a1 t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFamily {
    pub kind: TailKind,
    pub kappa: f64,
    pub lambda: f64,
    pub r1: f64,
    pub sign: f64,
    pub s0: f64,
}

impl TailFamily {
    pub fn new(kind: TailKind, kappa: f64) -> Self {
        Self { kind, kappa, lambda: 1.0, r1: std::f64::consts::E, sign: 1.0, s0: 1.0 }
    }

    /// `P(u)`.
    pub fn big_p(&self, u: f64) -> f64 {
        let k = self.kappa;
        match self.kind {
            TailKind::None => 0.0,
            TailKind::LogDrift => k * u,
            TailKind::LnLnOscillation => k * (self.lambda * u).sin(),
            TailKind::Mixed => k * (u + (self.lambda * u).sin()),
        }
    }

    /// `P'(u)`.
    pub fn p_prime(&self, u: f64) -> f64 {
        let k = self.kappa;
        let l = self.lambda;
        match self.kind {
            TailKind::None => 0.0,
            TailKind::LogDrift => k,
            TailKind::LnLnOscillation => k * l * (l * u).cos(),
            TailKind::Mixed => k * (1.0 + l * (l * u).cos()),
        }
    }

    /// The angle perturbation `p(r)`.
    pub fn tail(&self, r: f64) -> f64 {
        if self.kind == TailKind::None || r <= self.r1 {
            return 0.0;
        }
        let chi = smooth_step((r / self.r1).ln() / 2f64.ln());
        let lr = r.ln();
        -self.sign * chi * self.p_prime(lr.ln()) / lr
    }
}

/// `C^infinity` step from 0 at `x <= 0` to 1 at `x >= 1`.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let f = |y: f64| if y > 0.0 { (-1.0 / y).exp() } else { 0.0 };
    f(x) / (f(x) + f(1.0 - x))
}

/// Builds `v = (cos beta, 0, sin beta)` and returns it with its energy excess `E - 4 pi m`.
pub fn build_initial_data(
    fam: &TailFamily,
    m: u32,
    delta: f64,
    grid: &RadialGrid,
) -> Result<(SphereMap, f64)> {
    if !(fam.s0 > 0.0) || !(fam.r1 >= std::f64::consts::E) || fam.sign.abs() != 1.0 {
        return Err(Error::Builder(format!(
            "need s0 > 0, r1 >= e and sign = +-1 (got s0 = {}, r1 = {}, sign = {})",
            fam.s0, fam.r1, fam.sign
        )));
    }
    let need = fam.r1 * std::f64::consts::E.powf(std::f64::consts::E.powi(2));
    if fam.kind != TailKind::None && grid.r_max() < need {
        return Err(Error::Builder(format!(
            "grid ends at r = {:.3e}; the ln ln tail needs r_max >= {need:.3e}",
            grid.r_max()
        )));
    }
    let mu = Mu::new(m, fam.s0, 0.0)?;
    let h = HarmonicProfile::new(mu, grid);
    let beta: Vec<f64> = (0..grid.n())
        .map(|i| h.h3[i].atan2(h.h1[i]) + fam.tail(grid.r()[i]))
        .collect();
    let v = SphereMap::from_beta(m, beta);
    let excess = v.energy(grid) - 4.0 * PI * m as f64;
    if excess > delta * delta {
        return Err(Error::Builder(format!(
            "energy excess {excess:.4e} exceeds delta^2 = {:.4e}; reduce kappa",
            delta * delta
        )));
    }
    Ok((v, excess))
}

/// Widths (in units of `s`) of the perturbation envelopes.
pub const PERTURBATION_WIDTHS: [f64; 3] = [1.0, 1.5, 2.0];

/// `h[mu]` plus a seeded smooth tangent bump, scaled so that `||q||_{L2} = delta`.
///
/// With `planar`, `mu` must have `alpha = 0` and the perturbation stays in the `v2 = 0` plane.
pub fn perturbed_harmonic(
    mu: Mu,
    delta: f64,
    seed: u64,
    planar: bool,
    grid: &RadialGrid,
) -> Result<SphereMap> {
    if planar && mu.alpha != 0.0 {
        return Err(Error::Argument("planar perturbation needs alpha = 0".into()));
    }
    if !(delta > 0.0) {
        return Ok(SphereMap::harmonic(mu, grid));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<Complex64> = PERTURBATION_WIDTHS
        .iter()
        .map(|_| {
            let re = rng.gen_range(-1.0..1.0);
            let im = if planar { 0.0 } else { rng.gen_range(-1.0..1.0) };
            Complex64::new(re, im)
        })
        .collect();
    let h = HarmonicProfile::new(mu, grid);
    // Gaussian envelopes in r keep the spectrum narrow, so dispersed waves stay resolved on
    // the log mesh; the x^m factor gives z the O(r^m) behaviour of a smooth equivariant map.
    let shape: Vec<Complex64> = grid
        .r()
        .iter()
        .map(|r| {
            let x = r / mu.s;
            coeffs
                .iter()
                .zip(PERTURBATION_WIDTHS)
                .map(|(c, w)| c * (x / w).powi(mu.m as i32) * (-0.5 * (x / w).powi(2)).exp())
                .sum()
        })
        .collect();
    let build = |eps: f64| -> Vec<Vec3> {
        h.map
            .iter()
            .zip(&h.frame)
            .zip(&shape)
            .map(|((hv, f), z)| (hv + circ_frame(z * eps, f)).normalize())
            .collect()
    };
    let q_of = |eps: f64| -> Result<f64> {
        let v = build(eps);
        Ok(GaugeState::forward(&v, mu, Complex64::new(1.0, 0.0), grid)?.q_norm(grid))
    };
    // ||q|| is close to linear in eps; a few secant steps pin it.
    let mut e0 = 0.0;
    let mut f0 = -delta;
    let mut e1 = 0.01;
    let mut f1 = q_of(e1)? - delta;
    for _ in 0..30 {
        if (f1).abs() < 1e-12 * delta {
            break;
        }
        let e2 = e1 - f1 * (e1 - e0) / (f1 - f0);
        e0 = e1;
        f0 = f1;
        e1 = e2;
        f1 = q_of(e1)? - delta;
    }
    if (f1).abs() > 1e-6 * delta {
        return Err(Error::Builder(format!("could not scale perturbation to ||q|| = {delta}")));
    }
    let v = build(e1);
    if planar {
        let beta = v.iter().map(|x| x.z.atan2(x.x)).collect();
        return Ok(SphereMap::from_beta(mu.m, beta));
    }
    SphereMap::new(mu.m, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionForm {
    /// `(2 / pi) int v1(0, r) / r dr`.
    V1,
    /// `(1 / pi) int q(0, r) dr`.
    Q,
}

/// Predicted `[log s]_0^t` from the initial data, integrated from `s(0)` to `sqrt(a1 t)`.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub a1: f64,
    pub s0: f64,
    /// Largest `t` with `sqrt(a1 t)` inside the mesh.
    pub max_t: f64,
    pub source: PredictionForm,
    pub t: Vec<f64>,
    pub v1_form: Vec<f64>,
    pub q_form: Vec<f64>,
    cum_v1: Vec<f64>,
    cum_q: Vec<f64>,
    grid: RadialGrid,
}

impl Prediction {
    fn eval(&self, cum: &[f64], t: f64) -> Option<f64> {
        if !(t > 0.0) || t > self.max_t {
            return None;
        }
        let hi = 0.5 * (self.a1 * t).ln();
        let lo = self.s0.ln();
        Some(self.grid.interpolate(cum, hi) - self.grid.interpolate(cum, lo))
    }

    /// Value of the primary form at `t`; `None` beyond `max_t` or at `t <= 0`.
    pub fn at(&self, t: f64) -> Option<f64> {
        match self.source {
            PredictionForm::V1 => self.eval(&self.cum_v1, t),
            PredictionForm::Q => self.eval(&self.cum_q, t),
        }
    }

    pub fn v1_at(&self, t: f64) -> Option<f64> {
        self.eval(&self.cum_v1, t)
    }

    pub fn q_at(&self, t: f64) -> Option<f64> {
        self.eval(&self.cum_q, t)
    }
}

/// Evaluates both forms of the prediction on `t_grid`.
pub fn predict_log_s(
    v0: &SphereMap,
    a1: f64,
    t_grid: &[f64],
    grid: &RadialGrid,
) -> Result<Prediction> {
    grid.check(&v0.v)?;
    if v0.m != 2 {
        return Err(Error::Argument(format!("the prediction needs m = 2 (got {})", v0.m)));
    }
    if !(a1 > 0.0) {
        return Err(Error::Argument("the prediction needs a1 > 0".into()));
    }
    let planar_defect = v0.v.iter().map(|x| x.y.abs()).fold(0.0, f64::max);
    if planar_defect > 1e-12 {
        return Err(Error::Argument(format!("v2 must vanish (max |v2| = {planar_defect:.3e})")));
    }
    let max_t = grid.r_max().powi(2) / a1;
    if let Some(bad) = t_grid.iter().find(|t| **t > max_t) {
        log::debug!("t = {bad} is beyond the mesh");
        return Err(Error::Truncation { max_t });
    }
    let phi = bump_phi(2, grid)?;
    let seed = crossing_seed(&v0.v, 2, grid)?;
    let s0 = fit_mu_scoped(&v0.v, seed, &phi, grid, true, FitScope::Bump)?.mu.s;

    let v1: Vec<f64> = v0.v.iter().map(|x| x.x).collect();
    let v3: Vec<f64> = v0.v.iter().map(|x| x.z).collect();
    let d1 = grid.deriv_rho(&v1);
    let d3 = grid.deriv_rho(&v3);
    // q r = -beta_rho + 2 v1 with beta_rho = v1 v3_rho - v3 v1_rho.
    let qr: Vec<f64> =
        (0..grid.n()).map(|i| -(v1[i] * d3[i] - v3[i] * d1[i]) + 2.0 * v1[i]).collect();
    let cum_v1: Vec<f64> = grid.cumulative_rho(&v1).iter().map(|c| 2.0 * c / PI).collect();
    let cum_q: Vec<f64> = grid.cumulative_rho(&qr).iter().map(|c| c / PI).collect();
    let mut p = Prediction {
        a1,
        s0,
        max_t,
        source: PredictionForm::V1,
        t: t_grid.to_vec(),
        v1_form: Vec::new(),
        q_form: Vec::new(),
        cum_v1,
        cum_q,
        grid: grid.clone(),
    };
    p.v1_form = t_grid.iter().map(|t| p.v1_at(*t).unwrap_or(f64::NAN)).collect();
    p.q_form = t_grid.iter().map(|t| p.q_at(*t).unwrap_or(f64::NAN)).collect();
    Ok(p)
}

/// Long-time behaviour of `s(t)`, numbered as in the `m = 2` classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BehaviorClass {
    /// (1) `s` converges.
    Converging,
    /// (2) `s -> 0`.
    Concentrating,
    /// (3) `s -> infinity`.
    Expanding,
    /// (4) `liminf s = 0`, `limsup s` finite.
    OscillatingDown,
    /// (5) `liminf s > 0`, `limsup s = infinity`.
    OscillatingUp,
    /// (6) both envelopes unbounded.
    OscillatingBoth,
    Undetermined,
}

impl BehaviorClass {
    pub fn number(&self) -> Option<u8> {
        match self {
            BehaviorClass::Converging => Some(1),
            BehaviorClass::Concentrating => Some(2),
            BehaviorClass::Expanding => Some(3),
            BehaviorClass::OscillatingDown => Some(4),
            BehaviorClass::OscillatingUp => Some(5),
            BehaviorClass::OscillatingBoth => Some(6),
            BehaviorClass::Undetermined => None,
        }
    }
}

/// Thresholds of [`classify_behavior`].
pub const CONVERGED_DRIFT: f64 = 0.2;
pub const MONOTONE_DRIFT: f64 = 1.0;
pub const OSCILLATION_AMPLITUDE: f64 = 0.5;
pub const ENVELOPE_GROWTH: f64 = 0.25;
const WINDOWS: usize = 8;
const MONOTONE_SLACK: f64 = 0.05;

/// Classifies `log s` against `ln t`, using windows uniform in `ln ln t`.
///
/// Points with `t <= 1` are ignored. Fewer than three decades of `t` gives `Undetermined`.
pub fn classify_behavior(log_t: &[f64], log_s: &[f64]) -> BehaviorClass {
    let pts: Vec<(f64, f64)> = log_t
        .iter()
        .zip(log_s)
        .filter(|(lt, ls)| **lt > 0.0 && lt.is_finite() && ls.is_finite())
        .map(|(lt, ls)| (lt.ln(), *ls))
        .collect();
    if pts.len() < WINDOWS {
        return BehaviorClass::Undetermined;
    }
    let span = pts.last().unwrap().0.exp() - pts[0].0.exp();
    if span < 3.0 * 10f64.ln() {
        return BehaviorClass::Undetermined;
    }
    let base = pts[0].1;
    let d: Vec<f64> = pts.iter().map(|p| p.1 - base).collect();
    if d.iter().all(|x| x.abs() < CONVERGED_DRIFT) {
        return BehaviorClass::Converging;
    }
    let (x0, x1) = (pts[0].0, pts.last().unwrap().0);
    let width = (x1 - x0) / WINDOWS as f64;
    let mut stats: Vec<(f64, f64, f64)> = Vec::new(); // (mean, min, max)
    for w in 0..WINDOWS {
        let lo = x0 + w as f64 * width;
        let hi = if w + 1 == WINDOWS { f64::INFINITY } else { lo + width };
        let vals: Vec<f64> =
            pts.iter().zip(&d).filter(|(p, _)| p.0 >= lo && p.0 < hi).map(|(_, v)| *v).collect();
        if vals.is_empty() {
            continue;
        }
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        stats.push((mean, min, max));
    }
    if stats.len() < 4 {
        return BehaviorClass::Undetermined;
    }
    let means: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let rising = means.windows(2).all(|w| w[1] >= w[0] - MONOTONE_SLACK);
    let falling = means.windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK);
    let last = *d.last().unwrap();
    if falling && last <= -MONOTONE_DRIFT {
        return BehaviorClass::Concentrating;
    }
    if rising && last >= MONOTONE_DRIFT {
        return BehaviorClass::Expanding;
    }
    if rising || falling {
        return BehaviorClass::Undetermined;
    }
    let amp = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - d.iter().cloned().fold(f64::INFINITY, f64::min);
    if amp <= OSCILLATION_AMPLITUDE {
        return BehaviorClass::Undetermined;
    }
    let half = stats.len() / 2;
    let max_of = |s: &[(f64, f64, f64)]| s.iter().map(|x| x.2).fold(f64::NEG_INFINITY, f64::max);
    let min_of = |s: &[(f64, f64, f64)]| s.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let up = max_of(&stats[half..]) - max_of(&stats[..half]);
    let down = min_of(&stats[..half]) - min_of(&stats[half..]);
    match (up > ENVELOPE_GROWTH, down > ENVELOPE_GROWTH) {
        (true, true) => BehaviorClass::OscillatingBoth,
        (false, true) => BehaviorClass::OscillatingDown,
        (true, false) => BehaviorClass::OscillatingUp,
        (false, false) => BehaviorClass::Undetermined,
    }
}
