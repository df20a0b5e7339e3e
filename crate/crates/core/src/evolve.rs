//! Time integration of `v_t = P^v_a Delta_m v` on the radial mesh.
//!
//! `imex_projected` is a Crank-Nicolson midpoint step in which the projector is evaluated at
//! the normalized midpoint and the stiff linear operator is solved implicitly; the nonlinear
//! projector is resolved by defect correction against one banded factorization. Because the
//! midpoint projector is orthogonal to `v^{n+1} + v^n`, the step conserves `|v|` nodewise and
//! dissipates (or for `a1 = 0` conserves) the discrete energy exactly up to the iteration
//! tolerance. `scalar_beta` integrates the great-circle reduction with TR-BDF2.

use std::f64::consts::PI;

use log::{debug, warn};
use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::banded::{BandLu, BandMatrix};
use crate::gauge::GaugeState;
use crate::grid::{NormKind, RadialGrid, HALF_WIDTH};
use crate::harmonic::{degree, energy, project_a, HarmonicProfile, Mu};
use crate::modulation::{bump_phi, fit_mu_scoped, normal_form_correction, psi_and_c, FitScope};
use crate::scenarios::predict_log_s;
use crate::series::{RunRecord, RunSeries};
use crate::{Error, Result, Vec3};

/// Tolerated `| |v| - 1 |` when constructing a map.
pub const UNIT_TOL: f64 = 1e-9;
/// Pre-renormalization drift beyond which a step is rejected.
pub const DRIFT_LIMIT: f64 = 0.1;
/// Stability pre-check constant: `dt <= DT_SAFETY * min(1, s0^2)`.
pub const DT_SAFETY: f64 = 0.5;

/// Radial profile of an equivariant map, optionally constrained to the `v2 = 0` great circle.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereMap {
    pub m: u32,
    pub v: Vec<Vec3>,
    /// `v = (cos beta, 0, sin beta)` when present.
    pub beta: Option<Vec<f64>>,
}

impl SphereMap {
    pub fn new(m: u32, v: Vec<Vec3>) -> Result<Self> {
        if m == 0 {
            return Err(Error::Argument("m must be >= 1".into()));
        }
        let worst = v.iter().map(|x| (x.norm() - 1.0).abs()).fold(0.0, f64::max);
        if !(worst <= UNIT_TOL) {
            return Err(Error::Argument(format!("map leaves the sphere by {worst:.3e}")));
        }
        Ok(Self { m, v, beta: None })
    }

    pub fn from_beta(m: u32, beta: Vec<f64>) -> Self {
        let v = beta.iter().map(|b| Vec3::new(b.cos(), 0.0, b.sin())).collect();
        Self { m, v, beta: Some(beta) }
    }

    pub fn harmonic(mu: Mu, grid: &RadialGrid) -> Self {
        let h = HarmonicProfile::new(mu, grid);
        if mu.alpha == 0.0 {
            let beta = h.h1.iter().zip(&h.h3).map(|(a, b)| b.atan2(*a)).collect();
            return Self { m: mu.m, v: h.map, beta: Some(beta) };
        }
        Self { m: mu.m, v: h.map, beta: None }
    }

    pub fn energy(&self, grid: &RadialGrid) -> f64 {
        energy(&self.v, self.m, grid)
    }

    pub fn degree(&self) -> f64 {
        degree(&self.v, self.m)
    }

    /// `e^{alpha R} v`; the great-circle form is dropped unless `alpha = 0`.
    pub fn rotated(&self, alpha: f64) -> Self {
        let (s, c) = alpha.sin_cos();
        let v = self.v.iter().map(|x| Vec3::new(c * x.x - s * x.y, s * x.x + c * x.y, x.z)).collect();
        let beta = if alpha == 0.0 { self.beta.clone() } else { None };
        Self { m: self.m, v, beta }
    }

    pub fn unit_defect(&self) -> f64 {
        self.v.iter().map(|x| (x.norm() - 1.0).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ImexProjected,
    ScalarBeta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtPolicy {
    Fixed(f64),
    /// `dt = clamp(ratio * t, dt0, dt_max)`; suited to runs over many decades of `t`.
    Proportional { dt0: f64, ratio: f64, dt_max: f64 },
}

impl DtPolicy {
    pub fn dt_at(&self, t: f64) -> f64 {
        match *self {
            DtPolicy::Fixed(dt) => dt,
            DtPolicy::Proportional { dt0, ratio, dt_max } => (ratio * t).clamp(dt0, dt_max),
        }
    }

    fn initial(&self) -> f64 {
        self.dt_at(0.0)
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            DtPolicy::Fixed(dt) => dt > 0.0 && dt.is_finite(),
            DtPolicy::Proportional { dt0, ratio, dt_max } => {
                dt0 > 0.0 && ratio > 0.0 && dt_max >= dt0 && dt_max.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid time-step policy {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub a: Complex64,
    pub scheme: Scheme,
    pub dt: DtPolicy,
    pub t_end: f64,
    /// Record diagnostics every this many steps (and always at `t_end`).
    pub output_every: usize,
    /// Keep the full profile every this many steps.
    pub snapshot_every: Option<usize>,
    /// Energy-excess budget: `E(v0) <= 4 pi m + delta^2` is expected.
    pub delta: f64,
    /// Fit `mu`, `q` and the normal form at each record.
    pub diagnostics: bool,
    /// Where fits check `|z|`; [`FitScope::Bump`] for data with large far-field tails.
    pub fit_scope: FitScope,
}

impl FlowConfig {
    pub fn new(a: Complex64, scheme: Scheme, dt: DtPolicy, t_end: f64) -> Result<Self> {
        let cfg = Self {
            a,
            scheme,
            dt,
            t_end,
            output_every: 1,
            snapshot_every: None,
            delta: 0.1,
            diagnostics: true,
            fit_scope: FitScope::Global,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.a.norm() == 0.0 {
            problems.push("a must be nonzero".to_string());
        }
        if self.a.re < 0.0 {
            problems.push(format!("Re a must be >= 0 (got {})", self.a.re));
        }
        if self.scheme == Scheme::ScalarBeta && self.a.im != 0.0 {
            problems.push("scalar_beta requires real a".into());
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            problems.push(format!("t_end must be positive (got {})", self.t_end));
        }
        if self.output_every == 0 {
            problems.push("output cadence must be >= 1".into());
        }
        if let Err(e) = self.dt.validate() {
            problems.push(e.to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }
}

fn pinned(i: usize, n: usize) -> bool {
    i < HALF_WIDTH || i >= n - HALF_WIDTH
}

/// `G v = v_rho rho - m^2 (v1, v2, 0)` (the Laplacian without the `e^{-2 rho}` factor) on the
/// evolved nodes; zero on pinned nodes.
fn operator_g(v: &[Vec3], m: u32, grid: &RadialGrid) -> Vec<Vec3> {
    let n = grid.n();
    let m2 = (m * m) as f64;
    let mut out = vec![Vec3::zeros(); n];
    for (i, o) in out.iter_mut().enumerate().take(n - HALF_WIDTH).skip(HALF_WIDTH) {
        let (start, w) = grid.second_deriv_stencil(i);
        let mut acc = Vec3::zeros();
        for (k, c) in w.iter().enumerate() {
            acc += v[start + k] * *c;
        }
        *o = acc - Vec3::new(v[i].x, v[i].y, 0.0) * m2;
    }
    out
}

fn projector(u: &Vec3, a: Complex64) -> Matrix3<f64> {
    let outer = u * u.transpose();
    let cross = Matrix3::new(0.0, -u.z, u.y, u.z, 0.0, -u.x, -u.y, u.x, 0.0);
    (Matrix3::identity() - outer) * a.re + cross * a.im
}

fn basis_axis(u: &Vec3) -> Vec3 {
    if u.x.abs() < 0.6 {
        Vec3::x()
    } else {
        Vec3::y()
    }
}

/// Orthonormal rows `[u, t1, t2]` with `t1, t2` spanning `u^perp`.
fn local_basis(u: &Vec3, axis: &Vec3) -> Matrix3<f64> {
    let t1 = u.cross(axis).normalize();
    let t2 = u.cross(&t1);
    Matrix3::from_rows(&[u.transpose(), t1.transpose(), t2.transpose()])
}

fn assemble_vector_system(
    mid: &[Vec3],
    axes: &[Vec3],
    m: u32,
    a: Complex64,
    dt: f64,
    grid: &RadialGrid,
) -> Result<BandLu> {
    let n = grid.n();
    let span = 3 * HALF_WIDTH + 2;
    let mut mat = BandMatrix::new(3 * n, span, span);
    let perp = Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, 0.0));
    let m2 = (m * m) as f64;
    for i in 0..n {
        if pinned(i, n) {
            for r in 0..3 {
                mat.set_identity_row(3 * i + r);
            }
            continue;
        }
        let r = grid.r()[i];
        let kappa = 0.5 * dt / (r * r);
        let q = local_basis(&mid[i], &axes[i]);
        let ap = q * projector(&mid[i], a);
        let local = q + ap * perp * (kappa * m2);
        let (start, w) = grid.second_deriv_stencil(i);
        for (k, c) in w.iter().enumerate() {
            let j = start + k;
            let mut block = ap * (-kappa * c);
            if j == i {
                block += local;
            }
            for rr in 0..3 {
                for dd in 0..3 {
                    let val = block[(rr, dd)];
                    if val != 0.0 {
                        mat.add(3 * i + rr, 3 * j + dd, val);
                    }
                }
            }
        }
    }
    mat.factor()
}

/// Iteration limits of the midpoint solve.
const VECTOR_TOL: f64 = 1e-13;
const VECTOR_MAX_ITER: usize = 40;
const VECTOR_REFACTOR_EVERY: usize = 8;

/// One step of `v_t = P^v_a Delta_m v`; nodes within [`HALF_WIDTH`] of either end stay fixed.
pub fn step_vector(v: &SphereMap, a: Complex64, dt: f64, grid: &RadialGrid) -> Result<SphereMap> {
    grid.check(&v.v)?;
    let n = grid.n();
    let m = v.m;
    let vn = &v.v;
    let g_n = operator_g(vn, m, grid);
    let mut vk = vn.clone();
    let mut lu: Option<BandLu> = None;
    let mut axes: Vec<Vec3> = Vec::new();
    let mut converged = false;
    for it in 0..VECTOR_MAX_ITER {
        let mid: Vec<Vec3> = vn.iter().zip(&vk).map(|(a, b)| (a + b).normalize()).collect();
        if it % VECTOR_REFACTOR_EVERY == 0 {
            // The tangent axis is frozen between factorizations so residual rows stay aligned.
            axes = mid.iter().map(basis_axis).collect();
            lu = Some(assemble_vector_system(&mid, &axes, m, a, dt, grid)?);
        }
        let g_k = operator_g(&vk, m, grid);
        let mut resid = vec![0.0; 3 * n];
        for i in 0..n {
            if pinned(i, n) {
                continue;
            }
            let r = grid.r()[i];
            let kappa = 0.5 * dt / (r * r);
            let f = vk[i] - vn[i] - project_a(&mid[i], &(g_k[i] + g_n[i]), a) * kappa;
            let q = local_basis(&mid[i], &axes[i]);
            let fr = q * f;
            resid[3 * i..3 * i + 3].copy_from_slice(fr.as_slice());
        }
        let delta = lu.as_ref().expect("factored").solve(&resid);
        let mut biggest = 0.0f64;
        for i in 0..n {
            let d = Vec3::new(delta[3 * i], delta[3 * i + 1], delta[3 * i + 2]);
            biggest = biggest.max(d.amax());
            vk[i] -= d;
        }
        if !biggest.is_finite() {
            return Err(Error::Step { t: f64::NAN, reason: "non-finite update".into() });
        }
        if biggest < VECTOR_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Step {
            t: f64::NAN,
            reason: format!("midpoint iteration did not converge in {VECTOR_MAX_ITER} sweeps"),
        });
    }
    let drift = vk.iter().map(|x| (x.norm() - 1.0).abs()).fold(0.0, f64::max);
    if drift > DRIFT_LIMIT {
        return Err(Error::Instability { t: f64::NAN, drift });
    }
    let v_new: Vec<Vec3> = vk.into_iter().map(|x| x.normalize()).collect();
    Ok(SphereMap { m, v: v_new, beta: None })
}

/// `a1 e^{-2 rho}(beta_rho rho + (m^2/2) sin 2 beta)` on evolved nodes.
fn beta_rhs(beta: &[f64], a1: f64, m: u32, grid: &RadialGrid) -> Vec<f64> {
    let n = grid.n();
    let m2 = (m * m) as f64;
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate().take(n - HALF_WIDTH).skip(HALF_WIDTH) {
        let (start, w) = grid.second_deriv_stencil(i);
        let lap: f64 = w.iter().enumerate().map(|(k, c)| c * beta[start + k]).sum();
        let r = grid.r()[i];
        *o = a1 * (lap + 0.5 * m2 * (2.0 * beta[i]).sin()) / (r * r);
    }
    out
}

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 25;
const NEWTON_FLOOR: f64 = 1e-9;

/// Solves `y - c F(y) = rhs` by Newton's method on the banded Jacobian.
fn implicit_beta_solve(
    y0: &[f64],
    rhs: &[f64],
    c: f64,
    a1: f64,
    m: u32,
    grid: &RadialGrid,
) -> Result<Vec<f64>> {
    let n = grid.n();
    let m2 = (m * m) as f64;
    let mut y = y0.to_vec();
    let mut prev = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITER {
        let f = beta_rhs(&y, a1, m, grid);
        let resid: Vec<f64> = (0..n)
            .map(|i| if pinned(i, n) { 0.0 } else { y[i] - c * f[i] - rhs[i] })
            .collect();
        let mut jac = BandMatrix::new(n, HALF_WIDTH, HALF_WIDTH);
        for i in 0..n {
            if pinned(i, n) {
                jac.set_identity_row(i);
                continue;
            }
            let r = grid.r()[i];
            let k = c * a1 / (r * r);
            let (start, w) = grid.second_deriv_stencil(i);
            for (j, wj) in w.iter().enumerate() {
                jac.add(i, start + j, -k * wj);
            }
            jac.add(i, i, 1.0 - k * m2 * (2.0 * y[i]).cos());
        }
        let delta = jac.factor()?.solve(&resid);
        let big = delta.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        for (yi, d) in y.iter_mut().zip(&delta) {
            *yi -= d;
        }
        if !big.is_finite() {
            break;
        }
        // at large dt the updates stall at roundoff; accept once they stop shrinking
        if big < NEWTON_TOL || (big < NEWTON_FLOOR && big > 0.5 * prev) {
            return Ok(y);
        }
        prev = big;
    }
    Err(Error::Step { t: f64::NAN, reason: "Newton iteration for beta did not converge".into() })
}

/// One TR-BDF2 step of `beta_t = a1 (beta_rr + beta_r / r + (m^2 / 2 r^2) sin 2 beta)`.
pub fn step_scalar_beta(beta: &[f64], a1: f64, m: u32, dt: f64, grid: &RadialGrid) -> Result<Vec<f64>> {
    grid.check(beta)?;
    if !(a1 > 0.0) {
        return Err(Error::Argument("scalar_beta needs a1 > 0".into()));
    }
    let gamma = 2.0 - 2f64.sqrt();
    let n = grid.n();
    let f0 = beta_rhs(beta, a1, m, grid);
    let c1 = 0.5 * gamma * dt;
    let rhs1: Vec<f64> =
        (0..n).map(|i| if pinned(i, n) { beta[i] } else { beta[i] + c1 * f0[i] }).collect();
    let stage = implicit_beta_solve(beta, &rhs1, c1, a1, m, grid)?;
    let denom = gamma * (2.0 - gamma);
    let c2 = (1.0 - gamma) / (2.0 - gamma) * dt;
    let rhs2: Vec<f64> = (0..n)
        .map(|i| {
            if pinned(i, n) {
                beta[i]
            } else {
                stage[i] / denom - (1.0 - gamma).powi(2) / denom * beta[i]
            }
        })
        .collect();
    implicit_beta_solve(&stage, &rhs2, c2, a1, m, grid)
}

/// `D = 2 pi int |P^v Delta_m v|^2 r dr` over the evolved nodes.
pub fn dissipation(v: &[Vec3], m: u32, grid: &RadialGrid) -> f64 {
    let g = operator_g(v, m, grid);
    let h = grid.step();
    let n = grid.n();
    let mut acc = 0.0;
    for i in HALF_WIDTH..n - HALF_WIDTH {
        let r = grid.r()[i];
        let p = g[i] - v[i] * v[i].dot(&g[i]);
        acc += p.norm_squared() / (r * r);
    }
    2.0 * PI * h * acc
}

fn with_time(e: Error, t: f64) -> Error {
    match e {
        Error::Step { reason, .. } => Error::Step { t, reason },
        Error::Instability { drift, .. } => Error::Instability { t, drift },
        Error::Singular { row } => Error::Step { t, reason: format!("singular band at row {row}") },
        other => other,
    }
}

/// Evolves `v0` to `cfg.t_end`, recording diagnostics.
pub fn run(v0: &SphereMap, cfg: &FlowConfig, grid: &RadialGrid) -> Result<RunSeries> {
    cfg.validate()?;
    grid.check(&v0.v)?;
    let m = v0.m;
    let planar = v0.beta.is_some();
    if cfg.scheme == Scheme::ScalarBeta && !planar {
        return Err(Error::Config("scalar_beta needs great-circle initial data".into()));
    }
    let e0 = v0.energy(grid);
    let bound = 4.0 * PI * m as f64 + cfg.delta * cfg.delta;
    if e0 > bound {
        warn!("initial energy {e0:.6} exceeds 4 pi m + delta^2 = {bound:.6}");
    }

    let phi = bump_phi(m, grid)?;
    let psi = if m >= 2 { psi_and_c(&phi, grid).ok() } else { None };
    let prediction = if m == 2 && planar && cfg.a.re > 0.0 && cfg.diagnostics {
        predict_log_s(v0, cfg.a.re, &[], grid).ok()
    } else {
        None
    };
    let mut guess = crate::modulation::crossing_seed(&v0.v, m, grid)?;
    if cfg.diagnostics {
        let s0 = fit_mu_scoped(&v0.v, guess, &phi, grid, planar, cfg.fit_scope).map(|st| st.mu.s).unwrap_or(guess.s);
        let limit = DT_SAFETY * s0.min(1.0).powi(2);
        if cfg.scheme == Scheme::ImexProjected && cfg.dt.initial() > limit {
            return Err(Error::Config(format!(
                "dt = {} exceeds the stability pre-check {limit:.3e} for s0 = {s0:.3e}",
                cfg.dt.initial()
            )));
        }
    }

    let mut series = RunSeries::new(m, cfg.a);
    let record = |t: f64, v: &SphereMap, diss: f64, guess: &mut Mu| -> RunRecord {
        let mut rec = RunRecord::blank(t, v.energy(grid), diss);
        if !cfg.diagnostics {
            return rec;
        }
        match fit_mu_scoped(&v.v, *guess, &phi, grid, planar, cfg.fit_scope) {
            Ok(mut st) => {
                *guess = st.mu;
                rec.s = st.mu.s;
                rec.alpha = st.mu.alpha;
                rec.z_sup = st.z_sup();
                rec.z_x = st.z_x(grid);
                match GaugeState::forward(&v.v, st.mu, cfg.a, grid) {
                    Ok(gs) => {
                        rec.q_norm = gs.q_norm(grid);
                        st.attach_gauge(&gs);
                        if let Some(psi) = &psi {
                            if let Ok(nf) = normal_form_correction(
                                &gs.q,
                                st.mu,
                                gs.alpha_tilde(),
                                psi,
                                grid,
                            ) {
                                rec.normal_form = nf.value;
                            }
                        }
                    }
                    Err(e) => warn!("gauge failed at t = {t}: {e}"),
                }
            }
            Err(e) => warn!("modulation fit failed at t = {t}: {e}"),
        }
        if let Some(p) = &prediction {
            rec.prediction = p.at(t);
        }
        rec
    };

    let mut v = v0.clone();
    let mut t = 0.0;
    let mut d_old = dissipation(&v.v, m, grid);
    let mut diss_int = 0.0;
    series.push(record(t, &v, diss_int, &mut guess));
    if cfg.snapshot_every.is_some() {
        series.snapshots.push((t, v.v.clone()));
    }
    let mut steps = 0usize;
    while t < cfg.t_end * (1.0 - 1e-14) {
        let dt = cfg.dt.dt_at(t).min(cfg.t_end - t);
        v = match cfg.scheme {
            Scheme::ImexProjected => step_vector(&v, cfg.a, dt, grid).map_err(|e| with_time(e, t))?,
            Scheme::ScalarBeta => {
                let beta = v.beta.as_ref().expect("planar data");
                let next = step_scalar_beta(beta, cfg.a.re, m, dt, grid).map_err(|e| with_time(e, t))?;
                SphereMap::from_beta(m, next)
            }
        };
        let d_new = dissipation(&v.v, m, grid);
        diss_int += 0.5 * (d_old + d_new) * dt;
        d_old = d_new;
        t += dt;
        steps += 1;
        let last = t >= cfg.t_end * (1.0 - 1e-14);
        if steps % cfg.output_every == 0 || last {
            debug!("t = {t:.6e}, step {steps}");
            series.push(record(t, &v, diss_int, &mut guess));
        }
        if let Some(every) = cfg.snapshot_every {
            if steps % every == 0 || last {
                series.snapshots.push((t, v.v.clone()));
            }
        }
    }
    series.final_map = Some(v);
    Ok(series)
}

/// `|E(0) - E(t) - a1 int_0^t D| / E(0)` at the last record. For `a1 = 0` this is the
/// energy-conservation defect.
pub fn energy_identity_residual(series: &RunSeries) -> f64 {
    let (first, last) = match (series.records.first(), series.records.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return 0.0,
    };
    (first.energy - last.energy - series.a.re * last.dissipation).abs() / first.energy
}

/// Largest nodewise defect `| |v| - 1 |` over a set of maps, for reports.
pub fn max_unit_defect(maps: &[SphereMap]) -> f64 {
    maps.iter().map(|m| m.unit_defect()).fold(0.0, f64::max)
}

/// `L2x` norm of the difference of two profiles.
pub fn profile_distance(a: &[Vec3], b: &[Vec3], grid: &RadialGrid) -> f64 {
    let d: Vec<Vec3> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    grid.norm(&d, NormKind::L2x).unwrap_or(f64::NAN)
}
