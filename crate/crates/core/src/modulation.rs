//! Localized orthogonality, the right inverse `R_phi^s`, the profile `psi`, and the
//! parameter-velocity and normal-form diagnostics.

use std::f64::consts::{LN_2, PI};

use log::debug;
use num_complex::Complex64;

use crate::gauge::{apply_mat, l_star, GaugeState};
use crate::grid::{NormKind, RadialGrid};
use crate::harmonic::{frame_at, h_components, wrap_angle, HarmonicProfile, Mu};
use crate::{Error, Result, Vec3};

/// Unnormalized bump `exp(-1/(1 - (ln r / ln 2)^2))` on `(1/2, 2)`.
pub fn bump_shape(r: f64) -> f64 {
    let x = r.ln() / LN_2;
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

/// `phi = C bump_shape` with `<phi, h1> = 1` on the grid.
#[derive(Debug, Clone)]
pub struct BumpProfile {
    pub m: u32,
    /// Normalization constant `C`.
    pub scale: f64,
    /// `phi` at the grid nodes (unit scale).
    pub phi: Vec<f64>,
}

pub fn bump_phi(m: u32, grid: &RadialGrid) -> Result<BumpProfile> {
    if grid.r_min() > 0.25 || grid.r_max() < 4.0 {
        return Err(Error::Argument("bump needs a grid covering [1/4, 4]".into()));
    }
    let shape = grid.sample(bump_shape);
    let h1 = grid.sample(|r| h_components(m, 1.0, r).0);
    let ip = grid.inner_product(&shape, &h1)?.re;
    let scale = 1.0 / ip;
    Ok(BumpProfile { m, scale, phi: shape.into_iter().map(|x| x * scale).collect() })
}

impl BumpProfile {
    /// `phi~^s(r) = s^{-2} phi(r / s)` at the nodes.
    pub fn scaled(&self, s: f64, grid: &RadialGrid) -> Vec<f64> {
        let c = self.scale / (s * s);
        grid.sample(|r| c * bump_shape(r / s))
    }

    /// `r d/dr phi~^s`, closed form.
    pub fn scaled_r_deriv(&self, s: f64, grid: &RadialGrid) -> Vec<f64> {
        let c = self.scale / (s * s);
        grid.sample(|r| {
            let x = (r / s).ln() / LN_2;
            if x.abs() >= 1.0 {
                0.0
            } else {
                let d = 1.0 - x * x;
                c * (-1.0 / d).exp() * (-2.0 * x / (d * d)) / LN_2
            }
        })
    }

    fn check_support(&self, s: f64, grid: &RadialGrid) -> Result<()> {
        if grid.r_min() >= 0.5 * s || grid.r_max() <= 2.0 * s {
            return Err(Error::Fit(format!("bump support at scale s = {s:.3e} leaves the grid")));
        }
        Ok(())
    }
}

fn real_ip(grid: &RadialGrid, f: &[Complex64], g: &[f64]) -> Complex64 {
    let gc: Vec<Complex64> = g.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    grid.inner_product(f, &gc).expect("matching grids")
}

/// `R_phi^s g = h1^s (G - <G h1^s, phi~^s> / <h1^s, phi~^s>)` with `G = int_{r_min}^r g / h1^s`.
///
/// This is a right inverse of `L^s = d_r + (m/r) h3^s` whose range is orthogonal to `phi~^s`.
pub fn r_inverse(
    g: &[Complex64],
    phi: &BumpProfile,
    s: f64,
    grid: &RadialGrid,
) -> Result<Vec<Complex64>> {
    grid.check(g)?;
    let m = phi.m;
    let h1 = grid.sample(|r| h_components(m, s, r).0);
    let inv_max = h1.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if !(inv_max > 1e-300) {
        return Err(Error::Argument(
            "1/h1 overflows on this grid; narrow the domain for this m".into(),
        ));
    }
    let integrand: Vec<Complex64> =
        g.iter().zip(&h1).zip(grid.r()).map(|((g, h), r)| g * (r / h)).collect();
    let big_g = grid.cumulative_rho(&integrand);
    let phis = phi.scaled(s, grid);
    let weight: Vec<f64> = phis.iter().zip(&h1).map(|(p, h)| p * h).collect();
    let a = grid.integrate_rdr(&weight) * 2.0 * PI;
    let b = real_ip(grid, &big_g, &weight) / a;
    Ok(big_g.iter().zip(&h1).map(|(gv, h)| (gv - b) * *h).collect())
}

/// `psi = R_phi^* (phi - c h1)` and `c = |h1|^{-2}`.
#[derive(Debug, Clone)]
pub struct PsiProfile {
    pub m: u32,
    pub c: f64,
    pub psi: Vec<f64>,
    /// Log-radius bounds of the grid `psi` lives on, for extrapolation.
    rho_bounds: (f64, f64),
}

pub fn psi_and_c(phi: &BumpProfile, grid: &RadialGrid) -> Result<PsiProfile> {
    let m = phi.m;
    if m < 2 {
        return Err(Error::Argument("psi is only defined for m >= 2".into()));
    }
    let mf = m as f64;
    let h1 = grid.sample(|r| h_components(m, 1.0, r).0);
    let h1sq: Vec<f64> = h1.iter().map(|h| h * h).collect();
    // h1 ~ 2 r^m at 0 and 2 r^-m at infinity; tails of int h1^2 r dr beyond the mesh.
    let (r0, r1) = (grid.r_min(), grid.r_max());
    let tail_left = 4.0 * r0.powf(2.0 * mf + 2.0) / (2.0 * mf + 2.0);
    let tail_right = 4.0 * r1.powf(2.0 - 2.0 * mf) / (2.0 * mf - 2.0)
        - 8.0 * r1.powf(2.0 - 4.0 * mf) / (4.0 * mf - 2.0);
    let norm2 = 2.0 * PI * (grid.integrate_rdr(&h1sq) + tail_left + tail_right);
    let c = 1.0 / norm2;
    // integrand of int h1 (phi - c h1) r dr in rho
    let dens: Vec<f64> = (0..grid.n())
        .map(|i| h1[i] * (phi.phi[i] - c * h1[i]) * grid.r()[i] * grid.r()[i])
        .collect();
    let left = grid.cumulative_rho(&dens);
    let right = grid.cumulative_rho_from_right(&dens);
    let psi = (0..grid.n())
        .map(|i| {
            let r = grid.r()[i];
            if r >= 1.0 {
                (right[i] - c * tail_right) / (r * h1[i])
            } else {
                -(left[i] - c * tail_left) / (r * h1[i])
            }
        })
        .collect();
    Ok(PsiProfile { m, c, psi, rho_bounds: (grid.rho_min(), grid.rho_max()) })
}

impl PsiProfile {
    /// `psi(r)` at arbitrary radius: interpolated on the mesh, power-law tails outside.
    pub fn eval(&self, r: f64, grid: &RadialGrid) -> f64 {
        let rho = r.ln();
        let mf = self.m as f64;
        let n = self.psi.len();
        if rho > self.rho_bounds.1 {
            self.psi[n - 1] * (rho - self.rho_bounds.1).exp().powf(1.0 - mf)
        } else if rho < self.rho_bounds.0 {
            self.psi[0] * (rho - self.rho_bounds.0).exp().powf(mf + 1.0)
        } else {
            grid.interpolate(&self.psi, rho)
        }
    }
}

/// Output of the localized-orthogonality fit.
#[derive(Debug, Clone)]
pub struct ModulationState {
    pub mu: Mu,
    /// `z = v_breve . f[mu]`.
    pub z: Vec<Complex64>,
    /// `sqrt(1 - |z|^2) - 1`.
    pub gamma: Vec<f64>,
    /// `|F(mu)|` at exit.
    pub residual: f64,
    pub iterations: usize,
    /// Frozen phase from `M` at the innermost node, once a gauge state is attached.
    pub alpha_tilde: Option<f64>,
}

impl ModulationState {
    pub fn z_sup(&self) -> f64 {
        self.z.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn z_x(&self, grid: &RadialGrid) -> f64 {
        grid.norm(&self.z, NormKind::X).unwrap_or(f64::NAN)
    }

    pub fn attach_gauge(&mut self, gauge: &GaugeState) {
        self.alpha_tilde = Some(gauge.alpha_tilde());
    }
}

/// Newton iteration limit for [`fit_mu`].
pub const FIT_MAX_ITER: usize = 50;
pub const FIT_TOL: f64 = 1e-12;
/// Largest `|z|` for which the decomposition is accepted.
pub const Z_LIMIT: f64 = 0.3;

/// `F(mu) = <v . f[mu], phi~^s>`.
fn fit_residual(v: &[Vec3], mu: Mu, phi: &BumpProfile, grid: &RadialGrid) -> Result<Complex64> {
    phi.check_support(mu.s, grid)?;
    let phis = phi.scaled(mu.s, grid);
    let lo = grid.index_at_or_above(0.5 * mu.s);
    let hi = grid.index_at_or_above(2.0 * mu.s).min(grid.n() - 1);
    let mut acc = Complex64::new(0.0, 0.0);
    let w = grid.area_weights();
    for i in lo..=hi {
        if phis[i] == 0.0 {
            continue;
        }
        let (h1, h3) = h_components(mu.m, mu.s, grid.r()[i]);
        let f = frame_at(h1, h3, mu.alpha);
        let z = f.x * v[i].x + f.y * v[i].y + f.z * v[i].z;
        acc += z * (phis[i] * w[i]);
    }
    Ok(acc * (2.0 * PI))
}

/// Seeds `mu` from the crossing `v3(s0) = 0`, where `v(s0) = e^{alpha0 R} h(1)`.
pub fn crossing_seed(v: &[Vec3], m: u32, grid: &RadialGrid) -> Result<Mu> {
    let n = grid.n();
    let mut found = None;
    for i in (0..n - 1).rev() {
        if v[i].z <= 0.0 && v[i + 1].z > 0.0 {
            found = Some(i);
            break;
        }
    }
    let i = found.ok_or_else(|| Error::NotInSigma("v3 never changes sign".into()))?;
    let t = v[i].z / (v[i].z - v[i + 1].z);
    let rho = grid.rho()[i] + t * grid.step();
    let x = v[i].x + t * (v[i + 1].x - v[i].x);
    let y = v[i].y + t * (v[i + 1].y - v[i].y);
    Mu::new(m, rho.exp(), y.atan2(x))
}

/// Where the `|z| <= Z_LIMIT` validity check of a fit is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitScope {
    /// Every node.
    #[default]
    Global,
    /// Only the bump support `[s/2, 2s]`; for data with large far-field tails.
    Bump,
}

/// Solves `<v . f[mu], phi~^s> = 0` for `mu` near `guess`.
///
/// With `pin_alpha` (maps with `v2 = 0`) the angle is held at zero and only the scale is fit.
pub fn fit_mu(
    v: &[Vec3],
    guess: Mu,
    phi: &BumpProfile,
    grid: &RadialGrid,
    pin_alpha: bool,
) -> Result<ModulationState> {
    fit_mu_scoped(v, guess, phi, grid, pin_alpha, FitScope::Global)
}

/// [`fit_mu`] with a choice of where `|z|` is checked.
pub fn fit_mu_scoped(
    v: &[Vec3],
    guess: Mu,
    phi: &BumpProfile,
    grid: &RadialGrid,
    pin_alpha: bool,
    scope: FitScope,
) -> Result<ModulationState> {
    grid.check(v)?;
    let m = guess.m;
    let far = {
        let h = HarmonicProfile::new(guess, grid);
        let (lo, hi) = scope_range(scope, guess.s, grid);
        (lo..=hi).map(|i| (h.map[i] - v[i]).norm()).fold(0.0, f64::max)
    };
    let mut mu = if far > Z_LIMIT { crossing_seed(v, m, grid)? } else { guess };
    if pin_alpha {
        mu.alpha = 0.0;
    }
    let mut f = fit_residual(v, mu, phi, grid)?;
    let mut fd_jacobian = false;
    let mut iterations = 0;
    while f.norm() > FIT_TOL {
        if iterations >= FIT_MAX_ITER {
            return Err(Error::Fit(format!(
                "no convergence after {FIT_MAX_ITER} Newton steps (|F| = {:.3e})",
                f.norm()
            )));
        }
        iterations += 1;
        let step = if fd_jacobian {
            fd_newton_step(v, mu, f, phi, grid, pin_alpha)?
        } else {
            f
        };
        let step = if pin_alpha { Complex64::new(step.re, 0.0) } else { step };
        let next = mu.shifted(step)?;
        let fn_next = fit_residual(v, next, phi, grid)?;
        if !fd_jacobian && fn_next.norm() > 0.5 * f.norm() {
            fd_jacobian = true;
            continue;
        }
        mu = next;
        f = fn_next;
    }
    mu.alpha = wrap_angle(mu.alpha);
    let h = HarmonicProfile::new(mu, grid);
    let z: Vec<Complex64> = h
        .frame
        .iter()
        .zip(v)
        .map(|(f, v)| f.x * v.x + f.y * v.y + f.z * v.z)
        .collect();
    let (lo, hi) = scope_range(scope, mu.s, grid);
    let sup = z[lo..=hi].iter().map(|z| z.norm()).fold(0.0, f64::max);
    if sup > Z_LIMIT {
        return Err(Error::NotInSigma(format!("|z|_inf = {sup:.3} exceeds {Z_LIMIT}")));
    }
    let gamma = z.iter().map(|z| (1.0 - z.norm_sqr()).max(0.0).sqrt() - 1.0).collect();
    Ok(ModulationState { mu, z, gamma, residual: f.norm(), iterations, alpha_tilde: None })
}

fn scope_range(scope: FitScope, s: f64, grid: &RadialGrid) -> (usize, usize) {
    match scope {
        FitScope::Global => (0, grid.n() - 1),
        FitScope::Bump => {
            let lo = grid.index_at_or_above(0.5 * s).min(grid.n() - 1);
            let hi = grid.index_at_or_above(2.0 * s).min(grid.n() - 1);
            (lo, hi)
        }
    }
}

fn fd_newton_step(
    v: &[Vec3],
    mu: Mu,
    f: Complex64,
    phi: &BumpProfile,
    grid: &RadialGrid,
    pin_alpha: bool,
) -> Result<Complex64> {
    let eps = 1e-7;
    let d1 = (fit_residual(v, mu.shifted(Complex64::new(eps, 0.0))?, phi, grid)? - f) / eps;
    if pin_alpha {
        return Ok(Complex64::new(-f.re / d1.re, 0.0));
    }
    let d2 = (fit_residual(v, mu.shifted(Complex64::new(0.0, eps))?, phi, grid)? - f) / eps;
    let j = nalgebra::Matrix2::new(d1.re, d2.re, d1.im, d2.im);
    let rhs = nalgebra::Vector2::new(-f.re, -f.im);
    let sol = j
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Fit("singular finite-difference Jacobian".into()))?;
    Ok(Complex64::new(sol[0], sol[1]))
}

/// Smallest admissible determinant of the `mu`-dot system.
pub const MU_DOT_MIN_DET: f64 = 0.1;

/// `mu'` from differentiating the orthogonality condition:
/// `mu'(1 + Gamma) + (mu1'/m) Z_r + i mu2' Z_h = -<M (a L_v^* q), phi~^s>`.
pub fn mu_dot_diagnostic(
    state: &ModulationState,
    gauge: &GaugeState,
    v: &[Vec3],
    phi: &BumpProfile,
    a: Complex64,
    grid: &RadialGrid,
) -> Result<Complex64> {
    let mu = state.mu;
    let m = mu.m as f64;
    phi.check_support(mu.s, grid)?;
    let phis = (phi.scaled(mu.s, grid), phi.scaled_r_deriv(mu.s, grid));
    let ls = l_star(&gauge.q, v, mu.m, grid);
    let source: Vec<Complex64> =
        ls.iter().zip(&gauge.transition).map(|(l, mt)| -apply_mat(mt, a * l)).collect();
    let b = real_ip(grid, &source, &phis.0);
    let h = HarmonicProfile::new(mu, grid);
    let hg: Vec<Complex64> =
        h.h1.iter().zip(&state.gamma).map(|(h, g)| Complex64::new(h * g, 0.0)).collect();
    let gamma = real_ip(grid, &hg, &phis.0);
    let z_r = real_ip(grid, &state.z, &phis.1);
    let h3phi: Vec<f64> = h.h3.iter().zip(&phis.0).map(|(h, p)| h * p).collect();
    let z_h = real_ip(grid, &state.z, &h3phi);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let col1 = one + gamma + z_r / m;
    let col2 = i * (one + gamma) + i * z_h;
    let det = col1.re * col2.im - col2.re * col1.im;
    if det.abs() < MU_DOT_MIN_DET || !det.is_finite() {
        return Err(Error::Diagnostic(format!("mu-dot system nearly singular (det = {det:.3e})")));
    }
    let x1 = (b.re * col2.im - col2.re * b.im) / det;
    let x2 = (col1.re * b.im - b.re * col1.im) / det;
    Ok(Complex64::new(x1, x2))
}

/// Value of the normal-form correction, with a flag for the `m = 2` case where the
/// truncated-domain value depends on `r_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalForm {
    pub value: Complex64,
    pub truncated: bool,
}

/// `<e^{i alpha~} q, psi^s / s>` on the mesh, with `psi^s(r) = psi(r/s)`.
pub fn normal_form_correction(
    q: &[Complex64],
    mu: Mu,
    alpha_tilde: f64,
    psi: &PsiProfile,
    grid: &RadialGrid,
) -> Result<NormalForm> {
    grid.check(q)?;
    let p: Vec<Complex64> =
        grid.sample(|r| Complex64::new(psi.eval(r / mu.s, grid) / mu.s, 0.0));
    let value = Complex64::from_polar(1.0, alpha_tilde) * grid.inner_product(q, &p)?;
    let truncated = psi.m == 2;
    if truncated {
        debug!("normal-form correction at m = 2 depends on the domain truncation");
    }
    Ok(NormalForm { value, truncated })
}
