//! Parallel frame along `r`, the gauge field `q`, and the inverse map `(mu, q) -> v`.

use num_complex::Complex64;

use crate::field::circ;
use crate::grid::{NormKind, RadialGrid};
use crate::harmonic::{HarmonicProfile, Mu};
use crate::modulation::{r_inverse, BumpProfile};
use crate::{CVec3, Error, Result, Vec3};

/// Nodes between Gram-Schmidt passes of the frame integration.
pub const REORTHO_EVERY: usize = 16;
/// Frame drift tolerated between passes before the gauge is declared degenerate.
pub const FRAME_DRIFT_LIMIT: f64 = 1e-3;

/// `M` at one node as a real 2x2 matrix acting on `(Re z, Im z)`.
pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone)]
pub struct GaugeState {
    pub m: u32,
    /// Parallel frame, `D_r e = 0`, `e(r_max) = (1, i, 0)` up to the pole offset.
    pub e: Vec<CVec3>,
    /// `w = P^v v_r - (m/r) P^v k`; the projection removes the discretization's normal part.
    pub w: Vec<Vec3>,
    /// `w = q o e`.
    pub q: Vec<Complex64>,
    /// `P^v k = nu o e`.
    pub nu: Vec<Complex64>,
    /// Phase integral, anchored at `S(r_max) = 0`.
    pub s_phase: Vec<f64>,
    /// `|q|^2/2 + (m/r) w3`.
    pub big_q: Vec<f64>,
    /// `M = f (x) e`.
    pub transition: Vec<Mat2>,
}

fn re(v: &CVec3) -> Vec3 {
    Vec3::new(v.x.re, v.y.re, v.z.re)
}
fn im(v: &CVec3) -> Vec3 {
    Vec3::new(v.x.im, v.y.im, v.z.im)
}
fn complexify(a: Vec3, b: Vec3) -> CVec3 {
    CVec3::new(Complex64::new(a.x, b.x), Complex64::new(a.y, b.y), Complex64::new(a.z, b.z))
}

/// `u . e` without conjugation, for real `u`.
#[inline]
pub fn rdot(u: &Vec3, e: &CVec3) -> Complex64 {
    e.x * u.x + e.y * u.y + e.z * u.z
}

/// `z o e = Re z Re e + Im z Im e`.
#[inline]
pub fn circ_frame(z: Complex64, e: &CVec3) -> Vec3 {
    re(e) * z.re + im(e) * z.im
}

/// The frame `e^{i phi}(T + iN)` of the geodesic from `k` to `v`; equals `(1, i, 0)` at `k`.
pub fn pole_frame(v: &Vec3) -> CVec3 {
    let h1 = v.x.hypot(v.y);
    let h3 = v.z;
    let phi = v.y.atan2(v.x);
    let (sp, cp) = phi.sin_cos();
    let t = Vec3::new(h3 * cp, h3 * sp, -h1);
    let n = Vec3::new(-sp, cp, 0.0);
    complexify(t, n) * Complex64::from_polar(1.0, phi)
}

/// Projects `Re e` onto `v^perp`, normalizes it and rebuilds `Im e = v x Re e`.
/// Returns the repaired frame and the drift that was removed.
fn reorthonormalize(v: &Vec3, e: &CVec3) -> (CVec3, f64) {
    let a = re(e);
    let b = im(e);
    let drift = (a.norm() - 1.0)
        .abs()
        .max((b.norm() - 1.0).abs())
        .max(a.dot(&b).abs())
        .max(a.dot(v).abs())
        .max((v.cross(&a) - b).norm());
    let p = a - v * v.dot(&a);
    let p = p / p.norm();
    (complexify(p, v.cross(&p)), drift)
}

/// Integrates `e_rho = -v (v_rho . e)` inward from `r_max` with classical RK4.
pub fn parallel_frame(v: &[Vec3], grid: &RadialGrid) -> Result<Vec<CVec3>> {
    grid.check(v)?;
    let n = grid.n();
    let h = grid.step();
    let vr = grid.deriv_rho(v);
    let vm = grid.midpoints(v);
    let vrm = grid.midpoints(&vr);
    let rhs = |u: &Vec3, ur: &Vec3, e: &CVec3| -> CVec3 {
        let c = rdot(ur, e);
        CVec3::new(c * -u.x, c * -u.y, c * -u.z)
    };
    let mut e = vec![CVec3::zeros(); n];
    e[n - 1] = pole_frame(&v[n - 1]);
    let mut since = 0;
    for i in (0..n - 1).rev() {
        // Step of -h from rho_{i+1} to rho_i.
        let y = e[i + 1];
        let k1 = rhs(&v[i + 1], &vr[i + 1], &y);
        let k2 = rhs(&vm[i], &vrm[i], &(y - k1 * Complex64::new(0.5 * h, 0.0)));
        let k3 = rhs(&vm[i], &vrm[i], &(y - k2 * Complex64::new(0.5 * h, 0.0)));
        let k4 = rhs(&v[i], &vr[i], &(y - k3 * Complex64::new(h, 0.0)));
        let incr = (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4)
            * Complex64::new(h / 6.0, 0.0);
        e[i] = y - incr;
        since += 1;
        if since == REORTHO_EVERY || i == 0 {
            since = 0;
            let (fixed, drift) = reorthonormalize(&v[i], &e[i]);
            if drift > FRAME_DRIFT_LIMIT || !drift.is_finite() {
                return Err(Error::Gauge { node: i, drift });
            }
            e[i] = fixed;
        }
    }
    // The integration carries the unrepaired state between passes; the returned frame is
    // projected back to an orthonormal pair at every node.
    for (ei, vi) in e.iter_mut().zip(v) {
        *ei = reorthonormalize(vi, ei).0;
    }
    Ok(e)
}

/// `M` with entries `[[T.Re e, T.Im e], [N.Re e, N.Im e]]` where `f = T + iN`.
pub fn transition_matrix(f: &CVec3, e: &CVec3) -> Mat2 {
    let (t, nn) = (re(f), im(f));
    let (a, b) = (re(e), im(e));
    [[t.dot(&a), t.dot(&b)], [nn.dot(&a), nn.dot(&b)]]
}

#[inline]
pub fn apply_mat(m: &Mat2, z: Complex64) -> Complex64 {
    Complex64::new(m[0][0] * z.re + m[0][1] * z.im, m[1][0] * z.re + m[1][1] * z.im)
}

/// `L_v^* q = -q_r - q/r + m v3 q / r`.
pub fn l_star(q: &[Complex64], v: &[Vec3], m: u32, grid: &RadialGrid) -> Vec<Complex64> {
    let mf = m as f64;
    grid.deriv_r(q)
        .into_iter()
        .zip(q)
        .zip(v)
        .zip(grid.r())
        .map(|(((qr, q), v), r)| -qr + q * ((mf * v.z - 1.0) / r))
        .collect()
}

impl GaugeState {
    /// Gauge transform of `v`. The frame matrix `M` is taken against `f[mu]`; `a` selects
    /// how the phase integral is evaluated.
    pub fn forward(v: &[Vec3], mu: Mu, a: Complex64, grid: &RadialGrid) -> Result<Self> {
        let e = parallel_frame(v, grid)?;
        let h = HarmonicProfile::new(mu, grid);
        Ok(Self::from_frame(v, e, &h, a, grid))
    }

    pub fn from_frame(
        v: &[Vec3],
        e: Vec<CVec3>,
        h: &HarmonicProfile,
        a: Complex64,
        grid: &RadialGrid,
    ) -> Self {
        let m = h.mu.m;
        let mf = m as f64;
        let vr = grid.deriv_r(v);
        let w: Vec<Vec3> = vr
            .iter()
            .zip(v)
            .zip(grid.r())
            .map(|((d, u), r)| (d - u * u.dot(d)) - (Vec3::z() - u * u.z) * (mf / r))
            .collect();
        let q: Vec<Complex64> = w.iter().zip(&e).map(|(w, e)| rdot(w, e)).collect();
        let nu: Vec<Complex64> = e.iter().map(|e| e.z).collect();
        let big_q: Vec<f64> = q
            .iter()
            .zip(&w)
            .zip(grid.r())
            .map(|((q, w), r)| 0.5 * q.norm_sqr() + mf * w.z / r)
            .collect();
        let transition = h.frame.iter().zip(&e).map(|(f, e)| transition_matrix(f, e)).collect();
        let mut state =
            Self { m, e, w, q, nu, s_phase: vec![0.0; v.len()], big_q, transition };
        state.s_phase = if a == Complex64::new(0.0, 1.0) {
            state.phase_closed_form(grid)
        } else {
            state.phase_quadrature(v, a, grid)
        };
        state
    }

    /// `S = -int_r^inf (q + m nu / r) o (i a L^* q) dr`.
    pub fn phase_quadrature(&self, v: &[Vec3], a: Complex64, grid: &RadialGrid) -> Vec<f64> {
        let mf = self.m as f64;
        let ls = l_star(&self.q, v, self.m, grid);
        let ia = Complex64::new(0.0, 1.0) * a;
        // integrand in rho: (...) dr = (...) r d rho
        let g: Vec<f64> = (0..grid.n())
            .map(|i| {
                let r = grid.r()[i];
                circ(self.q[i] + self.nu[i] * (mf / r), ia * ls[i]) * r
            })
            .collect();
        grid.cumulative_rho_from_right(&g).into_iter().map(|x| -x).collect()
    }

    /// `S = Q - int_r^inf 2 Q d rho`, valid when `a = i`.
    pub fn phase_closed_form(&self, grid: &RadialGrid) -> Vec<f64> {
        let twice: Vec<f64> = self.big_q.iter().map(|x| 2.0 * x).collect();
        grid.cumulative_rho_from_right(&twice)
            .into_iter()
            .zip(&self.big_q)
            .map(|(c, q)| q - c)
            .collect()
    }

    /// `atan2` of the rotation part of `M` at the innermost node.
    pub fn alpha_tilde(&self) -> f64 {
        let m = self.transition[0];
        m[1][0].atan2(m[0][0])
    }

    /// Operator norm of `M` at node `i`.
    pub fn transition_norm(&self, i: usize) -> f64 {
        let m = nalgebra::Matrix2::new(
            self.transition[i][0][0],
            self.transition[i][0][1],
            self.transition[i][1][0],
            self.transition[i][1][1],
        );
        m.singular_values().max()
    }

    pub fn q_norm(&self, grid: &RadialGrid) -> f64 {
        grid.norm(&self.q, NormKind::L2x).unwrap_or(f64::NAN)
    }
}

/// Right-hand side `i S q - a L_v L_v^* q` of the gauge-field equation.
pub fn qeq_rhs(state: &GaugeState, v: &[Vec3], a: Complex64, grid: &RadialGrid) -> Vec<Complex64> {
    let mf = state.m as f64;
    let qrr = grid.second_deriv_rho(&state.q);
    (0..grid.n())
        .map(|i| {
            let r = grid.r()[i];
            let pot = ((mf - 1.0).powi(2) + 2.0 * mf * (1.0 - v[i].z)) / (r * r)
                + mf * state.w[i].z / r;
            let llq = -qrr[i] / (r * r) + state.q[i] * pot;
            Complex64::new(0.0, state.s_phase[i]) * state.q[i] - a * llq
        })
        .collect()
}

/// Fixed-point controls for [`reconstruct_v`].
pub const RECON_TOL: f64 = 1e-10;
pub const RECON_MAX_ITER: usize = 400;
pub const RECON_DAMP_ABOVE: f64 = 0.1;
pub const RECON_LIMIT: f64 = 0.3;

/// Rebuilds `v = (1 + gamma) h[mu] + z o f[mu]` from `(mu, q)`.
///
/// `z` solves `z = R_phi^s [M q - (m/r) v3_breve z + (m/r) h1 gamma]`, where the frame and
/// hence `M` depend on `v` itself.
pub fn reconstruct_v(
    mu: Mu,
    q: &[Complex64],
    phi: &BumpProfile,
    a: Complex64,
    grid: &RadialGrid,
) -> Result<(Vec<Vec3>, GaugeState)> {
    grid.check(q)?;
    let n = grid.n();
    let mf = mu.m as f64;
    let h = HarmonicProfile::new(mu, grid);
    let build = |z: &[Complex64]| -> (Vec<Vec3>, Vec<f64>) {
        let mut v = Vec::with_capacity(n);
        let mut gam = Vec::with_capacity(n);
        for i in 0..n {
            let g = (1.0 - z[i].norm_sqr()).max(0.0).sqrt() - 1.0;
            v.push(h.map[i] * (1.0 + g) + circ_frame(z[i], &h.frame[i]));
            gam.push(g);
        }
        (v, gam)
    };
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    for _ in 0..RECON_MAX_ITER {
        let (v, gam) = build(&z);
        let e = parallel_frame(&v, grid)?;
        let mut rhs = Vec::with_capacity(n);
        for i in 0..n {
            let r = grid.r()[i];
            let mq = apply_mat(&transition_matrix(&h.frame[i], &e[i]), q[i]);
            let breve3 = gam[i] * h.h3[i] - h.h1[i] * z[i].re;
            rhs.push(mq - z[i] * (mf * breve3 / r) + Complex64::new(mf * h.h1[i] * gam[i] / r, 0.0));
        }
        let mut next = r_inverse(&rhs, phi, mu.s, grid)?;
        let sup = next.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if !sup.is_finite() || sup > RECON_LIMIT {
            return Err(Error::Reconstruction(format!(
                "|z|_inf reached {sup:.3e} (> {RECON_LIMIT}); the gauge field is too large"
            )));
        }
        if sup > RECON_DAMP_ABOVE {
            for (nx, old) in next.iter_mut().zip(&z) {
                *nx = (*nx + *old) * 0.5;
            }
        }
        let diff: Vec<Complex64> = next.iter().zip(&z).map(|(a, b)| a - b).collect();
        let change = grid.norm(&diff, NormKind::X)?;
        z = next;
        if change < RECON_TOL {
            let (v, _) = build(&z);
            let e = parallel_frame(&v, grid)?;
            let state = GaugeState::from_frame(&v, e, &h, a, grid);
            return Ok((v, state));
        }
    }
    Err(Error::Reconstruction(format!("no convergence in {RECON_MAX_ITER} iterations")))
}
