//! The degree-`m` harmonic maps `h[mu] = e^{alpha R} h(r/s)` and their tangent frame.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::grid::{RadialGrid, HALF_WIDTH};
use crate::{CVec3, Error, Result, Vec3};

/// Modulation parameters: `mu = m ln s + i alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mu {
    pub m: u32,
    pub s: f64,
    pub alpha: f64,
}

impl Mu {
    pub fn new(m: u32, s: f64, alpha: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Argument("equivariance degree m must be >= 1".into()));
        }
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Argument(format!("scale s must be positive (got {s})")));
        }
        if !alpha.is_finite() {
            return Err(Error::Argument("rotation angle must be finite".into()));
        }
        Ok(Self { m, s, alpha })
    }

    /// Builds from the complex coordinate `m ln s + i alpha`.
    pub fn from_complex(m: u32, mu: Complex64) -> Result<Self> {
        Self::new(m, (mu.re / m as f64).exp(), mu.im)
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.m as f64 * self.s.ln(), self.alpha)
    }

    pub fn log_s(&self) -> f64 {
        self.s.ln()
    }

    /// `|mu1 - mu2|` with the angle difference reduced mod `2 pi`.
    pub fn distance(&self, other: &Mu) -> f64 {
        let d = self.value() - other.value();
        d.re.hypot(wrap_angle(d.im))
    }

    pub fn shifted(&self, dmu: Complex64) -> Result<Self> {
        Self::from_complex(self.m, self.value() + dmu)
    }
}

/// Reduces an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// `sech(x)` without overflow.
#[inline]
pub fn sech(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// Closed-form `h1(r), h3(r)` at scale `s`.
#[inline]
pub fn h_components(m: u32, s: f64, r: f64) -> (f64, f64) {
    let u = m as f64 * (r.ln() - s.ln());
    (sech(u), u.tanh())
}

/// `h[mu]` sampled on a grid, with its frame `f[mu] = T + iN`.
#[derive(Debug, Clone)]
pub struct HarmonicProfile {
    pub mu: Mu,
    pub h1: Vec<f64>,
    pub h3: Vec<f64>,
    pub map: Vec<Vec3>,
    pub frame: Vec<CVec3>,
}

/// Frame `T + iN` at one node.
pub fn frame_at(h1: f64, h3: f64, alpha: f64) -> CVec3 {
    let (sa, ca) = alpha.sin_cos();
    CVec3::new(
        Complex64::new(h3 * ca, -sa),
        Complex64::new(h3 * sa, ca),
        Complex64::new(-h1, 0.0),
    )
}

impl HarmonicProfile {
    pub fn new(mu: Mu, grid: &RadialGrid) -> Self {
        let (sa, ca) = mu.alpha.sin_cos();
        let (h1, h3): (Vec<f64>, Vec<f64>) =
            grid.r().iter().map(|&r| h_components(mu.m, mu.s, r)).unzip();
        let map = h1.iter().zip(&h3).map(|(&a, &b)| Vec3::new(a * ca, a * sa, b)).collect();
        let frame = h1.iter().zip(&h3).map(|(&a, &b)| frame_at(a, b, mu.alpha)).collect();
        Self { mu, h1, h3, map, frame }
    }

    /// `dh[mu](dmu) = h1^s (dmu o f)`, a tangent vector field.
    pub fn dh(&self, dmu: Complex64) -> Vec<Vec3> {
        self.frame
            .iter()
            .zip(&self.h1)
            .map(|(f, &h1)| {
                let re = Vec3::new(f.x.re, f.y.re, f.z.re);
                let im = Vec3::new(f.x.im, f.y.im, f.z.im);
                (re * dmu.re + im * dmu.im) * h1
            })
            .collect()
    }

    /// `L^s g = g_r + (m/r) h3^s g`.
    pub fn apply_l(&self, g: &[Complex64], grid: &RadialGrid) -> Vec<Complex64> {
        let m = self.mu.m as f64;
        grid.deriv_r(g)
            .into_iter()
            .zip(g)
            .zip(&self.h3)
            .zip(grid.r())
            .map(|(((d, v), h3), r)| d + v * (m * h3 / r))
            .collect()
    }
}

/// Convenience wrapper for [`HarmonicProfile::new`].
pub fn h_profile(mu: Mu, grid: &RadialGrid) -> HarmonicProfile {
    HarmonicProfile::new(mu, grid)
}

/// Discrete Dirichlet energy `pi int (|v_rho|^2 + m^2 (v1^2 + v2^2)) d rho`.
///
/// The gradient part is the summation-by-parts form of the centred second-difference stencil,
/// `h^2 D^2 = d^2 - d^4/12 + d^6/90 - d^8/560`, so on the non-pinned nodes its gradient is
/// exactly the discrete Laplacian used by the steppers.
pub fn energy(v: &[Vec3], m: u32, grid: &RadialGrid) -> f64 {
    let h = grid.step();
    let m2 = (m * m) as f64;
    let mut diff: Vec<Vec3> = v.to_vec();
    let mut grad = 0.0;
    for (k, c) in [1.0, 1.0 / 12.0, 1.0 / 90.0, 1.0 / 560.0].into_iter().enumerate() {
        let len = v.len() - k - 1;
        for i in 0..len {
            diff[i] = diff[i + 1] - diff[i];
        }
        grad += c * diff[..len].iter().map(|d| d.norm_squared()).sum::<f64>();
    }
    let perp: f64 = v.iter().map(|x| x.x * x.x + x.y * x.y).sum();
    PI * (grad / h + m2 * h * perp)
}

/// `(m/2)(v3(r_max) - v3(r_min))`.
pub fn degree(v: &[Vec3], m: u32) -> f64 {
    0.5 * m as f64 * (v[v.len() - 1].z - v[0].z)
}

/// `P^v_a u = a1 (u - (u.v)v) + a2 v x u`.
#[inline]
pub fn project_a(v: &Vec3, u: &Vec3, a: Complex64) -> Vec3 {
    let tangent = u - v * v.dot(u);
    tangent * a.re + v.cross(u) * a.im
}

/// `Delta_m v = e^{-2 rho}(v_rho rho - m^2 (v1, v2, 0))` on the whole grid.
pub fn delta_m(v: &[Vec3], m: u32, grid: &RadialGrid) -> Vec<Vec3> {
    let m2 = (m * m) as f64;
    grid.second_deriv_rho(v)
        .into_iter()
        .zip(v)
        .zip(grid.r())
        .map(|((d, x), r)| (d - Vec3::new(x.x, x.y, 0.0) * m2) / (r * r))
        .collect()
}

/// Sup over the evolved (non-pinned) nodes of `|P^h_a Delta_m h|` at `h = h[mu]`.
pub fn stationarity_residual(mu: Mu, a: Complex64, grid: &RadialGrid) -> f64 {
    let h = HarmonicProfile::new(mu, grid);
    let lap = delta_m(&h.map, mu.m, grid);
    let n = grid.n();
    (HALF_WIDTH..n - HALF_WIDTH).map(|i| project_a(&h.map[i], &lap[i], a).norm()).fold(0.0, f64::max)
}
