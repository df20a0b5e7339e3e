//! Logarithmic radial mesh.
//!
//! Nodes are uniform in `rho = ln r`. Integrals over the plane of radial functions become
//! `int f r dr = int f e^{2 rho} d rho`, which decays at both ends for finite-energy data,
//! so the uniform-in-rho trapezoid rule is spectrally accurate in the interior. Gregory end
//! corrections handle integrands that do not decay (constants against `r dr`).

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;

use crate::field::FieldValue;
use crate::stencil::{derivative_weights, interval_weights};
use crate::{Error, Result};

/// Gregory end-correction coefficients `gamma_k`, `k = 1..`.
const GREGORY: [f64; 6] = [
    1.0 / 12.0,
    1.0 / 24.0,
    19.0 / 720.0,
    3.0 / 160.0,
    863.0 / 60480.0,
    275.0 / 24192.0,
];

/// Half-width of the centred difference stencils. The vector and scalar steppers pin this
/// many nodes at each end.
pub const HALF_WIDTH: usize = 4;

/// Smallest admissible node count.
pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    /// `(2 pi int |f|^2 r dr)^{1/2}`.
    L2x,
    /// `||f / r||_{L2x} + ||f_r||_{L2x}`.
    X,
    /// Dyadic `L^p(r dr)` blocks on `[2^j, 2^{j+1})` combined in `l^q`.
    Lpq { p: f64, q: f64 },
    /// Nodal supremum.
    LInf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    rho_min: f64,
    rho_max: f64,
    step: f64,
    rho: Vec<f64>,
    r: Vec<f64>,
    /// Weights for `int g d rho`.
    rho_weights: Vec<f64>,
    /// Weights for `int f r dr`.
    area_weights: Vec<f64>,
    d1: Vec<Stencil>,
    d2: Vec<Stencil>,
    cum: Vec<Stencil>,
    mid: Vec<Stencil>,
}

/// Weights applied to `f[start..start + w.len()]`.
#[derive(Debug, Clone, PartialEq)]
struct Stencil {
    start: usize,
    w: Vec<f64>,
}

impl Stencil {
    #[inline]
    fn apply<T: FieldValue>(&self, f: &[T]) -> T {
        self.w
            .iter()
            .zip(&f[self.start..self.start + self.w.len()])
            .fold(T::zero(), |acc, (w, v)| acc + *v * *w)
    }
}

/// Builds one stencil per target from consecutive nodes, centred where the mesh allows.
/// Targets are in units of the spacing. Off-centre stencils near the ends use `edge_width`
/// nodes to keep the order of accuracy.
fn stencils(
    n: usize,
    targets: &[f64],
    width: usize,
    edge_width: usize,
    op: impl Fn(f64, &[f64]) -> Vec<f64>,
) -> Vec<Stencil> {
    let mut cache: Option<(f64, usize, Vec<f64>)> = None;
    targets
        .iter()
        .map(|&t| {
            let centre = t.floor() as isize - (width as isize - 1) / 2;
            let (start, width) = if centre < 0 {
                (0, edge_width)
            } else if centre as usize + width > n {
                (n - edge_width, edge_width)
            } else {
                (centre as usize, width)
            };
            let local = t - start as f64;
            let w = match &cache {
                Some((lt, lw, w)) if *lt == local && *lw == width => w.clone(),
                _ => {
                    let nodes: Vec<f64> = (0..width).map(|k| k as f64).collect();
                    let w = op(local, &nodes);
                    cache = Some((local, width, w.clone()));
                    w
                }
            };
            Stencil { start, w }
        })
        .collect()
}

impl RadialGrid {
    /// Uniform-in-`ln r` grid on `[rho_min, rho_max]` with `n` nodes.
    pub fn new(rho_min: f64, rho_max: f64, n: usize) -> Result<Self> {
        if !(rho_min.is_finite() && rho_max.is_finite()) || rho_min >= rho_max {
            return Err(Error::Config(format!(
                "grid bounds must satisfy rho_min < rho_max (got {rho_min}, {rho_max})"
            )));
        }
        if n < MIN_NODES {
            return Err(Error::Config(format!("grid needs at least {MIN_NODES} nodes (got {n})")));
        }
        let step = (rho_max - rho_min) / (n - 1) as f64;
        let rho: Vec<f64> = (0..n)
            .map(|i| if i == n - 1 { rho_max } else { rho_min + step * i as f64 })
            .collect();
        let r: Vec<f64> = rho.iter().map(|x| x.exp()).collect();

        let rho_weights: Vec<f64> = gregory_weights(n).into_iter().map(|w| w * step).collect();
        let mut area_weights: Vec<f64> = rho_weights
            .iter()
            .zip(&rho)
            .map(|(w, x)| w * (2.0 * x).exp())
            .collect();
        // Make constants exact against r dr; for resolved grids this moves the last weight
        // by a relative amount near machine precision.
        let exact = 0.5 * (r[n - 1] * r[n - 1] - r[0] * r[0]);
        let approx: f64 = area_weights.iter().sum();
        area_weights[n - 1] += exact - approx;

        let nodes: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let halves: Vec<f64> = (0..n - 1).map(|i| i as f64 + 0.5).collect();
        let w = 2 * HALF_WIDTH + 1;
        let d1 = stencils(n, &nodes, w, w, |z, x| {
            derivative_weights(z, x, 1).into_iter().map(|c| c / step).collect()
        });
        let d2 = stencils(n, &nodes, w, w + 1, |z, x| {
            derivative_weights(z, x, 2).into_iter().map(|c| c / (step * step)).collect()
        });
        let cum = stencils(n, &halves, 8, 8, |z, x| {
            interval_weights(x, z - 0.5, z + 0.5).into_iter().map(|c| c * step).collect()
        });
        let mid = stencils(n, &halves, 8, 8, |z, x| derivative_weights(z, x, 0));

        Ok(Self { rho_min, rho_max, step, rho, r, rho_weights, area_weights, d1, d2, cum, mid })
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }
    pub fn step(&self) -> f64 {
        self.step
    }
    pub fn rho_min(&self) -> f64 {
        self.rho_min
    }
    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }
    pub fn rho(&self) -> &[f64] {
        &self.rho
    }
    pub fn r(&self) -> &[f64] {
        &self.r
    }
    pub fn r_min(&self) -> f64 {
        self.r[0]
    }
    pub fn r_max(&self) -> f64 {
        self.r[self.n() - 1]
    }
    pub fn rho_weights(&self) -> &[f64] {
        &self.rho_weights
    }
    pub fn area_weights(&self) -> &[f64] {
        &self.area_weights
    }

    pub fn check<T>(&self, f: &[T]) -> Result<()> {
        if f.len() != self.n() {
            return Err(Error::GridMismatch { expected: self.n(), got: f.len() });
        }
        Ok(())
    }

    /// Evaluate a closed-form radial function at every node.
    pub fn sample<T>(&self, f: impl Fn(f64) -> T) -> Vec<T> {
        self.r.iter().map(|&r| f(r)).collect()
    }

    /// `int g d rho` over the mesh.
    pub fn integrate_rho<T: FieldValue>(&self, g: &[T]) -> T {
        debug_assert_eq!(g.len(), self.n());
        g.iter().zip(&self.rho_weights).fold(T::zero(), |acc, (v, w)| acc + *v * *w)
    }

    /// `int f r dr` over the mesh.
    pub fn integrate_rdr<T: FieldValue>(&self, f: &[T]) -> T {
        debug_assert_eq!(f.len(), self.n());
        f.iter().zip(&self.area_weights).fold(T::zero(), |acc, (v, w)| acc + *v * *w)
    }

    /// `int f dr` over the mesh.
    pub fn integrate_dr<T: FieldValue>(&self, f: &[T]) -> T {
        debug_assert_eq!(f.len(), self.n());
        f.iter()
            .zip(&self.rho_weights)
            .zip(&self.r)
            .fold(T::zero(), |acc, ((v, w), r)| acc + *v * (*w * *r))
    }

    /// Planar inner product `<f|g> = 2 pi int f conj(g) r dr`.
    pub fn inner_product<T: FieldValue>(&self, f: &[T], g: &[T]) -> Result<Complex64> {
        self.check(f)?;
        self.check(g)?;
        let s = f
            .iter()
            .zip(g)
            .zip(&self.area_weights)
            .fold(Complex64::new(0.0, 0.0), |acc, ((a, b), w)| acc + a.dot_conj(b) * *w);
        Ok(s * (2.0 * PI))
    }

    /// Running integral `C_i = int_{rho_0}^{rho_i} g d rho`, eighth order.
    pub fn cumulative_rho<T: FieldValue>(&self, g: &[T]) -> Vec<T> {
        let n = self.n();
        let mut out = vec![T::zero(); n];
        for i in 0..n - 1 {
            out[i + 1] = out[i] + self.cum[i].apply(g);
        }
        out
    }

    /// Running integral from the right, `C_i = int_{rho_i}^{rho_max} g d rho`.
    pub fn cumulative_rho_from_right<T: FieldValue>(&self, g: &[T]) -> Vec<T> {
        let n = self.n();
        let mut out = vec![T::zero(); n];
        for i in (0..n - 1).rev() {
            out[i] = out[i + 1] + self.cum[i].apply(g);
        }
        out
    }

    /// Eighth-order `d/d rho`; one-sided closures at the ends.
    pub fn deriv_rho<T: FieldValue>(&self, f: &[T]) -> Vec<T> {
        debug_assert_eq!(f.len(), self.n());
        self.d1.iter().map(|st| st.apply(f)).collect()
    }

    /// `d/dr = e^{-rho} d/d rho`.
    pub fn deriv_r<T: FieldValue>(&self, f: &[T]) -> Vec<T> {
        self.deriv_rho(f).into_iter().zip(&self.r).map(|(d, r)| d * (1.0 / r)).collect()
    }

    /// Eighth-order `d^2/d rho^2`.
    pub fn second_deriv_rho<T: FieldValue>(&self, f: &[T]) -> Vec<T> {
        debug_assert_eq!(f.len(), self.n());
        self.d2.iter().map(|st| st.apply(f)).collect()
    }

    /// Weights of the second-derivative stencil at node `i`: `(first node, weights)`.
    pub fn second_deriv_stencil(&self, i: usize) -> (usize, &[f64]) {
        (self.d2[i].start, &self.d2[i].w)
    }

    /// Values at the cell midpoints `rho_i + h/2`, `i = 0..n-1`.
    pub fn midpoints<T: FieldValue>(&self, f: &[T]) -> Vec<T> {
        self.mid.iter().map(|st| st.apply(f)).collect()
    }

    /// Norm of a field; see [`NormKind`].
    pub fn norm<T: FieldValue>(&self, f: &[T], kind: NormKind) -> Result<f64> {
        self.check(f)?;
        match kind {
            NormKind::L2x => Ok(self.l2x(f)),
            NormKind::LInf => Ok(f.iter().map(|v| v.abs()).fold(0.0, f64::max)),
            NormKind::X => {
                let (value, endpoint_heavy) = self.x_norm_checked(f);
                if endpoint_heavy {
                    warn!("X-norm: more than 1% of the mass sits at the mesh ends; truncation may bias it");
                }
                Ok(value)
            }
            NormKind::Lpq { p, q } => self.lpq(f, p, q),
        }
    }

    fn l2x<T: FieldValue>(&self, f: &[T]) -> f64 {
        let s: f64 = f.iter().zip(&self.area_weights).map(|(v, w)| v.norm_sqr() * w).sum();
        (2.0 * PI * s.max(0.0)).sqrt()
    }

    /// X-norm plus a flag raised when the two outermost nodes at either end carry more than
    /// 1% of the squared mass.
    pub fn x_norm_checked<T: FieldValue>(&self, f: &[T]) -> (f64, bool) {
        let n = self.n();
        let fr = self.deriv_r(f);
        // ||f/r||^2 = 2 pi int |f|^2 d rho
        let over_r: Vec<f64> = f.iter().map(|v| v.norm_sqr()).collect();
        let dens: Vec<f64> = fr.iter().map(|v| v.norm_sqr()).collect();
        let a = 2.0 * PI * self.integrate_rho(&over_r);
        let b = 2.0 * PI * self.integrate_rdr(&dens);
        let total = a + b;
        let edge: f64 = [0usize, 1, n - 2, n - 1]
            .iter()
            .map(|&i| 2.0 * PI * (over_r[i] * self.rho_weights[i] + dens[i] * self.area_weights[i]))
            .sum();
        let flagged = total > 0.0 && edge.abs() > 0.01 * total;
        (a.max(0.0).sqrt() + b.max(0.0).sqrt(), flagged)
    }

    fn lpq<T: FieldValue>(&self, f: &[T], p: f64, q: f64) -> Result<f64> {
        if !(p >= 1.0) || !(q >= 1.0) || p.is_nan() || q.is_nan() {
            return Err(Error::Argument(format!("L^p_q needs p, q in [1, inf] (got p={p}, q={q})")));
        }
        let blocks = self.dyadic_block_norms(f, p);
        Ok(lq_combine(blocks.iter().map(|(_, b)| *b), q))
    }

    /// `L^p(r dr)` norms over dyadic blocks `[2^j, 2^{j+1})`, keyed by `j`.
    ///
    /// Blocks are anchored at integer powers of two; partial blocks at the mesh ends count.
    pub fn dyadic_block_norms<T: FieldValue>(&self, f: &[T], p: f64) -> Vec<(i64, f64)> {
        let mut out: Vec<(i64, f64)> = Vec::new();
        for (i, v) in f.iter().enumerate() {
            let j = self.r[i].log2().floor() as i64;
            let contrib = if p.is_infinite() {
                v.abs()
            } else {
                v.abs().powf(p) * self.area_weights[i]
            };
            match out.last_mut() {
                Some((k, acc)) if *k == j => {
                    if p.is_infinite() {
                        *acc = acc.max(contrib);
                    } else {
                        *acc += contrib;
                    }
                }
                _ => out.push((j, contrib)),
            }
        }
        if p.is_finite() {
            for (_, acc) in &mut out {
                *acc = acc.max(0.0).powf(1.0 / p);
            }
        }
        out
    }

    /// Eight-point Lagrange interpolation of nodal data at an arbitrary `rho`.
    ///
    /// Points outside the mesh are clamped to the end values.
    pub fn interpolate<T: FieldValue>(&self, f: &[T], rho: f64) -> T {
        let n = self.n();
        if rho <= self.rho_min {
            return f[0];
        }
        if rho >= self.rho_max {
            return f[n - 1];
        }
        let x = (rho - self.rho_min) / self.step;
        let i = (x.floor() as usize).min(n - 2);
        let start = i.saturating_sub(3).min(n - 8);
        let nodes: Vec<f64> = (0..8).map(|k| (start + k) as f64).collect();
        let w = derivative_weights(x, &nodes, 0);
        Stencil { start, w }.apply(f)
    }

    /// Index of the first node with `r >= value` (or `n` if none).
    pub fn index_at_or_above(&self, r: f64) -> usize {
        self.r.partition_point(|&x| x < r)
    }
}

fn lq_combine(blocks: impl Iterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        blocks.fold(0.0, f64::max)
    } else {
        blocks.map(|b| b.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Gregory end-corrected trapezoid coefficients (unit spacing).
///
/// Exact for polynomials of degree up to the number of correction terms plus one.
pub fn gregory_weights(n: usize) -> Vec<f64> {
    let mut w = vec![1.0; n];
    w[0] = 0.5;
    w[n - 1] = 0.5;
    let terms = GREGORY.len().min((n - 1) / 2);
    for (k0, gamma) in GREGORY.iter().take(terms).enumerate() {
        let k = k0 + 1;
        let sign_left = if k % 2 == 0 { 1.0 } else { -1.0 };
        for j in 0..=k {
            let binom = binomial(k, j);
            // forward difference at the left end: sum_j (-1)^{k-j} C(k,j) f_j
            let fwd = if (k - j) % 2 == 0 { binom } else { -binom };
            w[j] -= gamma * sign_left * fwd;
            // backward difference at the right end: sum_j (-1)^j C(k,j) f_{n-1-j}
            let bwd = if j % 2 == 0 { binom } else { -binom };
            w[n - 1 - j] -= gamma * bwd;
        }
    }
    w
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
