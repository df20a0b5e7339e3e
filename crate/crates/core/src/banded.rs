//! Banded LU with partial pivoting and row equilibration.
//!
//! Storage keeps, for each row, a window of columns `[i - kl, i + ku + kl]` so that the fill-in
//! produced by row interchanges stays in place.

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let off = j as isize - i as isize + self.kl as isize;
        if off < 0 || off as usize >= self.width {
            None
        } else {
            Some(i * self.width + off as usize)
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Adds `v` to entry `(i, j)`. Panics outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let in_band = j + self.kl >= i && j <= i + self.ku;
        assert!(in_band, "entry ({i}, {j}) outside band kl={} ku={}", self.kl, self.ku);
        let k = self.slot(i, j).expect("band slot");
        self.data[k] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.slot(i, j).expect("band slot");
        self.data[k] = v;
    }

    /// Overwrites row `i` with the unit row `e_i`.
    pub fn set_identity_row(&mut self, i: usize) {
        let start = i * self.width;
        self.data[start..start + self.width].iter_mut().for_each(|x| *x = 0.0);
        self.set(i, i, 1.0);
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Factorizes in place.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let kl = self.kl;
        let ku = self.ku;
        let mut scale = vec![1.0; n];
        for (i, s) in scale.iter_mut().enumerate() {
            let row = &mut self.data[i * self.width..(i + 1) * self.width];
            let big = row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if big == 0.0 || !big.is_finite() {
                return Err(Error::Singular { row: i });
            }
            *s = 1.0 / big;
            row.iter_mut().for_each(|v| *v *= *s);
        }
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for r in k + 1..=last {
                let v = self.get(r, k).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular { row: k });
            }
            piv[k] = p;
            let right = (k + kl + ku).min(n - 1);
            let w = self.width;
            // Row i stores column j at i * w + (j + kl - i).
            if p != k {
                for j in k..=right {
                    let a = k * w + j + kl - k;
                    let b = p * w + j + kl - p;
                    self.data.swap(a, b);
                }
            }
            let d = self.data[k * w + kl];
            let (head, tail) = self.data.split_at_mut((k + 1) * w);
            let pivot_row = &head[k * w + kl + 1..k * w + kl + 1 + (right - k)];
            for r in k + 1..=last {
                let base = (r - k - 1) * w;
                let row = &mut tail[base..base + w];
                let lk = k + kl - r;
                let l = row[lk] / d;
                if l == 0.0 {
                    continue;
                }
                row[lk] = l;
                let seg = &mut row[lk + 1..lk + 1 + (right - k)];
                for (x, u) in seg.iter_mut().zip(pivot_row) {
                    *x -= l * u;
                }
            }
        }
        Ok(BandLu { m: self, piv, scale })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
    scale: Vec<f64>,
}

impl BandLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.m.n;
        let kl = self.m.kl;
        let ku = self.m.ku;
        let w = self.m.width;
        let data = &self.m.data;
        let mut x: Vec<f64> = b.iter().zip(&self.scale).map(|(v, s)| v * s).collect();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk == 0.0 {
                continue;
            }
            for r in k + 1..=(k + kl).min(n - 1) {
                x[r] -= data[r * w + k + kl - r] * xk;
            }
        }
        for k in (0..n).rev() {
            let right = (k + kl + ku).min(n - 1);
            let row = &data[k * w + kl..k * w + kl + 1 + (right - k)];
            let acc: f64 = row[1..].iter().zip(&x[k + 1..=right]).map(|(a, b)| a * b).sum();
            x[k] = (x[k] - acc) / row[0];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_band(n: usize, kl: usize, ku: usize, seed: u64) -> BandMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut a = BandMatrix::new(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                a.add(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        a
    }

    #[test]
    fn solves_tridiagonal_laplacian() {
        let n = 50;
        let mut a = BandMatrix::new(n, 1, 1);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                a.add(i, i + 1, -1.0);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.mul_vec(&x);
        let got = a.factor().unwrap().solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_row_is_singular() {
        let mut a = BandMatrix::new(5, 1, 1);
        for i in 0..5 {
            if i != 3 {
                a.add(i, i, 1.0);
            }
        }
        assert!(matches!(a.factor(), Err(Error::Singular { row: 3 })));
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let mut a = BandMatrix::new(2, 1, 1);
        a.add(0, 1, 1.0);
        a.add(1, 0, 1.0);
        let x = a.factor().unwrap().solve(&[2.0, 3.0]);
        assert_eq!(x, vec![3.0, 2.0]);
    }

    proptest! {
        #[test]
        fn random_band_systems_roundtrip(seed in 0u64..10_000, kl in 0usize..5, ku in 0usize..5) {
            let n = 40;
            let mut a = random_band(n, kl, ku, seed);
            for i in 0..n {
                a.add(i, i, 4.0 * (kl + ku + 1) as f64);
            }
            let x: Vec<f64> = (0..n).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
            let b = a.mul_vec(&x);
            let got = a.factor().unwrap().solve(&b);
            for (g, e) in got.iter().zip(&x) {
                prop_assert!((g - e).abs() < 1e-9);
            }
        }

        #[test]
        fn non_dominant_systems_roundtrip(seed in 0u64..10_000) {
            let n = 30;
            let a = random_band(n, 3, 2, seed);
            let x: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
            let b = a.mul_vec(&x);
            if let Ok(lu) = a.clone().factor() {
                let got = lu.solve(&b);
                let back = a.mul_vec(&got);
                let res = back.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
                prop_assert!(res < 1e-6);
            }
        }
    }
}
