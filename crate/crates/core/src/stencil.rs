//! Finite-difference and interpolation weights on arbitrary 1-D point sets.

/// Weights `c[j][k]` such that `sum_j c[j][k] f(x_j) ~ f^{(k)}(z)` for `k <= max_deriv`
/// (Fornberg's recursion).
pub fn fornberg(z: f64, x: &[f64], max_deriv: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; max_deriv + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_deriv);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c
}

/// Weights for the `deriv`-th derivative at `z` from nodes `x`.
pub fn derivative_weights(z: f64, x: &[f64], deriv: usize) -> Vec<f64> {
    fornberg(z, x, deriv).into_iter().map(|row| row[deriv]).collect()
}

/// Weights `w_j` with `sum_j w_j f(x_j) ~ int_a^b f`, exact for polynomials of degree `< x.len()`.
pub fn interval_weights(x: &[f64], a: f64, b: f64) -> Vec<f64> {
    // Gauss-Legendre with 8 nodes is exact through degree 15.
    const GL: [(f64, f64); 4] = [
        (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
        (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
        (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
        (0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
    ];
    assert!(x.len() <= 16, "interval weights limited to 16 nodes");
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut w = vec![0.0; x.len()];
    for (t, gw) in GL {
        for z in [mid - half * t, mid + half * t] {
            for (acc, c) in w.iter_mut().zip(derivative_weights(z, x, 0)) {
                *acc += gw * half * c;
            }
        }
    }
    w
}
