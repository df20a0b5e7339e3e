use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use equiflow_bench::{grid, perturbed};
use equiflow_core::banded::BandMatrix;
use equiflow_core::evolve::{step_scalar_beta, step_vector};
use equiflow_core::modulation::{bump_phi, fit_mu, r_inverse};
use equiflow_core::{GaugeState, Mu};
use num_complex::Complex64;
use std::hint::black_box;

fn banded(c: &mut Criterion) {
    let mut g = c.benchmark_group("banded");
    for &n in &[1000usize, 10000] {
        let (kl, ku) = (14, 14);
        let mut a = BandMatrix::new(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                let v = if i == j { 4.0 * kl as f64 } else { 1.0 / (1.0 + (i as f64 - j as f64).abs()) };
                a.set(i, j, v);
            }
        }
        let b = vec![1.0; n];
        g.bench_with_input(BenchmarkId::new("factor_solve", n), &n, |bench, _| {
            bench.iter(|| a.clone().factor().unwrap().solve(black_box(&b)))
        });
    }
    g.finish();
}

fn steppers(c: &mut Criterion) {
    let mut g = c.benchmark_group("step");
    g.sample_size(20);
    for &n in &[801usize, 3201] {
        let grid = grid(n);
        let v = perturbed(&grid, false);
        let p = perturbed(&grid, true);
        let beta = p.beta.clone().unwrap();
        g.bench_with_input(BenchmarkId::new("vector", n), &n, |b, _| {
            b.iter(|| step_vector(black_box(&v), Complex64::new(1.0, 0.5), 0.01, &grid).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("scalar", n), &n, |b, _| {
            b.iter(|| step_scalar_beta(black_box(&beta), 1.0, 3, 0.01, &grid).unwrap())
        });
    }
    g.finish();
}

fn diagnostics(c: &mut Criterion) {
    let grid = grid(1601);
    let v = perturbed(&grid, false);
    let mu = Mu::new(3, 1.0, 0.0).unwrap();
    let phi = bump_phi(3, &grid).unwrap();
    let gs = GaugeState::forward(&v.v, mu, Complex64::new(1.0, 0.0), &grid).unwrap();
    c.bench_function("gauge_forward_1601", |b| {
        b.iter(|| GaugeState::forward(black_box(&v.v), mu, Complex64::new(1.0, 0.0), &grid).unwrap())
    });
    c.bench_function("r_inverse_1601", |b| b.iter(|| r_inverse(black_box(&gs.q), &phi, 1.0, &grid).unwrap()));
    c.bench_function("fit_mu_1601", |b| {
        b.iter(|| fit_mu(black_box(&v.v), Mu::new(3, 1.1, 0.1).unwrap(), &phi, &grid, false).unwrap())
    });
}

criterion_group!(benches, banded, steppers, diagnostics);
criterion_main!(benches);
