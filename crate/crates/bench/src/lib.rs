//! Shared fixtures for the kernel benchmarks.

use equiflow_core::scenarios::perturbed_harmonic;
use equiflow_core::{Mu, RadialGrid, SphereMap};

/// Grid on `[-8, 8]` with `n` nodes.
pub fn grid(n: usize) -> RadialGrid {
    RadialGrid::new(-8.0, 8.0, n).expect("valid grid")
}

/// `h[mu]` at `m = 3` with a fixed seeded perturbation of size `0.05`.
pub fn perturbed(grid: &RadialGrid, planar: bool) -> SphereMap {
    let mu = Mu::new(3, 1.0, 0.0).expect("valid mu");
    perturbed_harmonic(mu, 0.05, 1, planar, grid).expect("perturbation")
}
