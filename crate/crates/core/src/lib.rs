//! Numerical laboratory for m-equivariant Landau-Lifshitz flows `R^2 -> S^2`.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`] - logarithmic radial mesh, quadrature, derivatives and norms.
//! * [`harmonic`] - the explicit harmonic-map family `h[mu]`, its frame, energy and degree.
//! * [`evolve`] - time integration of the reduced flow (vector and great-circle scalar forms).
//! * [`gauge`] - parallel frame, the gauge field `q` and reconstruction of `v` from `(mu, q)`.
//! * [`modulation`] - localized-orthogonality fitting, the right inverse of `L^s`, and
//!   normal-form diagnostics.
//! * [`scenarios`] - tail-driven initial data for the `m = 2` heat flow, the asymptotic
//!   scale formula and the behaviour classifier.

pub mod banded;
pub mod error;
pub mod evolve;
pub mod field;
pub mod gauge;
pub mod grid;
pub mod harmonic;
pub mod modulation;
pub mod scenarios;
pub mod series;
pub mod snapshot;
pub mod stencil;

#[cfg(test)]
pub(crate) mod oracle;

pub use error::{Error, Result};
pub use evolve::{DtPolicy, FlowConfig, Scheme, SphereMap};
pub use field::FieldValue;
pub use gauge::GaugeState;
pub use grid::{NormKind, RadialGrid};
pub use harmonic::{HarmonicProfile, Mu};
pub use modulation::{BumpProfile, FitScope, ModulationState, PsiProfile};
pub use scenarios::{BehaviorClass, Prediction, PredictionForm, TailFamily, TailKind};
pub use series::{RunRecord, RunSeries};
pub use snapshot::{Snapshot, SnapshotMeta};

pub use nalgebra::Vector3;
pub use num_complex::Complex64;

/// Real 3-vector.
pub type Vec3 = Vector3<f64>;
/// Complex 3-vector (frames `e` and `f`).
pub type CVec3 = Vector3<Complex64>;
