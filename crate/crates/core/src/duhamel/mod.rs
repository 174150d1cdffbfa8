//! Convolutions against the heat semigroup: `A`, `B`, `C`, their
//! time-weighted and λ-damped variants, and ensemble probes.
//!
//! Quadrature is a per-mode exponential integrator: exact `e^{−|k|²(t−s)}`
//! factors with the forcing linear between nodes.

mod ops;
pub mod probe;
mod timeline;

pub use ops::{
    apply_kind, convolve_at, duhamel_a, duhamel_b, duhamel_c, duhamel_timeline, etd_weights, DampingWeight,
    DuhamelKind, ExpIntegrator,
};
pub use probe::{duhamel_damped, duhamel_weighted, WeightedNormPair};
pub use timeline::{graded_times, is_graded, uniform_times, Timeline};
