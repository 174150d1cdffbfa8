//! Pseudo-spectral toolkit for the variable-viscosity Boussinesq system on a
//! periodic box standing in for ℝ^d.
//!
//! Layers, bottom-up: [`field`] (grids, transforms, products, norms),
//! [`harmonic`] (heat semigroup, Riesz operators, Leray projection),
//! [`besov`] (dyadic and heat-flow Besov norms), [`duhamel`] (time
//! convolutions against the heat semigroup), [`solver`] (data preparation,
//! transport, Stokes and Picard iteration) and [`monitor`] (space-time norms
//! and inequality ledgers).

pub mod besov;
pub mod checks;
pub mod config;
pub mod duhamel;
pub mod error;
pub mod exponents;
pub mod field;
pub mod harmonic;
pub mod monitor;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid64 = field::Grid<f64>;
pub type SpectralField64 = field::SpectralField<f64>;
pub type PhysicalField64 = field::PhysicalField<f64>;
pub type Timeline64 = duhamel::Timeline<f64>;
pub type SolverState64 = solver::SolverState<f64>;
pub type Grid32 = field::Grid<f32>;
pub type SpectralField32 = field::SpectralField<f32>;
pub type PhysicalField32 = field::PhysicalField<f32>;
