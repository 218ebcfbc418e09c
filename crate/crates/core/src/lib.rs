//! Finite-dimensional quantization of events and measurement of states.
//!
//! Classical events are `[0,1]`-valued functions on a finite outcome space,
//! quantum events are effect operators, and the two are linked by a single
//! POVM: quantization `f ↦ Σₓ f(x)Eₓ` and measurement `ρ ↦ (Tr[ρEₓ])ₓ`
//! are dual to each other. The crate makes every piece of that picture
//! executable and checkable:
//!
//! - [`matrix`]: dense complex matrices, Hermitian spectra, tensor products
//!   and partial traces.
//! - [`effects`] / [`states`]: the two effect modules and the two convex
//!   state spaces, plus recovery of representing effects and density
//!   operators from black-box affine functionals.
//! - [`duality`]: POVMs, quantization and measurement maps, and the
//!   commuting-square check between them.
//! - [`covariance`]: finite groups, unitary representations, systems of
//!   imprimitivity and covariant measurements.
//! - [`model`]: Kraus channels, measurement models and the quantization
//!   obtained by dualizing a model.

pub mod covariance;
pub mod duality;
pub mod effects;
pub mod error;
pub mod fixtures;
pub mod frame;
pub mod matrix;
pub mod model;
pub mod random;
pub mod space;
pub mod states;
pub mod suite;
pub mod transcript;

pub use duality::{MeasurementMap, Povm, QuantizationMap};
pub use effects::{ClassicalEffect, Effect, QuantumEffect};
pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, Tolerance, TraceOut};
pub use model::{KrausChannel, MeasurementModel};
pub use space::OutcomeSpace;
pub use states::{ConvexState, DensityMatrix, ProbabilityVector};
