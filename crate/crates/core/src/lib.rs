//! Diffusive (augmented) reformulation of wave equations with exponentially
//! weighted fractional damping on the unit interval.

pub mod augmented_system;
pub mod decay_estimator;
pub mod error;
pub mod fractional_kernel;
pub mod quadrature;
pub mod resolvent_analysis;
pub mod scalar;
pub mod spatial_operators;
pub mod tridiag;

pub use error::{Error, Result};
