//! Simulation toolkit for trapped circular Rydberg atom arrays.
//!
//! Frequencies are angular (rad/s) with ħ = 1 unless a name says otherwise.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atomic_structure;
pub mod constants;
pub mod dd_engine;
pub mod error;
pub mod interactions;
pub mod lifetime;
pub mod measurement_model;
pub mod ponderomotive;
pub mod quadrature;
pub mod quantum_core;

pub use atomic_structure::{FieldConfig, RydbergLevel, Species};
pub use error::{Error, Result};
pub use quantum_core::{Propagator, StateVector};
