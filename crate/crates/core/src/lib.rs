//! Pseudo-fermionic analysis of two coupled RLC circuits with balanced gain
//! and loss.
//!
//! The state `(V1, V2, V1', V2')` evolves under a real, non-symmetric
//! generator `L`. Shifting `L` by its smallest eigenvalue turns it into a sum
//! of two commuting pseudo-fermionic number operators, which gives closed
//! forms for the trajectories, the biorthogonal eigenbases, the metric
//! operators and the Heisenberg-like evolution of observables.

pub mod basis;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod heisenberg;
pub mod linalg;
pub mod liouvillian;
pub mod model;
pub mod observables;
pub mod params;
pub mod pfalgebra;
pub mod report;
pub mod suite;

pub use error::{Error, Result};
pub use linalg::{Matrix2, Matrix4, Vector2, Vector4};
pub use params::{CircuitParams, DerivedParams, RegimeReport};
pub use report::{Check, VerificationReport};
pub use model::{Model, ModelOptions};
pub use suite::{run_suite, SuiteOptions, SuiteOutcome};
