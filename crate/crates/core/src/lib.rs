//! Permutation recovery for the shuffled linear model `y = Π* A x* + w`.
//!
//! The crate is organised bottom-up:
//!
//! - [`perm`]: permutations, Hamming distance, cycles, samplers and the
//!   three-colouring of permutation incidence graphs.
//! - [`model`]: random-design problem instances and projection residuals.
//! - [`estimators`]: permutation estimators behind the [`Estimator`] trait,
//!   selectable by name through an [`EstimatorRegistry`].
//! - [`bounds`]: closed-form recovery conditions and tail bounds, plus
//!   Monte Carlo checks of the tail bounds.
//! - [`hardness`]: the PARTITION reduction for `d > 1`.
//! - [`experiment`]: seeded phase-transition sweeps and CSV output.

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod hardness;
pub mod model;
pub mod perm;
pub mod rng;
mod serde_float;

pub use error::{Error, Result};
pub use estimators::{EstimationInput, EstimationResult, Estimator, EstimatorRegistry};
pub use model::ProblemInstance;
pub use perm::Permutation;
