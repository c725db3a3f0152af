//! Permutation estimators.
//!
//! Every estimator implements [`Estimator`] and is registered under a short
//! name in an [`EstimatorRegistry`]; experiments and the CLI pick one at
//! runtime by that name.

mod altmin;
mod brute;
mod oracle;
mod rank;
mod sort1d;

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::least_squares;
use crate::perm::{hamming_distance, Permutation};
use crate::rng::Rng;

pub use altmin::{alternating_min, alternating_min_trace, AlternatingMin, AltMinRun};
pub use brute::{brute_force_mle, BruteForce, DEFAULT_MAX_N};
pub use oracle::{oracle_x_estimator, OracleX};
pub use rank::{argsort, rank_match};
pub use sort1d::{sort_mle_d1, SortMle};

/// The observation and design an estimator sees. `x_star` is only read by
/// estimators granted side information.
#[derive(Clone, Copy, Debug)]
pub struct EstimationInput<'a> {
    pub y: &'a [f64],
    pub design: &'a DMatrix<f64>,
    pub x_star: Option<&'a [f64]>,
}

impl<'a> EstimationInput<'a> {
    pub fn new(y: &'a [f64], design: &'a DMatrix<f64>) -> Self {
        EstimationInput {
            y,
            design,
            x_star: None,
        }
    }

    pub fn with_x_star(mut self, x_star: &'a [f64]) -> Self {
        self.x_star = Some(x_star);
        self
    }

    pub fn from_instance(inst: &'a crate::model::ProblemInstance) -> Self {
        EstimationInput::new(&inst.y, &inst.design).with_x_star(&inst.x_star)
    }

    fn check(&self) -> Result<()> {
        if self.y.len() != self.design.nrows() {
            return Err(Error::invalid(format!(
                "y has {} entries but the design has {} rows",
                self.y.len(),
                self.design.nrows()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub method: String,
    pub pi_hat: Permutation,
    /// Least-squares coefficients of `y` against `Π̂ A`.
    pub x_hat: Vec<f64>,
    /// `||P⊥_Π̂ y||²`.
    pub objective: f64,
    /// True when `pi_hat` is a global minimizer over the searched class.
    pub exact: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hamming_to_truth: Option<usize>,
}

impl EstimationResult {
    /// Fits `x_hat` and the objective under `pi_hat` from scratch.
    pub(crate) fn finalize(
        method: &str,
        input: &EstimationInput,
        pi_hat: Permutation,
        exact: bool,
    ) -> Result<Self> {
        let (x_hat, objective) = least_squares(input.y, input.design, &pi_hat)?;
        Ok(EstimationResult {
            method: method.to_string(),
            pi_hat,
            x_hat,
            objective,
            exact,
            iterations: None,
            hamming_to_truth: None,
        })
    }

    pub fn with_truth(mut self, truth: &Permutation) -> Result<Self> {
        self.hamming_to_truth = Some(hamming_distance(&self.pi_hat, truth)?);
        Ok(self)
    }
}

pub trait Estimator: Send + Sync {
    /// Registry key, e.g. `"sort1d"`.
    fn name(&self) -> &'static str;

    /// Whether results are certified global minimizers.
    fn is_exact(&self) -> bool;

    /// Rejects `(n, d)` combinations the estimator cannot handle, so that a
    /// sweep fails before running any trial.
    fn check_dimensions(&self, n: usize, d: usize) -> Result<()>;

    fn needs_x_star(&self) -> bool {
        false
    }

    fn estimate(&self, input: &EstimationInput, rng: &mut Rng) -> Result<EstimationResult>;
}

#[derive(Clone, Default)]
pub struct EstimatorRegistry {
    estimators: BTreeMap<&'static str, Arc<dyn Estimator>>,
}

impl EstimatorRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `sort1d`, `brute`, `oracle` and `altmin` with default settings.
    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register(SortMle);
        reg.register(BruteForce::default());
        reg.register(OracleX);
        reg.register(AlternatingMin::default());
        reg
    }

    /// Adds or replaces the estimator under its own name.
    pub fn register<E: Estimator + 'static>(&mut self, estimator: E) {
        self.estimators.insert(estimator.name(), Arc::new(estimator));
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Estimator>> {
        self.estimators.get(name).cloned().ok_or_else(|| {
            Error::Config(format!(
                "unknown estimator {name:?}; available: {}",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.estimators.keys().copied().collect()
    }
}

impl std::fmt::Debug for EstimatorRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}
