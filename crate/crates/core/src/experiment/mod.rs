//! Seeded Monte Carlo sweeps over `(n, Γ)` grids.
//!
//! Each trial draws its own seed from `(master_seed, n-index, Γ-index,
//! trial-index)` through [`derive_seed`], so a batch is identical no matter
//! how many worker threads execute it or in which order trials finish.

mod csv;

pub use self::csv::{csv_string, emit_csv, CSV_HEADER};

use std::path::PathBuf;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{thm3_approx_converse, BoundReport};
use crate::error::{Error, Result};
use crate::estimators::{EstimationInput, EstimatorRegistry};
use crate::model::{generate_instance, signal_norm_for_gamma, snr_for_gamma, TruePermutation};
use crate::perm::{hamming_distance, sample_hamming_ball_generative, sample_uniform};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_grid: Vec<usize>,
    pub d: usize,
    pub gamma_grid: Vec<f64>,
    pub trials: usize,
    /// Noise level. With `sigma = 0` the signal has unit norm and snr is infinite.
    pub sigma: f64,
    pub estimator: String,
    #[serde(rename = "distortion_D", skip_serializing_if = "Option::is_none")]
    pub distortion_d: Option<usize>,
    /// Draw `Π*` from the Hamming-ball sampler of this radius instead of uniformly.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side_info_hbar: Option<usize>,
    pub master_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_grid: vec![100],
            d: 1,
            gamma_grid: vec![2.0, 3.0, 4.0, 5.0, 6.0],
            trials: 200,
            sigma: 1.0,
            estimator: "sort1d".into(),
            distortion_d: None,
            side_info_hbar: None,
            master_seed: 0,
            output_path: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("invalid experiment config: {e}")))
    }

    /// Rejects anything that would make a trial fail, before any trial runs.
    pub fn validate(&self, registry: &EstimatorRegistry) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return cfg("trials must be at least 1".into());
        }
        if self.d == 0 {
            return cfg("d must be at least 1".into());
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return cfg(format!("sigma must be finite and >= 0, got {}", self.sigma));
        }
        let estimator = registry.get(&self.estimator)?;
        for &n in &self.n_grid {
            if n <= self.d {
                return cfg(format!("need n > d, got n = {n}, d = {}", self.d));
            }
            estimator.check_dimensions(n, self.d)?;
            if let Some(h) = self.side_info_hbar {
                if h < 2 || h > n {
                    return cfg(format!("side_info_hbar = {h} outside 2..={n}"));
                }
            }
            if let Some(dist) = self.distortion_d {
                if !(dist > 2 && dist < n) {
                    return cfg(format!("distortion D = {dist} outside 3..={}", n - 1));
                }
            }
            for &g in &self.gamma_grid {
                if !(g >= 0.0) || !signal_norm_for_gamma(n, g, self.sigma.max(1.0)).is_finite() {
                    return cfg(format!("Γ = {g} at n = {n} does not give a finite signal norm"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub gamma: f64,
    pub trial: usize,
    pub seed: u64,
    pub recovered: bool,
    pub hamming_error: usize,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridAggregate {
    pub n: usize,
    pub d: usize,
    pub sigma: f64,
    #[serde(with = "crate::serde_float")]
    pub snr: f64,
    pub gamma: f64,
    pub estimator: String,
    pub trials: usize,
    pub successes: usize,
    pub freq: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialBatch {
    pub config: ExperimentConfig,
    /// Ordered by `(n-index, Γ-index, trial)`.
    pub records: Vec<TrialRecord>,
    /// One per grid point, in the same order.
    pub aggregates: Vec<GridAggregate>,
}

impl TrialBatch {
    /// Rebuilds the aggregates from the records alone.
    pub fn recompute_aggregates(&self) -> Vec<GridAggregate> {
        aggregate(&self.config, &self.records)
    }
}

fn grid_snr(config: &ExperimentConfig, n: usize, gamma: f64) -> f64 {
    if config.sigma == 0.0 {
        f64::INFINITY
    } else {
        snr_for_gamma(n, gamma)
    }
}

fn aggregate(config: &ExperimentConfig, records: &[TrialRecord]) -> Vec<GridAggregate> {
    let mut out = Vec::new();
    for &n in &config.n_grid {
        for &gamma in &config.gamma_grid {
            let point: Vec<&TrialRecord> = records.iter().filter(|r| r.n == n && r.gamma == gamma).collect();
            let trials = point.len();
            let successes = point.iter().filter(|r| r.recovered).count();
            let freq = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
            let stderr = if trials == 0 { 0.0 } else { (freq * (1.0 - freq) / trials as f64).sqrt() };
            out.push(GridAggregate {
                n,
                d: config.d,
                sigma: config.sigma,
                snr: grid_snr(config, n, gamma),
                gamma,
                estimator: config.estimator.clone(),
                trials,
                successes,
                freq,
                stderr,
            });
        }
    }
    out
}

/// Runs sweeps with a chosen estimator registry and thread count.
#[derive(Clone, Debug)]
pub struct ExperimentRunner {
    registry: EstimatorRegistry,
    workers: Option<usize>,
}

impl Default for ExperimentRunner {
    fn default() -> Self {
        ExperimentRunner {
            registry: EstimatorRegistry::with_builtins(),
            workers: None,
        }
    }
}

impl ExperimentRunner {
    pub fn new(registry: EstimatorRegistry) -> Self {
        ExperimentRunner {
            registry,
            workers: None,
        }
    }

    /// Runs trials on a dedicated pool of `workers` threads; `None` uses the global pool.
    pub fn with_workers(mut self, workers: Option<usize>) -> Self {
        self.workers = workers;
        self
    }

    fn run_trial(
        &self,
        config: &ExperimentConfig,
        (ni, gi, trial): (usize, usize, usize),
    ) -> Result<TrialRecord> {
        let n = config.n_grid[ni];
        let gamma = config.gamma_grid[gi];
        let d = config.d;
        let seed = derive_seed(config.master_seed, &[ni as u64, gi as u64, trial as u64]);
        let mut rng = rng_from_seed(seed);

        let norm = if config.sigma == 0.0 {
            1.0
        } else {
            signal_norm_for_gamma(n, gamma, config.sigma)
        };
        let x_star: Vec<f64> = if d == 1 {
            vec![norm]
        } else {
            let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let len = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            g.iter().map(|v| v / len * norm).collect()
        };
        let pi_star = match config.side_info_hbar {
            Some(h) => sample_hamming_ball_generative(n, h, &mut rng)?,
            None => sample_uniform(n, &mut rng)?,
        };
        let instance = generate_instance(
            n,
            d,
            &x_star,
            config.sigma,
            TruePermutation::Given(pi_star),
            derive_seed(seed, &[1]),
        )?;
        let estimator = self.registry.get(&config.estimator)?;
        let mut est_rng = rng_from_seed(derive_seed(seed, &[2]));
        let result = estimator.estimate(&EstimationInput::from_instance(&instance), &mut est_rng)?;
        let hamming_error = hamming_distance(&result.pi_hat, &instance.pi_star)?;
        Ok(TrialRecord {
            n,
            gamma,
            trial,
            seed,
            recovered: hamming_error == 0,
            hamming_error,
            objective: result.objective,
        })
    }

    pub fn run_phase_transition(&self, config: &ExperimentConfig) -> Result<TrialBatch> {
        config.validate(&self.registry)?;
        let tasks: Vec<(usize, usize, usize)> = (0..config.n_grid.len())
            .flat_map(|ni| {
                (0..config.gamma_grid.len()).flat_map(move |gi| (0..config.trials).map(move |t| (ni, gi, t)))
            })
            .collect();
        let run = || -> Result<Vec<TrialRecord>> {
            tasks.par_iter().map(|&task| self.run_trial(config, task)).collect()
        };
        let records = match self.workers {
            Some(w) => rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot start {w} workers: {e}")))?
                .install(run)?,
            None => run()?,
        };
        Ok(TrialBatch {
            aggregates: aggregate(config, &records),
            config: config.clone(),
            records,
        })
    }

    pub fn run_distortion_experiment(&self, config: &ExperimentConfig) -> Result<DistortionReport> {
        let distortion = config
            .distortion_d
            .ok_or_else(|| Error::Config("distortion experiment needs distortion_D".into()))?;
        let batch = self.run_phase_transition(config)?;
        let points = batch
            .aggregates
            .iter()
            .map(|agg| {
                let records: Vec<TrialRecord> = batch
                    .records
                    .iter()
                    .filter(|r| r.n == agg.n && r.gamma == agg.gamma)
                    .cloned()
                    .collect();
                let error_events = records.iter().filter(|r| r.hamming_error >= distortion).count();
                Ok(DistortionPoint {
                    n: agg.n,
                    gamma: agg.gamma,
                    snr: agg.snr,
                    distortion,
                    trials: records.len(),
                    error_events,
                    error_freq: distortion_error_frequency(&records, distortion),
                    converse: thm3_approx_converse(agg.n, agg.snr, distortion)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DistortionReport { batch, points })
    }
}

pub fn run_phase_transition(config: &ExperimentConfig) -> Result<TrialBatch> {
    ExperimentRunner::default().run_phase_transition(config)
}

pub fn run_distortion_experiment(config: &ExperimentConfig) -> Result<DistortionReport> {
    ExperimentRunner::default().run_distortion_experiment(config)
}

/// Fraction of records with `d_H(Π̂, Π*) >= distortion`.
pub fn distortion_error_frequency(records: &[TrialRecord], distortion: usize) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records.iter().filter(|r| r.hamming_error >= distortion).count() as f64 / records.len() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionPoint {
    pub n: usize,
    pub gamma: f64,
    #[serde(with = "crate::serde_float")]
    pub snr: f64,
    pub distortion: usize,
    pub trials: usize,
    pub error_events: usize,
    pub error_freq: f64,
    /// The approximate-recovery converse evaluated at the same `(n, snr, D)`.
    pub converse: BoundReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub batch: TrialBatch,
    pub points: Vec<DistortionPoint>,
}
