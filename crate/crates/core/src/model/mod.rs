//! Random-design instances of the shuffled linear model and the residual
//! statistics that define the maximum-likelihood permutation.

mod projection;

pub use projection::{least_squares, projection_residual, ProjectionKernel, RANK_TOLERANCE};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{sample_uniform, Permutation};
use crate::rng::{substream, STREAM_DESIGN, STREAM_NOISE};

/// Stream used for `Π*` when an instance draws its own permutation.
const STREAM_PERMUTATION: u64 = 3;

/// One realization of `y = Π* A x* + w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceDocument", into = "InstanceDocument")]
pub struct ProblemInstance {
    pub n: usize,
    pub d: usize,
    pub design: DMatrix<f64>,
    pub x_star: Vec<f64>,
    pub pi_star: Permutation,
    pub sigma: f64,
    pub noise: Vec<f64>,
    pub y: Vec<f64>,
    pub seed: u64,
}

/// How `Π*` is chosen by [`generate_instance`].
#[derive(Clone, Debug, PartialEq)]
pub enum TruePermutation {
    Given(Permutation),
    /// Uniform over all `n!` permutations, drawn from the instance seed.
    Random,
}

/// Draws `A` (i.i.d. standard normal) and `w ~ N(0, σ² I)` from independent
/// substreams of `seed`, then assembles `y = Π* A x* + w`.
pub fn generate_instance(
    n: usize,
    d: usize,
    x_star: &[f64],
    sigma: f64,
    pi_star: TruePermutation,
    seed: u64,
) -> Result<ProblemInstance> {
    if d == 0 || d >= n {
        return Err(Error::invalid(format!("need 1 <= d < n, got n={n}, d={d}")));
    }
    if x_star.len() != d {
        return Err(Error::invalid(format!("x_star has {} entries, expected {d}", x_star.len())));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("noise level must be finite and >= 0, got {sigma}")));
    }
    let pi_star = match pi_star {
        TruePermutation::Given(p) if p.len() == n => p,
        TruePermutation::Given(p) => {
            return Err(Error::invalid(format!("permutation of size {} for n={n}", p.len())))
        }
        TruePermutation::Random => sample_uniform(n, &mut substream(seed, STREAM_PERMUTATION))?,
    };

    let mut design_rng = substream(seed, STREAM_DESIGN);
    let mut row_major = Vec::with_capacity(n * d);
    for _ in 0..n * d {
        row_major.push(design_rng.sample::<f64, _>(StandardNormal));
    }
    let design = DMatrix::from_row_slice(n, d, &row_major);

    let mut noise_rng = substream(seed, STREAM_NOISE);
    let noise: Vec<f64> = (0..n)
        .map(|_| sigma * noise_rng.sample::<f64, _>(StandardNormal))
        .collect();

    let y = assemble_observation(&design, x_star, &pi_star, &noise);
    Ok(ProblemInstance {
        n,
        d,
        design,
        x_star: x_star.to_vec(),
        pi_star,
        sigma,
        noise,
        y,
        seed,
    })
}

/// `Π A x + w`.
pub fn assemble_observation(
    design: &DMatrix<f64>,
    x: &[f64],
    p: &Permutation,
    noise: &[f64],
) -> Vec<f64> {
    let clean = design * DVector::from_column_slice(x);
    p.apply(clean.as_slice())
        .into_iter()
        .zip(noise)
        .map(|(s, w)| s + w)
        .collect()
}

impl ProblemInstance {
    /// `A x*` before shuffling.
    pub fn clean_signal(&self) -> Vec<f64> {
        (&self.design * DVector::from_column_slice(&self.x_star))
            .as_slice()
            .to_vec()
    }

    /// Max-abs gap between the stored `y` and a fresh `Π* A x* + w`.
    pub fn reconstruction_error(&self) -> f64 {
        assemble_observation(&self.design, &self.x_star, &self.pi_star, &self.noise)
            .iter()
            .zip(&self.y)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn signal_energy(&self) -> f64 {
        self.x_star.iter().map(|v| v * v).sum()
    }

    /// `||x*||² / σ²`; infinite when `σ = 0`.
    pub fn snr(&self) -> f64 {
        snr(self.signal_energy(), self.sigma)
    }

    pub fn gamma(&self) -> Result<f64> {
        gamma(self.n, self.snr())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn snr(signal_energy: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        f64::INFINITY
    } else {
        signal_energy / (sigma * sigma)
    }
}

/// `Γ(n, snr) = log(1 + snr) / log n`, natural logarithms.
pub fn gamma(n: usize, snr: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid(format!("Γ needs n >= 2, got {n}")));
    }
    if snr.is_nan() || snr < 0.0 {
        return Err(Error::invalid(format!("snr must be >= 0, got {snr}")));
    }
    Ok(snr.ln_1p() / (n as f64).ln())
}

/// The snr with `Γ(n, snr) = gamma`, i.e. `n^Γ - 1`.
pub fn snr_for_gamma(n: usize, gamma: f64) -> f64 {
    (gamma * (n as f64).ln()).exp_m1()
}

/// `||x*||` that puts an instance with noise level `sigma` at `Γ(n, snr) = gamma`.
pub fn signal_norm_for_gamma(n: usize, gamma: f64, sigma: f64) -> f64 {
    sigma * snr_for_gamma(n, gamma).sqrt()
}

/// Projection-residual statistics of a candidate permutation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualStatistics {
    /// `||P⊥_Π y||²`.
    pub objective: f64,
    /// `||P⊥_Π* y||²`.
    pub truth_objective: f64,
    /// `objective - truth_objective`; `<= 0` iff the MLE weakly prefers `Π` to `Π*`.
    pub delta: f64,
    /// `T_Π = ||P⊥_Π Π* A x*||²`.
    pub t_pi: f64,
    /// `||P⊥_Π* w||²`, which equals `truth_objective` in exact arithmetic.
    pub noise_residual: f64,
}

impl ResidualStatistics {
    /// Relative gap between `||P⊥_Π* y||²` and `||P⊥_Π* w||²`.
    pub fn residual_identity_error(&self) -> f64 {
        let scale = self.truth_objective.abs().max(self.noise_residual.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.truth_objective - self.noise_residual).abs() / scale
        }
    }
}

pub fn delta_statistic(instance: &ProblemInstance, p: &Permutation) -> Result<ResidualStatistics> {
    let a = &instance.design;
    let objective = projection_residual(&instance.y, a, p)?;
    let truth_objective = projection_residual(&instance.y, a, &instance.pi_star)?;
    let shuffled_signal = instance.pi_star.apply(&instance.clean_signal());
    Ok(ResidualStatistics {
        objective,
        truth_objective,
        delta: objective - truth_objective,
        t_pi: projection_residual(&shuffled_signal, a, p)?,
        noise_residual: projection_residual(&instance.noise, a, &instance.pi_star)?,
    })
}

/// On-disk layout: `A` is stored row-major as a flat array.
#[derive(Serialize, Deserialize)]
struct InstanceDocument {
    n: usize,
    d: usize,
    seed: u64,
    sigma: f64,
    x_star: Vec<f64>,
    pi_star: Permutation,
    #[serde(rename = "A")]
    design: Vec<f64>,
    w: Vec<f64>,
    y: Vec<f64>,
}

impl From<ProblemInstance> for InstanceDocument {
    fn from(inst: ProblemInstance) -> Self {
        let design = (0..inst.n)
            .flat_map(|i| (0..inst.d).map(move |j| (i, j)))
            .map(|ij| inst.design[ij])
            .collect();
        InstanceDocument {
            n: inst.n,
            d: inst.d,
            seed: inst.seed,
            sigma: inst.sigma,
            x_star: inst.x_star,
            pi_star: inst.pi_star,
            design,
            w: inst.noise,
            y: inst.y,
        }
    }
}

impl TryFrom<InstanceDocument> for ProblemInstance {
    type Error = Error;

    fn try_from(doc: InstanceDocument) -> Result<Self> {
        let (n, d) = (doc.n, doc.d);
        if doc.design.len() != n * d
            || doc.x_star.len() != d
            || doc.pi_star.len() != n
            || doc.w.len() != n
            || doc.y.len() != n
        {
            return Err(Error::invalid(format!("instance document sizes inconsistent with n={n}, d={d}")));
        }
        Ok(ProblemInstance {
            n,
            d,
            design: DMatrix::from_row_slice(n, d, &doc.design),
            x_star: doc.x_star,
            pi_star: doc.pi_star,
            sigma: doc.sigma,
            noise: doc.w,
            y: doc.y,
            seed: doc.seed,
        })
    }
}
