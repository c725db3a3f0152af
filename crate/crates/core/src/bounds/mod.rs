//! Closed-form recovery conditions and tail bounds.
//!
//! All logarithms are natural. The sufficient condition and the strong
//! converse carry absolute constants that are never pinned down; callers
//! supply `c1` and reports state their guarantees up to those constants.

mod tails;
mod verify;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use tails::{
    chi2_lower_tail_bound, covariance_matrix, lemma7_covariance_eigs, projection_tail_bound, Lemma7Eigs,
};
pub use verify::{
    run_all_verifiers, verify_chi2_bound_mc, verify_hprob_mc, verify_lemma7, verify_partition_lemma,
    verify_projection_bound_mc, Chi2Verification, HprobCheck, Lemma7Check, PartitionLemmaCheck,
    ProjectionVerification, TailCheck, VerificationSummary, VerifierSettings, STD_ERROR_SLACK,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    /// Sufficient condition for exact recovery by the MLE.
    Thm1,
    /// Strong converse for exact recovery.
    Thm2,
    /// Converse with Hamming-ball side information of radius 2.
    Prop1,
    /// Converse for recovery up to Hamming distortion `D`.
    Thm3,
}

impl std::str::FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thm1" => Ok(BoundKind::Thm1),
            "thm2" => Ok(BoundKind::Thm2),
            "prop1" => Ok(BoundKind::Prop1),
            "thm3" => Ok(BoundKind::Thm3),
            other => Err(Error::Config(format!(
                "unknown result {other:?}; expected thm1, thm2, prop1 or thm3"
            ))),
        }
    }
}

/// Which way the inequality `lhs ? rhs` must go for the condition to hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<=")]
    AtMost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: BoundKind,
    #[serde(with = "crate::serde_float::map")]
    pub inputs: BTreeMap<String, f64>,
    #[serde(with = "crate::serde_float")]
    pub lhs: f64,
    #[serde(with = "crate::serde_float")]
    pub rhs: f64,
    pub direction: Direction,
    pub satisfied: bool,
    /// The condition rewritten as a bound on snr in linear units.
    #[serde(with = "crate::serde_float")]
    pub snr_threshold: f64,
    pub guarantee: String,
}

impl BoundReport {
    fn new(
        name: BoundKind,
        inputs: &[(&str, f64)],
        lhs: f64,
        rhs: f64,
        direction: Direction,
        snr_threshold: f64,
        guarantee: String,
    ) -> Self {
        let satisfied = match direction {
            Direction::AtLeast => lhs >= rhs,
            Direction::AtMost => lhs <= rhs,
        };
        BoundReport {
            name,
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            lhs,
            rhs,
            direction,
            satisfied,
            snr_threshold,
            guarantee,
        }
    }

    /// One-line human-readable verdict.
    pub fn verdict(&self) -> String {
        let (op, snr_op) = match self.direction {
            Direction::AtLeast => (">=", ">="),
            Direction::AtMost => ("<=", "<="),
        };
        let snr = self.inputs.get("snr").copied().unwrap_or(f64::NAN);
        format!(
            "{:?}: {} (requires lhs {op} rhs: {:.6} vs {:.6} nats; snr {snr_op} {:.6e}, given {:.6e}){}",
            self.name,
            if self.satisfied { "SATISFIED" } else { "not satisfied" },
            self.lhs,
            self.rhs,
            self.snr_threshold,
            snr,
            if self.satisfied { format!(": {}", self.guarantee) } else { String::new() },
        )
    }
}

fn check_snr(snr: f64) -> Result<()> {
    if snr.is_nan() || snr < 0.0 {
        return Err(Error::invalid(format!("snr must be >= 0, got {snr}")));
    }
    Ok(())
}

/// `log snr >= (c1 n/(n-d) + ε) log n` implies the MLE errs with
/// probability at most `c2 n^(-2ε)`.
pub fn thm1_sufficient(n: usize, d: usize, snr: f64, epsilon: f64, c1: f64) -> Result<BoundReport> {
    check_snr(snr)?;
    if d == 0 || d >= n {
        return Err(Error::invalid(format!("need 1 <= d < n, got n={n}, d={d}")));
    }
    let nf = n as f64;
    if !(epsilon > 0.0 && epsilon < nf.sqrt()) {
        return Err(Error::invalid(format!("need 0 < epsilon < sqrt(n), got {epsilon}")));
    }
    if !(c1 > 0.0) {
        return Err(Error::invalid(format!("c1 must be positive, got {c1}")));
    }
    let rhs = (c1 * nf / (nf - d as f64) + epsilon) * nf.ln();
    Ok(BoundReport::new(
        BoundKind::Thm1,
        &[("n", nf), ("d", d as f64), ("snr", snr), ("epsilon", epsilon), ("c1", c1)],
        snr.ln(),
        rhs,
        Direction::AtLeast,
        rhs.exp(),
        format!(
            "P(MLE != truth) <= c2 * n^(-{:.6}) (up to unspecified absolute constants)",
            2.0 * epsilon
        ),
    ))
}

/// `2 + log(1 + snr) <= (2 - δ) log n` implies every estimator errs with
/// probability at least `1 - c3 exp(-c4 n δ)`.
pub fn thm2_converse(n: usize, snr: f64, delta: f64) -> Result<BoundReport> {
    check_snr(snr)?;
    if !(delta > 0.0 && delta < 2.0) {
        return Err(Error::invalid(format!("need delta in (0, 2), got {delta}")));
    }
    if n < 2 {
        return Err(Error::invalid(format!("need n >= 2, got {n}")));
    }
    let nf = n as f64;
    let rhs = (2.0 - delta) * nf.ln();
    Ok(BoundReport::new(
        BoundKind::Thm2,
        &[("n", nf), ("snr", snr), ("delta", delta)],
        2.0 + snr.ln_1p(),
        rhs,
        Direction::AtMost,
        (rhs - 2.0).exp_m1(),
        format!(
            "every estimator fails with probability >= 1 - c3 * exp(-c4 * {:.6}) (up to unspecified absolute constants)",
            nf * delta
        ),
    ))
}

/// `log(1 + snr) <= (8/9) log(n/8)` implies error probability at least 1/2
/// for every estimator, even knowing `d_H(Π*, I) <= 2`.
pub fn prop1_side_info(n: usize, snr: f64) -> Result<BoundReport> {
    check_snr(snr)?;
    if n < 9 {
        return Err(Error::OutOfValidity(format!("side-information converse needs n >= 9, got {n}")));
    }
    let nf = n as f64;
    let rhs = 8.0 / 9.0 * (nf / 8.0).ln();
    Ok(BoundReport::new(
        BoundKind::Prop1,
        &[("n", nf), ("snr", snr)],
        snr.ln_1p(),
        rhs,
        Direction::AtMost,
        rhs.exp_m1(),
        "every estimator fails with probability >= 1/2, even knowing d_H(truth, identity) <= 2".into(),
    ))
}

/// `log(1 + snr) <= ((n-D+1)/n) log((n-D+1)/(2e))` implies
/// `P(d_H(Π̂, Π*) >= D) >= 1/2` for every estimator.
pub fn thm3_approx_converse(n: usize, snr: f64, distortion: usize) -> Result<BoundReport> {
    check_snr(snr)?;
    if !(distortion > 2 && distortion < n) {
        return Err(Error::invalid(format!(
            "need 2 < D <= n - 1, got D = {distortion}, n = {n}"
        )));
    }
    let nf = n as f64;
    let m = (n - distortion + 1) as f64;
    let rhs = m / nf * (m / (2.0 * std::f64::consts::E)).ln();
    Ok(BoundReport::new(
        BoundKind::Thm3,
        &[("n", nf), ("snr", snr), ("D", distortion as f64)],
        snr.ln_1p(),
        rhs,
        Direction::AtMost,
        rhs.exp_m1(),
        format!("every estimator has P(d_H(estimate, truth) >= {distortion}) >= 1/2"),
    ))
}
