use std::fmt::Write as _;
use std::path::Path;

use super::TrialBatch;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "n,d,sigma,snr,gamma,estimator,trials,successes,freq,stderr";

// 17 significant digits round-trips every f64.
fn float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

/// One header line plus one row per grid point.
pub fn csv_string(batch: &TrialBatch) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for a in &batch.aggregates {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            a.n,
            a.d,
            float(a.sigma),
            float(a.snr),
            float(a.gamma),
            a.estimator,
            a.trials,
            a.successes,
            float(a.freq),
            float(a.stderr),
        );
    }
    out
}

pub fn emit_csv(batch: &TrialBatch, path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(batch)).map_err(|e| Error::io(path, e))
}
