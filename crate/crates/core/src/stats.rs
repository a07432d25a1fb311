//! Summary statistics over per-seed scores.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::{Error, Result};

/// Arithmetic mean and population standard deviation.
pub fn aggregate(scores: &[f64]) -> Result<(f64, f64)> {
    if scores.is_empty() {
        return Err(Error::Empty { what: "scores" });
    }
    if !scores.iter().all(|s| s.is_finite()) {
        return Err(Error::NonFinite { what: "scores" });
    }
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let var = scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}
