//! Linear readout trained by pseudoinverse least squares, and the scores
//! used to evaluate it.

use alloc::vec::Vec;

use crate::linalg::{RealMatrix, Svd, DEFAULT_RCOND};
use crate::{Error, Result};

/// Readout weights; the last entry multiplies the bias column.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReadoutWeights {
    weights: Vec<f64>,
}

impl ReadoutWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if !weights.iter().all(|w| w.is_finite()) {
            return Err(Error::NonFinite {
                what: "readout weights",
            });
        }
        Ok(Self { weights })
    }

    pub fn zeros(width: usize) -> Self {
        Self {
            weights: alloc::vec![0.0; width],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.weights
    }
}

/// Factorized design matrix that can be solved against many targets.
///
/// With `ridge = 0` the solution is `X⁺ y`; a positive `ridge` replaces
/// each `1/σ` by `σ / (σ² + λ)`.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    svd: Svd,
    factors: Vec<f64>,
    rows: usize,
}

impl LeastSquares {
    pub fn new(x: &RealMatrix) -> Result<Self> {
        Self::with_ridge(x, 0.0)
    }

    pub fn with_ridge(x: &RealMatrix, ridge: f64) -> Result<Self> {
        if x.rows() == 0 || x.cols() == 0 {
            return Err(Error::Empty { what: "training set" });
        }
        if !(ridge >= 0.0 && ridge.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "ridge_lambda",
                reason: "must be finite and non-negative",
            });
        }
        let svd = Svd::new(x)?;
        let cutoff = DEFAULT_RCOND * svd.max_singular_value();
        let factors = svd
            .singular_values
            .iter()
            .map(|&s| {
                if ridge > 0.0 {
                    s / (s * s + ridge)
                } else if s > cutoff && s > 0.0 {
                    1.0 / s
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self {
            svd,
            factors,
            rows: x.rows(),
        })
    }

    /// Weights `V diag(f) Uᵀ y`.
    pub fn solve(&self, y: &[f64]) -> Result<ReadoutWeights> {
        if y.len() != self.rows {
            return Err(Error::LengthMismatch {
                expected: self.rows,
                found: y.len(),
            });
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                what: "readout targets",
            });
        }
        let (n, r) = self.svd.v.shape();
        let mut coeff = alloc::vec![0.0; r];
        for (i, &yi) in y.iter().enumerate() {
            for (c, &u) in coeff.iter_mut().zip(self.svd.u.row(i)) {
                *c += u * yi;
            }
        }
        for (c, f) in coeff.iter_mut().zip(&self.factors) {
            *c *= f;
        }
        let weights = (0..n)
            .map(|i| self.svd.v.row(i).iter().zip(&coeff).map(|(v, c)| v * c).sum())
            .collect();
        ReadoutWeights::new(weights)
    }
}

/// Least-squares fit `w = X⁺ y`.
pub fn fit_linear(x: &RealMatrix, y: &[f64]) -> Result<ReadoutWeights> {
    LeastSquares::new(x)?.solve(y)
}

/// Ridge-regularized fit; `lambda = 0` is the plain pseudoinverse fit.
pub fn fit_ridge(x: &RealMatrix, y: &[f64], lambda: f64) -> Result<ReadoutWeights> {
    LeastSquares::with_ridge(x, lambda)?.solve(y)
}

/// `ŷ = X w`.
pub fn predict(x: &RealMatrix, w: &ReadoutWeights) -> Result<Vec<f64>> {
    if x.cols() != w.len() {
        return Err(Error::LengthMismatch {
            expected: x.cols(),
            found: w.len(),
        });
    }
    x.mul_vec(w.as_slice())
}

/// Mean squared residual.
pub fn mse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pair(y, yhat)?;
    let sum: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / y.len() as f64)
}

/// A score together with a flag set when the inputs were degenerate.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Score {
    pub value: f64,
    pub degenerate: bool,
}

/// Squared Pearson correlation `Cov²(y, ŷ) / (Var y · Var ŷ)`.
///
/// Returns a score of 0 with `degenerate` set when either side has zero
/// variance.
pub fn squared_correlation(y: &[f64], yhat: &[f64]) -> Result<Score> {
    check_pair(y, yhat)?;
    let n = y.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    let mh = yhat.iter().sum::<f64>() / n;
    let (mut cov, mut vy, mut vh) = (0.0, 0.0, 0.0);
    for (a, b) in y.iter().zip(yhat) {
        let (da, db) = (a - my, b - mh);
        cov += da * db;
        vy += da * da;
        vh += db * db;
    }
    if !(vy > 0.0 && vh > 0.0) || !(cov.is_finite() && vy.is_finite() && vh.is_finite()) {
        return Ok(Score {
            value: 0.0,
            degenerate: true,
        });
    }
    let value = ((cov / vy) * (cov / vh)).clamp(0.0, 1.0);
    Ok(Score {
        value,
        degenerate: false,
    })
}

fn check_pair(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.is_empty() {
        return Err(Error::Empty { what: "score input" });
    }
    if y.len() != yhat.len() {
        return Err(Error::LengthMismatch {
            expected: y.len(),
            found: yhat.len(),
        });
    }
    Ok(())
}
