use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use super::ObservableSet;
use crate::linalg::RealMatrix;
use crate::{Error, Result};

/// Per-step reservoir features. Each row is
/// `[v=1: O_1..O_M, v=2: O_1..O_M, …, v=V: O_1..O_M, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    values: RealMatrix,
    labels: Vec<String>,
}

impl FeatureMatrix {
    /// Column labels `v{v}_{label}` followed by `bias`.
    pub fn column_labels(obs: &ObservableSet, v: usize) -> Vec<String> {
        let mut labels = Vec::with_capacity(v * obs.len() + 1);
        for node in 1..=v {
            for l in obs.labels() {
                labels.push(format!("v{node}_{l}"));
            }
        }
        labels.push(String::from("bias"));
        labels
    }

    pub(crate) fn from_rows(values: RealMatrix, labels: Vec<String>) -> Self {
        debug_assert_eq!(values.cols(), labels.len());
        Self { values, labels }
    }

    /// Builds a feature matrix from raw rows that already carry the bias
    /// column, checking the bias and label count.
    pub fn new(values: RealMatrix, labels: Vec<String>) -> Result<Self> {
        if values.cols() != labels.len() || values.cols() == 0 {
            return Err(Error::LengthMismatch {
                expected: labels.len(),
                found: values.cols(),
            });
        }
        let last = values.cols() - 1;
        if (0..values.rows()).any(|k| values[(k, last)] != 1.0) {
            return Err(Error::InvalidParameter {
                name: "features",
                reason: "last column must be the constant bias 1",
            });
        }
        Ok(Self { values, labels })
    }

    pub fn steps(&self) -> usize {
        self.values.rows()
    }

    /// Row width including the bias column.
    pub fn width(&self) -> usize {
        self.values.cols()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn row(&self, k: usize) -> &[f64] {
        self.values.row(k)
    }

    /// Row `k` without the trailing bias.
    pub fn reservoir_row(&self, k: usize) -> &[f64] {
        let r = self.values.row(k);
        &r[..r.len() - 1]
    }

    pub fn as_matrix(&self) -> &RealMatrix {
        &self.values
    }

    /// Copy of the rows in `range`.
    pub fn rows(&self, range: Range<usize>) -> Result<RealMatrix> {
        self.values.row_block(range.start, range.end)
    }
}
