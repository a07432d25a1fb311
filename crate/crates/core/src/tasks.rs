//! Benchmark inputs and targets: uniform input streams, delayed recall,
//! and NARMA sequences, plus the washout/train/validation split.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::RealMatrix;
use crate::reservoir::FeatureMatrix;
use crate::{Error, Result};

/// Magnitude beyond which a NARMA sequence is treated as diverged.
pub const NARMA_DIVERGENCE: f64 = 10.0;

/// Upper end of the raw NARMA input range.
pub const NARMA_INPUT_MAX: f64 = 0.5;

/// Step counts of the three consecutive segments of a sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SplitSpec {
    pub washout: usize,
    pub train: usize,
    pub val: usize,
}

impl SplitSpec {
    pub fn new(washout: usize, train: usize, val: usize) -> Result<Self> {
        let split = Self { washout, train, val };
        split.validate()?;
        Ok(split)
    }

    pub fn validate(&self) -> Result<()> {
        if self.train == 0 {
            return Err(Error::InvalidParameter {
                name: "split.train",
                reason: "must be at least 1",
            });
        }
        if self.val == 0 {
            return Err(Error::InvalidParameter {
                name: "split.val",
                reason: "must be at least 1",
            });
        }
        Ok(())
    }

    pub fn total(&self) -> usize {
        self.washout + self.train + self.val
    }

    pub fn train_range(&self) -> Range<usize> {
        self.washout..self.washout + self.train
    }

    pub fn val_range(&self) -> Range<usize> {
        self.washout + self.train..self.total()
    }
}

/// NARMA recurrence constants `(a, b, c, d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NarmaConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Default for NarmaConstants {
    fn default() -> Self {
        Self {
            a: 0.3,
            b: 0.05,
            c: 1.5,
            d: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TaskMeta {
    Stm { tau_d: usize },
    Narma { order: usize, u: Vec<f64> },
}

/// Input/target pairs aligned by step, with their split.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskDataset {
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    pub split: SplitSpec,
    pub meta: TaskMeta,
}

impl TaskDataset {
    pub fn new(s: Vec<f64>, y: Vec<f64>, split: SplitSpec, meta: TaskMeta) -> Result<Self> {
        split.validate()?;
        if s.len() != split.total() {
            return Err(Error::LengthMismatch {
                expected: split.total(),
                found: s.len(),
            });
        }
        if y.len() != s.len() {
            return Err(Error::LengthMismatch {
                expected: s.len(),
                found: y.len(),
            });
        }
        if let TaskMeta::Narma { u, .. } = &meta {
            if u.len() != s.len() {
                return Err(Error::LengthMismatch {
                    expected: s.len(),
                    found: u.len(),
                });
            }
        }
        if let Some(&bad) = s.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InputOutOfRange { value: bad });
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { what: "targets" });
        }
        Ok(Self { s, y, split, meta })
    }

    /// Delayed-recall dataset over the input stream `s`.
    pub fn stm(s: Vec<f64>, tau_d: usize, split: SplitSpec) -> Result<Self> {
        let y = stm_targets(&s, tau_d, split.washout)?;
        Self::new(s, y, split, TaskMeta::Stm { tau_d })
    }

    /// NARMA dataset from raw inputs `u ∈ [0, 0.5]`.
    pub fn narma(u: Vec<f64>, order: usize, consts: NarmaConstants, split: SplitSpec) -> Result<Self> {
        let y = narma_series(&u, order, consts)?;
        let s = scale_inputs(&u, NARMA_INPUT_MAX)?;
        Self::new(s, y, split, TaskMeta::Narma { order, u })
    }
}

/// Feature rows and targets of one segment.
#[derive(Clone, Debug)]
pub struct DataView {
    pub x: RealMatrix,
    pub y: Vec<f64>,
}

/// I.i.d. draws from `[lo, hi)`, deterministic in `seed`.
pub fn gen_uniform_inputs(length: usize, lo: f64, hi: f64, seed: u64) -> Result<Vec<f64>> {
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "input range",
            reason: "requires finite lo < hi",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..length).map(|_| rng.random_range(lo..hi)).collect())
}

/// `y_k = s_{k - τ_d}`. Steps before the first defined target are filled
/// with zero and must fall inside the washout.
pub fn stm_targets(s: &[f64], tau_d: usize, washout: usize) -> Result<Vec<f64>> {
    if tau_d > washout {
        return Err(Error::DelayTooLong { tau_d, washout });
    }
    let mut y = vec![0.0; s.len()];
    let lag = tau_d.min(s.len());
    y[lag..].copy_from_slice(&s[..s.len() - lag]);
    Ok(y)
}

/// NARMA-`n` output for raw inputs `u`, with `y_k = 0` for the first `n`
/// steps and the history average divided by `n`.
pub fn narma_series(u: &[f64], n: usize, consts: NarmaConstants) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "order",
            reason: "must be at least 1",
        });
    }
    if let Some(&bad) = u.iter().find(|v| !v.is_finite()) {
        return Err(Error::InputOutOfRange { value: bad });
    }
    let NarmaConstants { a, b, c, d } = consts;
    let mut y = vec![0.0; u.len()];
    for k in n..u.len() {
        let prev = y[k - 1];
        let mean = y[k - n..k].iter().sum::<f64>() / n as f64;
        let next = a * prev + b * prev * mean + c * u[k - n] * u[k - 1] + d;
        if !next.is_finite() || next.abs() > NARMA_DIVERGENCE {
            return Err(Error::NarmaDiverged { step: k, value: next });
        }
        y[k] = next;
    }
    Ok(y)
}

/// Min-max scaling against the declared range `[0, u_max]`.
pub fn scale_inputs(u: &[f64], u_max: f64) -> Result<Vec<f64>> {
    if !(u_max > 0.0 && u_max.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "u_max",
            reason: "must be positive and finite",
        });
    }
    u.iter()
        .map(|&v| {
            if (0.0..=u_max).contains(&v) {
                Ok((v / u_max).min(1.0))
            } else {
                Err(Error::ValueOutOfRange { value: v, max: u_max })
            }
        })
        .collect()
}

/// Splits aligned feature rows and targets into train and validation views,
/// discarding the washout.
pub fn split_rows(features: &FeatureMatrix, y: &[f64], split: &SplitSpec) -> Result<(DataView, DataView)> {
    split.validate()?;
    if features.steps() != split.total() {
        return Err(Error::LengthMismatch {
            expected: split.total(),
            found: features.steps(),
        });
    }
    if y.len() != split.total() {
        return Err(Error::LengthMismatch {
            expected: split.total(),
            found: y.len(),
        });
    }
    let view = |r: Range<usize>| -> Result<DataView> {
        Ok(DataView {
            x: features.rows(r.clone())?,
            y: y[r].to_vec(),
        })
    };
    Ok((view(split.train_range())?, view(split.val_range())?))
}

pub fn split_dataset(ds: &TaskDataset, features: &FeatureMatrix) -> Result<(DataView, DataView)> {
    split_rows(features, &ds.y, &ds.split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;

    #[test]
    fn uniform_inputs_range_mean_and_determinism() {
        let u = gen_uniform_inputs(100_000, 0.0, 1.0, 7).unwrap();
        assert!(u.iter().all(|v| (0.0..1.0).contains(v)));
        let mean = u.iter().sum::<f64>() / u.len() as f64;
        assert!((mean - 0.5).abs() < 0.01);
        let w = gen_uniform_inputs(100_000, 0.0, 0.5, 7).unwrap();
        assert!(w.iter().all(|v| (0.0..0.5).contains(v)));
        assert_eq!(u[..10], gen_uniform_inputs(10, 0.0, 1.0, 7).unwrap()[..]);
        assert_ne!(u[..10], gen_uniform_inputs(10, 0.0, 1.0, 8).unwrap()[..]);
        assert!(gen_uniform_inputs(5, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn stm_shift() {
        let s = [0.1, 0.2, 0.3];
        assert_eq!(stm_targets(&s, 0, 0).unwrap(), s.to_vec());
        let y = stm_targets(&s, 1, 1).unwrap();
        assert_eq!((y[1], y[2]), (0.1, 0.2));
        assert!(matches!(stm_targets(&s, 2, 1), Err(Error::DelayTooLong { .. })));
    }

    #[test]
    fn narma_zero_input_fixed_point() {
        let root = (0.7 - (0.49f64 - 4.0 * 0.05 * 0.1).sqrt()) / (2.0 * 0.05);
        for n in [1, 5, 10, 20, 50] {
            let y = narma_series(&[0.0; 201], n, NarmaConstants::default()).unwrap();
            assert!((y[200] - root).abs() < 1e-6, "order {n}: {}", y[200]);
            assert!((y[200] - 0.144335).abs() < 1e-4);
        }
    }

    #[test]
    fn narma_order_one_reduction() {
        let u = gen_uniform_inputs(50, 0.0, 0.5, 1).unwrap();
        let y = narma_series(&u, 1, NarmaConstants::default()).unwrap();
        for k in 1..50 {
            let p = y[k - 1];
            let want = 0.3 * p + 0.05 * p * p + 1.5 * u[k - 1] * u[k - 1] + 0.1;
            assert!((y[k] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn narma_initial_zeros_and_divergence() {
        let y = narma_series(&[0.5; 10], 4, NarmaConstants::default()).unwrap();
        assert!(y[..4].iter().all(|&v| v == 0.0));
        assert!(y[4] > 0.0);
        let wild = NarmaConstants {
            a: 2.0,
            ..NarmaConstants::default()
        };
        assert!(matches!(
            narma_series(&[0.5; 100], 2, wild),
            Err(Error::NarmaDiverged { .. })
        ));
        assert!(narma_series(&[0.1], 0, NarmaConstants::default()).is_err());
    }

    #[test]
    fn scaling() {
        assert_eq!(scale_inputs(&[0.0, 0.5, 0.25], 0.5).unwrap(), [0.0, 1.0, 0.5]);
        assert!(scale_inputs(&[0.6], 0.5).is_err());
        assert!(scale_inputs(&[-0.1], 0.5).is_err());
        assert!(scale_inputs(&[0.1], 0.0).is_err());
    }

    #[test]
    fn split_ranges() {
        let sp = SplitSpec::new(1000, 3000, 1000).unwrap();
        assert_eq!(sp.train_range(), 1000..4000);
        assert_eq!(sp.val_range(), 4000..5000);
        let z = SplitSpec::new(0, 1, 1).unwrap();
        assert_eq!(z.train_range(), 0..1);
        assert_eq!(z.val_range(), 1..2);
        assert!(SplitSpec::new(5, 0, 1).is_err());
        assert!(SplitSpec::new(5, 1, 0).is_err());
    }

    #[test]
    fn split_views_follow_step_index() {
        let split = SplitSpec::new(2, 3, 1).unwrap();
        let values = RealMatrix::from_fn(6, 2, |i, j| if j == 1 { 1.0 } else { i as f64 });
        let labels = alloc::vec![String::from("f"), String::from("bias")];
        let fm = FeatureMatrix::new(values, labels).unwrap();
        let s: Vec<f64> = (0..6).map(|k| k as f64 / 10.0).collect();
        let ds = TaskDataset::stm(s, 1, split).unwrap();
        let (train, val) = split_dataset(&ds, &fm).unwrap();
        assert_eq!(train.x.rows(), 3);
        assert_eq!(train.x[(0, 0)], 2.0);
        assert_eq!(train.y, [0.1, 0.2, 0.3]);
        assert_eq!(val.x[(0, 0)], 5.0);
        assert_eq!(val.y, [0.4]);
    }

    #[test]
    fn dataset_validation() {
        let split = SplitSpec::new(0, 1, 1).unwrap();
        assert!(TaskDataset::new(
            alloc::vec![0.5; 3],
            alloc::vec![0.0; 3],
            split,
            TaskMeta::Stm { tau_d: 0 }
        )
        .is_err());
        assert!(TaskDataset::new(
            alloc::vec![1.5, 0.0],
            alloc::vec![0.0; 2],
            split,
            TaskMeta::Stm { tau_d: 0 }
        )
        .is_err());
        let ds = TaskDataset::narma(alloc::vec![0.25, 0.5], 1, NarmaConstants::default(), split).unwrap();
        assert_eq!(ds.s, [0.5, 1.0]);
    }
}
