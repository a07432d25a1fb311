//! Echo-state diagnostics: two copies of the reservoir driven by the same
//! inputs from different initial states.

use alloc::vec;
use alloc::vec::Vec;

use crate::hamiltonian::HamiltonianRealization;
use crate::linalg::{trace_norm, DensityMatrix};
use crate::reservoir::{encode_input, ObservableKind, ObservableSet, Reservoir, ReservoirConfig, ReservoirState};
use crate::{Error, Result};

/// Distances between the two trajectories after input step `step`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EspRecord {
    pub step: usize,
    /// Squared Euclidean distance between the feature rows, bias excluded.
    pub sqnorm_diff: f64,
    /// `Tr|ρ¹ - ρ²|` on the joint register.
    pub trace_distance: f64,
    /// `Tr|ρ¹ - ρ²|` on the system marginals.
    pub trace_distance_sys: f64,
}

/// `Tr|ρ¹ - ρ²|` between two density matrices.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    trace_norm(&a.matrix().checked_sub(b.matrix())?)
}

/// Two reservoir states stepped in lockstep under shared inputs.
///
/// Features are always the single-qubit `Z_i` expectations.
pub struct DualRun<'a> {
    res: Reservoir<'a>,
    first: ReservoirState,
    second: ReservoirState,
    buf: [Vec<f64>; 2],
    steps: usize,
}

impl<'a> DualRun<'a> {
    pub fn new(
        real: &'a HamiltonianRealization,
        cfg: &ReservoirConfig,
        first: &DensityMatrix,
        second: &DensityMatrix,
    ) -> Result<Self> {
        let n_sys = real.params().n_sys;
        let obs = ObservableSet::new(ObservableKind::ZOnly, n_sys)?;
        let res = Reservoir::with_observables(real, cfg, obs)?;
        let first = res.state(first)?;
        let second = res.state(second)?;
        let m = res.observables().len();
        Ok(Self {
            res,
            first,
            second,
            buf: [vec![0.0; m], vec![0.0; m]],
            steps: 0,
        })
    }

    /// Starts from `I/2^N` and `|0…0⟩⟨0…0|`.
    pub fn standard(real: &'a HamiltonianRealization, cfg: &ReservoirConfig) -> Result<Self> {
        let n = real.qubits();
        Self::new(
            real,
            cfg,
            &DensityMatrix::maximally_mixed(n)?,
            &DensityMatrix::zero_state(n)?,
        )
    }

    pub fn reservoir(&self) -> &Reservoir<'a> {
        &self.res
    }

    pub fn states(&self) -> (&ReservoirState, &ReservoirState) {
        (&self.first, &self.second)
    }

    /// Loads input `s` into both copies without evolving.
    pub fn inject(&mut self, s: f64) -> Result<()> {
        let rho_in = encode_input(s)?;
        self.res.inject(&mut self.first, &rho_in)?;
        self.res.inject(&mut self.second, &rho_in)
    }

    /// One virtual-node interval of unitary evolution, returning the squared
    /// feature distance measured afterwards.
    pub fn advance(&mut self) -> Result<f64> {
        self.res.advance(&mut self.first);
        self.res.advance(&mut self.second);
        let [fa, fb] = &mut self.buf;
        self.res.measure_into(&self.first, fa)?;
        self.res.measure_into(&self.second, fb)?;
        Ok(fa.iter().zip(fb.iter()).map(|(a, b)| (a - b) * (a - b)).sum())
    }

    pub fn trace_distance(&self) -> Result<f64> {
        self.res.trace_distance(&self.first, &self.second)
    }

    pub fn system_trace_distance(&self) -> Result<f64> {
        self.res.system_trace_distance(&self.first, &self.second)
    }

    /// Full input step: injection, then `V` evolve-and-measure rounds.
    pub fn step(&mut self, s: f64) -> Result<EspRecord> {
        let step = self.steps;
        let record = (|| {
            self.inject(s)?;
            let mut sqnorm_diff = 0.0;
            for _ in 0..self.res.config().v {
                sqnorm_diff += self.advance()?;
            }
            Ok(EspRecord {
                step,
                sqnorm_diff,
                trace_distance: self.trace_distance()?,
                trace_distance_sys: self.system_trace_distance()?,
            })
        })()
        .map_err(|e: Error| e.at_step(step))?;
        self.steps += 1;
        Ok(record)
    }
}

/// Runs both trajectories from `I/2^N` and `|0…0⟩⟨0…0|`, one record per input.
pub fn dual_trajectory(real: &HamiltonianRealization, inputs: &[f64], cfg: &ReservoirConfig) -> Result<Vec<EspRecord>> {
    let mut run = DualRun::standard(real, cfg)?;
    inputs.iter().map(|&s| run.step(s)).collect()
}

/// Like [`dual_trajectory`] with explicit initial states.
pub fn dual_trajectory_from(
    real: &HamiltonianRealization,
    inputs: &[f64],
    cfg: &ReservoirConfig,
    first: &DensityMatrix,
    second: &DensityMatrix,
) -> Result<Vec<EspRecord>> {
    let mut run = DualRun::new(real, cfg, first, second)?;
    inputs.iter().map(|&s| run.step(s)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WindowStats {
    pub mean_sqnorm: f64,
    pub max_sqnorm: f64,
    pub mean_trace_distance: f64,
}

/// Statistics over records with `from <= step < to`.
pub fn window_stats(records: &[EspRecord], from: usize, to: usize) -> Result<WindowStats> {
    let window: Vec<&EspRecord> = records.iter().filter(|r| (from..to).contains(&r.step)).collect();
    if window.is_empty() {
        return Err(Error::Empty { what: "record window" });
    }
    let n = window.len() as f64;
    Ok(WindowStats {
        mean_sqnorm: window.iter().map(|r| r.sqnorm_diff).sum::<f64>() / n,
        max_sqnorm: window.iter().map(|r| r.sqnorm_diff).fold(0.0, f64::max),
        mean_trace_distance: window.iter().map(|r| r.trace_distance).sum::<f64>() / n,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Register {
    Full,
    Sys,
}

/// Counts step-to-step increases of the trace distance larger than `tol`
/// and sums those increases.
pub fn backflow_count(records: &[EspRecord], register: Register, tol: f64) -> (usize, f64) {
    let pick = |r: &EspRecord| match register {
        Register::Full => r.trace_distance,
        Register::Sys => r.trace_distance_sys,
    };
    let mut count = 0;
    let mut total = 0.0;
    for pair in records.windows(2) {
        let delta = pick(&pair[1]) - pick(&pair[0]);
        if delta > tol {
            count += 1;
            total += delta;
        }
    }
    (count, total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::ReservoirParams;
    use crate::tasks::gen_uniform_inputs;

    fn records(values: &[f64]) -> Vec<EspRecord> {
        values
            .iter()
            .enumerate()
            .map(|(step, &d)| EspRecord {
                step,
                sqnorm_diff: d,
                trace_distance: d,
                trace_distance_sys: d,
            })
            .collect()
    }

    #[test]
    fn initial_trace_distance_n7() {
        let a = DensityMatrix::maximally_mixed(7).unwrap();
        let b = DensityMatrix::zero_state(7).unwrap();
        let d = trace_distance(&a, &b).unwrap();
        assert!((d - 2.0 * (1.0 - 1.0 / 128.0)).abs() < 1e-10);
    }

    #[test]
    fn backflow_examples() {
        assert_eq!(
            backflow_count(&records(&[1.0, 0.8, 0.3]), Register::Sys, 1e-6),
            (0, 0.0)
        );
        let (c, t) = backflow_count(&records(&[1.0, 0.5, 0.7]), Register::Sys, 1e-6);
        assert_eq!(c, 1);
        assert!((t - 0.2).abs() < 1e-12);
        assert_eq!(backflow_count(&records(&[1.0]), Register::Full, 1e-6), (0, 0.0));
    }

    #[test]
    fn window_examples() {
        let w = window_stats(&records(&[0.0; 5]), 0, 5).unwrap();
        assert_eq!((w.mean_sqnorm, w.max_sqnorm, w.mean_trace_distance), (0.0, 0.0, 0.0));
        let w = window_stats(&records(&[9.0, 0.4, 0.4, 0.4]), 1, 4).unwrap();
        assert!((w.mean_sqnorm - 0.4).abs() < 1e-15);
        assert_eq!(w.max_sqnorm, 0.4);
        assert!(window_stats(&records(&[1.0; 3]), 5, 9).is_err());
    }

    fn small() -> (HamiltonianRealization, ReservoirConfig, Vec<f64>) {
        let params = ReservoirParams::new(2, 2).with_seed(4);
        let real = HamiltonianRealization::sample(&params).unwrap();
        let cfg = ReservoirConfig::new(0.5, 3, ObservableKind::ZAndZz);
        let inputs = gen_uniform_inputs(30, 0.0, 1.0, 2).unwrap();
        (real, cfg, inputs)
    }

    #[test]
    fn identical_starts_never_separate() {
        let (real, cfg, inputs) = small();
        let rho = DensityMatrix::zero_state(4).unwrap();
        let recs = dual_trajectory_from(&real, &inputs, &cfg, &rho, &rho).unwrap();
        assert!(recs.iter().all(|r| r.sqnorm_diff == 0.0 && r.trace_distance < 1e-12));
    }

    #[test]
    fn swap_symmetry_and_bounds() {
        let (real, cfg, inputs) = small();
        let a = DensityMatrix::maximally_mixed(4).unwrap();
        let b = DensityMatrix::zero_state(4).unwrap();
        let ab = dual_trajectory_from(&real, &inputs, &cfg, &a, &b).unwrap();
        let ba = dual_trajectory_from(&real, &inputs, &cfg, &b, &a).unwrap();
        assert_eq!(ab, dual_trajectory(&real, &inputs, &cfg).unwrap());
        for (x, y) in ab.iter().zip(&ba) {
            assert!((x.sqnorm_diff - y.sqnorm_diff).abs() < 1e-12);
            assert!((x.trace_distance - y.trace_distance).abs() < 1e-10);
            assert!((x.trace_distance_sys - y.trace_distance_sys).abs() < 1e-10);
            assert!(x.sqnorm_diff <= 2.0 * 3.0 * 4.0);
            assert!((0.0..=2.0 + 1e-12).contains(&x.trace_distance));
        }
    }
}
