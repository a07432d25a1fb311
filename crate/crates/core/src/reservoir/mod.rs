//! Input injection, unitary evolution and time-multiplexed readout.
//!
//! Per input `s_k` the joint state is updated as
//! `ρ ← U (ρ_in(s_k) ⊗ Tr_in ρ) U^H`, where the input qubit is reset to
//! `|ψ_s⟩ = √(1-s)|0⟩ + √s|1⟩`. The evolution over one input interval is
//! split into `V` virtual nodes and the system observables are read after
//! each one.

mod engine;
mod features;
mod observables;

pub use engine::{Reservoir, ReservoirState};
pub use features::FeatureMatrix;
pub use observables::{Observable, ObservableKind, ObservableSet};

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::hamiltonian::HamiltonianRealization;
use crate::linalg::{partial_trace, scatter_offsets, ComplexMatrix, DensityMatrix, C64};
use crate::{Error, Result};

/// How the per-input evolution time is distributed over virtual nodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Multiplex {
    /// `V` sub-steps of `τ/V`; total evolution `τ` per input.
    #[default]
    SubStep,
    /// `V` nodes of `τ` each; total evolution `Vτ` per input.
    PerNode,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReservoirConfig {
    /// Evolution time per input step.
    pub tau: f64,
    /// Virtual nodes per input step.
    pub v: usize,
    pub observables: ObservableKind,
    pub multiplex: Multiplex,
    /// System qubit receiving the input.
    pub input_qubit: usize,
}

impl ReservoirConfig {
    pub fn new(tau: f64, v: usize, observables: ObservableKind) -> Self {
        Self {
            tau,
            v,
            observables,
            multiplex: Multiplex::SubStep,
            input_qubit: 0,
        }
    }

    pub fn with_multiplex(mut self, multiplex: Multiplex) -> Self {
        self.multiplex = multiplex;
        self
    }

    pub fn validate(&self, n_sys: usize) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tau",
                reason: "must be finite and positive",
            });
        }
        if self.v == 0 {
            return Err(Error::InvalidParameter {
                name: "v",
                reason: "at least one virtual node is required",
            });
        }
        if self.input_qubit >= n_sys {
            return Err(Error::InvalidParameter {
                name: "input_qubit",
                reason: "the input must go to a system qubit",
            });
        }
        Ok(())
    }
}

/// `|ψ_s⟩⟨ψ_s|` with `|ψ_s⟩ = √(1-s)|0⟩ + √s|1⟩`.
pub fn encode_input(s: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InputOutOfRange { value: s });
    }
    let off = (s * (1.0 - s)).sqrt();
    let m = ComplexMatrix::from_real(2, 2, &[1.0 - s, off, off, s])?;
    Ok(DensityMatrix::from_trusted(m))
}

/// `rho_in ⊗ Tr_q ρ` with the new qubit placed back at register position `q`.
pub fn inject_input(rho: &DensityMatrix, rho_in: &DensityMatrix, q: usize) -> Result<DensityMatrix> {
    let n = rho.qubits();
    if q >= n {
        return Err(Error::QubitOutOfRange { index: q, qubits: n });
    }
    if rho_in.qubits() != 1 {
        return Err(Error::dims("inject_input", rho_in.matrix().shape(), (2, 2)));
    }
    if n == 1 {
        let scaled = rho_in.matrix().scale(rho.trace());
        return Ok(DensityMatrix::from_trusted(scaled));
    }
    let rest_state = partial_trace(rho, &[q])?;
    let rest_q: Vec<usize> = (0..n).filter(|&k| k != q).collect();
    let base = scatter_offsets(n, &rest_q);
    let bit = 1usize << (n - 1 - q);
    let dim = rho.dim();
    let r = rest_state.matrix();
    let rin = rho_in.matrix();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for b in 0..2 {
        for bp in 0..2 {
            let c = rin[(b, bp)];
            for (i, &ri) in base.iter().enumerate() {
                for (j, &cj) in base.iter().enumerate() {
                    out[(ri + b * bit, cj + bp * bit)] = c * r[(i, j)];
                }
            }
        }
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// `Tr[ρ O_i]` for every observable; fails when an expectation has an
/// imaginary part above `1e-9`.
pub fn measure(rho_sys: &DensityMatrix, obs: &ObservableSet) -> Result<Vec<f64>> {
    if rho_sys.qubits() != obs.n_sys() {
        return Err(Error::LengthMismatch {
            expected: obs.n_sys(),
            found: rho_sys.qubits(),
        });
    }
    obs.iter()
        .enumerate()
        .map(|(idx, o)| {
            let z: C64 = rho_sys.expectation(&o.matrix)?;
            if z.im.abs() > 1e-9 {
                Err(Error::ImaginaryExpectation { index: idx, imag: z.im })
            } else {
                Ok(z.re)
            }
        })
        .collect()
}

/// Single update on a computational-basis state. Builds a fresh engine;
/// use [`Reservoir`] directly when stepping repeatedly.
pub fn evolve_step(
    rho: &DensityMatrix,
    s: f64,
    real: &HamiltonianRealization,
    cfg: &ReservoirConfig,
    obs: &ObservableSet,
) -> Result<(DensityMatrix, Vec<f64>)> {
    let engine = Reservoir::with_observables(real, cfg, obs.clone())?;
    let mut state = engine.state(rho)?;
    let features = engine.step(&mut state, s)?;
    Ok((engine.density(&state)?, features))
}

/// Feature matrix and final state for a whole input sequence.
pub fn run_trajectory(
    real: &HamiltonianRealization,
    inputs: &[f64],
    cfg: &ReservoirConfig,
    initial: &DensityMatrix,
) -> Result<(FeatureMatrix, DensityMatrix)> {
    Reservoir::new(real, cfg)?.run(inputs, initial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::ReservoirParams;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn encode_endpoints_and_midpoint() {
        let z = encode_input(0.0).unwrap();
        assert_eq!(z.matrix(), DensityMatrix::zero_state(1).unwrap().matrix());
        let o = encode_input(1.0).unwrap();
        assert_eq!(o.matrix()[(1, 1)], c(1.0));
        assert_eq!(o.matrix()[(0, 0)], c(0.0));
        let h = encode_input(0.5).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((h.matrix()[(i, j)] - c(0.5)).norm() < 1e-15);
            }
        }
        assert!(encode_input(-0.1).is_err());
        assert!(encode_input(1.5).is_err());
        assert!(encode_input(f64::NAN).is_err());
    }

    #[test]
    fn inject_into_product_state() {
        let old_in = encode_input(0.3).unwrap();
        let rest = DensityMatrix::maximally_mixed(2).unwrap();
        let rho = old_in.tensor(&rest).unwrap();
        let new_in = encode_input(0.8).unwrap();
        let out = inject_input(&rho, &new_in, 0).unwrap();
        let expected = new_in.tensor(&rest).unwrap();
        assert!(out.matrix().max_abs_diff(expected.matrix()) < 1e-15);
        assert!((out.trace() - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn inject_into_maximally_mixed() {
        let rho = DensityMatrix::maximally_mixed(3).unwrap();
        let rin = encode_input(0.25).unwrap();
        let out = inject_input(&rho, &rin, 0).unwrap();
        let expected = rin.tensor(&DensityMatrix::maximally_mixed(2).unwrap()).unwrap();
        assert!(out.matrix().max_abs_diff(expected.matrix()) < 1e-15);
    }

    #[test]
    fn inject_into_bell_pair() {
        let h = 1.0 / 2f64.sqrt();
        let bell = DensityMatrix::pure(&[c(h), c(0.0), c(0.0), c(h)]).unwrap();
        let zero = DensityMatrix::zero_state(1).unwrap();
        let out = inject_input(&bell, &zero, 0).unwrap();
        // |0><0| ⊗ I/2 = diag(1/2, 1/2, 0, 0)
        let expected = ComplexMatrix::from_diagonal(&[c(0.5), c(0.5), c(0.0), c(0.0)]);
        assert!(out.matrix().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn inject_at_inner_position() {
        let a = encode_input(0.1).unwrap();
        let b = encode_input(0.6).unwrap();
        let cst = encode_input(0.9).unwrap();
        let rho = a.tensor(&b).unwrap().tensor(&cst).unwrap();
        let rin = DensityMatrix::maximally_mixed(1).unwrap();
        let out = inject_input(&rho, &rin, 1).unwrap();
        let expected = a.tensor(&rin).unwrap().tensor(&cst).unwrap();
        assert!(out.matrix().max_abs_diff(expected.matrix()) < 1e-15);
        assert!(inject_input(&rho, &rin, 3).is_err());
    }

    #[test]
    fn measure_reference_states() {
        let obs = ObservableSet::new(ObservableKind::ZAndZz, 3).unwrap();
        let zero = DensityMatrix::zero_state(3).unwrap();
        assert!(measure(&zero, &obs).unwrap().iter().all(|&x| x == 1.0));
        let mixed = DensityMatrix::maximally_mixed(3).unwrap();
        assert!(measure(&mixed, &obs).unwrap().iter().all(|&x| x.abs() < 1e-15));
        let plus = encode_input(0.5).unwrap();
        let z1 = ObservableSet::new(ObservableKind::ZOnly, 1).unwrap();
        assert!(measure(&plus, &z1).unwrap()[0].abs() < 1e-15);
        assert!(measure(&zero, &z1).is_err());
    }

    #[test]
    fn measure_flags_corrupted_state() {
        let bad = DensityMatrix::from_trusted(
            ComplexMatrix::from_vec(2, 2, alloc::vec![c(1.0), c(0.0), c(0.0), C64::new(0.0, 0.5)]).unwrap(),
        );
        let z = ObservableSet::new(ObservableKind::ZOnly, 1).unwrap();
        assert!(matches!(measure(&bad, &z), Err(Error::ImaginaryExpectation { .. })));
    }

    fn small_realization(beta: f64) -> HamiltonianRealization {
        let p = ReservoirParams::new(2, 1).with_regime(0.7, beta).with_seed(12);
        HamiltonianRealization::sample(&p).unwrap()
    }

    #[test]
    fn engine_step_matches_direct_computation() {
        let real = small_realization(1.3);
        let cfg = ReservoirConfig::new(0.6, 3, ObservableKind::ZAndZz);
        let obs = ObservableSet::new(cfg.observables, 2).unwrap();
        let engine = Reservoir::new(&real, &cfg).unwrap();
        let u = crate::hamiltonian::build_propagator(&real, cfg.tau / 3.0).unwrap();
        let mut rho = DensityMatrix::zero_state(3).unwrap();
        let mut state = engine.state(&rho).unwrap();
        for &s in &[0.2, 0.9, 0.4, 0.0, 1.0] {
            let feats = engine.step(&mut state, s).unwrap();
            rho = inject_input(&rho, &encode_input(s).unwrap(), 0).unwrap();
            let mut direct = Vec::new();
            for _ in 0..3 {
                rho = DensityMatrix::from_trusted(rho.matrix().conjugate_by(&u).unwrap());
                let sys = partial_trace(&rho, &[2]).unwrap();
                direct.extend(measure(&sys, &obs).unwrap());
            }
            for (a, b) in feats.iter().zip(&direct) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
            let back = engine.density(&state).unwrap();
            assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-12);
        }
        let sys = engine.system_state(&state).unwrap();
        assert!(sys.matrix().max_abs_diff(partial_trace(&rho, &[2]).unwrap().matrix()) < 1e-12);
    }

    #[test]
    fn free_evolve_step_agrees_with_engine() {
        let real = small_realization(0.5);
        let cfg = ReservoirConfig::new(0.5, 2, ObservableKind::ZOnly);
        let obs = ObservableSet::new(ObservableKind::ZOnly, 2).unwrap();
        let rho = DensityMatrix::maximally_mixed(3).unwrap();
        let (next, feats) = evolve_step(&rho, 0.3, &real, &cfg, &obs).unwrap();
        assert_eq!(feats.len(), 4);
        assert!(next.diagnostics().unwrap().is_valid());
    }

    #[test]
    fn single_virtual_node_width() {
        let real = small_realization(0.5);
        let cfg = ReservoirConfig::new(0.5, 1, ObservableKind::ZOnly);
        let engine = Reservoir::new(&real, &cfg).unwrap();
        assert_eq!(engine.features_per_step(), 2);
        let (fm, _) = engine.run(&[0.1, 0.2], &DensityMatrix::zero_state(3).unwrap()).unwrap();
        assert_eq!(fm.width(), 3);
        assert_eq!(fm.row(1)[2], 1.0);
    }

    #[test]
    fn empty_sequence_leaves_state_unchanged() {
        let real = small_realization(0.5);
        let cfg = ReservoirConfig::new(0.5, 4, ObservableKind::ZOnly);
        let init = DensityMatrix::maximally_mixed(3).unwrap();
        let (fm, last) = run_trajectory(&real, &[], &cfg, &init).unwrap();
        assert_eq!(fm.steps(), 0);
        assert_eq!(fm.width(), 9);
        assert_eq!(last, init);
    }

    #[test]
    fn bad_input_reports_step() {
        let real = small_realization(0.5);
        let cfg = ReservoirConfig::new(0.5, 2, ObservableKind::ZOnly);
        let init = DensityMatrix::zero_state(3).unwrap();
        let err = run_trajectory(&real, &[0.1, 0.2, 1.2], &cfg, &init).unwrap_err();
        assert!(matches!(err, Error::AtStep { step: 2, .. }));
    }

    #[test]
    fn per_node_multiplexing_uses_full_tau_per_node() {
        let real = small_realization(0.9);
        let sub = ReservoirConfig::new(0.4, 3, ObservableKind::ZOnly).with_multiplex(Multiplex::SubStep);
        let per = ReservoirConfig::new(0.4 / 3.0, 3, ObservableKind::ZOnly).with_multiplex(Multiplex::PerNode);
        let init = DensityMatrix::zero_state(3).unwrap();
        let inputs = [0.3, 0.7, 0.1];
        let (a, _) = run_trajectory(&real, &inputs, &sub, &init).unwrap();
        let (b, _) = run_trajectory(&real, &inputs, &per, &init).unwrap();
        assert!(a.as_matrix().max_abs_diff(b.as_matrix()) < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(ReservoirConfig::new(0.0, 1, ObservableKind::ZOnly).validate(2).is_err());
        assert!(ReservoirConfig::new(0.5, 0, ObservableKind::ZOnly).validate(2).is_err());
        let mut cfg = ReservoirConfig::new(0.5, 1, ObservableKind::ZOnly);
        cfg.input_qubit = 2;
        assert!(cfg.validate(2).is_err());
        cfg.input_qubit = 1;
        assert!(cfg.validate(2).is_ok());
    }

    #[test]
    fn injection_at_non_leading_system_qubit() {
        let real = small_realization(1.0);
        let mut cfg = ReservoirConfig::new(0.5, 2, ObservableKind::ZOnly);
        cfg.input_qubit = 1;
        let engine = Reservoir::new(&real, &cfg).unwrap();
        let rho = DensityMatrix::maximally_mixed(3).unwrap();
        let mut state = engine.state(&rho).unwrap();
        let rin = encode_input(0.35).unwrap();
        engine.inject(&mut state, &rin).unwrap();
        let direct = inject_input(&rho, &rin, 1).unwrap();
        assert!(engine.density(&state).unwrap().matrix().max_abs_diff(direct.matrix()) < 1e-13);
    }
}
