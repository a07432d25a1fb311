//! Trajectory engine working in the energy eigenbasis of the Hamiltonian.
//!
//! With `H = V diag(λ) V^H` the state is stored as `ρ̃ = V^H ρ V`. Unitary
//! evolution for `dt` is then the elementwise phase `ρ̃_ab e^{-i(λ_a-λ_b)dt}`
//! and an expectation value is `Re Σ_ab ρ̃_ab conj(Õ_ab)` with the
//! observable rotated once at construction. Only the input injection needs
//! the computational basis; it is done blockwise on the rows of `V` split by
//! the input qubit's bit.

use alloc::vec;
use alloc::vec::Vec;

use super::features::FeatureMatrix;
use super::{encode_input, Multiplex, ObservableSet, ReservoirConfig};
use crate::hamiltonian::HamiltonianRealization;
use crate::linalg::{gemm_acc, kron, scatter_offsets, trace_norm, ComplexMatrix, DensityMatrix, RealMatrix, C64};
use crate::{Error, Result};

const IMAG_TOL: f64 = 1e-9;

/// Joint register state in the energy eigenbasis of one realization.
#[derive(Clone, Debug, PartialEq)]
pub struct ReservoirState {
    rho: ComplexMatrix,
}

impl ReservoirState {
    /// Eigenbasis matrix `V^H ρ V`.
    pub fn eigenbasis_matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }
}

/// Precomputed evolution data for one realization and configuration.
/// Immutable; a single engine can drive any number of trajectories.
#[derive(Clone, Debug)]
pub struct Reservoir<'a> {
    real: &'a HamiltonianRealization,
    cfg: ReservoirConfig,
    obs: ObservableSet,
    /// `V` (columns are eigenvectors).
    vectors: ComplexMatrix,
    /// Rows of `V` whose input-qubit bit is 0 / 1, and their adjoints.
    v_rows: [ComplexMatrix; 2],
    v_rows_adj: [ComplexMatrix; 2],
    /// `e^{-i(λ_a - λ_b) dt}` for one virtual-node interval.
    phase: Vec<C64>,
    /// Observables extended by the environment identity and rotated.
    rotated_obs: Vec<ComplexMatrix>,
}

impl<'a> Reservoir<'a> {
    /// Engine reading out `cfg.observables`.
    pub fn new(real: &'a HamiltonianRealization, cfg: &ReservoirConfig) -> Result<Self> {
        let obs = ObservableSet::new(cfg.observables, real.params().n_sys)?;
        Self::with_observables(real, cfg, obs)
    }

    /// Engine reading out an explicit observable set on the system register.
    pub fn with_observables(
        real: &'a HamiltonianRealization,
        cfg: &ReservoirConfig,
        obs: ObservableSet,
    ) -> Result<Self> {
        let params = real.params();
        cfg.validate(params.n_sys)?;
        if obs.n_sys() != params.n_sys {
            return Err(Error::LengthMismatch {
                expected: params.n_sys,
                found: obs.n_sys(),
            });
        }
        let n = real.qubits();
        let dim = real.dim();
        let spectrum = real.spectrum();
        let vectors = spectrum.vectors.clone();

        let q = cfg.input_qubit;
        let rest: Vec<usize> = (0..n).filter(|&k| k != q).collect();
        let base = scatter_offsets(n, &rest);
        let bit = 1usize << (n - 1 - q);
        let v_rows = [0usize, 1].map(|b| {
            let mut m = ComplexMatrix::zeros(base.len(), dim);
            for (r, &off) in base.iter().enumerate() {
                let src = vectors.row(off + b * bit);
                m.as_mut_slice()[r * dim..(r + 1) * dim].copy_from_slice(src);
            }
            m
        });
        let v_rows_adj = [v_rows[0].adjoint(), v_rows[1].adjoint()];

        let dt = match cfg.multiplex {
            Multiplex::SubStep => cfg.tau / cfg.v as f64,
            Multiplex::PerNode => cfg.tau,
        };
        let p: Vec<C64> = spectrum.values.iter().map(|&l| C64::new(0.0, -l * dt).exp()).collect();
        let mut phase = Vec::with_capacity(dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                phase.push(p[a] * p[b].conj());
            }
        }

        let env_id = ComplexMatrix::identity(1 << params.n_env);
        let vh = vectors.adjoint();
        let rotated_obs = obs
            .iter()
            .map(|o| {
                let full = kron(&o.matrix, &env_id)?;
                vh.checked_mul(&full)?.checked_mul(&vectors)
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            real,
            cfg: cfg.clone(),
            obs,
            vectors,
            v_rows,
            v_rows_adj,
            phase,
            rotated_obs,
        })
    }

    pub fn realization(&self) -> &HamiltonianRealization {
        self.real
    }

    pub fn config(&self) -> &ReservoirConfig {
        &self.cfg
    }

    pub fn observables(&self) -> &ObservableSet {
        &self.obs
    }

    /// Features per input step, excluding the bias.
    pub fn features_per_step(&self) -> usize {
        self.cfg.v * self.obs.len()
    }

    pub fn column_labels(&self) -> Vec<alloc::string::String> {
        FeatureMatrix::column_labels(&self.obs, self.cfg.v)
    }

    pub fn state(&self, rho: &DensityMatrix) -> Result<ReservoirState> {
        if rho.dim() != self.real.dim() {
            return Err(Error::dims(
                "reservoir state",
                rho.matrix().shape(),
                (self.real.dim(), self.real.dim()),
            ));
        }
        let rt = self
            .vectors
            .adjoint()
            .checked_mul(rho.matrix())?
            .checked_mul(&self.vectors)?;
        Ok(ReservoirState { rho: rt })
    }

    /// Computational-basis density matrix of the joint register.
    pub fn density(&self, state: &ReservoirState) -> Result<DensityMatrix> {
        let m = self
            .vectors
            .checked_mul(&state.rho)?
            .checked_mul(&self.vectors.adjoint())?;
        Ok(DensityMatrix::from_trusted(m))
    }

    /// `Tr_env` of an eigenbasis operator, returned in the computational
    /// basis of the system register.
    pub fn system_block(&self, op: &ComplexMatrix) -> Result<ComplexMatrix> {
        let params = self.real.params();
        let dim = self.real.dim();
        let d_env = 1usize << params.n_env;
        let d_sys = 1usize << params.n_sys;
        let w = self.vectors.checked_mul(op)?;
        let v = self.vectors.as_slice();
        let wd = w.as_slice();
        let mut out = ComplexMatrix::zeros(d_sys, d_sys);
        for a in 0..d_sys {
            for b in 0..d_sys {
                let mut acc = C64::new(0.0, 0.0);
                for e in 0..d_env {
                    let ra = (a * d_env + e) * dim;
                    let rb = (b * d_env + e) * dim;
                    for j in 0..dim {
                        acc += wd[ra + j] * v[rb + j].conj();
                    }
                }
                out[(a, b)] = acc;
            }
        }
        Ok(out)
    }

    /// System marginal `Tr_env ρ`.
    pub fn system_state(&self, state: &ReservoirState) -> Result<DensityMatrix> {
        Ok(DensityMatrix::from_trusted(self.system_block(&state.rho)?))
    }

    /// Replaces the input qubit by `rho_in`: `ρ ← rho_in ⊗_q Tr_q ρ`.
    pub fn inject(&self, state: &mut ReservoirState, rho_in: &DensityMatrix) -> Result<()> {
        if rho_in.qubits() != 1 {
            return Err(Error::dims("inject", rho_in.matrix().shape(), (2, 2)));
        }
        let dim = self.real.dim();
        let h = dim / 2;
        let rin = rho_in.matrix();

        // R = Σ_b V_b ρ̃ V_b^H
        let mut r = vec![C64::new(0.0, 0.0); h * h];
        for b in 0..2 {
            let mut t = vec![C64::new(0.0, 0.0); h * dim];
            gemm_acc(&mut t, self.v_rows[b].as_slice(), state.rho.as_slice(), h, dim, dim);
            gemm_acc(&mut r, &t, self.v_rows_adj[b].as_slice(), h, dim, h);
        }
        // S_b = R V_b
        let s: [Vec<C64>; 2] = [0, 1].map(|b| {
            let mut sb = vec![C64::new(0.0, 0.0); h * dim];
            gemm_acc(&mut sb, &r, self.v_rows[b].as_slice(), h, h, dim);
            sb
        });
        // ρ̃' = Σ_b V_b^H (Σ_b' rin[b,b'] S_b')
        let out = state.rho.as_mut_slice();
        out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for b in 0..2 {
            let (c0, c1) = (rin[(b, 0)], rin[(b, 1)]);
            let m: Vec<C64> = s[0].iter().zip(&s[1]).map(|(x, y)| c0 * x + c1 * y).collect();
            gemm_acc(out, self.v_rows_adj[b].as_slice(), &m, dim, h, dim);
        }
        Ok(())
    }

    /// Unitary evolution over one virtual-node interval.
    pub fn advance(&self, state: &mut ReservoirState) {
        for (z, p) in state.rho.as_mut_slice().iter_mut().zip(&self.phase) {
            *z *= p;
        }
    }

    /// Observable expectations on the current state.
    pub fn measure_into(&self, state: &ReservoirState, out: &mut [f64]) -> Result<()> {
        debug_assert_eq!(out.len(), self.rotated_obs.len());
        let rho = state.rho.as_slice();
        for (idx, (o, slot)) in self.rotated_obs.iter().zip(out.iter_mut()).enumerate() {
            let mut re = 0.0;
            let mut im = 0.0;
            for (r, w) in rho.iter().zip(o.as_slice()) {
                // r · conj(w)
                re += r.re * w.re + r.im * w.im;
                im += r.im * w.re - r.re * w.im;
            }
            if im.abs() > IMAG_TOL || !re.is_finite() {
                return Err(Error::ImaginaryExpectation { index: idx, imag: im });
            }
            *slot = re;
        }
        Ok(())
    }

    /// One input step: inject `s`, then `V` rounds of evolve-and-measure.
    /// `out` receives `V · N_obs` features.
    pub fn step_into(&self, state: &mut ReservoirState, s: f64, out: &mut [f64]) -> Result<()> {
        let m = self.obs.len();
        if out.len() != self.cfg.v * m {
            return Err(Error::LengthMismatch {
                expected: self.cfg.v * m,
                found: out.len(),
            });
        }
        let rho_in = encode_input(s)?;
        self.inject(state, &rho_in)?;
        for chunk in out.chunks_exact_mut(m) {
            self.advance(state);
            self.measure_into(state, chunk)?;
        }
        Ok(())
    }

    pub fn step(&self, state: &mut ReservoirState, s: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.features_per_step()];
        self.step_into(state, s, &mut out)?;
        Ok(out)
    }

    /// Runs a whole input sequence from `initial`, returning the feature
    /// matrix (with bias column) and the final state.
    pub fn run(&self, inputs: &[f64], initial: &DensityMatrix) -> Result<(FeatureMatrix, DensityMatrix)> {
        let mut state = self.state(initial)?;
        let features = self.run_from(&mut state, inputs)?;
        let last = if inputs.is_empty() {
            initial.clone()
        } else {
            self.density(&state)?
        };
        Ok((features, last))
    }

    /// Like [`Reservoir::run`] but continues from an eigenbasis state.
    pub fn run_from(&self, state: &mut ReservoirState, inputs: &[f64]) -> Result<FeatureMatrix> {
        let per = self.features_per_step();
        let width = per + 1;
        let mut values = RealMatrix::zeros(inputs.len(), width);
        {
            let data = values.as_mut_slice();
            for (k, &s) in inputs.iter().enumerate() {
                let row = &mut data[k * width..(k + 1) * width];
                self.step_into(state, s, &mut row[..per]).map_err(|e| e.at_step(k))?;
                row[per] = 1.0;
            }
        }
        Ok(FeatureMatrix::from_rows(values, self.column_labels()))
    }

    /// `Tr|ρ¹ - ρ²|` on the joint register (basis independent).
    pub fn trace_distance(&self, a: &ReservoirState, b: &ReservoirState) -> Result<f64> {
        trace_norm(&a.rho.checked_sub(&b.rho)?)
    }

    /// `Tr|Tr_env ρ¹ - Tr_env ρ²|`.
    pub fn system_trace_distance(&self, a: &ReservoirState, b: &ReservoirState) -> Result<f64> {
        let diff = a.rho.checked_sub(&b.rho)?;
        trace_norm(&self.system_block(&diff)?)
    }
}
