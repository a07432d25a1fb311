//! Spin Hamiltonians of the system/environment reservoir.
//!
//! ```text
//! H = Σ_{i<j} J^sys_ij X_i X_j + h_sys Σ_i Z_i          (system block)
//!   + Σ_{k<l} J^env_kl X_k X_l + h_env Σ_k Z_k          (environment block)
//!   + Σ_{i,k} g_ik Z_i Z_k                              (interaction)
//! ```
//!
//! with `J^sys ~ U(-J0, J0)`, `J^env ~ U(-αJ0, αJ0)` and `g ~ U(-βJ0, βJ0)`.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{hermitian_eig, kron, ComplexMatrix, HermitianEigen, C64, MAX_QUBITS};
use crate::{Error, Result};

/// Generator used for coupling sampling: ChaCha with 8 rounds, seeded
/// through `SeedableRng::seed_from_u64`.
pub type CouplingRng = ChaCha8Rng;

pub fn coupling_rng(seed: u64) -> CouplingRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReservoirParams {
    pub n_sys: usize,
    pub n_env: usize,
    /// Reference coupling scale `J0`.
    pub j0: f64,
    /// Environment coupling range relative to `J0`.
    pub alpha: f64,
    /// System–environment coupling range relative to `J0`.
    pub beta: f64,
    pub h_sys: f64,
    pub h_env: f64,
    pub seed: u64,
}

impl ReservoirParams {
    /// `J0 = 1`, `α = β = 1`, `h_sys = J0/2`, `h_env = αJ0`, seed 0.
    pub fn new(n_sys: usize, n_env: usize) -> Self {
        Self {
            n_sys,
            n_env,
            j0: 1.0,
            alpha: 1.0,
            beta: 1.0,
            h_sys: 0.5,
            h_env: 1.0,
            seed: 0,
        }
    }

    /// Sets `(α, β)` and ties the environment field to `αJ0`.
    pub fn with_regime(mut self, alpha: f64, beta: f64) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self.h_env = alpha * self.j0;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_h_sys(mut self, h_sys: f64) -> Self {
        self.h_sys = h_sys;
        self
    }

    pub fn qubits(&self) -> usize {
        self.n_sys + self.n_env
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sys == 0 {
            return Err(Error::InvalidParameter {
                name: "n_sys",
                reason: "at least one system qubit is required",
            });
        }
        if self.qubits() > MAX_QUBITS {
            return Err(Error::RegisterTooLarge {
                qubits: self.qubits(),
                max: MAX_QUBITS,
            });
        }
        if !(self.j0.is_finite() && self.j0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "j0",
                reason: "must be finite and positive",
            });
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "must be finite and non-negative",
                });
            }
        }
        for (name, v) in [("h_sys", self.h_sys), ("h_env", self.h_env)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "must be finite",
                });
            }
        }
        Ok(())
    }
}

/// Sampled coupling coefficients.
///
/// `j_sys` lists pairs `(i, j), i < j` lexicographically, `j_env` likewise
/// over environment sites (numbered from 0 within the block), and `g` is
/// row-major over `(system i, environment k)`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CouplingSet {
    pub j_sys: Vec<f64>,
    pub j_env: Vec<f64>,
    pub g: Vec<f64>,
}

impl CouplingSet {
    /// Verifies the counts match a register layout.
    pub fn check_counts(&self, n_sys: usize, n_env: usize) -> Result<()> {
        let want = [pairs(n_sys), pairs(n_env), n_sys * n_env];
        let got = [self.j_sys.len(), self.j_env.len(), self.g.len()];
        for (w, g) in want.into_iter().zip(got) {
            if w != g {
                return Err(Error::LengthMismatch { expected: w, found: g });
            }
        }
        Ok(())
    }
}

fn pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Lexicographic `(i, j)` pairs with `i < j < n`.
pub fn pair_indices(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// Draws every coupling in the fixed order system pairs, environment
/// pairs, then `g`. Each value is `scale · (2u - 1)` with `u ∈ [0, 1)`, so a
/// zero scale yields exact zeros without changing the number of draws.
pub fn sample_couplings<R: Rng + ?Sized>(params: &ReservoirParams, rng: &mut R) -> CouplingSet {
    let mut draw = |scale: f64| scale * (2.0 * rng.random::<f64>() - 1.0);
    let j_sys = (0..pairs(params.n_sys)).map(|_| draw(params.j0)).collect();
    let j_env = (0..pairs(params.n_env))
        .map(|_| draw(params.alpha * params.j0))
        .collect();
    let g = (0..params.n_sys * params.n_env)
        .map(|_| draw(params.beta * params.j0))
        .collect();
    CouplingSet { j_sys, j_env, g }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        let o = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let data = match self {
            Pauli::X => [o, one, one, o],
            Pauli::Y => [o, -i, i, o],
            Pauli::Z => [one, o, o, -one],
        };
        ComplexMatrix::from_vec(2, 2, data.to_vec()).expect("2x2")
    }
}

/// `I ⊗ … ⊗ σ ⊗ … ⊗ I` with `σ` on `qubit` of an `n`-qubit register.
pub fn embed_pauli(axis: Pauli, qubit: usize, n: usize) -> Result<ComplexMatrix> {
    if qubit >= n {
        return Err(Error::QubitOutOfRange {
            index: qubit,
            qubits: n,
        });
    }
    if n > MAX_QUBITS {
        return Err(Error::RegisterTooLarge {
            qubits: n,
            max: MAX_QUBITS,
        });
    }
    let mut out = ComplexMatrix::identity(1);
    for q in 0..n {
        let factor = if q == qubit {
            axis.matrix()
        } else {
            ComplexMatrix::identity(2)
        };
        out = kron(&out, &factor)?;
    }
    Ok(out)
}

/// Sampled couplings together with the assembled Hamiltonian and its
/// eigendecomposition. Immutable once built.
#[derive(Clone, Debug)]
pub struct HamiltonianRealization {
    params: ReservoirParams,
    couplings: CouplingSet,
    h_full: ComplexMatrix,
    spectrum: HermitianEigen,
}

impl HamiltonianRealization {
    /// Samples couplings from `params.seed` and assembles the Hamiltonian.
    pub fn sample(params: &ReservoirParams) -> Result<Self> {
        params.validate()?;
        let mut rng = coupling_rng(params.seed);
        let couplings = sample_couplings(params, &mut rng);
        build_hamiltonian(params, couplings)
    }

    pub fn params(&self) -> &ReservoirParams {
        &self.params
    }

    pub fn couplings(&self) -> &CouplingSet {
        &self.couplings
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.h_full
    }

    pub fn spectrum(&self) -> &HermitianEigen {
        &self.spectrum
    }

    pub fn qubits(&self) -> usize {
        self.params.qubits()
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits()
    }
}

/// Assembles the full Hamiltonian. System sites are register qubits
/// `0..n_sys`, environment sites `n_sys..n_sys + n_env`.
pub fn build_hamiltonian(params: &ReservoirParams, couplings: CouplingSet) -> Result<HamiltonianRealization> {
    params.validate()?;
    couplings.check_counts(params.n_sys, params.n_env)?;
    if !couplings
        .j_sys
        .iter()
        .chain(&couplings.j_env)
        .chain(&couplings.g)
        .all(|x| x.is_finite())
    {
        return Err(Error::NonFinite { what: "couplings" });
    }
    let n = params.qubits();
    let dim = 1usize << n;
    let bit = |q: usize| 1usize << (n - 1 - q);
    let z = |b: usize, q: usize| if b & bit(q) == 0 { 1.0 } else { -1.0 };

    let mut h = ComplexMatrix::zeros(dim, dim);
    let env0 = params.n_sys;

    // X_a X_b flips both bits.
    let xx = pair_indices(params.n_sys)
        .zip(&couplings.j_sys)
        .map(|((i, j), &c)| (i, j, c))
        .chain(
            pair_indices(params.n_env)
                .zip(&couplings.j_env)
                .map(|((k, l), &c)| (env0 + k, env0 + l, c)),
        );
    for (a, b, c) in xx {
        if c == 0.0 {
            continue;
        }
        let mask = bit(a) | bit(b);
        for s in 0..dim {
            h[(s ^ mask, s)] += C64::new(c, 0.0);
        }
    }

    for s in 0..dim {
        let mut diag = 0.0;
        for i in 0..params.n_sys {
            diag += params.h_sys * z(s, i);
        }
        for k in 0..params.n_env {
            diag += params.h_env * z(s, env0 + k);
        }
        for i in 0..params.n_sys {
            for k in 0..params.n_env {
                diag += couplings.g[i * params.n_env + k] * z(s, i) * z(s, env0 + k);
            }
        }
        h[(s, s)] += C64::new(diag, 0.0);
    }

    let spectrum = hermitian_eig(&h)?;
    Ok(HamiltonianRealization {
        params: params.clone(),
        couplings,
        h_full: h,
        spectrum,
    })
}

/// Dense `e^{-i H dt}` from the realization's stored eigendecomposition.
pub fn build_propagator(real: &HamiltonianRealization, dt: f64) -> Result<ComplexMatrix> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: "sub-step time must be finite and positive",
        });
    }
    Ok(real.spectrum.propagator(dt))
}
