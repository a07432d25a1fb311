use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::{hermitian_eigenvalues, kron, ComplexMatrix, C64, MAX_QUBITS};
use crate::{Error, Result};

const HERMITIAN_EPS: f64 = 1e-10;
const TRACE_EPS: f64 = 1e-9;
const NEGATIVITY_EPS: f64 = 1e-9;

/// Density matrix over a register of qubits: Hermitian, unit trace, PSD.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    qubits: usize,
    matrix: ComplexMatrix,
}

/// Deviations from the density-matrix invariants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityDiagnostics {
    pub hermiticity_error: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl DensityDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.hermiticity_error <= HERMITIAN_EPS
            && self.trace_error <= TRACE_EPS
            && self.min_eigenvalue >= -NEGATIVITY_EPS
    }
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::InvalidDensity {
            reason: "dimension is not a power of two",
            value: dim as f64,
        });
    }
    let q = dim.trailing_zeros() as usize;
    if q > MAX_QUBITS {
        return Err(Error::RegisterTooLarge {
            qubits: q,
            max: MAX_QUBITS,
        });
    }
    Ok(q)
}

impl DensityMatrix {
    /// Validates every density-matrix invariant (this runs an eigensolve).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::dims("density matrix", matrix.shape(), matrix.shape()));
        }
        let qubits = qubits_for_dim(matrix.rows())?;
        if !matrix.is_finite() {
            return Err(Error::NonFinite { what: "density matrix" });
        }
        let rho = Self { qubits, matrix };
        let diag = rho.diagnostics()?;
        if diag.hermiticity_error > HERMITIAN_EPS {
            return Err(Error::InvalidDensity {
                reason: "not Hermitian",
                value: diag.hermiticity_error,
            });
        }
        if diag.trace_error > TRACE_EPS {
            return Err(Error::InvalidDensity {
                reason: "trace differs from one",
                value: diag.trace_error,
            });
        }
        if diag.min_eigenvalue < -NEGATIVITY_EPS {
            return Err(Error::InvalidDensity {
                reason: "negative eigenvalue",
                value: diag.min_eigenvalue,
            });
        }
        Ok(rho)
    }

    /// Wraps a matrix produced by a trace-preserving operation without
    /// re-running the eigensolve.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_square() && matrix.rows().is_power_of_two());
        Self {
            qubits: matrix.rows().trailing_zeros() as usize,
            matrix,
        }
    }

    /// `|0…0⟩⟨0…0|`.
    pub fn zero_state(qubits: usize) -> Result<Self> {
        Self::basis_state(qubits, 0)
    }

    pub fn basis_state(qubits: usize, index: usize) -> Result<Self> {
        guard(qubits)?;
        let dim = 1usize << qubits;
        if index >= dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(index, index)] = C64::new(1.0, 0.0);
        Ok(Self { qubits, matrix: m })
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(qubits: usize) -> Result<Self> {
        guard(qubits)?;
        let dim = 1usize << qubits;
        let m = ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0));
        Ok(Self { qubits, matrix: m })
    }

    /// `|ψ⟩⟨ψ|` for a state vector, normalised first.
    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        let qubits = qubits_for_dim(amplitudes.len())?;
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidDensity {
                reason: "state vector has zero or non-finite norm",
                value: norm,
            });
        }
        let psi: Vec<C64> = amplitudes.iter().map(|z| z / norm).collect();
        let m = ComplexMatrix::from_fn(psi.len(), psi.len(), |i, j| psi[i] * psi[j].conj());
        Ok(Self { qubits, matrix: m })
    }

    /// `self ⊗ other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self::from_trusted(kron(&self.matrix, &other.matrix)?))
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn diagnostics(&self) -> Result<DensityDiagnostics> {
        let hermiticity_error = self.matrix.hermiticity_error();
        let trace_error = (self.trace() - C64::new(1.0, 0.0)).norm();
        // Symmetrise before the eigensolve so that tiny asymmetries do not
        // mask the eigenvalue check.
        let n = self.dim();
        let sym = ComplexMatrix::from_fn(n, n, |i, j| (self.matrix[(i, j)] + self.matrix[(j, i)].conj()) * 0.5);
        let min_eigenvalue = hermitian_eigenvalues(&sym)?.first().copied().unwrap_or(0.0);
        Ok(DensityDiagnostics {
            hermiticity_error,
            trace_error,
            min_eigenvalue,
        })
    }

    /// Expectation value `Tr[ρ O]` (complex; Hermitian `O` gives a real value).
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<C64> {
        if op.shape() != self.matrix.shape() {
            return Err(Error::dims("expectation", self.matrix.shape(), op.shape()));
        }
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        let r = self.matrix.as_slice();
        let o = op.as_slice();
        for i in 0..n {
            for j in 0..n {
                acc += r[i * n + j] * o[j * n + i];
            }
        }
        Ok(acc)
    }
}

fn guard(qubits: usize) -> Result<()> {
    if qubits > MAX_QUBITS {
        return Err(Error::RegisterTooLarge {
            qubits,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

/// Reduced state after tracing out `traced` qubits. Remaining qubits keep
/// their relative order.
pub fn partial_trace(rho: &DensityMatrix, traced: &[usize]) -> Result<DensityMatrix> {
    let n = rho.qubits();
    let mut is_traced = vec![false; n];
    for &q in traced {
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, qubits: n });
        }
        if is_traced[q] {
            return Err(Error::DuplicateQubit { index: q });
        }
        is_traced[q] = true;
    }
    if traced.len() == n {
        return Err(Error::TraceAllQubits);
    }
    let kept: Vec<usize> = (0..n).filter(|&q| !is_traced[q]).collect();
    let gone: Vec<usize> = (0..n).filter(|&q| is_traced[q]).collect();
    let kept_base = scatter_offsets(n, &kept);
    let gone_off = scatter_offsets(n, &gone);

    let dim = rho.dim();
    let rd = kept_base.len();
    let src = rho.matrix().as_slice();
    let mut out = ComplexMatrix::zeros(rd, rd);
    for (r, &br) in kept_base.iter().enumerate() {
        for (c, &bc) in kept_base.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &gone_off {
                acc += src[(br + t) * dim + bc + t];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// For every assignment of the listed qubits (in order, first = most
/// significant), the full-register basis index with all other bits zero.
pub(crate) fn scatter_offsets(n: usize, qubits: &[usize]) -> Vec<usize> {
    let k = qubits.len();
    (0..1usize << k)
        .map(|local| {
            qubits.iter().enumerate().fold(0usize, |acc, (pos, &q)| {
                let bit = (local >> (k - 1 - pos)) & 1;
                acc | (bit << (n - 1 - q))
            })
        })
        .collect()
}
