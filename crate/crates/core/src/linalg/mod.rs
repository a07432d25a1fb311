//! Dense complex linear algebra over qubit registers.

mod density;
mod eigen;
mod matrix;
mod real;
mod svd;

pub(crate) use density::scatter_offsets;
pub use density::{partial_trace, DensityDiagnostics, DensityMatrix};
pub use eigen::{hermitian_eig, hermitian_eigenvalues, propagator, trace_norm, HermitianEigen};
pub(crate) use matrix::gemm_acc;
pub use matrix::{kron, ComplexMatrix};
pub use real::RealMatrix;
pub use svd::{pseudoinverse, Svd, DEFAULT_RCOND};

pub type C64 = num_complex::Complex64;

/// Largest register the dense representation accepts (4096-dimensional).
pub const MAX_QUBITS: usize = 12;

/// Relative Hermiticity tolerance for eigensolver inputs.
pub(crate) const HERMITIAN_TOL: f64 = 1e-10;

#[cfg(test)]
pub(crate) mod test_util {
    use super::*;
    use alloc::vec::Vec;

    /// Small deterministic generator so linalg tests do not depend on `rand`.
    pub struct Lcg(u64);

    impl Lcg {
        pub fn new(seed: u64) -> Self {
            Self(seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407))
        }

        pub fn next_f64(&mut self) -> f64 {
            self.0 = self
                .0
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (self.0 >> 11) as f64 / (1u64 << 53) as f64
        }

        pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
            lo + (hi - lo) * self.next_f64()
        }
    }

    pub fn random_hermitian(rng: &mut Lcg, n: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(rng.uniform(-1.0, 1.0), 0.0);
            for j in i + 1..n {
                let z = C64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    pub fn random_density(rng: &mut Lcg, qubits: usize) -> DensityMatrix {
        let n = 1 << qubits;
        let a = ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)));
        let p = &a * &a.adjoint();
        let tr = p.trace().re;
        DensityMatrix::new(p.scale(C64::new(1.0 / tr, 0.0))).unwrap()
    }

    #[allow(dead_code)]
    pub fn random_vec(rng: &mut Lcg, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect()
    }
}
