use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::hamiltonian::pair_indices;
use crate::linalg::{ComplexMatrix, C64, HERMITIAN_TOL, MAX_QUBITS};
use crate::{Error, Result};

/// Which Pauli strings are read out from the system register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ObservableKind {
    /// `Z_i` for every system qubit.
    #[cfg_attr(feature = "serde", serde(alias = "Z_only"))]
    ZOnly,
    /// `Z_i` followed by `Z_i Z_j` for every pair `i < j`.
    #[cfg_attr(feature = "serde", serde(alias = "Z_and_ZZ"))]
    ZAndZz,
}

impl ObservableKind {
    pub fn count(self, n_sys: usize) -> usize {
        match self {
            ObservableKind::ZOnly => n_sys,
            ObservableKind::ZAndZz => n_sys + n_sys * n_sys.saturating_sub(1) / 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    pub label: String,
    pub matrix: ComplexMatrix,
}

/// Hermitian operators on the system register with unique labels.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSet {
    n_sys: usize,
    ops: Vec<Observable>,
}

impl ObservableSet {
    /// Pauli-Z strings in the order `Z0..Z{n-1}` then `Z0Z1, Z0Z2, …`.
    pub fn new(kind: ObservableKind, n_sys: usize) -> Result<Self> {
        if n_sys == 0 || n_sys > MAX_QUBITS {
            return Err(Error::InvalidParameter {
                name: "n_sys",
                reason: "system register must have between 1 and 12 qubits",
            });
        }
        let mut ops: Vec<Observable> = (0..n_sys)
            .map(|i| Observable {
                label: format!("Z{i}"),
                matrix: z_string(n_sys, 1 << (n_sys - 1 - i)),
            })
            .collect();
        if kind == ObservableKind::ZAndZz {
            ops.extend(pair_indices(n_sys).map(|(i, j)| Observable {
                label: format!("Z{i}Z{j}"),
                matrix: z_string(n_sys, (1 << (n_sys - 1 - i)) | (1 << (n_sys - 1 - j))),
            }));
        }
        Ok(Self { n_sys, ops })
    }

    /// Arbitrary Hermitian operators on an `n_sys`-qubit register.
    pub fn custom(n_sys: usize, ops: Vec<Observable>) -> Result<Self> {
        let dim = 1usize << n_sys;
        for (idx, op) in ops.iter().enumerate() {
            if op.matrix.shape() != (dim, dim) {
                return Err(Error::dims("observable", op.matrix.shape(), (dim, dim)));
            }
            op.matrix.ensure_hermitian(HERMITIAN_TOL)?;
            if ops[..idx].iter().any(|o| o.label == op.label) {
                return Err(Error::InvalidParameter {
                    name: "observables",
                    reason: "labels must be unique",
                });
            }
        }
        Ok(Self { n_sys, ops })
    }

    pub fn n_sys(&self) -> usize {
        self.n_sys
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Observable> {
        self.ops.iter()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.ops.iter().map(|o| o.label.as_str())
    }
}

/// Diagonal product of `Z` on the qubits whose bits are set in `mask`.
fn z_string(n: usize, mask: usize) -> ComplexMatrix {
    let dim = 1usize << n;
    let diag: Vec<C64> = (0..dim)
        .map(|b| {
            let sign = if (b & mask).count_ones().is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            C64::new(sign, 0.0)
        })
        .collect();
    ComplexMatrix::from_diagonal(&diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{embed_pauli, Pauli};
    use alloc::vec;

    #[test]
    fn counts_and_labels() {
        let z = ObservableSet::new(ObservableKind::ZOnly, 4).unwrap();
        assert_eq!(z.len(), 4);
        let zz = ObservableSet::new(ObservableKind::ZAndZz, 4).unwrap();
        assert_eq!(zz.len(), 4 + 6);
        assert_eq!(ObservableKind::ZAndZz.count(5), 15);
        let labels: Vec<&str> = zz.labels().collect();
        assert_eq!(&labels[..6], &["Z0", "Z1", "Z2", "Z3", "Z0Z1", "Z0Z2"]);
    }

    #[test]
    fn matches_embedded_paulis() {
        let set = ObservableSet::new(ObservableKind::ZAndZz, 3).unwrap();
        let ops: Vec<&Observable> = set.iter().collect();
        for (i, op) in ops.iter().take(3).enumerate() {
            assert_eq!(op.matrix, embed_pauli(Pauli::Z, i, 3).unwrap());
        }
        let z0z2 = &embed_pauli(Pauli::Z, 0, 3).unwrap() * &embed_pauli(Pauli::Z, 2, 3).unwrap();
        assert_eq!(ops[4].matrix, z0z2);
    }

    #[test]
    fn custom_rejects_duplicates_and_non_hermitian() {
        let x = Observable {
            label: "X".into(),
            matrix: Pauli::X.matrix(),
        };
        assert!(ObservableSet::custom(1, vec![x.clone(), x.clone()]).is_err());
        let bad = Observable {
            label: "bad".into(),
            matrix: ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap(),
        };
        assert!(ObservableSet::custom(1, vec![bad]).is_err());
        assert!(ObservableSet::custom(1, vec![x]).is_ok());
    }
}
