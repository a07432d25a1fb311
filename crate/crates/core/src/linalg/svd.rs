//! Real singular value decomposition by one-sided (Hestenes) Jacobi
//! rotations, and the Moore–Penrose pseudoinverse built on it.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::RealMatrix;
use crate::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Default relative cutoff for discarding small singular values.
pub const DEFAULT_RCOND: f64 = 1e-12;

/// Thin SVD `A = U diag(σ) V^T` with `U: m×r`, `V: n×r`, `r = min(m, n)`.
/// Singular values are sorted descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: RealMatrix,
    pub singular_values: Vec<f64>,
    pub v: RealMatrix,
}

impl Svd {
    pub fn new(a: &RealMatrix) -> Result<Self> {
        if !a.as_slice().iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite { what: "SVD input" });
        }
        if a.rows() >= a.cols() {
            jacobi_svd(a)
        } else {
            let t = jacobi_svd(&a.transpose())?;
            Ok(Svd {
                u: t.v,
                singular_values: t.singular_values,
                v: t.u,
            })
        }
    }

    pub fn max_singular_value(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// `V diag(f(σ)) U^T`.
    pub fn filtered_inverse(&self, filter: impl Fn(f64) -> f64) -> RealMatrix {
        let (n, r) = self.v.shape();
        let m = self.u.rows();
        let factors: Vec<f64> = self.singular_values.iter().map(|&s| filter(s)).collect();
        let mut out = RealMatrix::zeros(n, m);
        for i in 0..n {
            for (k, &f) in factors.iter().enumerate().take(r) {
                if f == 0.0 {
                    continue;
                }
                let vik = self.v[(i, k)] * f;
                for j in 0..m {
                    out[(i, j)] += vik * self.u[(j, k)];
                }
            }
        }
        out
    }

    /// Pseudoinverse with singular values below `rcond · σ_max` treated as zero.
    pub fn pseudoinverse(&self, rcond: f64) -> RealMatrix {
        let cutoff = rcond * self.max_singular_value();
        self.filtered_inverse(|s| if s > cutoff && s > 0.0 { 1.0 / s } else { 0.0 })
    }
}

/// Moore–Penrose pseudoinverse `A⁺` (shape `n×m` for `A: m×n`).
pub fn pseudoinverse(a: &RealMatrix, rcond: f64) -> Result<RealMatrix> {
    if !(rcond > 0.0 && rcond < 1.0) {
        return Err(Error::InvalidParameter {
            name: "rcond",
            reason: "must lie in (0, 1)",
        });
    }
    Ok(Svd::new(a)?.pseudoinverse(rcond))
}

// Requires rows >= cols. Works on the transpose so that every column of A
// is a contiguous row.
fn jacobi_svd(a: &RealMatrix) -> Result<Svd> {
    let (m, n) = a.shape();
    let mut at = a.transpose(); // n×m
    let mut vt = RealMatrix::identity(n); // row j holds column j of V
    let tol = f64::EPSILON * (m as f64).sqrt();

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let cp = at.row(p);
                    let cq = at.row(q);
                    let mut al = 0.0;
                    let mut be = 0.0;
                    let mut ga = 0.0;
                    for (x, y) in cp.iter().zip(cq) {
                        al += x * x;
                        be += y * y;
                        ga += x * y;
                    }
                    (al, be, ga)
                };
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_rows(&mut at, p, q, c, s);
                rotate_rows(&mut vt, p, q, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NoConvergence {
            routine: "one-sided Jacobi SVD",
            iterations: MAX_SWEEPS,
        });
    }

    let norms: Vec<f64> = (0..n)
        .map(|j| at.row(j).iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));

    let mut u = RealMatrix::zeros(m, n);
    let mut v = RealMatrix::zeros(n, n);
    let mut sv = vec![0.0; n];
    for (k, &j) in order.iter().enumerate() {
        let s = norms[j];
        sv[k] = s;
        let col = at.row(j);
        if s > 0.0 {
            for i in 0..m {
                u[(i, k)] = col[i] / s;
            }
        }
        for i in 0..n {
            v[(i, k)] = vt[(j, i)];
        }
    }
    Ok(Svd {
        u,
        singular_values: sv,
        v,
    })
}

fn rotate_rows(m: &mut RealMatrix, p: usize, q: usize, c: f64, s: f64) {
    let cols = m.cols();
    let (rp, rq) = two_rows_mut(m, p, q, cols);
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let xp = *x;
        let xq = *y;
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

// Requires p < q.
fn two_rows_mut(m: &mut RealMatrix, p: usize, q: usize, cols: usize) -> (&mut [f64], &mut [f64]) {
    let (head, tail) = m.as_mut_slice().split_at_mut(q * cols);
    (&mut head[p * cols..(p + 1) * cols], &mut tail[..cols])
}
