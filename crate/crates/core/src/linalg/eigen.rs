//! Hermitian eigensolver: Householder reduction to real symmetric
//! tridiagonal form followed by implicit-shift QL iteration.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::{ComplexMatrix, C64, HERMITIAN_TOL};
use crate::{Error, Result};

const QL_MAX_ITER: usize = 60;

/// Eigendecomposition `H = V diag(λ) V^H` with eigenvalues ascending and
/// eigenvectors stored as the columns of a unitary matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V f(λ) V^H` for a scalar function of the eigenvalues.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.vectors;
        let fv: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        let mut scaled = v.clone();
        for i in 0..n {
            for j in 0..n {
                scaled[(i, j)] *= fv[j];
            }
        }
        scaled.checked_mul(&v.adjoint()).expect("square eigenvector matrix")
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|l| C64::new(l, 0.0))
    }

    /// `e^{-iHt}`.
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        self.map_spectrum(|l| C64::new(0.0, -l * t).exp())
    }
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<HermitianEigen> {
    h.ensure_hermitian(HERMITIAN_TOL)?;
    let n = h.rows();
    if n == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let tri = tridiagonalize(h, true);
    let (diag, off, phases) = (tri.diag, tri.off, tri.phases);
    let mut d = diag;
    let mut e = off;
    e.push(0.0);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tql(&mut d, &mut e, Some(&mut z))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));

    // Eigenvectors of H are Q · D · Z with D = diag(phases).
    let mut q = tri.q.expect("requested reflector accumulation");
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] *= phases[j];
        }
    }
    let qd = q.as_slice();
    let mut vectors = ComplexMatrix::zeros(n, n);
    {
        let out = vectors.as_mut_slice();
        for i in 0..n {
            let qrow = &qd[i * n..(i + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for (p, &s) in qrow.iter().enumerate() {
                let zrow = &z[p * n..(p + 1) * n];
                for (c, &col) in order.iter().enumerate() {
                    orow[c] += s * zrow[col];
                }
            }
        }
    }
    let values = order.iter().map(|&i| d[i]).collect();
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    h.ensure_hermitian(HERMITIAN_TOL)?;
    let n = h.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let tri = tridiagonalize(h, false);
    let mut d = tri.diag;
    let mut e = tri.off;
    e.push(0.0);
    tql(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// `e^{-iHt}` computed through the eigendecomposition of `h`.
pub fn propagator(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter {
            name: "t",
            reason: "evolution time must be finite and non-negative",
        });
    }
    if t == 0.0 {
        h.ensure_hermitian(HERMITIAN_TOL)?;
        return Ok(ComplexMatrix::identity(h.rows()));
    }
    Ok(hermitian_eig(h)?.propagator(t))
}

/// Trace norm `Tr|A| = Σ|λ_i|` of a Hermitian matrix.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(a)?.iter().map(|l| l.abs()).sum())
}

struct Tridiagonal {
    diag: Vec<f64>,
    /// `|T[k+1,k]|` after the diagonal phase change.
    off: Vec<f64>,
    /// Diagonal unitary `D` with `T_complex = D T_real D^H`.
    phases: Vec<C64>,
    /// Accumulated reflectors `Q` with `H = Q T_complex Q^H`.
    q: Option<ComplexMatrix>,
}

fn tridiagonalize(h: &ComplexMatrix, want_q: bool) -> Tridiagonal {
    let n = h.rows();
    let mut a: Vec<C64> = h.as_slice().to_vec();
    let mut q = want_q.then(|| ComplexMatrix::identity(n));
    let mut sub = vec![C64::new(0.0, 0.0); n.saturating_sub(1)];
    let mut v = vec![C64::new(0.0, 0.0); n];
    let mut p = vec![C64::new(0.0, 0.0); n];

    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let xnorm = (k + 1..n).map(|i| a[i * n + k].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1) * n + k];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let alpha = -phase * xnorm;
        let v = &mut v[..m];
        for (t, i) in (k + 1..n).enumerate() {
            v[t] = a[i * n + k];
        }
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= vnorm;
        }

        // Trailing block B <- B - 2(v w^H + w v^H), w = Bv - (v^H B v) v.
        let p = &mut p[..m];
        for (r, i) in (k + 1..n).enumerate() {
            let row = &a[i * n + k + 1..i * n + n];
            p[r] = row.iter().zip(v.iter()).map(|(b, x)| b * x).sum();
        }
        let kappa: C64 = v.iter().zip(p.iter()).map(|(x, y)| x.conj() * y).sum();
        for (pw, &vv) in p.iter_mut().zip(v.iter()) {
            *pw -= kappa * vv;
        }
        for (r, i) in (k + 1..n).enumerate() {
            let vr = v[r];
            let wr = p[r];
            let row = &mut a[i * n + k + 1..i * n + n];
            for (c, b) in row.iter_mut().enumerate() {
                *b -= 2.0 * (vr * p[c].conj() + wr * v[c].conj());
            }
        }
        a[(k + 1) * n + k] = alpha;
        a[k * n + k + 1] = alpha.conj();
        for i in k + 2..n {
            a[i * n + k] = C64::new(0.0, 0.0);
            a[k * n + i] = C64::new(0.0, 0.0);
        }

        if let Some(q) = q.as_mut() {
            let qd = q.as_mut_slice();
            for i in 0..n {
                let row = &mut qd[i * n + k + 1..i * n + n];
                let s: C64 = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                for (qv, &vv) in row.iter_mut().zip(v.iter()) {
                    *qv -= 2.0 * s * vv.conj();
                }
            }
        }
    }

    for k in 0..n.saturating_sub(1) {
        sub[k] = a[(k + 1) * n + k];
    }
    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut phases = vec![C64::new(1.0, 0.0); n];
    let mut off = Vec::with_capacity(n);
    for k in 0..n.saturating_sub(1) {
        let e = sub[k];
        let r = e.norm();
        phases[k + 1] = if r > 0.0 { phases[k] * (e / r) } else { phases[k] };
        off.push(r);
    }
    Tridiagonal { diag, off, phases, q }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix. `e[i]` couples
/// `i` and `i+1`; `e[n-1]` is scratch. When `z` (row-major, n×n) is given
/// the plane rotations are accumulated into its columns.
fn tql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    // Rotations leave off-diagonal noise of order eps·‖T‖, so deflation is
    // judged against the whole matrix; clusters of near-zero eigenvalues
    // would otherwise never split off.
    let scale = d
        .iter()
        .zip(e.iter())
        .fold(0.0f64, |acc, (a, b)| acc.max(a.abs() + b.abs()));
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd.max(scale) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_ITER {
                return Err(Error::NoConvergence {
                    routine: "tridiagonal QL",
                    iterations: QL_MAX_ITER,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let row = &mut z[k * n..(k + 1) * n];
                        let f = row[i + 1];
                        row[i + 1] = s * row[i] + c * f;
                        row[i] = c * row[i] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
