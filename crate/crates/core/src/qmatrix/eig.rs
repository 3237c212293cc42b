//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.

use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Inputs are accepted when max |m − m†| is below this (relative to the entry scale).
pub const HERMITICITY_TOL: f64 = 1e-8;
/// Eigenvalue magnitudes below this are treated as exact zeros.
pub const EIGEN_ZERO: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 100;

#[derive(Clone, Debug)]
pub struct Eigen {
    /// Sorted descending.
    pub values: Vec<f64>,
    /// Column j is the eigenvector for `values[j]`.
    pub vectors: ComplexMatrix,
}

impl Eigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, j: usize) -> Vec<C64> {
        self.vectors.col(j)
    }

    /// V f(Λ) V†
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let v = &self.vectors;
        ComplexMatrix::from_fn(n, n, |i, j| {
            let mut acc = ZERO;
            for k in 0..n {
                if fv[k] != 0.0 {
                    acc += v[(i, k)] * v[(j, k)].conj() * fv[k];
                }
            }
            acc
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_fn(|x| x)
    }
}

/// Zero out eigenvalues of negligible magnitude, then clamp at 0.
pub fn clamp_eigenvalue(x: f64) -> f64 {
    if x.abs() < EIGEN_ZERO {
        0.0
    } else {
        x.max(0.0)
    }
}

/// Eigendecomposition of a Hermitian matrix. The input is symmetrised as (m + m†)/2.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<Eigen> {
    let n = m.require_square()?;
    let scale = m.max_abs().max(1.0);
    let defect = m.hermiticity_defect();
    if !(defect <= HERMITICITY_TOL * scale) {
        return Err(Error::NotHermitian(defect));
    }
    let mut a = m.hermitian_part().into_data();
    let mut v = ComplexMatrix::identity(n).into_data();

    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let target = 1e-28 * total;

    let mut converged = n <= 1 || total == 0.0;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
        let off: f64 = off_diagonal_sqr(&a, n);
        converged = off <= target || off < 1e-300;
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[i * n + order[j]]);
    Ok(Eigen { values, vectors })
}

fn off_diagonal_sqr(a: &[C64], n: usize) -> f64 {
    let mut off = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off += a[i * n + j].norm_sqr();
            }
        }
    }
    off
}

/// One Jacobi step zeroing entry (p, q). With a_pq = |a_pq| e^{iφ} the rotation is
/// J = [[c, s], [−s e^{−iφ}, c e^{−iφ}]] on the (p, q) plane, and A ← J† A J.
fn rotate(a: &mut [C64], v: &mut [C64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    // Skip rotations that cannot change the diagonal in floating point.
    if mag < 1e-18 * (app.abs() + aqq.abs()) {
        a[p * n + q] = ZERO;
        a[q * n + p] = ZERO;
        return;
    }
    let phase = apq / mag;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (tau * tau + 1.0).sqrt())
    } else {
        -1.0 / (-tau + (tau * tau + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let e = phase.conj(); // e^{−iφ}

    // A ← A J (columns p, q)
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * c - akq * e * s;
        a[k * n + q] = akp * s + akq * e * c;
    }
    // A ← J† A (rows p, q)
    let ec = e.conj();
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = apk * c - aqk * ec * s;
        a[q * n + k] = apk * s + aqk * ec * c;
    }
    a[p * n + q] = ZERO;
    a[q * n + p] = ZERO;
    a[p * n + p] = C64::new(a[p * n + p].re, 0.0);
    a[q * n + q] = C64::new(a[q * n + q].re, 0.0);
    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp * c - vkq * e * s;
        v[k * n + q] = vkp * s + vkq * e * c;
    }
}

/// Principal square root of a PSD matrix (negative eigenvalues clamped).
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(hermitian_eig(m)?.apply_fn(|x| clamp_eigenvalue(x).sqrt()))
}

/// Pseudo-inverse square root on the support (eigenvalues above `cutoff`).
pub fn inv_sqrt_psd(m: &ComplexMatrix, cutoff: f64) -> Result<ComplexMatrix> {
    Ok(hermitian_eig(m)?.apply_fn(|x| if x > cutoff { 1.0 / x.sqrt() } else { 0.0 }))
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    m.require_square()?;
    if m.hermiticity_defect() <= 1e-12 * m.max_abs().max(1.0) {
        return trace_norm_hermitian(m);
    }
    let gram = m.adjoint_mul(m);
    Ok(hermitian_eig(&gram)?.values.iter().map(|&x| x.max(0.0).sqrt()).sum())
}

/// Σ|λ| for a Hermitian matrix.
pub fn trace_norm_hermitian(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eig(m)?.values.iter().map(|x| x.abs()).sum())
}
