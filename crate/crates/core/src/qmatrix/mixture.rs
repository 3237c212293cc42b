//! Positive operators stored as Σ_i |v_i⟩⟨v_i|. Used where block states have low rank
//! relative to their dimension.

use super::eig::{clamp_eigenvalue, hermitian_eig};
use super::matrix::{inner, ComplexMatrix, C64, ZERO};
use super::subsystem::{apply_local_vector, permute_vector, split_indices, total_dim};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Mixture {
    vectors: Vec<Vec<C64>>,
    dims: Vec<usize>,
}

impl Mixture {
    pub fn empty(dims: Vec<usize>) -> Self {
        Self { vectors: Vec::new(), dims }
    }

    pub fn from_vectors(vectors: Vec<Vec<C64>>, dims: Vec<usize>) -> Result<Self> {
        let d = total_dim(&dims);
        if let Some(v) = vectors.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch(format!("vector of length {} in dims {dims:?}", v.len())));
        }
        Ok(Self { vectors, dims })
    }

    /// Σ_i λ_i |e_i⟩⟨e_i| from the eigendecomposition of a PSD matrix.
    pub fn from_psd(m: &ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        let e = hermitian_eig(m)?;
        let mut vectors = Vec::new();
        for (k, &lam) in e.values.iter().enumerate() {
            let w = clamp_eigenvalue(lam);
            if w > 0.0 {
                let s = w.sqrt();
                vectors.push(e.vectors.col(k).into_iter().map(|z| z * s).collect());
            }
        }
        Self::from_vectors(vectors, dims)
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        total_dim(&self.dims)
    }

    pub fn count(&self) -> usize {
        self.vectors.len()
    }

    pub fn push(&mut self, v: Vec<C64>) {
        debug_assert_eq!(v.len(), self.dim());
        self.vectors.push(v);
    }

    pub fn extend(&mut self, other: &Mixture) {
        debug_assert_eq!(self.dims, other.dims);
        self.vectors.extend(other.vectors.iter().cloned());
    }

    pub fn trace(&self) -> f64 {
        self.vectors.iter().map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let s = factor.max(0.0).sqrt();
        Self { vectors: self.vectors.iter().map(|v| v.iter().map(|z| z * s).collect()).collect(), dims: self.dims.clone() }
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for v in &self.vectors {
            for i in 0..d {
                if v[i] == ZERO {
                    continue;
                }
                let row = &mut m.data_mut()[i * d..(i + 1) * d];
                for (dst, b) in row.iter_mut().zip(v) {
                    *dst += v[i] * b.conj();
                }
            }
        }
        m
    }

    /// Nonzero spectrum (clamped), descending. Uses the Gram matrix when it is smaller.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let k = self.count();
        if k == 0 {
            return Ok(Vec::new());
        }
        let values = if k < self.dim() {
            let gram = ComplexMatrix::from_fn(k, k, |i, j| inner(&self.vectors[i], &self.vectors[j]));
            hermitian_eig(&gram)?.values
        } else {
            hermitian_eig(&self.to_dense())?.values
        };
        Ok(values.into_iter().map(clamp_eigenvalue).filter(|&x| x > 0.0).collect())
    }

    /// Rank-revealing rewrite so that the vector count does not exceed the dimension.
    pub fn compress(self) -> Result<Self> {
        if self.count() <= self.dim() {
            return Ok(self);
        }
        let dense = self.to_dense();
        Self::from_psd(&dense, self.dims)
    }

    /// Partial trace keeping the listed subsystems (ascending order in the result).
    pub fn reduce(&self, keep: &[usize]) -> Result<Self> {
        super::subsystem::validate_parts(self.dims.len(), &[keep])?;
        let (kidx, tidx, kdim, tdim) = split_indices(&self.dims, keep);
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        let new_dims: Vec<usize> = sorted.iter().map(|&i| self.dims[i]).collect();
        let mut out = Vec::with_capacity(self.count() * tdim);
        for v in &self.vectors {
            let mut parts = vec![vec![ZERO; kdim]; tdim];
            for (f, &z) in v.iter().enumerate() {
                parts[tidx[f]][kidx[f]] = z;
            }
            out.extend(parts.into_iter().filter(|w| w.iter().any(|z| *z != ZERO)));
        }
        Self { vectors: out, dims: new_dims }.compress()
    }

    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let mut vectors = Vec::with_capacity(self.count());
        let mut new_dims = self.dims.clone();
        for v in &self.vectors {
            let (w, d) = permute_vector(v, &self.dims, perm)?;
            vectors.push(w);
            new_dims = d;
        }
        if self.vectors.is_empty() {
            new_dims = perm.iter().map(|&p| self.dims[p]).collect();
        }
        Ok(Self { vectors, dims: new_dims })
    }

    /// Apply Kraus operators to the contiguous factors `[start, start+len)`.
    pub fn apply_local(&self, start: usize, len: usize, kraus: &[ComplexMatrix]) -> Result<Self> {
        let out_dim = kraus.first().map_or(0, |k| k.rows());
        let mut new_dims = self.dims.clone();
        new_dims.splice(start..start + len, [out_dim]);
        let mut vectors = Vec::with_capacity(self.count() * kraus.len());
        for v in &self.vectors {
            for k in kraus {
                let w = apply_local_vector(v, &self.dims, start, len, k)?;
                if w.iter().any(|z| *z != ZERO) {
                    vectors.push(w);
                }
            }
        }
        Self { vectors, dims: new_dims }.compress()
    }

    /// ⟨u|ρ|u⟩
    pub fn expectation(&self, u: &[C64]) -> f64 {
        self.vectors.iter().map(|v| inner(u, v).norm_sqr()).sum()
    }
}

/// Orthonormal basis (columns) of the span of the given vectors.
pub fn orthonormal_span(vectors: &[&[C64]], dim: usize) -> Vec<Vec<C64>> {
    let scale = vectors.iter().map(|v| super::matrix::norm_sqr(v).sqrt()).fold(0.0, f64::max);
    let tol = 1e-12 * scale.max(1e-300);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        if basis.len() == dim {
            break;
        }
        let mut w = v.to_vec();
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for q in &basis {
                let c = inner(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let n = super::matrix::norm_sqr(&w).sqrt();
        if n > tol {
            basis.push(w.into_iter().map(|z| z / n).collect());
        }
    }
    basis
}

/// ‖a − b‖₁, computed on the span of both supports.
pub fn trace_distance_norm(a: &Mixture, b: &Mixture) -> Result<f64> {
    if a.dims != b.dims {
        return Err(Error::DimensionMismatch("mixtures over different spaces".into()));
    }
    let d = a.dim();
    if a.count() + b.count() >= d {
        return super::eig::trace_norm_hermitian(&a.to_dense().sub(&b.to_dense()));
    }
    let all: Vec<&[C64]> = a.vectors.iter().chain(&b.vectors).map(|v| v.as_slice()).collect();
    let q = orthonormal_span(&all, d);
    let r = q.len();
    let mut m = ComplexMatrix::zeros(r, r);
    for (sign, mix) in [(1.0, a), (-1.0, b)] {
        for v in &mix.vectors {
            let c: Vec<C64> = q.iter().map(|qi| inner(qi, v)).collect();
            for i in 0..r {
                for j in 0..r {
                    m[(i, j)] += c[i] * c[j].conj() * sign;
                }
            }
        }
    }
    super::eig::trace_norm_hermitian(&m)
}
