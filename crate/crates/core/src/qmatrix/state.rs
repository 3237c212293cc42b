use super::eig::{clamp_eigenvalue, hermitian_eig, Eigen};
use super::matrix::{inner, kron_vec, norm_sqr, ComplexMatrix, C64, ONE, ZERO};
use super::subsystem::{partial_trace_matrix, permute_matrix, permute_vector, total_dim};
use crate::channels::KrausChannel;
use crate::error::{Error, Result};

/// Tolerance used when validating states.
pub const STATE_TOL: f64 = 1e-8;

/// Positive semidefinite, unit trace, with a tensor factorisation.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

fn check_dims(size: usize, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) || total_dim(dims) != size {
        return Err(Error::DimensionMismatch(format!("dims {dims:?} do not factor size {size}")));
    }
    Ok(())
}

impl DensityMatrix {
    /// Validating constructor.
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        let n = matrix.require_square()?;
        check_dims(n, &dims)?;
        let defect = matrix.hermiticity_defect();
        if defect > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:.3e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {:.6} != 1", tr.re)));
        }
        let matrix = matrix.hermitian_part();
        let low = hermitian_eig(&matrix)?.values.last().copied().unwrap_or(0.0);
        if low < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {low:.3e}")));
        }
        Ok(Self { matrix, dims })
    }

    /// Skips validation; callers guarantee the invariants up to rounding.
    pub(crate) fn from_parts_unchecked(matrix: ComplexMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(matrix.rows(), total_dim(&dims));
        Self { matrix, dims }
    }

    pub fn maximally_mixed(dims: &[usize]) -> Self {
        let n = total_dim(dims);
        Self { matrix: ComplexMatrix::identity(n).scale_real(1.0 / n as f64), dims: dims.to_vec() }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(index, index)] = ONE;
        Self { matrix: m, dims: vec![dim] }
    }

    /// Diagonal state from a probability vector.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        check_distribution(probs)?;
        Ok(Self { matrix: ComplexMatrix::from_diag(probs), dims: vec![probs.len()] })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        check_dims(self.dim(), &dims)?;
        self.dims = dims;
        Ok(self)
    }

    pub fn eigen(&self) -> Result<Eigen> {
        hermitian_eig(&self.matrix)
    }

    /// Eigenvalues after clamping, descending.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(self.eigen()?.values.into_iter().map(clamp_eigenvalue).collect())
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { matrix: self.matrix.kron(&other.matrix), dims }
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        partial_trace(self, keep)
    }

    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let (matrix, dims) = permute_matrix(&self.matrix, &self.dims, perm)?;
        Ok(Self { matrix, dims })
    }

    /// ⟨v|ρ|v⟩
    pub fn expectation(&self, v: &[C64]) -> f64 {
        inner(v, &self.matrix.mul_vec(v)).re
    }
}

pub(crate) fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() || p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidDistribution("entries must be finite and nonnegative".into()));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidDistribution(format!("sums to {s}")));
    }
    Ok(())
}

/// Unit vector with a tensor factorisation.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    vector: Vec<C64>,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(vector: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(vector.len(), &dims)?;
        let n = norm_sqr(&vector).sqrt();
        if (n - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("vector norm {n:.6} != 1")));
        }
        Ok(Self { vector, dims })
    }

    /// Scales a nonzero vector to unit norm.
    pub fn normalized(vector: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(vector.len(), &dims)?;
        let n = norm_sqr(&vector).sqrt();
        if !(n > 1e-300) || !n.is_finite() {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Ok(Self { vector: vector.into_iter().map(|z| z / n).collect(), dims })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = vec![ZERO; dim];
        v[index] = ONE;
        Self { vector: v, dims: vec![dim] }
    }

    /// (1/√d) Σ_i |i⟩|i⟩ on ℂ^d ⊗ ℂ^d.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut v = vec![ZERO; d * d];
        let a = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        for i in 0..d {
            v[i * d + i] = a;
        }
        Self { vector: v, dims: vec![d, d] }
    }

    pub fn vector(&self) -> &[C64] {
        &self.vector
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { vector: kron_vec(&self.vector, &other.vector), dims }
    }

    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let (vector, dims) = permute_vector(&self.vector, &self.dims, perm)?;
        Ok(Self { vector, dims })
    }

    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        check_dims(self.dim(), &dims)?;
        self.dims = dims;
        Ok(self)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { matrix: ComplexMatrix::outer(&self.vector, &self.vector), dims: self.dims.clone() }
    }
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::BadPartition("nothing kept".into()));
    }
    let matrix = partial_trace_matrix(&rho.matrix, &rho.dims, keep)?;
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    let dims = sorted.iter().map(|&i| rho.dims[i]).collect();
    Ok(DensityMatrix { matrix, dims })
}

/// Purification on system ⊗ reference; the reference has the full system dimension.
pub fn purify(rho: &DensityMatrix) -> Result<PureState> {
    let e = rho.eigen()?;
    let d = rho.dim();
    let mut v = vec![ZERO; d * d];
    for (k, &lam) in e.values.iter().enumerate() {
        let w = clamp_eigenvalue(lam);
        if w == 0.0 {
            continue;
        }
        let s = w.sqrt();
        for i in 0..d {
            v[i * d + k] += e.vectors[(i, k)] * s;
        }
    }
    let mut dims = rho.dims.clone();
    dims.push(d);
    PureState::normalized(v, dims)
}

/// F(a, b) = ‖√a √b‖₁².
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    fidelity_matrices(a.matrix(), b.matrix())
}

pub(crate) fn fidelity_matrices(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.rows() != b.rows() || !a.is_square() || !b.is_square() {
        return Err(Error::DimensionMismatch(format!("fidelity of {}x{} and {}x{}", a.rows(), a.cols(), b.rows(), b.cols())));
    }
    let ea = hermitian_eig(a)?;
    // Pure first argument: F = ⟨ψ|b|ψ⟩.
    let nonzero = ea.values.iter().filter(|&&x| clamp_eigenvalue(x) > 0.0).count();
    if nonzero == 1 {
        let w = clamp_eigenvalue(ea.values[0]);
        let v = ea.vector(0);
        return Ok((w * inner(&v, &b.mul_vec(&v)).re).clamp(0.0, 1.0));
    }
    let sa = ea.apply_fn(|x| clamp_eigenvalue(x).sqrt());
    let m = sa.mul(b).mul(&sa);
    let root: f64 = hermitian_eig(&m.hermitian_part())?.values.iter().map(|&x| clamp_eigenvalue(x).sqrt()).sum();
    Ok((root * root).clamp(0.0, 1.0))
}

/// ⟨ψ|ρ|ψ⟩ for pure ψ.
pub fn pure_fidelity(psi: &PureState, rho: &DensityMatrix) -> Result<f64> {
    if psi.dim() != rho.dim() {
        return Err(Error::DimensionMismatch("fidelity operands".into()));
    }
    Ok(rho.expectation(psi.vector()).clamp(0.0, 1.0))
}

/// F_e(ρ, N) = ⟨Ψ|(id ⊗ N)(|Ψ⟩⟨Ψ|)|Ψ⟩ over a purification Ψ of ρ.
pub fn entanglement_fidelity(rho: &DensityMatrix, channel: &KrausChannel) -> Result<f64> {
    let d = rho.dim();
    if channel.in_dim() != d || channel.out_dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "channel {}→{} on a {d}-dim state",
            channel.in_dim(),
            channel.out_dim()
        )));
    }
    let psi = purify(rho)?;
    entanglement_fidelity_with(&psi, channel)
}

/// Entanglement fidelity evaluated with an explicit purification (system ⊗ reference).
pub fn entanglement_fidelity_with(psi: &PureState, channel: &KrausChannel) -> Result<f64> {
    let d = channel.in_dim();
    if !psi.dim().is_multiple_of(d) {
        return Err(Error::DimensionMismatch("purification does not contain the channel input".into()));
    }
    let r = psi.dim() / d;
    let dims = [d, r];
    let mut total = 0.0;
    for k in channel.kraus() {
        let w = super::subsystem::apply_local_vector(psi.vector(), &dims, 0, 1, k)?;
        total += inner(psi.vector(), &w).norm_sqr();
    }
    Ok(total.clamp(0.0, 1.0))
}
