use super::kraus::KrausChannel;
use crate::error::{Error, Result};
use crate::qmatrix::subsystem::partial_trace_matrix;
use crate::qmatrix::{hermitian_eig, trace_norm_hermitian, ComplexMatrix, C64, ZERO};

/// J = Σ_{ij} |i⟩⟨j| ⊗ N(|i⟩⟨j|) on input ⊗ output; trace equals the input dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    matrix: ComplexMatrix,
    in_dim: usize,
    out_dim: usize,
}

impl ChoiMatrix {
    pub fn from_kraus(ch: &KrausChannel) -> Self {
        let (din, dout) = (ch.in_dim(), ch.out_dim());
        let n = din * dout;
        let mut m = ComplexMatrix::zeros(n, n);
        for k in ch.kraus() {
            let v: Vec<C64> = (0..n).map(|f| k[(f % dout, f / dout)]).collect();
            for (a, &va) in v.iter().enumerate() {
                if va == ZERO {
                    continue;
                }
                for (b, &vb) in v.iter().enumerate() {
                    m[(a, b)] += va * vb.conj();
                }
            }
        }
        Self { matrix: m, in_dim: din, out_dim: dout }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(*hermitian_eig(&self.matrix)?.values.last().unwrap_or(&0.0))
    }

    /// tr_out J, which is the identity iff the map is trace preserving.
    pub fn input_marginal(&self) -> ComplexMatrix {
        partial_trace_matrix(&self.matrix, &[self.in_dim, self.out_dim], &[0]).expect("choi dims are consistent")
    }

    pub fn is_cptp(&self, tol: f64) -> Result<bool> {
        let psd = self.min_eigenvalue()? >= -tol;
        let tp = self.input_marginal().max_abs_diff(&ComplexMatrix::identity(self.in_dim)) <= tol;
        Ok(psd && tp)
    }

    /// N(ρ) = tr_in[(ρᵀ ⊗ I) J]
    pub fn contract(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != self.in_dim || !rho.is_square() {
            return Err(Error::DimensionMismatch("Choi contraction input".into()));
        }
        let big = rho.transpose().kron(&ComplexMatrix::identity(self.out_dim)).mul(&self.matrix);
        partial_trace_matrix(&big, &[self.in_dim, self.out_dim], &[1])
    }
}

/// Bounds on the diamond distance from the Choi trace norm:
/// ‖J_a − J_b‖₁ / d_in ≤ ‖a − b‖_⋄ ≤ ‖J_a − J_b‖₁.
pub fn diamond_distance_bounds(a: &KrausChannel, b: &KrausChannel) -> Result<(f64, f64)> {
    if a.in_dim() != b.in_dim() || a.out_dim() != b.out_dim() {
        return Err(Error::DimensionMismatch(format!(
            "channels {}→{} and {}→{}",
            a.in_dim(),
            a.out_dim(),
            b.in_dim(),
            b.out_dim()
        )));
    }
    let diff = a.choi().matrix().sub(b.choi().matrix());
    let upper = trace_norm_hermitian(&diff)?;
    Ok((upper / a.in_dim() as f64, upper))
}
