//! Desk-scale entanglement-transmission and entanglement-generation codes over blocked
//! multiple-access channels: random cq codebooks with square-root decoding, random subspace
//! codes with pretty-good recovery, the hybrid combination and code transformations.

mod code;
mod codebook;
mod converse;
mod hybrid;
mod random;
mod transform;

pub use code::{EgCode, EtCode, COMPLETENESS_TOL};
pub use codebook::{average_error, codebook_for_words, pretty_good_measurement, sample_codewords, sample_cq_codebook, CqCodebook, POVM_TOL};
pub use converse::{converse_check, ConverseReport, MemberBound};
pub use hybrid::{
    averaged_cq_family, chain_check, combine_hybrid, sample_hybrid_code, simulate, ChainCheck, HybridInstance, MessageChain, SimulationConfig,
    SimulationReport, SimulationRow, TrendRow,
};
pub use random::{expected_encoding_defect, haar_isometry, pretty_good_recovery, sample_et_code, sample_et_encoder, EtPair, DEFAULT_ENCODER_SAMPLES};
pub use transform::{concatenate, encoded_spectrum, et_to_eg, pad, product_channel, LetterDims};

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::qmatrix::{inv_sqrt_psd, orthonormal_span, ComplexMatrix, C64, ZERO};

/// Largest block dimension (per side) handled by the code simulator.
pub const CODE_DIM_BUDGET: usize = 256;

/// T^{⊗n} with inputs grouped as A^n ⊗ B^n, within the simulator budget.
pub fn block_channel(t: &KrausChannel, n: usize) -> Result<KrausChannel> {
    if n == 1 {
        return Ok(t.clone());
    }
    t.mac_tensor_power(n, CODE_DIM_BUDGET)
}

/// For B of shape D × N with Σ = BB†: Σ^{-1/2}B restricted to the support of Σ.
/// Uses the N × N Gram matrix when N < D.
pub(crate) fn whitened(b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (d, n) = (b.rows(), b.cols());
    if n < d {
        let g = b.adjoint_mul(b);
        let top = g.max_abs();
        Ok(b.mul(&inv_sqrt_psd(&g, 1e-11 * top.max(1e-300))?))
    } else {
        let s = b.mul_adjoint(b);
        let top = s.max_abs();
        Ok(inv_sqrt_psd(&s, 1e-11 * top.max(1e-300))?.mul(b))
    }
}

/// Orthonormal basis of the orthogonal complement of the column span of `q`.
pub(crate) fn complement_basis(q: &ComplexMatrix) -> Vec<Vec<C64>> {
    let d = q.rows();
    let range: Vec<Vec<C64>> = orthonormal_span(&(0..q.cols()).map(|j| q.col(j)).collect::<Vec<_>>().iter().map(|v| v.as_slice()).collect::<Vec<_>>(), d);
    let r = range.len();
    let mut all = range;
    let units: Vec<Vec<C64>> = (0..d)
        .map(|i| {
            let mut e = vec![ZERO; d];
            e[i] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    all.extend(units);
    let refs: Vec<&[C64]> = all.iter().map(|v| v.as_slice()).collect();
    let mut basis = orthonormal_span(&refs, d);
    basis.drain(..r.min(basis.len()));
    basis
}

/// Column vector |a⟩ ⊗ Z as a matrix (rows a·Z.rows).
pub(crate) fn kron_column(a: &[C64], z: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::column(a).kron(z)
}

/// tr(R L)
pub(crate) fn trace_product(r: &ComplexMatrix, l: &ComplexMatrix) -> C64 {
    debug_assert_eq!(r.cols(), l.rows());
    debug_assert_eq!(r.rows(), l.cols());
    let mut acc = ZERO;
    for i in 0..r.rows() {
        let row = r.row(i);
        for (k, rk) in row.iter().enumerate() {
            acc += rk * l[(k, i)];
        }
    }
    acc
}

pub(crate) fn check_budget(dim: usize) -> Result<()> {
    if dim > CODE_DIM_BUDGET {
        return Err(Error::BudgetExceeded { required: dim, budget: CODE_DIM_BUDGET });
    }
    Ok(())
}
