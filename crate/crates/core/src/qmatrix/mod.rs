//! Dense complex linear algebra and quantum-state primitives.

mod eig;
mod matrix;
mod mixture;
mod state;
pub mod subsystem;

pub use eig::{
    clamp_eigenvalue, hermitian_eig, inv_sqrt_psd, sqrt_psd, trace_norm, trace_norm_hermitian, Eigen, EIGEN_ZERO,
    HERMITICITY_TOL, MAX_SWEEPS,
};
pub use matrix::{inner, kron_all, kron_vec, norm_sqr, ComplexMatrix, C64, ONE, ZERO};
pub use mixture::{orthonormal_span, trace_distance_norm, Mixture};
pub use state::{
    entanglement_fidelity, entanglement_fidelity_with, fidelity, partial_trace, pure_fidelity, purify, DensityMatrix,
    PureState, STATE_TOL,
};
pub(crate) use state::check_distribution;

/// a ⊗ b
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}
