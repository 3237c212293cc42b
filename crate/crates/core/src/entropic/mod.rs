//! Entropic functionals (base-2 logarithms) and the effective cqq state.

mod bounds;
mod cqq;

pub use bounds::{alicki_fannes_bound, binary_entropy, holevo_fano_rate_bound, quantum_rate_slack, fano_error_parameter};
pub use cqq::{effective_cqq_state, CqqState, DENSE_LIMIT};

use crate::error::Result;
use crate::qmatrix::subsystem::validate_parts;
use crate::qmatrix::{DensityMatrix, Mixture, EIGEN_ZERO};

/// −Σ λ log₂ λ over eigenvalues above the zero threshold.
pub fn entropy_from_spectrum(spectrum: &[f64]) -> f64 {
    spectrum.iter().filter(|&&x| x > EIGEN_ZERO).map(|&x| -x * x.log2()).sum::<f64>().max(0.0)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let s = entropy_from_spectrum(&rho.spectrum()?);
    Ok(s.min((rho.dim() as f64).log2()))
}

/// Entropy of the normalised mixture; zero for a zero operator.
pub fn mixture_entropy(m: &Mixture) -> Result<f64> {
    let t = m.trace();
    if !(t > 0.0) {
        return Ok(0.0);
    }
    let spec: Vec<f64> = m.spectrum()?.into_iter().map(|x| x / t).collect();
    Ok(entropy_from_spectrum(&spec).min((m.dim() as f64).log2()))
}

fn marginal_entropy(rho: &DensityMatrix, part: &[usize]) -> Result<f64> {
    if part.len() == rho.dims().len() {
        return von_neumann_entropy(rho);
    }
    von_neumann_entropy(&rho.partial_trace(part)?)
}

/// I_c(A⟩B, ρ) = S(ρ_B) − S(ρ_AB). Subsystems outside both parts are traced out.
pub fn coherent_information(rho: &DensityMatrix, first_part: &[usize], second_part: &[usize]) -> Result<f64> {
    validate_parts(rho.dims().len(), &[first_part, second_part])?;
    let joint: Vec<usize> = first_part.iter().chain(second_part).copied().collect();
    Ok(marginal_entropy(rho, second_part)? - marginal_entropy(rho, &joint)?)
}

/// I(A;B, ρ) = S(ρ_A) + S(ρ_B) − S(ρ_AB).
pub fn quantum_mutual_information(rho: &DensityMatrix, part_a: &[usize], part_b: &[usize]) -> Result<f64> {
    validate_parts(rho.dims().len(), &[part_a, part_b])?;
    let joint: Vec<usize> = part_a.iter().chain(part_b).copied().collect();
    Ok(marginal_entropy(rho, part_a)? + marginal_entropy(rho, part_b)? - marginal_entropy(rho, &joint)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::library;
    use crate::qmatrix::{ComplexMatrix, PureState};
    use crate::Error;

    #[test]
    fn entropy_examples() {
        assert!(von_neumann_entropy(&DensityMatrix::basis(3, 1)).unwrap().abs() < 1e-12);
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(&[2])).unwrap() - 1.0).abs() < 1e-12);
        let rho = DensityMatrix::diagonal(&[0.25, 0.75]).unwrap();
        let oracle = -(0.25f64 * 0.25f64.log2() + 0.75 * 0.75f64.log2());
        assert!((von_neumann_entropy(&rho).unwrap() - oracle).abs() < 1e-12);
        assert!((oracle - 0.8113).abs() < 1e-4);
    }

    #[test]
    fn coherent_information_examples() {
        let bell = PureState::maximally_entangled(2).to_density();
        assert!((coherent_information(&bell, &[0], &[1]).unwrap() - 1.0).abs() < 1e-12);
        let a = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
        let b = DensityMatrix::diagonal(&[0.5, 0.5]).unwrap();
        let ab = a.tensor(&b);
        let sa = von_neumann_entropy(&a).unwrap();
        assert!((coherent_information(&ab, &[0], &[1]).unwrap() + sa).abs() < 1e-12);
    }

    #[test]
    fn erased_half_of_bell_pair_has_zero_coherent_information() {
        let bell = PureState::maximally_entangled(2).to_density();
        let er = library::identity(2).tensor(&library::erasure(2, 0.5).unwrap());
        let out = er.apply(&bell).unwrap();
        // direct entropy computation on the 2 ⊗ 3 output
        let ic = coherent_information(&out, &[0], &[1]).unwrap();
        assert!(ic.abs() < 1e-12, "{ic}");
    }

    #[test]
    fn mutual_information_examples() {
        let a = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
        assert!(quantum_mutual_information(&a.tensor(&a), &[0], &[1]).unwrap().abs() < 1e-12);
        let bell = PureState::maximally_entangled(2).to_density();
        assert!((quantum_mutual_information(&bell, &[0], &[1]).unwrap() - 2.0).abs() < 1e-12);
        let cc = DensityMatrix::new(ComplexMatrix::from_diag(&[0.5, 0.0, 0.0, 0.5]), vec![2, 2]).unwrap();
        // classical oracle: H(X) + H(Y) − H(XY) = 1 + 1 − 1
        assert!((quantum_mutual_information(&cc, &[0], &[1]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_partitions_rejected() {
        let bell = PureState::maximally_entangled(2).to_density();
        assert!(matches!(coherent_information(&bell, &[0], &[0]), Err(Error::BadPartition(_))));
        assert!(matches!(quantum_mutual_information(&bell, &[0], &[]), Err(Error::BadPartition(_))));
        assert!(matches!(quantum_mutual_information(&bell, &[0], &[5]), Err(Error::SubsystemOutOfRange { .. })));
    }
}
