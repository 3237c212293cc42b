use crate::error::{Error, Result};
use crate::qmatrix::{clamp_eigenvalue, hermitian_eig, kron_all, ComplexMatrix, DensityMatrix, PureState, C64};

/// Finite alphabet → quantum states.
#[derive(Clone, Debug, PartialEq)]
pub struct CqChannel {
    outputs: Vec<DensityMatrix>,
    /// ρ_x = F_x F_x†, F_x of shape d × rank(ρ_x).
    factors: Vec<ComplexMatrix>,
}

impl CqChannel {
    pub fn new(outputs: Vec<DensityMatrix>) -> Result<Self> {
        let first = outputs.first().ok_or_else(|| Error::InvalidArgument("empty alphabet".into()))?;
        let d = first.dim();
        if outputs.iter().any(|o| o.dim() != d) {
            return Err(Error::DimensionMismatch("cq outputs of different dimensions".into()));
        }
        let factors = outputs.iter().map(factor_of).collect::<Result<Vec<_>>>()?;
        Ok(Self { outputs, factors })
    }

    pub fn from_pure(states: &[PureState]) -> Result<Self> {
        let first = states.first().ok_or_else(|| Error::InvalidArgument("empty alphabet".into()))?;
        let d = first.dim();
        if states.iter().any(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch("cq outputs of different dimensions".into()));
        }
        Ok(Self {
            outputs: states.iter().map(PureState::to_density).collect(),
            factors: states.iter().map(|s| ComplexMatrix::column(s.vector())).collect(),
        })
    }

    /// x ↦ |x⟩⟨x| on ℂ^d for x < d.
    pub fn computational_basis(d: usize) -> Self {
        let states: Vec<PureState> = (0..d).map(|x| PureState::basis(d, x)).collect();
        Self::from_pure(&states).expect("basis states share a dimension")
    }

    pub fn alphabet_size(&self) -> usize {
        self.outputs.len()
    }

    pub fn output_dim(&self) -> usize {
        self.outputs[0].dim()
    }

    pub fn output(&self, x: usize) -> &DensityMatrix {
        &self.outputs[x]
    }

    pub fn outputs(&self) -> &[DensityMatrix] {
        &self.outputs
    }

    pub fn factor(&self, x: usize) -> &ComplexMatrix {
        &self.factors[x]
    }

    pub fn is_pure(&self) -> bool {
        self.factors.iter().all(|f| f.cols() == 1)
    }

    /// Output vector of a pure letter.
    pub fn pure_vector(&self, x: usize) -> Option<Vec<C64>> {
        (self.factors[x].cols() == 1).then(|| self.factors[x].col(0))
    }

    /// Factor of W^{⊗n}(word) = ⊗ F_{x_i}.
    pub fn word_factor(&self, word: &[usize]) -> ComplexMatrix {
        kron_all(word.iter().map(|&x| &self.factors[x]))
    }

    /// Letters (x, y) ↦ W₁(x) ⊗ W₂(y), indexed x·|𝒴| + y.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut outputs = Vec::with_capacity(self.alphabet_size() * other.alphabet_size());
        let mut factors = Vec::with_capacity(outputs.capacity());
        for x in 0..self.alphabet_size() {
            for y in 0..other.alphabet_size() {
                outputs.push(self.outputs[x].tensor(&other.outputs[y]));
                factors.push(self.factors[x].kron(&other.factors[y]));
            }
        }
        Self { outputs, factors }
    }

    pub fn word_output(&self, word: &[usize]) -> DensityMatrix {
        let f = self.word_factor(word);
        let m = f.mul_adjoint(&f);
        let dims = vec![self.output_dim(); word.len()];
        DensityMatrix::from_parts_unchecked(m, dims)
    }
}

fn factor_of(rho: &DensityMatrix) -> Result<ComplexMatrix> {
    let e = hermitian_eig(rho.matrix())?;
    let cols: Vec<Vec<C64>> = e
        .values
        .iter()
        .enumerate()
        .filter_map(|(k, &lam)| {
            let w = clamp_eigenvalue(lam);
            (w > 1e-12).then(|| e.vectors.col(k).into_iter().map(|z| z * w.sqrt()).collect())
        })
        .collect();
    Ok(ComplexMatrix::from_columns(&cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_channel_is_pure_and_orthogonal() {
        let w = CqChannel::computational_basis(3);
        assert!(w.is_pure());
        assert_eq!(w.alphabet_size(), 3);
        assert_eq!(w.word_output(&[2, 0]).matrix()[(6, 6)].re, 1.0);
    }

    #[test]
    fn mixed_outputs_round_trip_through_factors() {
        let st = DensityMatrix::diagonal(&[0.25, 0.75]).unwrap();
        let w = CqChannel::new(vec![st.clone(), DensityMatrix::basis(2, 0)]).unwrap();
        assert!(!w.is_pure());
        let f = w.factor(0);
        assert!(f.mul_adjoint(f).max_abs_diff(st.matrix()) < 1e-14);
        assert_eq!(w.pure_vector(0), None);
        assert!(w.pure_vector(1).is_some());
    }
}
