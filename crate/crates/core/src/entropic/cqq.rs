use super::{entropy_from_spectrum, mixture_entropy};
use crate::channels::{CqChannel, KrausChannel};
use crate::error::{Error, Result};
use crate::qmatrix::{check_distribution, hermitian_eig, kron_vec, ComplexMatrix, DensityMatrix, Mixture, PureState, ZERO};

/// Largest total dimension for which `CqqState::to_dense` assembles the full matrix.
pub const DENSE_LIMIT: usize = 1024;

/// Σ_x p(x) |x⟩⟨x| ⊗ ρ_x with ρ_x on B ⊗ C, kept block by block.
#[derive(Clone, Debug, PartialEq)]
pub struct CqqState {
    probs: Vec<f64>,
    /// Normalised conditional states on [B, C]; an empty mixture where p(x) = 0.
    blocks: Vec<Mixture>,
    b_dim: usize,
    c_dim: usize,
}

impl CqqState {
    /// `blocks[x]` must be the conditional state ρ_x (unit trace wherever p(x) > 0).
    pub fn from_blocks(probs: Vec<f64>, blocks: Vec<Mixture>, b_dim: usize, c_dim: usize) -> Result<Self> {
        check_distribution(&probs)?;
        if blocks.len() != probs.len() {
            return Err(Error::DimensionMismatch(format!("{} blocks for {} labels", blocks.len(), probs.len())));
        }
        for (x, (b, &p)) in blocks.iter().zip(&probs).enumerate() {
            if b.dims() != [b_dim, c_dim] {
                return Err(Error::DimensionMismatch(format!("block {x} has dims {:?}", b.dims())));
            }
            if p > 0.0 && (b.trace() - 1.0).abs() > 1e-8 {
                return Err(Error::InvalidState(format!("conditional state {x} has trace {}", b.trace())));
            }
        }
        Ok(Self { probs, blocks, b_dim, c_dim })
    }

    /// From a dense state on X ⊗ B ⊗ C; blocks between distinct labels must vanish.
    pub fn from_dense(rho: &DensityMatrix) -> Result<Self> {
        let dims = rho.dims();
        if dims.len() != 3 {
            return Err(Error::DimensionMismatch(format!("expected dims [X, B, C], got {dims:?}")));
        }
        let (nx, b, c) = (dims[0], dims[1], dims[2]);
        let s = b * c;
        let m = rho.matrix();
        let mut probs = Vec::with_capacity(nx);
        let mut blocks = Vec::with_capacity(nx);
        for x in 0..nx {
            for y in 0..nx {
                if x == y {
                    continue;
                }
                for i in 0..s {
                    for j in 0..s {
                        if m[(x * s + i, y * s + j)].norm() > 1e-10 {
                            return Err(Error::InvalidState(format!("coherence between labels {x} and {y}")));
                        }
                    }
                }
            }
            let blk = ComplexMatrix::from_fn(s, s, |i, j| m[(x * s + i, x * s + j)]);
            let p = blk.trace().re.max(0.0);
            probs.push(p);
            let cond = if p > 0.0 { Mixture::from_psd(&blk.scale_real(1.0 / p), vec![b, c])? } else { Mixture::empty(vec![b, c]) };
            blocks.push(cond);
        }
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        Self::from_blocks(probs, blocks, b, c)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn b_dim(&self) -> usize {
        self.b_dim
    }

    pub fn c_dim(&self) -> usize {
        self.c_dim
    }

    pub fn conditional(&self, x: usize) -> &Mixture {
        &self.blocks[x]
    }

    /// p(x) ρ_x as a dense matrix on B ⊗ C.
    pub fn block(&self, x: usize) -> ComplexMatrix {
        self.blocks[x].to_dense().scale_real(self.probs[x])
    }

    pub fn to_dense(&self) -> Result<DensityMatrix> {
        let s = self.b_dim * self.c_dim;
        let n = s * self.alphabet_size();
        if n > DENSE_LIMIT {
            return Err(Error::BudgetExceeded { required: n, budget: DENSE_LIMIT });
        }
        let mut m = ComplexMatrix::zeros(n, n);
        for x in 0..self.alphabet_size() {
            let blk = self.block(x);
            for i in 0..s {
                for j in 0..s {
                    m[(x * s + i, x * s + j)] = blk[(i, j)];
                }
            }
        }
        Ok(DensityMatrix::from_parts_unchecked(m, vec![self.alphabet_size(), self.b_dim, self.c_dim]))
    }

    /// ρ_x^C
    pub fn c_marginal(&self, x: usize) -> Result<Mixture> {
        if self.blocks[x].count() == 0 {
            return Ok(Mixture::empty(vec![self.c_dim]));
        }
        self.blocks[x].reduce(&[1])
    }

    /// Σ_x p(x) ρ_x^C
    pub fn average_c(&self) -> Result<ComplexMatrix> {
        let mut acc = ComplexMatrix::zeros(self.c_dim, self.c_dim);
        for x in 0..self.alphabet_size() {
            if self.probs[x] > 0.0 {
                acc.add_assign_scaled(&self.c_marginal(x)?.to_dense(), crate::C64::new(self.probs[x], 0.0));
            }
        }
        Ok(acc)
    }

    /// I(X;C) = S(Σ p ρ_x^C) − Σ p S(ρ_x^C).
    pub fn holevo_xc(&self) -> Result<f64> {
        let avg = self.average_c()?;
        let spec: Vec<f64> = hermitian_eig(&avg)?.values;
        let mut v = entropy_from_spectrum(&spec);
        for x in 0..self.alphabet_size() {
            if self.probs[x] > 0.0 {
                v -= self.probs[x] * mixture_entropy(&self.c_marginal(x)?)?;
            }
        }
        Ok(v)
    }

    /// I_c(B⟩CX) = Σ p(x) [S(ρ_x^C) − S(ρ_x^{BC})].
    pub fn coherent_b_given_cx(&self) -> Result<f64> {
        let mut v = 0.0;
        for x in 0..self.alphabet_size() {
            if self.probs[x] > 0.0 {
                v += self.probs[x] * (mixture_entropy(&self.c_marginal(x)?)? - mixture_entropy(&self.blocks[x])?);
            }
        }
        Ok(v)
    }

    /// ω₁ ⊗ ω₂ regrouped as (X₁X₂) ⊗ (B₁B₂) ⊗ (C₁C₂).
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut probs = Vec::with_capacity(self.alphabet_size() * other.alphabet_size());
        let mut blocks = Vec::with_capacity(probs.capacity());
        let dims = vec![self.b_dim, self.c_dim, other.b_dim, other.c_dim];
        for x in 0..self.alphabet_size() {
            for y in 0..other.alphabet_size() {
                probs.push(self.probs[x] * other.probs[y]);
                let mut vs = Vec::with_capacity(self.blocks[x].count() * other.blocks[y].count());
                for u in self.blocks[x].vectors() {
                    for w in other.blocks[y].vectors() {
                        vs.push(kron_vec(u, w));
                    }
                }
                let joint = Mixture::from_vectors(vs, dims.clone())?.permute(&[0, 2, 1, 3])?;
                let joint = Mixture::from_vectors(joint.vectors().to_vec(), vec![self.b_dim * other.b_dim, self.c_dim * other.c_dim])?;
                blocks.push(joint);
            }
        }
        Self::from_blocks(probs, blocks, self.b_dim * other.b_dim, self.c_dim * other.c_dim)
    }
}

/// ω = Σ_x p(x) |x⟩⟨x| ⊗ (id_B' ⊗ T)(V(x) ⊗ Ψ), where Ψ lives on B' ⊗ B and T maps A ⊗ B to C.
pub fn effective_cqq_state(t: &KrausChannel, p: &[f64], v: &CqChannel, psi: &PureState) -> Result<CqqState> {
    check_distribution(p)?;
    if p.len() != v.alphabet_size() {
        return Err(Error::DimensionMismatch(format!("{} probabilities for alphabet of size {}", p.len(), v.alphabet_size())));
    }
    let da = v.output_dim();
    if !t.in_dim().is_multiple_of(da) {
        return Err(Error::DimensionMismatch(format!("channel input {} does not contain A of dimension {da}", t.in_dim())));
    }
    let db = t.in_dim() / da;
    if t.in_dims().len() == 2 && t.in_dims()[0] != da {
        return Err(Error::DimensionMismatch(format!("channel inputs {:?} but V outputs dimension {da}", t.in_dims())));
    }
    if !psi.dim().is_multiple_of(db) {
        return Err(Error::DimensionMismatch(format!("Ψ of dimension {} does not contain B of dimension {db}", psi.dim())));
    }
    let dref = psi.dim() / db;
    let dc = t.out_dim();
    let kraus = t.kraus();
    let mut blocks = Vec::with_capacity(p.len());
    for x in 0..p.len() {
        if p[x] == 0.0 {
            blocks.push(Mixture::empty(vec![dref, dc]));
            continue;
        }
        let f = v.factor(x);
        let mut vectors = Vec::new();
        for col in 0..f.cols() {
            let a = f.col(col);
            for k in kraus {
                // w[r, c] = Σ_{i, b} K[c, i·db + b] a_i Ψ[r, b]
                let mut ka = ComplexMatrix::zeros(dc, db);
                for c in 0..dc {
                    for (i, &ai) in a.iter().enumerate() {
                        if ai == ZERO {
                            continue;
                        }
                        for b in 0..db {
                            ka[(c, b)] += k[(c, i * db + b)] * ai;
                        }
                    }
                }
                let mut w = vec![ZERO; dref * dc];
                for r in 0..dref {
                    for b in 0..db {
                        let s = psi.vector()[r * db + b];
                        if s == ZERO {
                            continue;
                        }
                        for c in 0..dc {
                            w[r * dc + c] += ka[(c, b)] * s;
                        }
                    }
                }
                if w.iter().any(|z| *z != ZERO) {
                    vectors.push(w);
                }
            }
        }
        blocks.push(Mixture::from_vectors(vectors, vec![dref, dc])?.compress()?);
    }
    CqqState::from_blocks(p.to_vec(), blocks, dref, dc)
}
