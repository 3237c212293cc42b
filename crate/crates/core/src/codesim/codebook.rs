use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_budget, whitened};
use crate::channels::CqChannel;
use crate::error::{Error, Result};
use crate::qmatrix::{check_distribution, inv_sqrt_psd, ComplexMatrix, C64};

/// Tolerance on Σ_m D_m = I.
pub const POVM_TOL: f64 = 1e-8;

/// Codewords u_m ∈ 𝒳ⁿ with a decoding POVM {D_m}.
#[derive(Clone, Debug, PartialEq)]
pub struct CqCodebook {
    codewords: Vec<Vec<usize>>,
    povm: Vec<ComplexMatrix>,
    sqrt_povm: Vec<ComplexMatrix>,
}

impl CqCodebook {
    /// √D_m is computed here; use `with_roots` when it is known in closed form.
    pub fn new(codewords: Vec<Vec<usize>>, povm: Vec<ComplexMatrix>) -> Result<Self> {
        let sqrt_povm = povm.iter().map(crate::qmatrix::sqrt_psd).collect::<Result<Vec<_>>>()?;
        Self::with_roots(codewords, povm, sqrt_povm)
    }

    fn with_roots(codewords: Vec<Vec<usize>>, povm: Vec<ComplexMatrix>, sqrt_povm: Vec<ComplexMatrix>) -> Result<Self> {
        if codewords.is_empty() || codewords.len() != povm.len() {
            return Err(Error::DimensionMismatch(format!("{} codewords for {} POVM elements", codewords.len(), povm.len())));
        }
        let d = povm[0].rows();
        let mut acc = ComplexMatrix::zeros(d, d);
        for e in &povm {
            if e.rows() != d || e.cols() != d {
                return Err(Error::DimensionMismatch("POVM elements of different sizes".into()));
            }
            acc.add_assign_scaled(e, C64::new(1.0, 0.0));
        }
        let defect = acc.max_abs_diff(&ComplexMatrix::identity(d));
        if defect > POVM_TOL {
            return Err(Error::NotTracePreserving(defect));
        }
        Ok(Self { codewords, povm, sqrt_povm })
    }

    pub fn codewords(&self) -> &[Vec<usize>] {
        &self.codewords
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn block_length(&self) -> usize {
        self.codewords[0].len()
    }

    pub fn povm(&self) -> &[ComplexMatrix] {
        &self.povm
    }

    pub fn sqrt_povm(&self) -> &[ComplexMatrix] {
        &self.sqrt_povm
    }

    pub fn output_dim(&self) -> usize {
        self.povm[0].rows()
    }
}

/// Square-root measurement for states ρ_m = F_m F_m†, with the kernel of Σρ_m assigned to
/// message 0. Returns (D_m, √D_m).
pub fn pretty_good_measurement(factors: &[ComplexMatrix]) -> Result<(Vec<ComplexMatrix>, Vec<ComplexMatrix>)> {
    let d = factors.first().ok_or_else(|| Error::InvalidArgument("no states".into()))?.rows();
    let widths: Vec<usize> = factors.iter().map(|f| f.cols()).collect();
    let total: usize = widths.iter().sum();
    let all = ComplexMatrix::from_fn(d, total, |r, c| {
        let mut c = c;
        for (f, &w) in factors.iter().zip(&widths) {
            if c < w {
                return f[(r, c)];
            }
            c -= w;
        }
        unreachable!()
    });
    let q = whitened(&all)?;
    let mut povm = Vec::with_capacity(factors.len());
    let mut roots = Vec::with_capacity(factors.len());
    let mut offset = 0;
    for &w in &widths {
        let g = ComplexMatrix::from_fn(d, w, |r, c| q[(r, offset + c)]);
        offset += w;
        let gram = g.adjoint_mul(&g);
        let top = gram.max_abs();
        povm.push(g.mul_adjoint(&g));
        roots.push(g.mul(&inv_sqrt_psd(&gram, 1e-11 * top.max(1e-300))?).mul_adjoint(&g));
    }
    let perp = ComplexMatrix::identity(d).sub(&q.mul_adjoint(&q));
    povm[0].add_assign_scaled(&perp, C64::new(1.0, 0.0));
    roots[0].add_assign_scaled(&perp, C64::new(1.0, 0.0));
    Ok((povm, roots))
}

/// Codewords i.i.d. from pⁿ.
pub fn sample_codewords(p: &[f64], n: usize, m1: usize, rng: &mut impl Rng) -> Result<Vec<Vec<usize>>> {
    check_distribution(p)?;
    let dist = WeightedIndex::new(p).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    Ok((0..m1).map(|_| (0..n).map(|_| dist.sample(rng)).collect()).collect())
}

/// Square-root decoder for the given words against the member-averaged outputs (1/|S|) Σ_s W_s^{⊗n}(u).
pub fn codebook_for_words(family: &[CqChannel], words: Vec<Vec<usize>>) -> Result<CqCodebook> {
    let first = family.first().ok_or_else(|| Error::InvalidArgument("empty cq family".into()))?;
    let n = words.first().map_or(0, |w| w.len());
    let d = first.output_dim().checked_pow(n as u32).unwrap_or(usize::MAX);
    check_budget(d)?;
    let s = 1.0 / (family.len() as f64).sqrt();
    let factors: Vec<ComplexMatrix> = words
        .iter()
        .map(|u| {
            let parts: Vec<ComplexMatrix> = family.iter().map(|w| w.word_factor(u)).collect();
            let cols: usize = parts.iter().map(|p| p.cols()).sum();
            let mut f = ComplexMatrix::zeros(d, cols);
            let mut off = 0;
            for p in &parts {
                for r in 0..d {
                    for c in 0..p.cols() {
                        f[(r, off + c)] = p[(r, c)] * s;
                    }
                }
                off += p.cols();
            }
            f
        })
        .collect();
    let (povm, roots) = pretty_good_measurement(&factors)?;
    CqCodebook::with_roots(words, povm, roots)
}

/// Random codebook of `m1` words from pⁿ, decoded by the square-root measurement.
pub fn sample_cq_codebook(family: &[CqChannel], p: &[f64], n: usize, m1: usize, seed: u64) -> Result<CqCodebook> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = sample_codewords(p, n, m1, &mut rng)?;
    codebook_for_words(family, words)
}

/// (1/M) Σ_m tr[(I − D_m) W^{⊗n}(u_m)]
pub fn average_error(cb: &CqCodebook, w: &CqChannel) -> Result<f64> {
    let mut total = 0.0;
    for (u, d) in cb.codewords().iter().zip(cb.povm()) {
        let f = w.word_factor(u);
        if f.rows() != d.rows() {
            return Err(Error::DimensionMismatch(format!("codeword output {} vs POVM {}", f.rows(), d.rows())));
        }
        let hit = d.mul(&f);
        let mut success = 0.0;
        for c in 0..f.cols() {
            for r in 0..f.rows() {
                success += (f[(r, c)].conj() * hit[(r, c)]).re;
            }
        }
        total += 1.0 - success;
    }
    Ok((total / cb.len() as f64).clamp(0.0, 1.0))
}
