use super::code::{EgCode, EtCode};
use crate::channels::{ChannelKind, KrausChannel};
use crate::error::{Error, Result};
use crate::qmatrix::{clamp_eigenvalue, hermitian_eig, inner, ComplexMatrix, PureState, C64, ZERO};

/// T1 ⊗ T2 as a two-sender channel on (A1A2) ⊗ (B1B2) → C1C2.
pub fn product_channel(t1: &KrausChannel, t2: &KrausChannel) -> Result<KrausChannel> {
    let dims = |t: &KrausChannel| match t.in_dims() {
        [a, b] => Ok((*a, *b)),
        d => Err(Error::DimensionMismatch(format!("multiple-access channel needs two inputs, got {d:?}"))),
    };
    let (a1, b1) = dims(t1)?;
    let (a2, b2) = dims(t2)?;
    t1.tensor(t2).permute_inputs(&[0, 2, 1, 3])?.with_dims(vec![a1 * a2, b1 * b2], vec![t1.out_dim() * t2.out_dim()])
}

fn tensor_all(chs: &[&KrausChannel], kind: ChannelKind) -> KrausChannel {
    let mut acc = chs[0].clone();
    for c in &chs[1..] {
        acc = acc.tensor(c);
    }
    let (i, o) = (acc.in_dim(), acc.out_dim());
    KrausChannel::from_parts_unchecked(acc.kraus().to_vec(), vec![i], vec![o], kind)
}

/// Tensor-product code; message (m_1, …, m_k) ↦ Σ m_i Π_{j>i} M_j (first code most significant).
/// On the product of the codes' channels its performance is the product of theirs.
pub fn concatenate(codes: &[EtCode]) -> Result<EtCode> {
    let first = codes.first().ok_or_else(|| Error::InvalidArgument("nothing to concatenate".into()))?;
    if codes.len() == 1 {
        return Ok(first.clone());
    }
    let total: usize = codes.iter().map(|c| c.m1()).product();
    let mut classical = Vec::with_capacity(total);
    let mut decoder = Vec::with_capacity(total);
    for m in 0..total {
        let mut rest = m;
        let mut digits = vec![0; codes.len()];
        for (i, c) in codes.iter().enumerate().rev() {
            digits[i] = rest % c.m1();
            rest /= c.m1();
        }
        let mut f = ComplexMatrix::identity(1);
        for (c, &d) in codes.iter().zip(&digits) {
            f = f.kron(&c.classical()[d]);
        }
        classical.push(f);
        let branches: Vec<&KrausChannel> = codes.iter().zip(&digits).map(|(c, &d)| &c.decoder()[d]).collect();
        decoder.push(tensor_all(&branches, ChannelKind::Instrument));
    }
    let encoders: Vec<&KrausChannel> = codes.iter().map(|c| c.encoder()).collect();
    EtCode::new(classical, tensor_all(&encoders, ChannelKind::TracePreserving), decoder)
}

/// Letter dimensions (A, B, C) of the channel a code is padded for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LetterDims {
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

/// Extends a length-n code to length n + `extra`: maximally mixed inputs on the extra letters,
/// whose outputs are traced out by the decoder.
pub fn pad(code: &EtCode, extra: usize, letter: LetterDims) -> Result<EtCode> {
    if extra == 0 {
        return Ok(code.clone());
    }
    let pow = |d: usize| d.checked_pow(extra as u32).ok_or(Error::BudgetExceeded { required: usize::MAX, budget: super::CODE_DIM_BUDGET });
    let (da, db, dc) = (pow(letter.a)?, pow(letter.b)?, pow(letter.c)?);
    for d in [code.a_dim() * da, code.b_dim() * db, code.c_dim() * dc] {
        super::check_budget(d)?;
    }
    let mixed_a = ComplexMatrix::identity(da).scale_real(1.0 / (da as f64).sqrt());
    let classical = code.classical().iter().map(|f| f.kron(&mixed_a)).collect();
    let s = 1.0 / (db as f64).sqrt();
    let mut enc = Vec::new();
    for e in code.encoder().kraus() {
        for j in 0..db {
            let ket = ComplexMatrix::from_fn(db, 1, |r, _| if r == j { C64::new(s, 0.0) } else { ZERO });
            enc.push(e.kron(&ket));
        }
    }
    let encoder = KrausChannel::from_parts_unchecked(enc, vec![code.m2()], vec![code.b_dim() * db], ChannelKind::TracePreserving);
    let decoder = code
        .decoder()
        .iter()
        .map(|d| {
            let mut ops = Vec::new();
            for r in d.kraus() {
                for j in 0..dc {
                    let bra = ComplexMatrix::from_fn(1, dc, |_, c| if c == j { C64::new(1.0, 0.0) } else { ZERO });
                    ops.push(r.kron(&bra));
                }
            }
            KrausChannel::from_parts_unchecked(ops, vec![code.c_dim() * dc], vec![code.m2()], ChannelKind::Instrument)
        })
        .collect();
    EtCode::new(classical, encoder, decoder)
}

/// Eigenvectors Ψ_j of (id ⊗ 𝓔)(Φ) with weights λ_j; (id ⊗ 𝓔)(Φ) = Σ λ_j |Ψ_j⟩⟨Ψ_j|.
pub fn encoded_spectrum(code: &EtCode) -> Result<Vec<(f64, PureState)>> {
    let (m2, b) = (code.m2(), code.b_dim());
    let s = 1.0 / (m2 as f64).sqrt();
    let ws: Vec<Vec<C64>> = code
        .encoder()
        .kraus()
        .iter()
        .map(|e| (0..m2 * b).map(|i| e[(i % b, i / b)] * s).collect())
        .collect();
    let k = ws.len();
    let gram = ComplexMatrix::from_fn(k, k, |i, j| inner(&ws[i], &ws[j]));
    let eig = hermitian_eig(&gram)?;
    let mut out = Vec::new();
    for (j, &lam) in eig.values.iter().enumerate() {
        let lam = clamp_eigenvalue(lam);
        if lam <= 0.0 {
            continue;
        }
        let u = eig.vector(j);
        let mut v = vec![ZERO; m2 * b];
        for (w, c) in ws.iter().zip(&u) {
            for (x, y) in v.iter_mut().zip(w) {
                *x += y * c;
            }
        }
        out.push((lam, PureState::normalized(v, vec![m2, b])?));
    }
    Ok(out)
}

/// EG code with the same classical part and decoder, using the eigenvector of (id ⊗ 𝓔)(Φ)
/// with the largest performance on `channel`. Ties keep the largest weight.
pub fn et_to_eg(code: &EtCode, channel: &KrausChannel) -> Result<EgCode> {
    let mut best: Option<(f64, EgCode)> = None;
    for (_, psi) in encoded_spectrum(code)? {
        let eg = EgCode::new(code.classical().to_vec(), psi, code.decoder().to_vec())?;
        let p = eg.performance(channel)?;
        if best.as_ref().is_none_or(|(b, _)| p > *b) {
            best = Some((p, eg));
        }
    }
    best.map(|(_, c)| c).ok_or_else(|| Error::InvalidState("encoder produced a zero state".into()))
}
