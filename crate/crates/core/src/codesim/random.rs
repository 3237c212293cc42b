use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_budget, complement_basis, whitened};
use crate::channels::library::gaussian_matrix;
use crate::channels::{ChannelKind, KrausChannel};
use crate::error::{Error, Result};
use crate::qmatrix::{inv_sqrt_psd, trace_norm_hermitian, ComplexMatrix, C64};

/// Encoders drawn for the expected-encoding diagnostic.
pub const DEFAULT_ENCODER_SAMPLES: usize = 64;

/// Haar-random isometry ℂ^cols → ℂ^rows (rows ≥ cols), by orthonormalising a Gaussian matrix.
pub fn haar_isometry<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if cols > rows {
        return Err(Error::InvalidArgument(format!("no isometry from dimension {cols} into {rows}")));
    }
    let g = gaussian_matrix(rows, cols, rng);
    let s = inv_sqrt_psd(&g.adjoint_mul(&g), 1e-12)?;
    Ok(g.mul(&s))
}

/// Isometry from 𝓕 = ℂ^{m2} onto a Haar-random subspace of 𝓖^{⊗n}.
pub fn sample_et_encoder(subspace_dim: usize, n: usize, m2: usize, seed: u64) -> Result<ComplexMatrix> {
    let d = subspace_dim.checked_pow(n as u32).unwrap_or(usize::MAX);
    check_budget(d)?;
    if m2 == 0 || m2 > d {
        return Err(Error::InvalidArgument(format!("M2 = {m2} exceeds code space dimension {d}")));
    }
    haar_isometry(d, m2, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Petz recovery of the code channel with Kraus operators A_k (out × M₂) relative to π_F:
/// R_k = π^{1/2} A_k† Σ^{-1/2} with Σ = Σ_k A_k π A_k†. Off the support of Σ the map
/// sends M₂ complement vectors at a time onto the basis of F.
pub fn pretty_good_recovery(code_kraus: &[ComplexMatrix]) -> Result<KrausChannel> {
    let first = code_kraus.first().ok_or_else(|| Error::InvalidArgument("no Kraus operators".into()))?;
    let (out, m2) = (first.rows(), first.cols());
    let s = 1.0 / (m2 as f64).sqrt();
    let b = ComplexMatrix::from_fn(out, m2 * code_kraus.len(), |r, c| code_kraus[c / m2][(r, c % m2)] * s);
    let q = whitened(&b)?;
    let mut kraus = Vec::with_capacity(code_kraus.len());
    for k in 0..code_kraus.len() {
        let rk = ComplexMatrix::from_fn(m2, out, |f, o| q[(o, k * m2 + f)].conj());
        if rk.max_abs() > 0.0 {
            kraus.push(rk);
        }
    }
    for chunk in complement_basis(&q).chunks(m2) {
        kraus.push(ComplexMatrix::from_fn(m2, out, |f, o| chunk.get(f).map_or(C64::new(0.0, 0.0), |e| e[o].conj())));
    }
    KrausChannel::with_tolerance(kraus, vec![out], vec![m2], 1e-7)
}

/// Sampled subspace code: isometric encoder and its pretty-good recovery for `channel`.
#[derive(Clone, Debug, PartialEq)]
pub struct EtPair {
    pub encoder: ComplexMatrix,
    pub decoder: KrausChannel,
}

impl EtPair {
    pub fn encoder_channel(&self) -> KrausChannel {
        let (d, m2) = (self.encoder.rows(), self.encoder.cols());
        KrausChannel::from_parts_unchecked(vec![self.encoder.clone()], vec![m2], vec![d], ChannelKind::TracePreserving)
    }

    /// F_e(π_F, 𝓡 ∘ 𝓝 ∘ 𝓔) = (1/M₂²) Σ_{j,k} |tr(R_j A_k W)|².
    pub fn entanglement_fidelity(&self, channel: &KrausChannel) -> Result<f64> {
        let m2 = self.encoder.cols();
        if channel.in_dim() != self.encoder.rows() {
            return Err(Error::DimensionMismatch(format!("channel input {} vs code space {}", channel.in_dim(), self.encoder.rows())));
        }
        let mut f = 0.0;
        for a in channel.kraus() {
            let aw = a.mul(&self.encoder);
            for r in self.decoder.kraus() {
                f += super::trace_product(r, &aw).norm_sqr();
            }
        }
        Ok(f / (m2 * m2) as f64)
    }
}

/// Random subspace code for a channel on 𝓖^{⊗n}: Haar encoder from `seed`, recovery from the
/// channel's action on the code space.
pub fn sample_et_code(channel: &KrausChannel, subspace_dim: usize, n: usize, m2: usize, seed: u64) -> Result<EtPair> {
    let encoder = sample_et_encoder(subspace_dim, n, m2, seed)?;
    if channel.in_dim() != encoder.rows() {
        return Err(Error::DimensionMismatch(format!("channel input {} vs code space {}", channel.in_dim(), encoder.rows())));
    }
    let code: Vec<ComplexMatrix> = channel.kraus().iter().map(|a| a.mul(&encoder)).collect();
    let decoder = pretty_good_recovery(&code)?;
    Ok(EtPair { encoder, decoder })
}

/// ‖(1/K) Σ_u W_u π_F W_u† − π^{⊗n}‖₁ over K seeded encoders (streams of `seed`).
pub fn expected_encoding_defect(subspace_dim: usize, n: usize, m2: usize, seed: u64, samples: usize) -> Result<f64> {
    let d = subspace_dim.checked_pow(n as u32).unwrap_or(usize::MAX);
    check_budget(d)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one encoder sample".into()));
    }
    let mut acc = ComplexMatrix::zeros(d, d);
    let w = 1.0 / (samples * m2) as f64;
    for k in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let e = haar_isometry(d, m2, &mut rng)?;
        acc.add_assign_scaled(&e.mul_adjoint(&e), C64::new(w, 0.0));
    }
    trace_norm_hermitian(&acc.sub(&ComplexMatrix::identity(d).scale_real(1.0 / d as f64)))
}
