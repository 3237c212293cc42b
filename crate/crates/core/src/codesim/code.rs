use super::{kron_column, trace_product};
use crate::channels::KrausChannel;
use crate::entropic::CqqState;
use crate::error::{Error, Result};
use crate::qmatrix::{ComplexMatrix, Mixture, PureState, C64};

/// Tolerance on Σ_m Σ_j K†K = I for decoder instruments.
pub const COMPLETENESS_TOL: f64 = 1e-7;

fn check_classical(classical: &[ComplexMatrix]) -> Result<usize> {
    let first = classical.first().ok_or_else(|| Error::InvalidArgument("code needs at least one message".into()))?;
    let a = first.rows();
    for (m, f) in classical.iter().enumerate() {
        if f.rows() != a {
            return Err(Error::DimensionMismatch(format!("classical codeword {m} lives in dimension {}", f.rows())));
        }
        let t = f.frobenius_norm().powi(2);
        if (t - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidState(format!("classical codeword {m} has trace {t}")));
        }
    }
    Ok(a)
}

fn check_decoder(decoder: &[KrausChannel], messages: usize, out: usize) -> Result<usize> {
    if decoder.len() != messages {
        return Err(Error::DimensionMismatch(format!("{} decoder branches for {messages} messages", decoder.len())));
    }
    let c = decoder[0].in_dim();
    for d in decoder {
        if d.in_dim() != c || d.out_dim() != out {
            return Err(Error::DimensionMismatch(format!("decoder branch {}→{}, expected {c}→{out}", d.in_dim(), d.out_dim())));
        }
    }
    let defect = decoder_defect(decoder);
    if defect > COMPLETENESS_TOL {
        return Err(Error::NotTracePreserving(defect));
    }
    Ok(c)
}

/// max |Σ_m Σ_j K_j†K_j − I|
pub(crate) fn decoder_defect(decoder: &[KrausChannel]) -> f64 {
    let c = decoder[0].in_dim();
    let mut acc = ComplexMatrix::zeros(c, c);
    for d in decoder {
        for k in d.kraus() {
            acc.add_assign_scaled(&k.adjoint_mul(k), C64::new(1.0, 0.0));
        }
    }
    acc.max_abs_diff(&ComplexMatrix::identity(c))
}

/// Inputs Z_e (b × M₂) with Σ tr Z_e†Z_e = 1: E_e/√M₂ for an encoder, Ψᵀ for a state.
fn performance_with(classical: &[ComplexMatrix], inputs: &[ComplexMatrix], decoder: &[KrausChannel], channel: &KrausChannel) -> Result<f64> {
    let m2 = inputs[0].cols();
    let a = classical[0].rows();
    let b = inputs[0].rows();
    if channel.in_dim() != a * b || channel.out_dim() != decoder[0].in_dim() {
        return Err(Error::DimensionMismatch(format!(
            "channel {}→{} does not match code spaces {a}·{b}→{}",
            channel.in_dim(),
            channel.out_dim(),
            decoder[0].in_dim()
        )));
    }
    let mut total = 0.0;
    for (m, f) in classical.iter().enumerate() {
        let mut pm = 0.0;
        for col in 0..f.cols() {
            let av = f.col(col);
            for z in inputs {
                let x = kron_column(&av, z);
                for k in channel.kraus() {
                    let l = k.mul(&x);
                    for r in decoder[m].kraus() {
                        pm += trace_product(r, &l).norm_sqr();
                    }
                }
            }
        }
        total += pm / m2 as f64;
    }
    Ok(total / classical.len() as f64)
}

fn cqq_with(classical: &[ComplexMatrix], inputs: &[ComplexMatrix], channel: &KrausChannel) -> Result<CqqState> {
    let m2 = inputs[0].cols();
    let c = channel.out_dim();
    let mut blocks = Vec::with_capacity(classical.len());
    for f in classical {
        let mut vectors = Vec::new();
        for col in 0..f.cols() {
            let av = f.col(col);
            for z in inputs {
                let x = kron_column(&av, z);
                for k in channel.kraus() {
                    let l = k.mul(&x);
                    // (I ⊗ L)|Φ⟩-type vector, index f·c + o
                    let v: Vec<C64> = (0..m2 * c).map(|i| l[(i % c, i / c)]).collect();
                    if v.iter().any(|z| z.norm_sqr() > 0.0) {
                        vectors.push(v);
                    }
                }
            }
        }
        blocks.push(Mixture::from_vectors(vectors, vec![m2, c])?.compress()?);
    }
    let m1 = classical.len();
    CqqState::from_blocks(vec![1.0 / m1 as f64; m1], blocks, m2, c)
}

/// Entanglement-transmission code: classical codewords V(m) on the A block, quantum encoder
/// 𝓔: F → B block, decoder branches 𝓓_m: C block → F.
#[derive(Clone, Debug, PartialEq)]
pub struct EtCode {
    classical: Vec<ComplexMatrix>,
    encoder: KrausChannel,
    decoder: Vec<KrausChannel>,
}

impl EtCode {
    /// `classical[m]` is a factor F with V(m) = F F†.
    pub fn new(classical: Vec<ComplexMatrix>, encoder: KrausChannel, decoder: Vec<KrausChannel>) -> Result<Self> {
        check_classical(&classical)?;
        if encoder.is_instrument() {
            return Err(Error::InvalidArgument("encoder must be trace preserving".into()));
        }
        check_decoder(&decoder, classical.len(), encoder.in_dim())?;
        Ok(Self { classical, encoder, decoder })
    }

    pub fn m1(&self) -> usize {
        self.classical.len()
    }

    pub fn m2(&self) -> usize {
        self.encoder.in_dim()
    }

    pub fn a_dim(&self) -> usize {
        self.classical[0].rows()
    }

    pub fn b_dim(&self) -> usize {
        self.encoder.out_dim()
    }

    pub fn c_dim(&self) -> usize {
        self.decoder[0].in_dim()
    }

    pub fn classical(&self) -> &[ComplexMatrix] {
        &self.classical
    }

    pub fn encoder(&self) -> &KrausChannel {
        &self.encoder
    }

    pub fn decoder(&self) -> &[KrausChannel] {
        &self.decoder
    }

    pub fn completeness_defect(&self) -> f64 {
        decoder_defect(&self.decoder)
    }

    fn inputs(&self) -> Vec<ComplexMatrix> {
        let s = 1.0 / (self.m2() as f64).sqrt();
        self.encoder.kraus().iter().map(|e| e.scale_real(s)).collect()
    }

    /// (1/M₁) Σ_m F(|m⟩⟨m| ⊗ Φ, output) on a block channel A⊗B → C.
    pub fn performance(&self, channel: &KrausChannel) -> Result<f64> {
        performance_with(&self.classical, &self.inputs(), &self.decoder, channel)
    }

    /// Uniform messages M, reference F and receiver output: Σ_m |m⟩⟨m|/M₁ ⊗ (id_F ⊗ T)(V(m) ⊗ (id ⊗ 𝓔)(Φ)).
    pub fn cqq_state(&self, channel: &KrausChannel) -> Result<CqqState> {
        cqq_with(&self.classical, &self.inputs(), channel)
    }
}

/// Entanglement-generation code: as `EtCode` with a fixed pure state Ψ on F ⊗ B block.
#[derive(Clone, Debug, PartialEq)]
pub struct EgCode {
    classical: Vec<ComplexMatrix>,
    psi: PureState,
    decoder: Vec<KrausChannel>,
}

impl EgCode {
    pub fn new(classical: Vec<ComplexMatrix>, psi: PureState, decoder: Vec<KrausChannel>) -> Result<Self> {
        check_classical(&classical)?;
        let m2 = decoder.first().map(|d| d.out_dim()).ok_or_else(|| Error::InvalidArgument("empty decoder".into()))?;
        if !psi.dim().is_multiple_of(m2) {
            return Err(Error::DimensionMismatch(format!("Ψ of dimension {} does not contain F of dimension {m2}", psi.dim())));
        }
        let b = psi.dim() / m2;
        let psi = psi.with_dims(vec![m2, b])?;
        check_decoder(&decoder, classical.len(), m2)?;
        Ok(Self { classical, psi, decoder })
    }

    pub fn m1(&self) -> usize {
        self.classical.len()
    }

    pub fn m2(&self) -> usize {
        self.decoder[0].out_dim()
    }

    pub fn b_dim(&self) -> usize {
        self.psi.dim() / self.m2()
    }

    pub fn classical(&self) -> &[ComplexMatrix] {
        &self.classical
    }

    pub fn psi(&self) -> &PureState {
        &self.psi
    }

    pub fn decoder(&self) -> &[KrausChannel] {
        &self.decoder
    }

    pub fn completeness_defect(&self) -> f64 {
        decoder_defect(&self.decoder)
    }

    fn inputs(&self) -> Vec<ComplexMatrix> {
        let (m2, b) = (self.m2(), self.b_dim());
        vec![ComplexMatrix::from_fn(b, m2, |j, f| self.psi.vector()[f * b + j])]
    }

    pub fn performance(&self, channel: &KrausChannel) -> Result<f64> {
        performance_with(&self.classical, &self.inputs(), &self.decoder, channel)
    }
}
