use serde::Serialize;

use super::choi::ChoiMatrix;
use crate::error::{Error, Result};
use crate::qmatrix::subsystem::{permute_columns, total_dim};
use crate::qmatrix::{hermitian_eig, ComplexMatrix, DensityMatrix, ZERO};

/// Completeness tolerance for channels built in code.
pub const CPTP_TOL: f64 = 1e-8;
/// Default limit on the input or output dimension of a tensor power.
pub const TENSOR_POWER_BUDGET: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    TracePreserving,
    /// Trace non-increasing; one branch of a measurement.
    Instrument,
}

/// Completely positive map given by Kraus operators (each `out_dim × in_dim`).
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    kraus: Vec<ComplexMatrix>,
    in_dims: Vec<usize>,
    out_dims: Vec<usize>,
    kind: ChannelKind,
}

fn check_shapes(kraus: &[ComplexMatrix], in_dims: &[usize], out_dims: &[usize]) -> Result<()> {
    if kraus.is_empty() {
        return Err(Error::InvalidArgument("no Kraus operators".into()));
    }
    if in_dims.is_empty() || out_dims.is_empty() || in_dims.contains(&0) || out_dims.contains(&0) {
        return Err(Error::DimensionMismatch("empty or zero subsystem dimension".into()));
    }
    let (din, dout) = (total_dim(in_dims), total_dim(out_dims));
    for (i, k) in kraus.iter().enumerate() {
        if k.rows() != dout || k.cols() != din {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator {i} is {}x{}, expected {dout}x{din}",
                k.rows(),
                k.cols()
            )));
        }
    }
    Ok(())
}

/// Σ K†K
pub(crate) fn completeness(kraus: &[ComplexMatrix]) -> ComplexMatrix {
    let din = kraus[0].cols();
    let mut acc = ComplexMatrix::zeros(din, din);
    for k in kraus {
        acc = acc.add(&k.adjoint_mul(k));
    }
    acc
}

impl KrausChannel {
    /// Trace-preserving channel; completeness checked to `CPTP_TOL`.
    pub fn new(kraus: Vec<ComplexMatrix>, in_dims: Vec<usize>, out_dims: Vec<usize>) -> Result<Self> {
        Self::with_tolerance(kraus, in_dims, out_dims, CPTP_TOL)
    }

    pub fn with_tolerance(kraus: Vec<ComplexMatrix>, in_dims: Vec<usize>, out_dims: Vec<usize>, tol: f64) -> Result<Self> {
        check_shapes(&kraus, &in_dims, &out_dims)?;
        let defect = completeness(&kraus).max_abs_diff(&ComplexMatrix::identity(total_dim(&in_dims)));
        if !(defect <= tol) {
            return Err(Error::NotTracePreserving(defect));
        }
        Ok(Self { kraus, in_dims, out_dims, kind: ChannelKind::TracePreserving })
    }

    /// Trace non-increasing branch: Σ K†K ≤ I.
    pub fn instrument(kraus: Vec<ComplexMatrix>, in_dims: Vec<usize>, out_dims: Vec<usize>) -> Result<Self> {
        check_shapes(&kraus, &in_dims, &out_dims)?;
        let top = hermitian_eig(&completeness(&kraus))?.values[0];
        if top > 1.0 + CPTP_TOL {
            return Err(Error::NotTraceNonIncreasing(top - 1.0));
        }
        Ok(Self { kraus, in_dims, out_dims, kind: ChannelKind::Instrument })
    }

    pub(crate) fn from_parts_unchecked(
        kraus: Vec<ComplexMatrix>,
        in_dims: Vec<usize>,
        out_dims: Vec<usize>,
        kind: ChannelKind,
    ) -> Self {
        Self { kraus, in_dims, out_dims, kind }
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn in_dim(&self) -> usize {
        total_dim(&self.in_dims)
    }

    pub fn out_dim(&self) -> usize {
        total_dim(&self.out_dims)
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn is_instrument(&self) -> bool {
        self.kind == ChannelKind::Instrument
    }

    /// max |Σ K†K − I|
    pub fn trace_preservation_defect(&self) -> f64 {
        completeness(&self.kraus).max_abs_diff(&ComplexMatrix::identity(self.in_dim()))
    }

    /// Σ K m K† for any square m on the input space.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.rows() != self.in_dim() || !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} input for a channel on dimension {}",
                m.rows(),
                m.cols(),
                self.in_dim()
            )));
        }
        let d = self.out_dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        for k in &self.kraus {
            acc = acc.add(&k.mul(m).mul_adjoint(k));
        }
        Ok(acc)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if self.is_instrument() {
            return Err(Error::InvalidArgument("instrument branches produce subnormalised output; use apply_matrix".into()));
        }
        if rho.dim() != self.in_dim() {
            return Err(Error::DimensionMismatch(format!("state of dimension {} into channel on {}", rho.dim(), self.in_dim())));
        }
        let out = self.apply_matrix(rho.matrix())?.hermitian_part();
        Ok(DensityMatrix::from_parts_unchecked(out, self.out_dims.clone()))
    }

    pub fn choi(&self) -> ChoiMatrix {
        ChoiMatrix::from_kraus(self)
    }

    /// self ⊗ other, with dims concatenated.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(a.kron(b));
            }
        }
        let in_dims = [self.in_dims.as_slice(), other.in_dims.as_slice()].concat();
        let out_dims = [self.out_dims.as_slice(), other.out_dims.as_slice()].concat();
        let kind = if self.is_instrument() || other.is_instrument() { ChannelKind::Instrument } else { ChannelKind::TracePreserving };
        Self { kraus, in_dims, out_dims, kind }
    }

    /// k-fold tensor power; fails if the input or output dimension would exceed 64.
    pub fn tensor_power(&self, k: usize) -> Result<Self> {
        self.tensor_power_with_budget(k, TENSOR_POWER_BUDGET)
    }

    pub fn tensor_power_with_budget(&self, k: usize, budget: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("tensor power must be positive".into()));
        }
        for d in [self.in_dim(), self.out_dim()] {
            let required = d.checked_pow(k as u32).unwrap_or(usize::MAX);
            if required > budget {
                return Err(Error::BudgetExceeded { required, budget });
            }
        }
        let base = self.minimal()?;
        let mut acc = base.clone();
        for _ in 1..k {
            acc = acc.tensor(&base);
        }
        Ok(acc)
    }

    /// Kraus representation with at most in·out operators, from the Choi spectrum.
    /// Channels already within that count are returned as is.
    pub fn minimal(&self) -> Result<Self> {
        if self.kraus.len() <= self.in_dim() * self.out_dim() {
            return Ok(self.clone());
        }
        let (din, dout) = (self.in_dim(), self.out_dim());
        let e = hermitian_eig(self.choi().matrix())?;
        let mut kraus = Vec::new();
        for (k, &lam) in e.values.iter().enumerate() {
            let w = crate::qmatrix::clamp_eigenvalue(lam);
            if w <= 0.0 {
                continue;
            }
            let s = w.sqrt();
            // Choi index is (in, out): vec entry i*dout + o ↔ K(o, i)
            kraus.push(ComplexMatrix::from_fn(dout, din, |o, i| e.vectors[(i * dout + o, k)] * s));
        }
        if kraus.is_empty() {
            kraus.push(ComplexMatrix::zeros(dout, din));
        }
        Ok(Self { kraus, in_dims: self.in_dims.clone(), out_dims: self.out_dims.clone(), kind: self.kind })
    }

    /// `after ∘ self`.
    pub fn then(&self, after: &Self) -> Result<Self> {
        if self.out_dim() != after.in_dim() {
            return Err(Error::DimensionMismatch(format!("compose {}→{} with {}→{}", self.in_dim(), self.out_dim(), after.in_dim(), after.out_dim())));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * after.kraus.len());
        for b in &after.kraus {
            for a in &self.kraus {
                let k = b.mul(a);
                if k.data().iter().any(|z| *z != ZERO) {
                    kraus.push(k);
                }
            }
        }
        if kraus.is_empty() {
            kraus.push(ComplexMatrix::zeros(after.out_dim(), self.in_dim()));
        }
        let kind = if self.is_instrument() || after.is_instrument() { ChannelKind::Instrument } else { ChannelKind::TracePreserving };
        Ok(Self { kraus, in_dims: self.in_dims.clone(), out_dims: after.out_dims.clone(), kind })
    }

    /// Reorder input factors: new input factor k is old factor `perm[k]`.
    pub fn permute_inputs(&self, perm: &[usize]) -> Result<Self> {
        let mut new_dims = Vec::new();
        let mut kraus = Vec::with_capacity(self.kraus.len());
        for k in &self.kraus {
            let (m, d) = permute_columns(k, &self.in_dims, perm)?;
            kraus.push(m);
            new_dims = d;
        }
        Ok(Self { kraus, in_dims: new_dims, out_dims: self.out_dims.clone(), kind: self.kind })
    }

    /// For a two-input channel on A⊗B: the l-fold power with inputs regrouped as A^l ⊗ B^l.
    pub fn mac_tensor_power(&self, l: usize, budget: usize) -> Result<Self> {
        if self.in_dims.len() != 2 {
            return Err(Error::DimensionMismatch(format!("multiple-access channel needs two inputs, got {:?}", self.in_dims)));
        }
        let p = self.tensor_power_with_budget(l, budget)?;
        if l == 1 {
            return Ok(p);
        }
        let perm: Vec<usize> = (0..l).map(|i| 2 * i).chain((0..l).map(|i| 2 * i + 1)).collect();
        let mut out = p.permute_inputs(&perm)?;
        out.in_dims = vec![self.in_dims[0].pow(l as u32), self.in_dims[1].pow(l as u32)];
        out.out_dims = vec![self.out_dim().pow(l as u32)];
        Ok(out)
    }

    /// Merge factor lists into a single input and single output factor.
    pub fn flattened(&self) -> Self {
        let mut c = self.clone();
        c.in_dims = vec![self.in_dim()];
        c.out_dims = vec![self.out_dim()];
        c
    }

    pub fn with_dims(mut self, in_dims: Vec<usize>, out_dims: Vec<usize>) -> Result<Self> {
        if total_dim(&in_dims) != self.in_dim() || total_dim(&out_dims) != self.out_dim() {
            return Err(Error::DimensionMismatch("regrouped dims change the total".into()));
        }
        self.in_dims = in_dims;
        self.out_dims = out_dims;
        Ok(self)
    }
}
