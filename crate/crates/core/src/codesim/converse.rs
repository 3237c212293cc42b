use serde::Serialize;

use super::block_channel;
use super::code::EtCode;
use crate::channels::CompoundSet;
use crate::entropic::{fano_error_parameter, holevo_fano_rate_bound, quantum_rate_slack};
use crate::error::{Error, Result};

const CONVERSE_TOL: f64 = 1e-9;

/// Rate caps for one member implied by the code's own fidelity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MemberBound {
    pub member: String,
    pub performance: f64,
    pub error: f64,
    pub error_parameter: f64,
    pub rate1: f64,
    pub rate2: f64,
    /// I(M;C)/n on the code state.
    pub holevo: f64,
    /// I_c(F⟩C M)/n on the code state.
    pub coherent: f64,
    pub rate1_cap: f64,
    pub rate2_cap: f64,
    pub rate1_violation: bool,
    pub rate2_violation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConverseReport {
    pub n: usize,
    pub m1: usize,
    pub m2: usize,
    pub members: Vec<MemberBound>,
    pub violations: usize,
}

impl ConverseReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Checks log M₁/n ≤ (I(M;C) + 1)/((1 − ε̃) n) and
/// log M₂/n ≤ (I_c(F⟩C M) + 2h(ε̃) + 4ε̃ log M₂)/n for every member, with ε = 1 − performance.
pub fn converse_check(code: &EtCode, set: &CompoundSet, n: usize) -> Result<ConverseReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("block length must be positive".into()));
    }
    let nf = n as f64;
    let rate1 = (code.m1() as f64).log2() / nf;
    let rate2 = (code.m2() as f64).log2() / nf;
    let mut members = Vec::with_capacity(set.len());
    for (t, label) in set.members().iter().zip(set.labels()) {
        let block = block_channel(t, n)?;
        let performance = code.performance(&block)?;
        let error = (1.0 - performance).clamp(0.0, 1.0);
        let omega = code.cqq_state(&block)?;
        let holevo = omega.holevo_xc()?;
        let coherent = omega.coherent_b_given_cx()?;
        let rate1_cap = holevo_fano_rate_bound(&omega, error)? / nf;
        let rate2_cap = (coherent + quantum_rate_slack(error, code.m2())) / nf;
        members.push(MemberBound {
            member: label.clone(),
            performance,
            error,
            error_parameter: fano_error_parameter(error),
            rate1,
            rate2,
            holevo: holevo / nf,
            coherent: coherent / nf,
            rate1_cap,
            rate2_cap,
            rate1_violation: rate1 > rate1_cap + CONVERSE_TOL,
            rate2_violation: rate2 > rate2_cap + CONVERSE_TOL,
        });
    }
    let violations = members.iter().map(|m| m.rate1_violation as usize + m.rate2_violation as usize).sum();
    Ok(ConverseReport { n, m1: code.m1(), m2: code.m2(), members, violations })
}
