use super::CqqState;
use crate::error::{Error, Result};

/// h(x) = −x log x − (1−x) log(1−x), with 0·log 0 = 0.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    if !(0.0..=1.0).contains(&x) {
        return f64::NAN;
    }
    term(x) + term(1.0 - x)
}

/// Continuity bound for the coherent information:
/// 6ε log d + (2 + 4ε) h(2ε / (1 + 2ε)).
pub fn alicki_fannes_bound(epsilon: f64, dim_a: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    if dim_a == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let d = (dim_a as f64).log2();
    Ok(6.0 * epsilon * d + (2.0 + 4.0 * epsilon) * binary_entropy(2.0 * epsilon / (1.0 + 2.0 * epsilon)))
}

/// ε̃ = min(1, 2√ε) for a code whose fidelity is at least 1 − ε.
pub fn fano_error_parameter(error: f64) -> f64 {
    (2.0 * error.max(0.0).sqrt()).min(1.0)
}

/// Cap on log M₁ implied by Fano's inequality and the Holevo bound:
/// (I(X;C) + 1) / (1 − ε̃), or +∞ once ε̃ reaches 1.
pub fn holevo_fano_rate_bound(omega: &CqqState, error: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&error) {
        return Err(Error::InvalidArgument(format!("error must lie in [0, 1], got {error}")));
    }
    let eps = fano_error_parameter(error);
    if eps >= 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok((omega.holevo_xc()? + 1.0) / (1.0 - eps))
}

/// Slack 2h(ε̃) + 4ε̃ log M₂ in the quantum converse.
pub fn quantum_rate_slack(error: f64, m2: usize) -> f64 {
    let eps = fano_error_parameter(error);
    2.0 * binary_entropy(eps) + 4.0 * eps * (m2.max(1) as f64).log2()
}
