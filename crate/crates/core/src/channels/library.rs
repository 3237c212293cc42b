//! Standard channels.

use rand::Rng;
use rand_distr::StandardNormal;

use super::kraus::{ChannelKind, KrausChannel};
use crate::error::{Error, Result};
use crate::qmatrix::{inv_sqrt_psd, ComplexMatrix, DensityMatrix, C64, ONE};

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

pub fn identity(d: usize) -> KrausChannel {
    KrausChannel::from_parts_unchecked(vec![ComplexMatrix::identity(d)], vec![d], vec![d], ChannelKind::TracePreserving)
}

pub fn unitary(u: ComplexMatrix) -> Result<KrausChannel> {
    let d = u.require_square()?;
    KrausChannel::new(vec![u], vec![d], vec![d])
}

/// Generalised Pauli X^a Z^b on ℂ^d.
pub fn weyl(d: usize, a: usize, b: usize) -> ComplexMatrix {
    let omega = std::f64::consts::TAU / d as f64;
    ComplexMatrix::from_fn(d, d, |r, c| {
        if r == (c + a) % d {
            C64::from_polar(1.0, omega * ((b * c) % d) as f64)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// ρ ↦ (1−p)ρ + p·I/d; p = 1 is the completely depolarizing channel.
pub fn depolarizing(d: usize, p: f64) -> Result<KrausChannel> {
    check_prob("depolarizing parameter", p)?;
    let d2 = (d * d) as f64;
    let mut kraus = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let w = if a == 0 && b == 0 { 1.0 - p + p / d2 } else { p / d2 };
            if w > 0.0 {
                kraus.push(weyl(d, a, b).scale_real(w.sqrt()));
            }
        }
    }
    KrausChannel::new(kraus, vec![d], vec![d])
}

/// Qubit phase flip with probability `flip`; `flip = 0.5` dephases completely.
pub fn dephasing(flip: f64) -> Result<KrausChannel> {
    check_prob("flip probability", flip)?;
    let z = ComplexMatrix::from_diag(&[1.0, -1.0]);
    flip_channel(z, flip)
}

/// Qubit bit flip with probability `flip` (dephasing in the X basis).
pub fn bit_flip(flip: f64) -> Result<KrausChannel> {
    check_prob("flip probability", flip)?;
    let x = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])?;
    flip_channel(x, flip)
}

fn flip_channel(pauli: ComplexMatrix, flip: f64) -> Result<KrausChannel> {
    let mut kraus = Vec::new();
    if flip < 1.0 {
        kraus.push(ComplexMatrix::identity(2).scale_real((1.0 - flip).sqrt()));
    }
    if flip > 0.0 {
        kraus.push(pauli.scale_real(flip.sqrt()));
    }
    KrausChannel::new(kraus, vec![2], vec![2])
}

/// Erasure on ℂ^d with output ℂ^{d+1}; the flag is basis state d.
pub fn erasure(d: usize, prob: f64) -> Result<KrausChannel> {
    check_prob("erasure probability", prob)?;
    let mut kraus = Vec::new();
    if prob < 1.0 {
        let s = (1.0 - prob).sqrt();
        kraus.push(ComplexMatrix::from_fn(d + 1, d, |r, c| if r == c { C64::new(s, 0.0) } else { C64::new(0.0, 0.0) }));
    }
    if prob > 0.0 {
        let s = prob.sqrt();
        for i in 0..d {
            kraus.push(ComplexMatrix::from_fn(d + 1, d, |r, c| if r == d && c == i { C64::new(s, 0.0) } else { C64::new(0.0, 0.0) }));
        }
    }
    KrausChannel::new(kraus, vec![d], vec![d + 1])
}

/// Trace out factor `which` of a bipartite input with dims `[d0, d1]`.
pub fn partial_trace_channel(d0: usize, d1: usize, which: usize) -> Result<KrausChannel> {
    let kraus = match which {
        0 => (0..d0)
            .map(|j| {
                let mut bra = ComplexMatrix::zeros(1, d0);
                bra[(0, j)] = ONE;
                bra.kron(&ComplexMatrix::identity(d1))
            })
            .collect(),
        1 => (0..d1)
            .map(|j| {
                let mut bra = ComplexMatrix::zeros(1, d1);
                bra[(0, j)] = ONE;
                ComplexMatrix::identity(d0).kron(&bra)
            })
            .collect(),
        _ => return Err(Error::SubsystemOutOfRange { index: which, count: 2 }),
    };
    let out = if which == 0 { d1 } else { d0 };
    KrausChannel::new(kraus, vec![d0, d1], vec![out])
}

/// Discard the input and prepare `state`.
pub fn replacement(in_dim: usize, state: &DensityMatrix) -> Result<KrausChannel> {
    let e = state.eigen()?;
    let dout = state.dim();
    let mut kraus = Vec::new();
    for (k, &lam) in e.values.iter().enumerate() {
        let w = crate::qmatrix::clamp_eigenvalue(lam);
        if w <= 0.0 {
            continue;
        }
        let v = e.vectors.col(k);
        for j in 0..in_dim {
            kraus.push(ComplexMatrix::from_fn(dout, in_dim, |r, c| if c == j { v[r] * w.sqrt() } else { C64::new(0.0, 0.0) }));
        }
    }
    KrausChannel::new(kraus, vec![in_dim], state.dims().to_vec())
}

pub(crate) fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

/// Random channel: Gaussian operators G_k normalised as G_k S^{-1/2}, S = Σ G_k†G_k.
/// At least ⌈din/dout⌉ operators are drawn so that S is invertible.
pub fn random_channel(din: usize, dout: usize, count: usize, rng: &mut impl Rng) -> KrausChannel {
    let gs: Vec<ComplexMatrix> = (0..count.max(din.div_ceil(dout.max(1))).max(1)).map(|_| gaussian_matrix(dout, din, rng)).collect();
    let s = super::kraus::completeness(&gs);
    let inv = inv_sqrt_psd(&s, 1e-14).expect("Gaussian completeness matrix is Hermitian");
    let kraus = gs.iter().map(|g| g.mul(&inv)).collect();
    KrausChannel::from_parts_unchecked(kraus, vec![din], vec![dout], ChannelKind::TracePreserving)
}

/// A random channel split into `branches` trace non-increasing parts whose sum is that channel.
pub fn random_instrument(din: usize, dout: usize, branches: usize, per_branch: usize, rng: &mut impl Rng) -> Vec<KrausChannel> {
    let per = per_branch.max(din.div_ceil(dout.max(1)).div_ceil(branches.max(1))).max(1);
    let whole = random_channel(din, dout, branches.max(1) * per, rng);
    whole
        .kraus()
        .chunks(per)
        .map(|c| KrausChannel::from_parts_unchecked(c.to_vec(), vec![din], vec![dout], ChannelKind::Instrument))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmatrix::PureState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn library_channels_are_cptp() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let chans = vec![
            identity(3),
            depolarizing(2, 1.0).unwrap(),
            depolarizing(3, 0.4).unwrap(),
            dephasing(0.1).unwrap(),
            bit_flip(0.5).unwrap(),
            erasure(2, 0.5).unwrap(),
            partial_trace_channel(2, 3, 0).unwrap(),
            partial_trace_channel(2, 3, 1).unwrap(),
            replacement(2, &DensityMatrix::maximally_mixed(&[3])).unwrap(),
            random_channel(3, 4, 2, &mut rng),
        ];
        for ch in chans {
            assert!(ch.choi().is_cptp(1e-10).unwrap(), "{ch:?}");
        }
    }

    #[test]
    fn completely_depolarizing_outputs_maximally_mixed() {
        let dep = depolarizing(2, 1.0).unwrap();
        let out = dep.apply(&DensityMatrix::basis(2, 0)).unwrap();
        assert!(out.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn identity_leaves_states_alone() {
        let rho = PureState::normalized(vec![C64::new(1.0, 0.0), C64::new(0.0, 2.0)], vec![2]).unwrap().to_density();
        assert_eq!(identity(2).apply(&rho).unwrap(), rho);
    }

    #[test]
    fn instrument_branches_sum_to_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let parts = random_instrument(2, 2, 3, 2, &mut rng);
        let all: Vec<ComplexMatrix> = parts.iter().flat_map(|p| p.kraus().to_vec()).collect();
        assert!(KrausChannel::new(all, vec![2], vec![2]).is_ok());
        for p in &parts {
            assert!(KrausChannel::instrument(p.kraus().to_vec(), vec![2], vec![2]).is_ok());
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(dephasing(1.5).is_err());
        assert!(erasure(2, -0.1).is_err());
        let bad = ComplexMatrix::identity(2).scale_real(2.0);
        assert!(matches!(KrausChannel::new(vec![bad.clone()], vec![2], vec![2]), Err(Error::NotTracePreserving(_))));
        assert!(matches!(KrausChannel::instrument(vec![bad], vec![2], vec![2]), Err(Error::NotTraceNonIncreasing(_))));
    }
}
