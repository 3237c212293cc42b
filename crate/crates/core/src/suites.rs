//! Randomised checks of the auxiliary inequalities and of the region's structural properties.
//! Each instance yields pairs (lhs, bound) that must satisfy lhs ≤ scale · bound + tolerance.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::library::{gaussian_matrix, random_channel};
use crate::channels::{CompoundSet, KrausChannel, TENSOR_POWER_BUDGET};
use crate::entropic::{alicki_fannes_bound, coherent_information, effective_cqq_state};
use crate::error::{Error, Result};
use crate::optimizer::{AnsatzShape, InputAnsatz};
use crate::qmatrix::{fidelity, pure_fidelity, sqrt_psd, trace_norm_hermitian, ComplexMatrix, DensityMatrix, PureState};
use crate::regions::{compound_rect, one_shot_region, timeshare_input, CodingInput};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Suite {
    GentleMeasurement,
    PureFidelityContinuity,
    ProductFidelity,
    AlickiFannes,
    CompoundMonotonicity,
    TimeSharing,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::GentleMeasurement,
        Suite::PureFidelityContinuity,
        Suite::ProductFidelity,
        Suite::AlickiFannes,
        Suite::CompoundMonotonicity,
        Suite::TimeSharing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::GentleMeasurement => "gentle-measurement",
            Suite::PureFidelityContinuity => "pure-fidelity-continuity",
            Suite::ProductFidelity => "product-fidelity",
            Suite::AlickiFannes => "alicki-fannes",
            Suite::CompoundMonotonicity => "compound-monotonicity",
            Suite::TimeSharing => "time-sharing",
        }
    }

    pub fn default_instances(self) -> usize {
        match self {
            Suite::CompoundMonotonicity => 100,
            Suite::TimeSharing => 50,
            _ => 500,
        }
    }

    fn index(self) -> u64 {
        Suite::ALL.iter().position(|&s| s == self).unwrap_or(0) as u64
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}; expected one of {}", Suite::ALL.map(|x| x.name()).join(", "))))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Overrides the per-suite instance count.
    pub instances: Option<usize>,
    /// Multiplies every bound; 1 checks the inequalities as stated.
    pub bound_scale: f64,
    pub tolerance: f64,
}

impl SuiteConfig {
    pub fn new(seed: u64) -> Self {
        Self { seed, instances: None, bound_scale: 1.0, tolerance: DEFAULT_TOLERANCE }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub instances: usize,
    pub violations: usize,
    /// min over instances of scale · bound − lhs
    pub worst_margin: f64,
    pub worst_instance: usize,
    pub bound_scale: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn random_density(d: usize, rank: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let g = gaussian_matrix(d, rank.max(1), rng);
    let m = g.mul_adjoint(&g);
    let t = m.trace().re;
    DensityMatrix::new(m.scale_real(1.0 / t).hermitian_part(), vec![d]).expect("Wishart sample is a state")
}

fn random_pure(d: usize, rng: &mut ChaCha8Rng) -> PureState {
    let g = gaussian_matrix(d, 1, rng);
    PureState::normalized(g.col(0), vec![d]).expect("Gaussian vector is nonzero")
}

fn mix(a: &DensityMatrix, b: &DensityMatrix, t: f64) -> DensityMatrix {
    let m = a.matrix().scale_real(1.0 - t).add(&b.matrix().scale_real(t));
    DensityMatrix::new(m, a.dims().to_vec()).expect("convex combination of states")
}

fn near(rho: &DensityMatrix, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let other = random_density(rho.dim(), rng.random_range(1..=rho.dim()), rng);
    let t = if rng.random_bool(0.5) { rng.random_range(0.0..0.05) } else { rng.random_range(0.0..0.5) };
    mix(rho, &other, t)
}

fn trace_dist(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    trace_norm_hermitian(&a.matrix().sub(b.matrix()))
}

fn gentle_measurement(rng: &mut ChaCha8Rng) -> Result<Vec<(f64, f64)>> {
    let d = rng.random_range(2..=4);
    let rho = random_density(d, rng.random_range(1..=d), rng);
    let g = gaussian_matrix(d, d, rng);
    let h = g.add(&g.adjoint());
    let u = crate::qmatrix::hermitian_eig(&h)?.vectors;
    let high = rng.random_bool(0.5);
    let lams: Vec<f64> = (0..d).map(|_| if high { rng.random_range(0.9..=1.0) } else { rng.random_range(0.0..=1.0) }).collect();
    let e = u.mul(&ComplexMatrix::from_diag(&lams)).mul_adjoint(&u);
    let root = sqrt_psd(&e.hermitian_part())?;
    let after = root.mul(rho.matrix()).mul(&root);
    let lhs = trace_norm_hermitian(&after.sub(rho.matrix()).hermitian_part())?;
    let success = e.mul(rho.matrix()).trace().re.clamp(0.0, 1.0);
    Ok(vec![(lhs, 3.0 * (1.0 - success).sqrt())])
}

fn pure_fidelity_continuity(rng: &mut ChaCha8Rng) -> Result<Vec<(f64, f64)>> {
    let d = rng.random_range(2..=4);
    let psi = random_pure(d, rng);
    let sigma = if rng.random_bool(0.5) { mix(&psi.to_density(), &random_density(d, d, rng), rng.random_range(0.0..0.3)) } else { random_density(d, d, rng) };
    let rho = near(&sigma, rng);
    // F(Ψ,σ) − ½‖ρ−σ‖₁ ≤ F(Ψ,ρ), as lhs ≤ bound
    let lhs = pure_fidelity(&psi, &sigma)? - 0.5 * trace_dist(&rho, &sigma)?;
    Ok(vec![(lhs, pure_fidelity(&psi, &rho)?)])
}

fn product_fidelity(rng: &mut ChaCha8Rng) -> Result<Vec<(f64, f64)>> {
    let (da, db) = (rng.random_range(2..=3), 2);
    let psi = random_pure(da, rng);
    let rho = random_density(db, rng.random_range(1..=db), rng);
    let target = psi.to_density().tensor(&rho);
    let sigma = near(&target, rng).with_dims(vec![da, db])?;
    let sa = sigma.partial_trace(&[0])?;
    let sb = sigma.partial_trace(&[1])?;
    // 1 − ‖ρ − σ_B‖₁ − 3(1 − F(Ψ, σ_A)) ≤ F(Ψ ⊗ ρ, σ)
    let lhs = 1.0 - trace_dist(&rho, &sb)? - 3.0 * (1.0 - pure_fidelity(&psi, &sa)?);
    let flat = DensityMatrix::new(sigma.matrix().clone(), vec![da * db])?;
    let t = DensityMatrix::new(target.matrix().clone(), vec![da * db])?;
    Ok(vec![(lhs, fidelity(&t, &flat)?)])
}

fn alicki_fannes(rng: &mut ChaCha8Rng) -> Result<Vec<(f64, f64)>> {
    let (da, db) = (rng.random_range(2..=3), 2);
    let d = da * db;
    let rho = random_density(d, rng.random_range(1..=d), rng).with_dims(vec![da, db])?;
    let other = random_density(d, rng.random_range(1..=d), rng).with_dims(vec![da, db])?;
    let t = if rng.random_bool(0.5) { rng.random_range(0.0..0.05) } else { rng.random_range(0.0..0.5) };
    let sigma = mix(&rho, &other, t);
    let eps = trace_dist(&rho, &sigma)?.min(1.0);
    let lhs = (coherent_information(&rho, &[0], &[1])? - coherent_information(&sigma, &[0], &[1])?).abs();
    Ok(vec![(lhs, alicki_fannes_bound(eps, da)?)])
}

fn random_set(rng: &mut ChaCha8Rng) -> Result<CompoundSet> {
    let c = rng.random_range(2..=3);
    let members = (0..rng.random_range(2..=3))
        .map(|_| random_channel(4, c, rng.random_range(1..=3), rng).with_dims(vec![2, 2], vec![c]))
        .collect::<Result<Vec<_>>>()?;
    CompoundSet::from_members(members)
}

fn random_input(rng: &mut ChaCha8Rng) -> Result<CodingInput> {
    let shape = AnsatzShape { alphabet: 2, a_dim: 2, b_dim: 2 };
    InputAnsatz::random(shape, 0, rng).to_input()
}

fn compound_monotonicity(rng: &mut ChaCha8Rng) -> Result<Vec<(f64, f64)>> {
    let set = random_set(rng)?;
    let input = random_input(rng)?;
    let rect = compound_rect(&set, 1, &input.p, &input.v, &input.psi)?;
    let mut pairs = Vec::new();
    for t in set.members() {
        let own = one_shot_region(t, &input.p, &input.v, &input.psi)?;
        pairs.push((rect.r1_max, own.r1_max));
        pairs.push((rect.r2_max, own.r2_max));
    }
    let bigger = set.with_member(random_member_like(&set, rng)?, "extra")?;
    let shrunk = compound_rect(&bigger, 1, &input.p, &input.v, &input.psi)?;
    pairs.push((shrunk.r1_max, rect.r1_max));
    pairs.push((shrunk.r2_max, rect.r2_max));
    Ok(pairs)
}

fn random_member_like(set: &CompoundSet, rng: &mut ChaCha8Rng) -> Result<KrausChannel> {
    let c = set.members()[0].out_dim();
    let k = rng.random_range(1..=3);
    random_channel(4, c, k, rng).with_dims(vec![2, 2], vec![c])
}

/// Unclamped (I(X;C), I_c(B⟩CX)) of `input` on the length-`l` block of `t`.
fn raw_rates(t: &KrausChannel, l: usize, input: &CodingInput) -> Result<(f64, f64)> {
    let block = if l == 1 { t.clone() } else { t.mac_tensor_power(l, TENSOR_POWER_BUDGET)? };
    let omega = effective_cqq_state(&block, &input.p, &input.v, &input.psi)?;
    Ok((omega.holevo_xc()?, omega.coherent_b_given_cx()?))
}

fn time_sharing(rng: &mut ChaCha8Rng) -> Result<Vec<(f64, f64)>> {
    let set = random_set(rng)?;
    let (first, second) = (random_input(rng)?, random_input(rng)?);
    let n = rng.random_range(2..=3);
    let k = rng.random_range(1..n);
    let lambda = k as f64 / n as f64;
    let (len, shared) = timeshare_input(&first, 1, &second, 1, n, k)?;
    let (mut a1, mut a2, mut b1, mut b2, mut s1, mut s2) = (f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for t in set.members() {
        let a = raw_rates(t, 1, &first)?;
        let b = raw_rates(t, 1, &second)?;
        let s = raw_rates(t, len, &shared)?;
        a1 = a1.min(a.0);
        a2 = a2.min(a.1);
        b1 = b1.min(b.0);
        b2 = b2.min(b.1);
        s1 = s1.min(s.0 / len as f64);
        s2 = s2.min(s.1 / len as f64);
    }
    // the λ-combination of the two compound corners lies below the blocked compound corner
    Ok(vec![(lambda * a1 + (1.0 - lambda) * b1, s1), (lambda * a2 + (1.0 - lambda) * b2, s2)])
}

fn instance(suite: Suite, rng: &mut ChaCha8Rng) -> Result<Vec<(f64, f64)>> {
    match suite {
        Suite::GentleMeasurement => gentle_measurement(rng),
        Suite::PureFidelityContinuity => pure_fidelity_continuity(rng),
        Suite::ProductFidelity => product_fidelity(rng),
        Suite::AlickiFannes => alicki_fannes(rng),
        Suite::CompoundMonotonicity => compound_monotonicity(rng),
        Suite::TimeSharing => time_sharing(rng),
    }
}

/// Instance i draws from ChaCha8(seed) on stream (suite, i), so results do not depend on scheduling.
pub fn run_suite(suite: Suite, config: &SuiteConfig) -> Result<SuiteReport> {
    let count = config.instances.unwrap_or_else(|| suite.default_instances());
    if count == 0 {
        return Err(Error::InvalidArgument("a suite needs at least one instance".into()));
    }
    let margins = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream((suite.index() << 32) | i as u64);
            let pairs = instance(suite, &mut rng)?;
            Ok(pairs.iter().map(|&(lhs, bound)| config.bound_scale * bound - lhs).fold(f64::INFINITY, f64::min))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut worst = (0, f64::INFINITY);
    for (i, &m) in margins.iter().enumerate() {
        if m < worst.1 || m.is_nan() {
            worst = (i, m);
        }
    }
    let violations = margins.iter().filter(|&&m| !(m >= -config.tolerance)).count();
    Ok(SuiteReport {
        suite: suite.name().to_string(),
        instances: count,
        violations,
        worst_margin: worst.1,
        worst_instance: worst.0,
        bound_scale: config.bound_scale,
        tolerance: config.tolerance,
        passed: violations == 0,
    })
}

pub fn run_all(config: &SuiteConfig) -> Result<Vec<SuiteReport>> {
    Suite::ALL.iter().map(|&s| run_suite(s, config)).collect()
}
