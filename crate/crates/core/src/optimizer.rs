//! Search over block inputs (p, V, Ψ), plus the type-class decomposition and empirical
//! approximation used when blocking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{CompoundSet, CqChannel, TENSOR_POWER_BUDGET};
use crate::error::{Error, Result};
use crate::qmatrix::{check_distribution, hermitian_eig, kron_vec, ComplexMatrix, DensityMatrix, PureState, C64, ZERO};
use crate::regions::{compound_rect, CodingInput, RateRegion, Rect};

/// Default cap on |𝒳|·d_B^l·d_C^l.
pub const DIMENSION_BUDGET: usize = 4096;
pub const SIMPLEX_ITERATIONS: usize = 200;
/// Restarts are scheduled in fixed batches so evaluation caps cut at the same place on any thread count.
const RESTART_BATCH: usize = 8;

/// Dimensions of the searched input at blocking length l.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AnsatzShape {
    pub alphabet: usize,
    /// d_A^l
    pub a_dim: usize,
    /// d_B^l, used for both halves of Ψ.
    pub b_dim: usize,
}

impl AnsatzShape {
    pub fn param_count(&self) -> usize {
        self.alphabet + 2 * self.alphabet * self.a_dim + 2 * self.b_dim * self.b_dim
    }
}

/// Unconstrained parameters for (p, V, Ψ): softmax logits for p, paired real coordinates for
/// the pure states V(x) and Ψ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InputAnsatz {
    pub shape: AnsatzShape,
    pub p_logits: Vec<f64>,
    pub v_params: Vec<f64>,
    pub psi_params: Vec<f64>,
    pub seed: u64,
}

fn amplitudes(params: &[f64], fallback: usize) -> Vec<C64> {
    let mut v: Vec<C64> = params.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 1e-300) || !norm.is_finite() {
        v.iter_mut().for_each(|z| *z = ZERO);
        let k = fallback % v.len();
        v[k] = C64::new(1.0, 0.0);
        return v;
    }
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let top = if top.is_finite() { top } else { 0.0 };
    let e: Vec<f64> = logits.iter().map(|&z| (z - top).exp()).map(|z| if z.is_finite() { z } else { 0.0 }).collect();
    let s: f64 = e.iter().sum();
    if !(s > 0.0) {
        return vec![1.0 / logits.len() as f64; logits.len()];
    }
    e.into_iter().map(|z| z / s).collect()
}

impl InputAnsatz {
    /// Uniform p, V(x) = |x mod d_A⟩, Ψ maximally entangled.
    pub fn canonical(shape: AnsatzShape, seed: u64) -> Self {
        let mut v_params = vec![0.0; 2 * shape.alphabet * shape.a_dim];
        for x in 0..shape.alphabet {
            v_params[2 * (x * shape.a_dim + x % shape.a_dim)] = 1.0;
        }
        let mut psi_params = vec![0.0; 2 * shape.b_dim * shape.b_dim];
        for k in 0..shape.b_dim {
            psi_params[2 * (k * shape.b_dim + k)] = 1.0;
        }
        Self { shape, p_logits: vec![0.0; shape.alphabet], v_params, psi_params, seed }
    }

    pub fn random(shape: AnsatzShape, seed: u64, rng: &mut impl Rng) -> Self {
        let mut draw = |n: usize| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect::<Vec<_>>();
        let p_logits = draw(shape.alphabet);
        let v_params = draw(2 * shape.alphabet * shape.a_dim);
        let psi_params = draw(2 * shape.b_dim * shape.b_dim);
        Self { shape, p_logits, v_params, psi_params, seed }
    }

    pub fn from_vector(shape: AnsatzShape, x: &[f64], seed: u64) -> Self {
        assert_eq!(x.len(), shape.param_count(), "parameter vector length");
        let (p, rest) = x.split_at(shape.alphabet);
        let (v, psi) = rest.split_at(2 * shape.alphabet * shape.a_dim);
        Self { shape, p_logits: p.to_vec(), v_params: v.to_vec(), psi_params: psi.to_vec(), seed }
    }

    pub fn to_vector(&self) -> Vec<f64> {
        self.p_logits.iter().chain(&self.v_params).chain(&self.psi_params).copied().collect()
    }

    pub fn p(&self) -> Vec<f64> {
        softmax(&self.p_logits)
    }

    pub fn to_input(&self) -> Result<CodingInput> {
        let s = self.shape;
        let states: Vec<PureState> = self
            .v_params
            .chunks(2 * s.a_dim)
            .enumerate()
            .map(|(x, c)| PureState::new(amplitudes(c, x), vec![s.a_dim]))
            .collect::<Result<_>>()?;
        let v = CqChannel::from_pure(&states)?;
        let psi = PureState::new(amplitudes(&self.psi_params, 0), vec![s.b_dim, s.b_dim])?;
        Ok(CodingInput::new(self.p(), v, psi))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParetoConfig {
    pub l: usize,
    /// Defaults to d_A^l.
    pub alphabet: Option<usize>,
    pub weights: Vec<(f64, f64)>,
    /// Restarts per weight pair.
    pub budget: usize,
    pub seed: u64,
    pub dimension_budget: usize,
    /// Cap on objective evaluations over the whole run.
    pub max_evaluations: Option<usize>,
}

impl ParetoConfig {
    pub fn new(l: usize, weights: Vec<(f64, f64)>, budget: usize, seed: u64) -> Self {
        Self { l, alphabet: None, weights, budget, seed, dimension_budget: DIMENSION_BUDGET, max_evaluations: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TracedPoint {
    pub weight: (f64, f64),
    pub restart: usize,
    pub objective: f64,
    pub rect: Rect,
    pub ansatz: InputAnsatz,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TracedRegion {
    pub region: RateRegion,
    /// Best restart per weight pair, in weight order.
    pub best: Vec<TracedPoint>,
    pub evaluations: usize,
    pub truncated: bool,
}

/// w1·R1 + w2·R2 of the compound rectangle at the given parameters; −∞ if evaluation fails.
pub fn weighted_objective(set: &CompoundSet, l: usize, shape: AnsatzShape, x: &[f64], weight: (f64, f64)) -> f64 {
    match evaluate(set, l, &InputAnsatz::from_vector(shape, x, 0)) {
        Ok(r) => weight.0 * r.r1_max + weight.1 * r.r2_max,
        Err(_) => f64::NEG_INFINITY,
    }
}

pub fn evaluate(set: &CompoundSet, l: usize, ansatz: &InputAnsatz) -> Result<Rect> {
    let c = ansatz.to_input()?;
    compound_rect(set, l, &c.p, &c.v, &c.psi)
}

/// Shape of a block input for the set at blocking length l, checked against the budgets.
pub fn ansatz_shape(set: &CompoundSet, l: usize, alphabet: Option<usize>, dimension_budget: usize) -> Result<AnsatzShape> {
    if l == 0 {
        return Err(Error::InvalidArgument("blocking length must be positive".into()));
    }
    let m = &set.members()[0];
    let (da, db) = match m.in_dims() {
        [a, b] => (*a, *b),
        d => return Err(Error::DimensionMismatch(format!("multiple-access channel needs two inputs, got {d:?}"))),
    };
    let pow = |d: usize| d.checked_pow(l as u32).unwrap_or(usize::MAX);
    let (al, bl, cl) = (pow(da), pow(db), pow(m.out_dim()));
    for d in [al.saturating_mul(bl), cl] {
        if d > TENSOR_POWER_BUDGET {
            return Err(Error::BudgetExceeded { required: d, budget: TENSOR_POWER_BUDGET });
        }
    }
    let alphabet = alphabet.unwrap_or(al).max(1);
    let total = alphabet.saturating_mul(bl).saturating_mul(cl);
    if total > dimension_budget {
        return Err(Error::BudgetExceeded { required: total, budget: dimension_budget });
    }
    Ok(AnsatzShape { alphabet, a_dim: al, b_dim: bl })
}

/// Maximises f by a Nelder–Mead simplex from `start`. Returns (best point, value, evaluations).
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, start: &[f64], step: f64, iterations: usize) -> (Vec<f64>, f64, usize) {
    let n = start.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64]| {
        evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            -v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), eval(start)));
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += step;
        let v = eval(&x);
        simplex.push((x, v));
    }
    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    for _ in 0..iterations {
        order(&mut simplex);
        if simplex[n].1 - simplex[0].1 < 1e-13 && simplex[0].1.is_finite() {
            break;
        }
        let worst = simplex[n].clone();
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect() };
        let xr = along(1.0);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = along(0.5);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best.iter().zip(&item.0).map(|(b, xi)| b + 0.5 * (xi - b)).collect();
                    let v = eval(&x);
                    *item = (x, v);
                }
            }
        }
    }
    order(&mut simplex);
    let (x, v) = simplex.swap_remove(0);
    (x, -v, evals)
}

fn restart_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Traces the inner-bound region at blocking length l: for each weight pair, `budget` restarts
/// of a simplex search on w1·R1 + w2·R2. The region is the union of every restart's final
/// rectangle, so more restarts never shrink it.
pub fn pareto_trace(set: &CompoundSet, config: &ParetoConfig) -> Result<TracedRegion> {
    if config.budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least one restart".into()));
    }
    if config.weights.is_empty() {
        return Err(Error::InvalidArgument("no weight pairs".into()));
    }
    let shape = ansatz_shape(set, config.l, config.alphabet, config.dimension_budget)?;
    let l = config.l;
    let nw = config.weights.len();
    // restart-major so a truncated run still covers every weight pair
    let jobs: Vec<(usize, usize)> = (0..config.budget).flat_map(|r| (0..nw).map(move |w| (w, r))).collect();
    let mut done: Vec<(usize, TracedPoint, usize)> = Vec::with_capacity(jobs.len());
    let mut evaluations = 0usize;
    let mut truncated = false;
    for batch in jobs.chunks(RESTART_BATCH) {
        if config.max_evaluations.is_some_and(|cap| evaluations >= cap) {
            truncated = true;
            break;
        }
        let results: Vec<Result<(usize, TracedPoint, usize)>> = batch
            .par_iter()
            .map(|&(wi, restart)| {
                let weight = config.weights[wi];
                let stream = (wi * config.budget + restart) as u64;
                let start = if restart == 0 {
                    InputAnsatz::canonical(shape, config.seed)
                } else {
                    InputAnsatz::random(shape, config.seed, &mut restart_rng(config.seed, stream))
                };
                let f = |x: &[f64]| weighted_objective(set, l, shape, x, weight);
                let (x, _, evals) = nelder_mead(f, &start.to_vector(), 0.5, SIMPLEX_ITERATIONS);
                let ansatz = InputAnsatz::from_vector(shape, &x, config.seed);
                let rect = evaluate(set, l, &ansatz)?;
                let objective = weight.0 * rect.r1_max + weight.1 * rect.r2_max;
                Ok((wi, TracedPoint { weight, restart, objective, rect, ansatz }, evals))
            })
            .collect();
        for r in results {
            let r = r?;
            evaluations += r.2;
            done.push(r);
        }
    }
    let region = RateRegion::from_rects(done.iter().map(|d| d.1.rect));
    let best = (0..config.weights.len())
        .filter_map(|wi| {
            done.iter()
                .filter(|d| d.0 == wi)
                .max_by(|a, b| a.1.objective.total_cmp(&b.1.objective).then(b.1.restart.cmp(&a.1.restart)))
                .map(|d| d.1.clone())
        })
        .collect();
    Ok(TracedRegion { region, best, evaluations, truncated })
}

/// Σ_i q(i) π_i with π_i maximally mixed on mutually orthogonal subspaces.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    pub weights: Vec<f64>,
    /// Orthonormal basis of each subspace.
    pub bases: Vec<Vec<Vec<C64>>>,
    pub dims: Vec<usize>,
}

impl SpectralDecomposition {
    pub fn count(&self) -> usize {
        self.weights.len()
    }

    /// π_i
    pub fn projector_state(&self, i: usize) -> ComplexMatrix {
        let n = self.bases[i][0].len();
        let mut m = ComplexMatrix::zeros(n, n);
        let w = 1.0 / self.bases[i].len() as f64;
        for v in &self.bases[i] {
            m.add_assign_scaled(&ComplexMatrix::outer(v, v), C64::new(w, 0.0));
        }
        m
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.bases[0][0].len();
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..self.count() {
            m.add_assign_scaled(&self.projector_state(i), C64::new(self.weights[i], 0.0));
        }
        m
    }
}

/// Groups the product eigenvectors of ρ^{⊗l} by eigenvalue. Zero-weight groups are dropped.
pub fn decompose_tensor_power(rho: &DensityMatrix, l: usize) -> Result<SpectralDecomposition> {
    if l == 0 {
        return Err(Error::InvalidArgument("tensor power must be positive".into()));
    }
    let d = rho.dim();
    let total = d.checked_pow(l as u32).unwrap_or(usize::MAX);
    if total > TENSOR_POWER_BUDGET {
        return Err(Error::BudgetExceeded { required: total, budget: TENSOR_POWER_BUDGET });
    }
    let e = hermitian_eig(rho.matrix())?;
    let lam: Vec<f64> = e.values.iter().map(|&x| crate::qmatrix::clamp_eigenvalue(x)).collect();
    let mut items: Vec<(f64, Vec<usize>)> = (0..total)
        .map(|mut idx| {
            let mut digits = vec![0; l];
            for slot in digits.iter_mut().rev() {
                *slot = idx % d;
                idx /= d;
            }
            (digits.iter().map(|&k| lam[k]).product(), digits)
        })
        .filter(|(w, _)| *w > 0.0)
        .collect();
    items.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut weights = Vec::new();
    let mut bases: Vec<Vec<Vec<C64>>> = Vec::new();
    let mut last = f64::NAN;
    for (w, digits) in items {
        let v = digits.iter().fold(vec![C64::new(1.0, 0.0)], |acc, &k| kron_vec(&acc, &e.vectors.col(k)));
        if (w - last).abs() <= 1e-12 * last.max(1e-300).max(w) {
            *weights.last_mut().expect("group open") += w;
            bases.last_mut().expect("group open").push(v);
        } else {
            weights.push(w);
            bases.push(vec![v]);
            last = w;
        }
    }
    Ok(SpectralDecomposition { weights, bases, dims: vec![d; l] })
}

/// Integer counts N_i summing to t with N_i/t close to q(i): floors, then the remainder goes to
/// the largest fractional parts (lowest index first on ties), support only.
pub fn empirical_approximation(q: &[f64], t: usize) -> Result<Vec<usize>> {
    check_distribution(q)?;
    if q.iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidDistribution("negative probability".into()));
    }
    let min_supp = q.iter().copied().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
    if !(t as f64 > 2.0 / min_supp) {
        return Err(Error::InvalidArgument(format!("t = {t} must exceed 2/min support probability = {}", 2.0 / min_supp)));
    }
    let scaled: Vec<f64> = q.iter().map(|&x| x * t as f64).collect();
    let mut counts: Vec<usize> = scaled.iter().map(|&x| x.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..q.len()).filter(|&i| q[i] > 0.0).collect();
    order.sort_by(|&a, &b| (scaled[b] - counts[b] as f64).total_cmp(&(scaled[a] - counts[a] as f64)).then(a.cmp(&b)));
    let remainder = t.saturating_sub(assigned);
    for k in 0..remainder {
        counts[order[k % order.len()]] += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::library;
    use crate::qmatrix::trace_norm;
    use crate::KrausChannel;
    use proptest::prelude::*;
    use rand::Rng;

    fn qmac(ch: KrausChannel) -> KrausChannel {
        let (i, o) = (ch.in_dim(), ch.out_dim());
        ch.with_dims(vec![2, i / 2], vec![o]).unwrap()
    }

    fn weights() -> Vec<(f64, f64)> {
        vec![(1.0, 0.0), (0.5, 0.5), (0.0, 1.0)]
    }

    #[test]
    fn identity_qmac_reaches_unit_corner() {
        let set = CompoundSet::singleton(qmac(library::identity(4)));
        let t = pareto_trace(&set, &ParetoConfig::new(1, weights(), 3, 11)).unwrap();
        assert!(t.region.contains_closed((1.0, 1.0), 0.02), "{:?}", t.region);
        assert!(!t.truncated);
    }

    #[test]
    fn depolarizing_traces_origin() {
        let set = CompoundSet::singleton(qmac(library::depolarizing(4, 1.0).unwrap()));
        let t = pareto_trace(&set, &ParetoConfig::new(1, weights(), 2, 1)).unwrap();
        assert!(t.region.rects().iter().all(|r| r.r1_max < 1e-9 && r.r2_max < 1e-9), "{:?}", t.region);
    }

    #[test]
    fn dephasing_member_caps_quantum_rate() {
        let dephase = qmac(library::identity(2).tensor(&library::dephasing(0.5).unwrap()));
        let set = CompoundSet::from_members(vec![qmac(library::identity(4)), dephase]).unwrap();
        let t = pareto_trace(&set, &ParetoConfig::new(1, weights(), 3, 2)).unwrap();
        assert!(t.region.rects().iter().all(|r| r.r2_max <= 0.02), "{:?}", t.region);
        assert!(t.region.contains_closed((1.0, 0.0), 0.02));
    }

    #[test]
    fn traced_points_are_self_consistent_and_seeded() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(9);
        let set = CompoundSet::singleton(qmac(library::random_channel(4, 2, 2, &mut rng)));
        let cfg = ParetoConfig::new(1, weights(), 2, 5);
        let a = pareto_trace(&set, &cfg).unwrap();
        for p in &a.best {
            let r = evaluate(&set, 1, &p.ansatz).unwrap();
            assert!((r.r1_max - p.rect.r1_max).abs() <= 1e-9 && (r.r2_max - p.rect.r2_max).abs() <= 1e-9);
            assert!(a.region.contains_closed((r.r1_max, r.r2_max), 1e-9));
        }
        assert_eq!(a, pareto_trace(&set, &cfg).unwrap());
        let more = pareto_trace(&set, &ParetoConfig { budget: 4, ..cfg }).unwrap();
        assert!(a.region.is_subset_of(&more.region, 0.0));
    }

    #[test]
    fn evaluation_cap_truncates() {
        let set = CompoundSet::singleton(qmac(library::identity(4)));
        let cfg = ParetoConfig { max_evaluations: Some(1), ..ParetoConfig::new(1, weights(), 4, 3) };
        let t = pareto_trace(&set, &cfg).unwrap();
        assert!(t.truncated);
        assert_eq!(t.best.len(), 3);
    }

    #[test]
    fn dimension_budget_enforced() {
        let set = CompoundSet::singleton(qmac(library::identity(4)));
        let cfg = ParetoConfig { dimension_budget: 10, ..ParetoConfig::new(1, weights(), 1, 3) };
        assert!(matches!(pareto_trace(&set, &cfg), Err(Error::BudgetExceeded { required: 16, budget: 10 })));
    }

    #[test]
    fn nelder_mead_finds_quadratic_peak() {
        let (x, v, _) = nelder_mead(|x| -(x[0] - 1.0).powi(2) - (x[1] + 2.0).powi(2), &[0.0, 0.0], 0.5, 200);
        assert!((x[0] - 1.0).abs() < 1e-4 && (x[1] + 2.0).abs() < 1e-4 && v > -1e-8, "{x:?} {v}");
    }

    #[test]
    fn decomposition_examples() {
        let pure = DensityMatrix::basis(2, 1);
        let d = decompose_tensor_power(&pure, 3).unwrap();
        assert_eq!(d.weights.len(), 1);
        assert!((d.weights[0] - 1.0).abs() < 1e-12);
        let mixed = decompose_tensor_power(&DensityMatrix::maximally_mixed(&[2]), 2).unwrap();
        assert_eq!(mixed.count(), 1);
        let rho = DensityMatrix::diagonal(&[0.25, 0.75]).unwrap();
        let d = decompose_tensor_power(&rho, 2).unwrap();
        assert_eq!(d.count(), 3);
        let mut w = d.weights.clone();
        w.sort_by(f64::total_cmp);
        // multinomial grouping: C(2,k)·0.25^k·0.75^{2−k}
        for (got, want) in w.iter().zip([1.0 / 16.0, 6.0 / 16.0, 9.0 / 16.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn empirical_examples() {
        assert_eq!(empirical_approximation(&[1.0], 5).unwrap(), vec![5]);
        assert_eq!(empirical_approximation(&[0.5, 0.5], 10).unwrap(), vec![5, 5]);
        let n = empirical_approximation(&[0.3, 0.7], 100).unwrap();
        assert_eq!(n, vec![30, 70]);
        assert!(matches!(empirical_approximation(&[0.1, 0.9], 20), Err(Error::InvalidArgument(_))));
    }

    fn arb_state(d: usize) -> impl Strategy<Value = DensityMatrix> {
        prop::collection::vec(-1.0f64..1.0, 2 * d * d).prop_map(move |x| {
            let g = ComplexMatrix::from_fn(d, d, |r, c| C64::new(x[2 * (r * d + c)], x[2 * (r * d + c) + 1]));
            let m = g.mul_adjoint(&g);
            let t = m.trace().re.max(1e-12);
            DensityMatrix::new(m.scale_real(1.0 / t), vec![d]).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn decomposition_reconstructs((rho, l, flat) in (1usize..=3).prop_flat_map(|d| (arb_state(d), 1usize..=3, any::<bool>()))) {
            let d = rho.dim();
            let rho = if flat { DensityMatrix::diagonal(&vec![1.0 / d as f64; d]).unwrap() } else { rho };
            let dec = decompose_tensor_power(&rho, l).unwrap();
            let mut target = ComplexMatrix::identity(1);
            for _ in 0..l { target = target.kron(rho.matrix()); }
            prop_assert!(trace_norm(&dec.reconstruct().sub(&target)).unwrap() <= 1e-8);
            prop_assert!((dec.count() as f64) <= ((l + 1) as f64).powi(d as i32));
            for i in 0..dec.count() {
                for j in 0..dec.count() {
                    if i != j {
                        for u in &dec.bases[i] { for v in &dec.bases[j] {
                            prop_assert!(crate::qmatrix::inner(u, v).norm() < 1e-9);
                        }}
                    }
                }
            }
        }

        #[test]
        fn empirical_postconditions(raw in prop::collection::vec(0.0f64..1.0, 1..6), extra in 0usize..200) {
            let s: f64 = raw.iter().sum();
            prop_assume!(s > 1e-3);
            let q: Vec<f64> = raw.iter().map(|x| x / s).collect();
            let min_supp = q.iter().copied().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
            let t = (2.0 / min_supp).floor() as usize + 1 + extra;
            let n = empirical_approximation(&q, t).unwrap();
            let supp = q.iter().filter(|&&x| x > 0.0).count();
            prop_assert_eq!(n.iter().sum::<usize>(), t);
            for (ni, qi) in n.iter().zip(&q) {
                prop_assert_eq!(*ni == 0, *qi == 0.0);
                prop_assert!((qi - *ni as f64 / t as f64).abs() < supp as f64 / t as f64);
                if *qi > 0.0 { prop_assert!(*ni as f64 >= min_supp / 2.0 * t as f64); }
            }
        }

        #[test]
        fn objective_has_no_jumps(seed in 0u64..64) {
            let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(seed);
            let set = CompoundSet::singleton(qmac(library::random_channel(4, 2, 2, &mut rng)));
            let shape = ansatz_shape(&set, 1, None, DIMENSION_BUDGET).unwrap();
            let x0 = InputAnsatz::random(shape, seed, &mut rng).to_vector();
            let dir: Vec<f64> = (0..x0.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let h = 1e-6;
            let f = |t: f64| {
                let x: Vec<f64> = x0.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
                weighted_objective(&set, 1, shape, &x, (0.5, 0.5))
            };
            let (a, b) = (f(0.0), f(h));
            prop_assert!(a.is_finite() && b.is_finite());
            prop_assert!(((b - a) / h).abs() <= 1e3);
        }
    }
}
