//! Rate regions as finite unions of boxes [0, r1] × [0, r2].

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{CompoundSet, CqChannel, KrausChannel, TENSOR_POWER_BUDGET};
use crate::entropic::effective_cqq_state;
use crate::error::{Error, Result};
use crate::qmatrix::PureState;

/// Default boundary tolerance for closed-region membership.
/// Corners whose r1 differ by at most this are treated as having equal r1.
pub const MERGE_TOL: f64 = 1e-9;

pub const CLOSURE_TOL: f64 = 1e-6;

/// The box [0, r1_max] × [0, r2_max].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rect {
    pub r1_max: f64,
    pub r2_max: f64,
}

fn clamp_rate(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

impl Rect {
    /// Negative or NaN edges clamp to 0.
    pub fn new(r1: f64, r2: f64) -> Self {
        Self { r1_max: clamp_rate(r1), r2_max: clamp_rate(r2) }
    }

    pub fn contains(&self, point: (f64, f64)) -> bool {
        point.0 <= self.r1_max && point.1 <= self.r2_max
    }

    pub fn dominates(&self, other: &Rect) -> bool {
        self.r1_max >= other.r1_max && self.r2_max >= other.r2_max
    }

    pub fn meet(&self, other: &Rect) -> Rect {
        Rect::new(self.r1_max.min(other.r1_max), self.r2_max.min(other.r2_max))
    }

    pub fn scaled(&self, factor: f64) -> Rect {
        Rect::new(self.r1_max * factor, self.r2_max * factor)
    }
}

/// Union of boxes, kept as the Pareto-maximal corners sorted by increasing r1.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RateRegion {
    rects: Vec<Rect>,
}

impl From<Rect> for RateRegion {
    fn from(r: Rect) -> Self {
        Self { rects: vec![r] }
    }
}

impl RateRegion {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_rects(rects: impl IntoIterator<Item = Rect>) -> Self {
        let mut rects: Vec<Rect> = rects.into_iter().collect();
        rects.sort_by(|a, b| b.r1_max.total_cmp(&a.r1_max).then(b.r2_max.total_cmp(&a.r2_max)));
        let mut kept: Vec<Rect> = Vec::with_capacity(rects.len());
        for r in rects {
            if kept.last().is_some_and(|k| r.r2_max <= k.r2_max) {
                continue;
            }
            // a corner beaten by r except for rounding noise in r1 is dropped
            while kept.last().is_some_and(|k| k.r1_max - r.r1_max <= MERGE_TOL) {
                kept.pop();
            }
            kept.push(r);
        }
        kept.reverse();
        Self { rects: kept }
    }

    /// Pareto corners, r1 increasing and r2 decreasing.
    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn contains(&self, point: (f64, f64)) -> bool {
        point.0 >= 0.0 && point.1 >= 0.0 && self.rects.iter().any(|r| r.contains(point))
    }

    /// Membership in the δ-fattened region.
    pub fn contains_closed(&self, point: (f64, f64), delta: f64) -> bool {
        self.fatten(delta).contains(point)
    }

    /// (1/l)·R
    pub fn scale(&self, l: usize) -> Self {
        assert!(l >= 1, "blocking length must be positive");
        Self::from_rects(self.rects.iter().map(|r| r.scaled(1.0 / l as f64)))
    }

    /// Points within ℓ∞ distance δ of the region, restricted to the nonnegative quadrant.
    pub fn fatten(&self, delta: f64) -> Self {
        let d = delta.max(0.0);
        Self::from_rects(self.rects.iter().map(|r| Rect::new(r.r1_max + d, r.r2_max + d)))
    }

    pub fn union(regions: &[RateRegion]) -> Self {
        Self::from_rects(regions.iter().flat_map(|r| r.rects.iter().copied()))
    }

    /// Empty list gives the empty region.
    pub fn intersect(regions: &[RateRegion]) -> Self {
        let Some((first, rest)) = regions.split_first() else {
            return Self::empty();
        };
        rest.iter().fold(first.clone(), |acc, r| {
            Self::from_rects(acc.rects.iter().flat_map(|a| r.rects.iter().map(move |b| a.meet(b))))
        })
    }

    pub fn is_subset_of(&self, other: &RateRegion, tol: f64) -> bool {
        self.rects.iter().all(|r| other.contains_closed((r.r1_max, r.r2_max), tol))
    }

    /// Adds the boxes under λx + (1−λ)y, λ = k/grid, along each edge of the upper
    /// convex hull of the corners (axis projections included).
    pub fn timeshare_closure(&self, grid: usize) -> Self {
        assert!(grid >= 2, "grid must be at least 2");
        if self.rects.is_empty() {
            return Self::empty();
        }
        let hull = self.upper_hull();
        let mut rects = self.rects.clone();
        for w in hull.windows(2) {
            let (a, b) = (w[0], w[1]);
            for k in 1..grid {
                let lam = k as f64 / grid as f64;
                rects.push(Rect::new(a.0 + lam * (b.0 - a.0), a.1 + lam * (b.1 - a.1)));
            }
        }
        Self::from_rects(rects)
    }

    /// Vertices of the concave boundary from (0, max r2) to (max r1, 0); collinear points dropped.
    pub fn upper_hull(&self) -> Vec<(f64, f64)> {
        let Some(last) = self.rects.last() else {
            return Vec::new();
        };
        let mut pts = vec![(0.0, self.rects[0].r2_max)];
        pts.extend(self.rects.iter().map(|r| (r.r1_max, r.r2_max)));
        pts.push((last.r1_max, 0.0));
        let scale = pts.iter().fold(1.0f64, |m, p| m.max(p.0.abs()).max(p.1.abs()));
        let tol = 1e-12 * scale * scale;
        let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
        for p in pts {
            if hull.last() == Some(&p) {
                continue;
            }
            while hull.len() >= 2 {
                let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
                if cross >= -tol {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull
    }

    /// `r1,r2,tag` rows for the corners, sorted by r1.
    pub fn to_csv(&self, tag: &str) -> String {
        let mut s = String::from("r1,r2,tag\n");
        for r in &self.rects {
            let _ = writeln!(s, "{:.9},{:.9},{tag}", r.r1_max, r.r2_max);
        }
        s
    }

    /// Staircase boundary on a 600×600 canvas; both axes in bits.
    pub fn to_svg(&self) -> String {
        const SIZE: f64 = 600.0;
        const MARGIN: f64 = 60.0;
        let plot = SIZE - 2.0 * MARGIN;
        let top = self.rects.iter().fold(0.0f64, |m, r| m.max(r.r1_max).max(r.r2_max));
        let axis_max = top.max(1.0).ceil();
        let x = |v: f64| MARGIN + v / axis_max * plot;
        let y = |v: f64| SIZE - MARGIN - v / axis_max * plot;
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="600" height="600" viewBox="0 0 600 600">"#);
        let _ = writeln!(s, r#"  <rect x="0" y="0" width="600" height="600" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"  <g id="axes" stroke="black" stroke-width="1"><line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/><line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/></g>"#,
            x(0.0),
            y(0.0),
            x(axis_max),
            y(0.0),
            x(0.0),
            y(0.0),
            x(0.0),
            y(axis_max)
        );
        let ticks = 4;
        let _ = writeln!(s, r#"  <g id="ticks" font-family="sans-serif" font-size="12">"#);
        for k in 0..=ticks {
            let v = axis_max * k as f64 / ticks as f64;
            let _ = writeln!(s, r#"    <text x="{:.3}" y="{:.3}" text-anchor="middle">{v:.2}</text>"#, x(v), y(0.0) + 18.0);
            let _ = writeln!(s, r#"    <text x="{:.3}" y="{:.3}" text-anchor="end">{v:.2}</text>"#, x(0.0) - 6.0, y(v) + 4.0);
        }
        let _ = writeln!(s, "  </g>");
        let _ = writeln!(s, r#"  <text x="300" y="590" text-anchor="middle" font-family="sans-serif" font-size="14">R1 (bits per use)</text>"#);
        let _ = writeln!(
            s,
            r#"  <text x="16" y="300" text-anchor="middle" font-family="sans-serif" font-size="14" transform="rotate(-90 16 300)">R2 (bits per use)</text>"#
        );
        if let Some(first) = self.rects.first() {
            let mut d = format!("M {:.3} {:.3}", x(0.0), y(first.r2_max));
            for (i, r) in self.rects.iter().enumerate() {
                let _ = write!(d, " H {:.3}", x(r.r1_max));
                let next = self.rects.get(i + 1).map_or(0.0, |n| n.r2_max);
                let _ = write!(d, " V {:.3}", y(next));
            }
            let _ = writeln!(s, r#"  <path id="boundary" d="{d}" fill="none" stroke="steelblue" stroke-width="2"/>"#);
            for r in &self.rects {
                let _ = writeln!(
                    s,
                    r#"  <circle cx="{:.3}" cy="{:.3}" r="3" fill="steelblue" data-r1="{:.9}" data-r2="{:.9}"/>"#,
                    x(r.r1_max),
                    y(r.r2_max),
                    r.r1_max,
                    r.r2_max
                );
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Inputs (p, V, Ψ) for one block: Ψ on B' ⊗ B.
#[derive(Clone, Debug, PartialEq)]
pub struct CodingInput {
    pub p: Vec<f64>,
    pub v: CqChannel,
    pub psi: PureState,
}

impl CodingInput {
    pub fn new(p: Vec<f64>, v: CqChannel, psi: PureState) -> Self {
        Self { p, v, psi }
    }

    /// Σ p(x)|x⟩⟨x| with V(x) = |x⟩ and Ψ maximally entangled on B' ⊗ B.
    pub fn canonical(da: usize, db: usize) -> Self {
        Self { p: vec![1.0 / da as f64; da], v: CqChannel::computational_basis(da), psi: PureState::maximally_entangled(db) }
    }

    /// Input for two consecutive blocks: p₁⊗p₂, V₁⊗V₂ and Ψ₁⊗Ψ₂ regrouped as (B'₁B'₂)(B₁B₂).
    pub fn product(&self, other: &Self) -> Result<Self> {
        let p = self.p.iter().flat_map(|a| other.p.iter().map(move |b| a * b)).collect();
        let v = self.v.tensor(&other.v);
        let (r1, b1) = split_psi(&self.psi)?;
        let (r2, b2) = split_psi(&other.psi)?;
        let joint = self.psi.clone().with_dims(vec![r1, b1])?.tensor(&other.psi.clone().with_dims(vec![r2, b2])?);
        let psi = joint.permute(&[0, 2, 1, 3])?.with_dims(vec![r1 * r2, b1 * b2])?;
        Ok(Self { p, v, psi })
    }

    /// k-fold product.
    pub fn power(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("power must be positive".into()));
        }
        let mut acc = self.clone();
        for _ in 1..k {
            acc = acc.product(self)?;
        }
        Ok(acc)
    }
}

/// Time-sharing input at λ = k/n: `first` (block length l1) repeated l2·k times followed by
/// `second` (block length l2) repeated l1·(n−k) times. Returns the total block length l1·l2·n.
pub fn timeshare_input(first: &CodingInput, l1: usize, second: &CodingInput, l2: usize, n: usize, k: usize) -> Result<(usize, CodingInput)> {
    if l1 == 0 || l2 == 0 || n == 0 || k > n {
        return Err(Error::InvalidArgument(format!("invalid time sharing l1={l1} l2={l2} n={n} k={k}")));
    }
    let (t1, t2) = (l2 * k, l1 * (n - k));
    let input = match (t1, t2) {
        (0, _) => second.power(t2)?,
        (_, 0) => first.power(t1)?,
        _ => first.power(t1)?.product(&second.power(t2)?)?,
    };
    Ok((l1 * l2 * n, input))
}

fn split_psi(psi: &PureState) -> Result<(usize, usize)> {
    match psi.dims() {
        [r, b] => Ok((*r, *b)),
        d => Err(Error::DimensionMismatch(format!("Ψ must have two factors, got {d:?}"))),
    }
}

/// Rect(max(0, I(X;C)), max(0, I_c(B⟩CX))) at ω(t, p, V, Ψ).
pub fn one_shot_region(t: &KrausChannel, p: &[f64], v: &CqChannel, psi: &PureState) -> Result<Rect> {
    let omega = effective_cqq_state(t, p, v, psi)?;
    Ok(Rect::new(omega.holevo_xc()?, omega.coherent_b_given_cx()?))
}

/// Rates of each member's l-fold power at the given block input, scaled by 1/l.
pub fn member_rates(set: &CompoundSet, l: usize, p: &[f64], v: &CqChannel, psi: &PureState) -> Result<Vec<Rect>> {
    compound_member_rates(set, l, p, v, psi, TENSOR_POWER_BUDGET)
}

fn compound_member_rates(set: &CompoundSet, l: usize, p: &[f64], v: &CqChannel, psi: &PureState, budget: usize) -> Result<Vec<Rect>> {
    if l == 0 {
        return Err(Error::InvalidArgument("blocking length must be positive".into()));
    }
    set.members()
        .par_iter()
        .map(|m| {
            let block = if l == 1 { m.clone() } else { m.mac_tensor_power(l, budget)? };
            Ok(one_shot_region(&block, p, v, psi)?.scaled(1.0 / l as f64))
        })
        .collect()
}

/// ∩ over members of (1/l)·Ĉ(𝓜^{⊗l}, p, V, Ψ); p, V, Ψ act on the l-blocked systems.
pub fn compound_rect(set: &CompoundSet, l: usize, p: &[f64], v: &CqChannel, psi: &PureState) -> Result<Rect> {
    compound_rect_with_budget(set, l, p, v, psi, TENSOR_POWER_BUDGET)
}

/// As `compound_rect`, with the per-side tensor-power dimension budget given explicitly.
pub fn compound_rect_with_budget(set: &CompoundSet, l: usize, p: &[f64], v: &CqChannel, psi: &PureState, budget: usize) -> Result<Rect> {
    let rates = compound_member_rates(set, l, p, v, psi, budget)?;
    Ok(rates.iter().fold(Rect::new(f64::INFINITY, f64::INFINITY), |acc, r| acc.meet(r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::library;
    use crate::entropic::{coherent_information, von_neumann_entropy};
    use proptest::prelude::*;

    fn qmac(ch: KrausChannel) -> KrausChannel {
        let (i, o) = (ch.in_dim(), ch.out_dim());
        ch.with_dims(vec![2, i / 2], vec![o]).unwrap()
    }

    fn identity_qmac() -> KrausChannel {
        qmac(library::identity(4))
    }

    #[test]
    fn identity_qmac_rect_is_unit_square() {
        let c = CodingInput::canonical(2, 2);
        let r = one_shot_region(&identity_qmac(), &c.p, &c.v, &c.psi).unwrap();
        assert!((r.r1_max - 1.0).abs() < 1e-9 && (r.r2_max - 1.0).abs() < 1e-9);
    }

    #[test]
    fn depolarizing_rect_is_zero() {
        let c = CodingInput::canonical(2, 2);
        let r = one_shot_region(&qmac(library::depolarizing(4, 1.0).unwrap()), &c.p, &c.v, &c.psi).unwrap();
        assert_eq!(r, Rect::new(0.0, 0.0));
    }

    #[test]
    fn erasure_on_b_kills_quantum_rate() {
        let t = library::identity(2).tensor(&library::erasure(2, 0.5).unwrap());
        let t = t.with_dims(vec![2, 2], vec![6]).unwrap();
        let c = CodingInput::canonical(2, 2);
        let r = one_shot_region(&t, &c.p, &c.v, &c.psi).unwrap();
        assert!((r.r1_max - 1.0).abs() < 1e-9);
        // direct: reference ⊗ erased output has S(C) = S(RC)
        let bell = PureState::maximally_entangled(2).to_density();
        let out = library::identity(2).tensor(&library::erasure(2, 0.5).unwrap()).apply(&bell).unwrap();
        let oracle = coherent_information(&out, &[0], &[1]).unwrap();
        assert!(oracle.abs() < 1e-9);
        assert_eq!(r.r2_max, 0.0);
    }

    fn dephase_b() -> KrausChannel {
        qmac(library::identity(2).tensor(&library::dephasing(0.5).unwrap()))
    }

    #[test]
    fn compound_with_dephasing_member() {
        let c = CodingInput::canonical(2, 2);
        let single = CompoundSet::singleton(identity_qmac());
        let r0 = one_shot_region(&identity_qmac(), &c.p, &c.v, &c.psi).unwrap();
        assert_eq!(compound_rect(&single, 1, &c.p, &c.v, &c.psi).unwrap(), r0);
        let twice = CompoundSet::from_members(vec![identity_qmac(), identity_qmac()]).unwrap();
        assert_eq!(compound_rect(&twice, 1, &c.p, &c.v, &c.psi).unwrap(), r0);
        let set = CompoundSet::from_members(vec![identity_qmac(), dephase_b()]).unwrap();
        let r = compound_rect(&set, 1, &c.p, &c.v, &c.psi).unwrap();
        assert!((r.r1_max - 1.0).abs() < 1e-7 && r.r2_max.abs() < 1e-7);
        // dephased Bell pair: S(B) = 1, S(RB) = 1
        let bell = PureState::maximally_entangled(2).to_density();
        let dep = library::identity(2).tensor(&library::dephasing(0.5).unwrap()).apply(&bell).unwrap();
        assert!((von_neumann_entropy(&dep).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_block_product_input_is_additive() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let t = qmac(library::random_channel(4, 2, 2, &mut rng));
        let c = CodingInput::canonical(2, 2);
        let set = CompoundSet::singleton(t);
        let r1 = compound_rect(&set, 1, &c.p, &c.v, &c.psi).unwrap();
        let c2 = c.power(2).unwrap();
        let r2 = compound_rect(&set, 2, &c2.p, &c2.v, &c2.psi).unwrap();
        assert!((r1.r1_max - r2.r1_max).abs() < 1e-7);
        assert!((r1.r2_max - r2.r2_max).abs() < 1e-7);
    }

    #[test]
    fn region_operations() {
        let r = RateRegion::from(Rect::new(2.0, 2.0)).scale(2);
        assert_eq!(r.rects(), &[Rect::new(1.0, 1.0)]);
        assert!(RateRegion::from(Rect::new(1.0, 1.0)).fatten(0.1).contains((1.1, 1.1)));
        assert!(!RateRegion::from(Rect::new(1.0, 1.0)).contains((1.1, 1.1)));
        let u = RateRegion::union(&[Rect::new(1.0, 0.0).into(), Rect::new(0.0, 1.0).into()]);
        assert!(!u.contains((0.6, 0.6)));
        assert!(u.contains((1.0, 0.0)) && u.contains((0.0, 1.0)));
        let i = RateRegion::intersect(&[Rect::new(1.0, 3.0).into(), Rect::new(2.0, 0.5).into()]);
        assert_eq!(i.rects(), &[Rect::new(1.0, 0.5)]);
        assert!(RateRegion::from(Rect::new(1.0, 1.0)).contains_closed((1.0 + 5e-7, 1.0), CLOSURE_TOL));
        assert!(!RateRegion::from(Rect::new(1.0, 1.0)).contains_closed((1.0 + 2e-6, 1.0), CLOSURE_TOL));
    }

    #[test]
    fn negative_edges_clamp() {
        assert_eq!(Rect::new(-0.5, f64::NAN), Rect::new(0.0, 0.0));
    }

    #[test]
    fn canonical_form_drops_dominated() {
        let r = RateRegion::from_rects([Rect::new(1.0, 1.0), Rect::new(0.5, 0.5), Rect::new(2.0, 0.2), Rect::new(1.0, 1.0)]);
        assert_eq!(r.rects(), &[Rect::new(1.0, 1.0), Rect::new(2.0, 0.2)]);
    }

    #[test]
    fn timesharing_corner_points() {
        let u = RateRegion::union(&[Rect::new(1.0, 0.0).into(), Rect::new(0.0, 1.0).into()]);
        let c = u.timeshare_closure(2);
        assert!(c.contains((0.5, 0.5)));
        assert!(!c.contains((0.6, 0.6)));
        assert_eq!(c.timeshare_closure(2), c);
        let convex = RateRegion::from(Rect::new(1.0, 0.7));
        assert_eq!(convex.timeshare_closure(5), convex);
    }

    #[test]
    fn csv_and_svg() {
        let r = RateRegion::from_rects([Rect::new(1.0, 0.25), Rect::new(0.5, 1.0)]);
        let csv = r.to_csv("corner");
        assert_eq!(csv, "r1,r2,tag\n0.500000000,1.000000000,corner\n1.000000000,0.250000000,corner\n");
        let svg = r.to_svg();
        assert!(svg.contains(r#"viewBox="0 0 600 600""#));
        assert!(svg.contains(r#"data-r1="0.500000000" data-r2="1.000000000""#));
    }

    fn arb_region() -> impl Strategy<Value = RateRegion> {
        prop::collection::vec((0.0f64..3.0, 0.0f64..3.0), 0..6).prop_map(|v| RateRegion::from_rects(v.into_iter().map(|(a, b)| Rect::new(a, b))))
    }

    proptest! {
        #[test]
        fn membership_is_downward_closed(r in arb_region(), x in 0.0f64..3.0, y in 0.0f64..3.0, s in 0.0f64..1.0, t in 0.0f64..1.0) {
            if r.contains((x, y)) {
                prop_assert!(r.contains((x * s, y * t)));
            }
        }

        #[test]
        fn timeshare_is_idempotent_and_grows(r in arb_region(), grid in 2usize..7) {
            let c = r.timeshare_closure(grid);
            prop_assert_eq!(c.timeshare_closure(grid), c.clone());
            prop_assert!(r.is_subset_of(&c, 0.0));
        }

        #[test]
        fn intersection_is_subset(a in arb_region(), b in arb_region()) {
            let i = RateRegion::intersect(&[a.clone(), b.clone()]);
            prop_assert!(i.is_subset_of(&a, 0.0) && i.is_subset_of(&b, 0.0));
            let u = RateRegion::union(&[a.clone(), b.clone()]);
            prop_assert!(a.is_subset_of(&u, 0.0) && b.is_subset_of(&u, 0.0));
        }
    }
}
