use qmac_core::qmatrix::{ComplexMatrix, PureState};
use qmac_core::regions::{compound_rect, timeshare_input, CodingInput, RateRegion, Rect};
use qmac_core::{CompoundSet, CqChannel, KrausChannel};

/// (1−q)·tr_B + q·tr_A on two qubits.
fn forgetful_mixer(q: f64) -> KrausChannel {
    let mut kraus = Vec::new();
    for j in 0..2 {
        kraus.push(ComplexMatrix::from_fn(2, 4, |o, i| if i == o * 2 + j { ((1.0 - q).sqrt()).into() } else { 0.0.into() }));
        kraus.push(ComplexMatrix::from_fn(2, 4, |o, i| if i == j * 2 + o { q.sqrt().into() } else { 0.0.into() }));
    }
    KrausChannel::new(kraus, vec![2, 2], vec![2]).unwrap()
}

fn qubit_set() -> CompoundSet {
    CompoundSet::from_members(vec![forgetful_mixer(0.85), forgetful_mixer(0.9)]).unwrap()
}

fn classical_input() -> CodingInput {
    let psi = PureState::basis(4, 0).with_dims(vec![2, 2]).unwrap();
    CodingInput::new(vec![0.5, 0.5], CqChannel::computational_basis(2), psi)
}

fn quantum_input() -> CodingInput {
    CodingInput::new(vec![1.0], CqChannel::from_pure(&[PureState::basis(2, 0)]).unwrap(), PureState::maximally_entangled(2))
}

#[test]
fn midpoint_is_reached_by_blocked_product_input() {
    let set = qubit_set();
    let (a, b) = (classical_input(), quantum_input());
    let ra = compound_rect(&set, 1, &a.p, &a.v, &a.psi).unwrap();
    let rb = compound_rect(&set, 1, &b.p, &b.v, &b.psi).unwrap();
    assert!(ra.r1_max > 0.05 && rb.r2_max > 0.2, "{ra:?} {rb:?}");
    let mid = (0.5 * (ra.r1_max + rb.r1_max), 0.5 * (ra.r2_max + rb.r2_max));
    let union = RateRegion::union(&[ra.into(), rb.into()]);
    assert!(!union.contains(mid));
    assert!(union.timeshare_closure(2).contains(mid));

    let (len, joint) = timeshare_input(&a, 1, &b, 1, 2, 1).unwrap();
    assert_eq!(len, 2);
    let blocked = RateRegion::from(compound_rect(&set, len, &joint.p, &joint.v, &joint.psi).unwrap());
    assert!(blocked.contains_closed(mid, 0.05), "{blocked:?} vs {mid:?}");
    // the blocked rates are per-member averages, so the midpoint of the minima lies below them
    assert!(blocked.contains_closed(mid, 1e-9));
}

#[test]
fn degenerate_sharing_reduces_to_single_input() {
    let set = qubit_set();
    let a = classical_input();
    let (len, only_a) = timeshare_input(&a, 1, &quantum_input(), 1, 2, 2).unwrap();
    let r = compound_rect(&set, len, &only_a.p, &only_a.v, &only_a.psi).unwrap();
    let r1 = compound_rect(&set, 1, &a.p, &a.v, &a.psi).unwrap();
    assert!((r.r1_max - r1.r1_max).abs() < 1e-7 && (r.r2_max - r1.r2_max).abs() < 1e-7);
    assert_ne!(r, Rect::new(0.0, 0.0));
}
