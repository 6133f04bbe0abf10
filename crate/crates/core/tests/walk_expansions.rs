//! Intermediate walk states checked term by term against known expansions.

mod common;

use common::{expansion_delta, generic, Term, CYCLE_W1, LINE_W1, LINE_W2, LINE_W3, LINE_W4};
use num_complex::Complex64;
use walkport::{BasisLabel, InputPayload, ProtocolId, ProtocolSpec, SparseState};

const TOL: f64 = 1e-12;

fn assert_expansion(state: &SparseState, payload: &InputPayload, scale: f64, terms: &[Term]) {
    match expansion_delta(state, payload, scale, terms) {
        Some(d) => assert!(d < TOL, "coefficient error {d:e}"),
        None => panic!("expected {} terms, found {}", terms.len(), state.len()),
    }
}

#[test]
fn line_walk_steps_match_expansions() {
    let spec = ProtocolSpec::new(ProtocolId::Line1Q).unwrap();
    let p = generic(2);
    let trace = spec.trace_walks(&p).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert_expansion(&trace[1], &p, 1.0, &LINE_W1);
    assert_expansion(&trace[2], &p, 1.0, &LINE_W2);
    assert_expansion(&trace[3], &p, h, &LINE_W3);
    assert_expansion(&trace[4], &p, 0.5, &LINE_W4);
}

#[test]
fn cycle_walk_output_matches_expansion() {
    let spec = ProtocolSpec::new(ProtocolId::Cycle1Q).unwrap();
    let p = generic(2);
    assert_expansion(&spec.run_walks(&p).unwrap(), &p, 0.5, &CYCLE_W1);
}

#[test]
fn cycle_origin_projection_holds_1010_not_1111() {
    let spec = ProtocolSpec::new(ProtocolId::Cycle1Q).unwrap();
    let p = generic(2);
    let s = spec.run_walks(&p).unwrap();
    let origin = spec.plan.family("00").unwrap().projectors[0].clone();
    let proj = walkport::project(&s, &origin).unwrap();
    // Unnormalized amplitudes are a_i b_j / 2; the residual is rescaled by 1/sqrt(1/4).
    let a = |ket: &str| proj.residual.amplitude(&BasisLabel::parse_ket(ket).unwrap());
    assert!((proj.probability - 0.25).abs() < TOL);
    assert!((a("1010") - p.alice[1] * p.bob[1]).norm() < TOL);
    assert!(a("1111").norm() < TOL);
}

fn a0b0_block(spec: &ProtocolSpec) -> SparseState {
    spec.run_walks(&InputPayload::basis(4)).unwrap()
}

fn assert_uniform_block(s: &SparseState, kets: &[&str]) {
    assert_eq!(s.len(), kets.len());
    for k in kets {
        let a = s.amplitude(&BasisLabel::parse_ket(k).unwrap());
        assert!((a - Complex64::new(0.25, 0.0)).norm() < TOL, "{k}: {a}");
    }
}

#[test]
fn single_step_two_qubit_a0b0_block() {
    let spec = ProtocolSpec::new(ProtocolId::Single2Q).unwrap();
    assert_uniform_block(
        &a0b0_block(&spec),
        &[
            "222200000000",
            "202200000001",
            "022200000010",
            "002200000011",
            "222000010000",
            "202000010001",
            "022000010010",
            "002000010011",
            "220200100000",
            "200200100001",
            "020200100010",
            "000200100011",
            "220000110000",
            "200000110001",
            "020000110010",
            "000000110011",
        ],
    );
}

#[test]
fn two_step_two_qubit_a0b0_block() {
    let spec = ProtocolSpec::new(ProtocolId::TwoStep2Q).unwrap();
    assert_uniform_block(
        &a0b0_block(&spec),
        &[
            "4400000000",
            "3400000001",
            "1400000010",
            "0400000011",
            "4300010000",
            "3300010001",
            "1300010010",
            "0300010011",
            "4100100000",
            "3100100001",
            "1100100010",
            "0100100011",
            "4000110000",
            "3000110001",
            "1000110010",
            "0000110011",
        ],
    );
}
