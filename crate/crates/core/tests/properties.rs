//! Property tests over the state engine, Pauli algebra and serialization.

use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use walkport::cli::dyadic;
use walkport::measure::{apply_pauli, canonical_pauli};
use walkport::walkops::{apply_conditioned_shift, ConditionedShift};
use walkport::{
    project, BasisLabel, CorrectionEntry, CorrectionTable, InputPayload, PauliFactor, PauliOp, ProjectorFamily,
    RegisterLayout, RegisterSpec, SparseState,
};

const TOL: f64 = 1e-10;

fn config(cases: u32) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(0x5eed_0001), failure_persistence: None, ..Config::default() }
}

fn coin_layout() -> Arc<RegisterLayout> {
    Arc::new(
        RegisterLayout::new(vec![RegisterSpec::lattice("X", 6), RegisterSpec::coin("a"), RegisterSpec::coin("b")])
            .unwrap(),
    )
}

fn state() -> impl Strategy<Value = SparseState> {
    prop::collection::vec(((-3i32..=3), 0i32..2, 0i32..2, -1.0f64..1.0, -1.0f64..1.0), 1..12).prop_filter_map(
        "non-zero",
        |terms| {
            let s = SparseState::superpose(
                coin_layout(),
                terms.into_iter().map(|(x, a, b, re, im)| (BasisLabel::new(vec![x, a, b]), Complex64::new(re, im))),
            )
            .ok()?;
            (s.norm_sqr() > 1e-3).then(|| s.normalized())
        },
    )
}

fn pauli_op() -> impl Strategy<Value = PauliOp> {
    prop::sample::select(PauliOp::SEARCH_ORDER.to_vec())
}

fn factors() -> impl Strategy<Value = Vec<PauliFactor>> {
    prop::collection::vec((prop::sample::select(vec!["a", "b"]), pauli_op()), 0..6)
        .prop_map(|v| v.into_iter().map(|(r, op)| PauliFactor::new(r, op)).collect())
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn pauli_strings_are_unitary_and_self_inverse_up_to_phase(s in state(), f in factors()) {
        let once = apply_pauli(&s, &f).unwrap();
        prop_assert!((once.norm_sqr() - 1.0).abs() < TOL);
        let mut reversed = f.clone();
        reversed.reverse();
        let back = apply_pauli(&once, &reversed).unwrap();
        prop_assert!(back.max_abs_diff_up_to_phase(&s) < TOL);
    }

    #[test]
    fn canonical_form_acts_like_the_full_string(s in state(), f in factors()) {
        let canonical: Vec<PauliFactor> = canonical_pauli(&f).into_iter().map(|(r, op)| PauliFactor::new(r, op)).collect();
        let a = apply_pauli(&s, &f).unwrap();
        let b = apply_pauli(&s, &canonical).unwrap();
        prop_assert!(a.max_abs_diff_up_to_phase(&b) < TOL);
    }

    #[test]
    fn shift_preserves_norm_and_inverts(s in state()) {
        let cs = ConditionedShift::nearest_neighbour("X", "a");
        let moved = apply_conditioned_shift(&s, &cs).unwrap();
        prop_assert!((moved.norm_sqr() - 1.0).abs() < TOL);
        let back = apply_conditioned_shift(&moved, &cs.inverted()).unwrap();
        prop_assert!(back.max_abs_diff(&s) < TOL);
    }

    #[test]
    fn coin_family_is_complete(s in state()) {
        let family = ProjectorFamily::plus_minus("coins", vec!["a".into(), "b".into()], 1).unwrap();
        let total: f64 = family.projectors.iter().map(|p| project(&s, p).unwrap().probability).sum();
        prop_assert!((total - 1.0).abs() < TOL);
    }

    #[test]
    fn state_json_round_trip(s in state()) {
        let back = SparseState::from_json(&s.to_json()).unwrap();
        prop_assert!(back.max_abs_diff(&s) == 0.0);
    }

    #[test]
    fn ket_display_round_trip(values in prop::collection::vec(-9i32..=9, 1..10)) {
        let label = BasisLabel::new(values);
        prop_assert_eq!(BasisLabel::parse_ket(&label.to_string()).unwrap(), label);
    }

    #[test]
    fn correction_table_json_round_trip(rows in prop::collection::vec(("[0-9]{2}", "[+-]{2}", factors()), 1..8)) {
        let entries: Vec<CorrectionEntry> = rows
            .into_iter()
            .enumerate()
            .map(|(i, (p, c, f))| CorrectionEntry { position: format!("{p}/{i}"), coin: c, pauli: f })
            .collect();
        let table = CorrectionTable::new("line1q", entries);
        let back = CorrectionTable::from_json_str(&table.to_json_string()).unwrap();
        prop_assert_eq!(back.rows, table.rows);
    }

    #[test]
    fn seeded_batches_are_reproducible_and_normalized(seed in any::<u64>(), dim in prop::sample::select(vec![2usize, 4])) {
        let a = InputPayload::seeded_batch(seed, dim, 3);
        prop_assert_eq!(&a, &InputPayload::seeded_batch(seed, dim, 3));
        for p in &a {
            let n = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>();
            prop_assert!((n(&p.alice) - 1.0).abs() < TOL && (n(&p.bob) - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn dyadic_labels_round_trip(k in 0u32..=10, m in 1u64..64) {
        let denom = 1u64 << k;
        prop_assume!(m < denom && m % 2 == 1);
        let p = m as f64 / denom as f64;
        prop_assert_eq!(dyadic(p), Some(format!("{m}/{denom}")));
    }
}
