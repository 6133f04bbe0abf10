//! Acceptance run: one PASS/FAIL line per criterion on stdout, then a single
//! assertion over all of them. Every tolerance used here is pinned below.

mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use common::{expansion_delta, generic, run_report_json, CYCLE_W1, LINE_W1, LINE_W2, LINE_W3, LINE_W4};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use walkport::equivalence::{check_cycle_line_equivalence, check_two_qubit_equivalence, BasisMapping};
use walkport::measure::{compare_tables, RowStatus};
use walkport::oracle::oracle_check;
use walkport::walkops::apply_walk_step;
use walkport::{enumerate_branches, project, BasisLabel, InputPayload, ProtocolId, ProtocolSpec, SparseState};

const FIDELITY_FLOOR: f64 = 1.0 - 1e-9;
const BRANCH_PROBABILITY_TOL: f64 = 1e-10;
const TOTAL_PROBABILITY_TOL: f64 = 1e-9;
const COEFFICIENT_TOL: f64 = 1e-12;
const EQUIVALENCE_TOL: f64 = 1e-10;
const ORACLE_TOL: f64 = 1e-10;
const UNITARITY_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-10;
const LINE_RUNTIME: Duration = Duration::from_secs(5);
const TWO_QUBIT_RUNTIME: Duration = Duration::from_secs(60);
const PROPERTY_SEED: u64 = 0x5eed_ac0e;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome { passed, detail: detail.into() }
    }
}

fn sweep_summary(branches: &[walkport::BranchResult], worst_fid: &mut f64, worst_total: &mut f64) {
    let mut total = 0.0;
    for b in branches.iter().filter(|b| !b.vacuous) {
        *worst_fid = worst_fid.min(b.fidelity);
        total += b.probability;
    }
    *worst_total = worst_total.max((total - 1.0).abs());
}

fn criterion_line() -> Outcome {
    let start = Instant::now();
    let spec = ProtocolSpec::new(ProtocolId::Line1Q).unwrap();
    let payloads = InputPayload::seeded_batch(7, 2, 100);
    let expected = |position: &str| match position.split('/').next().unwrap() {
        "00" => 1.0 / 16.0,
        "02" | "20" => 1.0 / 32.0,
        _ => 1.0 / 64.0,
    };
    let (mut worst_fid, mut worst_total, mut worst_p) = (1.0_f64, 0.0_f64, 0.0_f64);
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut branch_counts_ok = true;
    for (k, p) in payloads.iter().enumerate() {
        let branches = enumerate_branches(&spec, p).unwrap();
        branch_counts_ok &= branches.len() == 36 && branches.iter().all(|b| !b.vacuous);
        sweep_summary(&branches, &mut worst_fid, &mut worst_total);
        for b in &branches {
            worst_p = worst_p.max((b.probability - expected(&b.position)).abs());
            if k == 0 {
                *counts.entry(dyadic_name(expected(&b.position))).or_default() += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let counts_ok =
        counts.get("1/16") == Some(&4) && counts.get("1/32") == Some(&16) && counts.get("1/64") == Some(&16);
    let passed = branch_counts_ok
        && counts_ok
        && worst_fid >= FIDELITY_FLOOR
        && worst_p <= BRANCH_PROBABILITY_TOL
        && worst_total <= TOTAL_PROBABILITY_TOL
        && elapsed < LINE_RUNTIME;
    Outcome::new(
        passed,
        format!(
            "100 payloads, 36 branches each; counts {counts:?} (the origin family has 4 coin branches, so 16 at 1/16 \
             would exceed unit mass); min fidelity {worst_fid:.15}, max |p - p_expected| {worst_p:.1e}, \
             max |sum - 1| {worst_total:.1e}, {elapsed:.2?}"
        ),
    )
}

fn dyadic_name(p: f64) -> String {
    format!("1/{}", (1.0 / p).round() as u64)
}

fn criterion_line_expansions() -> Outcome {
    let spec = ProtocolSpec::new(ProtocolId::Line1Q).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut spot = vec![generic(2), InputPayload::real(&[0.6, 0.8], &[0.8, -0.6]).unwrap()];
    spot.extend(InputPayload::seeded_batch(23, 2, 3));
    let mut worst: f64 = 0.0;
    let mut counts_ok = true;
    for p in &spot {
        let trace = spec.trace_walks(p).unwrap();
        for (state, scale, terms) in [
            (&trace[1], 1.0, &LINE_W1[..]),
            (&trace[2], 1.0, &LINE_W2[..]),
            (&trace[3], h, &LINE_W3[..]),
            (&trace[4], 0.5, &LINE_W4[..]),
        ] {
            match expansion_delta(state, p, scale, terms) {
                Some(d) => worst = worst.max(d),
                None => counts_ok = false,
            }
        }
    }
    Outcome::new(
        counts_ok && worst < COEFFICIENT_TOL,
        format!(
            "4/4/8/16 terms over {} payloads, term counts exact: {counts_ok}, max coefficient error {worst:.1e}",
            spot.len()
        ),
    )
}

fn criterion_cycle() -> Outcome {
    let spec = ProtocolSpec::new(ProtocolId::Cycle1Q).unwrap();
    let p = generic(2);
    let state = spec.run_walks(&p).unwrap();
    let expansion = expansion_delta(&state, &p, 0.5, &CYCLE_W1);
    let expansion_ok = expansion.is_some_and(|d| d < COEFFICIENT_TOL);

    let branches = enumerate_branches(&spec, &p).unwrap();
    let origin = branches.iter().find(|b| b.position == "00" && b.coin == "++").unwrap();
    let origin_ok = origin.fidelity >= FIDELITY_FLOOR;

    let payloads = InputPayload::seeded_batch(1, 2, 25);
    let rows =
        compare_tables(&spec, &ProtocolId::Cycle1Q.published_table().unwrap(), spec.corrections().unwrap(), &payloads)
            .unwrap();
    let table_ok = rows.len() == 16
        && rows.iter().all(|r| {
            matches!(r.status, RowStatus::Match | RowStatus::Equivalent)
                && r.reference_min_fidelity.is_some_and(|f| f >= FIDELITY_FLOOR)
        });

    let equiv = check_cycle_line_equivalence(&payloads, EQUIVALENCE_TOL).unwrap();

    let proj = project(&state, &spec.plan.family("00").unwrap().projectors[0]).unwrap();
    let amp = |ket: &str| proj.residual.amplitude(&BasisLabel::parse_ket(ket).unwrap());
    let ab = p.alice[1] * p.bob[1];
    let listed_1111_fails = (amp("1111") - ab).norm() > COEFFICIENT_TOL;
    let actual_1010_holds = (amp("1010") - ab).norm() < COEFFICIENT_TOL;
    let surfaced = equiv.notes.iter().any(|n| n.contains("|1010>") && n.contains("|1111>"));

    let passed =
        expansion_ok && origin_ok && table_ok && equiv.passed && listed_1111_fails && actual_1010_holds && surfaced;
    Outcome::new(
        passed,
        format!(
            "walk output 16 terms: {expansion_ok}; origin ++ fidelity {:.15}; published rows verified {}/16; \
             mod-4 equivalence {} (max state delta {:.1e}); |1111> reproduced: {}, |1010> reproduced: {actual_1010_holds}, \
             surfaced in report: {surfaced}",
            origin.fidelity,
            rows.iter().filter(|r| r.reference_min_fidelity.is_some_and(|f| f >= FIDELITY_FLOOR)).count(),
            equiv.passed,
            equiv.max_state_delta,
            !listed_1111_fails,
        ),
    )
}

fn criterion_two_qubit(id: ProtocolId, origin: &str) -> Outcome {
    let start = Instant::now();
    let spec = ProtocolSpec::new(id).unwrap();
    let payloads = InputPayload::seeded_batch(3, 4, 100);
    let (mut worst_fid, mut worst_total, mut worst_origin) = (1.0_f64, 0.0_f64, 0.0_f64);
    let mut origin_rows = 0;
    for p in &payloads {
        let branches = enumerate_branches(&spec, p).unwrap();
        sweep_summary(&branches, &mut worst_fid, &mut worst_total);
        let first = branches.iter().filter(|b| b.position == origin);
        for b in first {
            origin_rows += 1;
            worst_origin =
                worst_origin.max((b.probability - 1.0 / 256.0).abs()).max((b.position_probability - 1.0 / 16.0).abs());
        }
    }
    let elapsed = start.elapsed();

    let check = InputPayload::seeded_batch(1, 4, 8);
    let rows = compare_tables(&spec, &id.published_table().unwrap(), spec.corrections().unwrap(), &check).unwrap();
    let tally = |s: RowStatus| rows.iter().filter(|r| r.status == s).count();
    let flagged: Vec<String> = rows
        .iter()
        .filter(|r| !matches!(r.status, RowStatus::Match | RowStatus::Equivalent))
        .map(|r| format!("{} {:?}", r.coin, r.status))
        .collect();

    let passed = origin_rows == 16 * payloads.len()
        && rows.len() == 16
        && worst_fid >= FIDELITY_FLOOR
        && worst_origin <= BRANCH_PROBABILITY_TOL
        && worst_total <= TOTAL_PROBABILITY_TOL
        && elapsed < TWO_QUBIT_RUNTIME;
    Outcome::new(
        passed,
        format!(
            "100 payloads; min fidelity {worst_fid:.15}; origin branch 1/16 x 1/16 = 1/256 within {worst_origin:.1e}; \
             max |sum - 1| {worst_total:.1e}; {elapsed:.2?}; published origin rows: {} match, {} equivalent, flagged {flagged:?}",
            tally(RowStatus::Match),
            tally(RowStatus::Equivalent),
        ),
    )
}

fn criterion_equivalence() -> Outcome {
    let payloads = InputPayload::seeded_batch(1, 4, 25);
    let r = check_two_qubit_equivalence(&payloads, &BasisMapping::two_qubit().unwrap(), EQUIVALENCE_TOL).unwrap();
    let passed = r.passed
        && r.table_mismatches.is_empty()
        && r.max_probability_delta <= EQUIVALENCE_TOL
        && r.max_state_delta <= EQUIVALENCE_TOL;
    Outcome::new(
        passed,
        format!(
            "{} branch pairs over 25 payloads; max probability delta {:.1e}, max state delta {:.1e}; \
             table rows differing under renaming: {}",
            r.branches_compared,
            r.max_probability_delta,
            r.max_state_delta,
            r.table_mismatches.len()
        ),
    )
}

fn criterion_oracle() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for id in ProtocolId::ALL {
        let payloads = InputPayload::seeded_batch(0, 1 << id.qubits_per_party(), 25);
        let r = oracle_check(id, &payloads, ORACLE_TOL).unwrap();
        passed &= r.passed && r.max_state_delta <= ORACLE_TOL && r.max_unitarity_deviation < UNITARITY_TOL;
        parts.push(format!("{id} {:.1e}/{:.1e}", r.max_state_delta, r.max_unitarity_deviation));
    }
    Outcome::new(passed, format!("state delta / unitarity deviation: {}", parts.join(", ")))
}

fn payload_strategy(dim: usize) -> impl Strategy<Value = InputPayload> {
    let amps = || prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim);
    (amps(), amps())
        .prop_filter("non-degenerate", |(a, b)| {
            a.iter().map(|(x, y)| x * x + y * y).sum::<f64>() > 1e-2
                && b.iter().map(|(x, y)| x * x + y * y).sum::<f64>() > 1e-2
        })
        .prop_map(|(a, b)| {
            let norm = |v: Vec<(f64, f64)>| {
                let v: Vec<Complex64> = v.into_iter().map(|(x, y)| Complex64::new(x, y)).collect();
                let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                v.into_iter().map(|c| c / n).collect::<Vec<_>>()
            };
            InputPayload::new(norm(a), norm(b)).unwrap()
        })
}

fn protocol_and_payload() -> impl Strategy<Value = (ProtocolId, InputPayload)> {
    prop::sample::select(ProtocolId::ALL.to_vec())
        .prop_flat_map(|id| (Just(id), payload_strategy(1 << id.qubits_per_party())))
}

fn runner(cases: u32, salt: u64) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let seed = (PROPERTY_SEED ^ salt).to_le_bytes().repeat(4);
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &seed))
}

fn walk(spec: &ProtocolSpec, s: &SparseState) -> SparseState {
    spec.steps.iter().fold(s.clone(), |acc, w| apply_walk_step(&acc, w).unwrap())
}

fn criterion_properties() -> Outcome {
    let specs: BTreeMap<ProtocolId, ProtocolSpec> =
        ProtocolId::ALL.iter().map(|&id| (id, ProtocolSpec::new(id).unwrap())).collect();
    let mut results = Vec::new();

    let norm = runner(300, 1).run(&protocol_and_payload(), |(id, p)| {
        for s in specs[&id].trace_walks(&p).unwrap() {
            prop_assert!((s.norm_sqr() - 1.0).abs() < NORM_TOL);
        }
        Ok(())
    });
    results.push(("norm preservation", 300, norm.map_err(|e| e.to_string())));

    let linear_input = protocol_and_payload()
        .prop_flat_map(|(id, p)| (Just(id), Just(p), payload_strategy(1 << id.qubits_per_party())))
        .prop_flat_map(|(id, p, q)| {
            (Just(id), Just(p), Just(q), (-1.0f64..1.0, -1.0f64..1.0), (-1.0f64..1.0, -1.0f64..1.0))
        });
    let linear = runner(300, 2).run(&linear_input, |(id, p, q, (ar, ai), (br, bi))| {
        let spec = &specs[&id];
        let (alpha, beta) = (Complex64::new(ar, ai), Complex64::new(br, bi));
        let sp = spec.build_initial(&p).unwrap();
        let sq = spec.build_initial(&q).unwrap();
        let mixed = walk(spec, &sp.scale(alpha).add(&sq.scale(beta)).unwrap());
        let separate = walk(spec, &sp).scale(alpha).add(&walk(spec, &sq).scale(beta)).unwrap();
        prop_assert!(mixed.max_abs_diff(&separate) < NORM_TOL);
        Ok(())
    });
    results.push(("linearity", 300, linear.map_err(|e| e.to_string())));

    let complete = runner(250, 3).run(&protocol_and_payload(), |(id, p)| {
        let spec = &specs[&id];
        let s = spec.run_walks(&p).unwrap();
        let mut total = 0.0;
        for family in &spec.plan.positions {
            let idx: Vec<usize> = family.targets.iter().map(|t| s.layout().index_of(t).unwrap()).collect();
            let on_members: f64 = s
                .iter()
                .filter(|(l, _)| {
                    family.members.iter().any(|m| idx.iter().zip(m.values()).all(|(&i, v)| l.values()[i] == *v))
                })
                .map(|(_, a)| a.norm_sqr())
                .sum();
            let projected: f64 = family.projectors.iter().map(|pr| project(&s, pr).unwrap().probability).sum();
            prop_assert!((projected - on_members).abs() < NORM_TOL);
            total += projected;
        }
        prop_assert!((total - 1.0).abs() < NORM_TOL);
        Ok(())
    });
    results.push(("projector-family completeness", 250, complete.map_err(|e| e.to_string())));

    let report_input = (prop::sample::select(vec!["line1q", "cycle1q"]), any::<u64>(), 1usize..4);
    let determinism = runner(200, 4).run(&report_input, |(id, seed, count)| {
        let (seed, count) = (seed.to_string(), count.to_string());
        let argv = ["run", id, "--seed", seed.as_str(), "--count", count.as_str()];
        prop_assert_eq!(run_report_json(&argv), run_report_json(&argv));
        Ok(())
    });
    results.push(("report determinism", 200, determinism.map_err(|e| e.to_string())));

    let total: u32 = results.iter().map(|r| r.1).sum();
    let passed = total >= 1000 && results.iter().all(|r| r.2.is_ok());
    let detail = results
        .iter()
        .map(|(name, n, r)| format!("{name} {n} {}", if r.is_ok() { "ok" } else { "FAILED" }))
        .collect::<Vec<_>>()
        .join(", ");
    let failures: Vec<String> = results.iter().filter_map(|r| r.2.as_ref().err().cloned()).collect();
    Outcome::new(
        passed,
        format!(
            "{total} seeded cases: {detail}{}",
            if failures.is_empty() { String::new() } else { format!("; {failures:?}") }
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 8] = [
        ("line protocol branches", criterion_line),
        ("line walk expansions", criterion_line_expansions),
        ("4-cycle protocol", criterion_cycle),
        ("two-qubit single-step", || criterion_two_qubit(ProtocolId::Single2Q, "0000")),
        ("two-qubit two-step", || criterion_two_qubit(ProtocolId::TwoStep2Q, "00")),
        ("single-step / two-step equivalence", criterion_equivalence),
        ("dense oracle agreement", criterion_oracle),
        ("property suite", criterion_properties),
    ];
    let mut failed = Vec::new();
    for (n, (name, check)) in criteria.iter().enumerate() {
        let outcome = check();
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        // Written past the harness capture so the lines always reach the log.
        let mut out = std::io::stdout().lock();
        writeln!(out, "criterion {}: {verdict} {name}: {}", n + 1, outcome.detail).unwrap();
        out.flush().unwrap();
        if !outcome.passed {
            failed.push(n + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
