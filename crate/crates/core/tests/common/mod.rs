//! Shared fixtures for the integration tests.

#![allow(dead_code)]

use clap::Parser;
use walkport::cli::{cmd_run, Cli, Command};
use walkport::{BasisLabel, InputPayload, SparseState};

/// `(alice index, bob index, ket)`: the term `a_i b_j |ket>`.
pub type Term = (usize, usize, &'static str);

pub const LINE_W1: [Term; 4] = [(0, 0, "100000"), (0, 1, "100010"), (1, 0, "-101000"), (1, 1, "-101010")];

pub const LINE_W2: [Term; 4] = [(0, 0, "110000"), (0, 1, "1-10010"), (1, 0, "-111000"), (1, 1, "-1-11010")];

pub const LINE_W3: [Term; 8] = [
    (0, 0, "120000"),
    (0, 0, "100100"),
    (0, 1, "100010"),
    (0, 1, "1-20110"),
    (1, 0, "-121000"),
    (1, 0, "-101100"),
    (1, 1, "-101010"),
    (1, 1, "-1-21110"),
];

pub const LINE_W4: [Term; 16] = [
    (0, 0, "220000"),
    (0, 0, "020001"),
    (0, 0, "200100"),
    (0, 0, "000101"),
    (0, 1, "200010"),
    (0, 1, "000011"),
    (0, 1, "2-20110"),
    (0, 1, "0-20111"),
    (1, 0, "021000"),
    (1, 0, "-221001"),
    (1, 0, "001100"),
    (1, 0, "-201101"),
    (1, 1, "001010"),
    (1, 1, "-201011"),
    (1, 1, "0-21110"),
    (1, 1, "-2-21111"),
];

pub const CYCLE_W1: [Term; 16] = [
    (0, 0, "220000"),
    (0, 0, "200100"),
    (0, 0, "020001"),
    (0, 0, "000101"),
    (1, 0, "021000"),
    (1, 0, "001100"),
    (1, 0, "221001"),
    (1, 0, "201101"),
    (0, 1, "200010"),
    (0, 1, "220110"),
    (0, 1, "000011"),
    (0, 1, "020111"),
    (1, 1, "001010"),
    (1, 1, "021110"),
    (1, 1, "201011"),
    (1, 1, "221111"),
];

/// Largest coefficient error of `state` against `scale * sum a_i b_j |ket>`,
/// or `None` when the term count differs.
pub fn expansion_delta(state: &SparseState, payload: &InputPayload, scale: f64, terms: &[Term]) -> Option<f64> {
    if state.len() != terms.len() {
        return None;
    }
    let mut worst: f64 = 0.0;
    for &(i, j, ket) in terms {
        let label = BasisLabel::parse_ket(ket).expect("fixture ket parses");
        let want = payload.alice[i] * payload.bob[j] * scale;
        worst = worst.max((state.amplitude(&label) - want).norm());
    }
    Some(worst)
}

/// A generic payload with all amplitudes non-zero and complex.
pub fn generic(dim: usize) -> InputPayload {
    InputPayload::seeded_batch(11, dim, 1).remove(0)
}

/// Renders a `run` report as the CLI would, without touching stdout.
pub fn run_report_json(argv: &[&str]) -> String {
    let cli = Cli::try_parse_from(std::iter::once("walkport").chain(argv.iter().copied())).expect("arguments parse");
    let Command::Run(args) = &cli.command else { panic!("not a run command") };
    let report = cmd_run(args).expect("run succeeds");
    serde_json::to_string_pretty(&report).expect("report serializes")
}
