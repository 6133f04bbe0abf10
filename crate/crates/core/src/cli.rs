//! Batch command-line interface.
//!
//! Every command writes a deterministic report (`"schema": 1`) to stdout or
//! `--out` and maps its outcome to an exit status: 0 when every check passes,
//! 1 when a verification fails, 2 on configuration errors.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::equivalence::{
    check_cycle_line_equivalence_with, check_two_qubit_equivalence_with, BasisMapping, EquivalenceReport,
};
use crate::error::{Error, Result};
use crate::hilbert::{DEFAULT_LATTICE_BOUND, NORM_TOL};
use crate::measure::{
    compare_tables, enumerate_branches_with, pauli_string, CorrectionTable, RowComparison, RowStatus, Synthesizer,
};
use crate::oracle::{oracle_check, OracleReport};
use crate::protocols::{InputPayload, ProtocolId, ProtocolSpec};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFICATION: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

/// Fidelity every non-vacuous corrected branch has to reach.
pub const FIDELITY_TOL: f64 = 1e-9;
/// Allowed deviation of a payload's total branch probability from 1.
pub const PROBABILITY_SUM_TOL: f64 = 1e-9;
/// Explicit payloads further than this from unit norm are rejected.
pub const EXPLICIT_NORM_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "walkport", version, about = "Simulate and verify bidirectional quantum-walk teleportation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate and verify every measurement branch of a protocol.
    Run(RunArgs),
    /// Check a cross-protocol equivalence claim.
    Equiv(EquivArgs),
    /// Synthesize correction tables and compare them with the bundled and published ones.
    Tables(TablesArgs),
    /// Compare the sparse engine with dense matrices.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct PayloadArgs {
    /// Seed for random payloads.
    #[arg(long, env = "WALKPORT_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Number of random payloads.
    #[arg(long)]
    pub count: Option<usize>,
    /// Alice's state, comma-separated amplitudes written `re` or `re:im`.
    #[arg(long, requires = "bob", allow_hyphen_values = true)]
    pub alice: Option<String>,
    /// Bob's state, same format as `--alice`.
    #[arg(long, requires = "alice", allow_hyphen_values = true)]
    pub bob: Option<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Protocol id: line1q, cycle1q, single2q or twostep2q.
    #[arg(value_name = "PROTOCOL", required_unless_present = "protocol_flag")]
    pub protocol: Option<String>,
    #[arg(long = "protocol", conflicts_with = "protocol")]
    pub protocol_flag: Option<String>,
    #[command(flatten)]
    pub payload: PayloadArgs,
    /// Half-width of the lattice position registers.
    #[arg(long, default_value_t = DEFAULT_LATTICE_BOUND)]
    pub bound: i32,
    /// Fidelity tolerance.
    #[arg(long, default_value_t = FIDELITY_TOL)]
    pub tol: f64,
    /// Replace the corrections of this position family with the identity.
    #[arg(long)]
    pub corrupt_table: Option<String>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Claim {
    TwoQubit,
    CycleLine,
}

#[derive(Debug, Args)]
pub struct EquivArgs {
    #[arg(value_enum)]
    pub claim: Claim,
    #[command(flatten)]
    pub payload: PayloadArgs,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Replace the corrections of this position family with the identity
    /// (`P*`/`0000` single-step, `Q*`/`00` two-step, or a cycle family).
    #[arg(long)]
    pub corrupt_table: Option<String>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    #[arg(value_name = "PROTOCOL", required_unless_present = "protocol_flag")]
    pub protocol: Option<String>,
    #[arg(long = "protocol", conflicts_with = "protocol")]
    pub protocol_flag: Option<String>,
    /// Position families to synthesize: comma-separated names or a range such as `P1..P15`.
    #[arg(long)]
    pub families: Option<String>,
    /// Directory for synthesized table files, one per family when `--families` is given.
    #[arg(long)]
    pub emit_dir: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Protocol id, or `all`.
    #[arg(value_name = "PROTOCOL", default_value = "all")]
    pub protocol: String,
    #[arg(long, env = "WALKPORT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 25)]
    pub count: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

/// Nearest `n / 2^k` (k <= 20) within `1e-9`, written reduced.
pub fn dyadic(p: f64) -> Option<String> {
    if p == 0.0 {
        return Some("0".into());
    }
    for k in 0..=20u32 {
        let scaled = p * f64::from(1u32 << k);
        let n = scaled.round();
        if (scaled - n).abs() / f64::from(1u32 << k) <= 1e-9 {
            return Some(if k == 0 { format!("{n}") } else { format!("{n}/{}", 1u32 << k) });
        }
    }
    None
}

fn parse_amplitudes(s: &str) -> Result<Vec<Complex64>> {
    s.split(',')
        .map(|tok| {
            let tok = tok.trim();
            let (re, im) = match tok.split_once(':') {
                Some((r, i)) => (r, i),
                None => (tok, "0"),
            };
            let p = |x: &str| x.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad amplitude `{tok}`")));
            Ok(Complex64::new(p(re)?, p(im)?))
        })
        .collect()
}

/// Explicit vectors within [`EXPLICIT_NORM_TOL`] of unit norm are renormalized,
/// with a warning when the deviation exceeds [`NORM_TOL`].
fn normalize_explicit(v: Vec<Complex64>, who: &str, warnings: &mut Vec<String>) -> Result<Vec<Complex64>> {
    let n: f64 = v.iter().map(|a| a.norm_sqr()).sum();
    if !n.is_finite() || (n - 1.0).abs() > EXPLICIT_NORM_TOL {
        return Err(Error::NotNormalized { norm_sqr: n });
    }
    if (n - 1.0).abs() > NORM_TOL {
        warnings.push(format!("{who} state had norm^2 {n}; renormalized"));
    }
    let s = n.sqrt();
    Ok(v.into_iter().map(|a| a / s).collect())
}

fn payloads(
    args: &PayloadArgs,
    dim: usize,
    default_count: usize,
    warnings: &mut Vec<String>,
) -> Result<(Option<u64>, Vec<InputPayload>)> {
    match (&args.alice, &args.bob) {
        (Some(a), Some(b)) => {
            if args.count.is_some() {
                return Err(Error::Config("--count cannot be combined with --alice/--bob".into()));
            }
            let a = parse_amplitudes(a)?;
            let b = parse_amplitudes(b)?;
            for v in [&a, &b] {
                if v.len() != dim {
                    return Err(Error::ShapeMismatch { expected: dim, got: v.len() });
                }
            }
            let a = normalize_explicit(a, "alice", warnings)?;
            let b = normalize_explicit(b, "bob", warnings)?;
            Ok((None, vec![InputPayload::new(a, b)?]))
        }
        _ => {
            let count = args.count.unwrap_or(default_count);
            if count == 0 {
                return Err(Error::Config("--count must be at least 1".into()));
            }
            Ok((Some(args.seed), InputPayload::seeded_batch(args.seed, dim, count)))
        }
    }
}

fn protocol_arg(positional: &Option<String>, flag: &Option<String>) -> Result<ProtocolId> {
    positional.as_ref().or(flag.as_ref()).ok_or_else(|| Error::Config("missing protocol".into()))?.parse()
}

fn pair(c: &Complex64) -> [f64; 2] {
    [c.re, c.im]
}

#[derive(Debug, Serialize)]
pub struct BranchRow {
    pub position: String,
    pub coin: String,
    pub probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probability_dyadic: Option<String>,
    pub vacuous: bool,
    pub correction: String,
    pub fidelity: f64,
}

#[derive(Debug, Serialize)]
pub struct PayloadResult {
    pub index: usize,
    pub alice: Vec<[f64; 2]>,
    pub bob: Vec<[f64; 2]>,
    pub probability_total: f64,
    pub min_fidelity: f64,
    pub passed: bool,
    pub branches: Vec<BranchRow>,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: &'static str,
    pub protocol: ProtocolId,
    pub seed: Option<u64>,
    pub bound: i32,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrupted_family: Option<String>,
    pub warnings: Vec<String>,
    pub passed: bool,
    pub payloads: Vec<PayloadResult>,
}

pub fn cmd_run(args: &RunArgs) -> Result<RunReport> {
    let id = protocol_arg(&args.protocol, &args.protocol_flag)?;
    let spec = ProtocolSpec::build(id, args.bound)?;
    let mut warnings = Vec::new();
    let (seed, payloads) = payloads(&args.payload, spec.payload_dim(), 1, &mut warnings)?;
    let table = match &args.corrupt_table {
        Some(f) => corrupt(spec.corrections()?, f)?,
        None => spec.corrections()?.clone(),
    };
    let mut results = Vec::with_capacity(payloads.len());
    for (index, p) in payloads.iter().enumerate() {
        let branches = enumerate_branches_with(&spec, p, &table)?;
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        let min_fidelity = branches.iter().filter(|b| !b.vacuous).map(|b| b.fidelity).fold(1.0, f64::min);
        let passed = min_fidelity >= 1.0 - args.tol && (total - 1.0).abs() <= PROBABILITY_SUM_TOL;
        results.push(PayloadResult {
            index,
            alice: p.alice.iter().map(pair).collect(),
            bob: p.bob.iter().map(pair).collect(),
            probability_total: total,
            min_fidelity,
            passed,
            branches: branches
                .iter()
                .map(|b| BranchRow {
                    position: b.position.clone(),
                    coin: b.coin.clone(),
                    probability: b.probability,
                    probability_dyadic: dyadic(b.probability),
                    vacuous: b.vacuous,
                    correction: pauli_string(&b.correction),
                    fidelity: b.fidelity,
                })
                .collect(),
        });
    }
    Ok(RunReport {
        schema: 1,
        command: "run",
        protocol: id,
        seed,
        bound: args.bound,
        tolerance: args.tol,
        corrupted_family: args.corrupt_table.clone(),
        warnings,
        passed: results.iter().all(|r| r.passed),
        payloads: results,
    })
}

fn corrupt(table: &CorrectionTable, family: &str) -> Result<CorrectionTable> {
    let prefix = format!("{family}/");
    if !table.rows.iter().any(|r| r.position == family || r.position.starts_with(&prefix)) {
        return Err(Error::Config(format!("no position family `{family}` in the {} table", table.protocol)));
    }
    Ok(table.corrupted(family))
}

#[derive(Debug, Serialize)]
pub struct EquivCommandReport {
    pub schema: u32,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrupted_family: Option<String>,
    #[serde(flatten)]
    pub report: EquivalenceReport,
}

pub fn cmd_equiv(args: &EquivArgs) -> Result<EquivCommandReport> {
    let mut warnings = Vec::new();
    let report = match args.claim {
        Claim::TwoQubit => {
            let (seed, payloads) = payloads(&args.payload, 4, 25, &mut warnings)?;
            let single = ProtocolSpec::new(ProtocolId::Single2Q)?;
            let two = ProtocolSpec::new(ProtocolId::TwoStep2Q)?;
            let mut st = single.corrections()?.clone();
            let mut tt = two.corrections()?.clone();
            if let Some(f) = &args.corrupt_table {
                if f.starts_with('P') || f == "0000" {
                    st = corrupt(&st, f)?;
                } else {
                    tt = corrupt(&tt, f)?;
                }
            }
            let mut r = check_two_qubit_equivalence_with(&payloads, &BasisMapping::two_qubit()?, args.tol, &st, &tt)?;
            r.payload_seed = seed;
            r
        }
        Claim::CycleLine => {
            let (seed, payloads) = payloads(&args.payload, 2, 25, &mut warnings)?;
            let line = ProtocolSpec::new(ProtocolId::Line1Q)?;
            let cycle = ProtocolSpec::new(ProtocolId::Cycle1Q)?;
            let mut ct = cycle.corrections()?.clone();
            if let Some(f) = &args.corrupt_table {
                ct = corrupt(&ct, f)?;
            }
            let mut r = check_cycle_line_equivalence_with(&payloads, args.tol, line.corrections()?, &ct)?;
            r.payload_seed = seed;
            r
        }
    };
    let mut report = report;
    report.notes.extend(warnings);
    Ok(EquivCommandReport { schema: 1, command: "equiv", corrupted_family: args.corrupt_table.clone(), report })
}

#[derive(Debug, Serialize)]
pub struct BundledDisagreement {
    pub position: String,
    pub coin: String,
    pub bundled: Option<String>,
    pub synthesized: String,
}

#[derive(Debug, Serialize)]
pub struct PublishedSummary {
    pub rows_compared: usize,
    pub matching: usize,
    pub equivalent: usize,
    pub discrepant: usize,
    pub missing: usize,
    /// Every row that is not an exact match.
    pub flagged: Vec<RowComparison>,
}

#[derive(Debug, Serialize)]
pub struct TablesReport {
    pub schema: u32,
    pub command: &'static str,
    pub protocol: ProtocolId,
    pub families: Vec<String>,
    pub synthesized_rows: usize,
    pub bundled_disagreements: Vec<BundledDisagreement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub published: Option<PublishedSummary>,
    pub emitted_files: Vec<String>,
    pub passed: bool,
    pub table: CorrectionTable,
}

/// Expands `P1..P15` style ranges and comma lists into family names.
pub fn parse_families(spec: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let split = |s: &str| -> Result<(String, u32)> {
                let digits = s.trim_start_matches(|c: char| !c.is_ascii_digit());
                let prefix = &s[..s.len() - digits.len()];
                let n = digits.parse().map_err(|_| Error::Config(format!("bad family range `{part}`")))?;
                Ok((prefix.to_string(), n))
            };
            let (pa, na) = split(a)?;
            let (pb, nb) = split(b)?;
            if pa != pb || na > nb {
                return Err(Error::Config(format!("bad family range `{part}`")));
            }
            out.extend((na..=nb).map(|n| format!("{pa}{n}")));
        } else {
            out.push(part.to_string());
        }
    }
    Ok(out)
}

pub fn cmd_tables(args: &TablesArgs) -> Result<TablesReport> {
    let id = protocol_arg(&args.protocol, &args.protocol_flag)?;
    let spec = ProtocolSpec::new(id)?;
    let families: Vec<String> = match &args.families {
        Some(f) => parse_families(f)?,
        None => spec.plan.positions.iter().map(|f| f.name.clone()).collect(),
    };
    let syn = Synthesizer::new(&spec)?;
    let mut per_family = Vec::with_capacity(families.len());
    for name in &families {
        let fam =
            spec.plan.family(name).ok_or_else(|| Error::Config(format!("{id} has no position family `{name}`")))?;
        per_family.push((name.clone(), syn.family(fam)?));
    }
    let table = CorrectionTable::new(id.as_str(), per_family.iter().flat_map(|(_, t)| t.rows.clone()).collect());

    let bundled = spec.corrections()?;
    let mut bundled_disagreements = Vec::new();
    for row in &table.rows {
        let b = bundled.lookup(&row.position, &row.coin);
        if b.map(|b| &b.pauli) != Some(&row.pauli) {
            bundled_disagreements.push(BundledDisagreement {
                position: row.position.clone(),
                coin: row.coin.clone(),
                bundled: b.map(|b| pauli_string(&b.pauli)),
                synthesized: pauli_string(&row.pauli),
            });
        }
    }

    let published_table = id.published_table()?;
    let covered = published_table.rows.iter().all(|r| {
        table.lookup(&r.position, &r.coin).is_some()
            || !families.iter().any(|f| r.position == *f || r.position.starts_with(&format!("{f}/")))
    });
    let published = if covered && published_table.rows.iter().any(|r| table.lookup(&r.position, &r.coin).is_some()) {
        let checks = InputPayload::seeded_batch(0x7ab1e, spec.payload_dim(), 5);
        let rows = compare_tables(&spec, &published_table, &table, &checks)?;
        let count = |s: RowStatus| rows.iter().filter(|r| r.status == s).count();
        Some(PublishedSummary {
            rows_compared: rows.len(),
            matching: count(RowStatus::Match),
            equivalent: count(RowStatus::Equivalent),
            discrepant: count(RowStatus::Discrepant),
            missing: count(RowStatus::Missing),
            flagged: rows.into_iter().filter(|r| r.status != RowStatus::Match).collect(),
        })
    } else {
        None
    };

    let mut emitted_files = Vec::new();
    if let Some(dir) = &args.emit_dir {
        std::fs::create_dir_all(dir)?;
        let files: Vec<(String, &CorrectionTable)> = if args.families.is_some() {
            per_family.iter().map(|(n, t)| (format!("{id}-{n}.json"), t)).collect()
        } else {
            vec![(format!("{id}.json"), &table)]
        };
        for (name, t) in files {
            let path = dir.join(&name);
            std::fs::write(&path, t.to_json_string())?;
            emitted_files.push(path.display().to_string());
        }
    }

    Ok(TablesReport {
        schema: 1,
        command: "tables",
        protocol: id,
        families,
        synthesized_rows: table.len(),
        passed: bundled_disagreements.is_empty(),
        bundled_disagreements,
        published,
        emitted_files,
        table,
    })
}

#[derive(Debug, Serialize)]
pub struct OracleCommandReport {
    pub schema: u32,
    pub command: &'static str,
    pub seed: u64,
    pub passed: bool,
    pub protocols: Vec<OracleReport>,
}

pub fn cmd_oracle(args: &OracleArgs) -> Result<OracleCommandReport> {
    let ids: Vec<ProtocolId> =
        if args.protocol == "all" { ProtocolId::ALL.to_vec() } else { vec![args.protocol.parse()?] };
    if args.count == 0 {
        return Err(Error::Config("--count must be at least 1".into()));
    }
    let mut protocols = Vec::new();
    for id in ids {
        let p = InputPayload::seeded_batch(args.seed, 1 << id.qubits_per_party(), args.count);
        protocols.push(oracle_check(id, &p, args.tol)?);
    }
    Ok(OracleCommandReport {
        schema: 1,
        command: "oracle-check",
        seed: args.seed,
        passed: protocols.iter().all(|r| r.passed),
        protocols,
    })
}

fn run_text(r: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "protocol {}  seed {:?}  passed {}", r.protocol, r.seed, r.passed);
    for w in &r.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    for p in &r.payloads {
        let _ = writeln!(
            s,
            "payload {}: total probability {:.12}, min fidelity {:.12}, {}",
            p.index,
            p.probability_total,
            p.min_fidelity,
            if p.passed { "ok" } else { "FAIL" }
        );
        for b in &p.branches {
            let prob = b.probability_dyadic.clone().unwrap_or_else(|| format!("{:.6e}", b.probability));
            let _ =
                writeln!(s, "  {:<16} {:<6} p={:<10} F={:.12}  {}", b.position, b.coin, prob, b.fidelity, b.correction);
        }
    }
    s
}

fn equiv_text(r: &EquivCommandReport) -> String {
    let e = &r.report;
    let mut s = String::new();
    let _ = writeln!(s, "{}", e.claim);
    let _ = writeln!(s, "payloads {}  branches compared {}", e.payloads, e.branches_compared);
    let _ = writeln!(s, "max probability delta {:e}", e.max_probability_delta);
    let _ = writeln!(s, "max state delta {:e}", e.max_state_delta);
    let _ = writeln!(s, "max family mass delta {:e}", e.max_family_mass_delta);
    for m in &e.table_mismatches {
        let _ = writeln!(
            s,
            "mismatch {} {}: {} vs {} (acts identically: {})",
            m.position, m.coin, m.source, m.target, m.acts_identically
        );
    }
    for n in &e.notes {
        let _ = writeln!(s, "note: {n}");
    }
    let _ = writeln!(s, "{}", if e.passed { "PASS" } else { "FAIL" });
    s
}

fn tables_text(r: &TablesReport) -> String {
    let mut s = String::new();
    for row in &r.table.rows {
        let _ = writeln!(s, "{:<16} {:<6} {}", row.position, row.coin, pauli_string(&row.pauli));
    }
    for d in &r.bundled_disagreements {
        let _ = writeln!(s, "bundled differs at {} {}: {:?} vs {}", d.position, d.coin, d.bundled, d.synthesized);
    }
    if let Some(p) = &r.published {
        let _ = writeln!(
            s,
            "published rows: {} compared, {} match, {} equivalent, {} discrepant, {} missing",
            p.rows_compared, p.matching, p.equivalent, p.discrepant, p.missing
        );
        for f in &p.flagged {
            let _ = writeln!(
                s,
                "  {:?} {} {}: published {} / synthesized {}",
                f.status,
                f.position,
                f.coin,
                f.reference.as_deref().unwrap_or("(none)"),
                f.synthesized
            );
        }
    }
    for f in &r.emitted_files {
        let _ = writeln!(s, "wrote {f}");
    }
    s
}

fn oracle_text(r: &OracleCommandReport) -> String {
    let mut s = String::new();
    for p in &r.protocols {
        let _ = writeln!(
            s,
            "{:<10} dim {:>7}  max state delta {:e}  max unitarity deviation {:e}  {}",
            p.protocol.as_str(),
            p.dense_dimension,
            p.max_state_delta,
            p.max_unitarity_deviation,
            if p.passed { "ok" } else { "FAIL" }
        );
    }
    s
}

fn emit<T: Serialize>(out: &Output, report: &T, text: impl FnOnce() -> String) -> Result<()> {
    let body = match out.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            s
        }
        Format::Text => text(),
    };
    match &out.out {
        Some(path) => std::fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Run(a) => {
            let r = cmd_run(a)?;
            emit(&a.output, &r, || run_text(&r))?;
            Ok(r.passed)
        }
        Command::Equiv(a) => {
            let r = cmd_equiv(a)?;
            emit(&a.output, &r, || equiv_text(&r))?;
            Ok(r.report.passed)
        }
        Command::Tables(a) => {
            let r = cmd_tables(a)?;
            emit(&a.output, &r, || tables_text(&r))?;
            Ok(r.passed)
        }
        Command::OracleCheck(a) => {
            let r = cmd_oracle(a)?;
            emit(&a.output, &r, || oracle_text(&r))?;
            Ok(r.passed)
        }
    }
}

/// Parses `args` (program name first) and runs the command; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VERIFICATION,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_strings() {
        assert_eq!(dyadic(1.0 / 16.0).unwrap(), "1/16");
        assert_eq!(dyadic(3.0 / 64.0).unwrap(), "3/64");
        assert_eq!(dyadic(1.0).unwrap(), "1");
        assert!(dyadic(1.0 / 3.0).is_none());
    }

    #[test]
    fn amplitude_parsing() {
        let v = parse_amplitudes("0.6,0:0.8").unwrap();
        assert_eq!(v, vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]);
        assert!(parse_amplitudes("x").is_err());
    }

    #[test]
    fn family_ranges() {
        assert_eq!(parse_families("P1..P3").unwrap(), ["P1", "P2", "P3"]);
        assert_eq!(parse_families("00,Q2").unwrap(), ["00", "Q2"]);
        assert!(parse_families("P3..P1").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(main_with_args(["walkport", "run", "nope"]), EXIT_CONFIG);
        assert_eq!(
            main_with_args(["walkport", "run", "cycle1q", "--alice", "1,1", "--bob", "1,0", "--out", "/dev/null"]),
            EXIT_CONFIG
        );
        assert_eq!(
            main_with_args(["walkport", "run", "cycle1q", "--alice", "1,0", "--bob", "1,0", "--out", "/dev/null"]),
            EXIT_OK
        );
        assert_eq!(
            main_with_args(["walkport", "run", "cycle1q", "--corrupt-table", "02", "--out", "/dev/null"]),
            EXIT_VERIFICATION
        );
    }
}
