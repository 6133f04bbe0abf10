//! Cross-protocol checks.
//!
//! The single-step and two-step two-qubit protocols measure different position
//! registers, so their outcomes are related through a [`BasisMapping`] that
//! pairs each `P<i>` family with `Q<i>`. The cycle protocol is compared with
//! the line protocol by reducing line positions modulo 4.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{BasisLabel, SparseState};
use crate::measure::{
    canonical_pauli, enumerate_branches_with, pauli_string, project, BranchResult, CorrectionEntry, CorrectionTable,
    PauliFactor, ProjectorFamily, Synthesizer,
};
use crate::protocols::{
    p_family_members, p_family_name, q_family_members, q_family_name, InputPayload, ProtocolId, ProtocolSpec,
};

/// Coin renaming from the single-step protocol to the two-step one.
pub const TWO_QUBIT_COIN_RENAMING: [(&str, &str); 8] =
    [("A3", "A2"), ("A4", "A3"), ("A5", "A4"), ("A6", "A5"), ("B3", "B2"), ("B4", "B3"), ("B5", "B4"), ("B6", "B5")];

fn rename_coin(reg: &str) -> String {
    TWO_QUBIT_COIN_RENAMING
        .iter()
        .find(|(a, _)| *a == reg)
        .map(|(_, b)| b.to_string())
        .unwrap_or_else(|| reg.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyPair {
    pub source: String,
    pub target: String,
    /// Member bijection, source label to target label.
    pub members: Vec<(BasisLabel, BasisLabel)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisMapping {
    pub pairs: Vec<FamilyPair>,
}

impl BasisMapping {
    /// Pairs the members of each source/target family by rank after sorting
    /// both lists by label.
    pub fn by_rank(families: &[(String, Vec<BasisLabel>, String, Vec<BasisLabel>)]) -> Result<Self> {
        let mut pairs = Vec::with_capacity(families.len());
        for (src, sm, dst, dm) in families {
            if sm.len() != dm.len() {
                return Err(Error::MappingIncomplete(format!(
                    "{src} has {} members but {dst} has {}",
                    sm.len(),
                    dm.len()
                )));
            }
            let mut a = sm.clone();
            let mut b = dm.clone();
            a.sort();
            b.sort();
            a.dedup();
            b.dedup();
            if a.len() != sm.len() || b.len() != dm.len() {
                return Err(Error::MappingIncomplete(format!("{src} or {dst} repeats a member")));
            }
            pairs.push(FamilyPair {
                source: src.clone(),
                target: dst.clone(),
                members: a.into_iter().zip(b).collect(),
            });
        }
        let m = Self { pairs };
        m.check_total()?;
        Ok(m)
    }

    /// `P<i>` to `Q<i>` for every mask, `|0000>` to `|00>` included.
    pub fn two_qubit() -> Result<Self> {
        let fams: Vec<_> =
            (0..16).map(|m| (p_family_name(m), p_family_members(m), q_family_name(m), q_family_members(m))).collect();
        Self::by_rank(&fams)
    }

    fn check_total(&self) -> Result<()> {
        let mut seen_src = std::collections::BTreeSet::new();
        let mut seen_dst = std::collections::BTreeSet::new();
        for p in &self.pairs {
            for (s, d) in &p.members {
                if !seen_src.insert(s.clone()) || !seen_dst.insert(d.clone()) {
                    return Err(Error::MappingIncomplete(format!("{s} or {d} appears in two families")));
                }
            }
        }
        Ok(())
    }

    pub fn target_family(&self, source: &str) -> Option<&str> {
        self.pairs.iter().find(|p| p.source == source).map(|p| p.target.as_str())
    }

    pub fn map_label(&self, label: &BasisLabel) -> Option<&BasisLabel> {
        self.pairs.iter().flat_map(|p| &p.members).find(|(s, _)| s == label).map(|(_, d)| d)
    }

    /// Maps a projector name `family[/signs]` onto the target family.
    pub fn map_outcome(&self, name: &str) -> Option<String> {
        let (fam, rest) = match name.split_once('/') {
            Some((f, r)) => (f, Some(r)),
            None => (name, None),
        };
        let target = self.target_family(fam)?;
        Some(match rest {
            Some(r) => format!("{target}/{r}"),
            None => target.to_string(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TableMismatch {
    pub position: String,
    pub coin: String,
    pub source: String,
    pub target: String,
    /// Whether both strings still restore the inputs on every checked payload.
    pub acts_identically: bool,
}

/// How the two-step position families are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QReading {
    /// Sign-pattern superpositions over each family's members.
    Superposition,
    /// Each member ket measured on its own.
    Computational,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReadingSummary {
    pub reading: QReading,
    pub outcomes: usize,
    /// Outcomes for which no Pauli string restores both inputs.
    pub outcomes_without_pauli_correction: usize,
    pub reproduces_tables: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub claim: String,
    pub payload_seed: Option<u64>,
    pub payloads: usize,
    pub branches_compared: usize,
    pub max_probability_delta: f64,
    pub max_state_delta: f64,
    pub max_family_mass_delta: f64,
    pub table_mismatches: Vec<TableMismatch>,
    pub readings: Vec<ReadingSummary>,
    pub notes: Vec<String>,
    pub tolerance: f64,
    pub passed: bool,
}

fn branch_map(b: &[BranchResult]) -> BTreeMap<(String, String), &BranchResult> {
    b.iter().map(|x| ((x.position.clone(), x.coin.clone()), x)).collect()
}

fn family_of(name: &str) -> &str {
    name.split('/').next().unwrap_or(name)
}

/// Pre-measurement single-step state relabelled into the two-step layout:
/// positions through the member bijection of `mapping`, coins renamed.
pub fn single_to_twostep_state(
    single: &SparseState,
    twostep: &ProtocolSpec,
    mapping: &BasisMapping,
) -> Result<SparseState> {
    let src = single.layout();
    let pos: Vec<usize> = ["A1", "A2", "B1", "B2"].iter().map(|n| src.index_of(n)).collect::<Result<_>>()?;
    let coins: Vec<usize> = twostep
        .layout
        .names()
        .skip(twostep.position_registers.len())
        .map(|n| {
            let back = TWO_QUBIT_COIN_RENAMING.iter().find(|(_, b)| *b == n).map(|(a, _)| *a).unwrap_or(n);
            src.index_of(back)
        })
        .collect::<Result<_>>()?;
    let position_of = |l: &BasisLabel| BasisLabel(pos.iter().map(|&i| l.0[i]).collect());
    let mut table = BTreeMap::new();
    for (l, _) in single.iter() {
        let p = position_of(l);
        let mapped =
            mapping.map_label(&p).ok_or_else(|| Error::MappingIncomplete(format!("position {p} is in no family")))?;
        table.insert(p, mapped.clone());
    }
    single.relabel(twostep.layout.clone(), |l| {
        let mut out = table[&position_of(l)].0.clone();
        out.extend(coins.iter().map(|&c| l.0[c]));
        BasisLabel(out)
    })
}

fn rename_factors(f: &[PauliFactor]) -> Vec<PauliFactor> {
    f.iter().map(|x| PauliFactor::new(rename_coin(&x.reg), x.op)).collect()
}

/// Compares the two two-qubit protocols branch by branch under the mapping.
pub fn check_two_qubit_equivalence(
    payloads: &[InputPayload],
    mapping: &BasisMapping,
    tol: f64,
) -> Result<EquivalenceReport> {
    let single = ProtocolSpec::new(ProtocolId::Single2Q)?;
    let two = ProtocolSpec::new(ProtocolId::TwoStep2Q)?;
    check_two_qubit_equivalence_with(payloads, mapping, tol, single.corrections()?, two.corrections()?)
}

/// [`check_two_qubit_equivalence`] with explicit correction tables for the
/// single-step and two-step protocols.
pub fn check_two_qubit_equivalence_with(
    payloads: &[InputPayload],
    mapping: &BasisMapping,
    tol: f64,
    single_table: &CorrectionTable,
    two_table: &CorrectionTable,
) -> Result<EquivalenceReport> {
    for m in 0..16 {
        if mapping.target_family(&p_family_name(m)).is_none() {
            return Err(Error::MappingIncomplete(format!("no target for {}", p_family_name(m))));
        }
    }
    let single = ProtocolSpec::new(ProtocolId::Single2Q)?;
    let two = ProtocolSpec::new(ProtocolId::TwoStep2Q)?;
    let mut branches_compared = 0;
    let mut max_p = 0.0f64;
    let mut max_s = 0.0f64;
    let mut max_mass = 0.0f64;
    let mut notes = Vec::new();
    for p in payloads {
        let mapped = single_to_twostep_state(&single.run_walks(p)?, &two, mapping)?;
        let pre_delta = mapped.max_abs_diff(&two.run_walks(p)?);
        max_s = max_s.max(pre_delta);

        let sb = enumerate_branches_with(&single, p, single_table)?;
        let tb = enumerate_branches_with(&two, p, two_table)?;
        let tmap = branch_map(&tb);
        let mut mass: BTreeMap<String, (f64, f64)> = BTreeMap::new();
        for b in &sb {
            let target_pos = mapping
                .map_outcome(&b.position)
                .ok_or_else(|| Error::MappingIncomplete(format!("no target for outcome {}", b.position)))?;
            let t = tmap
                .get(&(target_pos.clone(), b.coin.clone()))
                .ok_or_else(|| Error::MappingIncomplete(format!("two-step plan lacks ({target_pos}, {})", b.coin)))?;
            branches_compared += 1;
            max_p = max_p.max((b.probability - t.probability).abs());
            let e = mass.entry(family_of(&target_pos).to_string()).or_default();
            e.0 += b.probability;
            e.1 += t.probability;
            if b.vacuous != t.vacuous {
                max_s = max_s.max(1.0);
                continue;
            }
            if !b.vacuous {
                let renamed = b.corrected.relabel(t.corrected.layout_arc().clone(), |l| l.clone())?;
                max_s = max_s.max(renamed.max_abs_diff_up_to_phase(&t.corrected));
            }
        }
        for (a, b) in mass.values() {
            max_mass = max_mass.max((a - b).abs());
        }
    }

    let table_mismatches = compare_two_qubit_tables(&two, mapping, payloads, single_table, two_table)?;
    let readings = vec![
        ReadingSummary {
            reading: QReading::Superposition,
            outcomes: two.plan.branch_count(),
            outcomes_without_pauli_correction: 0,
            reproduces_tables: table_mismatches.is_empty(),
        },
        computational_reading_summary(&two)?,
    ];
    if let Some(r) = readings.iter().find(|r| r.reading == QReading::Computational) {
        notes.push(format!(
            "measuring the Q families member by member leaves {} of {} outcomes without any Pauli correction",
            r.outcomes_without_pauli_correction, r.outcomes
        ));
    }
    let passed = max_p <= tol && max_s <= tol && max_mass <= tol && table_mismatches.is_empty();
    Ok(EquivalenceReport {
        claim: "single-step and two-step two-qubit protocols agree under the P_i <-> Q_i mapping".into(),
        payload_seed: None,
        payloads: payloads.len(),
        branches_compared,
        max_probability_delta: max_p,
        max_state_delta: max_s,
        max_family_mass_delta: max_mass,
        table_mismatches,
        readings,
        notes,
        tolerance: tol,
        passed,
    })
}

fn compare_two_qubit_tables(
    two: &ProtocolSpec,
    mapping: &BasisMapping,
    payloads: &[InputPayload],
    st: &CorrectionTable,
    tt: &CorrectionTable,
) -> Result<Vec<TableMismatch>> {
    let mut out = Vec::new();
    let mut seen = 0usize;
    for row in &st.rows {
        let pos = mapping.map_outcome(&row.position).expect("mapping covers every family");
        seen += 1;
        let renamed = rename_factors(&row.pauli);
        let (target, acts) = match tt.lookup(&pos, &row.coin) {
            Some(t) if canonical_pauli(&t.pauli) == canonical_pauli(&renamed) => continue,
            Some(t) => (
                pauli_string(&t.pauli),
                row_restores(two, &pos, &row.coin, &renamed, payloads)?
                    && row_restores(two, &pos, &row.coin, &t.pauli, payloads)?,
            ),
            None => ("(missing)".to_string(), false),
        };
        out.push(TableMismatch {
            position: row.position.clone(),
            coin: row.coin.clone(),
            source: pauli_string(&row.pauli),
            target,
            acts_identically: acts,
        });
    }
    if seen != tt.len() {
        out.push(TableMismatch {
            position: "*".into(),
            coin: "*".into(),
            source: format!("{seen} rows"),
            target: format!("{} rows", tt.len()),
            acts_identically: false,
        });
    }
    Ok(out)
}

/// Whether `pauli` restores both inputs on the two-step branch `(pos, coin)`.
fn row_restores(
    spec: &ProtocolSpec,
    pos: &str,
    coin: &str,
    pauli: &[PauliFactor],
    payloads: &[InputPayload],
) -> Result<bool> {
    let t = CorrectionTable::new(
        spec.id.as_str(),
        vec![CorrectionEntry { position: pos.into(), coin: coin.into(), pauli: pauli.to_vec() }],
    );
    let fam = spec.plan.family(family_of(pos)).expect("outcome belongs to the plan");
    let pp = fam.projector(pos).expect("outcome belongs to its family");
    let cp = spec.plan.coins.projector(coin).expect("coin outcome exists");
    for p in payloads {
        let pre = spec.run_walks(p)?;
        let pr = project(&pre, pp)?;
        if pr.vacuous {
            continue;
        }
        let c = project(&pr.residual, cp)?;
        if c.vacuous {
            continue;
        }
        let corrected = crate::measure::apply_pauli(&c.residual, &t.rows[0].pauli)?;
        let expected = crate::measure::expected_output(spec, p, corrected.layout_arc().clone())?;
        if expected.inner_product(&corrected)?.norm_sqr() < 1.0 - 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn computational_reading_summary(two: &ProtocolSpec) -> Result<ReadingSummary> {
    let syn = Synthesizer::new(two)?;
    let mut outcomes = 0;
    let mut failing = 0;
    for fam in &two.plan.positions {
        let comp = ProjectorFamily::computational(fam.name.clone(), fam.targets.clone(), fam.members.clone())?;
        for pp in &comp.projectors {
            for cp in &two.plan.coins.projectors {
                outcomes += 1;
                match syn.outcome(pp, cp) {
                    Ok(_) => {}
                    Err(Error::NoPauliCorrection { .. }) => failing += 1,
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(ReadingSummary {
        reading: QReading::Computational,
        outcomes,
        outcomes_without_pauli_correction: failing,
        reproduces_tables: failing == 0,
    })
}

/// Line label reduced modulo 4 on both position registers.
fn reduce_mod4(l: &BasisLabel) -> BasisLabel {
    let mut v = l.0.clone();
    v[0] = v[0].rem_euclid(4);
    v[1] = v[1].rem_euclid(4);
    BasisLabel(v)
}

/// Line outcome each cycle outcome is compared with.
pub const CYCLE_LINE_OUTCOMES: [(&str, &str); 4] = [("00", "00"), ("02", "02/++"), ("20", "20/++"), ("22", "22/++++")];

/// Compares the cycle protocol with the line protocol reduced modulo 4.
pub fn check_cycle_line_equivalence(payloads: &[InputPayload], tol: f64) -> Result<EquivalenceReport> {
    let line = ProtocolSpec::new(ProtocolId::Line1Q)?;
    let cycle = ProtocolSpec::new(ProtocolId::Cycle1Q)?;
    check_cycle_line_equivalence_with(payloads, tol, line.corrections()?, cycle.corrections()?)
}

/// [`check_cycle_line_equivalence`] with explicit line and cycle tables.
pub fn check_cycle_line_equivalence_with(
    payloads: &[InputPayload],
    tol: f64,
    line_table: &CorrectionTable,
    cycle_table: &CorrectionTable,
) -> Result<EquivalenceReport> {
    let line = ProtocolSpec::new(ProtocolId::Line1Q)?;
    let cycle = ProtocolSpec::new(ProtocolId::Cycle1Q)?;
    let mut max_s = 0.0f64;
    let mut max_p = 0.0f64;
    let mut max_mass = 0.0f64;
    let mut compared = 0;
    for p in payloads {
        let reduced = line.run_walks(p)?.relabel(cycle.layout.clone(), reduce_mod4)?;
        max_s = max_s.max(reduced.max_abs_diff(&cycle.run_walks(p)?));

        let lb = enumerate_branches_with(&line, p, line_table)?;
        let cb = enumerate_branches_with(&cycle, p, cycle_table)?;
        let lmap = branch_map(&lb);
        for c in &cb {
            let lpos = CYCLE_LINE_OUTCOMES.iter().find(|(cy, _)| *cy == c.position).map(|(_, l)| *l).expect("known");
            let l = lmap[&(lpos.to_string(), c.coin.clone())];
            compared += 1;
            max_s = max_s.max(l.corrected.max_abs_diff_up_to_phase(&c.corrected));
            // The cycle outcome collects the whole line family's mass.
            let family_mass: f64 = lb
                .iter()
                .filter(|b| family_of(&b.position) == c.position && b.coin == c.coin)
                .map(|b| b.probability)
                .sum();
            max_mass = max_mass.max((family_mass - c.probability).abs());
            max_p = max_p.max(((c.probability) - 1.0 / 16.0).abs());
        }
    }

    let mut table_mismatches = Vec::new();
    let lt = line_table;
    for row in &cycle_table.rows {
        let lpos = CYCLE_LINE_OUTCOMES.iter().find(|(cy, _)| *cy == row.position).map(|(_, l)| *l).expect("known");
        let l = lt.lookup(lpos, &row.coin);
        if l.map(|l| canonical_pauli(&l.pauli)) != Some(canonical_pauli(&row.pauli)) {
            table_mismatches.push(TableMismatch {
                position: row.position.clone(),
                coin: row.coin.clone(),
                source: pauli_string(&row.pauli),
                target: l.map(|l| pauli_string(&l.pauli)).unwrap_or_else(|| "(missing)".into()),
                acts_identically: false,
            });
        }
    }

    let mut notes = vec![cycle_origin_note(&cycle)?];
    notes.push(
        "teleported outputs land on A3 and B3, where the correction table acts; the reference text labels them A2 and B2"
            .into(),
    );
    let passed = max_s <= tol && max_mass <= tol && max_p <= tol && table_mismatches.is_empty();
    Ok(EquivalenceReport {
        claim: "cycle protocol equals the line protocol with positions reduced modulo 4".into(),
        payload_seed: None,
        payloads: payloads.len(),
        branches_compared: compared,
        max_probability_delta: max_p,
        max_state_delta: max_s,
        max_family_mass_delta: max_mass,
        table_mismatches,
        readings: Vec::new(),
        notes,
        tolerance: tol,
        passed,
    })
}

/// Which coin ket carries `a1 b1` after projecting the cycle state on `|00>`.
fn cycle_origin_note(cycle: &ProtocolSpec) -> Result<String> {
    let p = InputPayload::real(&[0.0, 1.0], &[0.0, 1.0])?;
    let pre = cycle.run_walks(&p)?;
    let origin = cycle.plan.family("00").expect("origin family").projectors[0].clone();
    let r = project(&pre, &origin)?;
    let kets: Vec<String> = r.residual.iter().map(|(l, _)| l.to_string()).collect();
    Ok(format!(
        "after projecting on position |00>, the a1 b1 term of the coin state is {}; the reference expansion lists |1111>",
        kets.join(" + ")
    ))
}
