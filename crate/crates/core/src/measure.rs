//! Projective measurement, branch enumeration, Pauli corrections and
//! correction-table synthesis.
//!
//! A measurement outcome is a [`ProjectorSpec`]: an explicit, normalized list
//! of amplitude-weighted partial labels over some target registers. Outcomes
//! that belong together (pairwise orthogonal) form a [`ProjectorFamily`]. A
//! protocol measures its position registers against every position family and
//! then its measured coins in the `|+>/|->` family; each joint outcome is a
//! branch, corrected by the Pauli string from a [`CorrectionTable`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{Amplitude, BasisLabel, Gate, RegisterLayout, SparseState};
use crate::protocols::{InputPayload, ProtocolSpec};

/// Branches with smaller probability are treated as exact zeros.
pub const VACUOUS_PROBABILITY: f64 = 1e-14;
/// Fidelity a synthesized correction has to reach.
pub const SYNTHESIS_FIDELITY_TOL: f64 = 1e-10;
/// Extra random payloads a synthesized correction is confirmed on.
pub const SYNTHESIS_CONFIRMATIONS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorSpec {
    pub name: String,
    pub targets: Vec<String>,
    pub terms: Vec<(BasisLabel, Amplitude)>,
}

impl ProjectorSpec {
    pub fn new(name: impl Into<String>, targets: Vec<String>, terms: Vec<(BasisLabel, Amplitude)>) -> Result<Self> {
        let p = Self { name: name.into(), targets, terms };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::MalformedProjector { name: self.name.clone(), reason };
        if self.terms.is_empty() {
            return Err(bad("no terms".into()));
        }
        for (i, (l, _)) in self.terms.iter().enumerate() {
            if l.0.len() != self.targets.len() {
                return Err(bad(format!("label {l} does not match {} targets", self.targets.len())));
            }
            if self.terms[..i].iter().any(|(o, _)| o == l) {
                return Err(bad(format!("label {l} repeated")));
            }
        }
        let norm: f64 = self.terms.iter().map(|(_, a)| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(bad(format!("norm^2 = {norm}")));
        }
        Ok(())
    }

    /// `<self|other>` over the partial labels.
    pub fn overlap(&self, other: &ProjectorSpec) -> Amplitude {
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, a) in &self.terms {
            if let Some((_, b)) = other.terms.iter().find(|(o, _)| o == l) {
                acc += a.conj() * b;
            }
        }
        acc
    }

    /// Human-readable ket expression, e.g. `(|02> - |0-2>)/√2`.
    pub fn expression(&self) -> String {
        if self.terms.len() == 1 {
            return self.terms[0].0.to_string();
        }
        let scale = self.terms[0].1.norm();
        let uniform = self.terms.iter().all(|(_, a)| (a.norm() - scale).abs() < 1e-12 && a.im.abs() < 1e-12);
        if !uniform {
            return self.terms.iter().map(|(l, a)| format!("({a}){l}")).collect::<Vec<_>>().join(" + ");
        }
        let mut s = String::from("(");
        for (i, (l, a)) in self.terms.iter().enumerate() {
            let neg = a.re < 0.0;
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            s.push_str(&l.to_string());
        }
        let n = self.terms.len();
        s.push_str(")/");
        if n == 4 || n == 16 {
            s.push_str(&((n as f64).sqrt() as usize).to_string());
        } else {
            s.push_str(&format!("√{n}"));
        }
        s
    }
}

impl fmt::Display for ProjectorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.name, self.expression())
    }
}

fn sign_string(row: usize, len: usize) -> String {
    (0..len).map(|c| if (row & c).count_ones().is_multiple_of(2) { '+' } else { '-' }).collect()
}

/// Pairwise-orthogonal outcomes over the same target registers.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorFamily {
    pub name: String,
    pub targets: Vec<String>,
    pub members: Vec<BasisLabel>,
    pub projectors: Vec<ProjectorSpec>,
}

impl ProjectorFamily {
    /// Sign-pattern superpositions over `members`: projector `r` weights member
    /// `c` by `(-1)^popcount(r & c) / sqrt(n)`. The member count must be a power
    /// of two. With a single member this is that basis state.
    pub fn walsh(name: impl Into<String>, targets: Vec<String>, members: Vec<BasisLabel>) -> Result<Self> {
        let name = name.into();
        let n = members.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::MalformedProjector { name, reason: format!("{n} members is not a power of two") });
        }
        let w = 1.0 / (n as f64).sqrt();
        let projectors = (0..n)
            .map(|row| {
                let pname = if n == 1 { name.clone() } else { format!("{name}/{}", sign_string(row, n)) };
                let terms = members
                    .iter()
                    .enumerate()
                    .map(|(c, m)| {
                        let s = if (row & c).count_ones() % 2 == 0 { w } else { -w };
                        (m.clone(), Complex64::new(s, 0.0))
                    })
                    .collect();
                ProjectorSpec::new(pname, targets.clone(), terms)
            })
            .collect::<Result<Vec<_>>>()?;
        let f = Self { name, targets, members, projectors };
        f.check_orthonormal()?;
        Ok(f)
    }

    /// One projector per member, named `<family>:<ket>`.
    pub fn computational(name: impl Into<String>, targets: Vec<String>, members: Vec<BasisLabel>) -> Result<Self> {
        let name = name.into();
        let projectors = members
            .iter()
            .map(|m| {
                let pname = if members.len() == 1 { name.clone() } else { format!("{name}:{m}") };
                ProjectorSpec::new(pname, targets.clone(), vec![(m.clone(), Complex64::new(1.0, 0.0))])
            })
            .collect::<Result<Vec<_>>>()?;
        let f = Self { name, targets, members, projectors };
        f.check_orthonormal()?;
        Ok(f)
    }

    /// Products of `|+>`/`|->` over `targets`. Outcome names list one sign per
    /// coin, with a comma after each `group` coins (`"++,+-"` for groups of two).
    pub fn plus_minus(name: impl Into<String>, targets: Vec<String>, group: usize) -> Result<Self> {
        let name = name.into();
        let k = targets.len();
        let mut members = Vec::with_capacity(1 << k);
        for bits in 0..(1usize << k) {
            members.push(BasisLabel((0..k).map(|i| ((bits >> (k - 1 - i)) & 1) as i32).collect()));
        }
        let w = 1.0 / ((1usize << k) as f64).sqrt();
        let mut projectors = Vec::with_capacity(1 << k);
        for outcome in 0..(1usize << k) {
            let mut pname = String::new();
            for i in 0..k {
                if i > 0 && group > 0 && i % group == 0 {
                    pname.push(',');
                }
                pname.push(if (outcome >> (k - 1 - i)) & 1 == 0 { '+' } else { '-' });
            }
            let terms = members
                .iter()
                .enumerate()
                .map(|(bits, m)| {
                    let s = if (outcome & bits).count_ones() % 2 == 0 { w } else { -w };
                    (m.clone(), Complex64::new(s, 0.0))
                })
                .collect();
            projectors.push(ProjectorSpec::new(pname, targets.clone(), terms)?);
        }
        let f = Self { name, targets, members, projectors };
        f.check_orthonormal()?;
        Ok(f)
    }

    pub fn check_orthonormal(&self) -> Result<()> {
        for (i, p) in self.projectors.iter().enumerate() {
            if p.targets != self.targets {
                return Err(Error::MalformedProjector {
                    name: p.name.clone(),
                    reason: format!("targets differ from family `{}`", self.name),
                });
            }
            for q in &self.projectors[..i] {
                let o = p.overlap(q).norm();
                if o > 1e-12 {
                    return Err(Error::MalformedProjector {
                        name: p.name.clone(),
                        reason: format!("overlap {o:e} with `{}`", q.name),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projector(&self, name: &str) -> Option<&ProjectorSpec> {
        self.projectors.iter().find(|p| p.name == name)
    }
}

/// Position families measured first, then the coin family on each residual.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPlan {
    pub positions: Vec<ProjectorFamily>,
    pub coins: ProjectorFamily,
}

impl MeasurementPlan {
    pub fn position_projectors(&self) -> impl Iterator<Item = (&ProjectorFamily, &ProjectorSpec)> {
        self.positions.iter().flat_map(|f| f.projectors.iter().map(move |p| (f, p)))
    }

    pub fn family(&self, name: &str) -> Option<&ProjectorFamily> {
        self.positions.iter().find(|f| f.name == name)
    }

    pub fn branch_count(&self) -> usize {
        self.positions.iter().map(|f| f.len()).sum::<usize>() * self.coins.len()
    }
}

/// Outcome of projecting a state onto one [`ProjectorSpec`].
#[derive(Debug, Clone)]
pub struct Projection {
    pub probability: f64,
    /// Post-measurement state on the unmeasured registers; normalized unless
    /// `vacuous`, in which case it is the zero state.
    pub residual: SparseState,
    pub vacuous: bool,
}

pub fn project(s: &SparseState, p: &ProjectorSpec) -> Result<Projection> {
    p.validate()?;
    let layout = s.layout();
    let target_idx = p.targets.iter().map(|t| layout.index_of(t)).collect::<Result<Vec<_>>>()?;
    let rest_idx: Vec<usize> = (0..layout.len()).filter(|i| !target_idx.contains(i)).collect();
    let rest_layout = Arc::new(layout.select(&rest_idx));

    let weights: HashMap<&[i32], Amplitude> = p.terms.iter().map(|(l, a)| (l.0.as_slice(), a.conj())).collect();
    let mut out: BTreeMap<BasisLabel, Amplitude> = BTreeMap::new();
    let mut key = vec![0i32; target_idx.len()];
    for (label, amp) in s.iter() {
        for (k, &i) in key.iter_mut().zip(&target_idx) {
            *k = label.0[i];
        }
        if let Some(w) = weights.get(key.as_slice()) {
            let rest = BasisLabel(rest_idx.iter().map(|&i| label.0[i]).collect());
            *out.entry(rest).or_default() += w * amp;
        }
    }
    let probability: f64 = out.values().map(|a| a.norm_sqr()).sum();
    let eps = s.prune_eps();
    if probability <= eps * eps {
        return Ok(Projection { probability, residual: SparseState::zero(rest_layout), vacuous: true });
    }
    let scale = 1.0 / probability.sqrt();
    for a in out.values_mut() {
        *a *= scale;
    }
    Ok(Projection { probability, residual: SparseState::from_map(rest_layout, out, eps), vacuous: false })
}

/// Single-coin Pauli, `ZX` meaning `X` first, then `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PauliOp {
    I,
    X,
    Z,
    ZX,
}

impl PauliOp {
    pub const SEARCH_ORDER: [PauliOp; 4] = [PauliOp::I, PauliOp::X, PauliOp::Z, PauliOp::ZX];

    pub fn gate(self) -> Gate {
        match self {
            PauliOp::I => Gate::identity(),
            PauliOp::X => Gate::pauli_x(),
            PauliOp::Z => Gate::pauli_z(),
            PauliOp::ZX => Gate::pauli_z().then_after(&Gate::pauli_x()),
        }
    }

    /// `(x, z)` exponents; composition adds them mod 2 up to a phase.
    fn parities(self) -> (bool, bool) {
        match self {
            PauliOp::I => (false, false),
            PauliOp::X => (true, false),
            PauliOp::Z => (false, true),
            PauliOp::ZX => (true, true),
        }
    }

    fn from_parities(x: bool, z: bool) -> PauliOp {
        match (x, z) {
            (false, false) => PauliOp::I,
            (true, false) => PauliOp::X,
            (false, true) => PauliOp::Z,
            (true, true) => PauliOp::ZX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliFactor {
    pub reg: String,
    pub op: PauliOp,
}

impl PauliFactor {
    pub fn new(reg: impl Into<String>, op: PauliOp) -> Self {
        Self { reg: reg.into(), op }
    }
}

/// Formats a factor list as `Z(A3) X(A3) X(B3)`, or `I` when empty.
pub fn pauli_string(factors: &[PauliFactor]) -> String {
    let parts: Vec<String> =
        factors.iter().filter(|f| f.op != PauliOp::I).map(|f| format!("{:?}({})", f.op, f.reg)).collect();
    if parts.is_empty() {
        "I".into()
    } else {
        parts.join(" ")
    }
}

/// Net single-coin Pauli per register, ignoring global phase; identities dropped.
pub fn canonical_pauli(factors: &[PauliFactor]) -> BTreeMap<String, PauliOp> {
    let mut acc: BTreeMap<String, (bool, bool)> = BTreeMap::new();
    for f in factors {
        let (x, z) = f.op.parities();
        let e = acc.entry(f.reg.clone()).or_default();
        e.0 ^= x;
        e.1 ^= z;
    }
    acc.into_iter().map(|(r, (x, z))| (r, PauliOp::from_parities(x, z))).filter(|(_, op)| *op != PauliOp::I).collect()
}

/// Applies factors right to left, as an operator product is read.
pub fn apply_pauli(s: &SparseState, factors: &[PauliFactor]) -> Result<SparseState> {
    let mut out = s.clone();
    for f in factors.iter().rev() {
        if f.op != PauliOp::I {
            out = out.apply_coin_gate(&f.reg, &f.op.gate())?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionEntry {
    pub position: String,
    pub coin: String,
    pub pauli: Vec<PauliFactor>,
}

/// Correction lookup by `(position outcome, coin outcome)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "RawTable", into = "RawTable")]
pub struct CorrectionTable {
    pub protocol: String,
    pub rows: Vec<CorrectionEntry>,
    index: HashMap<(String, String), usize>,
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    schema: u32,
    protocol: String,
    rows: Vec<CorrectionEntry>,
}

impl From<RawTable> for CorrectionTable {
    fn from(raw: RawTable) -> Self {
        CorrectionTable::new(raw.protocol, raw.rows)
    }
}

impl From<CorrectionTable> for RawTable {
    fn from(t: CorrectionTable) -> Self {
        RawTable { schema: 1, protocol: t.protocol, rows: t.rows }
    }
}

impl PartialEq for CorrectionTable {
    fn eq(&self, other: &Self) -> bool {
        self.protocol == other.protocol && self.rows == other.rows
    }
}

impl CorrectionTable {
    /// Later rows win when an outcome pair repeats.
    pub fn new(protocol: impl Into<String>, rows: Vec<CorrectionEntry>) -> Self {
        let index = rows.iter().enumerate().map(|(i, r)| ((r.position.clone(), r.coin.clone()), i)).collect();
        Self { protocol: protocol.into(), rows, index }
    }

    pub fn lookup(&self, position: &str, coin: &str) -> Option<&CorrectionEntry> {
        self.index.get(&(position.to_string(), coin.to_string())).map(|&i| &self.rows[i])
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("table serialization cannot fail");
        s.push('\n');
        s
    }

    /// Rows restricted to the given position outcomes, in table order.
    pub fn restricted_to(&self, positions: &[&str]) -> CorrectionTable {
        let rows = self.rows.iter().filter(|r| positions.contains(&r.position.as_str())).cloned().collect();
        CorrectionTable::new(self.protocol.clone(), rows)
    }

    /// Same table with its rows ordered by `(position, coin)`.
    pub fn sorted(&self) -> CorrectionTable {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| (&a.position, &a.coin).cmp(&(&b.position, &b.coin)));
        CorrectionTable::new(self.protocol.clone(), rows)
    }

    /// Replaces every Pauli string on rows of `position_family` (exact name
    /// or `family/...` prefix) with the identity.
    pub fn corrupted(&self, position_family: &str) -> CorrectionTable {
        let prefix = format!("{position_family}/");
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let hit = r.position == position_family || r.position.starts_with(&prefix);
                CorrectionEntry {
                    position: r.position.clone(),
                    coin: r.coin.clone(),
                    pauli: if hit { Vec::new() } else { r.pauli.clone() },
                }
            })
            .collect();
        CorrectionTable::new(self.protocol.clone(), rows)
    }
}

/// One joint measurement outcome.
#[derive(Debug, Clone)]
pub struct BranchResult {
    pub position: String,
    pub coin: String,
    /// Unconditional probability of the joint outcome.
    pub probability: f64,
    pub position_probability: f64,
    pub vacuous: bool,
    pub correction: Vec<PauliFactor>,
    /// Corrected state on the target coins (zero for vacuous branches).
    pub corrected: SparseState,
    pub fidelity: f64,
}

/// Bob's input on Alice's target coins followed by Alice's input on Bob's,
/// laid out over `layout` (which must consist of exactly the target coins).
pub fn expected_output(
    spec: &ProtocolSpec,
    payload: &InputPayload,
    layout: Arc<RegisterLayout>,
) -> Result<SparseState> {
    let a_idx = spec.alice_targets.iter().map(|r| layout.index_of(r)).collect::<Result<Vec<_>>>()?;
    let b_idx = spec.bob_targets.iter().map(|r| layout.index_of(r)).collect::<Result<Vec<_>>>()?;
    if a_idx.len() + b_idx.len() != layout.len() {
        return Err(Error::LayoutMismatch("residual holds registers other than the target coins".into()));
    }
    let k = spec.qubits_per_party();
    let mut terms = Vec::with_capacity(payload.bob.len() * payload.alice.len());
    for (j, bj) in payload.bob.iter().enumerate() {
        for (i, ai) in payload.alice.iter().enumerate() {
            let mut label = vec![0i32; layout.len()];
            for (q, &idx) in a_idx.iter().enumerate() {
                label[idx] = ((j >> (k - 1 - q)) & 1) as i32;
            }
            for (q, &idx) in b_idx.iter().enumerate() {
                label[idx] = ((i >> (k - 1 - q)) & 1) as i32;
            }
            terms.push((BasisLabel(label), bj * ai));
        }
    }
    SparseState::superpose(layout, terms)
}

/// `|<expected|corrected>|^2` with expected = Bob's input on Alice's targets
/// times Alice's input on Bob's targets. Zero for vacuous branches.
pub fn verify_branch(spec: &ProtocolSpec, branch: &BranchResult, payload: &InputPayload) -> Result<f64> {
    if branch.vacuous {
        return Ok(0.0);
    }
    let expected = expected_output(spec, payload, branch.corrected.layout_arc().clone())?;
    Ok(expected.inner_product(&branch.corrected)?.norm_sqr())
}

/// Every (position outcome, coin outcome) branch of the protocol, corrected
/// with the protocol's bundled synthesized table.
pub fn enumerate_branches(spec: &ProtocolSpec, payload: &InputPayload) -> Result<Vec<BranchResult>> {
    enumerate_branches_with(spec, payload, spec.corrections()?)
}

pub fn enumerate_branches_with(
    spec: &ProtocolSpec,
    payload: &InputPayload,
    table: &CorrectionTable,
) -> Result<Vec<BranchResult>> {
    let pre = spec.run_walks(payload)?;
    let mut out = Vec::with_capacity(spec.plan.branch_count());
    for (_, pp) in spec.plan.position_projectors() {
        let pos = project(&pre, pp)?;
        for cp in &spec.plan.coins.projectors {
            out.push(branch_from(spec, payload, table, &pos, pp, cp)?);
        }
    }
    out.sort_by(|a, b| (&a.position, &a.coin).cmp(&(&b.position, &b.coin)));
    Ok(out)
}

fn branch_from(
    spec: &ProtocolSpec,
    payload: &InputPayload,
    table: &CorrectionTable,
    pos: &Projection,
    pp: &ProjectorSpec,
    cp: &ProjectorSpec,
) -> Result<BranchResult> {
    let (coin_prob, residual, coin_vacuous) = if pos.vacuous {
        (0.0, pos.residual.clone(), true)
    } else {
        let c = project(&pos.residual, cp)?;
        (c.probability, c.residual, c.vacuous)
    };
    let probability = pos.probability * coin_prob;
    let vacuous = coin_vacuous || probability < VACUOUS_PROBABILITY;
    let mut branch = BranchResult {
        position: pp.name.clone(),
        coin: cp.name.clone(),
        probability,
        position_probability: pos.probability,
        vacuous,
        correction: Vec::new(),
        corrected: residual.clone(),
        fidelity: 0.0,
    };
    if vacuous {
        return Ok(branch);
    }
    let entry = table
        .lookup(&pp.name, &cp.name)
        .ok_or_else(|| Error::MissingCorrection { position: pp.name.clone(), coin: cp.name.clone() })?;
    branch.correction = entry.pauli.clone();
    branch.corrected = apply_pauli(&residual, &entry.pauli)?;
    branch.fidelity = verify_branch(spec, &branch, payload)?;
    Ok(branch)
}

/// Seeded generic payloads used by synthesis: one primary plus confirmations.
fn synthesis_payloads(spec: &ProtocolSpec) -> Vec<InputPayload> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_7ab1e);
    (0..=SYNTHESIS_CONFIRMATIONS).map(|_| InputPayload::random(&mut rng, spec.payload_dim())).collect()
}

/// Residual on the target coins as a dense vector indexed by the coin bits in
/// layout order (first coin most significant).
fn coin_vector(s: &SparseState) -> Vec<Amplitude> {
    let k = s.layout().len();
    let mut v = vec![Complex64::new(0.0, 0.0); 1 << k];
    for (l, a) in s.iter() {
        let idx = l.0.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        v[idx] = *a;
    }
    v
}

fn apply_ops_dense(v: &[Amplitude], ops: &[PauliOp]) -> Vec<Amplitude> {
    let k = ops.len();
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for (idx, a) in v.iter().enumerate() {
        let mut target = idx;
        let mut sign = 1.0;
        for (q, op) in ops.iter().enumerate() {
            let bit = 1usize << (k - 1 - q);
            let (x, z) = op.parities();
            if x {
                target ^= bit;
            }
            // Z after X sees the flipped bit.
            if z && target & bit != 0 {
                sign = -sign;
            }
        }
        out[target] += a * sign;
    }
    out
}

fn dense_fidelity(expected: &[Amplitude], got: &[Amplitude]) -> f64 {
    expected.iter().zip(got).map(|(e, g)| e.conj() * g).sum::<Complex64>().norm_sqr()
}

struct BranchSample {
    residual: SparseState,
    expected: SparseState,
}

/// Correction synthesis against a fixed set of seeded generic payloads: one
/// primary payload for the search plus [`SYNTHESIS_CONFIRMATIONS`] more that
/// every candidate must also pass.
pub struct Synthesizer<'a> {
    spec: &'a ProtocolSpec,
    payloads: Vec<InputPayload>,
    pres: Vec<SparseState>,
}

impl<'a> Synthesizer<'a> {
    pub fn new(spec: &'a ProtocolSpec) -> Result<Self> {
        let payloads = synthesis_payloads(spec);
        let pres = payloads.iter().map(|p| spec.run_walks(p)).collect::<Result<Vec<_>>>()?;
        Ok(Self { spec, payloads, pres })
    }

    /// First Pauli string, in `I, X, Z, ZX` order per target coin and
    /// lexicographic over coins, that restores both inputs on the branch.
    /// `Ok(None)` for a vacuous branch.
    pub fn outcome(&self, pp: &ProjectorSpec, cp: &ProjectorSpec) -> Result<Option<Vec<PauliFactor>>> {
        let mut samples = Vec::with_capacity(self.payloads.len());
        for (payload, pre) in self.payloads.iter().zip(&self.pres) {
            let pos = project(pre, pp)?;
            if pos.vacuous {
                return Ok(None);
            }
            let c = project(&pos.residual, cp)?;
            if c.vacuous || pos.probability * c.probability < VACUOUS_PROBABILITY {
                return Ok(None);
            }
            let expected = expected_output(self.spec, payload, c.residual.layout_arc().clone())?;
            samples.push(BranchSample { residual: c.residual, expected });
        }
        search_pauli(&samples).map(Some).map_err(|best| Error::NoPauliCorrection {
            position: pp.name.clone(),
            coin: cp.name.clone(),
            best,
        })
    }

    /// Rows for every (projector in `family`, coin outcome) pair; vacuous
    /// branches get no row.
    pub fn family(&self, family: &ProjectorFamily) -> Result<CorrectionTable> {
        let mut rows = Vec::new();
        for pp in &family.projectors {
            for cp in &self.spec.plan.coins.projectors {
                if let Some(pauli) = self.outcome(pp, cp)? {
                    rows.push(CorrectionEntry { position: pp.name.clone(), coin: cp.name.clone(), pauli });
                }
            }
        }
        Ok(CorrectionTable::new(self.spec.id.as_str(), rows))
    }
}

/// Synthesized corrections for one position family. See [`Synthesizer`].
pub fn generate_family_tables(spec: &ProtocolSpec, family: &ProjectorFamily) -> Result<CorrectionTable> {
    Synthesizer::new(spec)?.family(family)
}

fn search_pauli(samples: &[BranchSample]) -> std::result::Result<Vec<PauliFactor>, f64> {
    let primary = &samples[0];
    let regs: Vec<String> = primary.residual.layout().names().map(String::from).collect();
    let k = regs.len();
    let residual = coin_vector(&primary.residual);
    let expected = coin_vector(&primary.expected);
    let mut best = 0.0f64;
    let mut ops = vec![PauliOp::I; k];
    for code in 0..(1usize << (2 * k)) {
        for (q, op) in ops.iter_mut().enumerate() {
            *op = PauliOp::SEARCH_ORDER[(code >> (2 * (k - 1 - q))) & 3];
        }
        let f = dense_fidelity(&expected, &apply_ops_dense(&residual, &ops));
        best = best.max(f);
        if f < 1.0 - SYNTHESIS_FIDELITY_TOL {
            continue;
        }
        let factors: Vec<PauliFactor> = regs
            .iter()
            .zip(&ops)
            .filter(|(_, op)| **op != PauliOp::I)
            .map(|(r, op)| PauliFactor::new(r.clone(), *op))
            .collect();
        // Confirm through the sparse engine on every sample.
        let confirmed = samples.iter().all(|s| {
            apply_pauli(&s.residual, &factors)
                .and_then(|c| s.expected.inner_product(&c))
                .map(|o| o.norm_sqr() >= 1.0 - SYNTHESIS_FIDELITY_TOL)
                .unwrap_or(false)
        });
        if confirmed {
            return Ok(factors);
        }
    }
    Err(best)
}

/// Synthesized corrections for every position family of the protocol's plan.
pub fn synthesize_table(spec: &ProtocolSpec) -> Result<CorrectionTable> {
    let syn = Synthesizer::new(spec)?;
    let mut rows = Vec::new();
    for family in &spec.plan.positions {
        rows.extend(syn.family(family)?.rows);
    }
    Ok(CorrectionTable::new(spec.id.as_str(), rows))
}

/// How a printed table row relates to the synthesized correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    /// Same Pauli operator up to phase.
    Match,
    /// Different operator, but it still restores the inputs.
    Equivalent,
    /// Fails to restore the inputs.
    Discrepant,
    /// The reference table has no row for this outcome.
    Missing,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RowComparison {
    pub position: String,
    pub coin: String,
    pub reference: Option<String>,
    pub synthesized: String,
    /// Lowest fidelity of the reference correction over the checked payloads.
    pub reference_min_fidelity: Option<f64>,
    pub status: RowStatus,
}

/// Compares a reference table (e.g. a printed one) against the synthesized
/// rows for the same outcomes, validating each reference row by fidelity.
pub fn compare_tables(
    spec: &ProtocolSpec,
    reference: &CorrectionTable,
    synthesized: &CorrectionTable,
    payloads: &[InputPayload],
) -> Result<Vec<RowComparison>> {
    let positions: Vec<&str> = {
        let mut v: Vec<&str> = Vec::new();
        for r in &reference.rows {
            if !v.contains(&r.position.as_str()) {
                v.push(&r.position);
            }
        }
        v
    };
    let mut branches: Vec<Vec<BranchResult>> = Vec::with_capacity(payloads.len());
    for p in payloads {
        branches.push(enumerate_branches_with(spec, p, synthesized)?);
    }
    let mut out = Vec::new();
    for row in synthesized.rows.iter().filter(|r| positions.contains(&r.position.as_str())) {
        let reference_row = reference.lookup(&row.position, &row.coin);
        let mut min_fid = None;
        if let Some(rr) = reference_row {
            let mut worst = f64::INFINITY;
            for (payload, bs) in payloads.iter().zip(&branches) {
                let b = bs
                    .iter()
                    .find(|b| b.position == row.position && b.coin == row.coin)
                    .expect("synthesized row belongs to the plan");
                if b.vacuous {
                    continue;
                }
                let mut fixed = b.clone();
                fixed.corrected = apply_pauli(&uncorrect(b)?, &rr.pauli)?;
                worst = worst.min(verify_branch(spec, &fixed, payload)?);
            }
            if worst.is_finite() {
                min_fid = Some(worst);
            }
        }
        let status = match reference_row {
            None => RowStatus::Missing,
            Some(rr) if canonical_pauli(&rr.pauli) == canonical_pauli(&row.pauli) => RowStatus::Match,
            Some(_) if min_fid.is_some_and(|f| f >= 1.0 - 1e-9) => RowStatus::Equivalent,
            Some(_) => RowStatus::Discrepant,
        };
        out.push(RowComparison {
            position: row.position.clone(),
            coin: row.coin.clone(),
            reference: reference_row.map(|r| pauli_string(&r.pauli)),
            synthesized: pauli_string(&row.pauli),
            reference_min_fidelity: min_fid,
            status,
        });
    }
    Ok(out)
}

/// Undoes the correction recorded on a branch (Paulis are self-inverse up to phase).
fn uncorrect(b: &BranchResult) -> Result<SparseState> {
    let inverse: Vec<PauliFactor> = b.correction.iter().rev().cloned().collect();
    apply_pauli(&b.corrected, &inverse)
}
