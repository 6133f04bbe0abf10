//! The four teleportation protocols: registers, initial states, walk schedules,
//! measurement plans and correction tables.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    Amplitude, BasisLabel, Gate, RegisterLayout, RegisterSpec, SparseState, DEFAULT_LATTICE_BOUND, NORM_TOL,
};
use crate::measure::{CorrectionTable, MeasurementPlan, ProjectorFamily};
use crate::walkops::{apply_walk_step, ConditionedShift, WalkStep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolId {
    /// One qubit each way, positions on two independent lines.
    Line1Q,
    /// One qubit each way, positions on two 4-cycles.
    Cycle1Q,
    /// Two qubits each way, four position registers, one walk per party and step.
    Single2Q,
    /// Two qubits each way, two position registers moved by coin pairs.
    TwoStep2Q,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 4] =
        [ProtocolId::Line1Q, ProtocolId::Cycle1Q, ProtocolId::Single2Q, ProtocolId::TwoStep2Q];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolId::Line1Q => "line1q",
            ProtocolId::Cycle1Q => "cycle1q",
            ProtocolId::Single2Q => "single2q",
            ProtocolId::TwoStep2Q => "twostep2q",
        }
    }

    pub fn qubits_per_party(self) -> usize {
        match self {
            ProtocolId::Line1Q | ProtocolId::Cycle1Q => 1,
            ProtocolId::Single2Q | ProtocolId::TwoStep2Q => 2,
        }
    }

    fn bundled_json(self) -> &'static str {
        match self {
            ProtocolId::Line1Q => include_str!("../data/corrections/line1q.json"),
            ProtocolId::Cycle1Q => include_str!("../data/corrections/cycle1q.json"),
            ProtocolId::Single2Q => include_str!("../data/corrections/single2q.json"),
            ProtocolId::TwoStep2Q => include_str!("../data/corrections/twostep2q.json"),
        }
    }

    fn published_json(self) -> &'static str {
        match self {
            ProtocolId::Line1Q => include_str!("../data/published/table1.json"),
            ProtocolId::Cycle1Q => include_str!("../data/published/table2.json"),
            ProtocolId::Single2Q => include_str!("../data/published/table3.json"),
            ProtocolId::TwoStep2Q => include_str!("../data/published/table4.json"),
        }
    }

    /// The published correction table, transcribed literally (typos and
    /// omissions included). The two-qubit tables cover only the origin family.
    pub fn published_table(self) -> Result<CorrectionTable> {
        CorrectionTable::from_json_str(self.published_json())
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProtocolId::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| Error::UnknownProtocol(s.to_string()))
    }
}

/// Alice's and Bob's unknown states, indexed with the first coin as high bit.
#[derive(Debug, Clone, PartialEq)]
pub struct InputPayload {
    pub alice: Vec<Amplitude>,
    pub bob: Vec<Amplitude>,
}

impl InputPayload {
    pub fn new(alice: Vec<Amplitude>, bob: Vec<Amplitude>) -> Result<Self> {
        if alice.len() != bob.len() {
            return Err(Error::ShapeMismatch { expected: alice.len(), got: bob.len() });
        }
        if !alice.len().is_power_of_two() || alice.len() < 2 {
            return Err(Error::ShapeMismatch { expected: 2, got: alice.len() });
        }
        for v in [&alice, &bob] {
            let n: f64 = v.iter().map(|a| a.norm_sqr()).sum();
            if !n.is_finite() || (n - 1.0).abs() > NORM_TOL {
                return Err(Error::NotNormalized { norm_sqr: n });
            }
        }
        Ok(Self { alice, bob })
    }

    /// Real-valued convenience constructor.
    pub fn real(alice: &[f64], bob: &[f64]) -> Result<Self> {
        let c = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(c(alice), c(bob))
    }

    /// Both parties in `|0...0>`.
    pub fn basis(dim: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[0] = Complex64::new(1.0, 0.0);
        Self { alice: v.clone(), bob: v }
    }

    /// Independent normalized complex-Gaussian vectors of length `dim`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Self {
        let mut draw = || {
            let v: Vec<Amplitude> =
                (0..dim).map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))).collect();
            let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            v.into_iter().map(|a| a / n).collect::<Vec<_>>()
        };
        let alice = draw();
        let bob = draw();
        Self { alice, bob }
    }

    /// `count` payloads from a ChaCha8 stream seeded with `seed`.
    pub fn seeded_batch(seed: u64, dim: usize, count: usize) -> Vec<Self> {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| Self::random(&mut rng, dim)).collect()
    }

    pub fn dim(&self) -> usize {
        self.alice.len()
    }
}

/// A factor of the initial product state: a small state on a few registers.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialBlock {
    pub registers: Vec<String>,
    pub terms: Vec<(BasisLabel, Amplitude)>,
}

#[derive(Debug, Clone)]
pub struct ProtocolSpec {
    pub id: ProtocolId,
    pub layout: Arc<RegisterLayout>,
    pub position_registers: Vec<String>,
    pub alice_inputs: Vec<String>,
    pub bob_inputs: Vec<String>,
    pub alice_targets: Vec<String>,
    pub bob_targets: Vec<String>,
    pub measured_coins: Vec<String>,
    /// `W1..W4`.
    pub steps: [WalkStep; 4],
    pub plan: MeasurementPlan,
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn hadamards(regs: &[&str]) -> Vec<(String, Gate)> {
    regs.iter().map(|r| (r.to_string(), Gate::hadamard())).collect()
}

fn lattice_layout(order: &[&str], positions: &[&str], bound: i32) -> Result<RegisterLayout> {
    RegisterLayout::new(
        order
            .iter()
            .map(|&n| if positions.contains(&n) { RegisterSpec::lattice(n, bound) } else { RegisterSpec::coin(n) })
            .collect(),
    )
}

fn labels(v: &[&[i32]]) -> Vec<BasisLabel> {
    v.iter().map(|l| BasisLabel::new(l.to_vec())).collect()
}

/// Position members of the single-step two-qubit family `P<mask>` (mask 0 is
/// `|0000>`). Bits select the registers that sit at `±2`: bit 0 `A2`, bit 1
/// `A1`, bit 2 `B2`, bit 3 `B1`. Members are listed over `A1 A2 B1 B2` with
/// the first register varying slowest and `+2` before `-2`.
pub fn p_family_members(mask: usize) -> Vec<BasisLabel> {
    let active = [mask & 2 != 0, mask & 1 != 0, mask & 8 != 0, mask & 4 != 0];
    let mut out = vec![Vec::<i32>::new()];
    for on in active {
        let choices: &[i32] = if on { &[2, -2] } else { &[0] };
        out = out
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |&c| {
                    let mut p = prefix.clone();
                    p.push(c);
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(BasisLabel).collect()
}

fn q_values(hi: bool, lo: bool) -> &'static [i32] {
    match (hi, lo) {
        (false, false) => &[0],
        (false, true) => &[1, -1],
        (true, false) => &[3, -3],
        (true, true) => &[4, 2, -2, -4],
    }
}

/// Position members of the two-step two-qubit family `Q<mask>`, over `A1 B1`.
/// Alice's values come from mask bits 1 and 0, Bob's from bits 3 and 2; each
/// list runs from the largest value down, with Alice's coordinate slowest.
pub fn q_family_members(mask: usize) -> Vec<BasisLabel> {
    let alice = q_values(mask & 2 != 0, mask & 1 != 0);
    let bob = q_values(mask & 8 != 0, mask & 4 != 0);
    alice.iter().flat_map(|&a| bob.iter().map(move |&b| BasisLabel::new([a, b]))).collect()
}

pub fn p_family_name(mask: usize) -> String {
    if mask == 0 {
        "0000".into()
    } else {
        format!("P{mask}")
    }
}

pub fn q_family_name(mask: usize) -> String {
    if mask == 0 {
        "00".into()
    } else {
        format!("Q{mask}")
    }
}

impl ProtocolSpec {
    pub fn new(id: ProtocolId) -> Result<Self> {
        Self::build(id, DEFAULT_LATTICE_BOUND)
    }

    /// Builds the protocol with lattice registers on `[-bound, bound]`.
    /// `bound` is ignored by the cycle protocol.
    pub fn build(id: ProtocolId, bound: i32) -> Result<Self> {
        if bound < 1 {
            return Err(Error::Config(format!("lattice bound must be positive, got {bound}")));
        }
        match id {
            ProtocolId::Line1Q => Self::line1q(bound),
            ProtocolId::Cycle1Q => Self::cycle1q(),
            ProtocolId::Single2Q => Self::single2q(bound),
            ProtocolId::TwoStep2Q => Self::twostep2q(bound),
        }
    }

    fn one_qubit_plan(walsh: bool) -> Result<MeasurementPlan> {
        let t = names(&["A1", "B1"]);
        let fams: [(&str, &[&[i32]]); 4] = [
            ("00", &[&[0, 0]]),
            ("02", &[&[0, 2], &[0, -2]]),
            ("20", &[&[2, 0], &[-2, 0]]),
            ("22", &[&[2, 2], &[2, -2], &[-2, 2], &[-2, -2]]),
        ];
        let positions = if walsh {
            fams.iter().map(|(n, m)| ProjectorFamily::walsh(*n, t.clone(), labels(m))).collect::<Result<_>>()?
        } else {
            fams.iter().map(|(n, m)| ProjectorFamily::walsh(*n, t.clone(), labels(&m[..1]))).collect::<Result<_>>()?
        };
        Ok(MeasurementPlan { positions, coins: ProjectorFamily::plus_minus("coins", names(&["A2", "B2"]), 0)? })
    }

    fn line1q(bound: i32) -> Result<Self> {
        let order = ["A1", "B1", "A2", "A3", "B2", "B3"];
        let layout = lattice_layout(&order, &["A1", "B1"], bound)?;
        let nn = ConditionedShift::nearest_neighbour;
        Ok(Self {
            id: ProtocolId::Line1Q,
            layout: Arc::new(layout),
            position_registers: names(&["A1", "B1"]),
            alice_inputs: names(&["A2"]),
            bob_inputs: names(&["B2"]),
            alice_targets: names(&["A3"]),
            bob_targets: names(&["B3"]),
            measured_coins: names(&["A2", "B2"]),
            steps: [
                WalkStep::new(vec![], vec![nn("A1", "A2")]),
                WalkStep::new(vec![], vec![nn("B1", "B2")]),
                WalkStep::new(hadamards(&["A3"]), vec![nn("B1", "A3")]),
                WalkStep::new(hadamards(&["B3"]), vec![nn("A1", "B3")]),
            ],
            plan: Self::one_qubit_plan(true)?,
        })
    }

    fn cycle1q() -> Result<Self> {
        let layout = RegisterLayout::new(vec![
            RegisterSpec::cycle("A1", 4),
            RegisterSpec::cycle("B1", 4),
            RegisterSpec::coin("A2"),
            RegisterSpec::coin("A3"),
            RegisterSpec::coin("B2"),
            RegisterSpec::coin("B3"),
        ])?;
        let nn = ConditionedShift::nearest_neighbour;
        Ok(Self {
            id: ProtocolId::Cycle1Q,
            layout: Arc::new(layout),
            position_registers: names(&["A1", "B1"]),
            alice_inputs: names(&["A2"]),
            bob_inputs: names(&["B2"]),
            alice_targets: names(&["A3"]),
            bob_targets: names(&["B3"]),
            measured_coins: names(&["A2", "B2"]),
            steps: [
                WalkStep::new(vec![], vec![nn("A1", "A2")]),
                WalkStep::new(vec![], vec![nn("B1", "B2")]),
                WalkStep::new(vec![], vec![nn("B1", "A3")]),
                WalkStep::new(vec![], vec![nn("A1", "B3")]),
            ],
            plan: Self::one_qubit_plan(false)?,
        })
    }

    fn single2q(bound: i32) -> Result<Self> {
        let order = ["A1", "A2", "B1", "B2", "A3", "A4", "A5", "A6", "B3", "B4", "B5", "B6"];
        let positions = ["A1", "A2", "B1", "B2"];
        let layout = lattice_layout(&order, &positions, bound)?;
        let pc = ConditionedShift::pair_component;
        let t = names(&positions);
        let families = (0..16)
            .map(|m| ProjectorFamily::walsh(p_family_name(m), t.clone(), p_family_members(m)))
            .collect::<Result<_>>()?;
        Ok(Self {
            id: ProtocolId::Single2Q,
            layout: Arc::new(layout),
            position_registers: t,
            alice_inputs: names(&["A3", "A4"]),
            bob_inputs: names(&["B3", "B4"]),
            alice_targets: names(&["A5", "A6"]),
            bob_targets: names(&["B5", "B6"]),
            measured_coins: names(&["A3", "A4", "B3", "B4"]),
            steps: [
                WalkStep::new(vec![], vec![pc("A1", ["A3", "A4"], 0), pc("A2", ["A3", "A4"], 1)]),
                WalkStep::new(vec![], vec![pc("B1", ["B3", "B4"], 0), pc("B2", ["B3", "B4"], 1)]),
                WalkStep::new(hadamards(&["A5", "A6"]), vec![pc("B1", ["A5", "A6"], 0), pc("B2", ["A5", "A6"], 1)]),
                WalkStep::new(hadamards(&["B5", "B6"]), vec![pc("A1", ["B5", "B6"], 0), pc("A2", ["B5", "B6"], 1)]),
            ],
            plan: MeasurementPlan {
                positions: families,
                coins: ProjectorFamily::plus_minus("coins", names(&["A3", "A4", "B3", "B4"]), 2)?,
            },
        })
    }

    fn twostep2q(bound: i32) -> Result<Self> {
        let order = ["A1", "B1", "A2", "A3", "A4", "A5", "B2", "B3", "B4", "B5"];
        let layout = lattice_layout(&order, &["A1", "B1"], bound)?;
        let tc = ConditionedShift::two_coin;
        let t = names(&["A1", "B1"]);
        let families = (0..16)
            .map(|m| ProjectorFamily::walsh(q_family_name(m), t.clone(), q_family_members(m)))
            .collect::<Result<_>>()?;
        Ok(Self {
            id: ProtocolId::TwoStep2Q,
            layout: Arc::new(layout),
            position_registers: t,
            alice_inputs: names(&["A2", "A3"]),
            bob_inputs: names(&["B2", "B3"]),
            alice_targets: names(&["A4", "A5"]),
            bob_targets: names(&["B4", "B5"]),
            measured_coins: names(&["A2", "A3", "B2", "B3"]),
            steps: [
                WalkStep::new(vec![], vec![tc("A1", "A2", "A3")]),
                WalkStep::new(vec![], vec![tc("B1", "B2", "B3")]),
                WalkStep::new(hadamards(&["A4", "A5"]), vec![tc("B1", "A4", "A5")]),
                WalkStep::new(hadamards(&["B4", "B5"]), vec![tc("A1", "B4", "B5")]),
            ],
            plan: MeasurementPlan {
                positions: families,
                coins: ProjectorFamily::plus_minus("coins", names(&["A2", "A3", "B2", "B3"]), 2)?,
            },
        })
    }

    pub fn qubits_per_party(&self) -> usize {
        self.id.qubits_per_party()
    }

    pub fn payload_dim(&self) -> usize {
        1 << self.qubits_per_party()
    }

    /// Bundled synthesized correction table for this protocol.
    pub fn corrections(&self) -> Result<&'static CorrectionTable> {
        static TABLES: [OnceLock<std::result::Result<CorrectionTable, String>>; 4] =
            [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
        let slot = &TABLES[self.id as usize];
        slot.get_or_init(|| CorrectionTable::from_json_str(self.id.bundled_json()).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| Error::Config(format!("bundled table for {} is unreadable: {e}", self.id)))
    }

    fn check_payload(&self, payload: &InputPayload) -> Result<()> {
        let dim = self.payload_dim();
        for v in [&payload.alice, &payload.bob] {
            if v.len() != dim {
                return Err(Error::ShapeMismatch { expected: dim, got: v.len() });
            }
            let n: f64 = v.iter().map(|a| a.norm_sqr()).sum();
            if (n - 1.0).abs() > NORM_TOL {
                return Err(Error::NotNormalized { norm_sqr: n });
            }
        }
        Ok(())
    }

    fn coin_block(regs: &[String], amps: &[Amplitude]) -> InitialBlock {
        let k = regs.len();
        InitialBlock {
            registers: regs.to_vec(),
            terms: amps
                .iter()
                .enumerate()
                .map(|(i, a)| (BasisLabel((0..k).map(|q| ((i >> (k - 1 - q)) & 1) as i32).collect()), *a))
                .collect(),
        }
    }

    /// Factors of the initial product state: positions at 0, inputs, ancillas.
    pub fn initial_blocks(&self, payload: &InputPayload) -> Result<Vec<InitialBlock>> {
        self.check_payload(payload)?;
        let one = Complex64::new(1.0, 0.0);
        let mut blocks: Vec<InitialBlock> = self
            .position_registers
            .iter()
            .map(|r| InitialBlock { registers: vec![r.clone()], terms: vec![(BasisLabel::new([0]), one)] })
            .collect();
        blocks.push(Self::coin_block(&self.alice_inputs, &payload.alice));
        blocks.push(Self::coin_block(&self.bob_inputs, &payload.bob));
        let plus = std::f64::consts::FRAC_1_SQRT_2;
        for r in self.alice_targets.iter().chain(&self.bob_targets) {
            let terms = if self.id == ProtocolId::Cycle1Q {
                vec![
                    (BasisLabel::new([0]), Complex64::new(plus, 0.0)),
                    (BasisLabel::new([1]), Complex64::new(plus, 0.0)),
                ]
            } else {
                vec![(BasisLabel::new([0]), one)]
            };
            blocks.push(InitialBlock { registers: vec![r.clone()], terms });
        }
        Ok(blocks)
    }

    /// Normalized product state in layout order.
    pub fn build_initial(&self, payload: &InputPayload) -> Result<SparseState> {
        let blocks = self.initial_blocks(payload)?;
        let n = self.layout.len();
        let mut terms: Vec<(Vec<i32>, Amplitude)> = vec![(vec![0; n], Complex64::new(1.0, 0.0))];
        for b in &blocks {
            let idx = b.registers.iter().map(|r| self.layout.index_of(r)).collect::<Result<Vec<_>>>()?;
            let mut next = Vec::with_capacity(terms.len() * b.terms.len());
            for (label, amp) in &terms {
                for (bl, ba) in &b.terms {
                    let mut l = label.clone();
                    for (&i, &v) in idx.iter().zip(&bl.0) {
                        l[i] = v;
                    }
                    next.push((l, amp * ba));
                }
            }
            terms = next;
        }
        SparseState::superpose(self.layout.clone(), terms.into_iter().map(|(l, a)| (BasisLabel(l), a)))
    }

    /// State after `W4 W3 W2 W1` on the initial state.
    pub fn run_walks(&self, payload: &InputPayload) -> Result<SparseState> {
        let mut s = self.build_initial(payload)?;
        for step in &self.steps {
            s = apply_walk_step(&s, step)?;
        }
        Ok(s)
    }

    /// States after each walk step, starting with the initial state.
    pub fn trace_walks(&self, payload: &InputPayload) -> Result<Vec<SparseState>> {
        let mut out = vec![self.build_initial(payload)?];
        for step in &self.steps {
            let next = apply_walk_step(out.last().expect("non-empty"), step)?;
            out.push(next);
        }
        Ok(out)
    }
}
