//! Coin-conditioned shift operators and composed walk steps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{BasisLabel, Gate, RegisterKind, SparseState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ShiftKind {
    Right1,
    Left1,
    Right2,
    Left2,
}

impl ShiftKind {
    pub fn offset(self) -> i32 {
        match self {
            ShiftKind::Right1 => 1,
            ShiftKind::Left1 => -1,
            ShiftKind::Right2 => 2,
            ShiftKind::Left2 => -2,
        }
    }

    pub fn inverse(self) -> ShiftKind {
        match self {
            ShiftKind::Right1 => ShiftKind::Left1,
            ShiftKind::Left1 => ShiftKind::Right1,
            ShiftKind::Right2 => ShiftKind::Left2,
            ShiftKind::Left2 => ShiftKind::Right2,
        }
    }
}

/// Control-coin outcome tuple, one entry per control register.
pub type ControlOutcome = Vec<u8>;

/// Nearest-neighbour rule on one coin: `0` moves right, `1` moves left.
pub fn single_coin_shift_rule() -> BTreeMap<ControlOutcome, ShiftKind> {
    BTreeMap::from([(vec![0], ShiftKind::Right1), (vec![1], ShiftKind::Left1)])
}

/// Two-coin rule: `00` jumps two sites right, `11` two sites left, `01` one
/// site right and `10` one site left.
///
/// The `01`/`10` assignment follows the operator definitions of the two-step
/// walk (`S1` paired with `|01><01|`), which is what the evolved states obey.
pub fn two_coin_shift_rule() -> BTreeMap<ControlOutcome, ShiftKind> {
    BTreeMap::from([
        (vec![0, 0], ShiftKind::Right2),
        (vec![0, 1], ShiftKind::Right1),
        (vec![1, 0], ShiftKind::Left1),
        (vec![1, 1], ShiftKind::Left2),
    ])
}

/// Shift of one position register selected by the values of control coins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionedShift {
    pub position: String,
    pub controls: Vec<String>,
    pub rule: BTreeMap<ControlOutcome, ShiftKind>,
}

impl ConditionedShift {
    /// Checks that the rule covers every control outcome exactly once.
    pub fn new(
        position: impl Into<String>,
        controls: Vec<String>,
        rule: BTreeMap<ControlOutcome, ShiftKind>,
    ) -> Result<Self> {
        let position = position.into();
        let k = controls.len();
        if k == 0 {
            return Err(Error::IncompleteRule { register: position, reason: "no control coins".into() });
        }
        if rule.len() != 1 << k {
            return Err(Error::IncompleteRule {
                register: position,
                reason: format!("{} outcomes covered, {} required", rule.len(), 1 << k),
            });
        }
        for key in rule.keys() {
            if key.len() != k || key.iter().any(|&b| b > 1) {
                return Err(Error::IncompleteRule {
                    register: position,
                    reason: format!("bad control outcome {key:?}"),
                });
            }
        }
        if controls.contains(&position) {
            return Err(Error::IncompleteRule { register: position, reason: "register controls itself".into() });
        }
        Ok(Self { position, controls, rule })
    }

    /// `position` controlled by a single coin with [`single_coin_shift_rule`].
    pub fn nearest_neighbour(position: &str, control: &str) -> Self {
        Self::new(position, vec![control.to_string()], single_coin_shift_rule()).expect("rule is total")
    }

    /// `position` controlled by a coin pair with [`two_coin_shift_rule`].
    pub fn two_coin(position: &str, first: &str, second: &str) -> Self {
        Self::new(position, vec![first.to_string(), second.to_string()], two_coin_shift_rule()).expect("rule is total")
    }

    /// `position` controlled by a coin pair, moving by the nearest-neighbour
    /// rule of the coin at `which` only. Two of these sharing a pair express a
    /// joint `S (x) S` style step.
    pub fn pair_component(position: &str, controls: [&str; 2], which: usize) -> Self {
        let mut rule = BTreeMap::new();
        for a in 0..2u8 {
            for b in 0..2u8 {
                let bit = [a, b][which];
                rule.insert(vec![a, b], if bit == 0 { ShiftKind::Right1 } else { ShiftKind::Left1 });
            }
        }
        Self::new(position, controls.iter().map(|s| s.to_string()).collect(), rule).expect("rule is total")
    }

    /// Same registers with every shift reversed.
    pub fn inverted(&self) -> Self {
        Self {
            position: self.position.clone(),
            controls: self.controls.clone(),
            rule: self.rule.iter().map(|(k, v)| (k.clone(), v.inverse())).collect(),
        }
    }
}

/// Optional coin gates followed by conditioned shifts on distinct positions.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkStep {
    pub pre_gates: Vec<(String, Gate)>,
    pub shifts: Vec<ConditionedShift>,
}

impl WalkStep {
    pub fn new(pre_gates: Vec<(String, Gate)>, shifts: Vec<ConditionedShift>) -> Self {
        Self { pre_gates, shifts }
    }

    /// Registers touched by this step: shifted positions, then controls, then
    /// gated coins, without repeats, in first-seen order.
    pub fn support(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut push = |name: &String| {
            if !out.contains(name) {
                out.push(name.clone());
            }
        };
        for s in &self.shifts {
            push(&s.position);
        }
        for s in &self.shifts {
            for c in &s.controls {
                push(c);
            }
        }
        for (g, _) in &self.pre_gates {
            push(g);
        }
        out
    }
}

pub fn apply_conditioned_shift(s: &SparseState, cs: &ConditionedShift) -> Result<SparseState> {
    let layout = s.layout();
    let pos = layout.index_of(&cs.position)?;
    let kind = layout.registers()[pos].kind;
    if kind == RegisterKind::Coin {
        return Err(Error::WrongRegisterKind { register: cs.position.clone(), expected: "position" });
    }
    let mut ctrl = Vec::with_capacity(cs.controls.len());
    for c in &cs.controls {
        let i = layout.index_of(c)?;
        if layout.registers()[i].kind != RegisterKind::Coin {
            return Err(Error::WrongRegisterKind { register: c.clone(), expected: "coin" });
        }
        ctrl.push(i);
    }

    let mut out: BTreeMap<BasisLabel, _> = BTreeMap::new();
    let mut key = vec![0u8; ctrl.len()];
    for (label, amp) in s.iter() {
        for (k, &i) in key.iter_mut().zip(&ctrl) {
            *k = label.0[i] as u8;
        }
        let shift = cs.rule.get(&key).ok_or_else(|| Error::IncompleteRule {
            register: cs.position.clone(),
            reason: format!("no entry for {key:?}"),
        })?;
        let moved = label.0[pos] as i64 + shift.offset() as i64;
        let value = match kind {
            RegisterKind::Lattice { bound } => {
                if moved.abs() > bound as i64 {
                    return Err(Error::OutOfBounds { register: cs.position.clone(), value: moved, bound });
                }
                moved as i32
            }
            RegisterKind::Cycle { modulus } => moved.rem_euclid(modulus as i64) as i32,
            RegisterKind::Coin => unreachable!(),
        };
        let mut l = label.clone();
        l.0[pos] = value;
        *out.entry(l).or_default() += amp;
    }
    Ok(SparseState::from_map(s.layout_arc().clone(), out, s.prune_eps()))
}

/// Pre-gates in listed order, then every conditioned shift.
pub fn apply_walk_step(s: &SparseState, w: &WalkStep) -> Result<SparseState> {
    let mut state = s.clone();
    for (reg, gate) in &w.pre_gates {
        state = state.apply_coin_gate(reg, gate)?;
    }
    let shifted: Vec<&str> = w.shifts.iter().map(|c| c.position.as_str()).collect();
    for (i, cs) in w.shifts.iter().enumerate() {
        if shifted[..i].contains(&cs.position.as_str()) {
            return Err(Error::IncompleteRule {
                register: cs.position.clone(),
                reason: "register shifted twice in one step".into(),
            });
        }
        state = apply_conditioned_shift(&state, cs)?;
    }
    Ok(state)
}
