//! Sparse state vectors over tensor products of heterogeneous finite registers.
//!
//! A [`RegisterLayout`] is an ordered list of registers: bounded lattices, cycles
//! and qubit coins. A [`SparseState`] maps [`BasisLabel`]s (one integer per
//! register) to complex amplitudes. Labels are ordered lexicographically, so
//! iteration and serialization are deterministic.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Amplitude = Complex64;

/// Amplitudes below this magnitude are dropped.
pub const DEFAULT_PRUNE_EPS: f64 = 1e-12;
/// Tolerance on `| |psi|^2 - 1 |` for states that claim to be normalized.
pub const NORM_TOL: f64 = 1e-10;
/// Default half-width of a lattice register.
pub const DEFAULT_LATTICE_BOUND: i32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RegisterKind {
    /// Integer positions in `[-bound, bound]`.
    Lattice { bound: i32 },
    /// Integers modulo `modulus`, stored in `[0, modulus)`.
    Cycle { modulus: i32 },
    /// A qubit, values `{0, 1}`.
    Coin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Position,
    Coin,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegisterSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: RegisterKind,
}

impl RegisterSpec {
    pub fn lattice(name: impl Into<String>, bound: i32) -> Self {
        Self { name: name.into(), kind: RegisterKind::Lattice { bound } }
    }

    pub fn cycle(name: impl Into<String>, modulus: i32) -> Self {
        Self { name: name.into(), kind: RegisterKind::Cycle { modulus } }
    }

    pub fn coin(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: RegisterKind::Coin }
    }

    pub fn role(&self) -> Role {
        match self.kind {
            RegisterKind::Coin => Role::Coin,
            _ => Role::Position,
        }
    }

    pub fn admits(&self, value: i32) -> bool {
        match self.kind {
            RegisterKind::Lattice { bound } => (-bound..=bound).contains(&value),
            RegisterKind::Cycle { modulus } => (0..modulus).contains(&value),
            RegisterKind::Coin => value == 0 || value == 1,
        }
    }

    /// Number of admissible values.
    pub fn dimension(&self) -> usize {
        match self.kind {
            RegisterKind::Lattice { bound } => (2 * bound + 1) as usize,
            RegisterKind::Cycle { modulus } => modulus as usize,
            RegisterKind::Coin => 2,
        }
    }

    /// Smallest admissible value; `value - offset()` is the register-local index.
    pub fn offset(&self) -> i32 {
        match self.kind {
            RegisterKind::Lattice { bound } => -bound,
            _ => 0,
        }
    }
}

/// Ordered list of registers. Register names are unique.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegisterLayout {
    registers: Vec<RegisterSpec>,
}

impl RegisterLayout {
    pub fn new(registers: Vec<RegisterSpec>) -> Result<Self> {
        for (i, r) in registers.iter().enumerate() {
            if registers[..i].iter().any(|o| o.name == r.name) {
                return Err(Error::LayoutMismatch(format!("duplicate register `{}`", r.name)));
            }
            let ok = match r.kind {
                RegisterKind::Lattice { bound } => bound > 0,
                RegisterKind::Cycle { modulus } => modulus > 0,
                RegisterKind::Coin => true,
            };
            if !ok {
                return Err(Error::LayoutMismatch(format!("register `{}` must have a positive size", r.name)));
            }
        }
        Ok(Self { registers })
    }

    pub fn registers(&self) -> &[RegisterSpec] {
        &self.registers
    }

    pub fn len(&self) -> usize {
        self.registers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.registers.iter().position(|r| r.name == name).ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    pub fn register(&self, name: &str) -> Result<&RegisterSpec> {
        Ok(&self.registers[self.index_of(name)?])
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.registers.iter().map(|r| r.name.as_str())
    }

    pub fn check_label(&self, label: &BasisLabel) -> Result<()> {
        if label.0.len() != self.registers.len() {
            return Err(Error::InvalidLabel {
                label: label.to_string(),
                reason: format!("expected {} values, got {}", self.registers.len(), label.0.len()),
            });
        }
        for (r, &v) in self.registers.iter().zip(&label.0) {
            if !r.admits(v) {
                return Err(Error::InvalidLabel {
                    label: label.to_string(),
                    reason: format!("register `{}` does not admit {}", r.name, v),
                });
            }
        }
        Ok(())
    }

    /// Layout made of the registers at `keep`, in that order.
    pub fn select(&self, keep: &[usize]) -> RegisterLayout {
        RegisterLayout { registers: keep.iter().map(|&i| self.registers[i].clone()).collect() }
    }

    /// Product of the register dimensions, `None` on overflow.
    pub fn dimension(&self) -> Option<u128> {
        self.registers.iter().try_fold(1u128, |acc, r| acc.checked_mul(r.dimension() as u128))
    }
}

/// One value per register, compared lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BasisLabel(pub Vec<i32>);

impl BasisLabel {
    pub fn new(values: impl Into<Vec<i32>>) -> Self {
        Self(values.into())
    }

    pub fn values(&self) -> &[i32] {
        &self.0
    }

    /// Parses a compact ket such as `1-20110`: every digit is one value and a
    /// leading `-` negates the digit that follows. Surrounding `|` and `>` / `⟩`
    /// are accepted.
    pub fn parse_ket(ket: &str) -> Result<Self> {
        let body = ket.trim().trim_start_matches('|').trim_end_matches('>').trim_end_matches('⟩');
        let mut values = Vec::new();
        let mut negate = false;
        for ch in body.chars() {
            match ch {
                '-' | '−' if !negate => negate = true,
                c if c.is_ascii_digit() => {
                    let v = c.to_digit(10).unwrap() as i32;
                    values.push(if negate { -v } else { v });
                    negate = false;
                }
                c if c.is_whitespace() => {}
                _ => {
                    return Err(Error::InvalidLabel {
                        label: ket.to_string(),
                        reason: format!("unexpected character `{ch}`"),
                    })
                }
            }
        }
        if negate {
            return Err(Error::InvalidLabel { label: ket.to_string(), reason: "dangling sign".into() });
        }
        Ok(Self(values))
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("|")?;
        let compact = self.0.iter().all(|v| v.abs() < 10);
        for (i, v) in self.0.iter().enumerate() {
            if !compact && i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(">")
    }
}

/// A 2x2 complex matrix acting on one coin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate(pub [[Amplitude; 2]; 2]);

impl Gate {
    pub fn identity() -> Self {
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        Gate([[l, o], [o, l]])
    }

    pub fn hadamard() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Gate([[h, h], [h, -h]])
    }

    pub fn pauli_x() -> Self {
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        Gate([[o, l], [l, o]])
    }

    pub fn pauli_z() -> Self {
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        Gate([[l, o], [o, -l]])
    }

    /// Matrix product `self * rhs` (apply `rhs` first).
    pub fn then_after(&self, rhs: &Gate) -> Gate {
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.0[i][0] * rhs.0[0][j] + self.0[i][1] * rhs.0[1][j];
            }
        }
        Gate(out)
    }

    /// Max entrywise deviation of `G^dagger G` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    acc += self.0[k][i].conj() * self.0[k][j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }
}

/// Sparse wavefunction over a [`RegisterLayout`].
///
/// Values are immutable: every operation returns a new state.
#[derive(Debug, Clone)]
pub struct SparseState {
    layout: Arc<RegisterLayout>,
    amps: BTreeMap<BasisLabel, Amplitude>,
    eps: f64,
}

impl PartialEq for SparseState {
    fn eq(&self, other: &Self) -> bool {
        self.layout == other.layout && self.amps == other.amps
    }
}

impl SparseState {
    /// The zero vector. Only produced by projections with vanishing weight.
    pub fn zero(layout: Arc<RegisterLayout>) -> Self {
        Self { layout, amps: BTreeMap::new(), eps: DEFAULT_PRUNE_EPS }
    }

    pub fn basis_state(layout: Arc<RegisterLayout>, label: BasisLabel) -> Result<Self> {
        layout.check_label(&label)?;
        let mut amps = BTreeMap::new();
        amps.insert(label, Complex64::new(1.0, 0.0));
        Ok(Self { layout, amps, eps: DEFAULT_PRUNE_EPS })
    }

    /// Weighted sum of basis states. Repeated labels add up.
    pub fn superpose(
        layout: Arc<RegisterLayout>,
        terms: impl IntoIterator<Item = (BasisLabel, Amplitude)>,
    ) -> Result<Self> {
        let mut amps: BTreeMap<BasisLabel, Amplitude> = BTreeMap::new();
        let mut seen = false;
        for (label, amp) in terms {
            layout.check_label(&label)?;
            check_finite(amp)?;
            *amps.entry(label).or_default() += amp;
            seen = true;
        }
        if !seen {
            return Err(Error::EmptyState);
        }
        Ok(Self { layout, amps, eps: DEFAULT_PRUNE_EPS }.prune())
    }

    /// Builds a state from already-validated amplitudes; used by operations
    /// that only permute or reweight labels of a valid state.
    pub(crate) fn from_map(layout: Arc<RegisterLayout>, amps: BTreeMap<BasisLabel, Amplitude>, eps: f64) -> Self {
        Self { layout, amps, eps }.prune()
    }

    pub fn with_prune_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self.prune()
    }

    pub fn prune_eps(&self) -> f64 {
        self.eps
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn layout_arc(&self) -> &Arc<RegisterLayout> {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisLabel, &Amplitude)> {
        self.amps.iter()
    }

    pub fn amplitude(&self, label: &BasisLabel) -> Amplitude {
        self.amps.get(label).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < NORM_TOL
    }

    /// Drops amplitudes with magnitude below the prune tolerance.
    pub fn prune(mut self) -> Self {
        let eps = self.eps;
        self.amps.retain(|_, a| a.norm() >= eps);
        self
    }

    /// `<self|other>`, conjugating `self`.
    pub fn inner_product(&self, other: &SparseState) -> Result<Amplitude> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch("inner product of states on different layouts".into()));
        }
        let (small, large, conj_small) = if self.amps.len() <= other.amps.len() {
            (&self.amps, &other.amps, true)
        } else {
            (&other.amps, &self.amps, false)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (label, a) in small {
            if let Some(b) = large.get(label) {
                acc += if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        Ok(acc)
    }

    pub fn scale(&self, factor: Amplitude) -> SparseState {
        let amps = self.amps.iter().map(|(l, a)| (l.clone(), a * factor)).collect();
        Self::from_map(self.layout.clone(), amps, self.eps)
    }

    /// `self + other`.
    pub fn add(&self, other: &SparseState) -> Result<SparseState> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch("sum of states on different layouts".into()));
        }
        let mut amps = self.amps.clone();
        for (l, a) in &other.amps {
            *amps.entry(l.clone()).or_default() += a;
        }
        Ok(Self::from_map(self.layout.clone(), amps, self.eps))
    }

    /// Rescales to unit norm. The zero state is returned unchanged.
    pub fn normalized(&self) -> SparseState {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return self.clone();
        }
        self.scale(Complex64::new(1.0 / n, 0.0))
    }

    /// Applies a 2x2 unitary to one coin register.
    pub fn apply_coin_gate(&self, register: &str, gate: &Gate) -> Result<SparseState> {
        let idx = self.layout.index_of(register)?;
        if self.layout.registers()[idx].kind != RegisterKind::Coin {
            return Err(Error::WrongRegisterKind { register: register.into(), expected: "coin" });
        }
        let deviation = gate.unitarity_deviation();
        if deviation > 1e-12 {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(self.apply_coin_matrix(idx, gate))
    }

    pub(crate) fn apply_coin_matrix(&self, idx: usize, gate: &Gate) -> SparseState {
        let mut out: BTreeMap<BasisLabel, Amplitude> = BTreeMap::new();
        for (label, amp) in &self.amps {
            let old = label.0[idx] as usize;
            for new in 0..2 {
                let g = gate.0[new][old];
                if g.norm_sqr() == 0.0 {
                    continue;
                }
                let mut l = label.clone();
                l.0[idx] = new as i32;
                *out.entry(l).or_default() += g * amp;
            }
        }
        Self::from_map(self.layout.clone(), out, self.eps)
    }

    /// Moves every term to `f(label)` on `layout`, summing collisions. Used for
    /// relabelings such as reducing lattice positions onto a cycle.
    pub fn relabel(
        &self,
        layout: Arc<RegisterLayout>,
        mut f: impl FnMut(&BasisLabel) -> BasisLabel,
    ) -> Result<SparseState> {
        let mut out: BTreeMap<BasisLabel, Amplitude> = BTreeMap::new();
        for (label, amp) in &self.amps {
            let l = f(label);
            layout.check_label(&l)?;
            *out.entry(l).or_default() += amp;
        }
        Ok(Self::from_map(layout, out, self.eps))
    }

    /// Largest entrywise `|a - b|` over the union of supports. Compares labels
    /// only, so the layouts may differ in lattice bounds.
    pub fn max_abs_diff(&self, other: &SparseState) -> f64 {
        let mut worst = 0.0f64;
        for (l, a) in &self.amps {
            worst = worst.max((a - other.amplitude(l)).norm());
        }
        for (l, b) in &other.amps {
            if !self.amps.contains_key(l) {
                worst = worst.max(b.norm());
            }
        }
        worst
    }

    /// Like [`max_abs_diff`](Self::max_abs_diff) after rotating `other` by the
    /// global phase that best aligns it with `self`.
    pub fn max_abs_diff_up_to_phase(&self, other: &SparseState) -> f64 {
        let mut overlap = Complex64::new(0.0, 0.0);
        for (l, a) in &self.amps {
            overlap += other.amplitude(l).conj() * a;
        }
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
        self.max_abs_diff(&other.scale(phase))
    }

    /// Canonical JSON form: layout descriptors plus amplitudes sorted by label.
    pub fn to_json(&self) -> serde_json::Value {
        let amps: Vec<SerializedAmp> =
            self.amps.iter().map(|(l, a)| SerializedAmp { label: l.0.clone(), re: a.re, im: a.im }).collect();
        serde_json::to_value(SerializedState { layout: (*self.layout).clone(), amps })
            .expect("state serialization cannot fail")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<SparseState> {
        let s: SerializedState = serde_json::from_value(value.clone())?;
        let layout = Arc::new(RegisterLayout::new(s.layout.registers)?);
        if s.amps.is_empty() {
            return Ok(SparseState::zero(layout));
        }
        SparseState::superpose(layout, s.amps.into_iter().map(|a| (BasisLabel(a.label), Complex64::new(a.re, a.im))))
    }
}

#[derive(Serialize, Deserialize)]
struct SerializedState {
    layout: RegisterLayout,
    amps: Vec<SerializedAmp>,
}

#[derive(Serialize, Deserialize)]
struct SerializedAmp {
    label: Vec<i32>,
    re: f64,
    im: f64,
}

fn check_finite(a: Amplitude) -> Result<()> {
    if a.re.is_finite() && a.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidLabel { label: format!("{a}"), reason: "non-finite amplitude".into() })
    }
}

impl fmt::Display for SparseState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.amps.is_empty() {
            return f.write_str("0");
        }
        for (i, (l, a)) in self.amps.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i){}", a.re, a.im, l)?;
        }
        Ok(())
    }
}
