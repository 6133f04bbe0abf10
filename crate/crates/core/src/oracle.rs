//! Dense state-vector cross-check of the sparse walk engine.
//!
//! Each walk step is rebuilt as an explicit matrix on the registers it touches,
//! assembled with Kronecker products from single-register pieces: projectors
//! `|v><v|` on control coins, cyclic shift matrices on positions and
//! Hadamards on pre-gated coins. Lattice positions are placed on a ring of
//! `2B + 1` sites so every shift matrix is a permutation and the step stays
//! unitary. The oracle bound is chosen so the reachable support never wraps.
//!
//! Amplitudes are stored in row-major order over the layout, first register
//! most significant, with a register's local index `value - offset`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{BasisLabel, Gate, RegisterKind, RegisterLayout, SparseState};
use crate::protocols::{InputPayload, ProtocolId, ProtocolSpec};
use crate::walkops::{ShiftKind, WalkStep};

/// Largest dense vector the oracle will allocate.
pub const DENSE_CAP: usize = 1 << 26;
/// Largest layout dimension for which whole-layout step matrices are built.
pub const FULL_MATRIX_CAP: usize = 1024;

/// Smallest lattice bound that holds every reachable position of the protocol.
pub fn oracle_bound(id: ProtocolId) -> i32 {
    match id {
        ProtocolId::Line1Q | ProtocolId::Single2Q => 2,
        ProtocolId::TwoStep2Q => 4,
        ProtocolId::Cycle1Q => crate::hilbert::DEFAULT_LATTICE_BOUND,
    }
}

fn checked_dimension(layout: &RegisterLayout) -> Result<usize> {
    match layout.dimension() {
        Some(d) if d <= DENSE_CAP as u128 => Ok(d as usize),
        Some(d) => Err(Error::DimensionOverflow { dimension: d, cap: DENSE_CAP }),
        None => Err(Error::DimensionOverflow { dimension: u128::MAX, cap: DENSE_CAP }),
    }
}

fn strides(layout: &RegisterLayout) -> Vec<usize> {
    let dims: Vec<usize> = layout.registers().iter().map(|r| r.dimension()).collect();
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

#[derive(Debug, Clone)]
pub struct DenseState {
    layout: Arc<RegisterLayout>,
    amps: DVector<Complex64>,
}

impl DenseState {
    pub fn zeros(layout: Arc<RegisterLayout>) -> Result<Self> {
        let d = checked_dimension(&layout)?;
        Ok(Self { layout, amps: DVector::zeros(d) })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn index_of(&self, label: &BasisLabel) -> Result<usize> {
        self.layout.check_label(label)?;
        let st = strides(&self.layout);
        Ok(label
            .0
            .iter()
            .zip(self.layout.registers())
            .zip(&st)
            .map(|((&v, r), &s)| (v - r.offset()) as usize * s)
            .sum())
    }

    pub fn label_of(&self, mut index: usize) -> BasisLabel {
        let st = strides(&self.layout);
        BasisLabel(
            self.layout
                .registers()
                .iter()
                .zip(&st)
                .map(|(r, &s)| {
                    let local = index / s;
                    index %= s;
                    local as i32 + r.offset()
                })
                .collect(),
        )
    }

    /// Copies a sparse state into a dense vector over `layout`, which may use
    /// different lattice bounds as long as every label fits.
    pub fn from_sparse(layout: Arc<RegisterLayout>, s: &SparseState) -> Result<Self> {
        let names: Vec<&str> = layout.names().collect();
        let theirs: Vec<&str> = s.layout().names().collect();
        if names != theirs {
            return Err(Error::LayoutMismatch(format!("{names:?} vs {theirs:?}")));
        }
        let mut d = Self::zeros(layout)?;
        for (l, a) in s.iter() {
            let i = d.index_of(l)?;
            d.amps[i] = *a;
        }
        Ok(d)
    }

    /// Nonzero entries (above `eps`) as a label map.
    pub fn to_label_map(&self, eps: f64) -> BTreeMap<BasisLabel, Complex64> {
        self.amps.iter().enumerate().filter(|(_, a)| a.norm() > eps).map(|(i, a)| (self.label_of(i), *a)).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

fn shift_matrix(n: usize, kind: ShiftKind) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(n, n);
    let k = kind.offset().rem_euclid(n as i32) as usize;
    for i in 0..n {
        m[((i + k) % n, i)] = Complex64::new(1.0, 0.0);
    }
    m
}

fn gate_matrix(g: &Gate) -> DMatrix<Complex64> {
    DMatrix::from_fn(2, 2, |r, c| g.0[r][c])
}

fn projector(v: u8) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(2, 2);
    m[(v as usize, v as usize)] = Complex64::new(1.0, 0.0);
    m
}

fn kron_all(factors: &[DMatrix<Complex64>]) -> DMatrix<Complex64> {
    factors.iter().skip(1).fold(factors[0].clone(), |acc, f| acc.kronecker(f))
}

/// A walk step as a matrix on its support registers (in layout order).
#[derive(Debug, Clone)]
pub struct LocalOperator {
    pub support: Vec<usize>,
    pub matrix: DMatrix<Complex64>,
}

impl LocalOperator {
    pub fn unitarity_deviation(&self) -> f64 {
        unitarity_deviation(&self.matrix)
    }

    pub fn apply(&self, s: &DenseState) -> DenseState {
        let layout = &s.layout;
        let st = strides(layout);
        let dims: Vec<usize> = layout.registers().iter().map(|r| r.dimension()).collect();
        let local_offsets = offsets(&self.support, &dims, &st);
        let rest: Vec<usize> = (0..dims.len()).filter(|i| !self.support.contains(i)).collect();
        let outer_offsets = offsets(&rest, &dims, &st);
        let mut out = DVector::zeros(s.amps.len());
        let mut buf = DVector::zeros(local_offsets.len());
        for &base in &outer_offsets {
            for (k, &o) in local_offsets.iter().enumerate() {
                buf[k] = s.amps[base + o];
            }
            if buf.iter().all(|a: &Complex64| a.norm_sqr() == 0.0) {
                continue;
            }
            let y = &self.matrix * &buf;
            for (k, &o) in local_offsets.iter().enumerate() {
                out[base + o] = y[k];
            }
        }
        DenseState { layout: s.layout.clone(), amps: out }
    }
}

/// Flat offsets of every assignment of `regs`, first register slowest.
fn offsets(regs: &[usize], dims: &[usize], st: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &r in regs {
        out = out.into_iter().flat_map(|b| (0..dims[r]).map(move |v| b + v * st[r])).collect();
    }
    out
}

pub fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let p = m.adjoint() * m;
    let id = DMatrix::<Complex64>::identity(p.nrows(), p.ncols());
    (p - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Builds `S * G` for a step: `G` the Hadamard-style pre-gates, `S` the sum
/// over control assignments of control projectors times position shifts.
pub fn local_step_operator(layout: &RegisterLayout, step: &WalkStep) -> Result<LocalOperator> {
    let mut support: Vec<usize> = step.support().iter().map(|n| layout.index_of(n)).collect::<Result<_>>()?;
    support.sort_unstable();
    let regs: Vec<_> = support.iter().map(|&i| &layout.registers()[i]).collect();
    let pos_of = |name: &str| regs.iter().position(|r| r.name == name).expect("name is in the support");

    let mut gate_factors: Vec<DMatrix<Complex64>> =
        regs.iter().map(|r| DMatrix::identity(r.dimension(), r.dimension())).collect();
    for (name, g) in &step.pre_gates {
        let i = pos_of(name);
        if regs[i].kind != RegisterKind::Coin {
            return Err(Error::WrongRegisterKind { register: name.clone(), expected: "coin" });
        }
        gate_factors[i] = gate_matrix(g) * &gate_factors[i];
    }
    let gates = kron_all(&gate_factors);

    let mut controls: Vec<usize> = Vec::new();
    for sh in &step.shifts {
        for c in &sh.controls {
            let i = pos_of(c);
            if regs[i].kind != RegisterKind::Coin {
                return Err(Error::WrongRegisterKind { register: c.clone(), expected: "coin" });
            }
            if !controls.contains(&i) {
                controls.push(i);
            }
        }
    }
    let dim: usize = regs.iter().map(|r| r.dimension()).product();
    let mut shifts = DMatrix::zeros(dim, dim);
    for assignment in 0..(1usize << controls.len()) {
        let value = |reg: usize| -> u8 {
            let k = controls.iter().position(|&c| c == reg).expect("control");
            ((assignment >> (controls.len() - 1 - k)) & 1) as u8
        };
        let mut factors: Vec<DMatrix<Complex64>> =
            regs.iter().map(|r| DMatrix::identity(r.dimension(), r.dimension())).collect();
        for &c in &controls {
            factors[c] = projector(value(c));
        }
        for sh in &step.shifts {
            let p = pos_of(&sh.position);
            let outcome: Vec<u8> = sh.controls.iter().map(|c| value(pos_of(c))).collect();
            let kind = sh.rule[&outcome];
            factors[p] = shift_matrix(regs[p].dimension(), kind);
        }
        shifts += kron_all(&factors);
    }
    Ok(LocalOperator { support, matrix: shifts * gates })
}

/// Whole-layout matrix of a step, for layouts of at most [`FULL_MATRIX_CAP`] states.
pub fn full_step_matrix(layout: &Arc<RegisterLayout>, step: &WalkStep) -> Result<DMatrix<Complex64>> {
    let d = checked_dimension(layout)?;
    if d > FULL_MATRIX_CAP {
        return Err(Error::DimensionOverflow { dimension: d as u128, cap: FULL_MATRIX_CAP });
    }
    let op = local_step_operator(layout, step)?;
    let st = strides(layout);
    let dims: Vec<usize> = layout.registers().iter().map(|r| r.dimension()).collect();
    let local = offsets(&op.support, &dims, &st);
    let rest: Vec<usize> = (0..dims.len()).filter(|i| !op.support.contains(i)).collect();
    let mut m = DMatrix::zeros(d, d);
    for base in offsets(&rest, &dims, &st) {
        for (r, &or) in local.iter().enumerate() {
            for (c, &oc) in local.iter().enumerate() {
                m[(base + or, base + oc)] = op.matrix[(r, c)];
            }
        }
    }
    Ok(m)
}

/// Initial product state as a Kronecker product of the protocol's blocks.
pub fn dense_initial(spec: &ProtocolSpec, payload: &InputPayload) -> Result<DenseState> {
    let blocks = spec.initial_blocks(payload)?;
    let layout = spec.layout.clone();
    let mut order: Vec<usize> = Vec::new();
    let mut vec = DVector::from_element(1, Complex64::new(1.0, 0.0));
    for b in &blocks {
        let idx: Vec<usize> = b.registers.iter().map(|r| layout.index_of(r)).collect::<Result<_>>()?;
        let sub = Arc::new(layout.select(&idx));
        let mut block = DenseState::zeros(sub)?;
        for (l, a) in &b.terms {
            let i = block.index_of(l)?;
            block.amps[i] += a;
        }
        vec = vec.kronecker(&block.amps);
        order.extend(idx);
    }
    // `vec` is row-major over `order`; permute into layout order.
    let perm_layout = layout.select(&order);
    let permuted = DenseState { layout: Arc::new(perm_layout), amps: vec };
    let mut out = DenseState::zeros(layout.clone())?;
    for (i, a) in permuted.amps.iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let in_order = permuted.label_of(i);
        let mut label = vec![0i32; layout.len()];
        for (k, &reg) in order.iter().enumerate() {
            label[reg] = in_order.0[k];
        }
        let j = out.index_of(&BasisLabel(label))?;
        out.amps[j] = *a;
    }
    Ok(out)
}

/// The four step operators of a protocol, built once and reused across payloads.
#[derive(Debug, Clone)]
pub struct DenseWalk {
    pub spec: ProtocolSpec,
    pub operators: Vec<LocalOperator>,
}

impl DenseWalk {
    pub fn new(spec: ProtocolSpec) -> Result<Self> {
        checked_dimension(&spec.layout)?;
        let operators = spec.steps.iter().map(|s| local_step_operator(&spec.layout, s)).collect::<Result<_>>()?;
        Ok(Self { spec, operators })
    }

    /// Worst `max |U^dag U - I|` over the step operators.
    pub fn max_unitarity_deviation(&self) -> f64 {
        self.operators.iter().map(|o| o.unitarity_deviation()).fold(0.0, f64::max)
    }

    pub fn run(&self, payload: &InputPayload) -> Result<DenseState> {
        let mut s = dense_initial(&self.spec, payload)?;
        for op in &self.operators {
            s = op.apply(&s);
        }
        Ok(s)
    }
}

/// Largest entrywise difference between two label maps (missing entries are zero).
pub fn label_map_delta(a: &BTreeMap<BasisLabel, Complex64>, b: &BTreeMap<BasisLabel, Complex64>) -> f64 {
    let zero = Complex64::new(0.0, 0.0);
    a.keys().chain(b.keys()).map(|k| (a.get(k).unwrap_or(&zero) - b.get(k).unwrap_or(&zero)).norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub protocol: ProtocolId,
    pub dense_bound: i32,
    pub dense_dimension: usize,
    pub payloads: usize,
    pub max_state_delta: f64,
    /// Worst `max |U^dag U - I|` over the four step operators.
    pub max_unitarity_deviation: f64,
    /// Whether whole-layout step matrices were built and checked as well.
    pub full_matrices_checked: bool,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares sparse and dense pre-measurement states on every payload.
pub fn oracle_check(id: ProtocolId, payloads: &[InputPayload], tol: f64) -> Result<OracleReport> {
    let sparse_spec = ProtocolSpec::new(id)?;
    let bound = oracle_bound(id);
    let walk = DenseWalk::new(ProtocolSpec::build(id, bound)?)?;
    let layout = walk.spec.layout.clone();
    let dim = checked_dimension(&layout)?;
    let mut max_unitarity = walk.max_unitarity_deviation();
    let full = dim <= FULL_MATRIX_CAP;
    if full {
        for step in &walk.spec.steps {
            max_unitarity = max_unitarity.max(unitarity_deviation(&full_step_matrix(&layout, step)?));
        }
    }
    let mut max_delta = 0.0f64;
    for p in payloads {
        let sparse = sparse_spec.run_walks(p)?;
        let sparse_map: BTreeMap<BasisLabel, Complex64> = sparse.iter().map(|(l, a)| (l.clone(), *a)).collect();
        let dense = walk.run(p)?;
        max_delta = max_delta.max(label_map_delta(&sparse_map, &dense.to_label_map(0.0)));
    }
    Ok(OracleReport {
        protocol: id,
        dense_bound: bound,
        dense_dimension: dim,
        payloads: payloads.len(),
        max_state_delta: max_delta,
        max_unitarity_deviation: max_unitarity,
        full_matrices_checked: full,
        tolerance: tol,
        passed: max_delta <= tol && max_unitarity <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::RegisterSpec;
    use crate::walkops::ConditionedShift;

    fn small() -> Arc<RegisterLayout> {
        Arc::new(RegisterLayout::new(vec![RegisterSpec::lattice("x", 2), RegisterSpec::coin("c")]).unwrap())
    }

    #[test]
    fn index_round_trip() {
        let d = DenseState::zeros(small()).unwrap();
        for i in 0..10 {
            assert_eq!(d.index_of(&d.label_of(i)).unwrap(), i);
        }
        assert_eq!(d.label_of(0), BasisLabel::new([-2, 0]));
        assert_eq!(d.label_of(9), BasisLabel::new([2, 1]));
    }

    #[test]
    fn cap_is_enforced() {
        let regs = (0..30).map(|i| RegisterSpec::coin(format!("c{i}"))).collect();
        let layout = Arc::new(RegisterLayout::new(regs).unwrap());
        assert!(matches!(DenseState::zeros(layout), Err(Error::DimensionOverflow { .. })));
    }

    #[test]
    fn hadamard_then_shift_is_unitary_and_matches_sparse() {
        let layout = small();
        let step =
            WalkStep::new(vec![("c".into(), Gate::hadamard())], vec![ConditionedShift::nearest_neighbour("x", "c")]);
        let m = full_step_matrix(&layout, &step).unwrap();
        assert!(unitarity_deviation(&m) < 1e-12);
        let s = SparseState::basis_state(layout.clone(), BasisLabel::new([0, 0])).unwrap();
        let sparse = crate::walkops::apply_walk_step(&s, &step).unwrap();
        let dense = local_step_operator(&layout, &step).unwrap().apply(&DenseState::from_sparse(layout, &s).unwrap());
        let sm: BTreeMap<_, _> = sparse.iter().map(|(l, a)| (l.clone(), *a)).collect();
        assert!(label_map_delta(&sm, &dense.to_label_map(0.0)) < 1e-14);
    }

    #[test]
    fn ring_shift_wraps() {
        let m = shift_matrix(5, ShiftKind::Left2);
        assert_eq!(m[(3, 0)], Complex64::new(1.0, 0.0));
        assert!(unitarity_deviation(&m) < 1e-15);
    }
}
