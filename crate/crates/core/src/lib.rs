//! Sparse simulation and exhaustive verification of bidirectional
//! quantum-walk teleportation protocols.
//!
//! Two parties each hold an unknown one- or two-qubit state on a coin register.
//! Four conditioned walks entangle the coins with position registers; after
//! measuring positions and input coins, a Pauli correction on the ancilla coins
//! hands each party the other's state. [`protocols`] defines the four schemes,
//! [`measure`] enumerates every branch and synthesizes corrections, [`oracle`]
//! cross-checks the sparse engine against dense matrices and [`equivalence`]
//! checks the cross-protocol mappings.

pub mod cli;
pub mod equivalence;
pub mod error;
pub mod hilbert;
pub mod measure;
pub mod oracle;
pub mod protocols;
pub mod walkops;

pub use error::{Error, Result};
pub use hilbert::{Amplitude, BasisLabel, Gate, RegisterKind, RegisterLayout, RegisterSpec, SparseState};
pub use measure::{
    enumerate_branches, enumerate_branches_with, project, BranchResult, CorrectionEntry, CorrectionTable,
    MeasurementPlan, PauliFactor, PauliOp, ProjectorFamily, ProjectorSpec,
};
pub use protocols::{InputPayload, ProtocolId, ProtocolSpec};
pub use walkops::{ConditionedShift, ShiftKind, WalkStep};
