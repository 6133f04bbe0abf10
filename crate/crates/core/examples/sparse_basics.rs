//! Builds a small lattice-plus-coin register by hand, applies a Hadamard and
//! a coin-conditioned shift, and round-trips the state through JSON.

use std::sync::Arc;

use walkport::walkops::{apply_conditioned_shift, ConditionedShift};
use walkport::{BasisLabel, Gate, RegisterLayout, RegisterSpec, SparseState};

fn main() -> walkport::Result<()> {
    let layout = Arc::new(RegisterLayout::new(vec![RegisterSpec::lattice("X", 4), RegisterSpec::coin("C")])?);
    let start = SparseState::basis_state(layout, BasisLabel::parse_ket("00")?)?;

    let coined = start.apply_coin_gate("C", &Gate::hadamard())?;
    let walked = apply_conditioned_shift(&coined, &ConditionedShift::nearest_neighbour("X", "C"))?;
    for (label, amp) in walked.iter() {
        println!("{label}: {amp:.4}");
    }

    let json = walked.to_json();
    println!("{}", serde_json::to_string_pretty(&json).expect("state serializes"));
    let back = SparseState::from_json(&json)?;
    println!("round-trip difference {:.1e}", walked.max_abs_diff(&back));
    Ok(())
}
