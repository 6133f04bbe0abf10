//! Runs the one-qubit line protocol on a single random payload and prints
//! every joint measurement branch with its correction and fidelity.
//!
//! ```text
//! cargo run --example teleport_line
//! ```

use walkport::measure::pauli_string;
use walkport::{enumerate_branches, InputPayload, ProtocolId, ProtocolSpec};

fn main() -> walkport::Result<()> {
    let spec = ProtocolSpec::new(ProtocolId::Line1Q)?;
    let payload = InputPayload::seeded_batch(7, spec.payload_dim(), 1).remove(0);

    println!("alice sends {:?}", payload.alice);
    println!("bob sends   {:?}", payload.bob);

    let branches = enumerate_branches(&spec, &payload)?;
    let mut total = 0.0;
    let mut worst: f64 = 1.0;
    for b in branches.iter().filter(|b| !b.vacuous) {
        total += b.probability;
        worst = worst.min(b.fidelity);
        println!(
            "{:>12} {:>3}  p = {:.6}  fix = {:<16} F = {:.12}",
            b.position,
            b.coin,
            b.probability,
            pauli_string(&b.correction),
            b.fidelity
        );
    }
    println!("total probability {total:.12}, worst fidelity {worst:.12}");
    Ok(())
}
