//! Checks the two structural equivalences: the two-qubit single-step and
//! two-step protocols under the position bijection, and the cycle protocol
//! against the line protocol reduced mod 4.
//!
//! ```text
//! cargo run --release --example equivalence_checks
//! ```

use walkport::equivalence::{check_cycle_line_equivalence, check_two_qubit_equivalence, BasisMapping};
use walkport::InputPayload;

const TOL: f64 = 1e-10;

fn main() -> walkport::Result<()> {
    let mapping = BasisMapping::two_qubit()?;
    println!("P5 corresponds to {:?}", mapping.target_family("P5"));

    let two = check_two_qubit_equivalence(&InputPayload::seeded_batch(1, 4, 5), &mapping, TOL)?;
    println!(
        "two-qubit: passed {} over {} branch pairs, max state delta {:.2e}",
        two.passed, two.branches_compared, two.max_state_delta
    );
    for r in &two.readings {
        println!(
            "  {:?} reading: {} of {} outcomes lack a Pauli fix",
            r.reading, r.outcomes_without_pauli_correction, r.outcomes
        );
    }

    let cyc = check_cycle_line_equivalence(&InputPayload::seeded_batch(1, 2, 5), TOL)?;
    println!("cycle-line: passed {}, max state delta {:.2e}", cyc.passed, cyc.max_state_delta);
    for n in &cyc.notes {
        println!("  note: {n}");
    }
    Ok(())
}
