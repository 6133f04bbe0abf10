//! Cross-checks the sparse simulator against explicit dense unitaries for
//! all four protocols.
//!
//! ```text
//! cargo run --release --example dense_oracle
//! ```

use walkport::oracle::oracle_check;
use walkport::{InputPayload, ProtocolId};

fn main() -> walkport::Result<()> {
    for id in ProtocolId::ALL {
        let payloads = InputPayload::seeded_batch(0, 1 << id.qubits_per_party(), 4);
        let r = oracle_check(id, &payloads, 1e-10)?;
        println!(
            "{id:<10} dim {:>8}  state delta {:.1e}  unitarity {:.1e}  full matrices {}  passed {}",
            r.dense_dimension, r.max_state_delta, r.max_unitarity_deviation, r.full_matrices_checked, r.passed
        );
    }
    Ok(())
}
