//! Prints the sparse state after each of the four walk steps of a protocol,
//! using the computational basis pair `|0>, |1>` as inputs so the kets stay
//! readable.
//!
//! ```text
//! cargo run --example trace_walk -- cycle1q
//! ```

use walkport::{InputPayload, ProtocolId, ProtocolSpec};

fn main() -> walkport::Result<()> {
    let id: ProtocolId = std::env::args().nth(1).as_deref().unwrap_or("line1q").parse()?;
    let spec = ProtocolSpec::new(id)?;
    let dim = spec.payload_dim();
    let mut alice = vec![0.0; dim];
    let mut bob = vec![0.0; dim];
    alice[0] = 1.0;
    bob[dim - 1] = 1.0;
    let payload = InputPayload::real(&alice, &bob)?;

    let names: Vec<&str> = spec.layout.names().collect();
    println!("registers: {}", names.join(" "));
    for (step, state) in spec.trace_walks(&payload)?.iter().enumerate() {
        println!("after W{step}: {} terms", state.len());
        for (label, amp) in state.iter().take(16) {
            println!("  {:+.4}{:+.4}i  {label}", amp.re, amp.im);
        }
        if state.len() > 16 {
            println!("  ...");
        }
    }
    Ok(())
}
