//! Synthesizes the correction table of a protocol from scratch, checks it
//! against the bundled copy, and grades every row of the published table.
//!
//! ```text
//! cargo run --release --example correction_tables -- single2q
//! ```

use walkport::measure::{compare_tables, synthesize_table, RowStatus};
use walkport::{InputPayload, ProtocolId, ProtocolSpec};

fn main() -> walkport::Result<()> {
    let id: ProtocolId = std::env::args().nth(1).as_deref().unwrap_or("line1q").parse()?;
    let spec = ProtocolSpec::new(id)?;

    let fresh = synthesize_table(&spec)?;
    let bundled = spec.corrections()?;
    let same = fresh.to_json_string() == bundled.to_json_string();
    println!("{id}: {} synthesized rows, identical to bundled: {same}", fresh.len());

    let published = id.published_table()?;
    let payloads = InputPayload::seeded_batch(3, spec.payload_dim(), 8);
    let rows = compare_tables(&spec, &published, &fresh, &payloads)?;
    for r in &rows {
        if r.status != RowStatus::Match {
            println!(
                "{:>10} {:>6}  {:?}: published {:?}, synthesized {}",
                r.position, r.coin, r.status, r.reference, r.synthesized
            );
        }
    }
    let matches = rows.iter().filter(|r| r.status == RowStatus::Match).count();
    println!("{matches} of {} published rows match", rows.len());
    Ok(())
}
