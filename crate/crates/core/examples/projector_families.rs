//! Lists the position projector families of a protocol with their sign
//! patterns and checks that each family is orthonormal.
//!
//! ```text
//! cargo run --example projector_families -- twostep2q
//! ```

use walkport::{ProtocolId, ProtocolSpec};

fn main() -> walkport::Result<()> {
    let id: ProtocolId = std::env::args().nth(1).as_deref().unwrap_or("line1q").parse()?;
    let spec = ProtocolSpec::new(id)?;
    for family in &spec.plan.positions {
        family.check_orthonormal()?;
        println!("family {} ({} projectors)", family.name, family.len());
        for p in family.projectors.iter().take(4) {
            println!("  {:<14} {}", p.name, p.expression());
        }
        if family.len() > 4 {
            println!("  ...");
        }
    }
    println!("{} joint branches", spec.plan.branch_count());
    Ok(())
}
