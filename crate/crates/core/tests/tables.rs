//! Bundled correction tables against fresh synthesis and the published rows.

use walkport::measure::{compare_tables, synthesize_table, RowStatus};
use walkport::{CorrectionTable, InputPayload, ProtocolId, ProtocolSpec};

#[test]
fn bundled_tables_regenerate_byte_for_byte() {
    for id in ProtocolId::ALL {
        let spec = ProtocolSpec::new(id).unwrap();
        let fresh = synthesize_table(&spec).unwrap();
        let path = format!("{}/data/corrections/{id}.json", env!("CARGO_MANIFEST_DIR"));
        let on_disk = std::fs::read_to_string(path).unwrap();
        assert_eq!(fresh.to_json_string(), on_disk, "{id}");
    }
}

#[test]
fn table_sizes() {
    let sizes = [
        (ProtocolId::Line1Q, 36),
        (ProtocolId::Cycle1Q, 16),
        (ProtocolId::Single2Q, 1296),
        (ProtocolId::TwoStep2Q, 1296),
    ];
    for (id, n) in sizes {
        assert_eq!(ProtocolSpec::new(id).unwrap().corrections().unwrap().len(), n, "{id}");
    }
}

#[test]
fn json_round_trip_preserves_rows() {
    let table = ProtocolSpec::new(ProtocolId::Single2Q).unwrap().corrections().unwrap().clone();
    let back = CorrectionTable::from_json_str(&table.to_json_string()).unwrap();
    assert_eq!(back.rows, table.rows);
    assert_eq!(back.to_json_string(), table.to_json_string());
}

fn graded(id: ProtocolId) -> Vec<(String, String, RowStatus)> {
    let spec = ProtocolSpec::new(id).unwrap();
    let payloads = InputPayload::seeded_batch(5, spec.payload_dim(), 6);
    compare_tables(&spec, &id.published_table().unwrap(), spec.corrections().unwrap(), &payloads)
        .unwrap()
        .into_iter()
        .filter(|r| r.status != RowStatus::Match)
        .map(|r| (r.position, r.coin, r.status))
        .collect()
}

fn row(p: &str, c: &str, s: RowStatus) -> (String, String, RowStatus) {
    (p.into(), c.into(), s)
}

#[test]
fn line_table_has_one_misprinted_row() {
    assert_eq!(graded(ProtocolId::Line1Q), vec![row("02/+-", "++", RowStatus::Discrepant)]);
}

#[test]
fn cycle_table_matches_entirely() {
    assert!(graded(ProtocolId::Cycle1Q).is_empty());
}

#[test]
fn single_step_table_flags() {
    assert_eq!(
        graded(ProtocolId::Single2Q),
        vec![
            row("0000", "++,+-", RowStatus::Discrepant),
            row("0000", "--,+-", RowStatus::Missing),
            row("0000", "--,--", RowStatus::Discrepant),
        ]
    );
}

#[test]
fn two_step_table_flags() {
    assert_eq!(
        graded(ProtocolId::TwoStep2Q),
        vec![row("00", "--,+-", RowStatus::Missing), row("00", "--,--", RowStatus::Discrepant)]
    );
}

#[test]
fn corrupted_family_breaks_fidelity() {
    let spec = ProtocolSpec::new(ProtocolId::Line1Q).unwrap();
    let bad = spec.corrections().unwrap().corrupted("22");
    let p = InputPayload::seeded_batch(2, 2, 1).remove(0);
    let branches = walkport::enumerate_branches_with(&spec, &p, &bad).unwrap();
    assert!(branches.iter().filter(|b| b.position.starts_with("22")).any(|b| b.fidelity < 0.99));
    assert!(branches.iter().filter(|b| !b.position.starts_with("22")).all(|b| b.fidelity > 1.0 - 1e-9));
}
