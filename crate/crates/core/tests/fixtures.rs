mod common;

use std::collections::BTreeSet;

use common::{bytes, flop, json_files, lenient, record};
use mra_core::audit::{audit_record, validate_record, Status, ANTI_K_ROWS, DERIVATION};
use mra_core::chambers::nef_cone;
use mra_core::model::{derive_anti_k_combo, parse_record, record_to_json, AntiKDerivation, FanoRecord};
use mra_core::{Error, QVec, Rat};

fn set(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn replace_row(r: &mut FanoRecord, label: &str, vec: &[i64], anti_k: i64) {
    let row = r
        .flop_tables
        .values_mut()
        .flat_map(|t| t.iter_mut())
        .find(|x| x.label == label)
        .unwrap();
    row.vec = QVec::from_i64s(vec);
    row.anti_k = Rat::from(anti_k);
}

fn reparse(r: &FanoRecord) -> Result<FanoRecord, Error> {
    parse_record(record_to_json(r).as_bytes())
}

#[test]
fn corrected_records_load_strictly() {
    let files = json_files("records");
    assert_eq!(files.len(), 9);
    for f in files {
        let r = record(&f);
        let rep = validate_record(&r).unwrap();
        assert_eq!(rep.status, Status::Pass, "{f}: {:?}", rep.sections);
    }
}

#[test]
fn records_round_trip_through_json() {
    for f in json_files("records") {
        let r = record(&f);
        assert_eq!(reparse(&r).unwrap(), r, "{f}");
    }
}

#[test]
fn mistake_fixtures_fail_strict_load_with_location() {
    for (f, row) in [
        ("mistakes/b5_n1.json", "l25"),
        ("mistakes/b4_n3.json", "l4"),
        ("mistakes/b2_n8.json", "l1"),
        ("mistakes/b3_n31.json", "l31"),
    ] {
        match parse_record(&bytes(f)) {
            Err(Error::Invariant { location, .. }) => assert!(location.contains(row), "{f}: {location}"),
            other => panic!("{f}: expected invariant error, got {other:?}"),
        }
    }
}

#[test]
fn b5_n1_printed_l65_and_l36_are_inconsistent() {
    // The printed rows disagree with -K; the shipped rows restore the E3 entry.
    let good = record("records/b5_n1.json");
    let mut r = good.clone();
    replace_row(&mut r, "l65", &[0, 1, 0, 0, 2], 2);
    let e = reparse(&r).unwrap_err().to_string();
    assert!(e.contains("l65") && e.contains("= 4"), "{e}");
    let mut r = good.clone();
    replace_row(&mut r, "l36", &[0, 0, 0, 1, 2], 3);
    let e = reparse(&r).unwrap_err().to_string();
    assert!(e.contains("l36") && e.contains("= 5"), "{e}");
}

#[test]
fn b5_n1_l68_duplicates_l58_consistently() {
    let r = record("records/b5_n1.json");
    let rows = r.anti_k_rows();
    let find = |l: &str| rows.iter().find(|x| x.label == l).unwrap();
    assert_eq!(find("l68").vec, find("l58").vec);
    assert_eq!(find("l68").anti_k, find("l58").anti_k);
}

#[test]
fn b4_n13_printed_l1_and_l35_are_inconsistent() {
    let good = record("records/b4_n13.json");
    let mut r = good.clone();
    r.rays[0].vec = QVec::from_i64s(&[1, 0, 1, 1]);
    assert!(reparse(&r).is_err());
    let mut r = good.clone();
    replace_row(&mut r, "l35", &[-1, -1, 1, 2], 0);
    let e = reparse(&r).unwrap_err().to_string();
    assert!(e.contains("l35"), "{e}");
}

#[test]
fn b4_n2_table_has_ten_inconsistent_rows() {
    let r = lenient("discrepant/b4_n2.json");
    let rep = validate_record(&r).unwrap();
    let keys: BTreeSet<String> = rep
        .section(ANTI_K_ROWS)
        .unwrap()
        .findings
        .iter()
        .filter_map(|f| f.key.clone())
        .collect();
    assert_eq!(keys, set(&["l51", "l61", "l32", "l42", "l14", "l44", "l54", "l64", "l56", "l66"]));
    assert_eq!(rep.section(DERIVATION).unwrap().status, Status::Fail);
}

#[test]
fn mistake_audits_flag_expected_rows_against_reference() {
    for (f, expected) in [
        ("b5_n1.json", set(&["l25", "l17", "l27", "l37", "l47", "l57", "l67"])),
        ("b4_n3.json", set(&["l4", "l21", "l12", "l43"])),
        ("b3_n31.json", set(&["l31", "l32"])),
    ] {
        let bad = lenient(&format!("mistakes/{f}"));
        let good = record(&format!("records/{f}"));
        let rep = audit_record(&bad, Some(&good), &[]).unwrap();
        assert_eq!(rep.flagged_keys(), expected, "{f}");
    }
}

#[test]
fn b2_n8_mistake_is_a_mislabelled_table() {
    let bad = lenient("mistakes/b2_n8.json");
    let cfg = flop("flops/b2_n8_e3.flop.json");
    let rep = audit_record(&bad, None, &[&cfg]).unwrap();
    let keys = rep.section("flop_tables").unwrap().findings.iter().filter_map(|f| f.key.clone()).collect::<BTreeSet<_>>();
    assert_eq!(keys, set(&["l2", "l11", "l21"]));
}

#[test]
fn derived_anti_k_matches_every_record() {
    for f in json_files("records") {
        let r = record(&f);
        let pairs: Vec<_> = r.anti_k_rows().into_iter().map(|x| (x.vec, x.anti_k)).collect();
        match derive_anti_k_combo(&pairs, r.rho()).unwrap() {
            AntiKDerivation::Unique(l) => assert_eq!(l, r.anti_k_combo, "{f}"),
            other => panic!("{f}: {other:?}"),
        }
    }
}

#[test]
fn b5_n1_target_edges_agree_with_derived_images() {
    use mra_core::exhaustion::derive_target_edges;
    let r = record("records/b5_n1.json");
    let all: Vec<usize> = (0..r.rays.len()).collect();
    for i in 3..6 {
        let stored = r.rays[i].contraction.as_ref().unwrap().target_edges.clone().unwrap();
        let mut stored: Vec<_> = stored.iter().map(|v| mra_core::canonicalize_ray(v).unwrap()).collect();
        stored.sort();
        let derived = derive_target_edges(&r, &all, i).unwrap();
        let mut derived: Vec<_> = derived.edges.iter().map(|v| mra_core::canonicalize_ray(v).unwrap()).collect();
        derived.sort();
        assert_eq!(stored, derived, "{}", r.rays[i].label);
    }
}

#[test]
fn nef_cones_are_pointed_and_full() {
    for f in json_files("records") {
        let r = record(&f);
        let nef = nef_cone(&r).unwrap();
        assert_eq!(nef.dim(), r.rho(), "{f}");
        assert!(matches!(nef.is_pointed(), mra_core::Pointedness::Pointed(_)), "{f}");
    }
}
