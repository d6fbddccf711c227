//! Replays the checked-in fuzz corpus through the fuzzed entry points.

use std::fs;
use std::path::PathBuf;

use qcech_core::doc::{load_workspace, parse_document, parse_group, validate_document};
use qcech_core::lattice::{validate_quantale, RawQuantale};
use qcech_core::limits::Limits;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn document_seeds_parse() {
    for (name, bytes) in seeds("parse_document") {
        let text = String::from_utf8(bytes).unwrap();
        assert!(parse_document(&text).is_ok(), "{name}");
    }
}

#[test]
fn workspace_seeds_validate() {
    let limits = Limits::default();
    for (name, bytes) in seeds("load_workspace") {
        let text = String::from_utf8(bytes).unwrap();
        let reports = validate_document(&text, &limits).unwrap();
        assert!(!reports.is_empty(), "{name}");
        assert_eq!(load_workspace(&text, &limits).is_ok(), reports.iter().all(|r| r.result.is_ok()), "{name}");
    }
}

#[test]
fn group_seeds_round_trip() {
    for (name, bytes) in seeds("parse_group") {
        let text = String::from_utf8(bytes).unwrap();
        if let Ok(g) = parse_group(&text) {
            assert_eq!(parse_group(&g.to_string()).unwrap().canonical(), g.canonical(), "{name}");
        }
    }
}

#[test]
fn quantale_seeds_validate() {
    for (name, data) in seeds("validate_quantale") {
        let n = (data[0] % 9) as usize;
        let (order, mul) = data[1..].split_at(n * n);
        let raw = RawQuantale {
            labels: (0..n).map(|i| i.to_string()).collect(),
            leq: (0..n).map(|i| (0..n).map(|j| order[i * n + j] & 1 == 1).collect()).collect(),
            mul: (0..n).map(|i| (0..n).map(|j| mul[i * n + j] as usize % n).collect()).collect(),
        };
        assert!(validate_quantale(raw, &Limits::default()).is_ok(), "{name}");
    }
}
