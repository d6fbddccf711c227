use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/data");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn qcech(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcech")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn validate_chain() {
    let o = qcech(&["validate", &data("chain.qc")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("quantale c3: ok (3 elements;"));
}

#[test]
fn validate_non_associative() {
    let o = qcech(&["validate", &data("nonassoc.qc")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("not associative at (y, x, x)"));
}

#[test]
fn validate_zmod_shorthand() {
    let o = qcech(&["validate", &data("zmod.qc")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("quantale z6: ok (4 elements;"));
}

#[test]
fn parse_error_has_position() {
    let dir = std::env::temp_dir().join("qcech-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("broken.qc");
    std::fs::write(&file, "[quantale q]\nelements 0 1\n").unwrap();
    let o = qcech(&["validate", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2, column 1"));
}

#[test]
fn pseudocircle_cohomology() {
    let o = qcech(&["cohomology", &data("pseudocircle.qc"), "z", "--max-q", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "presheaf z at {a,b,c,d}\nterminal cover {{a}, {b}, {a,b,c}, {a,b,d}} of 40 covers\nH^0 = Z\nH^1 = Z\nH^2 = 0\n"
    );
}

#[test]
fn funring_pullback_cohomology() {
    let o = qcech(&["cohomology", &data("funring.qc"), "pulled", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["cohomology"][0]["group"], "Z^2");
    assert_eq!(v["cohomology"][0]["factors"], serde_json::json!([0, 0]));
}

#[test]
fn non_cover_is_rejected() {
    let o = qcech(&["cohomology", &data("pseudocircle.qc"), "z", "--cover", "{a},{b}"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("joins to {a,b}"));
}

#[test]
fn sheafcheck_verdicts() {
    let o = qcech(&["sheafcheck", &data("pseudocircle.qc"), "constant"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("not-injective at cover {} of {}"));
    assert_eq!(qcech(&["sheafcheck", &data("pseudocircle.qc"), "z"]).status.code(), Some(0));
    assert_eq!(qcech(&["sheafcheck", &data("funring.qc"), "pulled"]).status.code(), Some(0));
}

#[test]
fn verify_commands() {
    let o = qcech(&["verify", "tau-theta", "2", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("summary: pass 1, fail 0, skipped 0, observed 0\n"));

    let o = qcech(&["verify", "main-iso", &data("zmod.qc"), "broken", "g"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("conclusion: skipped"));

    let o = qcech(&["verify", "quotient", "zmod4", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("direct image: (0)->(2) (1)->(1)"));

    let o = qcech(&["verify", "cover-iso", &data("funring.qc"), "ideals", "z"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("pass 5"));

    let o = qcech(&["verify", "change-of-base", &data("funring.qc"), "tau", "z"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn output_is_deterministic() {
    let args = ["--jobs", "2", "verify", "corpus", "--suite", "main-iso", "--format", "json"];
    let a = qcech(&args);
    let b = qcech(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn cap_exit_code() {
    let o = Command::new(env!("CARGO_BIN_EXE_qcech"))
        .args(["validate", &data("zmod.qc")])
        .env("QCECH_MAX_ELEMENTS", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
}
