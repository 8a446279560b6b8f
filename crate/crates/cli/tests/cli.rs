use serde_json::Value;
use std::process::{Command, Output};

fn gjfe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gjfe")).args(args).output().expect("spawn gjfe")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn gamma_table_gl2_f3_has_three_rows() {
    let out = gjfe(&["gamma-table", "--field", "p=3,deg=1,n=2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| &r[6] == "true"));
    assert!(rows.iter().any(|r| &r[7] == "1" && &r[8] == "1"));
}

#[test]
fn gamma_table_twists() {
    let out = gjfe(&["gamma-table", "--field", "p=5,n=1", "--twists"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1 + 4 * 4);
}

#[test]
fn predict_self_dual_cuspidal() {
    let out = gjfe(&["predict", "--param", "xi:q=3,n=2,a=2"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["predicted_gamma"], "1");
    assert_eq!(v["duality"]["self_dual"], true);
}

#[test]
fn predict_modular_steinberg() {
    let out = gjfe(&["predict", "--param", "xi:q=3,n=2,a=2", "--ring", "modf:l=2"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["predicted_gamma"], "q^{-1}");
}

#[test]
fn exit_codes() {
    assert_eq!(gjfe(&["verify-gl1", "--field", "p=3", "--ring", "bogus"]).status.code(), Some(3));
    assert_eq!(gjfe(&["verify-gl1", "--field", "p=4"]).status.code(), Some(3));
    assert_eq!(gjfe(&["verify-gl1", "--field", "p=3", "--ring", "modf:l=3"]).status.code(), Some(3));
    assert_eq!(gjfe(&["verify-gl1", "--field", "p=3,n=2"]).status.code(), Some(3));
    assert_eq!(gjfe(&["gamma-table", "--field", "p=3,n=2", "--budget", "10"]).status.code(), Some(2));
}

#[test]
fn distinction_twisted_and_linear() {
    let out = gjfe(&["distinction", "--pair", "twisted:m=1,q=3", "--pair", "linear:m=1,q=3"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["pass"], true);
    for p in v["report"]["pairs"].as_array().unwrap() {
        let rows = p["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows.iter().filter(|r| r["distinguished"] == true).count(), 1);
    }
}

#[test]
fn double_cosets_twisted_stable() {
    let out = gjfe(&["double-cosets", "--pair", "twisted:m=1,q=3"]);
    assert!(out.status.success());
    let rep = &json(&out)["report"]["pairs"][0];
    assert_eq!(rep["total"], 48);
    assert_eq!(rep["all_stable"], true);
}

#[test]
fn gl1_and_cuspidal_and_fourier() {
    for args in [
        &["verify-gl1", "--field", "p=5"][..],
        &["verify-gl1", "--field", "p=5", "--ring", "modf:l=2"],
        &["verify-cuspidal-gjfe", "--field", "p=3,n=2"],
        &["verify-multiplicativity", "--field", "p=3,n=2"],
        &["verify-fourier", "--field", "p=3,deg=2,n=1", "--trials", "4"],
        &["verify-modular", "--field", "p=3,n=2", "--ring", "modf:l=5"],
    ] {
        let out = gjfe(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(json(&out)["pass"], true);
    }
}

#[test]
fn reports_are_deterministic() {
    let args = ["verify-fourier", "--field", "p=2,n=2", "--trials", "3", "--seed", "7"];
    let a = gjfe(&args);
    let b = gjfe(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["seed"], 7);
}

#[test]
fn out_file() {
    let dir = std::env::temp_dir().join(format!("gjfe-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("r.json");
    let out = gjfe(&["verify-gl1", "--field", "p=3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["command"], "verify-gl1");
    std::fs::remove_dir_all(dir).ok();
}
