use std::path::Path;
use std::process::{Command, Output};

use mrc_core::io::{parse_coupling, parse_lifted};
use mrc_core::Rational;

const MU: &str = r#"{"atoms":[{"x":-1,"w":"1/2"},{"x":1,"w":"1/2"}]}"#;
const NU: &str = r#"{"atoms":[{"x":-2,"w":"1/4"},{"x":0,"w":"1/2"},{"x":2,"w":"1/4"}]}"#;
// kernels at -1 and 1 centred at -2 and 2: deviation 1, dispersed outward
const PI: &str = r#"{"points":[{"x":-1,"y":-3,"w":"1/4"},{"x":-1,"y":-1,"w":"1/4"},{"x":1,"y":1,"w":"1/4"},{"x":1,"y":3,"w":"1/4"}]}"#;

fn mrc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrc")).current_dir(dir).env_remove("MRC_MODE").args(args).output().unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [("mu.json", MU), ("nu.json", NU), ("pi.json", PI), ("bad.json", "{\"atoms\": [")] {
        std::fs::write(dir.path().join(name), body).unwrap();
    }
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn hf_prints_a_coupling() {
    let dir = setup();
    let o = mrc(dir.path(), &["hf", "mu.json", "nu.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let pi = parse_coupling::<Rational>(&stdout(&o)).unwrap();
    assert_eq!(pi.points().len(), 4);
}

#[test]
fn itmc_lifted_document_collapses_to_a_martingale() {
    let dir = setup();
    let o = mrc(dir.path(), &["itmc", "mu.json", "nu.json", "--lifted"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let l = parse_lifted::<Rational>(&stdout(&o)).unwrap();
    assert!(l.is_martingale());
    assert!(l.collapse().is_martingale());
}

#[test]
fn rearrange_writes_to_out_and_summarises() {
    let dir = setup();
    for oracle in ["direct", "wiesel"] {
        let o = mrc(dir.path(), &["rearrange", "pi.json", "--oracle", oracle, "--out", "m.json"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert_eq!(stdout(&o), "aw1 = 1\nbound = 1\n");
        let m = parse_coupling::<Rational>(&std::fs::read_to_string(dir.path().join("m.json")).unwrap()).unwrap();
        assert!(m.is_martingale());
    }
}

#[test]
fn aw_with_nested_oracle() {
    let dir = setup();
    let o = mrc(dir.path(), &["aw", "pi.json", "pi.json", "--nested-oracle"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("aw_pow = 0"));
    assert!(stderr(&o).contains("nested_pow = 0"));
}

#[test]
fn mode_from_environment() {
    let dir = setup();
    let exact = mrc(dir.path(), &["hf", "mu.json", "nu.json"]);
    let approx = Command::new(env!("CARGO_BIN_EXE_mrc"))
        .current_dir(dir.path())
        .env("MRC_MODE", "approx")
        .args(["hf", "mu.json", "nu.json"])
        .output()
        .unwrap();
    assert_eq!(approx.status.code(), Some(0));
    assert!(stdout(&exact).contains("\"1/4\""));
    assert!(stdout(&approx).contains("\"0.25\""));
}

#[test]
fn exit_codes() {
    let dir = setup();
    // reversed order: ν is not dominated by μ
    assert_eq!(mrc(dir.path(), &["itmc", "nu.json", "mu.json"]).status.code(), Some(2));
    assert_eq!(mrc(dir.path(), &["hf", "bad.json", "nu.json"]).status.code(), Some(3));
    assert_eq!(mrc(dir.path(), &["hf", "missing.json", "nu.json"]).status.code(), Some(3));
    assert_eq!(mrc(dir.path(), &["--mode", "approx", "stability", "--preset", "counterexample", "--k", "2"]).status.code(), Some(4));
    assert_eq!(mrc(dir.path(), &["frobnicate"]).status.code(), Some(64));
    assert_eq!(mrc(dir.path(), &["aw", "pi.json", "pi.json", "--rho", "0.5"]).status.code(), Some(1));
}

#[test]
fn jump_stability_csv() {
    let dir = setup();
    let o = mrc(dir.path(), &["stability", "--preset", "jump", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("n,aw1_lifted,aw1,w1_mu,w1_nu"));
    assert_eq!(lines.count(), 4);
}
