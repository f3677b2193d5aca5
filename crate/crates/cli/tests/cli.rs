use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ar_lattice::dvr::Dvr;
use ar_lattice::lattice::{regular, Lattice};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ar-lattice"));
    c.env_remove("AR_LATTICE_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn heller(dir: &TempDir, name: &str, p: &str, lambda: &str, n: &str) -> PathBuf {
    let out = path(dir, name);
    let o = run(&["heller", "--p", p, "--lambda", lambda, "--n", n, "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

fn read_lattice(p: &Path) -> Lattice {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn heller_writes_lattice_files() {
    let dir = TempDir::new().unwrap();
    let z = read_lattice(&heller(&dir, "a.json", "5", "2", "3"));
    assert_eq!(z.rank(), 12);
    let z = read_lattice(&heller(&dir, "b.json", "2", "inf", "1"));
    assert_eq!(z.rank(), 4);
    let text = std::fs::read_to_string(path(&dir, "b.json")).unwrap();
    assert_eq!(serde_json::to_string_pretty(&z).unwrap() + "\n", text);
}

#[test]
fn lambda_is_reduced_with_a_warning() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "z.json");
    let o = run(&["heller", "--lambda", "7", "--p", "5", "--n", "1", "--out", s(&out)]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("reduced modulo 5 to 2"), "{}", stderr(&o));
    let want = heller(&dir, "w.json", "5", "2", "1");
    assert_eq!(read_lattice(&out), read_lattice(&want));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["heller", "--p", "5", "--lambda", "x", "--n", "1"],
        vec!["heller", "--p", "5", "--lambda", "1", "--n", "0"],
        vec!["heller", "--p", "4", "--lambda", "1", "--n", "1"],
        vec!["heller", "--p", "5", "--n", "1"],
        vec!["reduce", "/nonexistent/z.json"],
        vec!["frobnicate"],
        vec!["verify-paper", "--only", "11"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn reduce_tau_and_iso() {
    let dir = TempDir::new().unwrap();
    let z = heller(&dir, "z.json", "5", "1", "2");
    let zm = heller(&dir, "zm.json", "5", "4", "2");
    let o = run(&["reduce", s(&z)]);
    assert_eq!(stdout(&o).trim(), "M(1)_2 ⊕ M(4)_2");
    let t = path(&dir, "t.json");
    assert!(run(&["tau", s(&z), "--out", s(&t)]).status.success());
    assert_eq!(stdout(&run(&["iso", s(&t), s(&zm)])).trim(), "isomorphic: true");
    assert_eq!(stdout(&run(&["iso", s(&z), s(&zm)])).trim(), "isomorphic: false");
    let o = bin().args(["iso", s(&t), s(&zm), "--format", "json"]).env("AR_LATTICE_SEED", "99").output().unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["isomorphic"], true);
}

#[test]
fn ass_prints_the_checklist() {
    let dir = TempDir::new().unwrap();
    let z = heller(&dir, "z.json", "5", "0", "1");
    let o = run(&["ass", s(&z)]);
    assert!(o.status.success());
    let out = stdout(&o);
    for line in ["(i)", "(ii)", "(iii)"] {
        assert!(out.lines().any(|l| l.starts_with(line) && l.ends_with("pass")), "{out}");
    }
    assert!(out.contains("certified: true"));
    let o = run(&["ass", s(&z), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["certified"], true);
}

#[test]
fn component_verdicts_and_formats() {
    let dir = TempDir::new().unwrap();
    let z = heller(&dir, "z.json", "5", "inf", "1");
    let o = run(&["component", s(&z), "--depth", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).lines().any(|l| l == "verdict: ZAInfModTau"), "{}", stdout(&o));
    let o = run(&["component", s(&z), "--depth", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"]["kind"], "ZAInfModTau");
    assert_eq!(v["window"]["vertices"].as_array().unwrap().len(), 3);
    let dot = path(&dir, "w.dot");
    assert!(run(&["component", s(&z), "--depth", "2", "--format", "dot", "--out", s(&dot)]).status.success());
    assert!(std::fs::read_to_string(&dot).unwrap().contains("dashed"));
    let z = heller(&dir, "z1.json", "5", "1", "1");
    let o = run(&["component", s(&z), "--depth", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"]["kind"], "ZAInfModTauSq");
}

#[test]
fn failures_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let proj = path(&dir, "a.json");
    let a = regular(&Dvr::new(5, 16).unwrap(), 1);
    std::fs::write(&proj, serde_json::to_string(&a).unwrap()).unwrap();
    let o = run(&["component", s(&proj), "--depth", "2"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stdout(&o).contains("failure:"));
    assert_eq!(run(&["ass", s(&proj)]).status.code(), Some(1));
}

#[test]
fn quiver_windows_round_trip() {
    let dir = TempDir::new().unwrap();
    let q = path(&dir, "q.json");
    let o = run(&["quiver", "--len", "3", "--lo", "-2", "--hi", "2", "--k", "2", "--format", "json", "--out", s(&q)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&["quiver", s(&q)]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("axioms: ok"), "{out}");
    assert!(out.contains("τ-periods: 2 2 2 2 2 2"), "{out}");
    let o = run(&["quiver", s(&q), "--format", "json"]);
    assert_eq!(stdout(&o), std::fs::read_to_string(&q).unwrap());
    assert!(stdout(&run(&["quiver", "--len", "2", "--format", "dot"])).contains("dashed"));
}

#[test]
fn verify_paper_on_small_grids() {
    let o = run(&["verify-paper", "--p", "5", "--nmax", "0", "--only", "1,2,3,4,5,6,7,8,9"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stderr(&o).contains("empty"), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 9);
    let o = run(&["verify-paper", "--p", "2,5", "--nmax", "2", "--only", "1,3,9", "--format", "json"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["cells"], 14);
    assert!(v["criteria"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    let o = run(&["verify-paper", "--p", "2,5", "--nmax", "2", "--only", "8"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL  8"));
}
