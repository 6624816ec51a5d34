use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use riskroute::analysis::instance_mu;
use riskroute::instances::OracleSidecar;
use riskroute::report::{read_bound_csv, BoundRow};
use riskroute::NetworkInstance;
use tempfile::TempDir;

fn riskroute(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riskroute"))
        .current_dir(dir)
        .env_remove("RISKROUTE_OUT_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = riskroute(dir, args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn rows(path: PathBuf) -> Vec<BoundRow> {
    read_bound_csv(fs::read(path).unwrap().as_slice()).unwrap()
}

#[test]
fn generate_structural_level_two() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["generate", "--family", "structural", "--level", "2", "--gamma-kappa", "1"]);
    let inst = NetworkInstance::read(tmp.path().join("structural-i2-gk1.json")).unwrap();
    assert_eq!(inst.vertex_count(), 8);
    let side = OracleSidecar::read(tmp.path().join("structural-i2-gk1.oracle.json")).unwrap();
    assert_eq!(side.oracle.expected_pra, 5.0);
}

#[test]
fn generate_braess() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["generate", "--family", "braess", "--out", "b.json"]);
    assert_eq!(NetworkInstance::read(tmp.path().join("b.json")).unwrap().vertex_count(), 4);
    ok(tmp.path(), &["generate", "--family", "braess-classic", "--out", "c.json"]);
    assert_eq!(NetworkInstance::read(tmp.path().join("c.json")).unwrap().vertex_count(), 4);
}

#[test]
fn generate_functional_level_three_has_mu_seven_eighths() {
    let tmp = TempDir::new().unwrap();
    let stdout = ok(tmp.path(), &["generate", "--family", "functional", "--level", "3", "--out", "f.json"]);
    assert!(stdout.contains("0.875"), "{stdout}");
    let inst = NetworkInstance::read(tmp.path().join("f.json")).unwrap();
    let side = OracleSidecar::read(tmp.path().join("f.oracle.json")).unwrap();
    let x = inst.induced_edge_flow(&side.oracle.rawe).unwrap();
    assert!((instance_mu(&inst, &x).unwrap() - 0.875).abs() < 1e-12);
}

#[test]
fn generate_seeded_families_are_deterministic() {
    let tmp = TempDir::new().unwrap();
    for family in ["domino", "random"] {
        ok(tmp.path(), &["generate", "--family", family, "--seed", "11", "--out", "a.json"]);
        ok(tmp.path(), &["generate", "--family", family, "--seed", "11", "--out", "b.json"]);
        assert_eq!(fs::read(tmp.path().join("a.json")).unwrap(), fs::read(tmp.path().join("b.json")).unwrap());
    }
    assert_eq!(NetworkInstance::read(tmp.path().join("a.json")).unwrap().source(), 0);
}

#[test]
fn output_directory_from_environment() {
    let tmp = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_riskroute"))
        .current_dir(tmp.path())
        .env("RISKROUTE_OUT_DIR", tmp.path().join("runs"))
        .args(["generate", "--family", "braess"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(tmp.path().join("runs/braess-gk1.json").exists());
    assert!(tmp.path().join("runs/braess-gk1.oracle.json").exists());
}

#[test]
fn verify_structural_levels_pass() {
    let tmp = TempDir::new().unwrap();
    for level in 1..=4 {
        let file = format!("s{level}.json");
        ok(tmp.path(), &["generate", "--family", "structural", "--level", &level.to_string(), "--out", &file]);
        let stdout = ok(tmp.path(), &["verify", &file]);
        assert!(stdout.contains("checks passed"), "{stdout}");
    }
}

#[test]
fn verify_corrupted_instance_fails() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["generate", "--family", "structural", "--level", "2", "--out", "s.json"]);
    let path = tmp.path().join("s.json");
    let mut doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    // edge 2 is a risky edge with constant mean 1
    doc["edges"][2]["latency"]["value"] = 2.0.into();
    fs::write(&path, doc.to_string()).unwrap();
    let out = riskroute(tmp.path(), &["verify", "s.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("checks failed"));
}

#[test]
fn verify_functional_level_two_bound() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["generate", "--family", "functional", "--level", "2", "--out", "f.json"]);
    ok(tmp.path(), &["verify", "f.json", "--out", "v.csv"]);
    let smooth = rows(tmp.path().join("v.csv")).into_iter().find(|r| r.kind == "functional-smooth").unwrap();
    assert!((smooth.pra - 5.0).abs() < 1e-12);
    assert!((smooth.bound - 8.0).abs() < 1e-12);
    assert_eq!(smooth.status, "ok");
}

#[test]
fn verify_without_sidecar_is_an_input_error() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["generate", "--family", "braess-classic", "--out", "c.json"]);
    assert_eq!(riskroute(tmp.path(), &["verify", "c.json"]).status.code(), Some(2));
}

#[test]
fn solve_braess_common_cost() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["generate", "--family", "braess", "--gamma-kappa", "1", "--out", "b.json"]);
    ok(tmp.path(), &["solve", "b.json"]);
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("b.solution.json")).unwrap()).unwrap();
    assert!((doc["rawe"]["common_cost"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    assert!((doc["pra"].as_f64().unwrap() - 3.0).abs() < 1e-9);
}

#[test]
fn analyze_zero_gamma_gives_unit_pra() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["generate", "--family", "structural", "--level", "2", "--out", "s.json"]);
    ok(tmp.path(), &["analyze", "s.json", "--gamma", "0", "--out", "a.csv"]);
    assert!(rows(tmp.path().join("a.csv")).iter().all(|r| r.pra == 1.0));
}

#[test]
fn analyze_structural_level_two_has_eta_four() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["generate", "--family", "structural", "--level", "2", "--out", "s.json"]);
    ok(tmp.path(), &["analyze", "s.json"]);
    let rows = rows(tmp.path().join("s.bounds.csv"));
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.eta == 4 && r.i == Some(2)));
}

#[test]
fn malformed_instance_exits_two() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("bad.json"), "{\"n\": 2}").unwrap();
    for cmd in ["solve", "analyze", "verify"] {
        assert_eq!(riskroute(tmp.path(), &[cmd, "bad.json"]).status.code(), Some(2), "{cmd}");
    }
    assert_eq!(riskroute(tmp.path(), &["solve", "missing.json"]).status.code(), Some(2));
}

#[test]
fn sweep_structural_pra_column() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["sweep", "--family", "structural", "--levels", "1,2,3,4", "--gamma-kappa", "1", "--out", "s.csv"]);
    let rows = rows(tmp.path().join("s.csv"));
    let pra: Vec<f64> = rows.iter().map(|r| r.pra).collect();
    for (got, want) in pra.iter().zip([3.0, 5.0, 9.0, 17.0]) {
        assert!((got - want).abs() < 1e-5 * want, "{pra:?}");
    }
    assert!(rows.iter().all(|r| r.status == "ok"));
}

#[test]
fn sweep_zero_gamma_kappa_gives_unit_pra() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["sweep", "--family", "structural", "--gamma-kappa", "0", "--out", "s.csv"]);
    let rows = rows(tmp.path().join("s.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.pra == 1.0));
}

#[test]
fn sweep_functional_mu_column() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["sweep", "--family", "functional", "--levels", "1,2,3", "--tolerance", "1e-12", "--out", "f.csv"]);
    let mu: Vec<f64> = rows(tmp.path().join("f.csv")).iter().map(|r| r.mu.unwrap()).collect();
    for (got, want) in mu.iter().zip([0.5, 0.75, 0.875]) {
        assert!((got - want).abs() < 1e-12, "{mu:?}");
    }
}

#[test]
fn sweep_grid_order_and_bytes_are_stable() {
    let tmp = TempDir::new().unwrap();
    let args = |out: &'static str| {
        ["sweep", "--family", "structural", "--levels", "3,1,2", "--gamma-kappa", "2,0.5", "--out", out]
    };
    ok(tmp.path(), &args("a.csv"));
    ok(tmp.path(), &args("b.csv"));
    let a = fs::read(tmp.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(tmp.path().join("b.csv")).unwrap());
    let ids: Vec<String> = rows(tmp.path().join("a.csv")).into_iter().map(|r| r.id).collect();
    assert_eq!(
        ids,
        [
            "structural-i3-gk2",
            "structural-i3-gk0.5",
            "structural-i1-gk2",
            "structural-i1-gk0.5",
            "structural-i2-gk2",
            "structural-i2-gk0.5"
        ]
    );

    for out in ["r1.csv", "r2.csv"] {
        ok(tmp.path(), &["sweep", "--family", "random", "--samples", "12", "--seed", "5", "--out", out]);
    }
    assert_eq!(fs::read(tmp.path().join("r1.csv")).unwrap(), fs::read(tmp.path().join("r2.csv")).unwrap());
}

#[test]
fn sweep_random_rows_are_synthetic_and_within_bound() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["sweep", "--family", "random", "--samples", "10", "--degree", "2", "--out", "r.csv"]);
    let rows = rows(tmp.path().join("r.csv"));
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.id.starts_with("synthetic-") && r.status == "ok"));
}

#[test]
fn conjecture_sweep_runs() {
    let tmp = TempDir::new().unwrap();
    let stdout = ok(tmp.path(), &["sweep", "--family", "conjecture", "--samples", "8", "--out", "c.csv"]);
    assert!(stdout.contains("experimental"));
    assert!(rows(tmp.path().join("c.csv")).iter().all(|r| r.kind == "conjecture-eta"));
}

#[test]
fn empty_or_invalid_grid_exits_two() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(riskroute(tmp.path(), &["sweep", "--family", "random", "--samples", "0"]).status.code(), Some(2));
    assert_eq!(riskroute(tmp.path(), &["sweep", "--family", "structural", "--levels", "0"]).status.code(), Some(2));
    assert_eq!(riskroute(tmp.path(), &["generate", "--family", "structural", "--level", "0"]).status.code(), Some(2));
}
