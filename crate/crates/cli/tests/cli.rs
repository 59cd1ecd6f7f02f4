use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

use lao_cli::{run, RunReport, EXIT_ERROR, EXIT_FAIL, EXIT_OK};
use lao_core::fixtures;
use lao_core::verification::{generate_model, GenParams};

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn lao(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["lao"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, contents: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, contents).unwrap();
    p.to_str().unwrap().to_string()
}

fn fixture(dir: &TempDir, name: &str) -> String {
    write(dir, &format!("{name}.json"), fixtures::source(name).unwrap())
}

fn report(path: &Path) -> RunReport {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn toy(desires: Value, extra_label: bool) -> String {
    let mut labels = vec![json!({"agent": "a", "role": "r"})];
    if extra_label {
        labels.push(json!({"agent": "a", "role": "s"}));
    }
    json!({
        "facts": ["p"],
        "agents": ["a"],
        "roles": ["r", "s"],
        "worlds": [{"id": "w0", "facts": []}, {"id": "w1", "facts": ["p"]}],
        "transitions": [
            {"from": "w0", "to": "w1", "labels": labels},
            {"from": "w1", "to": "w0"}
        ],
        "capabilities": {"c": {"a": {"default": ["p"]}}},
        "orgs": [{
            "id": "O",
            "members": {"default": ["a"]},
            "roles": {"default": ["r"]},
            "rea": {"default": [{"agent": "a", "role": "r"}]},
            "dep": {"default": [["r", "r"]]},
            "desires": {"default": desires}
        }]
    })
    .to_string()
}

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let gas0 = fixture(&dir, "gas0");
    let r = lao(&["validate", &gas0]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r.out.contains("valid"));

    // Dropping the reflexive pair breaks the dependency order.
    let mut v: Value = serde_json::from_str(fixtures::source("fig1").unwrap()).unwrap();
    let broken = toy(json!([]), false).replace(r#"[["r","r"]]"#, "[]");
    assert_ne!(broken, toy(json!([]), false));
    let r = lao(&["validate", &write(&dir, "broken.json", &broken)]);
    assert_eq!(r.code, EXIT_FAIL);
    assert!(r.out.contains("Reflexivity"), "{}", r.out);

    // A label by a pair that is not role-enacting.
    let r = lao(&["validate", &write(&dir, "label.json", &toy(json!([]), true))]);
    assert_eq!(r.code, EXIT_FAIL);
    assert!(r.out.contains("LabelWithoutRea"), "{}", r.out);

    v["worlds"] = json!("nope");
    let r = lao(&["validate", &write(&dir, "bad.json", &v.to_string())]);
    assert_eq!(r.code, EXIT_ERROR);

    let missing = dir.path().join("missing.json");
    let r = lao(&["validate", missing.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(r.err.contains("reading"));
}

#[test]
fn check_examples() {
    let dir = TempDir::new().unwrap();
    let gas0 = fixture(&dir, "gas0");
    let fig1 = fixture(&dir, "fig1");
    let r = lao(&[
        "check",
        &gas0,
        "-f",
        "desire(Ogas, provide_gas) -> I[monopolist] provide_gas",
        "--all",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.out);
    assert!(!r.out.contains("false"));

    let r = lao(&["check", &fig1, "-f", "E[a] p", "--world", "w0"]);
    assert_eq!(r.code, EXIT_FAIL);
    assert!(r.out.starts_with("w0") && r.out.contains("false"));

    let r = lao(&["check", &fig1, "-f", "G[a] p", "--world", "w0"]);
    assert_eq!(r.code, EXIT_OK);

    let r = lao(&["check", &fig1, "-f", "((p"]);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(r.err.contains("column"), "{}", r.err);

    let r = lao(&["check", &fig1, "-f", "C[nobody] p"]);
    assert_eq!(r.code, EXIT_ERROR);
    let r = lao(&["check", &fig1, "-f", "p", "--world", "w9"]);
    assert_eq!(r.code, EXIT_ERROR);
    let r = lao(&["check", &fig1, "-f", "p", "--world", "w0", "--all"]);
    assert_eq!(r.code, EXIT_ERROR);
}

#[test]
fn check_with_oracle() {
    let dir = TempDir::new().unwrap();
    let gas0 = fixture(&dir, "gas0prime");
    let json_path = dir.path().join("r.json");
    let r = lao(&[
        "check",
        &gas0,
        "-f",
        "AF H[t:trader] buy_gas",
        "--oracle",
        "--json",
        json_path.to_str().unwrap(),
    ]);
    assert!(r.out.contains("oracle agreement: yes"), "{}", r.out);
    let rep = report(&json_path);
    assert_eq!(rep.results["agreement"], json!(true));
    for row in rep.results["worlds"].as_array().unwrap() {
        assert_eq!(row["holds"], row["oracle"]);
    }

    let big = (0..)
        .map(|s| generate_model(&GenParams::new(s, [2, 2, 1, 12, 2])).unwrap())
        .find(|m| m.world_count() > 8)
        .unwrap();
    let path = write(&dir, "big.json", &big.to_json());
    let r = lao(&["check", &path, "-f", "AF p0"]);
    assert_ne!(r.code, EXIT_ERROR);
    let r = lao(&["check", &path, "-f", "AF p0", "--oracle"]);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(r.err.contains("limited to 8"), "{}", r.err);
}

#[test]
fn analyze_case_studies() {
    let dir = TempDir::new().unwrap();
    let gas0 = fixture(&dir, "gas0");
    let gas0prime = fixture(&dir, "gas0prime");
    let out = dir.path().join("a.json");
    let r = lao(&["analyze", &gas0, "--org", "Ogas", "--json", out.to_str().unwrap()]);
    assert!(r.out.contains("classification: hierarchy, flat-hierarchy"), "{}", r.out);
    let rep = report(&out);
    let holds = |rep: &RunReport, p: &str| {
        rep.results["verdicts"]
            .as_array()
            .unwrap()
            .iter()
            .find(|v| v["property"] == p)
            .unwrap()["holds"]
            .as_bool()
            .unwrap()
    };
    for p in ["well-defined", "successful", "good", "delegation-closed"] {
        assert!(holds(&rep, p), "{p}");
    }
    let r = lao(&[
        "analyze", &gas0, "--org", "Ogas", "--property", "well-defined", "--property", "good",
    ]);
    assert_eq!(r.code, EXIT_OK);

    let r = lao(&["analyze", &gas0prime, "--org", "Ogas", "--json", out.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_FAIL);
    assert!(r.out.contains("classification: network, fully-connected-network, team"));
    let rep = report(&out);
    assert!(holds(&rep, "well-defined") && holds(&rep, "successful"));
    assert!(!holds(&rep, "efficient"));

    let r = lao(&["analyze", &gas0, "--org", "Nope"]);
    assert_eq!(r.code, EXIT_ERROR);
    let r = lao(&["analyze", &gas0, "--org", "Ogas", "--property", "tidy"]);
    assert_eq!(r.code, EXIT_ERROR);
}

#[test]
fn analyze_desire_free_org() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "toy.json", &toy(json!([]), false));
    let r = lao(&["analyze", &path, "--org", "O"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.out);
    assert!(!r.out.contains("fails"));
}

#[test]
fn analyze_pools() {
    let dir = TempDir::new().unwrap();
    let gas0 = fixture(&dir, "gas0");
    let good = write(&dir, "pool.json", r#"["provide_gas", "buy_gas & local_flow"]"#);
    let r = lao(&["analyze", &gas0, "--org", "Ogas", "--pool", &good, "--property", "good"]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    for bad in [r#"["!provide_gas"]"#, "[]", r#"{"p": 1}"#, r#"["(("]"#] {
        let pool = write(&dir, "bad.json", bad);
        let r = lao(&["analyze", &gas0, "--org", "Ogas", "--pool", &pool]);
        assert_eq!(r.code, EXIT_ERROR, "{bad}");
    }
}

#[test]
fn axioms_on_a_fixture() {
    let dir = TempDir::new().unwrap();
    let fig1 = fixture(&dir, "fig1");
    let out = dir.path().join("ax.json");
    let r = lao(&["axioms", &fig1, "--json", out.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_FAIL);
    assert!(r.out.contains("A4    FAIL"), "{}", r.out);
    assert!(r.out.contains("A1    pass"));
    let rep = report(&out);
    assert!(rep.model_digest.is_some());
    // Every printed verdict is in the report.
    let schemas = rep.results["schemas"].as_array().unwrap();
    for line in r.out.lines().filter(|l| l.contains(" pass ") || l.contains(" FAIL ")) {
        let id = line.split_whitespace().next().unwrap();
        let s = schemas.iter().find(|s| s["id"] == id).unwrap();
        assert_eq!(s["failures"] == 0, line.contains(" pass "), "{line}");
    }
    let pool = write(&dir, "pool.json", r#"["p", "q", "p & q"]"#);
    let r = lao(&["axioms", &fig1, "--pool", &pool]);
    assert_ne!(r.code, EXIT_ERROR, "{}", r.err);
}

#[test]
fn axioms_on_generated_models() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let r = lao(&["axioms", "--random", "3", "--seed", "7", "--json", p.to_str().unwrap()]);
        assert_ne!(r.code, EXIT_ERROR, "{}", r.err);
    }
    let (mut ra, mut rb) = (report(&a), report(&b));
    ra.timing_ms = 0.0;
    rb.timing_ms = 0.0;
    ra.command.clear();
    rb.command.clear();
    assert_eq!(ra, rb);
    assert_eq!(ra.results["models"], json!(3));

    let r = lao(&["axioms", "--random", "2", "--bounds", "0,3,2,8,3"]);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(r.err.contains("facts"), "{}", r.err);
    let r = lao(&["axioms", "--random", "2", "--bounds", "4,3"]);
    assert_eq!(r.code, EXIT_ERROR);
    let r = lao(&["axioms"]);
    assert_eq!(r.code, EXIT_ERROR);
}

#[test]
fn fixtures_and_help() {
    let r = lao(&["fixture"]);
    assert_eq!(r.code, EXIT_OK);
    assert_eq!(r.out.lines().count(), fixtures::NAMES.len());
    let r = lao(&["fixture", "gas0"]);
    assert_eq!(r.out, fixtures::source("gas0").unwrap());
    assert_eq!(lao(&["fixture", "gas1"]).code, EXIT_ERROR);
    assert_eq!(lao(&["--help"]).code, EXIT_OK);
    assert_eq!(lao(&["frobnicate"]).code, EXIT_ERROR);
}

#[test]
fn binary_exit_codes() {
    let dir = TempDir::new().unwrap();
    let fig1 = PathBuf::from(fixture(&dir, "fig1"));
    let status = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_lao"))
            .arg("check")
            .arg(&fig1)
            .args(args)
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(status(&["-f", "H[a] p", "--world", "w0"]), Some(0));
    assert_eq!(status(&["-f", "E[a] p", "--world", "w0"]), Some(1));
    assert_eq!(status(&["-f", "((p"]), Some(2));
}
