use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn spec(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_defquant")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

/// Coefficient of ħ^order · x^exponents in the table entry for (f, g).
fn table_coefficient(report: &Value, f: &[u8], g: &[u8], order: u64, exponents: &[u8]) -> Option<String> {
    let entry = report["star_table"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["f"] == serde_json::json!(f) && e["g"] == serde_json::json!(g))?;
    let ord = entry["orders"].as_array().unwrap().iter().find(|o| o["order"] == order)?;
    ord["polynomial"]
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["exponents"] == serde_json::json!(exponents))
        .map(|m| m["value"].as_str().unwrap().to_string())
}

#[test]
fn bundled_specs_verify() {
    for name in ["moyal.json", "jordanian.json", "trivial.json", "ax_plus_b_solve.json"] {
        let out = run(&["verify", spec(name).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stdout));
        let report = json(&out);
        for c in ["jacobi", "cybe", "action_morphism", "poisson_action", "twist_cocycle", "jk_coherence"] {
            assert_eq!(check(&report, c)["passed"], true, "{name}: {c}");
        }
        assert_eq!(check(&report, "twisted_coproduct_iterates")["passed"], true);
        assert!(out.stdout.ends_with(b"\n"));
    }
}

#[test]
fn corrupted_structure_constant_gives_jacobi_witness() {
    let out = run(&["verify", spec("sl2_corrupted.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    let jacobi = check(&report, "jacobi");
    assert_eq!(jacobi["passed"], false);
    assert!(jacobi["witness"].as_str().unwrap().starts_with("(i,j,k,l) = "));
}

#[test]
fn corrupted_moyal_fails_action_check() {
    let out = run(&["verify", spec("moyal_corrupted.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    assert_eq!(check(&report, "jacobi")["passed"], true);
    assert_eq!(check(&report, "action_morphism")["passed"], false);
}

#[test]
fn non_triangular_r_matrix() {
    let path = spec("sl2_e_wedge_f.json");
    let out = run(&["twist-solve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    assert_eq!(check(&report, "cybe")["witness"], "[r,r] = (2)·H∧E∧F");
    assert!(report.get("twist").is_none());
    assert_eq!(run(&["verify", path.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn usage_and_schema_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"lie_algebra": {"basis": ["a"]}, "r_matrix": 3}"#).unwrap();
    assert_eq!(run(&["verify", bad.to_str().unwrap()]).status.code(), Some(2));
    let unknown = dir.path().join("unknown.json");
    std::fs::write(
        &unknown,
        r#"{"lie_algebra": {"basis": ["a", "b"]}, "r_matrix": [{"x": "a", "y": "c", "coefficient": "1"}]}"#,
    )
    .unwrap();
    let out = run(&["verify", unknown.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema"));
    let float = dir.path().join("float.json");
    std::fs::write(
        &float,
        r#"{"lie_algebra": {"basis": ["a", "b"]}, "r_matrix": [{"x": "a", "y": "b", "coefficient": "0.5"}]}"#,
    )
    .unwrap();
    assert_eq!(run(&["verify", float.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["verify", "/nonexistent/spec.json"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["quantize"]).status.code(), Some(2));
}

#[test]
fn moyal_table() {
    let out = run(&["quantize", spec("moyal.json").to_str().unwrap(), "--order", "4", "--max-degree", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(check(&report, "associativity")["passed"], true);
    assert_eq!(check(&report, "classical_limit")["passed"], true);
    // x⋆y = xy + ħ, y⋆x = xy
    assert_eq!(table_coefficient(&report, &[1, 0], &[0, 1], 0, &[1, 1]).as_deref(), Some("1"));
    assert_eq!(table_coefficient(&report, &[1, 0], &[0, 1], 1, &[0, 0]).as_deref(), Some("1"));
    assert_eq!(table_coefficient(&report, &[0, 1], &[1, 0], 1, &[0, 0]), None);
}

#[test]
fn trivial_table_is_pointwise() {
    let out = run(&["quantize", spec("trivial.json").to_str().unwrap(), "--max-degree", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    for e in report["star_table"].as_array().unwrap() {
        let orders = e["orders"].as_array().unwrap();
        assert_eq!(orders.len(), 1);
        assert_eq!(orders[0]["order"], 0);
        let f: Vec<u64> = e["f"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
        let g: Vec<u64> = e["g"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
        let sum: Vec<u64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
        let poly = orders[0]["polynomial"].as_array().unwrap();
        assert_eq!(poly.len(), 1);
        assert_eq!(poly[0]["exponents"], serde_json::json!(sum));
        assert_eq!(poly[0]["value"], "1");
    }
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("table{i}.json"));
        let out = run(&[
            "quantize",
            spec("jordanian.json").to_str().unwrap(),
            "--max-degree",
            "3",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        let file = std::fs::read(&path).unwrap();
        assert_eq!(file, out.stdout);
        outputs.push(file);
    }
    assert_eq!(outputs[0], outputs[1]);
    let a = run(&["verify", spec("moyal.json").to_str().unwrap(), "--seed", "3"]);
    let b = run(&["verify", spec("moyal.json").to_str().unwrap(), "--seed", "3"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn solved_twist_round_trips_through_import() {
    let dir = tempfile::tempdir().unwrap();
    let twist = dir.path().join("twist.json");
    let s = spec("ax_plus_b_solve.json");
    let out = run(&["twist-solve", s.to_str().unwrap(), "--out", twist.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    let cert = report["certificate"].as_array().unwrap();
    assert_eq!(cert.len(), 5);
    assert!(cert.iter().all(|v| v["passed"] == true));
    let text = std::fs::read_to_string(&twist).unwrap();
    assert!(text.ends_with('\n'));
    assert_eq!(serde_json::from_str::<Value>(&text).unwrap(), report["twist"]);

    let solved = run(&["quantize", s.to_str().unwrap(), "--max-degree", "2"]);
    let imported = run(&["quantize", s.to_str().unwrap(), "--max-degree", "2", "--twist", twist.to_str().unwrap()]);
    assert_eq!(imported.status.code(), Some(0));
    assert_eq!(json(&solved)["star_table"], json(&imported)["star_table"]);

    // A twist file at the wrong truncation order is a usage error.
    let wrong = run(&["quantize", s.to_str().unwrap(), "--order", "3", "--twist", twist.to_str().unwrap()]);
    assert_eq!(wrong.status.code(), Some(2));
}

#[test]
fn solver_on_sl2_borel() {
    let out = run(&["twist-solve", spec("sl2_h_wedge_e.json").to_str().unwrap(), "--order", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["certificate"].as_array().unwrap().len(), 4);
    assert_eq!(check(&report, "twist_cocycle")["passed"], true);
}

#[test]
fn small_schedule_reports_failing_order() {
    let out = run(&[
        "twist-solve",
        spec("ax_plus_b_solve.json").to_str().unwrap(),
        "--schedule",
        "1:2,2:2,3:2,4:2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    let c = check(&report, "twist_cocycle");
    assert_eq!(c["passed"], false);
    assert!(c["first_failure_order"].as_u64().unwrap() >= 2);
}
