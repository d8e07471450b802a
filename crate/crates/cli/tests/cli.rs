use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/data");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn run_with_env(args: &[&str], env: &[(&str, &str)]) -> (i32, Value, Output) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hopf-forge"));
    cmd.args(args).env_remove("HOPF_FORGE_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    let code = out.status.code().expect("exit code");
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, report, out)
}

fn run(args: &[&str]) -> (i32, Value) {
    let (code, report, _) = run_with_env(args, &[]);
    (code, report)
}

fn failed_checks(report: &Value) -> Vec<String> {
    report["checks"]
        .as_array()
        .into_iter()
        .flatten()
        .filter(|c| c["status"] == "fail")
        .map(|c| c["name"].as_str().unwrap_or_default().to_string())
        .collect()
}

#[test]
fn decompose_q8_over_the_reals() {
    let (code, r) = run(&["decompose", "--group", "builtin:quaternion8", "--field", "R"]);
    assert_eq!(code, 0, "{r:#}");
    assert_eq!(r["status"], "pass");
    assert_eq!(r["result"]["block_count"], 5);
    assert_eq!(r["result"]["block_dims"], json!([1, 1, 1, 1, 4]));
    assert_eq!(r["result"]["division_rings"][4], "H");
    for check in r["checks"].as_array().unwrap() {
        assert!(check.get("residual").is_some() && check.get("tolerance").is_some());
    }
}

#[test]
fn decompose_table_file_with_oracle() {
    let (code, r) = run(&["decompose", "--group", &data("klein.json"), "--field", "C", "--oracle"]);
    assert_eq!(code, 0, "{r:#}");
    assert_eq!(r["result"]["block_dims"], json!([1, 1, 1, 1]));
}

#[test]
fn non_associative_table_is_an_input_error() {
    let (code, r) = run(&["decompose", "--group", &data("not_associative.json"), "--field", "R"]);
    assert_eq!(code, 2);
    assert_eq!(r["status"], "input_error");
    assert!(r["error"].as_str().unwrap().contains("not associative"), "{r:#}");
}

#[test]
fn missing_file_and_unknown_builtin_are_input_errors() {
    assert_eq!(run(&["grouplike", "--group", "/nonexistent/g.json"]).0, 2);
    assert_eq!(run(&["grouplike", "--group", "builtin:z7"]).0, 2);
    assert_eq!(run(&["decompose", "--group", "builtin:c3", "--field", "Q"]).0, 2);
}

#[test]
fn usage_errors_exit_nonzero() {
    let (code, _, out) = run_with_env(&["frobnicate"], &[]);
    assert_eq!(code, 2);
    assert!(!out.stderr.is_empty());
    assert_eq!(run(&["envelope", "--lie", "builtin:sl2"]).0, 2);
}

#[test]
fn grouplikes_of_s3() {
    let (code, r) = run(&["grouplike", "--group", "builtin:s3", "--field", "R"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["count"], 6);
}

#[test]
fn character_table_of_d4() {
    let (code, r) = run(&["chartable", "--group", "builtin:dihedral(4)"]);
    assert_eq!(code, 0, "{r:#}");
    let mut degrees: Vec<u64> = r["result"]["degrees"].as_array().unwrap().iter().map(|d| d.as_u64().unwrap()).collect();
    degrees.sort_unstable();
    assert_eq!(degrees, vec![1, 1, 1, 1, 2]);
    assert!(r["result"]["fs"].as_array().unwrap().iter().all(|v| v == 1));
}

#[test]
fn reports_are_deterministic_and_seeded() {
    let args = ["--seed", "11", "envelope", "--lie", "builtin:sl2", "--cutoff", "3", "--scalar", "float", "associativity"];
    let (_, _, a) = run_with_env(&args, &[]);
    let (_, _, b) = run_with_env(&args, &[]);
    assert_eq!(a.stdout, b.stdout);
    let (_, r, _) = run_with_env(&["chartable", "--group", "builtin:c3"], &[("HOPF_FORGE_SEED", "42")]);
    assert_eq!(r["seed"], 42);
    let (_, r, _) = run_with_env(&["--seed", "7", "chartable", "--group", "builtin:c3"], &[("HOPF_FORGE_SEED", "42")]);
    assert_eq!(r["seed"], 7);
    assert!(r.get("timings").is_none());
    let (_, r) = run(&["--timings", "chartable", "--group", "builtin:c3"]);
    assert!(r["timings"]["total_ms"].is_u64());
}

#[test]
fn digest_tracks_file_contents() {
    let (_, a) = run(&["grouplike", "--group", &data("klein.json")]);
    let (_, b) = run(&["grouplike", "--group", "builtin:c2*c2"]);
    assert_eq!(a["inputs_digest"].as_str().unwrap().len(), 64);
    assert_ne!(a["inputs_digest"], b["inputs_digest"]);
}

const DUAL_Z: &str = r#"{"rank": 1, "torsion": []}"#;

#[test]
fn abelian_grouplike_and_primitive_checks() {
    let g = r#"{"grouplike": {"free": [[0.0, 2.0]]}}"#;
    let (code, r) = run(&["abelian", "--dual", DUAL_Z, "grouplike-check", "--element", g]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["verdict"]["verdict"], "StructurallyYes", "{r:#}");
    let (code, r) = run(&["abelian", "--dual", DUAL_Z, "primitive-check", "--element", g]);
    assert_eq!(code, 1);
    assert_eq!(r["status"], "fail");
    let sum = r#"{"sum": [{"primitive": {"free": [1.0]}}, {"primitive": {"free": [[0.0, 3.0]]}}]}"#;
    let (code, _) = run(&["abelian", "--dual", DUAL_Z, "primitive-check", "--element", sum]);
    assert_eq!(code, 0);
}

#[test]
fn abelian_exp_of_primitive_is_grouplike() {
    let p = r#"{"primitive": {"free": [[0.0, 1.5707963267948966]]}}"#;
    let (code, r) = run(&["abelian", "--dual", DUAL_Z, "exp", "--element", p]);
    assert_eq!(code, 0, "{r:#}");
    assert!(r["result"]["exp"].get("grouplike").is_some(), "{r:#}");
}

#[test]
fn abelian_polar_and_embed() {
    let dual = r#"{"rank": 2, "torsion": [3]}"#;
    let g = r#"{"grouplike": {"free": [[1.0, 1.0], 2.0], "torsion": [2]}}"#;
    let (code, r) = run(&["abelian", "--dual", dual, "polar", "--element", g]);
    assert_eq!(code, 0, "{r:#}");
    let lie = r["result"]["lie_part"].as_array().unwrap();
    assert!((lie[0].as_f64().unwrap() - 2f64.sqrt().ln()).abs() < 1e-15);
    assert!((lie[1].as_f64().unwrap() - 2f64.ln()).abs() < 1e-15);
    let (code, r) = run(&["abelian", "--dual", dual, "embed", "--angles", "0.25,0.5", "--residues", "1"]);
    assert_eq!(code, 0, "{r:#}");
    let (code, _) = run(&["abelian", "--dual", dual, "embed", "--angles", "1.5,0", "--residues", "1"]);
    assert_eq!(code, 2);
    let p = r#"{"primitive": {"free": [1.0, 2.0]}}"#;
    assert_eq!(run(&["abelian", "--dual", dual, "polar", "--element", p]).0, 2);
}

#[test]
fn abelian_sigma_check() {
    let fixed = r#"{"primitive": {"free": [[0.0, 6.283185307179586]]}}"#;
    assert_eq!(run(&["abelian", "--dual", DUAL_Z, "sigma-check", "--element", fixed]).0, 0);
    let not_fixed = r#"{"primitive": {"free": [1.0]}}"#;
    assert_eq!(run(&["abelian", "--dual", DUAL_Z, "sigma-check", "--element", not_fixed]).0, 1);
    let bad_shape = r#"{"grouplike": {"free": [1.0, 2.0]}}"#;
    assert_eq!(run(&["abelian", "--dual", DUAL_Z, "sigma-check", "--element", bad_shape]).0, 2);
}

#[test]
fn tower_threads_and_pullback() {
    let (code, r) = run(&["tower", "--file", &data("c2_tower.json"), "check-threads"]);
    assert_eq!(code, 0, "{r:#}");
    assert_eq!(r["result"]["threads"][0]["elements"], json!([1, 3, 7]));
    let (code, r) = run(&["tower", "--file", &data("broken_thread.json"), "check-threads"]);
    assert_eq!(code, 1);
    assert_eq!(r["result"]["threads"][0]["verdict"], "Broken");
    for field in ["R", "C"] {
        let (code, r) = run(&["tower", "--file", &data("c2_tower.json"), "--field", field, "pullback"]);
        assert_eq!(code, 0, "{:?}", failed_checks(&r));
    }
}

#[test]
fn envelope_checks_on_heisenberg() {
    let lie = data("heisenberg.json");
    for check in ["hopf-laws", "primitives", "dims", "associativity", "exp", "grouplike-exp"] {
        let (code, r) = run(&["envelope", "--lie", &lie, "--cutoff", "3", check]);
        assert_eq!(code, 0, "{check}: {:?}", failed_checks(&r));
    }
}

#[test]
fn envelope_inline_lie_and_exact_values() {
    let lie = r#"{"dim": 1, "field": "R"}"#;
    let (code, r) = run(&["envelope", "--lie", lie, "--cutoff", "3", "--element", "[[[0], 1]]", "exp"]);
    assert_eq!(code, 0, "{r:#}");
    assert_eq!(r["result"]["exp"], json!([[[], "1"], [[0], "1"], [[0, 0], "1/2"], [[0, 0, 0], "1/6"]]));
}

#[test]
fn envelope_multiplicativity_and_powerseries() {
    let args = ["envelope", "--lie", "builtin:sl2", "--with", "builtin:abelian1", "--cutoff", "3", "multiplicativity"];
    let (code, r) = run(&args);
    assert_eq!(code, 0, "{r:#}");
    assert_eq!(r["result"]["degrees"][3]["product_dim"], 20);
    assert_eq!(run(&["envelope", "--lie", "builtin:sl2", "--cutoff", "3", "multiplicativity"]).0, 2);
    let (code, r) = run(&["envelope", "--lie", "builtin:abelian1", "--cutoff", "4", "powerseries"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["dimension"], 5);
    let (code, _) = run(&["envelope", "--lie", "builtin:abelian1", "--cutoff", "3", "--scalar", "float", "omega"]);
    assert_eq!(code, 0);
}

#[test]
fn envelope_input_errors() {
    assert_eq!(run(&["envelope", "--lie", "builtin:sl2", "--cutoff", "2", "--element", "[[[], 1]]", "exp"]).0, 2);
    assert_eq!(run(&["envelope", "--lie", "builtin:sl2", "--cutoff", "2", "--element", "[[[5], 1]]", "exp"]).0, 2);
    let not_jacobi = r#"{"dim": 3, "field": "R", "brackets": [[0, 1, [1, 0, 0]], [0, 2, [0, 1, 0]]]}"#;
    let (code, r) = run(&["envelope", "--lie", not_jacobi, "--cutoff", "2", "dims"]);
    assert_eq!(code, 2, "{r:#}");
    assert!(r["error"].as_str().unwrap().contains("Jacobi"));
}

#[test]
fn selftest_single_criterion_and_full_suite() {
    let (code, r) = run(&["selftest", "--criterion", "3"]);
    assert_eq!(code, 0, "{:?}", failed_checks(&r));
    assert_eq!(r["result"]["id"], 3);
    assert_eq!(run(&["selftest", "--criterion", "12"]).0, 2);
    let (code, _, a) = run_with_env(&["selftest"], &[]);
    assert_eq!(code, 0);
    let (_, _, b) = run_with_env(&["selftest"], &[]);
    assert_eq!(a.stdout, b.stdout);
}
