//! End-to-end tests of the `fuzzymc` binary: exit codes, file formats,
//! deterministic output, and the documented closed-form values.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fuzzymc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn write(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

fn pentagon_graph(dir: &Path) -> PathBuf {
    let path = dir.join("pentagon.json");
    write(
        &path,
        r#"{
  "vertices": ["a", "b", "c", "d", "e"],
  "edges": [["a","b"], ["b","c"], ["c","d"], ["d","e"], ["e","b"], ["e","a"]],
  "H": ["a", "c"]
}"#,
    );
    path
}

fn two_state_chain(dir: &Path) -> PathBuf {
    let path = dir.join("two.json");
    write(
        &path,
        r#"{"states": ["0", "1"], "pi": [0.5, 0.5], "Q": [[-1.0, 1.0], [1.0, -1.0]]}"#,
    );
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Generate the pentagon instance files under `dir/pent`.
fn glued_pentagon(dir: &Path) -> PathBuf {
    let graph = pentagon_graph(dir);
    let out = dir.join("pent");
    let output = run(&[
        "glued",
        "--graph",
        graph.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "{output:?}");
    out
}

#[test]
fn glued_pentagon_quantities_match_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let out = glued_pentagon(dir.path());
    let quantities = read_json(&out.join("quantities.json"));
    let chi = quantities["chi"]["closed_form"].as_f64().unwrap();
    assert!((chi - 15.0 / 28.0).abs() < 1e-15);
    assert!(quantities["chi"]["difference"].as_f64().unwrap() <= 1e-12);
    let q12 = quantities["q_hat_12"]["closed_form"].as_f64().unwrap();
    assert!((q12 - 7.0 / 15.0).abs() < 1e-15);
    assert!(quantities["q_hat_12"]["difference"].as_f64().unwrap() <= 1e-12);
    let bound = quantities["projection_bound"]["definition"]
        .as_f64()
        .unwrap();
    assert!((bound - 0.5).abs() < 1e-12);
}

#[test]
fn glued_rejects_adjacent_h_naming_the_vertex() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("bad.json");
    write(
        &graph,
        r#"{"vertices": ["a", "b", "c"], "edges": [["a","b"], ["b","c"]], "H": ["a", "b"]}"#,
    );
    let output = run(&[
        "glued",
        "--graph",
        graph.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 1);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("neighbor"), "{stderr}");
    assert!(stderr.contains('a') && stderr.contains('b'));
}

#[test]
fn glued_empty_h_emits_prism_instance() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("k2.json");
    write(&graph, r#"{"vertices": ["u", "v"], "edges": [["u","v"]]}"#);
    let out = dir.path().join("prism");
    let output = run(&[
        "glued",
        "--graph",
        graph.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0);
    let chain = read_json(&out.join("chain.json"));
    assert_eq!(chain["states"].as_array().unwrap().len(), 4);
}

#[test]
fn validate_accepts_generated_instance_and_flags_broken_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = glued_pentagon(dir.path());
    let output = run(&[
        "validate",
        "--chain",
        out.join("chain.json").to_str().unwrap(),
        "--partition",
        out.join("partition.json").to_str().unwrap(),
        "--couplings",
        out.join("couplings.json").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "{output:?}");
    let doc: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(doc["ok"], Value::Bool(true));

    let broken = dir.path().join("broken.json");
    write(
        &broken,
        r#"{"states": ["0", "1"], "pi": [0.5, 0.5], "Q": [[-0.9, 1.0], [1.0, -1.0]]}"#,
    );
    let output = run(&["validate", "--chain", broken.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 1);
    let doc: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(doc["ok"], Value::Bool(false));
    let violations = doc["chain"]["violations"].as_array().unwrap();
    assert!(violations
        .iter()
        .any(|v| v.as_str().unwrap().contains("row")));
}

#[test]
fn validate_honors_tolerance_override() {
    let dir = tempfile::tempdir().unwrap();
    let slightly_off = dir.path().join("off.json");
    // Row sums off by 1e-9: fails at default tolerance, passes at 1e-6.
    write(
        &slightly_off,
        r#"{"states": ["0", "1"], "pi": [0.5, 0.5], "Q": [[-1.0, 1.000000001], [1.000000001, -1.0]]}"#,
    );
    let strict = run(&["validate", "--chain", slightly_off.to_str().unwrap()]);
    assert_eq!(exit_code(&strict), 1);
    let loose = run(&[
        "validate",
        "--chain",
        slightly_off.to_str().unwrap(),
        "--tol",
        "1e-6",
    ]);
    assert_eq!(exit_code(&loose), 0, "{loose:?}");
}

#[test]
fn validate_missing_and_malformed_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&[
        "validate",
        "--chain",
        dir.path().join("nope.json").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 2);

    let malformed = dir.path().join("malformed.json");
    write(&malformed, "{\"states\": [");
    let output = run(&["validate", "--chain", malformed.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 2);
}

#[test]
fn decompose_emits_expected_projection_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = glued_pentagon(dir.path());
    let doc_path = dir.path().join("decomposed.json");
    let output = run(&[
        "decompose",
        "--chain",
        out.join("chain.json").to_str().unwrap(),
        "--partition",
        out.join("partition.json").to_str().unwrap(),
        "--out",
        doc_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "{output:?}");
    let doc = read_json(&doc_path);
    let q12 = doc["projection"]["Q"][0][1].as_f64().unwrap();
    assert!((q12 - 7.0 / 15.0).abs() < 1e-12);
    assert!((doc["pi_hat"][0].as_f64().unwrap() - 0.5).abs() < 1e-12);

    // Round-trip: each emitted chain re-validates cleanly.
    for chain_doc in std::iter::once(&doc["projection"]).chain(
        doc["restrictions"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| &r["chain"]),
    ) {
        let nested = dir.path().join("nested.json");
        write(&nested, &chain_doc.to_string());
        let check = run(&["validate", "--chain", nested.to_str().unwrap()]);
        assert_eq!(exit_code(&check), 0, "{check:?}");
    }
}

#[test]
fn constants_two_state_and_reducible() {
    let dir = tempfile::tempdir().unwrap();
    let chain = two_state_chain(dir.path());
    let output = run(&[
        "constants",
        "--chain",
        chain.to_str().unwrap(),
        "--restarts",
        "8",
    ]);
    assert_eq!(exit_code(&output), 0);
    let doc: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert!((doc["lambda"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!(doc["alpha_est"]["value"].as_f64().unwrap() > 0.0);
    assert_eq!(doc["alpha_est"]["seed"], Value::from(0));

    let reducible = dir.path().join("reducible.json");
    write(
        &reducible,
        r#"{"states": ["0", "1", "2", "3"], "pi": [0.25, 0.25, 0.25, 0.25],
           "Q": [[-1.0, 1.0, 0.0, 0.0], [1.0, -1.0, 0.0, 0.0],
                 [0.0, 0.0, -1.0, 1.0], [0.0, 0.0, 1.0, -1.0]]}"#,
    );
    let output = run(&["constants", "--chain", reducible.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 0);
    let doc: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(doc["lambda"].as_f64().unwrap(), 0.0);
    assert_eq!(doc["reducible"], Value::Bool(true));
    assert!(!doc["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn constants_outputs_are_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let chain = two_state_chain(dir.path());
    let paths: Vec<PathBuf> = (0..3)
        .map(|k| dir.path().join(format!("constants{k}.json")))
        .collect();
    for (k, path) in paths.iter().enumerate() {
        let threads = if k == 2 { "4" } else { "1" };
        let output = run(&[
            "constants",
            "--chain",
            chain.to_str().unwrap(),
            "--restarts",
            "8",
            "--seed",
            "7",
            "--threads",
            threads,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&output), 0);
    }
    let bytes: Vec<Vec<u8>> = paths.iter().map(|p| std::fs::read(p).unwrap()).collect();
    assert_eq!(bytes[0], bytes[1], "same seed must reproduce bytes");
    assert_eq!(bytes[0], bytes[2], "threads must not change results");
}

#[test]
fn bound_pentagon_passes_and_reports_chi() {
    let dir = tempfile::tempdir().unwrap();
    let out = glued_pentagon(dir.path());
    let bound_path = dir.path().join("bound.json");
    let output = run(&[
        "bound",
        "--chain",
        out.join("chain.json").to_str().unwrap(),
        "--partition",
        out.join("partition.json").to_str().unwrap(),
        "--couplings",
        out.join("couplings.json").to_str().unwrap(),
        "--trials",
        "50",
        "--restarts",
        "6",
        "--out",
        bound_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "{output:?}");
    let doc = read_json(&bound_path);
    assert!((doc["chi"].as_f64().unwrap() - 15.0 / 28.0).abs() < 1e-12);
    let verdicts = doc["verdicts"].as_array().unwrap();
    assert_eq!(verdicts.len(), 3);
    for verdict in verdicts {
        assert_eq!(verdict["pass"], Value::Bool(true), "{verdict}");
    }
    assert_eq!(doc["identities"]["variance"]["pass"], Value::Bool(true));
    assert_eq!(doc["identities"]["entropy"]["pass"], Value::Bool(true));
}

#[test]
fn bound_requires_couplings_unless_synthesized() {
    let dir = tempfile::tempdir().unwrap();
    let out = glued_pentagon(dir.path());
    let chain = out.join("chain.json");
    let partition = out.join("partition.json");
    let output = run(&[
        "bound",
        "--chain",
        chain.to_str().unwrap(),
        "--partition",
        partition.to_str().unwrap(),
        "--trials",
        "10",
        "--restarts",
        "4",
    ]);
    assert_eq!(exit_code(&output), 1);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("missing coupling"), "{stderr}");

    let output = run(&[
        "bound",
        "--chain",
        chain.to_str().unwrap(),
        "--partition",
        partition.to_str().unwrap(),
        "--product-couplings",
        "--trials",
        "10",
        "--restarts",
        "4",
    ]);
    assert_eq!(exit_code(&output), 0, "{output:?}");
}

#[test]
fn bound_threads_do_not_change_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let out = glued_pentagon(dir.path());
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let path = dir.path().join(format!("bound{threads}.json"));
        let output = run(&[
            "bound",
            "--chain",
            out.join("chain.json").to_str().unwrap(),
            "--partition",
            out.join("partition.json").to_str().unwrap(),
            "--couplings",
            out.join("couplings.json").to_str().unwrap(),
            "--trials",
            "20",
            "--restarts",
            "4",
            "--seed",
            "3",
            "--threads",
            threads,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&output), 0);
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn mixing_two_state_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let chain = two_state_chain(dir.path());
    let output = run(&[
        "mixing",
        "--chain",
        chain.to_str().unwrap(),
        "--eps",
        "0.25",
        "--t-max",
        "1.0",
        "--step",
        "0.1",
    ]);
    assert_eq!(exit_code(&output), 0);
    let text = String::from_utf8(output.stdout).unwrap();
    let mut checked = 0;
    for line in text.lines().skip(1) {
        if line.starts_with('#') {
            continue;
        }
        let (t, tv) = line.split_once(',').unwrap();
        let t: f64 = t.parse().unwrap();
        let tv: f64 = tv.parse().unwrap();
        assert!((tv - 0.5 * (-2.0 * t).exp()).abs() < 1e-9, "t={t}");
        checked += 1;
    }
    assert_eq!(checked, 11);
    assert!(text.contains("# bracket: 4.0000000000000002e-1"), "{text}");
    assert!(text.contains("# lambda: 2.0"), "{text}");
    assert!(text.contains("# diagnostic"));
}

#[test]
fn mixing_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let chain = two_state_chain(dir.path());
    // Unreachable threshold within the horizon.
    let output = run(&[
        "mixing",
        "--chain",
        chain.to_str().unwrap(),
        "--eps",
        "0.001",
        "--t-max",
        "0.5",
        "--step",
        "0.1",
    ]);
    assert_eq!(exit_code(&output), 0);
    assert!(String::from_utf8_lossy(&output.stdout).contains("# bracket: not reached"));
    // Trivial threshold brackets at zero.
    let output = run(&[
        "mixing",
        "--chain",
        chain.to_str().unwrap(),
        "--eps",
        "0.999",
        "--t-max",
        "0.5",
        "--step",
        "0.1",
    ]);
    assert!(String::from_utf8_lossy(&output.stdout).contains("# bracket: 0.0"));
}

#[test]
fn glued_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let graph = pentagon_graph(dir.path());
    let mut snapshots = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        let output = run(&[
            "glued",
            "--graph",
            graph.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&output), 0);
        let mut bundle = Vec::new();
        for name in [
            "chain.json",
            "partition.json",
            "couplings.json",
            "quantities.json",
        ] {
            bundle.extend(std::fs::read(out.join(name)).unwrap());
        }
        snapshots.push(bundle);
    }
    assert_eq!(snapshots[0], snapshots[1]);
}
