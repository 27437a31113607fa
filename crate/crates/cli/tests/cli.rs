use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tatespace"));
    c.env_remove("TATESPACE_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p.to_string_lossy().into_owned()
}

fn gen_grid(dir: &Path, seed: u64, pairings: bool) -> (String, Value) {
    let out = dir.join(format!("grid{seed}-{pairings}.json"));
    let truth = dir.join(format!("grid{seed}-{pairings}.truth.json"));
    let seed = seed.to_string();
    let mut args = vec!["gen", "--kind", "grid", "--seed", &seed, "--out", out.to_str().unwrap()];
    if pairings {
        args.push("--pairings");
    }
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let t: Value = serde_json::from_str(&std::fs::read_to_string(truth).unwrap()).unwrap();
    (out.to_string_lossy().into_owned(), t)
}

#[test]
fn every_subcommand_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (grid, _) = gen_grid(dir.path(), 11, true);
    let tate = dir.path().join("t.json");
    assert!(run(&["gen", "--kind", "tate", "--seed", "4", "--depth", "3", "--out", tate.to_str().unwrap()]).status.success());
    let tate = tate.to_str().unwrap();
    let decomposed = dir.path().join("d.json");
    assert!(run(&["decompose", &grid, "--out", decomposed.to_str().unwrap()]).status.success());
    let cases: Vec<Vec<&str>> = vec![
        vec!["gen", "--kind", "grid", "--seed", "9"],
        vec!["gen", "--kind", "grid", "--seed", "9", "--pairings"],
        vec!["gen", "--kind", "tate", "--seed", "9"],
        vec!["gen", "--kind", "tower", "--seed", "9", "--depth", "6"],
        vec!["decompose", &grid],
        vec!["dual", &grid],
        vec!["dual", tate],
        vec!["tensor", "--op", "star", tate, tate, "--depth", "3"],
        vec!["tensor", "--op", "bang", tate, tate, "--depth", "3"],
        vec!["check", "--suite", "appendix", "--seed", "5"],
        vec!["check", "--suite", "grid", "--seed", "5"],
        vec!["report", decomposed.to_str().unwrap()],
    ];
    for args in cases {
        let (a, b) = (run(&args), run(&args));
        assert_eq!(a.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&a.stdout));
        assert!(!a.stdout.is_empty(), "{args:?} printed nothing");
        assert_eq!(a.stdout, b.stdout, "{args:?} differs between runs");
    }
}

#[test]
fn seed_from_environment() {
    let a = bin().args(["gen", "--kind", "tate"]).env("TATESPACE_SEED", "17").output().unwrap();
    let b = run(&["gen", "--kind", "tate", "--seed", "17"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, run(&["gen", "--kind", "tate", "--seed", "18"]).stdout);
}

#[test]
fn generated_grids_decompose_to_their_truth() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..30 {
        let (grid, truth) = gen_grid(dir.path(), seed, seed % 3 == 0);
        let o = run(&["decompose", &grid]);
        assert_eq!(o.status.code(), Some(0), "seed {seed}: {}", String::from_utf8_lossy(&o.stdout));
        let d = json_of(&o);
        assert_eq!(d["kind"], "rfh-decomposition");
        assert_eq!(d["v_dims"], truth["v_dims"], "seed {seed}");
        assert_eq!(d["w_dims"], truth["w_dims"], "seed {seed}");
        assert_eq!(d["kappa"]["normal_form_identity"], true);
        assert_eq!(d["kappa"]["source_dim"], d["kappa"]["target_dim"]);
    }
}

#[test]
fn embedded_truth_without_sidecar() {
    let o = run(&["gen", "--kind", "grid", "--seed", "2"]);
    let v = json_of(&o);
    assert_eq!(v["truth"]["kind"], "grid-truth");
}

#[test]
fn broken_square_names_the_cell() {
    let dir = tempfile::tempdir().unwrap();
    // Flip one entry of a right map until the square at (1, 1) stops commuting.
    for seed in 0..200 {
        let (path, _) = gen_grid(dir.path(), seed, false);
        let mut g: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        if g["m"].as_u64().unwrap() < 2 || g["n"].as_u64().unwrap() < 2 {
            continue;
        }
        if g["dims"][1][0] == 0 {
            continue;
        }
        let entries = g["right"][1][0]["entries"].as_array_mut().unwrap();
        if entries.is_empty() {
            continue;
        }
        entries[0] = Value::from(1 - entries[0].as_u64().unwrap() % 2);
        let bad = write(dir.path(), "bad.json", &g);
        let o = run(&["decompose", &bad]);
        if o.status.code() == Some(0) {
            continue;
        }
        assert_eq!(o.status.code(), Some(1));
        let v = json_of(&o);
        assert_eq!(v["status"], "invalid");
        let violations = v["validation"]["violations"].as_array().unwrap();
        assert!(!violations.is_empty());
        if !violations.iter().any(|x| x["kind"] == "square" && x["cell"] == serde_json::json!([1, 1])) {
            continue;
        }
        let report = bin().args(["report", "-"]).stdin(std::process::Stdio::piped()).stdout(std::process::Stdio::piped()).spawn().unwrap();
        use std::io::Write;
        report.stdin.as_ref().unwrap().write_all(&o.stdout).unwrap();
        let text = String::from_utf8(report.wait_with_output().unwrap().stdout).unwrap();
        assert!(text.contains("square at (1, 1)"), "{text}");
        return;
    }
    panic!("no suitable grid generated");
}

#[test]
fn power_series_tensor_square() {
    let dir = tempfile::tempdir().unwrap();
    let ps = write(dir.path(), "ps.json", &serde_json::json!({"kind": "builtin", "name": "power_series"}));
    let v = json_of(&run(&["tensor", "--op", "star", &ps, &ps, "--depth", "3"]));
    assert_eq!(v["kind"], "tower");
    assert_eq!(v["dims"], serde_json::json!([1, 4, 9]));
    let v = json_of(&run(&["tensor", "--op", "bang", &ps, &ps, "--depth", "5"]));
    assert_eq!(v["dims"], serde_json::json!([1, 4, 9, 16, 25]));
}

#[test]
fn malformed_input_exits_two_with_a_path() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (serde_json::json!({"kind": "tower", "dims": [1, 2], "transitions": [{"rows": 1, "cols": 2, "entries": [1]}]}), "/transitions/0/entries"),
        (serde_json::json!({"kind": "tate", "c_lattice": {"kind": "nope"}, "d_lattice": {"kind": "indtower", "dims": [], "transitions": []}}), "/c_lattice/kind"),
        (serde_json::json!({"kind": "finvect", "dim": 2, "field": 4}), "/field"),
    ];
    for (i, (doc, path)) in cases.iter().enumerate() {
        let f = write(dir.path(), &format!("m{i}.json"), doc);
        let o = run(&["dual", &f]);
        assert_eq!(o.status.code(), Some(2), "case {i}");
        assert_eq!(json_of(&o)["error"]["path"], *path, "case {i}");
    }
    let f = dir.path().join("garbage.json");
    std::fs::write(&f, "{ not json").unwrap();
    let o = run(&["decompose", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json_of(&o)["error"]["path"], "/");
    // Missing witness.
    let (grid, _) = gen_grid(dir.path(), 1, false);
    let mut g: Value = serde_json::from_str(&std::fs::read_to_string(grid).unwrap()).unwrap();
    g.as_object_mut().unwrap().remove("ses");
    let f = write(dir.path(), "nowitness.json", &g);
    assert_eq!(run(&["decompose", &f]).status.code(), Some(2));
    // Unsupported tensor combination.
    let t = write(dir.path(), "fv.json", &serde_json::json!({"kind": "finvect", "dim": 2}));
    let o = run(&["tensor", "--op", "star", &t, &t]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json_of(&o)["error"]["path"], "/kind");
    // Composite field.
    assert_eq!(run(&["gen", "--kind", "tate", "--field", "6"]).status.code(), Some(2));
}

#[test]
fn dual_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..100 {
        for kind in ["tate", "tower"] {
            let s = seed.to_string();
            let o = run(&["gen", "--kind", kind, "--seed", &s, "--depth", "4", "--field", "3"]);
            let first = dir.path().join("x.json");
            std::fs::write(&first, &o.stdout).unwrap();
            let d = run(&["dual", first.to_str().unwrap(), "--depth", "4"]);
            assert_eq!(d.status.code(), Some(0));
            let second = dir.path().join("y.json");
            std::fs::write(&second, &d.stdout).unwrap();
            let dd = run(&["dual", second.to_str().unwrap(), "--depth", "4"]);
            assert_eq!(dd.stdout, o.stdout, "{kind} seed {seed}");
        }
    }
}

#[test]
fn grid_dual_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..25 {
        let (grid, _) = gen_grid(dir.path(), seed, false);
        let original = std::fs::read(&grid).unwrap();
        let d = dir.path().join("dg.json");
        assert!(run(&["dual", &grid, "--out", d.to_str().unwrap()]).status.success());
        let dd = run(&["dual", d.to_str().unwrap()]);
        assert_eq!(dd.stdout, original, "seed {seed}");
    }
}

#[test]
fn check_reports_every_law() {
    let o = run(&["check", "--suite", "laws", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_of(&o);
    assert_eq!(v["kind"], "suite-report");
    assert_eq!(v["passed"], true);
    assert!(v["laws"].as_array().unwrap().len() >= 25);
}
