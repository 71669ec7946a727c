use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn descent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_descent")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

const C1: &str = r#"{
  "curve": {"f": ["1","0","0","0","0","0","1"]},
  "target": {"kind": "elliptic", "curve": {"a6": "1"},
    "morphism": {"X": {"num0": ["0","0","1"], "den": ["1"]}, "Y": {"num1": ["1"], "den": ["1"]},
      "exceptional": [{"at": {"kind": "infinity_plus"}, "image": "identity"},
                      {"at": {"kind": "infinity_minus"}, "image": "identity"}]}},
  "subgroup": {"free": [], "torsion": [{"element": {"x": "2", "y": "3"}, "order": 6}], "assumption": "E(Q) = Z/6"},
  "modulus": 6,
  "primes": [5, 7, 11]
}"#;

// y² = x⁶ + 2 restricted to points whose x is integral at 5 and 7.
const C2_AFFINE: &str = r#"{
  "curve": {"f": ["2","0","0","0","0","0","1"]},
  "target": {"kind": "elliptic", "curve": {"a6": "2"},
    "morphism": {"X": {"num0": ["0","0","1"], "den": ["1"]}, "Y": {"num1": ["1"], "den": ["1"]},
      "exceptional": [{"at": {"kind": "infinity_plus"}, "image": "identity"},
                      {"at": {"kind": "infinity_minus"}, "image": "identity"}]}},
  "subgroup": {"free": [{"x": "-1", "y": "1"}], "torsion": [], "assumption": "E(Q) = Z generated by (-1,1)"},
  "modulus": 24,
  "primes": [5, 7],
  "conditions": {"5": {"kind": "affine"}, "7": {"kind": "affine"}}
}"#;

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn local_verdicts() {
    let out = descent(&["local", "--f", "3,0,0,0,0,0,3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(&rows[0][..2], ["real", "true"]);
    assert_eq!(&rows[1][..2], ["2", "false"]);
    assert_eq!(&rows[2][..2], ["3", "false"]);

    let out = descent(&["local", "--f", "-1,0,0,0,0,0,-1", "--place", "real"]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("real\tfalse"));
}

#[test]
fn points_and_group() {
    let out = descent(&["points", "--f", "1,0,0,0,0,0,1", "--height", "10"]);
    let pts = stdout_json(&out);
    assert_eq!(pts.as_array().unwrap().len(), 4);
    assert_eq!(pts[0], serde_json::json!({"kind": "affine", "x": "0", "y": "1"}));

    let g = stdout_json(&descent(&["group", "--ec", "0,0,1", "--p", "5"]));
    assert_eq!(g["order"], 6);
    assert_eq!(g["invariants"], serde_json::json!([6]));
    let g = stdout_json(&descent(&["group", "--ec", "0,0,1", "--p", "7"]));
    assert_eq!(g["invariants"], serde_json::json!([2, 6]));

    let out = descent(&["group", "--f", "1,0,0,0,0,0,1", "--p", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sieve_exit_codes_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let c1 = write(dir.path(), "c1.json", C1);
    let out = descent(&["sieve", &c1]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["outcome"]["status"], "SURVIVORS");

    let out = descent(&["sieve", &c1, "--poonen"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["parameters"]["mode"], "poonen");

    let c2 = write(dir.path(), "c2.json", C2_AFFINE);
    let cert = dir.path().join("cert.json").display().to_string();
    let out = descent(&["sieve", &c2, "--out", &cert]);
    assert_eq!(out.status.code(), Some(10));
    let v = stdout_json(&descent(&["sieve", "verify", &cert]));
    assert_eq!(v["rerun_identical"], true);
    assert_eq!(v["replay_consistent"], true);

    // A tampered certificate no longer matches its rerun.
    let mut doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    doc["per_prime"][0]["survivors_after"] = 99.into();
    let bad = write(dir.path(), "bad.json", &doc.to_string());
    let out = descent(&["sieve", "verify", &bad]);
    assert_eq!(out.status.code(), Some(2));

    let broken = write(dir.path(), "broken.json", "{");
    assert_eq!(descent(&["sieve", &broken]).status.code(), Some(2));
}

#[test]
fn census_run_summary_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.jsonl").display().to_string();
    let run = ["census", "run", "--degrees", "6", "--range", "-1", "1", "--height", "12", "--log", &log];
    let out = descent(&run);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = stdout_json(&out);
    assert_eq!(s["total"], 522);
    assert_eq!(s["counts"]["ELS_UNRESOLVED"], 3);

    // Without --resume an existing log is never overwritten.
    assert_eq!(descent(&run).status.code(), Some(2));
    let mut resumed = run.to_vec();
    resumed.push("--resume");
    assert!(descent(&resumed).status.success());

    assert_eq!(stdout_json(&descent(&["census", "summary", &log])), s);

    let text = fs::read_to_string(&log).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.insert(1, "garbage");
    fs::write(&log, lines.join("\n") + "\n").unwrap();
    assert_eq!(descent(&["census", "summary", &log]).status.code(), Some(3));
}

#[test]
fn attach_upgrades_unresolved_record() {
    let dir = tempfile::tempdir().unwrap();
    let record = serde_json::json!({
        "id": "2,0,0,0,0,0,1", "coeffs": [2, 0, 0, 0, 0, 0, 1],
        "class": "ELS_UNRESOLVED", "height": 0, "timestamp": 0
    });
    let log = write(dir.path(), "log.jsonl", &format!("{record}\n"));
    let c2 = write(dir.path(), "c2.json", C2_AFFINE);
    let cert = dir.path().join("cert.json").display().to_string();
    assert_eq!(descent(&["sieve", &c2, "--out", &cert]).status.code(), Some(10));

    let out = descent(&["sieve", "attach", "--log", &log, "--cert", &cert]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["class"], "SIEVE_EMPTY");
    let s = stdout_json(&descent(&["census", "summary", &log]));
    assert_eq!(s["counts"]["SIEVE_EMPTY"], 1);
}

#[test]
fn zerodim_commands() {
    let r = stdout_json(&descent(&["zerodim", "quad-hasse", "13", "17"]));
    assert_eq!(r["everywhere_local"], true);
    assert_eq!(r["global"], false);

    let r = stdout_json(&descent(&["zerodim", "cover-check", "--degree", "3", "--gen", "2,3,1"]));
    assert_eq!(r["verdict"], "hypothesis_fails");
    let r = stdout_json(&descent(&["zerodim", "cover-check", "--degree", "3", "--gen", "2,1,3"]));
    assert_eq!((r["verdict"].as_str(), r["transitive"].as_bool()), (Some("hypothesis_fails"), Some(false)));
    let r = stdout_json(&descent(&["zerodim", "cover-check", "--degree", "1", "--gen", "1"]));
    assert_eq!(r["verdict"], "holds");

    assert_eq!(descent(&["zerodim", "cover-check", "--degree", "3", "--gen", "1,1,2"]).status.code(), Some(2));
}
