use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn vircheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vircheck"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid json")
}

fn golden(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(p).unwrap()
}

fn temp_path(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("vircheck-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn check_status<'a>(report: &'a Value, name: &str) -> &'a str {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("{name} missing"))["status"]
        .as_str()
        .unwrap()
}

#[test]
fn point_all_passes_and_matches_golden() {
    let o = vircheck(&["check", "point", "--suite", "all", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text, golden("point_all.json"));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["status"] == "PASS"));
}

#[test]
fn curve_genus1_expected_failure_with_witness() {
    let o = vircheck(&["check", "curve-even", "--g", "2", "--suite", "genus1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("curve_g2_genus1.json"));
    let v = json(&o);
    let verdict = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "genus1-verdict")
        .unwrap();
    assert_eq!(verdict["status"], "EXPECTED-FAIL");
    assert_eq!(verdict["witness"]["monomial"], "t1");
    assert_eq!(verdict["witness"]["coefficient"], "1/3");
}

#[test]
fn cp2_foundations_at_order_12() {
    let o = vircheck(&["check", "cp2", "--suite", "foundations", "--order", "12"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS          wdvv"));
}

#[test]
fn json_and_text_agree_and_are_stable() {
    let args = ["check", "k3-sublocus", "--suite", "all"];
    let j1 = vircheck(&[&args[..], &["--format", "json"]].concat());
    let j2 = vircheck(&[&args[..], &["--format", "json"]].concat());
    assert_eq!(j1.stdout, j2.stdout);
    let t = stdout(&vircheck(&[&args[..], &["--format", "text"]].concat()));
    let v = json(&j1);
    let from_json: Vec<(String, String)> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["name"].as_str().unwrap().to_string(), c["status"].as_str().unwrap().to_string()))
        .collect();
    let from_text: Vec<(String, String)> = t
        .lines()
        .filter(|l| !l.starts_with(' ') && !l.starts_with("model") && !l.starts_with("summary"))
        .map(|l| {
            let status = l[..13].trim().to_string();
            let name = l[14..54].trim().to_string();
            (name, status)
        })
        .collect();
    assert_eq!(from_json, from_text);
}

#[test]
fn classify_verbs() {
    let text = stdout(&vircheck(&["classify", "M4"]));
    assert!(text.contains("verdict: degenerate"), "{text}");
    let text = stdout(&vircheck(&["classify", "M3"]));
    assert!(text.contains("verdict: non-degenerate"), "{text}");
    assert!(text.contains("<= 2"), "{text}");
    let v = json(&vircheck(&["classify", "cp1", "--format", "json"]));
    assert_eq!(v["description"], "non-degenerate, semisimple-type");
    assert_eq!(v["det_matches"], true);
}

#[test]
fn phi_verb() {
    assert!(stdout(&vircheck(&["phi", "point", "--k", "2"])).starts_with("0 + O("));
    assert!(stdout(&vircheck(&["phi", "curve-even", "--g", "3", "--k", "2"])).starts_with("-1/6*t1 + O("));
    assert!(stdout(&vircheck(&["phi", "k3-full", "--k", "2"])).starts_with("0 + O("));
}

#[test]
fn predictor_round_trip_through_a_file() {
    let o = vircheck(&["predict-genus1", "point"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("f1 = 0"));

    let path = temp_path("cp2-f1.model");
    let o = vircheck(&["predict-genus1", "cp2", "--order", "12", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("integrability: PASS"));
    let o = vircheck(&["check", path.to_str().unwrap(), "--suite", "genus1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v = json(&o);
    for name in ["genus1-verdict", "getzler", "genus1-from-genus0 (m=3)", "h-representation (k=1,m=2)"] {
        assert_eq!(check_status(&v, name), "PASS");
    }

    let o = vircheck(&["predict-genus1", "k3-full"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("underdetermined"), "{text}");
    assert!(text.contains("constrained directions consistent: PASS"), "{text}");
}

#[test]
fn file_models_do_not_inherit_expected_failures() {
    let path = temp_path("curve.model");
    // The genus-2 curve-even builtin, written out by hand.
    std::fs::write(
        &path,
        "[model]\nname = curve-file\ndim = 1\neuler_char = 2\nc1_cd1 = -2\norder = 8\nbase_point = 0, 0\n\n\
         [basis]\nt1 0 0\ntN 1 1\n\n[eta]\n0 1\n1 0\n\n[chern]\n0 -2\n0 0\n\n\
         [f0]\n1/2 ; t1^2 tN\n\n[f1]\n-1/24 ; tN\n",
    )
    .unwrap();
    let o = vircheck(&["check", path.to_str().unwrap(), "--suite", "genus1"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL          genus1-verdict"));
}

#[test]
fn input_errors_exit_with_two() {
    assert_eq!(vircheck(&["check", "no-such-model"]).status.code(), Some(2));
    assert_eq!(vircheck(&["check", "point", "--suite", "bogus"]).status.code(), Some(2));
    assert_eq!(vircheck(&["check", "cp1", "--g", "2"]).status.code(), Some(2));
    assert_eq!(vircheck(&["frobnicate"]).status.code(), Some(2));
    let bad = temp_path("bad.model");
    std::fs::write(&bad, "[model]\nname = broken\n").unwrap();
    assert_eq!(vircheck(&["check", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn list_models_names_every_builtin() {
    let text = stdout(&vircheck(&["list-models"]));
    for name in ["point", "cp1", "cp2", "curve-even", "k3-full", "k3-sublocus", "M2", "M6"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}
