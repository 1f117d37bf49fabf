use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn instance(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name)
}

fn ellrank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellrank"))
        .args(args)
        .env_remove("NORI_RANK_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_tmp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn analyze_sl2_f7() {
    let path = instance("sl2_f7.json");
    let out = ellrank(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(6), "{}", stderr(&out));
    let r = json(&out);
    assert_eq!(r["profile"]["dim_ell"], 3);
    assert_eq!(r["profile"]["rk_ell"], 1);
    assert_eq!(r["profile"]["per_type"]["A_1"], 1);
    assert_eq!(r["flags"]["routes_agree"], true);
    assert_eq!(r["certificates"].as_array().unwrap().len(), 4);
    assert!(r.get("timings").is_none());

    // above the threshold nothing is flagged
    let out = ellrank(&["analyze", path.to_str().unwrap(), "--threshold-mult", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn reports_are_byte_stable() {
    let path = instance("sl2_f25.json");
    let a = ellrank(&["analyze", path.to_str().unwrap(), "--seed", "11"]);
    let b = ellrank(&["analyze", path.to_str().unwrap(), "--seed", "11"]);
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["profile"]["rk_ell"], 2);
}

#[test]
fn timings_are_opt_in() {
    let path = instance("torus3_f7.json");
    let out = ellrank(&["analyze", path.to_str().unwrap(), "--timings"]);
    assert!(json(&out)["timings"].is_object());
}

#[test]
fn schema_errors_name_the_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_tmp(&dir, "bad.json", r#"{"prime": 7, "dim": 2, "generators": [[[1, 1, 0], [0, 1, 0]]]}"#);
    let out = ellrank(&["analyze", &p]);
    assert_eq!(out.status.code(), Some(7));
    assert!(stderr(&out).contains("/generators/0"), "{}", stderr(&out));

    let p = write_tmp(&dir, "prime.json", r#"{"prime": 9, "dim": 1, "generators": [[[1]]]}"#);
    let out = ellrank(&["analyze", &p]);
    assert_eq!(out.status.code(), Some(7));
    assert!(stderr(&out).contains("/prime"), "{}", stderr(&out));

    let out = ellrank(&["analyze", "/nonexistent/instance.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn out_of_range_entries_are_reduced_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_tmp(
        &dir,
        "wide.json",
        r#"{"prime": 7, "dim": 2, "generators": [[[8, 1], [7, 1]], [[1, 0], [1, 1]]]}"#,
    );
    let out = ellrank(&["analyze", &p]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("/generators/0/0/0"));
    assert_eq!(json(&out)["profile"]["rk_ell"], 1);
}

#[test]
fn certify_single_criterion() {
    let path = instance("torus3_f7.json");
    let out = ellrank(&["certify", path.to_str().unwrap(), "--criterion", "typea"]);
    let r = json(&out);
    let certs = r["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 1);
    assert_eq!(certs[0]["criterion"], "TypeAFullness");
    assert_eq!(certs[0]["verdict"], "Inconclusive");
    assert_eq!(out.status.code(), Some(0));

    let out = ellrank(&["certify", path.to_str().unwrap(), "--criterion", "typeb"]);
    assert_eq!(out.status.code(), Some(7));
}

#[test]
fn certify_needs_an_ambient() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_tmp(&dir, "bare.json", r#"{"prime": 7, "dim": 2, "generators": [[[1, 1], [0, 1]]]}"#);
    let out = ellrank(&["certify", &p, "--criterion", "rank"]);
    assert_eq!(out.status.code(), Some(7));
    assert!(stderr(&out).contains("ambient"));
}

#[test]
fn too_small_ambient_is_refuted() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_tmp(
        &dir,
        "sl3.json",
        r#"{"prime": 5, "dim": 3,
            "generators": [[[1,1,0],[0,1,0],[0,0,1]], [[1,0,0],[0,1,1],[0,0,1]], [[1,0,0],[0,1,0],[1,0,1]]],
            "ambient": {"factors": ["A_1"]}}"#,
    );
    let out = ellrank(&["certify", &p, "--criterion", "rank"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert_eq!(json(&out)["certificates"][0]["verdict"], "Refuted");
}

#[test]
fn reduce_front_door() {
    let path = instance("lattice_unipotents.json");
    let out = ellrank(&["reduce", path.to_str().unwrap(), "--ell", "7"]);
    assert_eq!(out.status.code(), Some(6), "{}", stderr(&out));
    let r = json(&out);
    assert_eq!(r["profile"]["dim_ell"], 3);
    assert!(r["lattice"]["iterations"].as_u64().unwrap() <= 2);

    let out = ellrank(&["reduce", path.to_str().unwrap(), "--ell", "5"]);
    assert_eq!(out.status.code(), Some(7));

    let out = ellrank(&["reduce", instance("noncompact.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(out.stdout.is_empty());
}

#[test]
fn reduce_and_analyze_reject_the_other_kind() {
    let out = ellrank(&["analyze", instance("noncompact.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(7));
    let out = ellrank(&["reduce", instance("sl2_f7.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(7));
}

#[test]
fn oracle_and_cap() {
    let path = instance("sl2_f7.json");
    let out = ellrank(&["oracle", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["group_order"], 336);
    assert_eq!(r["profile"]["rk_ell"], 1);
    assert_eq!(r["factors"].as_array().unwrap().len(), 2);

    let out = ellrank(&["oracle", path.to_str().unwrap(), "--oracle-cap", "100"]);
    assert_eq!(out.status.code(), Some(3));

    // over the cap, analyze falls back to the envelope
    let out = ellrank(&["analyze", path.to_str().unwrap(), "--oracle-cap", "100"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["profile"]["source"], "envelope");
}

#[test]
fn tables() {
    let out = ellrank(&["tables", "--q", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["orders"]["SL_2"], "336");
    let e8 = r["types"].as_array().unwrap().iter().find(|t| t["type"] == "E8").unwrap();
    assert_eq!(e8["dim"], 248);
}

#[test]
fn selftest_subset_is_deterministic() {
    let a = ellrank(&["selftest", "--only", "1,2,9"]);
    let b = ellrank(&["selftest", "--only", "1,2,9"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn selftest_notices_a_wrong_formula() {
    let out = ellrank(&["selftest", "--only", "2", "--inject-mutation", "sl-order"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("FAIL [2]"));

    let out = ellrank(&["selftest", "--only", "11"]);
    assert_eq!(out.status.code(), Some(7));
}

#[test]
fn thread_variable_is_validated() {
    let path = instance("sl2_f7.json");
    let out = Command::new(env!("CARGO_BIN_EXE_ellrank"))
        .args(["analyze", path.to_str().unwrap()])
        .env("NORI_RANK_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(7));
    let out = Command::new(env!("CARGO_BIN_EXE_ellrank"))
        .args(["analyze", path.to_str().unwrap()])
        .env("NORI_RANK_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(6));
}
