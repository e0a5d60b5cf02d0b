use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn sslp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sslp")).args(args).output().unwrap()
}

fn status(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sweep_then_verify_accepts() {
    let dir = tempfile::tempdir().unwrap();
    let cat = dir.path().join("n4.jsonl");
    let out = sslp(&["sweep", "--n", "4", "--k", "2", "--m-min", "4", "--m-max", "4", "--jobs", "1", "--out", path_str(&cat)]);
    assert_eq!(status(&out), 0, "{}", stdout(&out));
    let text = fs::read_to_string(&cat).unwrap();
    // the order-2 row: w = (1,1,1,1), S = (0,2)
    assert!(text.lines().any(|l| l.contains(r#""w":[1,1,1,1],"S":[0,2]"#)), "{text}");
    let out = sslp(&["verify", "--in", path_str(&cat)]);
    assert_eq!(status(&out), 0, "{}", stdout(&out));
}

#[test]
fn sweep_with_no_survivors_writes_an_empty_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let cat = dir.path().join("empty.jsonl");
    let out = sslp(&["sweep", "--n", "5", "--k", "2", "--m-min", "2", "--m-max", "2", "--out", path_str(&cat)]);
    assert_eq!(status(&out), 0);
    assert!(fs::read_to_string(&cat).unwrap().is_empty());
    assert_eq!(status(&sslp(&["verify", "--in", path_str(&cat)])), 0);
}

#[test]
fn n5_sweep_contains_every_table_row() {
    let dir = tempfile::tempdir().unwrap();
    let cat = dir.path().join("n5.jsonl");
    let out = sslp(&["sweep", "--n", "5", "--k", "2", "--m-min", "4", "--m-max", "18", "--out", path_str(&cat)]);
    assert_eq!(status(&out), 0);
    assert!(stdout(&out).contains("max order n=5 K=2: 9"), "{}", stdout(&out));
    let text = fs::read_to_string(&cat).unwrap();
    let rows: Vec<Value> = serde_json::from_str(&fs::read_to_string(fixture("parameter_tables.json")).unwrap()).unwrap();
    for row in rows.iter().filter(|r| r["n"] == 5 && r["K"] == 2) {
        let key = format!(r#""m":{},"w":{},"S":{}"#, row["m"], row["w"], row["S"]);
        assert!(text.contains(&key), "missing {key}");
    }
}

#[test]
fn corrupted_probability_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let cat = dir.path().join("hits.jsonl");
    let out = sslp(&["sweep", "--n", "5", "--k", "2", "--m-min", "7", "--m-max", "7", "--out", path_str(&cat)]);
    assert_eq!(status(&out), 0);
    let text = fs::read_to_string(&cat).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    assert!(!lines.is_empty());
    let mut record: Value = serde_json::from_str(&lines[0]).unwrap();
    let first = record["probabilities"][0].as_object().unwrap().keys().next().unwrap().clone();
    record["probabilities"][0][&first] = json!("1/1000");
    lines[0] = record.to_string();
    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, lines.join("\n") + "\n").unwrap();
    let out = sslp(&["verify", "--in", path_str(&bad)]);
    assert_eq!(status(&out), 1, "{}", stdout(&out));
    assert!(stdout(&out).contains("[0] FLAG"), "{}", stdout(&out));
}

/// Turns the transcribed state listings into code records.
fn fixture_catalog(dir: &Path) -> PathBuf {
    let listings: Vec<Value> = serde_json::from_str(&fs::read_to_string(fixture("explicit_states.json")).unwrap()).unwrap();
    let mut text = String::new();
    for f in &listings {
        let states: Vec<Value> = f["states"]
            .as_array()
            .unwrap()
            .iter()
            .map(|terms| {
                let mut state = serde_json::Map::new();
                for t in terms.as_array().unwrap() {
                    let phase = if t[1] == -1 { "1/2" } else { "0/1" };
                    state.insert(t[0].as_str().unwrap().into(), json!({"phase": phase, "radicand": t[2]}));
                }
                Value::Object(state)
            })
            .collect();
        let n = f["w"].as_array().unwrap().len();
        let line = json!({
            "schema_version": 1,
            "kind": "code",
            "n": n,
            "K": f["K"],
            "m": f["m"],
            "w": f["w"],
            "S": f["S"],
            "order": f["order"],
            "extras": {"label": f["label"], "states": states},
        });
        text.push_str(&line.to_string());
        text.push('\n');
    }
    let path = dir.join("listings.jsonl");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn transcribed_listings_verify_in_every_mode() {
    let dir = tempfile::tempdir().unwrap();
    let cat = fixture_catalog(dir.path());
    for mode in ["float", "rational", "both"] {
        let out = sslp(&["verify", "--in", path_str(&cat), "--mode", mode]);
        assert_eq!(status(&out), 0, "{}", stdout(&out));
        assert!(stdout(&out).contains("28 records, 28 accepted, 0 flagged"), "{}", stdout(&out));
    }
}

#[test]
fn c642_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c642.jsonl");
    let out = sslp(&["family", "c642", "--out", path_str(&path)]);
    assert_eq!(status(&out), 0);
    assert!(stdout(&out).contains("gate diag(1, 1, 1, i), order 4"), "{}", stdout(&out));
    let out = sslp(&["verify", "--in", path_str(&path)]);
    assert_eq!(status(&out), 0);
    assert!(stdout(&out).contains("diag(1, 1, 1, i)"), "{}", stdout(&out));
}

#[test]
fn extrema_family_reports_gate_and_expectations() {
    let out = sslp(&["family", "extrema", "--n", "6", "--m", "7", "--s", "3"]);
    assert_eq!(status(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("<Z_i> = 1/7, 1/7, 1/7, 1/7, 1/7, 1/7"), "{text}");
    assert!(text.contains("order 7"), "{text}");
    assert!(text.contains("audit: accept"), "{text}");
}

#[test]
fn even_parity_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, r#"{"n": 4, "m": 4, "w": [1, 1, 1, 1], "S": [0, 2]}"#).unwrap();
    let out = sslp(&["family", "even-parity", "--spec-file", path_str(&spec)]);
    assert_eq!(status(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("order 2"), "{}", stdout(&out));
}

#[test]
fn usage_and_input_errors_exit_2() {
    assert_eq!(status(&sslp(&["family", "extrema", "--n", "5", "--m", "4", "--s", "2"])), 2);
    assert_eq!(status(&sslp(&["bogus"])), 2);
    assert_eq!(status(&sslp(&["sweep", "--n", "5"])), 2);
    assert_eq!(status(&sslp(&["verify", "--in", "/nonexistent/catalog.jsonl"])), 2);
    assert_eq!(status(&sslp(&["sweep", "--n", "5", "--k", "2", "--m-min", "9", "--m-max", "4"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.jsonl");
    fs::write(&junk, "{\"schema_version\":1,\"kind\":\"hit\"\n").unwrap();
    assert_eq!(status(&sslp(&["verify", "--in", path_str(&junk)])), 2);
    let spec = dir.path().join("spec.json");
    fs::write(&spec, r#"{"n": 3, "m": 4, "w": [1, 1, 1, 1], "S": [0, 2]}"#).unwrap();
    assert_eq!(status(&sslp(&["family", "even-parity", "--spec-file", path_str(&spec)])), 2);
}

#[test]
fn summarize_and_show_read_catalogs() {
    let dir = tempfile::tempdir().unwrap();
    let cat = fixture_catalog(dir.path());
    let out = sslp(&["summarize", "--in", path_str(&cat)]);
    assert_eq!(status(&out), 0);
    assert!(stdout(&out).contains("0 hits, 28 codes, 0 flagged"), "{}", stdout(&out));
    let out = sslp(&["show", "--in", path_str(&cat), "--index", "0"]);
    assert_eq!(status(&out), 0);
    assert!(stdout(&out).contains("0000"), "{}", stdout(&out));
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn token() -> impl Strategy<Value = String> {
        prop_oneof![
            Just("sweep"), Just("verify"), Just("family"), Just("show"), Just("summarize"),
            Just("extrema"), Just("c642"), Just("even-parity"), Just("--n"), Just("--k"),
            Just("--m"), Just("--s"), Just("--m-min"), Just("--m-max"), Just("--mode"),
            Just("--in"), Just("--jobs"), Just("--coprime"), Just("rational"), Just("0"),
            Just("1"), Just("2"), Just("3"), Just("4"), Just("-1"), Just("x"),
        ]
        .prop_map(str::to_string)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exit_status_is_always_documented(args in proptest::collection::vec(token(), 0..8)) {
            let args: Vec<&str> = args.iter().map(String::as_str).collect();
            let code = sslp(&args).status.code();
            prop_assert!(matches!(code, Some(0..=2)), "{args:?} gave {code:?}");
        }

        #[test]
        fn sweep_output_always_verifies(n in 2usize..=5, k in 2usize..=3, m in 2u32..=8) {
            let dir = tempfile::tempdir().unwrap();
            let cat = dir.path().join("c.jsonl");
            let (n, k, m) = (n.to_string(), k.to_string(), m.to_string());
            let out = sslp(&["sweep", "--n", &n, "--k", &k, "--m-min", &m, "--m-max", &m, "--out", path_str(&cat)]);
            prop_assert_eq!(status(&out), 0);
            prop_assert_eq!(status(&sslp(&["verify", "--in", path_str(&cat)])), 0);
        }
    }
}
