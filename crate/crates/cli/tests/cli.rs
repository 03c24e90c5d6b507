use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use psdef::workbench::{generate_corpus, CorpusSpec};

fn psdef(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psdef")).args(args).output().expect("binary runs")
}

fn sample() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../sessions/s3_mod3.json")
}

fn session(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("session.json");
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_run_and_explain_the_sample() {
    let out = psdef(&["validate", "--input", s(&sample())]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let out = psdef(&["explain", "--input", s(&sample())]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[8] bridge"));

    let dir = tempfile::tempdir().unwrap();
    let out = psdef(&["run", "--input", s(&sample()), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["results.json", "summary.txt", "provenance.json", "timings.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn exit_codes_follow_the_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let bad = session(dir.path(), "{\"version\": 1, \"prime\": ");
    assert_eq!(psdef(&["run", "--input", s(&bad)]).status.code(), Some(2));

    let undeclared = session(dir.path(), r#"{"version": 1, "prime": 3, "commands": [{"op": "h1", "module": "M"}]}"#);
    assert_eq!(psdef(&["validate", "--input", s(&undeclared)]).status.code(), Some(2));

    let big = session(
        dir.path(),
        r#"{"version": 1, "prime": 3,
            "rings": {"F": {"kind": "zmod", "n": 1}},
            "groups": {"Z": {"kind": "cyclic", "n": 3}},
            "modules": {"V": {"kind": "trivial", "ring": "F", "group": "Z", "rank": 5}},
            "commands": [{"op": "submodules", "module": "V"}]}"#,
    );
    let out = psdef(&["run", "--input", s(&big), "--max-order", "100"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(psdef(&["run", "--input", s(&big)]).status.code(), Some(0));

    let failing = session(
        dir.path(),
        r#"{"version": 1, "prime": 3,
            "rings": {"F": {"kind": "zmod", "n": 1}},
            "groups": {"Z": {"kind": "cyclic", "n": 3}},
            "modules": {"V": {"kind": "regular", "ring": "F", "group": "Z"}},
            "conditions": {"bad": {"kind": "plugin", "name": "broken", "command": "false"}},
            "commands": [{"op": "vc", "module": "V", "condition": "bad"}]}"#,
    );
    assert_eq!(psdef(&["run", "--input", s(&failing)]).status.code(), Some(3));
}

#[test]
fn verify_is_deterministic_on_a_small_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let spec = CorpusSpec { modules: 3, gmas: 3, reps: 2, saturated: 2, ..CorpusSpec::default_for(4) };
    let corpus = generate_corpus(&spec).unwrap();
    let input = dir.path().join("corpus.json");
    std::fs::write(&input, serde_json::to_string(&corpus).unwrap()).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out_dir in [&a, &b] {
        let out = psdef(&["verify", "--input", s(&input), "--out-dir", s(out_dir), "--jobs", "1"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    }
    let ra = std::fs::read(a.join("results.json")).unwrap();
    assert_eq!(ra, std::fs::read(b.join("results.json")).unwrap());
    assert!(a.join("timings.json").exists() && a.join("provenance.json").exists());
}

#[test]
fn corpus_is_written_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out_dir in [&a, &b] {
        let out = psdef(&["corpus", "--seed", "7", "--out-dir", s(out_dir)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(std::fs::read(a.join("corpus.json")).unwrap(), std::fs::read(b.join("corpus.json")).unwrap());
}
