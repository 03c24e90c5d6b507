use std::path::{Path, PathBuf};

use serde_json::json;

use psdef::conditions::ConditionSpec;
use psdef::workbench::{
    default_conditions, generate_corpus, parse_session, run_parsed, run_session, verify_theorems, Corpus, CorpusSpec, RunOptions,
};
use psdef::Error;

fn sample() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../sessions/s3_mod3.json")
}

#[test]
fn sample_session_writes_a_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions { out_dir: Some(dir.path().to_path_buf()), ..RunOptions::default() };
    let bundle = run_session(&sample(), &opts).unwrap();
    for f in ["results.json", "summary.txt", "provenance.json", "timings.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let r = &bundle.results["results"];
    assert_eq!(r[0]["output"]["count"], json!(4));
    assert_eq!(r[1]["output"]["order"], json!("1"));
    assert_eq!(r[3]["output"]["order"], json!("3"));
    assert_eq!(r[4]["output"]["with_condition"]["order"], json!("1"));
    assert_eq!(r[8]["output"]["bijective"], json!(true));
    assert!(bundle.results_json().find("seconds").is_none());
}

#[test]
fn replay_is_byte_identical_and_cache_is_sound() {
    let text = std::fs::read_to_string(sample()).unwrap();
    let s = parse_session(&text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cached = RunOptions { cache_dir: Some(dir.path().to_path_buf()), ..RunOptions::default() };
    let (plain, e1) = run_parsed(&s, &RunOptions::default());
    let (cold, e2) = run_parsed(&s, &cached);
    let (warm, e3) = run_parsed(&s, &cached);
    assert!(e1.is_none() && e2.is_none() && e3.is_none());
    assert_eq!(plain.results_json(), run_parsed(&s, &RunOptions::default()).0.results_json());
    assert_eq!(plain.results_json(), cold.results_json());
    assert_eq!(cold.results_json(), warm.results_json());
    assert_eq!(plain.summary, warm.summary);
    assert_eq!(warm.provenance.cache.hits as usize, s.commands.len());
}

#[test]
fn corrupted_cache_entries_are_recomputed() {
    let text = std::fs::read_to_string(sample()).unwrap();
    let s = parse_session(&text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cached = RunOptions { cache_dir: Some(dir.path().to_path_buf()), ..RunOptions::default() };
    let (first, _) = run_parsed(&s, &cached);
    for entry in walk(dir.path()) {
        std::fs::write(&entry, b"{ not json").unwrap();
    }
    let (second, err) = run_parsed(&s, &cached);
    assert!(err.is_none());
    assert_eq!(first.results_json(), second.results_json());
    assert_eq!(second.provenance.cache.hits, 0);
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap().flatten() {
        let p = e.path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn undeclared_reference_exits_with_two() {
    let text = r#"{"version": 1, "prime": 3, "commands": [{"op": "h1", "module": "Nowhere"}]}"#;
    let s = parse_session(text).unwrap();
    let (_, err) = run_parsed(&s, &RunOptions::default());
    let err = err.unwrap();
    assert!(err.to_string().contains("Nowhere"), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn parse_errors_carry_a_position() {
    let err = parse_session("{\"version\": 1,\n \"prime\": }").unwrap_err();
    match err {
        Error::ParseError { line, .. } => assert_eq!(line, 2),
        other => panic!("{other}"),
    }
    assert_eq!(parse_session("[]").unwrap_err().exit_code(), 2);
}

#[test]
fn operation_errors_exit_with_three() {
    let text = r#"{"version": 1, "prime": 3,
        "rings": {"F": {"kind": "zmod", "n": 1}},
        "groups": {"Z": {"kind": "cyclic", "n": 3}},
        "modules": {"V": {"kind": "regular", "ring": "F", "group": "Z"}},
        "conditions": {"bad": {"kind": "plugin", "name": "broken", "command": "false"}},
        "commands": [{"op": "h1", "module": "V"}, {"op": "vc", "module": "V", "condition": "bad"}]}"#;
    let s = parse_session(text).unwrap();
    let (bundle, err) = run_parsed(&s, &RunOptions::default());
    let err = err.unwrap();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().starts_with("command 1"), "{err}");
    assert_eq!(bundle.results["results"].as_array().unwrap().len(), 1);
}

#[test]
fn corpus_generation_is_deterministic() {
    let spec = CorpusSpec { modules: 6, gmas: 6, reps: 4, saturated: 3, ..CorpusSpec::default_for(11) };
    let a = generate_corpus(&spec).unwrap();
    let b = generate_corpus(&spec).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = generate_corpus(&CorpusSpec { seed: 12, ..spec }).unwrap();
    assert_ne!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&c).unwrap());
}

#[test]
fn empty_corpus_passes_vacuously() {
    let corpus = Corpus::empty(CorpusSpec::default_for(0));
    let report = verify_theorems(&corpus, &default_conditions());
    assert!(report.all_pass, "{}", report.summary());
    assert!(report.suites.iter().filter(|s| s.name != "census").all(|s| s.failures.is_empty()));
}

#[test]
fn unstable_plugin_is_withheld() {
    // "cyclic additive group" is closed under subquotients but not under direct sums
    let plugin = ConditionSpec::Plugin {
        name: "cyclic".into(),
        command: "python3".into(),
        args: vec!["-c".into(), "import json,sys; print('true' if len(json.load(open(sys.argv[1]))['exps']) <= 1 else 'false')".into()],
        declared_stable: true,
    };
    let spec = CorpusSpec { modules: 4, gmas: 0, reps: 0, saturated: 0, ..CorpusSpec::default_for(3) };
    let corpus = generate_corpus(&spec).unwrap();
    let mut conds = vec![ConditionSpec::trivial_on("G")];
    conds.push(plugin);
    let report = verify_theorems(&corpus, &conds);
    let audit = report.audits.iter().find(|a| a.condition.contains("cyclic")).unwrap();
    assert!(!audit.stable, "{}", report.summary());
    assert!(audit.counterexample.is_some());
    assert!(report.summary().contains("UNSTABLE"));
    let vc = report.suite("vc_universal").unwrap();
    assert_eq!(vc.stat("conditions_withheld_unstable"), 1);
}

#[test]
fn session_plugins_are_audited_before_use() {
    let text = r#"{"version": 1, "prime": 3,
        "rings": {"F": {"kind": "zmod", "n": 1}},
        "groups": {"Z": {"kind": "cyclic", "n": 3}},
        "modules": {"T": {"kind": "trivial", "ring": "F", "group": "Z", "rank": 1}},
        "conditions": {"cyclic": {"kind": "plugin", "name": "cyclic", "command": "python3", "declared_stable": true,
            "args": ["-c", "import json,sys; print('true' if len(json.load(open(sys.argv[1]))['exps']) <= 1 else 'false')"]}},
        "commands": [{"op": "has_c", "module": "T", "condition": "cyclic"}]}"#;
    let s = parse_session(text).unwrap();
    let (bundle, err) = run_parsed(&s, &RunOptions::default());
    assert!(err.is_none(), "{err:?}");
    let audit = &bundle.results["plugin_audits"][0];
    assert_eq!(audit["stable"], json!(false));
    assert!(bundle.summary.contains("UNSTABLE"), "{}", bundle.summary);
}
