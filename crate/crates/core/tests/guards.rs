// The size guard is process-global, so these checks run in their own binary.

use psdef::guard;
use psdef::workbench::{generate_corpus, parse_session, run_parsed, CorpusSpec, RunOptions};

#[test]
fn guard_aborts_and_truncations() {
    let text = r#"{"version": 1, "prime": 3,
        "rings": {"F": {"kind": "zmod", "n": 1}},
        "groups": {"Z": {"kind": "cyclic", "n": 3}},
        "modules": {"T": {"kind": "trivial", "ring": "F", "group": "Z", "rank": 1},
                    "V": {"kind": "trivial", "ring": "F", "group": "Z", "rank": 5}},
        "commands": [{"op": "h1", "module": "T"}, {"op": "submodules", "module": "V"}]}"#;
    let s = parse_session(text).unwrap();
    let opts = RunOptions { max_order: Some(100), ..RunOptions::default() };
    let (bundle, err) = run_parsed(&s, &opts);
    let err = err.expect("F3^5 exceeds 100");
    assert_eq!(err.exit_code(), 4, "{err}");
    assert!(err.to_string().starts_with("command "), "{err}");
    let cmds = &bundle.provenance.commands;
    assert!(cmds.last().unwrap().guards.iter().any(|g| g.contains("size limit")), "{cmds:?}");
    assert_eq!(bundle.results["results"].as_array().unwrap().len(), 1);

    guard::set_max_order(50);
    let corpus = generate_corpus(&CorpusSpec { modules: 3, gmas: 2, reps: 0, saturated: 0, ..CorpusSpec::default_for(0) }).unwrap();
    assert!(corpus.warnings.iter().any(|w| w.contains("truncated")), "{:?}", corpus.warnings);
    assert!(corpus.modules.iter().all(|m| psdef::grouprep::GModule::from_data(&m.data).unwrap().order() <= 50));

    guard::set_max_order(1_000_000);
}
