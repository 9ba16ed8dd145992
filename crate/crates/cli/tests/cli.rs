//! Runs the `causet` binary. JSON outputs are compared with the files under
//! `tests/golden`; set `UPDATE_GOLDEN=1` to rewrite them after an intended
//! format change.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use causet::corpus::{load_fixture, FIXTURE_NAMES, NEGATIVE_SOURCES};
use serde_json::Value;

fn causet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_causet"))
        .args(args)
        .env_remove("CAUSET_MAX_VARS")
        .output()
        .expect("binary runs")
}

fn status(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("not JSON ({e}): {}", stdout(out)))
}

/// Compares raw output, so field order is pinned as well as content.
fn golden(name: &str, out: &Output) {
    json(out);
    golden_text(name, &stdout(out));
}

fn golden_text(name: &str, text: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.json"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, text).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e}; run with UPDATE_GOLDEN=1 to create it", path.display()));
    assert_eq!(text, expected, "golden file {} differs", path.display());
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

const ROCKS: [&str; 4] = ["--builtin", "rock-throw-5var", "--context", "U_ST=1,U_BT=1"];

#[test]
fn validate_exit_codes() {
    assert_eq!(status(&causet(&["validate", "--builtin", "forest-fire-disjunctive"])), 0);

    let (_, cyclic) = NEGATIVE_SOURCES.iter().find(|(n, _)| *n == "camping-cyclic").unwrap();
    let path = temp_file("camping-cyclic.cm", cyclic);
    let out = causet(&["validate", path.to_str().unwrap()]);
    assert_eq!(status(&out), 1);
    assert!(stdout(&out).contains("cycle C -> F -> C"), "{}", stdout(&out));
    let out = causet(&["validate", "--json", path.to_str().unwrap()]);
    let v = json(&out);
    assert_eq!(v["valid"], false);
    assert_eq!(v["violations"][0]["line"], 5);

    let out = causet(&["validate", "/definitely/not/here.cm"]);
    assert_eq!(status(&out), 2);
    assert!(stderr(&out).contains("cannot read"));
    assert!(stdout(&out).is_empty());
}

#[test]
fn syntax_errors_exit_2_with_located_diagnostics() {
    let path = temp_file("broken.cm", "model m {\n  exogenous { U: {0,1} }\n  endogenous { X {0,1} }\n}\n");
    let out = causet(&["validate", path.to_str().unwrap()]);
    assert_eq!(status(&out), 2);
    assert!(stderr(&out).contains("broken.cm:3:"), "{}", stderr(&out));
}

#[test]
fn validate_report() {
    golden("validate-rock-throw-5var", &causet(&["validate", "--json", "builtin:rock-throw-5var"]));
}

#[test]
fn eval_prints_truth_values() {
    let fire = ["eval", "--builtin", "forest-fire-disjunctive", "--context", "U_L=1,U_ML=1"];
    for (formula, expected) in [("[ML<-0](F=1)", "true\n"), ("[L<-0, ML<-0](F=0)", "true\n"), ("F=0", "false\n")] {
        let out = causet(&[&fire[..], &["--formula", formula]].concat());
        assert_eq!(status(&out), 0, "{formula}");
        assert_eq!(stdout(&out), expected, "{formula}");
    }
    let out = causet(&[&fire[..], &["--formula", "[ML<-0](F=1)", "--json"]].concat());
    golden("eval-forest-fire", &out);
}

#[test]
fn eval_with_partial_context_lists_missing_variables() {
    let out = causet(&["eval", "--builtin", "forest-fire-disjunctive", "--context", "U_L=1", "--formula", "F=1"]);
    assert_eq!(status(&out), 2);
    assert!(stderr(&out).contains("U_ML"), "{}", stderr(&out));
}

#[test]
fn repeated_context_flags_combine() {
    let out = causet(&[
        "eval",
        "--builtin",
        "forest-fire-conjunctive",
        "--context",
        "U_L=1",
        "--context",
        "U_ML=0",
        "--formula",
        "F=0",
    ]);
    assert_eq!(stdout(&out), "true\n");
}

#[test]
fn cause_rock_throw() {
    let out = causet(&[&["cause"], &ROCKS[..], &["--cause", "ST=1", "--effect", "BS=1"]].concat());
    assert_eq!(status(&out), 0);
    assert!(stdout(&out).contains("W = {BT}, w: BT=0"), "{}", stdout(&out));

    let out = causet(&[&["cause"], &ROCKS[..], &["--cause", "BT=1", "--effect", "BS=1"]].concat());
    assert_eq!(status(&out), 1);
    assert!(stdout(&out).contains("not an actual cause"));

    for (cand, name) in [("ST=1", "cause-rock-throw-5var-suzy"), ("BT=1", "cause-rock-throw-5var-billy")] {
        let out = causet(&[&["cause", "--json"], &ROCKS[..], &["--cause", cand, "--effect", "BS=1"]].concat());
        golden(name, &out);
    }
}

#[test]
fn verbose_shows_contingency_details() {
    let out = causet(&[&["cause", "-v"], &ROCKS[..], &["--cause", "ST=1", "--effect", "BS=1"]].concat());
    let text = stdout(&out);
    assert!(text.contains("Z = {ST, SH, BH, BS}, z*: ST=1, SH=1, BH=0, BS=1"), "{text}");
    assert!(text.contains("search:"), "{text}");
}

#[test]
fn cause_bodyguard_extended() {
    let base = ["cause", "--builtin", "bodyguard", "--cause", "B=1", "--effect", "VS=1"];
    assert_eq!(status(&causet(&base)), 0);
    for sem in ["literal", "solution"] {
        let out = causet(&[&base[..], &["--extended", "--semantics", sem, "--json"]].concat());
        let v = json(&out);
        assert_eq!(v["mode"], "extended");
        assert_eq!(v["semantics"], sem);
        golden(&format!("cause-bodyguard-extended-{sem}"), &out);
    }
}

#[test]
fn extended_needs_a_ranking() {
    let out = causet(&[&["cause", "--extended"], &ROCKS[..], &["--cause", "ST=1", "--effect", "BS=1"]].concat());
    assert_eq!(status(&out), 2);
    assert!(stderr(&out).contains("ranking"));
}

#[test]
fn semantics_requires_extended() {
    let out = causet(&[&["cause", "--semantics", "solution"], &ROCKS[..], &["--cause", "ST=1", "--effect", "BS=1"]].concat());
    assert_eq!(status(&out), 2);
}

#[test]
fn search_cap_is_a_loud_error() {
    let args = ["cause", "--builtin", "doctors(3)", "--cause", "T1=0", "--effect", "S=1"];
    let out = Command::new(env!("CARGO_BIN_EXE_causet"))
        .args(args)
        .env("CAUSET_MAX_VARS", "4")
        .output()
        .unwrap();
    assert_eq!(status(&out), 2);
    assert!(stderr(&out).contains("CAUSET_MAX_VARS"), "{}", stderr(&out));
    let out = Command::new(env!("CARGO_BIN_EXE_causet"))
        .args(args)
        .env("CAUSET_MAX_VARS", "many")
        .output()
        .unwrap();
    assert_eq!(status(&out), 2);
}

#[test]
fn causes_tables() {
    let out = causet(&["causes", "--builtin", "forest-fire-disjunctive", "--context", "both", "--effect", "F=1", "--json"]);
    assert_eq!(status(&out), 0);
    let v = json(&out);
    let found: Vec<String> = v["causes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["candidate"][0]["var"].as_str().unwrap().to_owned())
        .collect();
    assert_eq!(found, ["L", "ML"]);
    golden("causes-forest-fire-disjunctive", &out);

    let out = causet(&["causes", "--builtin", "doctors(3)", "--extended", "--effect", "S=1", "--json"]);
    assert_eq!(status(&out), 0);
    golden("causes-doctors-3-extended", &out);

    let out = causet(&[
        "causes",
        "--builtin",
        "forest-fire-conjunctive",
        "--context",
        "U_L=1,U_ML=0",
        "--effect",
        "F=1",
    ]);
    assert_eq!(status(&out), 2);
    assert!(stderr(&out).contains("AC1"));
}

#[test]
fn causes_with_pairs() {
    let out = causet(&[
        "causes",
        "--builtin",
        "forest-fire-conjunctive",
        "--effect",
        "F=1",
        "--max-conjuncts",
        "2",
    ]);
    assert_eq!(status(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("L=1 "), "{text}");
    assert!(!text.contains("L=1 & ML=1"), "a pair of causes violates minimality: {text}");
}

#[test]
fn compare_reports_stability() {
    let out = causet(&["compare", "builtin:rock-throw-3var", "builtin:rock-throw-5var", "--cause", "BT=1", "--effect", "BS=1", "--json"]);
    assert_eq!(status(&out), 1);
    let v = json(&out);
    assert_eq!(v["stable"], false);
    assert_eq!(v["topology_changed"], serde_json::json!([true]));
    golden("compare-rock-throw", &out);

    let out = causet(&["compare", "builtin:train-simple", "builtin:train-blocked", "--cause", "S=1", "--effect", "A=1", "--json"]);
    assert_eq!(status(&out), 1);
    let v = json(&out);
    assert_eq!(v["rows"][0]["is_cause"], false);
    assert_eq!(v["rows"][1]["is_cause"], true);

    let out = causet(&["compare", "builtin:bodyguard", "builtin:bodyguard", "--cause", "B=1", "--effect", "VS=1"]);
    assert_eq!(status(&out), 0);
    assert!(stdout(&out).ends_with("stable\n"));
}

#[test]
fn compare_reports_row_errors_inline() {
    let out = causet(&[
        "compare",
        "builtin:rock-throw-5var",
        "builtin:rock-throw-3var",
        "--cause",
        "SH=1",
        "--effect",
        "BS=1",
        "--json",
    ]);
    assert_eq!(status(&out), 1);
    let v = json(&out);
    assert_eq!(v["rows"][0]["is_cause"], true);
    assert!(v["rows"][1]["error"].as_str().unwrap().contains("SH"));
}

#[test]
fn compare_takes_one_context_per_model() {
    let out = causet(&[
        "compare",
        "builtin:forest-fire-disjunctive",
        "builtin:forest-fire-conjunctive",
        "--contexts",
        "U_L=1,U_ML=0",
        "-",
        "--cause",
        "L=1",
        "--effect",
        "F=1",
        "--json",
    ]);
    let v = json(&out);
    assert_eq!(v["rows"][0]["context"][1]["value"], 0);
    assert_eq!(v["rows"][1]["context"][1]["value"], 1);
    assert_eq!(status(&out), 0);
}

#[test]
fn fixtures_list_and_extract() {
    let out = causet(&["fixtures", "list", "--json"]);
    assert_eq!(status(&out), 0);
    golden("fixtures-list", &out);

    for name in FIXTURE_NAMES.iter().copied().chain(["doctors(5)", "camping-cyclic"]) {
        let out = causet(&["fixtures", "extract", name]);
        assert_eq!(status(&out), 0, "{name}");
        let path = temp_file(&format!("{name}.cm"), &stdout(&out));
        let expected = if name == "camping-cyclic" { 1 } else { 0 };
        assert_eq!(status(&causet(&["validate", path.to_str().unwrap()])), expected, "{name}");
    }
    assert_eq!(status(&causet(&["fixtures", "extract", "no-such-model"])), 2);
}

/// Every recorded expectation of the corpus, through the binary, against
/// one golden document per fixture.
#[test]
fn corpus_verdicts_through_the_cli() {
    for name in FIXTURE_NAMES {
        let f = load_fixture(name).unwrap();
        let mut results = Vec::new();
        for e in &f.expectations {
            let base = [
                "cause",
                "--json",
                "--builtin",
                f.name.as_str(),
                "--context",
                e.context.as_str(),
                "--cause",
                e.candidate.as_str(),
                "--effect",
                e.effect.as_str(),
            ];
            let out = causet(&base);
            assert_eq!(status(&out), if e.preliminary { 0 } else { 1 }, "{name}: {}", e.candidate);
            let v = json(&out);
            assert_eq!(v["is_cause"], e.preliminary);
            results.push(stdout(&out).trim_end().to_owned());
            if let Some(expected) = e.extended {
                for sem in ["literal", "solution"] {
                    let out = causet(&[&base[..], &["--extended", "--semantics", sem]].concat());
                    let v = json(&out);
                    assert_eq!(v["is_cause"], expected, "{name} ({sem}): {}", e.candidate);
                    results.push(stdout(&out).trim_end().to_owned());
                }
            }
        }
        golden_text(&format!("corpus-{name}"), &format!("[\n{}\n]\n", results.join(",\n")));
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["causes", "--builtin", "soldiers-trumping", "--effect", "A=1", "--max-conjuncts", "2", "--json"];
    assert_eq!(causet(&args).stdout, causet(&args).stdout);
}
