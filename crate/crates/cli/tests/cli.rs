use std::path::PathBuf;
use std::process::{Command, Output};

fn clonekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clonekit")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("clonekit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const QUICK: &str = r#"
seed = 7

[clone_laws]
alphabets = [[0, 1]]
tree_size = 3
free_arity = 2

[church]
roundtrip_size = 4
subst_size = 2
coherence_size = 3
"#;

#[test]
fn encode_then_decode_round_trips() {
    let enc = clonekit(&["church", "encode", "--alphabet", "[0,2]", "--vars", "1", "--tree", "(a2 a1 x1)"]);
    assert!(enc.status.success(), "{}", stdout(&enc));
    let out = stdout(&enc);
    let note = out.lines().find(|l| l.trim_start().starts_with("note:")).unwrap();
    let term = note.trim_start().trim_start_matches("note: ").split(" : ").next().unwrap();
    let dec = clonekit(&["church", "decode", "--alphabet", "[0,2]", "--vars", "1", "--term", term]);
    assert!(dec.status.success());
    assert!(stdout(&dec).contains("note: (a2 a1 x1)"));
}

#[test]
fn alphabet_may_come_from_a_file() {
    let path = scratch("a11.txt");
    std::fs::write(&path, "[1, 1]\n").unwrap();
    let o = clonekit(&["church", "encode", "--alphabet", path.to_str().unwrap(), "--tree", "(a1 (a2 x1))"]);
    assert!(o.status.success());
}

#[test]
fn decode_rejects_ill_typed_terms() {
    let o = clonekit(&["church", "decode", "--alphabet", "[0,1]", "--vars", "0", "--term", r"\x:o. x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn profinite_verbs_report_pass() {
    for verb in ["family-of-tree", "check-natural", "search-def", "restrict", "lift", "check-parametric"] {
        let o = clonekit(&["profinite", verb, "--alphabet", "[1]", "--tree", "(a1 (a1 x1))", "--bound", "4"]);
        assert!(o.status.success(), "{}: {}", verb, stdout(&o));
    }
    let o = clonekit(&["profinite", "search-def", "--alphabet", "[1]", "--tree", "(a1 (a1 x1))"]);
    assert!(stdout(&o).contains("defined by (a1 (a1 x1))"));
    let o = clonekit(&["profinite", "check-fixed-point", "--alphabet", "[0,1]", "--vars", "0", "--tree", "(a2 a1)", "--q", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("Q* = 256"));
}

#[test]
fn search_def_is_inconclusive_below_the_size() {
    let o = clonekit(&["profinite", "search-def", "--alphabet", "[1]", "--tree", "(a1 (a1 (a1 x1)))", "--bound", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("inconclusive"));
}

#[test]
fn check_writes_identical_reports() {
    let cfg = scratch("quick.toml");
    std::fs::write(&cfg, QUICK).unwrap();
    let (a, b) = (scratch("a.json"), scratch("b.json"));
    for out in [&a, &b] {
        let o = clonekit(&["check", "church", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stdout(&o));
    }
    let (ja, jb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ja, jb);
    let text = String::from_utf8(ja).unwrap();
    assert!(text.contains("\"verdict\": \"pass\""));
    assert!(text.contains("\"seed\": 7"));
}

#[test]
fn injected_mutations_fail_the_run() {
    let cfg = scratch("mutants.toml");
    std::fs::write(&cfg, format!("inject_mutations = true\n{}", QUICK)).unwrap();
    let o = clonekit(&["check", "clone-laws", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("witness:"));
}

#[test]
fn missing_alphabet_file_is_a_config_error() {
    let cfg = scratch("missing.toml");
    std::fs::write(&cfg, "[church]\nalphabets = [[0, 1], \"nowhere.txt\"]\n").unwrap();
    let o = clonekit(&["check", "church", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("church.alphabets[1]"));
}
