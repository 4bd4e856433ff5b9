use std::path::Path;
use std::process::{Command, Output};

use litsynth::fixtures;

fn litsynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_litsynth")).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(litsynth(&[]).status.code(), Some(1));
    assert_eq!(litsynth(&["--topic", "x", "--years", "2024:2016"]).status.code(), Some(1));
    assert_eq!(litsynth(&["--topic", "x", "--years", "twenty"]).status.code(), Some(1));
    assert_eq!(litsynth(&["--topic", "x", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(litsynth(&["--topic", "x", "--disable", "ocr"]).status.code(), Some(1));
    assert_eq!(litsynth(&["kb", "query"]).status.code(), Some(1));
    let help = litsynth(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("--summariser-endpoint"));
}

#[test]
fn run_query_and_conflict() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixtures::case_study_corpus(&dir.path().join("corpus")).unwrap();
    let kb = dir.path().join("kb.jsonl");
    let report = dir.path().join("report.md");
    let artifacts = dir.path().join("scripts");
    let common = [
        "--topic", "autoregressive language models",
        "--years", "2016:2024",
        "--corpus-cache", s(&corpus.dir),
        "--kb", s(&kb),
        "--report", s(&report),
        "--artifacts", s(&artifacts),
    ];
    let run = litsynth(&common);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(stdout(&run).starts_with("3 papers"));
    assert!(report.is_file() && kb.is_file() && artifacts.is_dir());

    let facts = litsynth(&["kb", "query", "--kb", s(&kb), "--fact", "learning_rate"]);
    assert_eq!(facts.status.code(), Some(0));
    let text = stdout(&facts);
    assert!(text.contains("local:case-awd-lstm\tlearning_rate\t30"), "{text}");

    let hist = litsynth(&["kb", "query", "--kb", s(&kb), "--histogram", "steps", "--json"]);
    let rows: serde_json::Value = serde_json::from_slice(&hist.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);

    let papers = litsynth(&["kb", "query", "--kb", s(&kb), "--metric", "perplexity", "--cmp", "<", "--threshold", "20"]);
    assert!(stdout(&papers).contains("local:case-transformer-xl"));
    assert!(!stdout(&papers).contains("awd"));

    let eval = litsynth(&["eval", "--kb", s(&kb), "--gold", s(&corpus.gold_path())]);
    assert_eq!(eval.status.code(), Some(0));
    assert!(stdout(&eval).contains("overall"));

    // same KB, different extraction: append-only conflict is a failed run
    let mut disabled = common.to_vec();
    disabled.extend(["--disable", "rule_patterns"]);
    let conflict = litsynth(&disabled);
    assert_eq!(conflict.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&conflict.stderr).contains("parse_extract"));
    disabled.push("--overwrite");
    assert_eq!(litsynth(&disabled).status.code(), Some(0));
}

#[test]
fn ablate_and_scale_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixtures::case_study_corpus(&dir.path().join("corpus")).unwrap();
    let out = dir.path().join("ablation");
    let ablate = litsynth(&["ablate", "--corpus-cache", s(&corpus.dir), "--out", s(&out)]);
    assert_eq!(ablate.status.code(), Some(0), "{}", String::from_utf8_lossy(&ablate.stderr));
    assert!(stdout(&ablate).contains("no_rule_patterns"));
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("ablation.json")).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 5);

    let scale_dir = dir.path().join("scaling");
    let scale = litsynth(&["scale", "--sizes", "4,8", "--out", s(&scale_dir), "--json"]);
    assert_eq!(scale.status.code(), Some(0), "{}", String::from_utf8_lossy(&scale.stderr));
    let report: serde_json::Value = serde_json::from_slice(&scale.stdout).unwrap();
    assert_eq!(report["measurements"].as_array().unwrap().len(), 2);
    assert!(scale_dir.join("scaling.json").is_file());
}

#[test]
fn missing_gold_is_a_failed_run() {
    let dir = tempfile::tempdir().unwrap();
    let kb = dir.path().join("kb.jsonl");
    std::fs::write(&kb, "{\"format\":\"litsynth-kb\",\"version\":1}\n").unwrap();
    let out = litsynth(&["eval", "--kb", s(&kb), "--gold", s(&dir.path().join("absent.jsonl"))]);
    assert_eq!(out.status.code(), Some(2));
}
