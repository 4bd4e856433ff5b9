use std::path::Path;

use litsynth::config::{Component, ConfigError, SourceKind, StageToggles};
use litsynth::fixtures;
use litsynth::ingest::{OfflineTransport, PaperStatus, RecordedExchange, ReplayTransport, SearchSettings, arxiv, semantic_scholar};
use litsynth::kb::KnowledgeBase;
use litsynth::{Error, RunConfig, StageName, run_pipeline_with};

fn config(corpus: &Path, out: &Path) -> RunConfig {
    let mut c = RunConfig::new("autoregressive language models");
    c.corpus_cache = corpus.to_path_buf();
    c.kb_path = out.join("kb.jsonl");
    c.report_path = out.join("report.md");
    c.artifacts_dir = out.join("artifacts");
    c
}

#[test]
fn three_paper_corpus_yields_entries_topics_and_scripts() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixtures::case_study_corpus(&dir.path().join("corpus")).unwrap();
    let out = run_pipeline_with(&config(&corpus.dir, dir.path()), &OfflineTransport).unwrap();
    assert_eq!(out.kb.len(), 3);
    assert!(out.kb.entries().all(|e| e.record.status == PaperStatus::Extracted));
    assert!(!out.report.is_empty());
    assert!(!out.script_artifacts.is_empty());
    for path in &out.script_artifacts {
        let text = std::fs::read_to_string(path).unwrap();
        let id = text.lines().next().unwrap().split_whitespace().nth(4).unwrap();
        assert!(out.kb.get(id).is_some(), "script for unknown paper {id}");
    }
    assert_eq!(out.report.len(), out.topic_model.as_ref().unwrap().k);
    let stages: Vec<StageName> = out.timings.iter().map(|(s, _)| *s).collect();
    assert_eq!(stages, StageName::ORDER.to_vec());
}

#[test]
fn runs_without_classifier_or_summariser() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixtures::realistic_corpus(&dir.path().join("corpus"), 3).unwrap();
    let mut cfg = config(&corpus.dir, &dir.path().join("a"));
    cfg.stage_toggles = StageToggles::without(Component::RelevanceClassifier);
    let keywords_only = run_pipeline_with(&cfg, &OfflineTransport).unwrap();
    assert_eq!(keywords_only.kb.len(), corpus.ids.len());

    let full = run_pipeline_with(&config(&corpus.dir, &dir.path().join("b")), &OfflineTransport).unwrap();
    let mut no_llm = config(&corpus.dir, &dir.path().join("c"));
    no_llm.stage_toggles = StageToggles::without(Component::LlmSummarisation);
    no_llm.summariser_endpoint = Some("http://127.0.0.1:9/generate".into());
    let no_llm = run_pipeline_with(&no_llm, &OfflineTransport).unwrap();
    assert_eq!(full.kb.to_jsonl(), no_llm.kb.to_jsonl());
}

#[test]
fn unreachable_summariser_falls_back_to_extractive() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixtures::case_study_corpus(&dir.path().join("corpus")).unwrap();
    let mut cfg = config(&corpus.dir, dir.path());
    cfg.summariser_endpoint = Some("http://127.0.0.1:9/generate".into());
    let out = run_pipeline_with(&cfg, &OfflineTransport).unwrap();
    assert!(!out.report.is_empty());
    assert!(out.report_text.contains("local:case-"));
}

fn empty_search_exchanges() -> Vec<RecordedExchange> {
    let s = SearchSettings::default();
    let q = "nothing matches this";
    vec![
        RecordedExchange {
            url: arxiv::query_url(&s.arxiv_base, q, (2016, 2024), 0, s.page_size),
            status: 200,
            body: "<feed xmlns=\"http://www.w3.org/2005/Atom\" xmlns:opensearch=\"http://a9.com/-/spec/opensearch/1.1/\"><opensearch:totalResults>0</opensearch:totalResults></feed>".into(),
        },
        RecordedExchange {
            url: semantic_scholar::query_url(&s.semantic_scholar_base, q, (2016, 2024), 0, s.page_size),
            status: 200,
            body: r#"{"total": 0, "offset": 0, "data": []}"#.into(),
        },
    ]
}

#[test]
fn empty_retrieval_is_a_successful_empty_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(&dir.path().join("cache"), dir.path());
    cfg.topic_query = "nothing matches this".into();
    cfg.year_min = 2016;
    cfg.year_max = 2024;
    let out = run_pipeline_with(&cfg, &ReplayTransport::new(empty_search_exchanges())).unwrap();
    assert!(out.kb.is_empty());
    assert!(out.report.is_empty());
    assert!(out.script_artifacts.is_empty());
    assert!(cfg.kb_path.is_file());
}

#[test]
fn unreachable_api_is_a_partial_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(&dir.path().join("empty-cache"), dir.path());
    cfg.sources = vec![SourceKind::Arxiv];
    match run_pipeline_with(&cfg, &OfflineTransport) {
        Err(Error::PartialRun { completed, failed, .. }) => {
            assert!(completed.is_empty());
            assert_eq!(failed, StageName::Ingest);
        }
        other => panic!("expected a partial run, got {other:?}"),
    }
}

#[test]
fn unwritable_output_fails_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixtures::case_study_corpus(&dir.path().join("corpus")).unwrap();
    let mut cfg = config(&corpus.dir, dir.path());
    cfg.kb_path = dir.path().to_path_buf();
    match run_pipeline_with(&cfg, &OfflineTransport) {
        Err(Error::Config(ConfigError::Unwritable { .. })) => {}
        other => panic!("expected a configuration error, got {other:?}"),
    }
    assert!(!cfg.report_path.exists());
}

#[test]
fn recorded_search_dedups_skips_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(&dir.path().join("cache"), dir.path());
    cfg.topic_query = fixtures::FIXTURE_QUERY.into();
    (cfg.year_min, cfg.year_max) = fixtures::FIXTURE_YEARS;
    cfg.stage_toggles.set(Component::RelevanceClassifier, false);
    let out = run_pipeline_with(&cfg, &ReplayTransport::new(fixtures::recorded_exchanges())).unwrap();

    // 9 usable arXiv entries + 3 usable S2 entries, one shared by DOI
    assert_eq!(out.kb.len(), 11);
    let dead = out
        .kb
        .entries()
        .find(|e| e.record.pdf_url.as_deref() == Some(fixtures::DEAD_PDF_URL))
        .expect("dead-link paper kept");
    assert_eq!(dead.record.status, PaperStatus::ParseFailed);
    assert!(!dead.record.review_flags.is_empty());
    let merged = out.kb.entries().filter(|e| e.record.title == "Segment Memory for Attention Decoders").count();
    assert_eq!(merged, 1);
    assert!(out.kb.entries().any(|e| e.record.status == PaperStatus::Extracted
        && e.facts.hyperparams.iter().any(|f| f.name.as_str() == "learning_rate")));
    // the cache now holds a manifest, so a second run is offline
    let again = run_pipeline_with(&cfg, &OfflineTransport).unwrap();
    assert_eq!(again.kb.to_jsonl(), out.kb.to_jsonl());
}

#[test]
fn knowledge_base_is_append_only_unless_overwriting() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixtures::case_study_corpus(&dir.path().join("corpus")).unwrap();
    let mut cfg = config(&corpus.dir, dir.path());
    cfg.stage_toggles = StageToggles::without(Component::RulePatterns);
    run_pipeline_with(&cfg, &OfflineTransport).unwrap();

    cfg.stage_toggles = StageToggles::all_on();
    let err = run_pipeline_with(&cfg, &OfflineTransport).unwrap_err();
    assert!(matches!(err, Error::PartialRun { failed: StageName::ParseExtract, .. }), "{err}");

    cfg.overwrite = true;
    let out = run_pipeline_with(&cfg, &OfflineTransport).unwrap();
    let on_disk = KnowledgeBase::load(&cfg.kb_path).unwrap();
    assert_eq!(on_disk.to_jsonl(), out.kb.to_jsonl());
    assert!(on_disk.entries().any(|e| !e.facts.hyperparams.is_empty()));
}

#[test]
fn worker_count_does_not_change_the_knowledge_base() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixtures::realistic_corpus(&dir.path().join("corpus"), 11).unwrap();
    let mut kbs = Vec::new();
    for workers in [1, 3, 8] {
        let mut cfg = config(&corpus.dir, &dir.path().join(format!("w{workers}")));
        cfg.worker_count = workers;
        run_pipeline_with(&cfg, &OfflineTransport).unwrap();
        kbs.push(std::fs::read(&cfg.kb_path).unwrap());
    }
    assert!(kbs.windows(2).all(|w| w[0] == w[1]));
}
