//! Full pipeline over the three-paper case-study corpus: screen, parse,
//! extract, cluster, summarise and write training scripts.
//!
//! cargo run --example end_to_end [-- OUT_DIR]

use std::path::PathBuf;

use litsynth::ingest::OfflineTransport;
use litsynth::{RunConfig, fixtures, run_pipeline_with};

fn main() -> litsynth::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("litsynth-end-to-end"));
    let _ = std::fs::remove_dir_all(&out);
    let corpus = fixtures::case_study_corpus(&out.join("corpus"))?;

    let mut config = RunConfig::new("autoregressive language models");
    config.corpus_cache = corpus.dir.clone();
    config.kb_path = out.join("kb.jsonl");
    config.report_path = out.join("report.md");
    config.artifacts_dir = out.join("scripts");
    config.worker_count = 2;

    // Offline: the corpus cache already holds every document.
    let run = run_pipeline_with(&config, &OfflineTransport)?;
    for (stage, secs) in &run.timings {
        println!("{stage:<14} {secs:.3}s");
    }
    println!("\n{} papers in {}", run.kb.len(), run.kb_path.display());
    for entry in run.kb.entries() {
        println!("  {} {:?}: {} settings, {} results, {} citations", entry.record.canonical_id, entry.record.status,
            entry.facts.hyperparams.len(), entry.facts.results.len(), entry.facts.citations.len());
    }
    println!("\n{}", run.report_text);
    for path in &run.script_artifacts {
        println!("script: {}", path.display());
    }
    Ok(())
}
