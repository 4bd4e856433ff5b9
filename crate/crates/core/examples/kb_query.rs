//! Builds a knowledge base from the realistic mini-corpus and runs the four
//! query kinds, e.g. which learning rates are most common.
//!
//! cargo run --example kb_query

use litsynth::ingest::OfflineTransport;
use litsynth::kb::{Comparator, Query};
use litsynth::{RunConfig, fixtures, run_pipeline_with};

fn main() -> litsynth::Result<()> {
    let dir = tempfile::tempdir().map_err(|e| litsynth::Error::io("<tempdir>", e))?;
    let corpus = fixtures::realistic_corpus(&dir.path().join("corpus"), 42)?;
    let mut config = RunConfig::new("autoregressive language models");
    config.corpus_cache = corpus.dir.clone();
    config.kb_path = dir.path().join("kb.jsonl");
    config.report_path = dir.path().join("report.md");
    config.artifacts_dir = dir.path().join("scripts");
    let kb = run_pipeline_with(&config, &OfflineTransport)?.kb;

    let queries = [
        ("most common learning rates", Query::ValueHistogram { name: "learning_rate".into() }),
        ("every reported dropout", Query::FactsByName { name: "dropout".into() }),
        (
            "perplexity below 40",
            Query::PapersByMetricThreshold { metric: "perplexity".into(), comparator: Comparator::Lt, threshold: 40.0, dataset: None },
        ),
        ("titles mentioning transformer", Query::FreeLookup { text: "transformer".into() }),
    ];
    for (label, q) in queries {
        println!("== {label}");
        for row in kb.query(&q)? {
            println!("  {row}");
        }
    }
    Ok(())
}
