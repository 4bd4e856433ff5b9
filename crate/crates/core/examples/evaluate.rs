//! Precision, recall and F1 per task for the pipeline on the noise-free and
//! realistic fixture corpora, micro- and macro-averaged.
//!
//! cargo run --example evaluate

use litsynth::eval::{Averaging, evaluate_corpus, load_gold};
use litsynth::ingest::OfflineTransport;
use litsynth::{RunConfig, fixtures, run_pipeline_with};

fn main() -> litsynth::Result<()> {
    let dir = tempfile::tempdir().map_err(|e| litsynth::Error::io("<tempdir>", e))?;
    let corpora = [
        ("noise-free", fixtures::noise_free_corpus(&dir.path().join("clean"), 42)?),
        ("realistic", fixtures::realistic_corpus(&dir.path().join("real"), 42)?),
    ];
    for (name, corpus) in corpora {
        let out = dir.path().join(format!("{name}-run"));
        let mut config = RunConfig::new("autoregressive language models");
        config.corpus_cache = corpus.dir.clone();
        config.kb_path = out.join("kb.jsonl");
        config.report_path = out.join("report.md");
        config.artifacts_dir = out.join("scripts");
        let kb = run_pipeline_with(&config, &OfflineTransport)?.kb;
        let gold = load_gold(&corpus.gold_path())?;
        for averaging in [Averaging::Micro, Averaging::Macro] {
            println!("== {name}\n{}\n", evaluate_corpus(&gold, &kb, averaging)?);
        }
    }
    Ok(())
}
