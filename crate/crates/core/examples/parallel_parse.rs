//! Parse-and-extract throughput with one worker against several, on a
//! CPU-bound synthetic corpus. Output is identical for every worker count.
//!
//! cargo run --release --example parallel_parse [-- DOCS]

use litsynth::ingest::OfflineTransport;
use litsynth::{RunConfig, StageName, fixtures, run_pipeline_with};

fn main() -> litsynth::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let dir = tempfile::tempdir().map_err(|e| litsynth::Error::io("<tempdir>", e))?;
    let corpus = fixtures::scaling_corpus(&dir.path().join("corpus"), n, 42)?;
    let cpus = std::thread::available_parallelism().map(|c| c.get()).unwrap_or(1);
    println!("{n} documents, {cpus} CPUs available");

    let mut baseline = None;
    let mut first_kb = None;
    for workers in [1, 2, 4, 8] {
        let out = dir.path().join(format!("w{workers}"));
        let mut config = RunConfig::new("autoregressive language models");
        config.corpus_cache = corpus.dir.clone();
        config.kb_path = out.join("kb.jsonl");
        config.report_path = out.join("report.md");
        config.artifacts_dir = out.join("scripts");
        config.worker_count = workers;
        let run = run_pipeline_with(&config, &OfflineTransport)?;
        let secs: f64 = run.timings.iter().filter(|(s, _)| *s == StageName::ParseExtract).map(|(_, t)| t).sum();
        let base = *baseline.get_or_insert(secs);
        let kb = run.kb.to_jsonl();
        let same = first_kb.get_or_insert_with(|| kb.clone()) == &kb;
        println!("{workers} workers: {secs:.3}s parse+extract, speedup {:.2}x, same KB: {same}", base / secs);
    }
    Ok(())
}
