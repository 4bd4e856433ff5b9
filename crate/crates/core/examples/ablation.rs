//! Builds the realistic mini-corpus, runs the five ablation configurations
//! and prints per-task scores plus the pooled F1 table.
//!
//! cargo run --release --example ablation [-- OUT_DIR]

use std::path::PathBuf;

use litsynth::RunConfig;
use litsynth::eval::{ablation_table, load_gold, run_ablation};
use litsynth::fixtures;

fn main() -> litsynth::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("litsynth-ablation"));
    let _ = std::fs::remove_dir_all(&out);
    let corpus = fixtures::realistic_corpus(&out.join("corpus"), 42)?;
    let gold = load_gold(&corpus.gold_path())?;

    let mut config = RunConfig::new("autoregressive language models");
    config.corpus_cache = corpus.dir.clone();
    config.worker_count = 4;
    let rows = run_ablation(&config, &gold, &out.join("runs"))?;
    for r in &rows {
        println!("== {}\n{}\n", r.configuration.label(), r.report);
    }
    print!("{}", ablation_table(&rows));
    Ok(())
}
