//! Rule-based extraction of settings, results and citations from one text.
//! Reads FILE when given, otherwise the regularised-LSTM case study.
//!
//! cargo run --example extract_facts [-- FILE]

use litsynth::extract::Extractor;
use litsynth::fixtures;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => {
            let dir = tempfile::tempdir()?;
            fixtures::case_study_corpus(dir.path())?.texts.remove("local:case-awd-lstm").unwrap()
        }
    };
    let facts = Extractor::default().extract(&text, None);

    println!("title: {}", facts.metadata.title);
    println!("\nsettings:");
    for f in &facts.hyperparams {
        println!("  {:<14} {:<12} {:<4} {:?}", f.name.as_str(), f.value.to_string(), f.unit.as_deref().unwrap_or(""), f.surface);
    }
    println!("\nresults:");
    for r in &facts.results {
        println!("  {} = {} on {}", r.metric, r.value, r.dataset.as_deref().unwrap_or("-"));
    }
    println!("\ncitations:");
    for c in &facts.citations {
        println!("  {:<28} -> {}", c.marker, c.resolved_key.as_deref().unwrap_or("unresolved"));
    }
    for w in &facts.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
