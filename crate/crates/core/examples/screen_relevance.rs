//! Two-stage screening: keyword filter, then a logistic-regression
//! classifier trained on a labelled title-and-abstract set.
//!
//! cargo run --example screen_relevance

use litsynth::fixtures;
use litsynth::relevance::{KeywordSet, classify, train_classifier};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let keywords = KeywordSet::new(fixtures::KEYWORDS.iter().copied())?;
    let model = train_classifier(&fixtures::relevance_training_set(42, 60), 42)?;

    let dir = tempfile::tempdir()?;
    let corpus = fixtures::realistic_corpus(dir.path(), 42)?;
    let specs = fixtures::realistic_specs(42);
    println!("{:<34} {:>8} {:>8} {:>9}  truth", "paper", "keyword", "score", "relevant");
    for spec in &specs {
        let meta = &spec.planted.metadata;
        let text = format!("{}\n{}", meta.title, meta.abstract_text.as_deref().unwrap_or(""));
        let d = classify(Some(&model), &keywords, &spec.canonical_id, &text);
        let score = d.classifier_score.map(|s| format!("{s:.3}")).unwrap_or_else(|| "-".into());
        println!("{:<34} {:>8} {:>8} {:>9}  {:?}", spec.canonical_id, d.keyword_hit, score, d.relevant, spec.theme);
    }
    println!("\n{} papers screened from {}", corpus.ids.len(), corpus.dir.display());
    Ok(())
}
