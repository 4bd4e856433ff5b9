//! Cluster summaries built only from retrieved source sentences, each
//! carrying its citation, and a generation backend whose reply cites a
//! paper outside the cluster, which is rejected in favour of the
//! extractive summary.
//!
//! cargo run --example grounded_summary

use litsynth::fixtures;
use litsynth::topics::{ClusterDoc, SummaryBackend, SummaryOptions, build_tfidf, summarise};

struct Careless;

impl SummaryBackend for Careless {
    fn generate(&self, _prompt: &str) -> Result<String, String> {
        Ok("Recurrent models dominate [local:someone-else].".into())
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let corpus = fixtures::case_study_corpus(dir.path())?;
    let pairs: Vec<(String, String)> = corpus.texts.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    let index = build_tfidf(&pairs)?;
    let docs: Vec<ClusterDoc> = pairs.iter().map(|(id, text)| ClusterDoc { id: id.clone(), text: text.clone() }).collect();

    // one cluster holding all three papers; its centroid is the mean vector
    let mut centroid = std::collections::BTreeMap::new();
    for v in index.doc_vectors.values() {
        for &(i, w) in v {
            *centroid.entry(i).or_insert(0.0) += w / docs.len() as f64;
        }
    }
    let centroid: Vec<(usize, f64)> = centroid.into_iter().collect();

    let summary = summarise(&docs, &index.vectorizer, &centroid, None, SummaryOptions::default());
    println!("extractive summary:");
    for s in &summary.sentences {
        println!("  {} [{}]", s.text, s.citations.join(", "));
    }

    let fallback = summarise(&docs, &index.vectorizer, &centroid, Some(&Careless), SummaryOptions::default());
    println!("\nwith a careless backend: {:?} mode, warnings {:?}", fallback.mode, fallback.warnings);
    Ok(())
}
