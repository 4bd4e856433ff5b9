//! TF-IDF embedding and k-means with the number of topics chosen by mean
//! silhouette, on twenty documents drawn from two disjoint vocabularies.
//!
//! cargo run --example cluster_topics

use litsynth::fixtures;
use litsynth::topics::{build_tfidf, cluster_topics};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let docs = fixtures::two_topic_documents(10, 42);
    let pairs: Vec<(String, String)> = docs.iter().map(|(id, text, _)| (id.clone(), text.clone())).collect();
    let index = build_tfidf(&pairs)?;
    let model = cluster_topics(&index, 2..=5, 42)?;

    for (k, s) in &model.silhouette_by_k {
        println!("k = {k}: mean silhouette {s:.3}{}", if *k == model.k { "  <- chosen" } else { "" });
    }
    for c in 0..model.k {
        println!("\ntopic {c}: {}", model.labels[c].join(", "));
        println!("  members: {}", model.members(c).join(" "));
    }
    Ok(())
}
