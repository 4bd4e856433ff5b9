//! TF-IDF embedding, silhouette-selected k-means, and cluster summaries.

mod kmeans;
mod summarise;
mod tfidf;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use kmeans::{
    DEFAULT_K_MAX, KMeansRun, LABEL_TERMS, MAX_ITERATIONS, RESTARTS, TOLERANCE, TopicModel,
    cluster_topics, default_k_range, distance_matrix, kmeans, silhouette,
};
pub use summarise::{
    ClusterDoc, DEFAULT_PER_DOCUMENT, DEFAULT_SUMMARY_SENTENCES, HttpBackend, Retrieved, Summary,
    SummaryBackend, SummaryMode, SummaryOptions, SummarySentence, TOKEN_ENV, build_prompt,
    extractive, retrieve, sparse_centroid, summarise, verify,
};
pub use tfidf::{SparseVec, TfidfIndex, Vectorizer, build_tfidf, build_tfidf_with, dot, norm};

#[derive(Debug, Error, PartialEq)]
pub enum TopicError {
    #[error("need at least {need} documents with non-empty vectors, got {got}")]
    TooFewDocuments { got: usize, need: usize },
    #[error("every document is empty after tokenization")]
    EmptyCorpus,
    #[error("k range {lo}..={hi} is outside 2..={} for {documents} documents", documents.saturating_sub(1))]
    KRange { lo: usize, hi: usize, documents: usize },
}

/// Words of body text used to embed a document that has no abstract.
pub const BODY_FALLBACK_WORDS: usize = 200;

/// The text a document is embedded by: its abstract, or the first 200
/// words of its body when the abstract is missing.
pub fn embedding_text(abstract_text: Option<&str>, body: &str) -> String {
    match abstract_text {
        Some(a) if !a.trim().is_empty() => a.to_string(),
        _ => body
            .split_whitespace()
            .take(BODY_FALLBACK_WORDS)
            .collect::<Vec<_>>()
            .join(" "),
    }
}

/// One report section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSummary {
    pub cluster: usize,
    pub labels: Vec<String>,
    pub members: Vec<String>,
    pub summary: Summary,
}

/// Markdown report: one section per cluster with label terms, member ids
/// and summary sentences with their citation keys.
pub fn render_report(topic: &str, sections: &[TopicSummary]) -> String {
    let mut out = format!("# Literature synthesis: {topic}\n\n");
    if sections.is_empty() {
        out.push_str("No relevant papers were found.\n");
        return out;
    }
    for s in sections {
        let _ = writeln!(out, "## Topic {}: {}\n", s.cluster + 1, s.labels.join(", "));
        let _ = writeln!(out, "Papers: {}\n", s.members.join(", "));
        for sentence in &s.summary.sentences {
            match s.summary.mode {
                SummaryMode::Extractive => {
                    let cites: Vec<String> = sentence.citations.iter().map(|c| format!("[{c}]")).collect();
                    let _ = writeln!(out, "- {} {}", sentence.text, cites.join(""));
                }
                SummaryMode::Generated => {
                    let _ = writeln!(out, "- {}", sentence.text);
                }
            }
        }
        for w in &s.summary.warnings {
            let _ = writeln!(out, "\n> note: {w}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abstract_fallback_to_body() {
        let body = (0..300).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        assert_eq!(embedding_text(None, &body).split_whitespace().count(), 200);
        assert_eq!(embedding_text(Some("given"), &body), "given");
        assert_eq!(embedding_text(Some("  "), "x y"), "x y");
    }

    #[test]
    fn empty_report() {
        assert!(render_report("q", &[]).contains("No relevant papers"));
    }
}
