//! Citation-grounded cluster summaries.
//!
//! Retrieval picks the sentences of each document closest to the cluster
//! centroid. Without a backend those sentences are the summary (extractive
//! mode). With a backend, the retrieved material is sent as a prompt and
//! the reply is verified: every sentence must cite at least one `[id]` and
//! every cited id must belong to the cluster, otherwise the extractive
//! summary is used instead.

use std::collections::BTreeSet;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::ingest::{Transport, TransportError};
use crate::text::{Span, sentence_spans};

use super::tfidf::{SparseVec, Vectorizer, dot};

pub const DEFAULT_PER_DOCUMENT: usize = 5;
pub const DEFAULT_SUMMARY_SENTENCES: usize = 6;
/// Sentences shorter than this many words are headings or fragments.
const MIN_WORDS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryMode {
    Extractive,
    Generated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummarySentence {
    pub text: String,
    /// Canonical ids cited by this sentence.
    pub citations: Vec<String>,
    /// Source spans backing the sentence: `(document id, span)`.
    pub provenance: Vec<(String, Span)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mode: SummaryMode,
    pub sentences: Vec<SummarySentence>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Summary {
    pub fn text(&self) -> Vec<&str> {
        self.sentences.iter().map(|s| s.text.as_str()).collect()
    }

    pub fn citations(&self) -> Vec<&[String]> {
        self.sentences.iter().map(|s| s.citations.as_slice()).collect()
    }
}

/// One cluster member: its id and the text sentences are drawn from.
#[derive(Debug, Clone)]
pub struct ClusterDoc {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, Copy)]
pub struct SummaryOptions {
    /// Retrieval depth per document.
    pub per_document: usize,
    /// Sentences in the extractive summary.
    pub max_sentences: usize,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        Self {
            per_document: DEFAULT_PER_DOCUMENT,
            max_sentences: DEFAULT_SUMMARY_SENTENCES,
        }
    }
}

/// A text-generation service: prompt in, text out.
pub trait SummaryBackend: Send + Sync {
    fn generate(&self, prompt: &str) -> Result<String, String>;
}

/// JSON-over-HTTP backend. Sends `{"prompt": ...}` and accepts either a
/// JSON object with a `text` field or a plain-text body. The bearer token
/// is read from the environment variable named by `token_env`.
pub struct HttpBackend<'a> {
    pub endpoint: String,
    pub token_env: String,
    pub transport: &'a dyn Transport,
}

pub const TOKEN_ENV: &str = "LITSYNTH_SUMMARISER_TOKEN";

impl<'a> HttpBackend<'a> {
    pub fn new(endpoint: impl Into<String>, transport: &'a dyn Transport) -> Self {
        Self {
            endpoint: endpoint.into(),
            token_env: TOKEN_ENV.to_string(),
            transport,
        }
    }
}

impl SummaryBackend for HttpBackend<'_> {
    fn generate(&self, prompt: &str) -> Result<String, String> {
        let token = std::env::var(&self.token_env).ok();
        let body = serde_json::json!({ "prompt": prompt }).to_string();
        let resp = self
            .transport
            .post_json(&self.endpoint, &body, token.as_deref())
            .map_err(|e: TransportError| e.to_string())?;
        if !resp.is_success() {
            return Err(format!("backend returned HTTP {}", resp.status));
        }
        let text = resp.text();
        match serde_json::from_str::<serde_json::Value>(&text) {
            Ok(v) => v
                .get("text")
                .and_then(|t| t.as_str())
                .map(str::to_string)
                .ok_or_else(|| "backend JSON has no `text` field".to_string()),
            Err(_) => Ok(text),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Retrieved {
    pub doc: String,
    pub span: Span,
    pub text: String,
    pub score: f64,
}

/// Top `per_document` sentences of each document by similarity to the
/// centroid, ordered by score (ties by document id and position).
pub fn retrieve(docs: &[ClusterDoc], vectorizer: &Vectorizer, centroid: &SparseVec, per_document: usize) -> Vec<Retrieved> {
    let mut all = Vec::new();
    for doc in docs {
        let mut scored: Vec<Retrieved> = sentence_spans(&doc.text)
            .into_iter()
            .filter_map(|span| {
                let s = span.slice(&doc.text);
                if s.split_whitespace().count() < MIN_WORDS {
                    return None;
                }
                let score = dot(&vectorizer.transform(s), centroid);
                (score > 0.0).then(|| Retrieved {
                    doc: doc.id.clone(),
                    span,
                    text: s.to_string(),
                    score,
                })
            })
            .collect();
        scored.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.span.cmp(&b.span)));
        // a sentence repeated in the body is one candidate, at its first best-scoring span
        let mut seen = BTreeSet::new();
        scored.retain(|r| seen.insert(r.text.clone()));
        scored.truncate(per_document);
        all.extend(scored);
    }
    all.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.doc.cmp(&b.doc))
            .then(a.span.cmp(&b.span))
    });
    all
}

pub fn extractive(retrieved: &[Retrieved], max_sentences: usize) -> Summary {
    Summary {
        mode: SummaryMode::Extractive,
        sentences: retrieved
            .iter()
            .take(max_sentences)
            .map(|r| SummarySentence {
                text: r.text.clone(),
                citations: vec![r.doc.clone()],
                provenance: vec![(r.doc.clone(), r.span)],
            })
            .collect(),
        warnings: Vec::new(),
    }
}

pub fn build_prompt(retrieved: &[Retrieved]) -> String {
    let mut p = String::from(
        "Write a short summary of the research below. Use only the numbered material. \
         End every sentence with the bracketed id of each source it relies on, e.g. [doc-id]. \
         Do not add facts that are not in the material.\n\nMaterial:\n",
    );
    for r in retrieved {
        p.push_str(&format!("[{}] {}\n", r.doc, r.text));
    }
    p
}

static CITE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[([^\[\]]+)\]").unwrap());

/// Checks a generated reply. Returns the accepted sentences or the reason
/// for rejection.
pub fn verify(reply: &str, members: &BTreeSet<&str>, retrieved: &[Retrieved]) -> Result<Vec<SummarySentence>, String> {
    let mut out = Vec::new();
    for span in sentence_spans(reply) {
        let sentence = span.slice(reply).trim();
        if sentence.is_empty() {
            continue;
        }
        let cited: Vec<String> = CITE
            .captures_iter(sentence)
            .flat_map(|c| c[1].split([',', ';']).map(|s| s.trim().to_string()).collect::<Vec<_>>())
            .filter(|s| !s.is_empty())
            .collect();
        if cited.is_empty() {
            return Err(format!("uncited sentence: {sentence:?}"));
        }
        if let Some(bad) = cited.iter().find(|c| !members.contains(c.as_str())) {
            return Err(format!("citation [{bad}] is not in this cluster"));
        }
        let mut citations = cited.clone();
        citations.sort();
        citations.dedup();
        let provenance = retrieved
            .iter()
            .filter(|r| citations.contains(&r.doc))
            .map(|r| (r.doc.clone(), r.span))
            .collect();
        out.push(SummarySentence {
            text: sentence.to_string(),
            citations,
            provenance,
        });
    }
    if out.is_empty() {
        return Err("empty reply".into());
    }
    Ok(out)
}

/// Summarises one cluster. Backend failures and rejected replies fall back
/// to the extractive summary with a warning; this never fails.
pub fn summarise(
    docs: &[ClusterDoc],
    vectorizer: &Vectorizer,
    centroid: &SparseVec,
    backend: Option<&dyn SummaryBackend>,
    options: SummaryOptions,
) -> Summary {
    let retrieved = retrieve(docs, vectorizer, centroid, options.per_document);
    let mut fallback = extractive(&retrieved, options.max_sentences);
    let Some(backend) = backend else { return fallback };
    if retrieved.is_empty() {
        return fallback;
    }
    let members: BTreeSet<&str> = docs.iter().map(|d| d.id.as_str()).collect();
    let material: Vec<Retrieved> = retrieved.iter().take(options.max_sentences * 2).cloned().collect();
    let reason = match backend.generate(&build_prompt(&material)) {
        Ok(reply) => match verify(&reply, &members, &material) {
            Ok(sentences) => {
                return Summary {
                    mode: SummaryMode::Generated,
                    sentences,
                    warnings: Vec::new(),
                };
            }
            Err(why) => format!("generated summary rejected: {why}"),
        },
        Err(e) => format!("summariser backend failed: {e}"),
    };
    log::warn!("{reason}; using extractive summary");
    fallback.warnings.push(reason);
    fallback
}

/// Dense centroid to sparse form.
pub fn sparse_centroid(centroid: &[f64]) -> SparseVec {
    centroid
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, w)| *w != 0.0)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::Tokenizer;

    fn corpus() -> (Vec<ClusterDoc>, Vectorizer, SparseVec) {
        let docs = vec![
            ClusterDoc {
                id: "a".into(),
                text: "Recurrent language models predict the next token well. Short line. The weather is unrelated to anything here today.".into(),
            },
            ClusterDoc {
                id: "b".into(),
                text: "Language models with recurrent layers reduce token perplexity steadily.".into(),
            },
        ];
        let v = Vectorizer::fit(docs.iter().map(|d| d.text.as_str()), &Tokenizer::default());
        let c = v.transform("recurrent language models token perplexity");
        (docs, v, c)
    }

    struct Fixed(String);
    impl SummaryBackend for Fixed {
        fn generate(&self, _: &str) -> Result<String, String> {
            Ok(self.0.clone())
        }
    }

    #[test]
    fn extractive_is_verbatim_and_cited() {
        let (docs, v, c) = corpus();
        let s = summarise(&docs, &v, &c, None, SummaryOptions::default());
        assert_eq!(s.mode, SummaryMode::Extractive);
        assert!(!s.sentences.is_empty());
        for sent in &s.sentences {
            let (doc, span) = &sent.provenance[0];
            let src = docs.iter().find(|d| &d.id == doc).unwrap();
            assert_eq!(span.slice(&src.text), sent.text);
            assert_eq!(sent.citations, vec![doc.clone()]);
        }
    }

    #[test]
    fn repeated_sentence_is_one_candidate() {
        let line = "Recurrent language models predict the next token well. ";
        let docs = vec![
            ClusterDoc { id: "a".into(), text: line.repeat(4) },
            ClusterDoc { id: "b".into(), text: "Glaciers carve valleys slowly over many winters.".into() },
        ];
        let v = Vectorizer::fit(docs.iter().map(|d| d.text.as_str()), &Tokenizer::default());
        let c = v.transform("recurrent language models token");
        let r = retrieve(&docs, &v, &c, 5);
        assert_eq!(r.len(), 1, "{r:?}");
        assert_eq!(r[0].span.start, 0);
    }

    #[test]
    fn foreign_citation_triggers_fallback() {
        let (docs, v, c) = corpus();
        let backend = Fixed("Recurrent models help [a]. Perplexity falls [zzz].".into());
        let s = summarise(&docs, &v, &c, Some(&backend), SummaryOptions::default());
        assert_eq!(s.mode, SummaryMode::Extractive);
        assert!(s.warnings[0].contains("zzz"));
    }

    #[test]
    fn uncited_sentence_triggers_fallback() {
        let (docs, v, c) = corpus();
        let backend = Fixed("Recurrent models help [a]. Perplexity falls.".into());
        let s = summarise(&docs, &v, &c, Some(&backend), SummaryOptions::default());
        assert_eq!(s.mode, SummaryMode::Extractive);
    }

    #[test]
    fn grounded_reply_accepted() {
        let (docs, v, c) = corpus();
        let backend = Fixed("Recurrent models help [a]. Perplexity falls [a, b].".into());
        let s = summarise(&docs, &v, &c, Some(&backend), SummaryOptions::default());
        assert_eq!(s.mode, SummaryMode::Generated);
        assert_eq!(s.sentences[1].citations, vec!["a", "b"]);
    }

    #[test]
    fn backend_error_falls_back() {
        struct Down;
        impl SummaryBackend for Down {
            fn generate(&self, _: &str) -> Result<String, String> {
                Err("timeout".into())
            }
        }
        let (docs, v, c) = corpus();
        let s = summarise(&docs, &v, &c, Some(&Down), SummaryOptions::default());
        assert_eq!(s.mode, SummaryMode::Extractive);
        assert!(s.warnings[0].contains("timeout"));
    }
}
