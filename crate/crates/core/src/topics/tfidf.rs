use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::text::Tokenizer;

use super::TopicError;

/// Sparse vector as `(term index, weight)` pairs sorted by index.
pub type SparseVec = Vec<(usize, f64)>;

pub fn dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut sum) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                sum += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    sum
}

pub fn norm(v: &[(usize, f64)]) -> f64 {
    v.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
}

fn normalize(mut v: SparseVec) -> SparseVec {
    let n = norm(&v);
    if n > 0.0 {
        for (_, w) in &mut v {
            *w /= n;
        }
    }
    v
}

/// Fitted vocabulary and inverse document frequencies.
///
/// `idf(t) = ln(D / df(t))`, raw term counts for tf, vectors L2-normalised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vectorizer {
    /// Term to dense index; indices follow lexicographic term order.
    pub vocabulary: BTreeMap<String, usize>,
    pub idf: Vec<f64>,
    #[serde(skip, default)]
    tokenizer: Option<Tokenizer>,
}

impl Vectorizer {
    /// Fits on `docs`; documents without tokens are ignored for the counts.
    pub fn fit<'a>(docs: impl IntoIterator<Item = &'a str>, tokenizer: &Tokenizer) -> Self {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        let mut d = 0usize;
        for doc in docs {
            let mut terms = tokenizer.tokens(doc);
            if terms.is_empty() {
                continue;
            }
            d += 1;
            terms.sort();
            terms.dedup();
            for t in terms {
                *df.entry(t).or_default() += 1;
            }
        }
        let vocabulary: BTreeMap<String, usize> =
            df.keys().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let idf = df.values().map(|&n| (d as f64 / n as f64).ln()).collect();
        Self {
            vocabulary,
            idf,
            tokenizer: Some(tokenizer.clone()),
        }
    }

    /// Rebuilds a fitted vectorizer from persisted parts; tokenizes with
    /// the default tokenizer.
    pub fn from_parts(vocabulary: BTreeMap<String, usize>, idf: Vec<f64>) -> Self {
        Self {
            vocabulary,
            idf,
            tokenizer: None,
        }
    }

    pub fn with_tokenizer(mut self, tokenizer: Tokenizer) -> Self {
        self.tokenizer = Some(tokenizer);
        self
    }

    pub fn len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocabulary.is_empty()
    }

    /// Raw tf·idf weights, not normalised. Out-of-vocabulary terms drop.
    pub fn weights(&self, text: &str) -> SparseVec {
        let default_tok = Tokenizer::default();
        let tok = self.tokenizer.as_ref().unwrap_or(&default_tok);
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for t in tok.tokens(text) {
            if let Some(&i) = self.vocabulary.get(&t) {
                *counts.entry(i).or_default() += 1.0;
            }
        }
        counts
            .into_iter()
            .map(|(i, c)| (i, c * self.idf[i]))
            .filter(|(_, w)| *w != 0.0)
            .collect()
    }

    /// Unit-length tf·idf vector (empty when nothing survives).
    pub fn transform(&self, text: &str) -> SparseVec {
        normalize(self.weights(text))
    }

    /// Terms ordered by index.
    pub fn terms(&self) -> Vec<&str> {
        let mut t = vec![""; self.vocabulary.len()];
        for (term, &i) in &self.vocabulary {
            t[i] = term;
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfIndex {
    pub vectorizer: Vectorizer,
    /// Unit-norm document vectors keyed by canonical id.
    pub doc_vectors: BTreeMap<String, SparseVec>,
    /// Ids dropped because their vector was zero.
    pub excluded: Vec<String>,
    pub warnings: Vec<String>,
}

impl TfidfIndex {
    pub fn idf(&self, term: &str) -> Option<f64> {
        self.vectorizer.vocabulary.get(term).map(|&i| self.vectorizer.idf[i])
    }

    pub fn dimension(&self) -> usize {
        self.vectorizer.len()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.doc_vectors.keys().map(String::as_str).collect()
    }
}

pub fn build_tfidf(docs: &[(String, String)]) -> Result<TfidfIndex, TopicError> {
    build_tfidf_with(docs, &Tokenizer::default())
}

/// Builds the index. Documents whose vector is zero (no tokens, or only
/// terms present in every document) are excluded with a warning.
pub fn build_tfidf_with(docs: &[(String, String)], tokenizer: &Tokenizer) -> Result<TfidfIndex, TopicError> {
    if docs.len() < 2 {
        return Err(TopicError::TooFewDocuments { got: docs.len(), need: 2 });
    }
    let vectorizer = Vectorizer::fit(docs.iter().map(|(_, t)| t.as_str()), tokenizer);
    if vectorizer.is_empty() {
        return Err(TopicError::EmptyCorpus);
    }
    let mut doc_vectors = BTreeMap::new();
    let mut excluded = Vec::new();
    let mut warnings = Vec::new();
    for (id, text) in docs {
        let v = vectorizer.transform(text);
        if v.is_empty() {
            log::warn!("{id}: zero tf-idf vector, excluded from clustering");
            warnings.push(format!("{id}: zero tf-idf vector, excluded"));
            excluded.push(id.clone());
        } else {
            doc_vectors.insert(id.clone(), v);
        }
    }
    Ok(TfidfIndex {
        vectorizer,
        doc_vectors,
        excluded,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(texts: &[&str]) -> Vec<(String, String)> {
        texts.iter().enumerate().map(|(i, t)| (format!("d{i}"), t.to_string())).collect()
    }

    #[test]
    fn two_doc_idf() {
        let idx = build_tfidf_with(&docs(&["a b", "a c"]), &Tokenizer::without_stopwords()).unwrap();
        assert_eq!(idx.idf("a"), Some(0.0));
        assert_eq!(idx.idf("b"), Some(2f64.ln()));
        assert_eq!(idx.idf("c"), Some(2f64.ln()));
        for v in idx.doc_vectors.values() {
            assert!((norm(v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stopword_only_doc_excluded() {
        let idx = build_tfidf(&docs(&["the of and", "recurrent language model", "music generation model"])).unwrap();
        assert_eq!(idx.excluded, vec!["d0"]);
        assert_eq!(idx.doc_vectors.len(), 2);
    }

    #[test]
    fn all_empty_is_error() {
        assert!(matches!(build_tfidf(&docs(&["", "the"])), Err(TopicError::EmptyCorpus)));
        assert!(build_tfidf(&docs(&["one"])).is_err());
    }

    #[test]
    fn sparse_dot() {
        assert_eq!(dot(&[(0, 1.0), (3, 2.0)], &[(3, 4.0), (5, 1.0)]), 8.0);
    }
}
