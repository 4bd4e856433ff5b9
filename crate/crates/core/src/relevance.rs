//! Two-stage relevance filter: keyword matching, then a logistic-regression
//! classifier over TF-IDF features.

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{Tokenizer, dehyphenate};
use crate::topics::{Vectorizer, norm};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
const EPOCHS: usize = 200;
const LEARNING_RATE: f64 = 0.5;
const L2: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum RelevanceError {
    #[error("training set has only {0} examples; both classes are required")]
    SingleClass(&'static str),
    #[error("keyword list is empty")]
    NoKeywords,
    #[error("invalid keyword {phrase:?}: {message}")]
    BadKeyword { phrase: String, message: String },
    #[error("threshold {0} is outside (0, 1)")]
    Threshold(f64),
    #[error("cannot read or write {path}: {message}")]
    Io { path: String, message: String },
    #[error("{path} line {line}: {message}")]
    Format { path: String, line: usize, message: String },
}

fn normalize_for_match(text: &str) -> (String, String) {
    let lower = text.to_lowercase();
    (dehyphenate(&lower), lower.replace(['-', '\u{2010}'], " "))
}

/// Compiled keyword phrases, matched case-insensitively on word boundaries
/// after hyphenation normalization.
#[derive(Debug, Clone)]
pub struct KeywordSet {
    phrases: Vec<String>,
    patterns: Vec<Regex>,
}

impl KeywordSet {
    pub fn new<S: AsRef<str>>(phrases: impl IntoIterator<Item = S>) -> Result<Self, RelevanceError> {
        let mut set = Self {
            phrases: Vec::new(),
            patterns: Vec::new(),
        };
        for p in phrases {
            let p = p.as_ref().trim();
            if p.is_empty() {
                continue;
            }
            let (joined, _) = normalize_for_match(p);
            let words: Vec<String> = joined.split_whitespace().map(regex::escape).collect();
            let re = Regex::new(&format!(r"\b{}\b", words.join(r"\s+"))).map_err(|e| {
                RelevanceError::BadKeyword {
                    phrase: p.to_string(),
                    message: e.to_string(),
                }
            })?;
            set.phrases.push(p.to_string());
            set.patterns.push(re);
        }
        if set.phrases.is_empty() {
            return Err(RelevanceError::NoKeywords);
        }
        Ok(set)
    }

    /// One phrase per line; blank lines and `#` comments are skipped.
    pub fn load(path: &Path) -> Result<Self, RelevanceError> {
        let text = std::fs::read_to_string(path).map_err(|e| RelevanceError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::new(text.lines().filter(|l| !l.trim_start().starts_with('#')))
    }

    /// Keywords derived from a topic query: the whole query plus each
    /// non-stop-word term.
    pub fn from_topic(topic: &str) -> Result<Self, RelevanceError> {
        let mut phrases = vec![topic.to_string()];
        phrases.extend(Tokenizer::default().tokens(topic).into_iter().filter(|t| t.len() > 3));
        Self::new(phrases)
    }

    pub fn phrases(&self) -> &[String] {
        &self.phrases
    }

    pub fn matches(&self, text: &str) -> bool {
        let (joined, spaced) = normalize_for_match(text);
        self.patterns
            .iter()
            .any(|re| re.is_match(&joined) || re.is_match(&spaced))
    }
}

/// True iff any phrase matches.
pub fn keyword_filter(text: &str, keywords: &[&str]) -> Result<bool, RelevanceError> {
    Ok(KeywordSet::new(keywords.iter().copied())?.matches(text))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceModel {
    pub vocabulary: BTreeMap<String, usize>,
    pub idf: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub threshold: f64,
    pub seed: u64,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl RelevanceModel {
    /// Probability of relevance: sigmoid of the linear score over the
    /// unit-norm TF-IDF vector.
    pub fn score(&self, text: &str) -> f64 {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for t in Tokenizer::default().tokens(&dehyphenate(text)) {
            if let Some(&i) = self.vocabulary.get(&t) {
                *counts.entry(i).or_default() += 1.0;
            }
        }
        let x: Vec<(usize, f64)> = counts.into_iter().map(|(i, c)| (i, c * self.idf[i])).collect();
        let n = norm(&x);
        let z = if n > 0.0 {
            x.iter().map(|&(i, v)| self.weights[i] * v / n).sum::<f64>()
        } else {
            0.0
        };
        sigmoid(z + self.bias)
    }

    pub fn with_threshold(mut self, threshold: f64) -> Result<Self, RelevanceError> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(RelevanceError::Threshold(threshold));
        }
        self.threshold = threshold;
        Ok(self)
    }

    pub fn save(&self, path: &Path) -> Result<(), RelevanceError> {
        let json = serde_json::to_string_pretty(self).expect("model serializes");
        std::fs::write(path, json).map_err(|e| RelevanceError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, RelevanceError> {
        let text = std::fs::read_to_string(path).map_err(|e| RelevanceError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let model: Self = serde_json::from_str(&text).map_err(|e| RelevanceError::Format {
            path: path.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })?;
        let threshold = model.threshold;
        model.with_threshold(threshold)
    }
}

/// Logistic regression by seeded stochastic gradient descent over
/// L2-normalised TF-IDF vectors.
pub fn train_classifier(labelled: &[(String, bool)], seed: u64) -> Result<RelevanceModel, RelevanceError> {
    let positives = labelled.iter().filter(|(_, y)| *y).count();
    if positives == 0 {
        return Err(RelevanceError::SingleClass("negative"));
    }
    if positives == labelled.len() {
        return Err(RelevanceError::SingleClass("positive"));
    }
    let texts: Vec<String> = labelled.iter().map(|(t, _)| dehyphenate(t)).collect();
    let vectorizer = Vectorizer::fit(texts.iter().map(String::as_str), &Tokenizer::default());
    let xs: Vec<Vec<(usize, f64)>> = texts.iter().map(|t| vectorizer.transform(t)).collect();
    let ys: Vec<f64> = labelled.iter().map(|(_, y)| if *y { 1.0 } else { 0.0 }).collect();

    let mut weights = vec![0.0; vectorizer.len()];
    let mut bias = 0.0;
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..EPOCHS {
        order.shuffle(&mut rng);
        for &i in &order {
            let z: f64 = xs[i].iter().map(|&(j, v)| weights[j] * v).sum::<f64>() + bias;
            let g = sigmoid(z) - ys[i];
            for &(j, v) in &xs[i] {
                weights[j] -= LEARNING_RATE * (g * v + L2 * weights[j]);
            }
            bias -= LEARNING_RATE * g;
        }
    }
    Ok(RelevanceModel {
        vocabulary: vectorizer.vocabulary,
        idf: vectorizer.idf,
        weights,
        bias,
        threshold: DEFAULT_THRESHOLD,
        seed,
    })
}

/// Labelled examples, one JSON object per line: `{"text": ..., "relevant": bool}`.
pub fn load_labelled(path: &Path) -> Result<Vec<(String, bool)>, RelevanceError> {
    #[derive(Deserialize)]
    struct Row {
        text: String,
        relevant: bool,
    }
    let text = std::fs::read_to_string(path).map_err(|e| RelevanceError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str::<Row>(l)
                .map(|r| (r.text, r.relevant))
                .map_err(|e| RelevanceError::Format {
                    path: path.display().to_string(),
                    line: i + 1,
                    message: e.to_string(),
                })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecidingStage {
    Keyword,
    Classifier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceDecision {
    pub canonical_id: String,
    pub keyword_hit: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier_score: Option<f64>,
    pub relevant: bool,
    pub deciding_stage: DecidingStage,
}

/// Keyword stage first; documents failing it are irrelevant whatever the
/// classifier would say. Without a model the keyword result is final.
pub fn classify(model: Option<&RelevanceModel>, keywords: &KeywordSet, canonical_id: &str, text: &str) -> RelevanceDecision {
    let keyword_hit = keywords.matches(text);
    match model {
        Some(m) if keyword_hit => {
            let score = m.score(text);
            RelevanceDecision {
                canonical_id: canonical_id.to_string(),
                keyword_hit,
                classifier_score: Some(score),
                relevant: score >= m.threshold,
                deciding_stage: DecidingStage::Classifier,
            }
        }
        _ => RelevanceDecision {
            canonical_id: canonical_id.to_string(),
            keyword_hit,
            classifier_score: None,
            relevant: keyword_hit,
            deciding_stage: DecidingStage::Keyword,
        },
    }
}
