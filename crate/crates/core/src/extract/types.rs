use std::fmt;

use serde::{Deserialize, Serialize};

use crate::text::{Span, canonical_number};

macro_rules! open_enum {
    (
        $(#[$meta:meta])*
        $name:ident { $($variant:ident => $text:literal),* $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(from = "String", into = "String")]
        pub enum $name {
            $($variant,)*
            Other(String),
        }

        impl $name {
            pub fn as_str(&self) -> &str {
                match self {
                    $($name::$variant => $text,)*
                    $name::Other(s) => s.as_str(),
                }
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                match s.as_str() {
                    $($text => $name::$variant,)*
                    _ => $name::Other(s),
                }
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::from(s.to_string())
            }
        }

        impl From<$name> for String {
            fn from(n: $name) -> String {
                n.as_str().to_string()
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

open_enum! {
    /// Canonical hyperparameter names; anything else is `Other`.
    HyperparamName {
        LearningRate => "learning_rate",
        NumLayers => "num_layers",
        HiddenSize => "hidden_size",
        EmbedSize => "embed_size",
        Dropout => "dropout",
        Optimizer => "optimizer",
        BatchSize => "batch_size",
        SeqLength => "seq_length",
        GradClip => "grad_clip",
        Epochs => "epochs",
        Steps => "steps",
        VocabSize => "vocab_size",
        ParamCount => "param_count",
        Architecture => "architecture",
    }
}

open_enum! {
    Metric {
        Perplexity => "perplexity",
        Accuracy => "accuracy",
        F1 => "f1",
        Bleu => "bleu",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HyperValue {
    Number(f64),
    Text(String),
}

impl HyperValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            HyperValue::Number(v) => Some(*v),
            HyperValue::Text(_) => None,
        }
    }

    /// Identity key: numbers in canonical decimal form, text verbatim.
    pub fn key(&self) -> String {
        match self {
            HyperValue::Number(v) => canonical_number(*v),
            HyperValue::Text(s) => s.clone(),
        }
    }
}

impl fmt::Display for HyperValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Valid,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperparamFact {
    pub name: HyperparamName,
    pub value: HyperValue,
    /// `%` for percentages (value stored as a fraction), `K`/`M`/`B` for
    /// magnitude suffixes (value stored expanded).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    pub span: Span,
    pub surface: String,
}

impl HyperparamFact {
    /// Renders the value back through its unit: 0.4 with `%` gives 40.
    pub fn surface_value(&self) -> Option<f64> {
        let v = self.value.as_number()?;
        Some(match self.unit.as_deref() {
            Some("%") => v * 100.0,
            Some("K") => v / 1e3,
            Some("M") => v / 1e6,
            Some("B") => v / 1e9,
            _ => v,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFact {
    pub metric: Metric,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
    pub span: Span,
    pub surface: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitationLink {
    pub marker: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved_key: Option<String>,
    pub marker_span: Span,
    pub statement_span: Span,
}

/// One entry of a paper's reference list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    /// Numeric label or `\bibitem` key, when the list has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// First-author surname plus year, e.g. `vaswani2017`.
    pub key: String,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub title: String,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub venue: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abstract_text: Option<String>,
}

/// Per-paper extraction output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FactBundle {
    pub metadata: Metadata,
    #[serde(default)]
    pub hyperparams: Vec<HyperparamFact>,
    #[serde(default)]
    pub results: Vec<ResultFact>,
    #[serde(default)]
    pub citations: Vec<CitationLink>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub references: Vec<ReferenceEntry>,
    /// Span of the experimental-setup section, when one is detected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setup_region: Option<Span>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl FactBundle {
    pub fn is_empty(&self) -> bool {
        self.hyperparams.is_empty() && self.results.is_empty() && self.citations.is_empty()
    }

    pub fn hyperparams_named<'a>(
        &'a self,
        name: &'a HyperparamName,
    ) -> impl Iterator<Item = &'a HyperparamFact> + 'a {
        self.hyperparams.iter().filter(move |f| &f.name == name)
    }
}
