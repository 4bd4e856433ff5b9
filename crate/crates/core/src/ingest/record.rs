use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::SourceKind;
use crate::text::normalize_title;

use super::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaperStatus {
    Retrieved,
    Parsed,
    ParseFailed,
    FilteredOut,
    Extracted,
}

impl PaperStatus {
    /// Relevance screening runs before parsing, so a retrieved record may be
    /// filtered out directly.
    pub fn can_advance_to(self, next: PaperStatus) -> bool {
        use PaperStatus::*;
        matches!(
            (self, next),
            (Retrieved, Parsed)
                | (Retrieved, ParseFailed)
                | (Retrieved, FilteredOut)
                | (Parsed, FilteredOut)
                | (Parsed, Extracted)
        )
    }
}

/// One paper's identity, source metadata and processing status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub canonical_id: String,
    pub title: String,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub venue: Option<String>,
    pub source: SourceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abstract_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pdf_url: Option<String>,
    /// Document location relative to the corpus cache directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pdf_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_text: Option<String>,
    pub status: PaperStatus,
    /// Reasons this record needs a human look (dead links, unparseable
    /// documents).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub review_flags: Vec<String>,
}

impl PaperRecord {
    pub fn new(source: SourceKind, title: impl Into<String>) -> Self {
        let title = title.into();
        let mut rec = Self {
            canonical_id: String::new(),
            title,
            authors: Vec::new(),
            year: None,
            venue: None,
            source,
            doi: None,
            source_id: None,
            abstract_text: None,
            pdf_url: None,
            pdf_path: None,
            raw_text: None,
            status: PaperStatus::Retrieved,
            review_flags: Vec::new(),
        };
        rec.refresh_id();
        rec
    }

    pub fn with_doi(mut self, doi: impl Into<String>) -> Self {
        self.doi = Some(doi.into());
        self.refresh_id();
        self
    }

    pub fn with_source_id(mut self, id: impl Into<String>) -> Self {
        self.source_id = Some(id.into());
        self.refresh_id();
        self
    }

    /// Recomputes `canonical_id` from DOI, source id and title.
    pub fn refresh_id(&mut self) {
        self.canonical_id = canonical_id(
            self.doi.as_deref(),
            self.source,
            self.source_id.as_deref(),
            &self.title,
        );
    }

    pub fn advance(&mut self, next: PaperStatus) -> Result<(), IngestError> {
        if self.status == next {
            return Ok(());
        }
        if !self.status.can_advance_to(next) {
            return Err(IngestError::InvalidTransition {
                id: self.canonical_id.clone(),
                from: self.status,
                to: next,
            });
        }
        self.status = next;
        Ok(())
    }

    pub fn flag(&mut self, reason: impl Into<String>) {
        let reason = reason.into();
        if !self.review_flags.contains(&reason) {
            self.review_flags.push(reason);
        }
    }

    /// Number of populated optional fields; the richer record wins a merge.
    pub fn populated_fields(&self) -> usize {
        [
            !self.title.is_empty(),
            !self.authors.is_empty(),
            self.year.is_some(),
            self.venue.is_some(),
            self.doi.is_some(),
            self.source_id.is_some(),
            self.abstract_text.is_some(),
            self.pdf_url.is_some(),
            self.pdf_path.is_some(),
            self.raw_text.is_some(),
        ]
        .into_iter()
        .filter(|b| *b)
        .count()
    }

    /// Text used for relevance screening before the document is parsed.
    pub fn screening_text(&self) -> String {
        let mut s = self.title.clone();
        if let Some(a) = &self.abstract_text {
            s.push('\n');
            s.push_str(a);
        }
        s
    }

    /// File-system-safe form of the canonical id.
    pub fn file_stem(&self) -> String {
        safe_file_stem(&self.canonical_id)
    }
}

pub fn normalize_doi(doi: &str) -> String {
    let d = doi.trim();
    let d = d
        .strip_prefix("https://doi.org/")
        .or_else(|| d.strip_prefix("http://doi.org/"))
        .or_else(|| d.strip_prefix("doi:"))
        .unwrap_or(d);
    d.to_lowercase()
}

/// Identity precedence: DOI, then source-specific id, then a hash of the
/// normalized title.
pub fn canonical_id(
    doi: Option<&str>,
    source: SourceKind,
    source_id: Option<&str>,
    title: &str,
) -> String {
    if let Some(doi) = doi.filter(|d| !d.trim().is_empty()) {
        return format!("doi:{}", normalize_doi(doi));
    }
    if let Some(id) = source_id.filter(|s| !s.trim().is_empty()) {
        let prefix = match source {
            SourceKind::Arxiv => "arxiv",
            SourceKind::SemanticScholar => "s2",
            SourceKind::LocalFile => "local",
        };
        return format!("{prefix}:{}", id.trim());
    }
    format!("title:{}", title_hash(title))
}

pub fn title_hash(title: &str) -> String {
    let digest = Sha256::digest(normalize_title(title).as_bytes());
    hex::encode(&digest[..8])
}

pub fn safe_file_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_precedence() {
        let r = PaperRecord::new(SourceKind::Arxiv, "Some Title")
            .with_source_id("1708.02182")
            .with_doi("https://doi.org/10.1000/ABC");
        assert_eq!(r.canonical_id, "doi:10.1000/abc");
        let r = PaperRecord::new(SourceKind::Arxiv, "Some Title").with_source_id("1708.02182");
        assert_eq!(r.canonical_id, "arxiv:1708.02182");
        let a = PaperRecord::new(SourceKind::LocalFile, "Some Title!");
        let b = PaperRecord::new(SourceKind::Arxiv, "some   title");
        assert!(a.canonical_id.starts_with("title:"));
        assert_eq!(a.canonical_id, b.canonical_id);
    }

    #[test]
    fn status_transitions() {
        let mut r = PaperRecord::new(SourceKind::LocalFile, "t");
        assert!(r.advance(PaperStatus::Extracted).is_err());
        r.advance(PaperStatus::Parsed).unwrap();
        r.advance(PaperStatus::Extracted).unwrap();
        assert!(r.advance(PaperStatus::Retrieved).is_err());
    }

    #[test]
    fn file_stems_are_path_safe() {
        assert_eq!(safe_file_stem("doi:10.1000/x y"), "doi_10.1000_x_y");
    }
}
