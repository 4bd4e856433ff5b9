//! Candidate retrieval from paper-index APIs or a local corpus directory,
//! deduplication, and the on-disk document cache.

pub mod arxiv;
mod cache;
mod record;
pub mod semantic_scholar;
pub mod transport;

use std::collections::BTreeMap;
use std::path::PathBuf;

use thiserror::Error;

use crate::config::SourceKind;

pub use cache::{MANIFEST_FILE, fetch_document, load_local_corpus, read_manifest, write_manifest};
pub use record::{
    PaperRecord, PaperStatus, canonical_id, normalize_doi, safe_file_stem, title_hash,
};
pub use transport::{
    HttpResponse, HttpTransport, OfflineTransport, RateLimiter, RecordedExchange, ReplayTransport,
    RetryPolicy, Transport, TransportError, get_with_retry,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{source_kind} search failed after retries: {message} ({} records retrieved before failure)", partial.len())]
    Source {
        source_kind: SourceKind,
        message: String,
        partial: Vec<PaperRecord>,
    },
    #[error("query must not be empty")]
    EmptyQuery,
    #[error("local corpus directory is not configured")]
    NoLocalDir,
    #[error("corpus manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("record {id}: cannot move from {from:?} to {to:?}")]
    InvalidTransition {
        id: String,
        from: PaperStatus,
        to: PaperStatus,
    },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl IngestError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IngestError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Records returned by one source plus the entries skipped as malformed.
#[derive(Debug, Default)]
pub struct SearchOutcome {
    pub records: Vec<PaperRecord>,
    pub skipped: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SearchSettings {
    pub arxiv_base: String,
    pub semantic_scholar_base: String,
    pub page_size: usize,
    /// Stop paging once this many entries have been seen.
    pub max_results: usize,
    pub retry: RetryPolicy,
    pub local_dir: Option<PathBuf>,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            arxiv_base: arxiv::DEFAULT_BASE.to_string(),
            semantic_scholar_base: semantic_scholar::DEFAULT_BASE.to_string(),
            page_size: 100,
            max_results: 1000,
            retry: RetryPolicy::default(),
            local_dir: None,
        }
    }
}

/// Issues paged, rate-limited queries against one transport. Each source
/// has its own token bucket.
pub struct Searcher<'a> {
    transport: &'a dyn Transport,
    settings: SearchSettings,
    limiters: BTreeMap<SourceKind, RateLimiter>,
}

impl<'a> Searcher<'a> {
    pub fn new(transport: &'a dyn Transport, settings: SearchSettings) -> Self {
        let limiters = [SourceKind::Arxiv, SourceKind::SemanticScholar]
            .into_iter()
            .map(|s| (s, RateLimiter::polite()))
            .collect();
        Self {
            transport,
            settings,
            limiters,
        }
    }

    pub fn with_rate_limit(mut self, source: SourceKind, limiter: RateLimiter) -> Self {
        self.limiters.insert(source, limiter);
        self
    }

    /// Disables rate limiting on every source (fixture replay).
    pub fn unthrottled(mut self) -> Self {
        for l in self.limiters.values_mut() {
            *l = RateLimiter::unlimited();
        }
        self
    }

    pub fn settings(&self) -> &SearchSettings {
        &self.settings
    }

    pub fn limiter(&self, source: SourceKind) -> &RateLimiter {
        self.limiters.get(&source).expect("limiter per API source")
    }

    /// Retrieves candidates for `query` within `years` from one source.
    /// Records outside the year range are dropped.
    pub fn search_api(
        &self,
        query: &str,
        years: (i32, i32),
        source: SourceKind,
    ) -> Result<SearchOutcome, IngestError> {
        if query.trim().is_empty() {
            return Err(IngestError::EmptyQuery);
        }
        let mut outcome = match source {
            SourceKind::Arxiv => self.search_arxiv(query, years)?,
            SourceKind::SemanticScholar => self.search_semantic_scholar(query, years)?,
            SourceKind::LocalFile => {
                let dir = self
                    .settings
                    .local_dir
                    .as_ref()
                    .ok_or(IngestError::NoLocalDir)?;
                SearchOutcome {
                    records: load_local_corpus(dir)?,
                    skipped: Vec::new(),
                }
            }
        };
        for s in &outcome.skipped {
            log::warn!("{source}: skipped malformed entry: {s}");
        }
        outcome.records.retain(|r| match r.year {
            Some(y) => y >= years.0 && y <= years.1,
            None => source == SourceKind::LocalFile,
        });
        Ok(outcome)
    }

    fn fetch_page(
        &self,
        source: SourceKind,
        url: &str,
        partial: &[PaperRecord],
    ) -> Result<String, IngestError> {
        get_with_retry(
            self.transport,
            self.limiter(source),
            self.settings.retry,
            url,
        )
        .map(|r| r.text())
        .map_err(|e| IngestError::Source {
            source_kind: source,
            message: e.to_string(),
            partial: partial.to_vec(),
        })
    }

    fn search_arxiv(&self, query: &str, years: (i32, i32)) -> Result<SearchOutcome, IngestError> {
        let mut out = SearchOutcome::default();
        let mut start = 0;
        loop {
            let url = arxiv::query_url(
                &self.settings.arxiv_base,
                query,
                years,
                start,
                self.settings.page_size,
            );
            let body = self.fetch_page(SourceKind::Arxiv, &url, &out.records)?;
            let page = arxiv::parse_feed(&body).map_err(|message| IngestError::Source {
                source_kind: SourceKind::Arxiv,
                message,
                partial: out.records.clone(),
            })?;
            let seen = page.entries_seen;
            out.records.extend(page.records);
            out.skipped.extend(page.skipped);
            start += seen;
            let exhausted = seen < self.settings.page_size
                || page.total_results.is_some_and(|t| start >= t);
            if seen == 0 || exhausted || start >= self.settings.max_results {
                break;
            }
        }
        Ok(out)
    }

    fn search_semantic_scholar(
        &self,
        query: &str,
        years: (i32, i32),
    ) -> Result<SearchOutcome, IngestError> {
        let mut out = SearchOutcome::default();
        let mut offset = 0;
        loop {
            let url = semantic_scholar::query_url(
                &self.settings.semantic_scholar_base,
                query,
                years,
                offset,
                self.settings.page_size,
            );
            let body = self.fetch_page(SourceKind::SemanticScholar, &url, &out.records)?;
            let page = semantic_scholar::parse_page(&body).map_err(|message| {
                IngestError::Source {
                    source_kind: SourceKind::SemanticScholar,
                    message,
                    partial: out.records.clone(),
                }
            })?;
            let seen = page.entries_seen;
            out.records.extend(page.records);
            out.skipped.extend(page.skipped);
            match page.next_offset {
                Some(next) if seen > 0 && next > offset && next < self.settings.max_results => {
                    offset = next
                }
                _ => break,
            }
        }
        Ok(out)
    }
}

/// Collapses duplicates. Records sharing a canonical id or a normalized
/// title are merged; the record with more populated fields wins and takes
/// the highest-precedence id in its group. Output is sorted by id.
pub fn deduplicate(records: Vec<PaperRecord>) -> Vec<PaperRecord> {
    let n = records.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut by_key: BTreeMap<String, usize> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        let mut keys = vec![format!("id|{}", r.canonical_id)];
        let norm = crate::text::normalize_title(&r.title);
        if !norm.is_empty() {
            keys.push(format!("title|{norm}"));
        }
        for key in keys {
            match by_key.get(&key) {
                Some(&j) => {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
                None => {
                    by_key.insert(key, i);
                }
            }
        }
    }

    let mut groups: BTreeMap<usize, Vec<PaperRecord>> = BTreeMap::new();
    for (i, r) in records.into_iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(r);
    }

    let mut out: Vec<PaperRecord> = groups
        .into_values()
        .map(|group| {
            let best_id = group
                .iter()
                .map(|r| r.canonical_id.clone())
                .min_by(|a, b| id_rank(a).cmp(&id_rank(b)).then_with(|| a.cmp(b)))
                .expect("non-empty group");
            let mut winner = group
                .into_iter()
                .max_by(|a, b| {
                    a.populated_fields()
                        .cmp(&b.populated_fields())
                        // prefer the lexicographically smaller id on ties
                        .then_with(|| b.canonical_id.cmp(&a.canonical_id))
                })
                .expect("non-empty group");
            winner.canonical_id = best_id;
            winner
        })
        .collect();
    out.sort_by(|a, b| a.canonical_id.cmp(&b.canonical_id));
    out
}

fn id_rank(id: &str) -> u8 {
    if id.starts_with("doi:") {
        0
    } else if id.starts_with("title:") {
        2
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(source: SourceKind, title: &str) -> PaperRecord {
        PaperRecord::new(source, title)
    }

    #[test]
    fn same_doi_different_sources_merge() {
        let mut a = rec(SourceKind::Arxiv, "Transformer-XL").with_source_id("1901.02860").with_doi("10.1/x");
        a.year = Some(2019);
        let mut b = rec(SourceKind::SemanticScholar, "Transformer-XL: Attentive").with_doi("10.1/X");
        b.venue = Some("ACL".into());
        b.year = Some(2019);
        b.authors = vec!["Dai".into()];
        let out = deduplicate(vec![a, b]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].canonical_id, "doi:10.1/x");
        assert_eq!(out[0].venue.as_deref(), Some("ACL"));
    }

    #[test]
    fn distinct_records_only_sorted() {
        let a = rec(SourceKind::Arxiv, "B paper").with_source_id("2");
        let b = rec(SourceKind::Arxiv, "A paper").with_source_id("1");
        let out = deduplicate(vec![a.clone(), b.clone()]);
        assert_eq!(out, vec![b, a]);
    }

    #[test]
    fn title_variants_merge_via_hash() {
        let a = rec(SourceKind::LocalFile, "Regularizing LSTM Language-Models");
        let mut b = rec(SourceKind::LocalFile, "regularizing lstm language models.");
        b.year = Some(2017);
        let out = deduplicate(vec![a, b]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].year, Some(2017));
        assert!(out[0].canonical_id.starts_with("title:"));
    }

    #[test]
    fn cross_source_title_match_keeps_best_id() {
        let a = rec(SourceKind::Arxiv, "Attention Is All You Need").with_source_id("1706.03762");
        let b = rec(SourceKind::SemanticScholar, "Attention is all you need").with_doi("10.5/aiayn");
        let out = deduplicate(vec![a, b]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].canonical_id, "doi:10.5/aiayn");
    }
}
