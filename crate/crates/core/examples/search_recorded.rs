//! Retrieval against recorded arXiv and Semantic Scholar responses:
//! paging, DOI deduplication, a malformed entry and a dead download link.
//!
//! cargo run --example search_recorded

use litsynth::config::SourceKind;
use litsynth::fixtures;
use litsynth::ingest::{ReplayTransport, SearchSettings, Searcher, deduplicate, fetch_document};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let transport = ReplayTransport::new(fixtures::recorded_exchanges());
    let searcher = Searcher::new(&transport, SearchSettings::default()).unthrottled();

    let mut records = Vec::new();
    for source in [SourceKind::Arxiv, SourceKind::SemanticScholar] {
        let out = searcher.search_api(fixtures::FIXTURE_QUERY, fixtures::FIXTURE_YEARS, source)?;
        println!("{source}: {} records, skipped {:?}", out.records.len(), out.skipped);
        records.extend(out.records);
    }
    let merged = deduplicate(records);
    println!("{} unique papers after deduplication\n", merged.len());

    let cache = tempfile::tempdir()?;
    for rec in merged {
        let limiter = searcher.limiter(rec.source);
        let rec = fetch_document(rec, cache.path(), &transport, limiter, SearchSettings::default().retry);
        let doc = rec.pdf_path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "-".into());
        println!("{:<24} {:<6} {:<28} {:?}", rec.canonical_id, rec.year.unwrap_or(0), doc, rec.review_flags);
    }
    Ok(())
}
