use litsynth::config::SourceKind;
use litsynth::fixtures;
use litsynth::ingest::{ReplayTransport, SearchSettings, Searcher, arxiv, deduplicate, semantic_scholar};
use litsynth::parse::DocumentParser;

#[test]
fn recorded_arxiv_page_skips_the_undated_entry() {
    let page = arxiv::parse_feed(&fixtures::arxiv_feed()).unwrap();
    assert_eq!(page.entries_seen, fixtures::ARXIV_FIXTURE_ENTRIES);
    assert_eq!(page.records.len(), fixtures::ARXIV_FIXTURE_ENTRIES - 1);
    assert_eq!(page.skipped.len(), 1);
    assert!(page.records.iter().all(|r| r.pdf_url.is_some() && r.year.is_some()));
}

#[test]
fn searches_merge_by_doi() {
    let transport = ReplayTransport::new(fixtures::recorded_exchanges());
    let searcher = Searcher::new(&transport, SearchSettings::default()).unthrottled();
    let mut all = Vec::new();
    for source in [SourceKind::Arxiv, SourceKind::SemanticScholar] {
        let out = searcher.search_api(fixtures::FIXTURE_QUERY, fixtures::FIXTURE_YEARS, source).unwrap();
        assert_eq!(out.skipped.len(), 1, "{source}");
        all.extend(out.records);
    }
    assert_eq!(all.len(), 12);
    let merged = deduplicate(all);
    assert_eq!(merged.len(), 11);
    let seg = merged.iter().find(|r| r.title == "Segment Memory for Attention Decoders").unwrap();
    assert!(seg.venue.is_some(), "venue from the richer source survives the merge");
    let s2 = semantic_scholar::parse_page(&fixtures::semantic_scholar_page()).unwrap();
    assert_eq!(s2.records.len(), 3);
}

#[test]
fn every_pdf_page_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two-pages.pdf");
    std::fs::write(&path, fixtures::sentinel_pdf()).unwrap();
    let parsed = DocumentParser::default().parse("local:two-pages", &path);
    assert_eq!(parsed.page_count, 2);
    assert!(parsed.text.contains(fixtures::PDF_SENTINEL), "{}", parsed.text);
}

#[test]
fn corrupt_pdf_is_reported_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.pdf");
    let mut bytes = fixtures::sentinel_pdf();
    bytes.truncate(bytes.len() / 3);
    std::fs::write(&path, bytes).unwrap();
    let parsed = DocumentParser::default().parse("local:broken", &path);
    assert!(parsed.failed() || !parsed.extraction_warnings.is_empty());
}
