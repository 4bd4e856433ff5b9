//! arXiv export API: query URLs and Atom feed parsing.

use reqwest::Url;

use crate::config::SourceKind;

use super::record::PaperRecord;

pub const DEFAULT_BASE: &str = "http://export.arxiv.org/api/query";

const ATOM: &str = "http://www.w3.org/2005/Atom";
const ARXIV_NS: &str = "http://arxiv.org/schemas/atom";
const OPENSEARCH: &str = "http://a9.com/-/spec/opensearch/1.1/";

pub fn query_url(base: &str, query: &str, years: (i32, i32), start: usize, page: usize) -> String {
    let search = format!(
        "all:\"{}\" AND submittedDate:[{}01010000 TO {}12312359]",
        query.trim(),
        years.0,
        years.1
    );
    let start = start.to_string();
    let page = page.to_string();
    Url::parse_with_params(
        base,
        [
            ("search_query", search.as_str()),
            ("start", start.as_str()),
            ("max_results", page.as_str()),
            ("sortBy", "submittedDate"),
            ("sortOrder", "ascending"),
        ],
    )
    .map(String::from)
    .unwrap_or_else(|_| base.to_string())
}

#[derive(Debug, Default)]
pub struct FeedPage {
    pub records: Vec<PaperRecord>,
    /// One message per entry that could not be turned into a record.
    pub skipped: Vec<String>,
    pub total_results: Option<usize>,
    pub entries_seen: usize,
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// "http://arxiv.org/abs/1708.02182v1" becomes "1708.02182".
pub fn strip_arxiv_id(id_url: &str) -> Option<String> {
    let tail = id_url.trim().rsplit_once("/abs/").map(|(_, t)| t)?;
    let tail = match tail.rfind('v') {
        Some(pos) if pos > 0 && tail[pos + 1..].chars().all(|c| c.is_ascii_digit()) && pos + 1 < tail.len() => {
            &tail[..pos]
        }
        _ => tail,
    };
    (!tail.is_empty()).then(|| tail.to_string())
}

pub fn parse_feed(xml: &str) -> Result<FeedPage, String> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| format!("malformed Atom feed: {e}"))?;
    let root = doc.root_element();
    let mut page = FeedPage {
        total_results: root
            .children()
            .find(|n| n.has_tag_name((OPENSEARCH, "totalResults")))
            .and_then(|n| n.text())
            .and_then(|t| t.trim().parse().ok()),
        ..Default::default()
    };

    for entry in root.children().filter(|n| n.has_tag_name((ATOM, "entry"))) {
        page.entries_seen += 1;
        let child_text = |name: (&str, &str)| {
            entry
                .children()
                .find(|n| n.has_tag_name(name))
                .and_then(|n| n.text())
                .map(collapse_ws)
                .filter(|s| !s.is_empty())
        };

        let Some(id) = child_text((ATOM, "id")).and_then(|s| strip_arxiv_id(&s)) else {
            page.skipped.push("entry without a usable arXiv id".into());
            continue;
        };
        let Some(title) = child_text((ATOM, "title")) else {
            page.skipped.push(format!("arxiv:{id}: missing title"));
            continue;
        };
        let year = child_text((ATOM, "published"))
            .and_then(|p| p.get(..4).and_then(|y| y.parse::<i32>().ok()));
        let Some(year) = year else {
            page.skipped.push(format!("arxiv:{id}: missing or malformed publication date"));
            continue;
        };

        let mut rec = PaperRecord::new(SourceKind::Arxiv, title);
        rec.source_id = Some(id);
        rec.doi = child_text((ARXIV_NS, "doi"));
        rec.year = Some(year);
        rec.venue = child_text((ARXIV_NS, "journal_ref"));
        rec.abstract_text = child_text((ATOM, "summary"));
        rec.authors = entry
            .children()
            .filter(|n| n.has_tag_name((ATOM, "author")))
            .filter_map(|a| {
                a.children()
                    .find(|n| n.has_tag_name((ATOM, "name")))
                    .and_then(|n| n.text())
                    .map(collapse_ws)
            })
            .collect();
        rec.pdf_url = entry
            .children()
            .filter(|n| n.has_tag_name((ATOM, "link")))
            .find(|n| n.attribute("title") == Some("pdf"))
            .and_then(|n| n.attribute("href"))
            .map(str::to_string);
        rec.refresh_id();
        page.records.push(rec);
    }
    Ok(page)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_versions() {
        assert_eq!(strip_arxiv_id("http://arxiv.org/abs/1708.02182v1").as_deref(), Some("1708.02182"));
        assert_eq!(strip_arxiv_id("http://arxiv.org/abs/1901.02860").as_deref(), Some("1901.02860"));
        assert_eq!(strip_arxiv_id("http://arxiv.org/abs/cs/0112017v2").as_deref(), Some("cs/0112017"));
        assert_eq!(strip_arxiv_id("nonsense"), None);
    }

    #[test]
    fn parses_minimal_feed() {
        let xml = r#"<?xml version="1.0" encoding="UTF-8"?>
<feed xmlns="http://www.w3.org/2005/Atom" xmlns:opensearch="http://a9.com/-/spec/opensearch/1.1/" xmlns:arxiv="http://arxiv.org/schemas/atom">
  <opensearch:totalResults>1</opensearch:totalResults>
  <entry>
    <id>http://arxiv.org/abs/1708.02182v1</id>
    <published>2017-08-07T17:31:56Z</published>
    <title>Regularizing and Optimizing LSTM
      Language Models</title>
    <summary>We study &amp; regularize.</summary>
    <author><name>Stephen Merity</name></author>
    <author><name>Nitish Shirish Keskar</name></author>
    <link title="pdf" href="http://arxiv.org/pdf/1708.02182v1" rel="related"/>
  </entry>
</feed>"#;
        let page = parse_feed(xml).unwrap();
        assert_eq!(page.total_results, Some(1));
        let r = &page.records[0];
        assert_eq!(r.canonical_id, "arxiv:1708.02182");
        assert_eq!(r.title, "Regularizing and Optimizing LSTM Language Models");
        assert_eq!(r.year, Some(2017));
        assert_eq!(r.authors.len(), 2);
        assert_eq!(r.abstract_text.as_deref(), Some("We study & regularize."));
        assert_eq!(r.pdf_url.as_deref(), Some("http://arxiv.org/pdf/1708.02182v1"));
    }

    #[test]
    fn url_encodes_query_and_years() {
        let url = query_url(DEFAULT_BASE, "autoregressive models", (2016, 2024), 0, 50);
        assert!(url.starts_with("http://export.arxiv.org/api/query?search_query="));
        assert!(url.contains("201601010000"));
        assert!(url.contains("max_results=50"));
    }
}
