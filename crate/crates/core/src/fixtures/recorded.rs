//! Recorded search-API responses for offline ingestion tests: an arXiv
//! Atom page with one malformed entry, a Semantic Scholar page, and the
//! document downloads they link to (one of them dead).

use std::fmt::Write as _;

use crate::ingest::{RecordedExchange, SearchSettings, arxiv, semantic_scholar};

use super::pdf::write_pdf;

pub const FIXTURE_QUERY: &str = "autoregressive language models";
pub const FIXTURE_YEARS: (i32, i32) = (2017, 2024);
/// Entries in the recorded arXiv page, including the malformed one.
pub const ARXIV_FIXTURE_ENTRIES: usize = 10;
pub const DEAD_PDF_URL: &str = "http://arxiv.org/pdf/2102.00007v1";

struct Entry {
    id: &'static str,
    title: &'static str,
    published: Option<&'static str>,
    authors: &'static [&'static str],
    summary: &'static str,
    doi: Option<&'static str>,
}

const ENTRIES: [Entry; ARXIV_FIXTURE_ENTRIES] = [
    Entry { id: "2101.00001", title: "Gated Recurrent Language Models Revisited", published: Some("2021-01-04T10:00:00Z"), authors: &["Ada Quill", "Bram Oster"], summary: "We revisit word-level language modelling with stacked recurrent networks.", doi: None },
    Entry { id: "2101.00002", title: "Segment Memory for Attention Decoders", published: Some("2021-01-09T10:00:00Z"), authors: &["Cleo Ruiz"], summary: "We present an attention-based autoregressive language model with segment-level memory.", doi: Some("10.5555/seg.2021.2") },
    Entry { id: "2101.00003", title: "Timed Events for Piano Performance Generation", published: Some("2021-02-11T10:00:00Z"), authors: &["Dario Tanaka", "Esme Okafor"], summary: "We model performance recordings as an autoregressive stream of timed events.", doi: None },
    Entry { id: "2101.00004", title: "Relative Positions in Deep Transformer Language Models", published: Some("2021-03-02T10:00:00Z"), authors: &["Femi Anand"], summary: "We analyse relative position encodings in Transformer language models.", doi: None },
    Entry { id: "2101.00005", title: "A Broken Entry Without a Date", published: None, authors: &["Greta Castell"], summary: "This entry lacks its publication date.", doi: None },
    Entry { id: "2102.00006", title: "Weight Averaging for Recurrent Word Predictors", published: Some("2021-04-20T10:00:00Z"), authors: &["Hugo Dimitrov", "Ines Eklund"], summary: "Averaging the iterates late in training smooths out noisy updates of autoregressive language models.", doi: None },
    Entry { id: "2102.00007", title: "Infilling Symbolic Scores with Anticipation", published: Some("2022-05-14T10:00:00Z"), authors: &["Jonas Farrow"], summary: "Autoregressive language models with anticipation of future control events can infill partial scores.", doi: None },
    Entry { id: "2102.00008", title: "Adaptive Inputs for Large Vocabulary Decoders", published: Some("2022-06-01T10:00:00Z"), authors: &["Kaia Gatti", "Luca Haddad"], summary: "Adaptive input representations reduce the cost of large vocabularies in autoregressive language models.", doi: None },
    Entry { id: "2103.00009", title: "Truncated Backpropagation Windows for Long Documents", published: Some("2023-01-17T10:00:00Z"), authors: &["Mina Iversen"], summary: "Longer truncated backpropagation windows help recurrent language models on long documents.", doi: None },
    Entry { id: "2103.00010", title: "Controllable Multitrack Music Sequence Models", published: Some("2023-03-30T10:00:00Z"), authors: &["Nils Jovic", "Olga Kerrigan"], summary: "This paper applies Transformer sequence models to polyphonic music generation.", doi: None },
];

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn pdf_url(id: &str) -> String {
    format!("http://arxiv.org/pdf/{id}v1")
}

/// The recorded arXiv Atom page.
pub fn arxiv_feed() -> String {
    let mut xml = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<feed xmlns=\"http://www.w3.org/2005/Atom\" xmlns:opensearch=\"http://a9.com/-/spec/opensearch/1.1/\" xmlns:arxiv=\"http://arxiv.org/schemas/atom\">\n",
    );
    let _ = writeln!(xml, "  <title>arXiv Query</title>\n  <opensearch:totalResults>{ARXIV_FIXTURE_ENTRIES}</opensearch:totalResults>");
    for e in &ENTRIES {
        let _ = writeln!(xml, "  <entry>\n    <id>http://arxiv.org/abs/{}v1</id>", e.id);
        if let Some(p) = e.published {
            let _ = writeln!(xml, "    <published>{p}</published>");
        }
        let _ = writeln!(xml, "    <title>{}</title>\n    <summary>{}</summary>", xml_escape(e.title), xml_escape(e.summary));
        for a in e.authors {
            let _ = writeln!(xml, "    <author><name>{a}</name></author>");
        }
        if let Some(d) = e.doi {
            let _ = writeln!(xml, "    <arxiv:doi>{d}</arxiv:doi>");
        }
        let _ = writeln!(xml, "    <link title=\"pdf\" href=\"{}\" rel=\"related\" type=\"application/pdf\"/>\n  </entry>", pdf_url(e.id));
    }
    xml.push_str("</feed>\n");
    xml
}

/// The recorded Semantic Scholar page: one paper also on arXiv (same DOI),
/// two new ones, and one without a year.
pub fn semantic_scholar_page() -> String {
    serde_json::json!({
        "total": 4,
        "offset": 0,
        "data": [
            {"paperId": "s2seg", "title": "Segment Memory for Attention Decoders", "year": 2021, "venue": "Transactions on Language Modelling",
             "externalIds": {"DOI": "10.5555/SEG.2021.2"}, "authors": [{"name": "Cleo Ruiz"}],
             "abstract": "We present an attention-based autoregressive language model with segment-level memory."},
            {"paperId": "s2cache", "title": "Cached Recurrent Language Models at Modest Scale", "year": 2020, "venue": "Workshop on Sequence Learning",
             "authors": [{"name": "Pavel Laine"}], "abstract": "We study recurrent language models trained with aggressive regularisation.",
             "openAccessPdf": {"url": "https://example.org/papers/cached-recurrent.pdf"}},
            {"paperId": "s2drum", "title": "Drum Pattern Sequence Models", "year": 2022, "venue": "Symposium on Music Information Processing",
             "authors": [{"name": "Rosa Moreau"}], "abstract": "Drum tracks are modelled with autoregressive sequence models."},
            {"paperId": "s2noyear", "title": "An Undated Preprint", "authors": [{"name": "Soren Nakamura"}]}
        ]
    })
    .to_string()
}

fn paper_pdf(title: &str, summary: &str) -> String {
    let bytes = write_pdf(&[
        &format!("{title}\nAbstract\n{summary}\n1 Introduction\nWe describe the model and its training."),
        "3 Experimental Setup\nWe use a learning rate of 0.001 and a batch size of 32.\n4 Results\nThe model reaches a test perplexity of 42.5 on WikiText-103.",
    ]);
    String::from_utf8(bytes).expect("ASCII PDF")
}

/// Every response a search for [`FIXTURE_QUERY`] over [`FIXTURE_YEARS`]
/// with default settings needs, plus the linked documents. The download
/// at [`DEAD_PDF_URL`] answers 404.
pub fn recorded_exchanges() -> Vec<RecordedExchange> {
    let s = SearchSettings::default();
    let mut out = vec![
        RecordedExchange {
            url: arxiv::query_url(&s.arxiv_base, FIXTURE_QUERY, FIXTURE_YEARS, 0, s.page_size),
            status: 200,
            body: arxiv_feed(),
        },
        RecordedExchange {
            url: semantic_scholar::query_url(&s.semantic_scholar_base, FIXTURE_QUERY, FIXTURE_YEARS, 0, s.page_size),
            status: 200,
            body: semantic_scholar_page(),
        },
        RecordedExchange {
            url: "https://example.org/papers/cached-recurrent.pdf".into(),
            status: 200,
            body: paper_pdf("Cached Recurrent Language Models at Modest Scale", "We study recurrent language models trained with aggressive regularisation."),
        },
    ];
    for e in ENTRIES.iter().filter(|e| e.published.is_some()) {
        let url = pdf_url(e.id);
        if url == DEAD_PDF_URL {
            out.push(RecordedExchange { url, status: 404, body: "not found".into() });
        } else {
            out.push(RecordedExchange { url, status: 200, body: paper_pdf(e.title, e.summary) });
        }
    }
    out
}
