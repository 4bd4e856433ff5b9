//! Authored offline corpora: synthetic papers with planted facts and their
//! gold annotations, the case-study texts, recorded API responses and a
//! minimal PDF writer. A generated corpus directory has the same layout as
//! the ingestion cache, so it stands in for live APIs.

mod corpora;
mod pdf;
mod prose;
mod recorded;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::SourceKind;
use crate::eval::{GoldAnnotation, RELEVANT, Task, citation_items, hyperparam_items, result_items, write_gold};
use crate::extract::{FactBundle, HyperValue, HyperparamFact, Metric, ReferenceEntry, ResultFact, Split};
use crate::ingest::{PaperRecord, write_manifest};
use crate::pipeline::{KEYWORDS_FILE, TRAINING_FILE};
use crate::text::{Span, canonical_number};

pub use corpora::{
    SCALING_PAPER_WORDS, case_study_corpus, case_study_specs, noise_free_corpus, noise_free_specs, realistic_corpus, realistic_specs,
    scaling_corpus, scaling_specs, two_topic_documents,
};
pub use pdf::{PDF_SENTINEL, sentinel_pdf, write_pdf};
pub use recorded::{
    ARXIV_FIXTURE_ENTRIES, DEAD_PDF_URL, FIXTURE_QUERY, FIXTURE_YEARS, arxiv_feed, recorded_exchanges,
    semantic_scholar_page,
};

/// Gold annotations written next to a generated corpus.
pub const GOLD_FILE: &str = "gold.jsonl";

/// Screening keywords shipped with every generated corpus.
pub const KEYWORDS: &[&str] = &[
    "autoregressive",
    "language model",
    "language models",
    "language modelling",
    "music generation",
    "sequence model",
    "sequence models",
];

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("duplicate paper id {0}")]
    DuplicateId(String),
    #[error("no paper specs given")]
    Empty,
    #[error("paper id {0:?} is not usable as a file stem")]
    BadId(String),
    #[error("{id}: cannot render {what}")]
    Unrenderable { id: String, what: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FixtureError + '_ {
    move |source| FixtureError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Subject area of a synthetic paper; decides prose and relevance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theme {
    Recurrent,
    Attention,
    Music,
    /// Matches the screening keywords but is off-topic.
    Forecasting,
    /// Off-topic and keyword-free.
    Vision,
}

impl Theme {
    pub const ALL: [Theme; 5] = [Theme::Recurrent, Theme::Attention, Theme::Music, Theme::Forecasting, Theme::Vision];

    pub fn relevant(self) -> bool {
        matches!(self, Theme::Recurrent | Theme::Attention | Theme::Music)
    }
}

/// How much the text departs from the planted facts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseProfile {
    /// Every planted fact in a rule-recognised phrasing, nothing else
    /// extractable.
    #[default]
    NoiseFree,
    /// Some facts in phrasings the rules miss, baseline settings and results
    /// quoted from related work, unresolvable and marker-less citations, and
    /// numbers next to ordinary words.
    Realistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticPaperSpec {
    /// `local:<stem>`; the stem names the text file.
    pub canonical_id: String,
    pub theme: Theme,
    /// Facts to embed; metadata supplies title, authors, year and abstract.
    /// Spans are ignored.
    pub planted: FactBundle,
    /// Minimum body length in words; filler pads shorter papers.
    pub length: usize,
    pub noise: NoiseProfile,
}

impl SyntheticPaperSpec {
    pub fn stem(&self) -> &str {
        self.canonical_id.strip_prefix("local:").unwrap_or(&self.canonical_id)
    }

    /// Gold items: the planted facts for relevant papers, nothing for the
    /// rest.
    pub fn gold(&self) -> Vec<GoldAnnotation> {
        let id = format!("local:{}", self.stem());
        let relevant = self.theme.relevant();
        let items = |task: Task| -> BTreeSet<String> {
            if !relevant {
                return BTreeSet::new();
            }
            match task {
                Task::Relevance => BTreeSet::from([RELEVANT.to_string()]),
                Task::Hyperparams => hyperparam_items(&self.planted),
                Task::Results => result_items(&self.planted),
                Task::Citations => citation_items(&self.planted),
            }
        };
        Task::ALL.iter().map(|&t| GoldAnnotation::new(id.clone(), t, items(t))).collect()
    }
}

/// What [`generate_corpus`] wrote.
#[derive(Debug, Clone)]
pub struct CorpusInfo {
    pub dir: PathBuf,
    pub ids: Vec<String>,
    pub gold: Vec<GoldAnnotation>,
    pub texts: BTreeMap<String, String>,
}

impl CorpusInfo {
    pub fn gold_path(&self) -> PathBuf {
        self.dir.join(GOLD_FILE)
    }
}

fn id_seed(seed: u64, id: &str) -> u64 {
    let digest = Sha256::digest(id.as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    seed ^ u64::from_le_bytes(bytes)
}

/// Writes one text file per spec plus `manifest.jsonl`, `gold.jsonl`,
/// `keywords.txt` and `relevance_train.jsonl` into `dir`. Output bytes
/// depend only on the specs and the seed.
pub fn generate_corpus(specs: &[SyntheticPaperSpec], seed: u64, dir: &Path) -> Result<CorpusInfo, FixtureError> {
    if specs.is_empty() {
        return Err(FixtureError::Empty);
    }
    let mut seen = BTreeSet::new();
    for s in specs {
        let stem = s.stem();
        if stem.is_empty() || !stem.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.')) {
            return Err(FixtureError::BadId(s.canonical_id.clone()));
        }
        if !seen.insert(stem.to_string()) {
            return Err(FixtureError::DuplicateId(s.canonical_id.clone()));
        }
    }
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;

    let mut records = Vec::new();
    let mut gold = Vec::new();
    let mut texts = BTreeMap::new();
    for spec in specs {
        let text = render_paper(spec, seed)?;
        let file = format!("{}.txt", spec.stem());
        let path = dir.join(&file);
        std::fs::write(&path, &text).map_err(io_err(&path))?;
        let meta = &spec.planted.metadata;
        let mut rec = PaperRecord::new(SourceKind::LocalFile, meta.title.clone()).with_source_id(spec.stem());
        rec.authors = meta.authors.clone();
        rec.year = meta.year;
        rec.venue = meta.venue.clone();
        rec.abstract_text = meta.abstract_text.clone();
        rec.pdf_path = Some(file.into());
        texts.insert(rec.canonical_id.clone(), text);
        records.push(rec);
        gold.extend(spec.gold());
    }
    write_manifest(dir, &records).map_err(|e| FixtureError::Io {
        path: dir.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    })?;
    let gold_path = dir.join(GOLD_FILE);
    write_gold(&gold_path, &gold).map_err(|e| FixtureError::Io {
        path: gold_path.clone(),
        source: std::io::Error::other(e.to_string()),
    })?;
    let kw_path = dir.join(KEYWORDS_FILE);
    std::fs::write(&kw_path, format!("# screening keywords\n{}\n", KEYWORDS.join("\n"))).map_err(io_err(&kw_path))?;
    let train_path = dir.join(TRAINING_FILE);
    let mut lines = String::new();
    for (text, relevant) in relevance_training_set(seed, 60) {
        lines.push_str(&serde_json::json!({"text": text, "relevant": relevant}).to_string());
        lines.push('\n');
    }
    std::fs::write(&train_path, lines).map_err(io_err(&train_path))?;

    Ok(CorpusInfo {
        dir: dir.to_path_buf(),
        ids: records.into_iter().map(|r| r.canonical_id).collect(),
        gold,
        texts,
    })
}

/// Labelled title-plus-abstract texts drawn from every theme, balanced
/// between relevant and off-topic themes.
pub fn relevance_training_set(seed: u64, n: usize) -> Vec<(String, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(id_seed(seed, "relevance-training"));
    (0..n)
        .map(|i| {
            let theme = if i % 2 == 0 {
                [Theme::Recurrent, Theme::Attention, Theme::Music][(i / 2) % 3]
            } else {
                [Theme::Forecasting, Theme::Vision][(i / 2) % 2]
            };
            let title = random_title(theme, &mut rng);
            (format!("{title}\n{}", random_abstract(theme, &mut rng)), theme.relevant())
        })
        .collect()
}

pub(crate) fn random_title(theme: Theme, rng: &mut ChaCha8Rng) -> String {
    let p = prose::prose(theme);
    format!(
        "{} {} {}",
        p.title_heads.choose(rng).unwrap(),
        p.title_cores.choose(rng).unwrap(),
        prose::TITLE_TAILS.choose(rng).unwrap()
    )
}

pub(crate) fn random_abstract(theme: Theme, rng: &mut ChaCha8Rng) -> String {
    let p = prose::prose(theme);
    let mut middles: Vec<&str> = p.middles.to_vec();
    middles.shuffle(rng);
    format!(
        "{} {} {} {}",
        p.openers.choose(rng).unwrap(),
        middles[0],
        middles[1],
        prose::CLOSERS.choose(rng).unwrap()
    )
}

pub(crate) fn random_authors(rng: &mut ChaCha8Rng) -> Vec<String> {
    let n = rng.gen_range(2..=4);
    let mut surnames: Vec<&str> = prose::SURNAMES.to_vec();
    surnames.shuffle(rng);
    (0..n)
        .map(|i| format!("{} {}", prose::GIVEN_NAMES.choose(rng).unwrap(), surnames[i]))
        .collect()
}

/// A reference entry whose key resolves from its text.
pub fn reference(surname: &str, year: i32, title: &str, venue: &str) -> ReferenceEntry {
    ReferenceEntry {
        label: None,
        key: format!("{}{year}", surname.to_lowercase()),
        text: format!("{surname}, A., Lorne, B. {title}. {venue}, {year}."),
    }
}

pub(crate) fn random_references(n: usize, rng: &mut ChaCha8Rng) -> Vec<ReferenceEntry> {
    let mut surnames: Vec<&str> = prose::SURNAMES.to_vec();
    surnames.shuffle(rng);
    surnames
        .into_iter()
        .take(n)
        .map(|s| {
            let mut words: Vec<&str> = prose::REF_TITLE_WORDS.to_vec();
            words.shuffle(rng);
            let title = words[..rng.gen_range(3..=5)].join(" ");
            reference(s, rng.gen_range(2010..=2023), &title, prose::VENUES.choose(rng).unwrap())
        })
        .collect()
}

/// A citation of `key` as planted (marker and spans are filled in by the
/// renderer's text, not here).
pub fn cite(key: &str) -> crate::extract::CitationLink {
    crate::extract::CitationLink {
        marker: String::new(),
        resolved_key: Some(key.to_string()),
        marker_span: Span::default(),
        statement_span: Span::default(),
    }
}

pub fn hyper(name: &str, value: f64) -> HyperparamFact {
    HyperparamFact {
        name: name.into(),
        value: HyperValue::Number(value),
        unit: None,
        span: Span::default(),
        surface: String::new(),
    }
}

pub fn hyper_text(name: &str, value: &str) -> HyperparamFact {
    HyperparamFact {
        name: name.into(),
        value: HyperValue::Text(value.to_string()),
        unit: None,
        span: Span::default(),
        surface: String::new(),
    }
}

pub fn result(metric: Metric, value: f64, dataset: Option<&str>, split: Option<Split>) -> ResultFact {
    ResultFact {
        metric,
        value,
        dataset: dataset.map(str::to_string),
        split,
        span: Span::default(),
        surface: String::new(),
    }
}

/// Surface form of a planted value: magnitude suffixes for large counts.
fn render_value(name: &str, value: &HyperValue) -> String {
    match value {
        HyperValue::Text(t) => t.clone(),
        HyperValue::Number(v) => {
            let magnitude = matches!(name, "steps" | "param_count" | "vocab_size");
            if magnitude && *v >= 1e6 && (v / 1e6).fract() == 0.0 {
                format!("{}M", canonical_number(v / 1e6))
            } else if magnitude && *v >= 1e4 && (v / 1e3).fract() == 0.0 {
                format!("{}K", canonical_number(v / 1e3))
            } else {
                canonical_number(*v)
            }
        }
    }
}

fn surname_of_key(key: &str) -> String {
    let letters: String = key.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    let mut chars = letters.chars();
    match chars.next() {
        Some(first) => first.to_ascii_uppercase().to_string() + chars.as_str(),
        None => String::new(),
    }
}

fn year_of_key(key: &str) -> String {
    key.chars().skip_while(|c| c.is_ascii_alphabetic()).collect()
}

fn parenthetical(keys: &[&str]) -> String {
    let parts: Vec<String> = keys
        .iter()
        .map(|k| format!("{} et al., {}", surname_of_key(k), year_of_key(k)))
        .collect();
    format!("({})", parts.join("; "))
}

fn narrative(key: &str) -> String {
    format!("{} et al. ({})", surname_of_key(key), year_of_key(key))
}

fn words(s: &str) -> usize {
    s.split_whitespace().count()
}

/// Renders one paper as plain text with numbered section headings and an
/// author-year reference list.
pub fn render_paper(spec: &SyntheticPaperSpec, seed: u64) -> Result<String, FixtureError> {
    let id = spec.canonical_id.clone();
    let unrenderable = |what: String| FixtureError::Unrenderable { id: id.clone(), what };
    let mut rng = ChaCha8Rng::seed_from_u64(id_seed(seed, &spec.canonical_id));
    let realistic = spec.noise == NoiseProfile::Realistic;
    let p = prose::prose(spec.theme);
    let planted = &spec.planted;
    let meta = &planted.metadata;
    if meta.title.trim().is_empty() {
        return Err(unrenderable("an empty title".into()));
    }

    // references and citations
    let ref_keys: BTreeSet<&str> = planted.references.iter().map(|r| r.key.as_str()).collect();
    let mut cited: Vec<&str> = Vec::new();
    for c in &planted.citations {
        let key = c
            .resolved_key
            .as_deref()
            .ok_or_else(|| unrenderable("an unresolved planted citation".into()))?;
        if !ref_keys.contains(key) {
            return Err(unrenderable(format!("citation {key} without a reference entry")));
        }
        if !key.starts_with(|c: char| c.is_ascii_lowercase()) || year_of_key(key).len() != 4 {
            return Err(unrenderable(format!("citation key {key}")));
        }
        if !cited.contains(&key) {
            cited.push(key);
        }
    }
    let hidden_cite = (realistic && cited.len() >= 3 && rng.gen_bool(0.35)).then(|| cited.pop().unwrap());
    let mut claims: Vec<&str> = prose::CITATION_CLAIMS.to_vec();
    claims.shuffle(&mut rng);
    let mut claim_iter = claims.into_iter().cycle();
    let mut citation_sentences = Vec::new();
    let mut i = 0;
    while i < cited.len() {
        let claim = claim_iter.next().unwrap();
        if claim.contains("{cite}") {
            let take = if i + 1 < cited.len() && rng.gen_bool(0.3) { 2 } else { 1 };
            citation_sentences.push(claim.replace("{cite}", &parenthetical(&cited[i..i + take])));
            i += take;
        } else {
            citation_sentences.push(claim.replace("{narr}", &narrative(cited[i])));
            i += 1;
        }
    }
    if let Some(key) = hidden_cite {
        citation_sentences.push(format!(
            "The approach of {} from {} is closely related.",
            surname_of_key(key),
            year_of_key(key)
        ));
    }
    if realistic && rng.gen_bool(0.3) {
        let missing = prose::SURNAMES.iter().find(|s| !ref_keys.iter().any(|k| surname_of_key(k) == **s)).unwrap();
        citation_sentences.push(format!(
            "Similar observations appear in earlier work ({missing} et al., {}).",
            rng.gen_range(2005..=2009)
        ));
    }
    citation_sentences.shuffle(&mut rng);
    let split_at = citation_sentences.len() / 2;
    let related: Vec<String> = citation_sentences.split_off(split_at);
    let intro_cites = citation_sentences;

    let mut related = related;
    if realistic && !cited.is_empty() {
        if rng.gen_bool(0.5) {
            let (_, form, values) = prose::BASELINE_HYPERPARAMS.choose(&mut rng).unwrap();
            let v = values.choose(&mut rng).unwrap();
            related.push(
                form.replace("{narr}", &narrative(cited.choose(&mut rng).unwrap()))
                    .replace("{v}", &canonical_number(*v)),
            );
        }
        if let Some(dataset) = planted.results.iter().find_map(|r| r.dataset.as_deref())
            && rng.gen_bool(0.3)
        {
            let v = rng.gen_range(800..1400) as f64 / 10.0;
            related.push(
                prose::BASELINE_RESULT
                    .replace("{narr}", &narrative(cited.choose(&mut rng).unwrap()))
                    .replace("{v}", &canonical_number(v))
                    .replace("{dataset}", dataset),
            );
        }
    }

    // settings
    let mut setup = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for h in &planted.hyperparams {
        let n = h.name.as_str().to_string();
        if !names.contains(&n) {
            names.push(n);
        }
    }
    let values_of = |name: &str| -> Vec<&HyperparamFact> {
        planted.hyperparams.iter().filter(|h| h.name.as_str() == name).collect()
    };
    let arch = values_of("architecture");
    let depth = values_of("num_layers");
    if arch.len() > 1 || (!arch.is_empty() && depth.len() != 1) {
        return Err(unrenderable("an architecture without exactly one layer count".into()));
    }
    for name in &names {
        if name == "architecture" {
            continue;
        }
        let facts = values_of(name);
        let hard = |rng: &mut ChaCha8Rng| realistic && rng.gen_bool(0.12);
        if name == "num_layers" && !arch.is_empty() {
            let n = render_value(name, &facts[0].value);
            let a = render_value("architecture", &arch[0].value);
            let form = if hard(&mut rng) {
                prose::HARD_DEPTH_WITH_ARCH
            } else {
                prose::DEPTH_WITH_ARCH.choose(&mut rng).unwrap()
            };
            setup.push(form.replace("{n}", &n).replace("{arch}", &a));
            continue;
        }
        if name == "hidden_size" && facts.len() > 1 {
            let vals: Vec<String> = facts.iter().map(|f| render_value(name, &f.value)).collect();
            let (head, last) = vals.split_at(vals.len() - 1);
            let list = format!("{} and {}", head.join(", "), last[0]);
            setup.push(prose::HIDDEN_LIST.replace("{v}", &list));
            continue;
        }
        let forms = prose::phrasings(name);
        if forms.is_empty() {
            return Err(unrenderable(format!("setting {name}")));
        }
        for f in facts {
            let v = render_value(name, &f.value);
            let form = match prose::hard_phrasing(name) {
                Some(h) if hard(&mut rng) => h,
                _ => forms.choose(&mut rng).unwrap(),
            };
            setup.push(form.replace("{v}", &v));
        }
    }
    if realistic {
        for _ in 0..2 {
            let d = prose::DISTRACTORS.choose(&mut rng).unwrap();
            setup.push(
                d.replace("{n}", &rng.gen_range(2..40).to_string())
                    .replace("{m}", &rng.gen_range(2..40).to_string()),
            );
        }
        setup.shuffle(&mut rng);
    }

    // results
    let mut results = Vec::new();
    for r in &planted.results {
        let metric = match r.metric {
            Metric::Perplexity => "perplexity",
            Metric::Accuracy => "accuracy",
            Metric::F1 => "F1 score",
            Metric::Bleu => "BLEU score",
            Metric::Other(_) => return Err(unrenderable(format!("metric {}", r.metric))),
        };
        let split = match r.split {
            Some(Split::Test) => "test ",
            Some(Split::Valid) => "validation ",
            Some(Split::Train) => "training ",
            None => "",
        };
        let v = canonical_number(r.value);
        let form = match &r.dataset {
            Some(_) if realistic && rng.gen_bool(0.15) => prose::HARD_RESULT,
            Some(_) => prose::RESULT_FORMS.choose(&mut rng).unwrap(),
            None => prose::RESULT_FORM_NO_DATASET,
        };
        results.push(
            form.replace("{split}", split)
                .replace("{metric}", metric)
                .replace("{v}", &v)
                .replace("{dataset}", r.dataset.as_deref().unwrap_or("")),
        );
    }
    if realistic && rng.gen_bool(0.5) {
        let d = prose::DISTRACTORS.choose(&mut rng).unwrap();
        results.push(
            d.replace("{n}", &rng.gen_range(2..40).to_string())
                .replace("{m}", &rng.gen_range(2..40).to_string()),
        );
    }

    // assemble, padding introduction and conclusion with filler
    let abstract_text = meta.abstract_text.clone().unwrap_or_default();
    let mut intro: Vec<String> = vec![p.filler.choose(&mut rng).unwrap().to_string()];
    intro.extend(intro_cites);
    let mut conclusion: Vec<String> = vec![prose::CLOSERS.choose(&mut rng).unwrap().to_string()];
    let fixed = words(&abstract_text)
        + [&intro, &related, &setup, &results, &conclusion]
            .iter()
            .map(|v| v.iter().map(|s| words(s)).sum::<usize>())
            .sum::<usize>();
    let mut total = fixed;
    let mut toggle = false;
    while total < spec.length {
        let s = if rng.gen_bool(0.6) {
            p.filler.choose(&mut rng).unwrap()
        } else {
            prose::GENERAL_FILLER.choose(&mut rng).unwrap()
        };
        total += words(s);
        if toggle {
            conclusion.insert(conclusion.len() - 1, s.to_string());
        } else {
            intro.insert(intro.len().min(1 + intro.len() / 2), s.to_string());
        }
        toggle = !toggle;
    }

    let paragraphs = |sentences: &[String]| -> String {
        sentences.chunks(6).map(|c| c.join(" ")).collect::<Vec<_>>().join("\n\n")
    };
    let authors = match meta.authors.as_slice() {
        [] => String::new(),
        [one] => one.clone(),
        [rest @ .., last] => format!("{} and {last}", rest.join(", ")),
    };
    let venue = meta.venue.clone().unwrap_or_else(|| "Workshop on Sequence Learning".to_string());
    let year = meta.year.map(|y| format!(", {y}")).unwrap_or_default();
    let mut out = String::new();
    out.push_str(&format!("{}\n{authors}\n{venue}{year}\n\nAbstract\n{abstract_text}\n\n", meta.title));
    out.push_str(&format!("1 Introduction\n{}\n\n", paragraphs(&intro)));
    if !related.is_empty() {
        out.push_str(&format!("2 Related Work\n{}\n\n", paragraphs(&related)));
    }
    out.push_str(&format!("3 Experimental Setup\n{}\n\n", paragraphs(&setup)));
    if !results.is_empty() {
        out.push_str(&format!("4 Results\n{}\n\n", paragraphs(&results)));
    }
    out.push_str(&format!("5 Conclusion\n{}\n", paragraphs(&conclusion)));
    if !planted.references.is_empty() {
        out.push_str("\nReferences\n");
        for r in &planted.references {
            out.push_str(&r.text);
            out.push('\n');
        }
    }
    Ok(out)
}
