//! Stage wiring: ingest, filter, parse and extract, aggregate, cluster,
//! summarise, generate scripts. Each stage sees the complete output of the
//! one before it.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::config::{Component, ConfigError, RunConfig, SourceKind};
use crate::error::{Error, Result};
use crate::extract::{Extractor, FactBundle, Gazetteer, Metadata, RuleSet};
use crate::ingest::{
    HttpTransport, IngestError, PaperRecord, PaperStatus, RetryPolicy, SearchSettings, Searcher, Transport,
    deduplicate, fetch_document, load_local_corpus, write_manifest,
};
use crate::kb::{KbError, KnowledgeBase, SharedKb};
use crate::parse::{DocumentParser, parallel_map};
use crate::relevance::{KeywordSet, RelevanceDecision, RelevanceModel, classify, load_labelled, train_classifier};
use crate::scriptgen::{ReproductionPlan, TemplateRegistry, choose_template, plan_reproduction, write_artifacts};
use crate::text::{Tokenizer, sentence_spans};
use crate::topics::{
    ClusterDoc, HttpBackend, SummaryBackend, SummaryOptions, TfidfIndex, TopicError, TopicModel, TopicSummary,
    Vectorizer, build_tfidf, cluster_topics, default_k_range, embedding_text, render_report, sparse_centroid,
    summarise,
};

/// Keyword list looked up in the corpus cache when none is configured.
pub const KEYWORDS_FILE: &str = "keywords.txt";
/// Labelled screening texts in the corpus cache used to train the
/// relevance classifier when no model file is configured.
pub const TRAINING_FILE: &str = "relevance_train.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageName {
    Ingest,
    Filter,
    ParseExtract,
    Aggregate,
    Cluster,
    Summarise,
    Scripts,
}

impl StageName {
    pub const ORDER: [StageName; 7] = [
        StageName::Ingest,
        StageName::Filter,
        StageName::ParseExtract,
        StageName::Aggregate,
        StageName::Cluster,
        StageName::Summarise,
        StageName::Scripts,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StageName::Ingest => "ingest",
            StageName::Filter => "filter",
            StageName::ParseExtract => "parse_extract",
            StageName::Aggregate => "aggregate",
            StageName::Cluster => "cluster",
            StageName::Summarise => "summarise",
            StageName::Scripts => "scripts",
        }
    }
}

impl fmt::Display for StageName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug)]
pub struct RunOutput {
    /// One entry per topic cluster.
    pub report: Vec<TopicSummary>,
    pub report_text: String,
    pub kb_path: PathBuf,
    pub script_artifacts: Vec<PathBuf>,
    pub kb: KnowledgeBase,
    pub topic_model: Option<TopicModel>,
    pub decisions: Vec<RelevanceDecision>,
    pub plans: Vec<ReproductionPlan>,
    /// Wall time per completed stage, in seconds.
    pub timings: Vec<(StageName, f64)>,
    pub warnings: Vec<String>,
}

struct Tracker {
    completed: Vec<StageName>,
    timings: Vec<(StageName, f64)>,
}

impl Tracker {
    fn run<T, E: Into<Error>>(&mut self, stage: StageName, f: impl FnOnce() -> std::result::Result<T, E>) -> Result<T> {
        let started = Instant::now();
        log::info!("stage {stage}");
        match f() {
            Ok(v) => {
                self.completed.push(stage);
                self.timings.push((stage, started.elapsed().as_secs_f64()));
                Ok(v)
            }
            Err(e) => Err(Error::PartialRun {
                completed: self.completed.clone(),
                failed: stage,
                cause: Box::new(e.into()),
            }),
        }
    }
}

/// Fails early when an output location cannot be written.
pub fn check_outputs(config: &RunConfig) -> std::result::Result<(), ConfigError> {
    let unwritable = |path: &Path, reason: String| ConfigError::Unwritable {
        path: path.to_path_buf(),
        reason,
    };
    let probe_dir = |dir: &Path, target: &Path| -> std::result::Result<(), ConfigError> {
        std::fs::create_dir_all(dir).map_err(|e| unwritable(target, e.to_string()))?;
        let probe = dir.join(".litsynth-write-probe");
        std::fs::write(&probe, b"").map_err(|e| unwritable(target, e.to_string()))?;
        let _ = std::fs::remove_file(probe);
        Ok(())
    };
    for file in [&config.kb_path, &config.report_path] {
        if file.is_dir() {
            return Err(unwritable(file, "is a directory".into()));
        }
        let parent = file.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        probe_dir(parent, file)?;
    }
    probe_dir(&config.artifacts_dir, &config.artifacts_dir)
}

fn has_local_corpus(dir: &Path) -> bool {
    std::fs::read_dir(dir).is_ok_and(|entries| {
        entries.filter_map(|e| e.ok()).any(|e| {
            let p = e.path();
            p.file_name().is_some_and(|n| n == crate::ingest::MANIFEST_FILE)
                || matches!(p.extension().and_then(|x| x.to_str()), Some("txt" | "pdf"))
        })
    })
}

fn ingest(config: &RunConfig, transport: &dyn Transport, throttle: bool) -> std::result::Result<Vec<PaperRecord>, IngestError> {
    let cache = &config.corpus_cache;
    let years = config.year_range();
    let retry = RetryPolicy::default();
    let searcher = {
        let s = Searcher::new(
            transport,
            SearchSettings {
                local_dir: Some(cache.clone()),
                retry,
                ..Default::default()
            },
        );
        if throttle { s } else { s.unthrottled() }
    };
    let from_cache = has_local_corpus(cache);
    let mut records = if from_cache {
        load_local_corpus(cache)?
    } else {
        let mut all = Vec::new();
        for &source in &config.sources {
            if source == SourceKind::LocalFile {
                continue;
            }
            all.extend(searcher.search_api(&config.topic_query, years, source)?.records);
        }
        all
    };
    records.retain(|r| r.year.is_none_or(|y| y >= years.0 && y <= years.1));
    let mut records = deduplicate(records);
    for r in records.iter_mut() {
        let needs_fetch = r.pdf_path.as_ref().is_none_or(|p| !cache.join(p).is_file());
        // a cached record that already failed to download keeps its flag, so
        // offline re-runs reproduce the same knowledge-base entry
        let failed_before = from_cache
            && r.review_flags.iter().any(|f| f.starts_with("download failed") || f == "no document available");
        if needs_fetch && !failed_before {
            let limiter = searcher.limiter(if r.source == SourceKind::LocalFile { SourceKind::Arxiv } else { r.source });
            *r = fetch_document(r.clone(), cache, transport, limiter, retry);
        }
    }
    if !from_cache && !records.is_empty() {
        write_manifest(cache, &records)?;
    }
    Ok(records)
}

fn relevance_model(config: &RunConfig, warnings: &mut Vec<String>) -> Result<Option<RelevanceModel>> {
    if !config.stage_toggles.enabled(Component::RelevanceClassifier) {
        return Ok(None);
    }
    if let Some(path) = &config.relevance_model {
        return Ok(Some(RelevanceModel::load(path)?));
    }
    let training = config.corpus_cache.join(TRAINING_FILE);
    if training.is_file() {
        let labelled = load_labelled(&training)?;
        return Ok(Some(train_classifier(&labelled, config.random_seed)?));
    }
    let msg = "no relevance model or labelled training file; keyword screening only".to_string();
    log::warn!("{msg}");
    warnings.push(msg);
    Ok(None)
}

fn keywords(config: &RunConfig) -> Result<KeywordSet> {
    if let Some(path) = &config.keywords_path {
        return Ok(KeywordSet::load(path)?);
    }
    let cached = config.corpus_cache.join(KEYWORDS_FILE);
    if cached.is_file() {
        return Ok(KeywordSet::load(&cached)?);
    }
    Ok(KeywordSet::from_topic(&config.topic_query)?)
}

fn api_metadata(r: &PaperRecord) -> Metadata {
    Metadata {
        title: r.title.clone(),
        authors: r.authors.clone(),
        year: r.year,
        venue: r.venue.clone(),
        abstract_text: r.abstract_text.clone(),
    }
}

struct ParsedDoc {
    text: Option<String>,
    append: std::result::Result<(), KbError>,
}

/// A one-document "cluster": the vectorizer is fitted on its sentences.
fn single_document_topic(id: &str, text: &str) -> (TopicModel, Vectorizer) {
    let sentences: Vec<&str> = sentence_spans(text).iter().map(|s| s.slice(text)).collect();
    let vectorizer = Vectorizer::fit(sentences, &Tokenizer::default());
    let index = TfidfIndex {
        vectorizer: vectorizer.clone(),
        doc_vectors: BTreeMap::from([(id.to_string(), vectorizer.transform(text))]),
        excluded: Vec::new(),
        warnings: Vec::new(),
    };
    (TopicModel::single(&index), vectorizer)
}

/// Runs every stage over live APIs (when the corpus cache is empty).
pub fn run_pipeline(config: &RunConfig) -> Result<RunOutput> {
    let transport = HttpTransport::new(Duration::from_secs(60)).map_err(|e| Error::PartialRun {
        completed: Vec::new(),
        failed: StageName::Ingest,
        cause: Box::new(Error::Ingest(IngestError::Source {
            source_kind: SourceKind::Arxiv,
            message: e.to_string(),
            partial: Vec::new(),
        })),
    })?;
    run(config, &transport, true)
}

/// Runs every stage with the given transport and no rate limiting (for
/// recorded or offline transports).
pub fn run_pipeline_with(config: &RunConfig, transport: &dyn Transport) -> Result<RunOutput> {
    run(config, transport, false)
}

fn run(config: &RunConfig, transport: &dyn Transport, throttle: bool) -> Result<RunOutput> {
    config.validate()?;
    check_outputs(config)?;
    let toggles = &config.stage_toggles;
    let mut tracker = Tracker {
        completed: Vec::new(),
        timings: Vec::new(),
    };
    let mut warnings = Vec::new();

    let records = tracker.run(StageName::Ingest, || ingest(config, transport, throttle))?;
    for r in &records {
        for f in &r.review_flags {
            warnings.push(format!("{}: {f}", r.canonical_id));
        }
    }

    let mut kb = if config.kb_path.is_file() {
        KnowledgeBase::load(&config.kb_path)?
    } else {
        KnowledgeBase::new()
    };

    let (mut decisions, mut relevant, mut filtered) = (Vec::new(), Vec::new(), Vec::new());
    tracker.run(StageName::Filter, || -> Result<()> {
        let kw = keywords(config)?;
        let model = relevance_model(config, &mut warnings)?;
        for mut r in records {
            let d = classify(model.as_ref(), &kw, &r.canonical_id, &r.screening_text());
            if d.relevant {
                relevant.push(r);
            } else {
                r.advance(PaperStatus::FilteredOut)?;
                filtered.push(r);
            }
            decisions.push(d);
        }
        for r in &filtered {
            let facts = FactBundle {
                metadata: api_metadata(r),
                ..Default::default()
            };
            kb.append(r.clone(), facts, config.overwrite)?;
        }
        Ok(())
    })?;

    let mut texts: BTreeMap<String, String> = BTreeMap::new();
    let kb = tracker.run(StageName::ParseExtract, || -> Result<KnowledgeBase> {
        let rules = match &config.rules_path {
            Some(p) => RuleSet::load(p)?,
            None => RuleSet::default(),
        };
        let mut extractor = Extractor::new(rules, Gazetteer::default());
        if !toggles.enabled(Component::RulePatterns) {
            extractor = extractor.without_rules();
        }
        let parser = DocumentParser::default();
        let shared = SharedKb::new(std::mem::take(&mut kb), config.overwrite);
        let cache = &config.corpus_cache;
        let outcome = parallel_map(
            &relevant,
            config.effective_workers(),
            |r| r.canonical_id.clone(),
            |r| -> std::result::Result<ParsedDoc, String> {
                let mut rec = r.clone();
                let meta = api_metadata(&rec);
                let parsed = rec.pdf_path.as_ref().map(|p| parser.parse(&rec.canonical_id, &cache.join(p)));
                let (facts, text) = match parsed {
                    Some(p) if !p.failed() => {
                        rec.advance(PaperStatus::Parsed).map_err(|e| e.to_string())?;
                        let mut facts = extractor.extract(&p.text, Some(&meta));
                        facts.warnings.extend(p.extraction_warnings.iter().map(|w| format!("parse: {w}")));
                        rec.advance(PaperStatus::Extracted).map_err(|e| e.to_string())?;
                        (facts, Some(p.text))
                    }
                    other => {
                        rec.advance(PaperStatus::ParseFailed).map_err(|e| e.to_string())?;
                        let reason = match other {
                            Some(p) => format!("unparseable document ({})", p.extraction_warnings.join("; ")),
                            None => "no document to parse".to_string(),
                        };
                        rec.flag(reason);
                        let facts = FactBundle {
                            metadata: meta,
                            ..Default::default()
                        };
                        (facts, None)
                    }
                };
                let append = shared.append(rec, facts).map(|_| ());
                Ok(ParsedDoc { text, append })
            },
        );
        for (id, doc) in outcome.outputs {
            doc.append?;
            if let Some(t) = doc.text {
                texts.insert(id, t);
            }
        }
        let mut kb = shared.into_inner();
        for failure in outcome.failures {
            log::error!("{}: task failed: {}", failure.id, failure.message);
            warnings.push(format!("{}: task failed: {}", failure.id, failure.message));
            if let Some(r) = relevant.iter().find(|r| r.canonical_id == failure.id) {
                let mut rec = r.clone();
                rec.status = PaperStatus::ParseFailed;
                rec.flag(format!("task failed: {}", failure.message));
                let facts = FactBundle {
                    metadata: api_metadata(&rec),
                    ..Default::default()
                };
                kb.append(rec, facts, config.overwrite)?;
            }
        }
        Ok(kb)
    })?;

    tracker.run(StageName::Aggregate, || -> std::result::Result<(), KbError> {
        kb.aggregate();
        kb.persist(&config.kb_path)
    })?;

    // Only this run's extracted papers are clustered and summarised.
    let docs: Vec<(String, String)> = texts
        .iter()
        .filter(|(id, _)| kb.get(id).is_some_and(|e| e.record.status == PaperStatus::Extracted))
        .map(|(id, body)| {
            let abs = kb.get(id).and_then(|e| e.facts.metadata.abstract_text.clone());
            (id.clone(), embedding_text(abs.as_deref(), body))
        })
        .collect();

    let clustered = tracker.run(StageName::Cluster, || -> std::result::Result<Option<(TopicModel, Vectorizer)>, TopicError> {
        match docs.len() {
            0 => Ok(None),
            1 => Ok(Some(single_document_topic(&docs[0].0, &texts[&docs[0].0]))),
            _ => {
                let index = match build_tfidf(&docs) {
                    Ok(i) => i,
                    Err(TopicError::EmptyCorpus) => {
                        warnings.push("no vocabulary left for clustering".into());
                        return Ok(None);
                    }
                    Err(e) => return Err(e),
                };
                warnings.extend(index.warnings.iter().cloned());
                let d = index.doc_vectors.len();
                let model = match d {
                    0 => return Ok(None),
                    1 | 2 => TopicModel::single(&index),
                    _ => cluster_topics(&index, default_k_range(d), config.random_seed)?,
                };
                Ok(Some((model, index.vectorizer)))
            }
        }
    })?;

    let backend_holder;
    let backend: Option<&dyn SummaryBackend> = match &config.summariser_endpoint {
        Some(url) if toggles.enabled(Component::LlmSummarisation) => {
            backend_holder = HttpBackend::new(url.clone(), transport);
            Some(&backend_holder)
        }
        _ => None,
    };
    let mut topic_model = None;
    let (report, report_text) = tracker.run(StageName::Summarise, || -> Result<(Vec<TopicSummary>, String)> {
        let mut sections = Vec::new();
        if let Some((mut model, vectorizer)) = clustered {
            for cluster in 0..model.k {
                let members: Vec<String> = model.members(cluster).into_iter().map(str::to_string).collect();
                let cluster_docs: Vec<ClusterDoc> = members
                    .iter()
                    .map(|id| ClusterDoc {
                        id: id.clone(),
                        text: texts[id].clone(),
                    })
                    .collect();
                let centroid = sparse_centroid(&model.centroids[cluster]);
                let summary = summarise(&cluster_docs, &vectorizer, &centroid, backend, SummaryOptions::default());
                model.summaries.insert(cluster, summary.clone());
                sections.push(TopicSummary {
                    cluster,
                    labels: model.labels.get(cluster).cloned().unwrap_or_default(),
                    members,
                    summary,
                });
            }
            topic_model = Some(model);
        }
        let text = render_report(&config.topic_query, &sections);
        std::fs::write(&config.report_path, &text).map_err(|e| Error::io(&config.report_path, e))?;
        Ok((sections, text))
    })?;

    let (plans, script_artifacts) = tracker.run(StageName::Scripts, || -> Result<(Vec<ReproductionPlan>, Vec<PathBuf>)> {
        let registry = match &config.templates_dir {
            Some(dir) => TemplateRegistry::with_dir(dir)?,
            None => TemplateRegistry::shipped(),
        };
        let plans: Vec<ReproductionPlan> = texts
            .keys()
            .filter_map(|id| kb.get(id))
            .filter(|e| e.record.status == PaperStatus::Extracted && !e.facts.hyperparams.is_empty())
            .map(|e| {
                let template = registry.get(choose_template(&e.facts)).expect("shipped template ids");
                plan_reproduction(&e.record.canonical_id, &e.facts, template)
            })
            .collect();
        let paths = write_artifacts(&plans, &registry, &config.artifacts_dir)?;
        Ok((plans, paths))
    })?;

    Ok(RunOutput {
        report,
        report_text,
        kb_path: config.kb_path.clone(),
        script_artifacts,
        kb,
        topic_model,
        decisions,
        plans,
        timings: tracker.timings,
        warnings,
    })
}
