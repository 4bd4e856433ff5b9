//! Training-script artifacts built from extracted hyperparameters.
//!
//! Templates are data files (see `data/templates/`): a header of
//! `key: value` lines, then `--- preamble` and `--- body` sections holding
//! `{{slot}}` placeholders. Header keys:
//!
//! ```text
//! id: rnn-lm
//! slot: hidden_size list alias=hidden,nhid
//! default: patience = 5
//! ```
//!
//! A `list` slot binds every value of one enumerated mention
//! ("hidden sizes 1150, 1150, and 400"); other slots bind a single value.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extract::{FactBundle, HyperValue, HyperparamFact, HyperparamName};
use crate::ingest::safe_file_stem;
use crate::text::{Span, canonical_number};

pub const SCRIPT_FILE: &str = "train.py";
pub const MANIFEST_FILE: &str = "manifest.jsonl";

/// Defaults every template gets unless it overrides them.
pub const BUILTIN_DEFAULTS: [(&str, &str); 3] = [("seed", "42"), ("patience", "5"), ("lr_divisor", "4")];

/// Slot bound from the results table rather than a hyperparameter fact.
pub const DATASET_SLOT: &str = "dataset";

const SHIPPED: [(&str, &str); 3] = [
    ("rnn-lm", include_str!("../data/templates/rnn-lm.tmpl")),
    ("transformer-lm", include_str!("../data/templates/transformer-lm.tmpl")),
    ("event-seq", include_str!("../data/templates/event-seq.tmpl")),
];

/// Largest gap (bytes) between consecutive values of one enumerated list.
const LIST_GAP: usize = 6;

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error("template {origin}: line {line}: {message}")]
    Syntax { origin: String, line: usize, message: String },
    #[error("template {origin}: placeholder `{{{{{name}}}}}` is neither a slot nor a default")]
    UndeclaredPlaceholder { origin: String, name: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ScriptError + '_ {
    move |source| ScriptError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotSpec {
    pub name: String,
    pub list: bool,
    pub aliases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptTemplate {
    pub template_id: String,
    pub description: String,
    pub required_slots: Vec<SlotSpec>,
    /// Placeholder values used when no fact supplies one.
    pub defaults: BTreeMap<String, String>,
    pub preamble: String,
    pub body: String,
}

fn placeholders(text: &str) -> impl Iterator<Item = (usize, usize, &str)> {
    let mut rest = 0;
    std::iter::from_fn(move || {
        let open = text[rest..].find("{{")? + rest;
        let close = text[open + 2..].find("}}")? + open + 2;
        rest = close + 2;
        Some((open, close + 2, text[open + 2..close].trim()))
    })
}

impl ScriptTemplate {
    pub fn parse(source: &str, origin: &str) -> Result<Self, ScriptError> {
        let syntax = |line: usize, message: String| ScriptError::Syntax {
            origin: origin.to_string(),
            line,
            message,
        };
        let mut id = None;
        let mut description = String::new();
        let mut slots: Vec<SlotSpec> = Vec::new();
        let mut defaults: BTreeMap<String, String> =
            BUILTIN_DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let mut sections: BTreeMap<&str, String> = BTreeMap::new();
        let mut current: Option<&str> = None;

        for (i, line) in source.lines().enumerate() {
            let lineno = i + 1;
            if let Some(name) = line.strip_prefix("--- ") {
                let name = name.trim();
                if name != "preamble" && name != "body" {
                    return Err(syntax(lineno, format!("unknown section `{name}`")));
                }
                current = Some(if name == "preamble" { "preamble" } else { "body" });
                sections.entry(current.unwrap()).or_default();
                continue;
            }
            if let Some(section) = current {
                let buf = sections.get_mut(section).unwrap();
                buf.push_str(line);
                buf.push('\n');
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once(':') else {
                return Err(syntax(lineno, "expected `key: value`".into()));
            };
            let value = value.trim();
            match key.trim() {
                "id" => id = Some(value.to_string()),
                "description" => description = value.to_string(),
                "slot" => {
                    let mut parts = value.split_whitespace();
                    let name = parts.next().ok_or_else(|| syntax(lineno, "slot needs a name".into()))?;
                    let mut spec = SlotSpec {
                        name: name.to_string(),
                        list: false,
                        aliases: Vec::new(),
                    };
                    for p in parts {
                        if p == "list" {
                            spec.list = true;
                        } else if let Some(a) = p.strip_prefix("alias=") {
                            spec.aliases.extend(a.split(',').filter(|s| !s.is_empty()).map(str::to_string));
                        } else {
                            return Err(syntax(lineno, format!("unknown slot option `{p}`")));
                        }
                    }
                    if slots.iter().any(|s| s.name == spec.name) {
                        return Err(syntax(lineno, format!("duplicate slot `{}`", spec.name)));
                    }
                    slots.push(spec);
                }
                "default" => {
                    let (k, v) = value
                        .split_once('=')
                        .ok_or_else(|| syntax(lineno, "expected `default: name = value`".into()))?;
                    defaults.insert(k.trim().to_string(), v.trim().to_string());
                }
                other => return Err(syntax(lineno, format!("unknown key `{other}`"))),
            }
        }
        let template = Self {
            template_id: id.ok_or_else(|| syntax(1, "missing `id`".into()))?,
            description,
            required_slots: slots,
            defaults,
            preamble: sections.remove("preamble").unwrap_or_default(),
            body: sections
                .remove("body")
                .ok_or_else(|| syntax(source.lines().count(), "missing `--- body` section".into()))?,
        };
        for text in [&template.preamble, &template.body] {
            for (_, _, name) in placeholders(text) {
                if template.slot(name).is_none() && !template.defaults.contains_key(name) {
                    return Err(ScriptError::UndeclaredPlaceholder {
                        origin: origin.to_string(),
                        name: name.to_string(),
                    });
                }
            }
        }
        Ok(template)
    }

    pub fn slot(&self, name: &str) -> Option<&SlotSpec> {
        self.required_slots.iter().find(|s| s.name == name)
    }

    pub fn slot_names(&self) -> impl Iterator<Item = &str> {
        self.required_slots.iter().map(|s| s.name.as_str())
    }
}

#[derive(Debug, Clone, Default)]
pub struct TemplateRegistry {
    templates: BTreeMap<String, ScriptTemplate>,
}

impl TemplateRegistry {
    /// The three shipped templates.
    pub fn shipped() -> Self {
        let mut reg = Self::default();
        for (name, src) in SHIPPED {
            reg.register(ScriptTemplate::parse(src, name).expect("shipped template parses"));
        }
        reg
    }

    /// Shipped templates plus every `*.tmpl` in `dir`; files replace
    /// shipped templates with the same id.
    pub fn with_dir(dir: &Path) -> Result<Self, ScriptError> {
        let mut reg = Self::shipped();
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(io_err(dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "tmpl"))
            .collect();
        paths.sort();
        for p in paths {
            let src = std::fs::read_to_string(&p).map_err(io_err(&p))?;
            reg.register(ScriptTemplate::parse(&src, &p.display().to_string())?);
        }
        Ok(reg)
    }

    pub fn register(&mut self, template: ScriptTemplate) {
        self.templates.insert(template.template_id.clone(), template);
    }

    pub fn get(&self, id: &str) -> Result<&ScriptTemplate, ScriptError> {
        self.templates
            .get(id)
            .ok_or_else(|| ScriptError::UnknownTemplate(id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SlotValue {
    Scalar(HyperValue),
    List(Vec<f64>),
}

impl SlotValue {
    /// Literal written into the script.
    pub fn render(&self) -> String {
        match self {
            SlotValue::Scalar(HyperValue::Number(v)) => canonical_number(*v),
            SlotValue::Scalar(HyperValue::Text(s)) => format!("{s:?}"),
            SlotValue::List(vs) => format!(
                "[{}]",
                vs.iter().map(|v| canonical_number(*v)).collect::<Vec<_>>().join(", ")
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binding {
    pub value: SlotValue,
    /// Spans of the facts the value came from.
    pub spans: Vec<Span>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproductionPlan {
    pub paper_id: String,
    pub template_id: String,
    pub bindings: BTreeMap<String, Binding>,
    pub unresolved: Vec<String>,
    pub notes: Vec<String>,
}

impl ReproductionPlan {
    pub fn value(&self, slot: &str) -> Option<&SlotValue> {
        self.bindings.get(slot).map(|b| &b.value)
    }
}

/// Reproduction advice, one line per slot family.
pub fn guideline(slot: &str) -> &'static str {
    match slot {
        "dataset" => "name the corpus the reported numbers come from and fetch the same splits and preprocessing",
        "learning_rate" => "look for the optimiser paragraph or released config; start from the value the authors tuned, not a library default",
        "optimizer" => "the method section or appendix usually names the update rule; keep its betas or momentum too",
        "grad_clip" => "clipping thresholds are often in training details or footnotes; leave clipping off only if none is described",
        "epochs" | "steps" => "match the reported training length; shorter runs make perplexity comparisons unfair",
        "num_layers" | "hidden_size" | "embed_size" | "num_heads" => {
            "take the architecture table of the source paper; widths and depth decide parameter count"
        }
        "dropout" | "dropout_emb" | "weight_decay" => {
            "regularisation strengths are easy to miss; check tables and appendices before guessing"
        }
        "batch_size" | "seq_length" | "mem_length" => {
            "batching shapes affect both memory and results; record what you choose if the paper is silent"
        }
        "vocab_size" => "the tokenizer determines vocabulary size; rebuild it the way the authors describe",
        "param_count" => "use the reported size to sanity-check the instantiated model",
        _ => "not stated in the extracted text; consult the paper or its released code",
    }
}

fn normalise_name(name: &str) -> String {
    name.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase()
}

/// Groups facts into mentions. For list slots, values of one enumeration
/// (consecutive spans at most a few bytes apart) form one mention.
fn mentions<'a>(facts: &[&'a HyperparamFact], list: bool) -> Vec<Vec<&'a HyperparamFact>> {
    let mut sorted: Vec<&HyperparamFact> = facts.to_vec();
    sorted.sort_by_key(|f| f.span);
    let mut out: Vec<Vec<&HyperparamFact>> = Vec::new();
    for f in sorted {
        match out.last_mut() {
            Some(group)
                if list
                    && group.last().is_some_and(|p| {
                        p.span.end <= f.span.start && f.span.start - p.span.end <= LIST_GAP
                    }) =>
            {
                group.push(f)
            }
            _ => out.push(vec![f]),
        }
    }
    out
}

fn mention_value(group: &[&HyperparamFact], list: bool) -> SlotValue {
    if list {
        SlotValue::List(group.iter().filter_map(|f| f.value.as_number()).collect())
    } else {
        SlotValue::Scalar(group[0].value.clone())
    }
}

/// Binds every slot of `template` from `facts`.
///
/// Facts are matched by exact hyperparameter name, then by the slot's
/// aliases compared without case or punctuation. When one slot sees several
/// distinct values, the one whose span starts earliest inside the
/// experimental-setup region wins (earliest overall when no region or no
/// candidate lies inside it) and the conflict goes into `notes`.
pub fn plan_reproduction(paper_id: &str, facts: &FactBundle, template: &ScriptTemplate) -> ReproductionPlan {
    let mut bindings = BTreeMap::new();
    let mut unresolved = Vec::new();
    let mut notes = Vec::new();

    for slot in &template.required_slots {
        if slot.name == DATASET_SLOT {
            match facts.results.iter().filter(|r| r.dataset.is_some()).min_by_key(|r| r.span) {
                Some(r) => {
                    bindings.insert(
                        slot.name.clone(),
                        Binding {
                            value: SlotValue::Scalar(HyperValue::Text(r.dataset.clone().unwrap())),
                            spans: vec![r.span],
                        },
                    );
                }
                None => unresolved.push(slot.name.clone()),
            }
            continue;
        }
        let exact = HyperparamName::from(slot.name.as_str());
        let mut candidates: Vec<&HyperparamFact> = facts.hyperparams_named(&exact).collect();
        if candidates.is_empty() {
            let aliases: Vec<String> = slot.aliases.iter().map(|a| normalise_name(a)).collect();
            candidates = facts
                .hyperparams
                .iter()
                .filter(|f| aliases.contains(&normalise_name(f.name.as_str())))
                .collect();
        }
        let groups = mentions(&candidates, slot.list);
        if groups.is_empty() {
            unresolved.push(slot.name.clone());
            continue;
        }
        let mut distinct: Vec<(SlotValue, &Vec<&HyperparamFact>)> = Vec::new();
        for g in &groups {
            let v = mention_value(g, slot.list);
            if !distinct.iter().any(|(d, _)| d.render() == v.render()) {
                distinct.push((v, g));
            }
        }
        let in_setup = |g: &Vec<&HyperparamFact>| {
            facts
                .setup_region
                .is_some_and(|r| g.iter().all(|f| r.contains(&f.span)))
        };
        let chosen = groups
            .iter()
            .filter(|g| in_setup(g))
            .min_by_key(|g| g[0].span)
            .unwrap_or(&groups[0]);
        let value = mention_value(chosen, slot.list);
        if distinct.len() > 1 {
            let all: Vec<String> = distinct.iter().map(|(v, _)| v.render()).collect();
            let rule = if in_setup(chosen) {
                "earliest in the experimental setup"
            } else {
                "earliest in the text"
            };
            notes.push(format!(
                "conflict on {}: found {}; kept {} ({rule}, byte {})",
                slot.name,
                all.join(", "),
                value.render(),
                chosen[0].span.start
            ));
        }
        bindings.insert(
            slot.name.clone(),
            Binding {
                value,
                spans: chosen.iter().map(|f| f.span).collect(),
            },
        );
    }
    for slot in &unresolved {
        notes.push(format!("TODO {slot}: {}", guideline(slot)));
    }
    ReproductionPlan {
        paper_id: paper_id.to_string(),
        template_id: template.template_id.clone(),
        bindings,
        unresolved,
        notes,
    }
}

fn fill(text: &str, plan: &ReproductionPlan, template: &ScriptTemplate) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    for (start, end, name) in placeholders(text) {
        out.push_str(&text[last..start]);
        let value = match plan.bindings.get(name) {
            Some(b) => b.value.render(),
            None if template.slot(name).is_some() => "None".to_string(),
            None => template.defaults.get(name).cloned().unwrap_or_else(|| "None".into()),
        };
        out.push_str(&value);
        last = end;
    }
    out.push_str(&text[last..]);
    out
}

/// Script text for `plan`: provenance header, TODO lines for unresolved
/// slots, the seeded preamble, then the training body. Unresolved slots
/// render as `None`.
pub fn render_script(plan: &ReproductionPlan, registry: &TemplateRegistry) -> Result<String, ScriptError> {
    let template = registry.get(&plan.template_id)?;
    let mut out = String::new();
    let _ = writeln!(out, "# Reproduction script for {} (template {}).", plan.paper_id, template.template_id);
    let _ = writeln!(out, "# Generated from extracted settings; review before running.");
    for (slot, b) in &plan.bindings {
        let spans: Vec<String> = b.spans.iter().map(|s| format!("{}..{}", s.start, s.end)).collect();
        let _ = writeln!(out, "#   {slot} <- bytes {}", spans.join(", "));
    }
    for note in plan.notes.iter().filter(|n| !n.starts_with("TODO ")) {
        let _ = writeln!(out, "# note: {note}");
    }
    for slot in &plan.unresolved {
        let _ = writeln!(out, "# TODO {slot}: {}", guideline(slot));
    }
    out.push('\n');
    out.push_str(&fill(&template.preamble, plan, template));
    out.push('\n');
    out.push_str(&fill(&template.body, plan, template));
    Ok(out)
}

/// Picks a template from what the paper reports: event-level datasets or
/// vocabularies of musical events go to `event-seq`, attention models to
/// `transformer-lm`, everything else to `rnn-lm`.
pub fn choose_template(facts: &FactBundle) -> &'static str {
    let datasets = facts.results.iter().filter_map(|r| r.dataset.as_deref());
    let lower: Vec<String> = datasets.map(str::to_lowercase).collect();
    if lower.iter().any(|d| d.contains("midi") || d.contains("maestro") || d.contains("music")) {
        return "event-seq";
    }
    let arch: Vec<String> = facts
        .hyperparams_named(&HyperparamName::Architecture)
        .map(|f| f.value.key().to_lowercase())
        .collect();
    let heads = facts.hyperparams.iter().any(|f| f.name.as_str() == "num_heads");
    if heads || arch.iter().any(|a| a.contains("transformer")) {
        return "transformer-lm";
    }
    "rnn-lm"
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestLine {
    pub paper_id: String,
    pub template_id: String,
    pub script: PathBuf,
    pub unresolved: Vec<String>,
    pub notes: Vec<String>,
}

/// Writes `<dir>/<paper>/<template>/train.py` for every plan and a manifest
/// listing the plans that still have unresolved slots. Returns script paths
/// in plan order.
pub fn write_artifacts(plans: &[ReproductionPlan], registry: &TemplateRegistry, dir: &Path) -> Result<Vec<PathBuf>, ScriptError> {
    let mut paths = Vec::new();
    let mut manifest = String::new();
    for plan in plans {
        let text = render_script(plan, registry)?;
        let sub = dir.join(safe_file_stem(&plan.paper_id)).join(&plan.template_id);
        std::fs::create_dir_all(&sub).map_err(io_err(&sub))?;
        let path = sub.join(SCRIPT_FILE);
        std::fs::write(&path, text).map_err(io_err(&path))?;
        if !plan.unresolved.is_empty() {
            let line = ManifestLine {
                paper_id: plan.paper_id.clone(),
                template_id: plan.template_id.clone(),
                script: path.clone(),
                unresolved: plan.unresolved.clone(),
                notes: plan.notes.clone(),
            };
            manifest.push_str(&serde_json::to_string(&line).expect("manifest serializes"));
            manifest.push('\n');
        }
        paths.push(path);
    }
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mpath = dir.join(MANIFEST_FILE);
    std::fs::write(&mpath, manifest).map_err(io_err(&mpath))?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::Extractor;

    fn fact(name: &str, v: f64, start: usize) -> HyperparamFact {
        HyperparamFact {
            name: HyperparamName::from(name),
            value: HyperValue::Number(v),
            unit: None,
            span: Span::new(start, start + 3),
            surface: v.to_string(),
        }
    }

    #[test]
    fn shipped_templates_parse() {
        let reg = TemplateRegistry::shipped();
        assert_eq!(reg.ids().collect::<Vec<_>>(), vec!["event-seq", "rnn-lm", "transformer-lm"]);
        let t = reg.get("rnn-lm").unwrap();
        assert_eq!(t.defaults["patience"], "5");
        assert!(t.slot("hidden_size").unwrap().list);
    }

    #[test]
    fn undeclared_placeholder_rejected() {
        let err = ScriptTemplate::parse("id: x\n--- body\nA = {{mystery}}\n", "x").unwrap_err();
        assert!(matches!(err, ScriptError::UndeclaredPlaceholder { .. }));
    }

    #[test]
    fn empty_bundle_all_unresolved() {
        let reg = TemplateRegistry::shipped();
        let t = reg.get("rnn-lm").unwrap();
        let plan = plan_reproduction("local:x", &FactBundle::default(), t);
        assert!(plan.bindings.is_empty());
        assert_eq!(plan.unresolved.len(), t.required_slots.len());
        let script = render_script(&plan, &reg).unwrap();
        assert!(!script.contains("{{"));
        assert!(script.contains("# TODO learning_rate:"));
        assert!(script.contains("SEED = 42"));
        assert!(script.contains("LEARNING_RATE = None"));
    }

    #[test]
    fn list_slot_groups_enumeration() {
        let text = "We use three LSTM layers with hidden sizes 1150, 1150, and 400 and a learning rate of 30.";
        let facts = Extractor::default().extract(text, None);
        let reg = TemplateRegistry::shipped();
        let plan = plan_reproduction("p", &facts, reg.get("rnn-lm").unwrap());
        assert_eq!(plan.value("hidden_size"), Some(&SlotValue::List(vec![1150.0, 1150.0, 400.0])));
        assert_eq!(plan.value("num_layers").unwrap().render(), "3");
        assert_eq!(plan.value("learning_rate").unwrap().render(), "30");
    }

    #[test]
    fn conflict_prefers_setup_region() {
        let mut facts = FactBundle::default();
        facts.hyperparams = vec![fact("learning_rate", 0.1, 10), fact("learning_rate", 0.5, 200), fact("learning_rate", 0.3, 300)];
        facts.setup_region = Some(Span::new(150, 400));
        let reg = TemplateRegistry::shipped();
        let plan = plan_reproduction("p", &facts, reg.get("rnn-lm").unwrap());
        assert_eq!(plan.value("learning_rate").unwrap().render(), "0.5");
        assert!(plan.notes.iter().any(|n| n.starts_with("conflict on learning_rate")));

        facts.setup_region = None;
        let plan = plan_reproduction("p", &facts, reg.get("rnn-lm").unwrap());
        assert_eq!(plan.value("learning_rate").unwrap().render(), "0.1");
    }

    #[test]
    fn alias_match() {
        let mut facts = FactBundle::default();
        facts.hyperparams = vec![fact("n_head", 16.0, 0)];
        let reg = TemplateRegistry::shipped();
        let plan = plan_reproduction("p", &facts, reg.get("transformer-lm").unwrap());
        assert_eq!(plan.value("num_heads").unwrap().render(), "16");
    }

    #[test]
    fn unknown_template_errors() {
        let plan = ReproductionPlan {
            paper_id: "p".into(),
            template_id: "nope".into(),
            bindings: BTreeMap::new(),
            unresolved: vec![],
            notes: vec![],
        };
        assert!(matches!(render_script(&plan, &TemplateRegistry::shipped()), Err(ScriptError::UnknownTemplate(_))));
    }

    #[test]
    fn artifacts_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let reg = TemplateRegistry::shipped();
        let plan = plan_reproduction("doi:10.1/x", &FactBundle::default(), reg.get("event-seq").unwrap());
        let paths = write_artifacts(&[plan], &reg, dir.path()).unwrap();
        assert!(paths[0].ends_with("event-seq/train.py"));
        assert!(paths[0].exists());
        let manifest = std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(manifest.lines().count(), 1);
    }
}
