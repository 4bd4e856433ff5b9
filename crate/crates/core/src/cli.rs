//! Command-line front end. `main` stays a one-liner around [`main_with_args`].

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::config::{Component, ConfigError, DEFAULT_SEED, RunConfig};
use crate::error::Error;
use crate::eval::{Averaging, ablation_table, evaluate_corpus, load_gold, run_ablation, run_scaling, scaling_table};
use crate::fixtures::GOLD_FILE;
use crate::kb::{Comparator, KnowledgeBase, Query};
use crate::pipeline::run_pipeline;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

const DEFAULT_TOPIC: &str = "autoregressive language models";

#[derive(Debug, Parser)]
#[command(name = "litsynth", version, about = "Mine a topic's literature into a knowledge base, topic report and training scripts")]
pub struct Cli {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Free-text topic query (required for a pipeline run).
    #[arg(long, global = true)]
    pub topic: Option<String>,
    /// Publication years, inclusive, as MIN:MAX.
    #[arg(long, global = true, value_name = "MIN:MAX", value_parser = parse_years)]
    pub years: Option<(i32, i32)>,
    /// Parse workers.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// Seed for every random choice (classifier shuffling, k-means, fixtures).
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Switch off a component: parallel_parsing, relevance_classifier,
    /// rule_patterns or llm_summarisation. Repeatable.
    #[arg(long = "disable", global = true, value_name = "STAGE")]
    pub disable: Vec<Component>,
    /// Knowledge-base file, JSON lines [default: kb.jsonl].
    #[arg(long, global = true, value_name = "PATH")]
    pub kb: Option<PathBuf>,
    /// Topic report, Markdown [default: report.md].
    #[arg(long, global = true, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// Document cache; a populated cache makes the run offline [default: corpus].
    #[arg(long, global = true, value_name = "PATH")]
    pub corpus_cache: Option<PathBuf>,
    /// Generation endpoint for abstractive summaries; extractive when absent.
    #[arg(long, global = true, value_name = "URL")]
    pub summariser_endpoint: Option<String>,
    /// Directory for generated training scripts.
    #[arg(long, global = true, value_name = "PATH")]
    pub artifacts: Option<PathBuf>,
    /// Keyword file, one phrase per line.
    #[arg(long, global = true, value_name = "PATH")]
    pub keywords: Option<PathBuf>,
    /// Hyperparameter rule file.
    #[arg(long, global = true, value_name = "PATH")]
    pub rules: Option<PathBuf>,
    /// Directory of script templates.
    #[arg(long, global = true, value_name = "PATH")]
    pub templates: Option<PathBuf>,
    /// Persisted relevance classifier.
    #[arg(long, global = true, value_name = "PATH")]
    pub relevance_model: Option<PathBuf>,
    /// Replace knowledge-base entries that conflict with this run.
    #[arg(long, global = true)]
    pub overwrite: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score a knowledge base against gold annotations.
    Eval {
        #[arg(long, value_name = "PATH")]
        gold: PathBuf,
        /// Average per paper instead of pooling counts.
        #[arg(long = "macro")]
        macro_avg: bool,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Run the five ablation configurations over the corpus cache.
    Ablate {
        /// Gold file; defaults to gold.jsonl in the corpus cache.
        #[arg(long, value_name = "PATH")]
        gold: Option<PathBuf>,
        #[arg(long, value_name = "DIR", default_value = "ablation")]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Time and memory over synthetic corpora of several sizes.
    Scale {
        #[arg(long, value_delimiter = ',', default_values_t = vec![50, 100, 200, 400])]
        sizes: Vec<usize>,
        #[arg(long, value_name = "DIR", default_value = "scaling")]
        out: PathBuf,
        /// Memory sampling interval in milliseconds.
        #[arg(long, default_value_t = 100)]
        interval_ms: u64,
        #[arg(long)]
        json: bool,
    },
    /// Knowledge-base tools.
    Kb {
        #[command(subcommand)]
        action: KbCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum KbCommand {
    /// Run one structured query; exactly one query kind must be given.
    Query(QueryArgs),
}

#[derive(Debug, Args)]
#[group(skip)]
#[command(group(clap::ArgGroup::new("kind").required(true).multiple(false)))]
pub struct QueryArgs {
    /// Every fact with this hyperparameter name.
    #[arg(long, value_name = "NAME", group = "kind")]
    pub fact: Option<String>,
    /// Papers whose result for METRIC satisfies --cmp/--threshold.
    #[arg(long, value_name = "METRIC", requires = "threshold", group = "kind")]
    pub metric: Option<String>,
    #[arg(long = "cmp", default_value = "<=", value_name = "OP")]
    pub comparator: String,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, requires = "metric")]
    pub dataset: Option<String>,
    /// Value counts for one hyperparameter.
    #[arg(long, value_name = "NAME", group = "kind")]
    pub histogram: Option<String>,
    /// Entries whose id or title contains TEXT.
    #[arg(long, value_name = "TEXT", group = "kind")]
    pub lookup: Option<String>,
    #[arg(long)]
    pub json: bool,
}

fn parse_years(s: &str) -> Result<(i32, i32), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected MIN:MAX, got {s:?}"))?;
    let year = |t: &str| t.trim().parse::<i32>().map_err(|_| format!("not a year: {t:?}"));
    Ok((year(a)?, year(b)?))
}

/// Usage problems: bad flags or a configuration that fails validation.
#[derive(Debug, thiserror::Error)]
pub enum UsageError {
    #[error("{0}")]
    Clap(#[from] clap::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

impl RunArgs {
    /// Maps flags onto a [`RunConfig`], falling back to `default_topic`
    /// when `--topic` is absent (subcommands), or failing when it is `None`.
    pub fn to_config(&self, default_topic: Option<&str>) -> Result<RunConfig, UsageError> {
        let topic = match (&self.topic, default_topic) {
            (Some(t), _) => t.clone(),
            (None, Some(d)) => d.to_string(),
            (None, None) => {
                return Err(UsageError::Clap(clap::Error::raw(
                    ErrorKind::MissingRequiredArgument,
                    "the following required argument was not provided: --topic <TOPIC>\n",
                )));
            }
        };
        let mut c = RunConfig::new(topic);
        if let Some((lo, hi)) = self.years {
            c.year_min = lo;
            c.year_max = hi;
        }
        c.worker_count = self.workers;
        c.random_seed = self.seed;
        for comp in &self.disable {
            c.stage_toggles.set(*comp, false);
        }
        let set = |dst: &mut PathBuf, src: &Option<PathBuf>| {
            if let Some(p) = src {
                *dst = p.clone();
            }
        };
        set(&mut c.kb_path, &self.kb);
        set(&mut c.report_path, &self.report);
        set(&mut c.corpus_cache, &self.corpus_cache);
        set(&mut c.artifacts_dir, &self.artifacts);
        c.summariser_endpoint = self.summariser_endpoint.clone();
        c.keywords_path = self.keywords.clone();
        c.rules_path = self.rules.clone();
        c.templates_dir = self.templates.clone();
        c.relevance_model = self.relevance_model.clone();
        c.overwrite = self.overwrite;
        c.validate()?;
        Ok(c)
    }
}

/// Parses a pipeline-run command line (without the program name).
pub fn parse_cli_args<I, T>(argv: I) -> Result<RunConfig, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = std::iter::once(OsString::from("litsynth")).chain(argv.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(argv)?;
    cli.run.to_config(None)
}

/// Exit code for a library error: configuration problems are usage
/// errors, everything else is a failed (partial) run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_USAGE,
        Error::PartialRun { cause, .. } if matches!(**cause, Error::Config(_)) => EXIT_USAGE,
        _ => EXIT_PARTIAL,
    }
}

/// Full entry point, including the program name in `argv`. Returns the
/// process exit code.
pub fn main_with_args<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
        Err(Failure::Run(e)) => {
            let _ = write!(err, "error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                let _ = write!(err, ": {s}");
                source = s.source();
            }
            let _ = writeln!(err);
            exit_code(&e)
        }
    }
}

enum Failure {
    Usage(UsageError),
    Run(Error),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e)
    }
}

impl<E: Into<Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Run(e.into())
    }
}

fn json_line(out: &mut dyn Write, value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    writeln!(out, "{text}").map_err(|e| Failure::Run(Error::io("<stdout>", e)))
}

fn print(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    write!(out, "{text}").map_err(|e| Failure::Run(Error::io("<stdout>", e)))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    std::fs::write(path, text + "\n").map_err(|e| Failure::Run(Error::io(path, e)))
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match &cli.command {
        None => {
            let config = cli.run.to_config(None)?;
            let result = run_pipeline(&config)?;
            for w in &result.warnings {
                log::warn!("{w}");
            }
            let mut text = format!(
                "{} papers in {}; {} topics in {}; {} scripts under {}\n",
                result.kb.len(),
                result.kb_path.display(),
                result.report.len(),
                config.report_path.display(),
                result.script_artifacts.len(),
                config.artifacts_dir.display()
            );
            for (stage, secs) in &result.timings {
                text.push_str(&format!("  {stage:<14} {secs:>9.3}s\n"));
            }
            print(out, &text)
        }
        Some(Command::Eval { gold, macro_avg, json }) => {
            let kb_path = cli.run.kb.clone().unwrap_or_else(|| RunConfig::new(DEFAULT_TOPIC).kb_path);
            let kb = KnowledgeBase::load(&kb_path)?;
            let gold = load_gold(gold)?;
            let averaging = if *macro_avg { Averaging::Macro } else { Averaging::Micro };
            let report = evaluate_corpus(&gold, &kb, averaging)?;
            if *json { json_line(out, &report) } else { print(out, &format!("{report}\n")) }
        }
        Some(Command::Ablate { gold, out: dir, json }) => {
            let config = cli.run.to_config(Some(DEFAULT_TOPIC))?;
            let gold_path = gold.clone().unwrap_or_else(|| config.corpus_cache.join(GOLD_FILE));
            let gold = load_gold(&gold_path)?;
            std::fs::create_dir_all(dir).map_err(|e| Failure::Run(Error::io(dir, e)))?;
            let rows = run_ablation(&config, &gold, dir)?;
            write_json(&dir.join("ablation.json"), &rows)?;
            if *json { json_line(out, &rows) } else { print(out, &ablation_table(&rows)) }
        }
        Some(Command::Scale { sizes, out: dir, interval_ms, json }) => {
            let config = cli.run.to_config(Some(DEFAULT_TOPIC))?;
            std::fs::create_dir_all(dir).map_err(|e| Failure::Run(Error::io(dir, e)))?;
            let report = run_scaling(sizes, config.worker_count, config.random_seed, dir, Duration::from_millis(*interval_ms))?;
            write_json(&dir.join("scaling.json"), &report)?;
            if *json { json_line(out, &report) } else { print(out, &scaling_table(&report)) }
        }
        Some(Command::Kb { action: KbCommand::Query(q) }) => {
            let kb_path = cli.run.kb.clone().unwrap_or_else(|| RunConfig::new(DEFAULT_TOPIC).kb_path);
            let kb = KnowledgeBase::load(&kb_path)?;
            let query = build_query(q)?;
            let rows = kb.query(&query)?;
            if q.json {
                return json_line(out, &rows);
            }
            let mut text = String::new();
            for r in &rows {
                text.push_str(&format!("{r}\n"));
            }
            print(out, &text)
        }
    }
}

fn build_query(q: &QueryArgs) -> Result<Query, Failure> {
    if let Some(name) = &q.fact {
        return Ok(Query::FactsByName { name: name.clone() });
    }
    if let Some(metric) = &q.metric {
        let comparator: Comparator = q.comparator.parse()?;
        return Ok(Query::PapersByMetricThreshold {
            metric: metric.clone(),
            comparator,
            threshold: q.threshold.expect("clap requires --threshold"),
            dataset: q.dataset.clone(),
        });
    }
    if let Some(name) = &q.histogram {
        return Ok(Query::ValueHistogram { name: name.clone() });
    }
    let text = q.lookup.clone().expect("clap requires one query kind");
    Ok(Query::FreeLookup { text })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maps_flags_with_default_seed() {
        let c = parse_cli_args(["--topic", "autoregressive models", "--years", "2016:2024", "--workers", "8"]).unwrap();
        assert_eq!(c.topic_query, "autoregressive models");
        assert_eq!((c.year_min, c.year_max), (2016, 2024));
        assert_eq!(c.worker_count, 8);
        assert_eq!(c.random_seed, 42);
    }

    #[test]
    fn reversed_years_are_a_usage_error() {
        let e = parse_cli_args(["--topic", "x", "--years", "2024:2016"]).unwrap_err();
        assert!(matches!(e, UsageError::Config(ConfigError::YearRange { .. })));
    }

    #[test]
    fn missing_topic_and_unknown_flag() {
        assert!(parse_cli_args(Vec::<String>::new()).is_err());
        assert!(parse_cli_args(["--topic", "x", "--frobnicate"]).is_err());
        assert!(parse_cli_args(["--topic", "x", "--years", "2016-2024"]).is_err());
    }

    #[test]
    fn disable_is_repeatable() {
        let c = parse_cli_args(["--topic", "x", "--disable", "rule_patterns", "--disable", "parallel_parsing"]).unwrap();
        assert!(!c.stage_toggles.enabled(Component::RulePatterns));
        assert!(!c.stage_toggles.enabled(Component::ParallelParsing));
        assert!(c.stage_toggles.enabled(Component::RelevanceClassifier));
        assert!(parse_cli_args(["--topic", "x", "--disable", "ocr"]).is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(main_with_args(["litsynth"], &mut o, &mut e), EXIT_USAGE);
        assert_eq!(main_with_args(["litsynth", "--topic", "x", "--years", "9:1"], &mut o, &mut e), EXIT_USAGE);
        assert_eq!(main_with_args(["litsynth", "--help"], &mut o, &mut e), EXIT_OK);
    }
}
