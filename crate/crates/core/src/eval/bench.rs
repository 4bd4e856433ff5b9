use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::config::{Component, RunConfig, StageToggles};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::ingest::OfflineTransport;
use crate::pipeline::{RunOutput, StageName, run_pipeline_with};

use super::memory::MemorySampler;
use super::{Averaging, EvalError, EvalReport, GoldAnnotation, evaluate_corpus};

/// Least-squares line `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 for a perfect fit, including the
    /// degenerate case of constant `y` matched exactly.
    pub r2: f64,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Reference time model for comparison: minutes per paper plus a fixed cost.
/// Hardware-specific, so never asserted against.
pub const REFERENCE_TIME_MODEL: LinearFit = LinearFit {
    slope: 0.04,
    intercept: 1.0,
    r2: 1.0,
};

/// Reference memory model in gigabytes, same caveat.
pub const REFERENCE_MEMORY_MODEL: LinearFit = LinearFit {
    slope: 0.01,
    intercept: 1.0,
    r2: 1.0,
};

/// Ordinary least squares over `(x, y)` pairs. Needs two distinct `x`.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<LinearFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = points.iter().map(|p| (p.1 - (slope * p.0 + intercept)).powi(2)).sum();
    let r2 = if ss_tot == 0.0 {
        if ss_res == 0.0 { 1.0 } else { 0.0 }
    } else {
        1.0 - ss_res / ss_tot
    };
    Some(LinearFit { slope, intercept, r2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationConfig {
    Full,
    NoParallelParsing,
    NoRelevanceClassifier,
    NoRulePatterns,
    NoLlmSummarisation,
}

impl AblationConfig {
    pub const ALL: [AblationConfig; 5] = [
        AblationConfig::Full,
        AblationConfig::NoParallelParsing,
        AblationConfig::NoRelevanceClassifier,
        AblationConfig::NoRulePatterns,
        AblationConfig::NoLlmSummarisation,
    ];

    pub fn disabled(self) -> Option<Component> {
        match self {
            AblationConfig::Full => None,
            AblationConfig::NoParallelParsing => Some(Component::ParallelParsing),
            AblationConfig::NoRelevanceClassifier => Some(Component::RelevanceClassifier),
            AblationConfig::NoRulePatterns => Some(Component::RulePatterns),
            AblationConfig::NoLlmSummarisation => Some(Component::LlmSummarisation),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AblationConfig::Full => "full",
            AblationConfig::NoParallelParsing => "no_parallel_parsing",
            AblationConfig::NoRelevanceClassifier => "no_relevance_classifier",
            AblationConfig::NoRulePatterns => "no_rule_patterns",
            AblationConfig::NoLlmSummarisation => "no_llm_summarisation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub configuration: AblationConfig,
    /// All four tasks pooled (micro-averaged).
    pub f1: f64,
    pub report: EvalReport,
    pub seconds: f64,
    /// Time spent in the parse-and-extract stage alone.
    pub parse_seconds: f64,
}

fn stage_seconds(out: &RunOutput, stage: StageName) -> f64 {
    out.timings
        .iter()
        .filter(|(s, _)| *s == stage)
        .map(|(_, t)| *t)
        .sum()
}

/// Runs the five configurations over `base.corpus_cache`, each writing
/// into its own subdirectory of `out_dir`, and scores each against `gold`.
pub fn run_ablation(base: &RunConfig, gold: &[GoldAnnotation], out_dir: &Path) -> Result<Vec<AblationRow>> {
    let mut rows = Vec::new();
    for cfg in AblationConfig::ALL {
        let mut config = base.clone();
        config.stage_toggles = match cfg.disabled() {
            Some(c) => StageToggles::without(c),
            None => StageToggles::all_on(),
        };
        let dir = out_dir.join(cfg.label());
        config.kb_path = dir.join("kb.jsonl");
        config.report_path = dir.join("report.md");
        config.artifacts_dir = dir.join("artifacts");
        let started = Instant::now();
        let out = run_pipeline_with(&config, &OfflineTransport)?;
        let seconds = started.elapsed().as_secs_f64();
        let report = evaluate_corpus(gold, &out.kb, Averaging::Micro)?;
        rows.push(AblationRow {
            configuration: cfg,
            f1: report.overall().f1,
            parse_seconds: stage_seconds(&out, StageName::ParseExtract),
            report,
            seconds,
        });
    }
    Ok(rows)
}

pub fn ablation_table(rows: &[AblationRow]) -> String {
    let mut out = format!("{:<26} {:>6} {:>10} {:>10}\n", "configuration", "f1", "time_s", "parse_s");
    for r in rows {
        let _ = writeln!(
            out,
            "{:<26} {:>6.3} {:>10.3} {:>10.3}",
            r.configuration.label(),
            r.f1,
            r.seconds,
            r.parse_seconds
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingMeasurement {
    pub n: usize,
    pub time_minutes: f64,
    pub peak_memory_gb: f64,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub measurements: Vec<ScalingMeasurement>,
    pub time_fit: Option<LinearFit>,
    pub memory_fit: Option<LinearFit>,
}

/// Times full pipeline runs over synthetic corpora of each size (smallest
/// first) with `workers` parse workers, sampling resident memory every
/// `interval`. Corpus generation is not timed. For meaningful numbers the
/// benchmark should be the only load on the machine.
pub fn run_scaling(sizes: &[usize], workers: usize, seed: u64, work_dir: &Path, interval: Duration) -> Result<ScalingReport> {
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let mut measurements = Vec::new();
    for n in sizes {
        let dir = work_dir.join(format!("n{n}"));
        let corpus = dir.join("corpus");
        fixtures::scaling_corpus(&corpus, n, seed)?;
        let mut config = RunConfig::new("autoregressive language models");
        config.random_seed = seed;
        config.worker_count = workers;
        config.corpus_cache = corpus;
        config.kb_path = dir.join("kb.jsonl");
        config.report_path = dir.join("report.md");
        config.artifacts_dir = dir.join("artifacts");

        let sampler = MemorySampler::start(interval);
        let started = Instant::now();
        let out = run_pipeline_with(&config, &OfflineTransport)?;
        let elapsed = started.elapsed();
        let peak = sampler.stop();
        if out.kb.len() != n {
            return Err(Error::Eval(EvalError::Run(format!(
                "expected {n} processed records, knowledge base holds {}",
                out.kb.len()
            ))));
        }
        measurements.push(ScalingMeasurement {
            n,
            time_minutes: elapsed.as_secs_f64() / 60.0,
            peak_memory_gb: peak as f64 / 1e9,
            workers,
        });
    }
    let fit = |f: fn(&ScalingMeasurement) -> f64| {
        linear_fit(&measurements.iter().map(|m| (m.n as f64, f(m))).collect::<Vec<_>>())
    };
    Ok(ScalingReport {
        time_fit: fit(|m| m.time_minutes),
        memory_fit: fit(|m| m.peak_memory_gb),
        measurements,
    })
}

pub fn scaling_table(report: &ScalingReport) -> String {
    let mut out = format!("{:>6} {:>8} {:>14} {:>14}\n", "n", "workers", "time_min", "peak_mem_gb");
    for m in &report.measurements {
        let _ = writeln!(out, "{:>6} {:>8} {:>14.6} {:>14.6}", m.n, m.workers, m.time_minutes, m.peak_memory_gb);
    }
    for (name, fit) in [("time", report.time_fit), ("memory", report.memory_fit)] {
        if let Some(f) = fit {
            let _ = writeln!(out, "{name}: slope {:.3e}/paper, intercept {:.3e}, R^2 {:.4}", f.slope, f.intercept, f.r2);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_recovered() {
        let pts: Vec<(f64, f64)> = [50.0, 100.0, 200.0, 400.0].iter().map(|&x| (x, 0.04 * x + 1.0)).collect();
        let f = linear_fit(&pts).unwrap();
        assert!((f.slope - 0.04).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-9);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reported_models_at_thousand_papers() {
        assert!((REFERENCE_TIME_MODEL.predict(1000.0) - 41.0).abs() < 1e-9);
        assert!((REFERENCE_MEMORY_MODEL.predict(1000.0) - 11.0).abs() < 1e-9);
        assert!((REFERENCE_TIME_MODEL.predict(100.0) - 5.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(linear_fit(&[(1.0, 2.0)]).is_none());
        assert!(linear_fit(&[(1.0, 2.0), (1.0, 3.0)]).is_none());
        assert_eq!(linear_fit(&[(1.0, 2.0), (2.0, 2.0)]).unwrap().r2, 1.0);
    }
}
