//! The nine acceptance criteria, each printed as one PASS/FAIL line.
//! Runs without the libtest harness so the lines always reach stdout.
//! The parallel speedup part of criterion 4 needs 8 CPUs; on smaller hosts
//! it reports FAIL with the measured ratio but does not fail the run.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::{Duration, Instant};

use litsynth::eval::{Averaging, Task, compute_prf, evaluate_corpus, f1_score, load_gold, run_ablation, run_scaling, AblationConfig};
use litsynth::extract::{Extractor, FactBundle, HyperValue, HyperparamFact};
use litsynth::fixtures::{self, CorpusInfo};
use litsynth::ingest::OfflineTransport;
use litsynth::scriptgen::{TemplateRegistry, plan_reproduction, render_script};
use litsynth::topics::{
    ClusterDoc, SparseVec, SummaryBackend, SummaryMode, SummaryOptions, Vectorizer, build_tfidf, cluster_topics, kmeans, summarise,
};
use litsynth::{RunConfig, StageName, run_pipeline_with};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOPIC: &str = "autoregressive language models";
const SPEEDUP_WORKERS: usize = 8;

struct Outcome {
    pass: bool,
    /// Failure that should not fail the run (hardware-limited).
    soft: bool,
    detail: String,
}

impl Outcome {
    fn pass(detail: impl Into<String>) -> Self {
        Self { pass: true, soft: false, detail: detail.into() }
    }
    fn fail(detail: impl Into<String>) -> Self {
        Self { pass: false, soft: false, detail: detail.into() }
    }
    fn check(ok: bool, detail: impl Into<String>) -> Self {
        Self { pass: ok, soft: false, detail: detail.into() }
    }
}

fn config(corpus: &Path, out: &Path) -> RunConfig {
    let mut c = RunConfig::new(TOPIC);
    c.corpus_cache = corpus.to_path_buf();
    c.kb_path = out.join("kb.jsonl");
    c.report_path = out.join("report.md");
    c.artifacts_dir = out.join("artifacts");
    c
}

// 1 -------------------------------------------------------------------------

fn brute_force(e: &[u32], g: &[u32]) -> (usize, f64, f64, f64) {
    let tp = e.iter().filter(|x| g.iter().any(|y| y == *x)).count();
    let p = if e.is_empty() { 0.0 } else { tp as f64 / e.len() as f64 };
    let r = if g.is_empty() { 0.0 } else { tp as f64 / g.len() as f64 };
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (tp, p, r, f)
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..1000 {
        let mut draw = || -> Vec<u32> {
            let n = rng.gen_range(0..=50);
            let mut v: Vec<u32> = (0..n).map(|_| rng.gen_range(0..80)).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let (e, g) = (draw(), draw());
        let got = compute_prf(&e.iter().copied().collect::<BTreeSet<_>>(), &g.iter().copied().collect::<BTreeSet<_>>());
        let (tp, p, r, f) = brute_force(&e, &g);
        if got.tp != tp || got.precision != p || got.recall != r || got.f1 != f {
            return Outcome::fail(format!("trial {trial}: library {got:?} vs oracle ({tp}, {p}, {r}, {f})"));
        }
    }
    let f1 = f1_score(0.92, 0.88);
    let rounded = (f1 * 100.0).round() / 100.0;
    Outcome::check(
        (f1 - 0.8996).abs() < 5e-4 && rounded == 0.90,
        format!("1000 random pairs match the oracle; F1(0.92, 0.88) = {f1:.4}"),
    )
}

// 2 -------------------------------------------------------------------------

fn run_and_score(corpus: &CorpusInfo, out: &Path) -> litsynth::Result<litsynth::eval::EvalReport> {
    let cfg = config(&corpus.dir, out);
    let run = run_pipeline_with(&cfg, &OfflineTransport)?;
    let gold = load_gold(&corpus.gold_path())?;
    Ok(evaluate_corpus(&gold, &run.kb, Averaging::Micro)?)
}

fn criterion_2(work: &Path) -> litsynth::Result<Outcome> {
    let clean = fixtures::noise_free_corpus(&work.join("clean/corpus"), 42)?;
    let clean_report = run_and_score(&clean, &work.join("clean/run"))?;
    let clean_f1 = clean_report.overall().f1;

    let real = fixtures::realistic_corpus(&work.join("real/corpus"), 42)?;
    let real_report = run_and_score(&real, &work.join("real/run"))?;
    let f = |t: Task| real_report.task(t).map(|p| p.f1).unwrap_or(0.0);
    let (h, c, r) = (f(Task::Hyperparams), f(Task::Citations), f(Task::Results));
    Ok(Outcome::check(
        clean_f1 == 1.0 && h >= 0.80 && c >= 0.80 && r >= 0.75,
        format!("noise-free F1 {clean_f1:.3}; realistic hyperparams {h:.3}, citations {c:.3}, results {r:.3}"),
    ))
}

// 3 -------------------------------------------------------------------------

fn values(facts: &FactBundle, name: &str) -> Vec<f64> {
    let mut v: Vec<f64> = facts
        .hyperparams
        .iter()
        .filter(|f| f.name.as_str() == name)
        .filter_map(|f| match f.value {
            HyperValue::Number(x) => Some(x),
            HyperValue::Text(_) => None,
        })
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

fn case_expectations() -> Vec<(&'static str, Vec<(&'static str, Vec<f64>)>)> {
    vec![
        (
            "local:case-awd-lstm",
            vec![
                ("num_layers", vec![3.0]),
                ("hidden_size", vec![400.0, 1150.0, 1150.0]),
                ("learning_rate", vec![30.0]),
                ("grad_clip", vec![0.25]),
                ("epochs", vec![500.0]),
            ],
        ),
        (
            "local:case-transformer-xl",
            vec![
                ("num_layers", vec![18.0]),
                ("hidden_size", vec![1024.0]),
                ("num_heads", vec![16.0]),
                ("learning_rate", vec![2e-4]),
                ("steps", vec![200_000.0]),
            ],
        ),
        (
            "local:case-music",
            vec![("vocab_size", vec![512.0]), ("param_count", vec![360e6]), ("steps", vec![800_000.0])],
        ),
    ]
}

fn criterion_3(work: &Path) -> litsynth::Result<Outcome> {
    let corpus = fixtures::case_study_corpus(&work.join("case"))?;
    let extractor = Extractor::default();
    let mut problems = Vec::new();
    for (id, expected) in case_expectations() {
        let facts = extractor.extract(&corpus.texts[id], None);
        for (name, want) in expected {
            let got = values(&facts, name);
            let same = got.len() == want.len() && got.iter().zip(&want).all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1.0));
            if !same {
                problems.push(format!("{id} {name}: got {got:?}, want {want:?}"));
            }
        }
    }
    Ok(if problems.is_empty() {
        Outcome::pass("all 13 case-study settings recovered exactly")
    } else {
        Outcome::fail(problems.join("; "))
    })
}

// 4 -------------------------------------------------------------------------

fn parse_seconds(corpus: &Path, out: &Path, workers: usize) -> litsynth::Result<f64> {
    let mut cfg = config(corpus, out);
    cfg.worker_count = workers;
    let run = run_pipeline_with(&cfg, &OfflineTransport)?;
    Ok(run.timings.iter().filter(|(s, _)| *s == StageName::ParseExtract).map(|(_, t)| t).sum())
}

fn criterion_4(work: &Path) -> litsynth::Result<Outcome> {
    let real = fixtures::realistic_corpus(&work.join("corpus"), 42)?;
    let gold = load_gold(&real.gold_path())?;
    let mut base = config(&real.dir, &work.join("unused"));
    base.worker_count = SPEEDUP_WORKERS;
    let rows = run_ablation(&base, &gold, &work.join("runs"))?;
    let f1: BTreeMap<AblationConfig, f64> = rows.iter().map(|r| (r.configuration, r.f1)).collect();
    let full = f1[&AblationConfig::Full];
    let min = f1.values().copied().fold(f64::INFINITY, f64::min);
    let rules_min = f1[&AblationConfig::NoRulePatterns] == min && f1.values().filter(|&&v| v == min).count() == 1;
    let directional = f1[&AblationConfig::NoParallelParsing] == full && f1[&AblationConfig::NoLlmSummarisation] == full && rules_min;
    let table: Vec<String> = rows.iter().map(|r| format!("{} {:.3}", r.configuration.label(), r.f1)).collect();

    let scale = fixtures::scaling_corpus(&work.join("speed/corpus"), 200, 42)?;
    let serial = parse_seconds(&scale.dir, &work.join("speed/w1"), 1)?;
    let parallel = parse_seconds(&scale.dir, &work.join("speed/w8"), SPEEDUP_WORKERS)?;
    let ratio = serial / parallel;
    let cpus = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let detail = format!(
        "F1 [{}]; parse speedup {ratio:.2}x with {SPEEDUP_WORKERS} workers on 200 docs ({serial:.2}s vs {parallel:.2}s, {cpus} CPU{})",
        table.join(", "),
        if cpus == 1 { "" } else { "s" }
    );
    if !directional {
        return Ok(Outcome::fail(detail));
    }
    if ratio >= 2.5 {
        return Ok(Outcome::pass(detail));
    }
    Ok(Outcome { pass: false, soft: cpus < SPEEDUP_WORKERS, detail })
}

// 5 -------------------------------------------------------------------------

fn criterion_5(work: &Path) -> litsynth::Result<Outcome> {
    let report = run_scaling(&[50, 100, 200, 400], 1, 42, work, Duration::from_millis(20))?;
    let (Some(t), Some(m)) = (report.time_fit, report.memory_fit) else {
        return Ok(Outcome::fail("no fit"));
    };
    let times: Vec<f64> = report.measurements.iter().map(|m| m.time_minutes).collect();
    let monotone = times.windows(2).all(|w| w[1] >= w[0]);
    Ok(Outcome::check(
        t.r2 >= 0.9 && m.r2 >= 0.8 && monotone,
        format!(
            "time R^2 {:.4} (slope {:.2e} min/paper), memory R^2 {:.4} (slope {:.2e} GB/paper), time non-decreasing: {monotone}",
            t.r2, t.slope, m.r2, m.slope
        ),
    ))
}

// 6 -------------------------------------------------------------------------

fn dense(v: &SparseVec, dim: usize) -> Vec<f64> {
    let mut d = vec![0.0; dim];
    for &(i, w) in v {
        d[i] = w;
    }
    d
}

/// Mean silhouette with cosine distance, straight from the definition.
fn oracle_silhouette(points: &[Vec<f64>], labels: &[usize]) -> f64 {
    let dist = |a: &Vec<f64>, b: &Vec<f64>| {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        // Euclidean distance between unit vectors: sqrt(2 - 2 cos)
        (2.0 - 2.0 * dot / (na * nb)).max(0.0).sqrt()
    };
    let k = labels.iter().max().unwrap() + 1;
    let mut total = 0.0;
    for i in 0..points.len() {
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for j in 0..points.len() {
            if i != j {
                sums[labels[j]] += dist(&points[i], &points[j]);
                counts[labels[j]] += 1;
            }
        }
        let own = labels[i];
        if counts[own] == 0 {
            continue;
        }
        let a = sums[own] / counts[own] as f64;
        let b = (0..k).filter(|&c| c != own && counts[c] > 0).map(|c| sums[c] / counts[c] as f64).fold(f64::INFINITY, f64::min);
        total += (b - a) / a.max(b);
    }
    total / points.len() as f64
}

fn criterion_6() -> litsynth::Result<Outcome> {
    let docs = fixtures::two_topic_documents(10, 42);
    let pairs: Vec<(String, String)> = docs.iter().map(|(id, t, _)| (id.clone(), t.clone())).collect();
    let index = build_tfidf(&pairs)?;
    let model = cluster_topics(&index, 2..=5, 42)?;

    let planted: BTreeMap<&str, usize> = docs.iter().map(|(id, _, t)| (id.as_str(), *t)).collect();
    let mut pairing = BTreeSet::new();
    for (id, c) in &model.assignment {
        pairing.insert((planted[id.as_str()], *c));
    }
    let exact = model.k == 2 && pairing.len() == 2 && pairing.iter().map(|p| p.0).collect::<BTreeSet<_>>().len() == 2;

    let dim = index.dimension();
    let points: Vec<SparseVec> = index.doc_vectors.values().cloned().collect();
    let dense_points: Vec<Vec<f64>> = points.iter().map(|p| dense(p, dim)).collect();
    let mut by_k = Vec::new();
    for k in 2..=5 {
        let run = kmeans(&points, k, dim, 42);
        by_k.push((k, oracle_silhouette(&dense_points, &run.assignment)));
    }
    let best = by_k.iter().copied().fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 + 1e-12 { x } else { acc });
    let agree = by_k.iter().zip(&model.silhouette_by_k).all(|(a, b)| a.0 == b.0 && (a.1 - b.1).abs() < 1e-9);
    let shown: Vec<String> = by_k.iter().map(|(k, s)| format!("k={k}: {s:.3}")).collect();
    Ok(Outcome::check(
        exact && best.0 == 2 && agree,
        format!("selected k={}, planting recovered: {exact}; oracle silhouettes {}", model.k, shown.join(", ")),
    ))
}

// 7 -------------------------------------------------------------------------

fn centroid(members: &[&SparseVec]) -> SparseVec {
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    for v in members {
        for &(i, w) in *v {
            *acc.entry(i).or_default() += w / members.len() as f64;
        }
    }
    acc.into_iter().collect()
}

/// Replies with a valid-looking sentence that cites a document outside the
/// cluster, with randomised surrounding text.
struct OutOfCluster {
    reply: String,
}

impl SummaryBackend for OutOfCluster {
    fn generate(&self, _prompt: &str) -> Result<String, String> {
        Ok(self.reply.clone())
    }
}

fn criterion_7(work: &Path) -> litsynth::Result<Outcome> {
    let corpus = fixtures::realistic_corpus(&work.join("corpus"), 7)?;
    let pairs: Vec<(String, String)> = corpus.texts.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    let index = build_tfidf(&pairs)?;
    let vectorizer: &Vectorizer = &index.vectorizer;
    let ids: Vec<&String> = index.doc_vectors.keys().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    let mut fallbacks = 0;
    for round in 0..100 {
        let size = rng.gen_range(2..=6);
        let members: Vec<&String> = ids.choose_multiple(&mut rng, size).copied().collect();
        let docs: Vec<ClusterDoc> = members.iter().map(|id| ClusterDoc { id: (*id).clone(), text: corpus.texts[*id].clone() }).collect();
        let c = centroid(&members.iter().map(|id| &index.doc_vectors[*id]).collect::<Vec<_>>());
        let summary = summarise(&docs, vectorizer, &c, None, SummaryOptions::default());
        if summary.sentences.is_empty() {
            return Ok(Outcome::fail(format!("round {round}: empty summary")));
        }
        for s in &summary.sentences {
            let in_cluster = !s.citations.is_empty() && s.citations.iter().all(|c| members.iter().any(|m| *m == c));
            let verbatim = s.citations.iter().any(|c| corpus.texts[c].contains(&s.text))
                && s.provenance.iter().all(|(d, sp)| sp.slice(&corpus.texts[d]) == s.text);
            if !in_cluster || !verbatim {
                return Ok(Outcome::fail(format!("round {round}: ungrounded sentence {:?}", s.text)));
            }
            checked += 1;
        }

        let outsider = ids.iter().find(|id| !members.contains(id)).unwrap();
        let filler: String = (0..rng.gen_range(6..14)).map(|_| ["models", "results", "data", "training", "strong"][rng.gen_range(0..5)]).collect::<Vec<_>>().join(" ");
        let reply = format!("These papers study {filler} [{}]. Other work disagrees [{outsider}].", members[0]);
        let backend = OutOfCluster { reply };
        let fuzzed = summarise(&docs, vectorizer, &c, Some(&backend), SummaryOptions::default());
        if fuzzed.mode == SummaryMode::Extractive && !fuzzed.warnings.is_empty() {
            fallbacks += 1;
        }
    }
    Ok(Outcome::check(fallbacks == 100, format!("100 summaries, {checked} grounded sentences; out-of-cluster replies fell back {fallbacks}/100")))
}

// 8 -------------------------------------------------------------------------

fn criterion_8(work: &Path) -> litsynth::Result<Outcome> {
    let corpus = fixtures::case_study_corpus(&work.join("case"))?;
    let facts = Extractor::default().extract(&corpus.texts["local:case-awd-lstm"], None);
    let registry = TemplateRegistry::shipped();
    let template = registry.get("rnn-lm")?;
    let plan = plan_reproduction("local:case-awd-lstm", &facts, template);
    let script = render_script(&plan, &registry)?;
    let wanted = [
        "NUM_LAYERS = 3",
        "HIDDEN_SIZE = [1150, 1150, 400]",
        "LEARNING_RATE = 30",
        "GRAD_CLIP = 0.25",
        "EPOCHS = 500",
        "DROPOUT_EMB = 0.4",
        "SEED = 42",
        "torch.manual_seed(SEED)",
        "PATIENCE = 5",
        "LR_DIVISOR = 4",
        "if stale >= PATIENCE:",
        "lr = lr / LR_DIVISOR",
    ];
    let missing: Vec<&str> = wanted.iter().copied().filter(|w| !script.contains(w)).collect();
    if !missing.is_empty() {
        return Ok(Outcome::fail(format!("AWD-LSTM script lacks {missing:?}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for round in 0..200 {
        let subset: Vec<HyperparamFact> = facts.hyperparams.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        let partial = FactBundle { hyperparams: subset, ..facts.clone() };
        let plan = plan_reproduction("local:case-awd-lstm", &partial, template);
        let script = render_script(&plan, &registry)?;
        if script.contains("{{") || script.contains("}}") {
            return Ok(Outcome::fail(format!("round {round}: placeholder left in script")));
        }
        if let Some((slot, _)) = plan.bindings.iter().find(|(_, b)| !script.contains(&b.value.render())) {
            return Ok(Outcome::fail(format!("round {round}: bound {slot} missing from script")));
        }
    }
    Ok(Outcome::pass("all bound values, seed stanza and plateau decay present; 200 random subsets placeholder-free"))
}

// 9 -------------------------------------------------------------------------

fn criterion_9(work: &Path) -> litsynth::Result<Outcome> {
    let corpus = fixtures::realistic_corpus(&work.join("corpus"), 42)?;
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let mut cfg = config(&corpus.dir, &work.join(run));
        cfg.worker_count = 4;
        run_pipeline_with(&cfg, &OfflineTransport)?;
        let kb = std::fs::read(&cfg.kb_path).map_err(|e| litsynth::Error::io(&cfg.kb_path, e))?;
        let report = std::fs::read(&cfg.report_path).map_err(|e| litsynth::Error::io(&cfg.report_path, e))?;
        outputs.push((kb, report));
    }
    let same_kb = outputs[0].0 == outputs[1].0;
    let same_report = outputs[0].1 == outputs[1].1;
    Ok(Outcome::check(
        same_kb && same_report && !outputs[0].0.is_empty(),
        format!("KB identical: {same_kb} ({} bytes); report identical: {same_report}", outputs[0].0.len()),
    ))
}

fn main() {
    // Criterion filter for quick local runs: `cargo test --test acceptance -- 3 6`.
    let only: BTreeSet<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let work = tempfile::tempdir().expect("temp dir");
    type Check = Box<dyn Fn(&Path) -> litsynth::Result<Outcome>>;
    let criteria: Vec<(usize, &str, Duration, Check)> = vec![
        (1, "metric oracle equivalence", Duration::from_secs(5), Box::new(|_| Ok(criterion_1()))),
        (2, "extraction fidelity", Duration::from_secs(120), Box::new(criterion_2)),
        (3, "case-study fact recovery", Duration::from_secs(30), Box::new(criterion_3)),
        (4, "ablation directionality", Duration::from_secs(900), Box::new(criterion_4)),
        (5, "scaling linearity", Duration::from_secs(1200), Box::new(criterion_5)),
        (6, "clustering correctness", Duration::from_secs(10), Box::new(|_| criterion_6())),
        (7, "summary grounding", Duration::from_secs(60), Box::new(criterion_7)),
        (8, "script generation fidelity", Duration::from_secs(10), Box::new(criterion_8)),
        (9, "end-to-end determinism", Duration::from_secs(300), Box::new(criterion_9)),
    ];
    let (mut ran, mut passed, mut hard_failures) = (0, 0, 0);
    for (n, name, budget, check) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let dir = work.path().join(format!("c{n}"));
        let started = Instant::now();
        let outcome = check(&dir).unwrap_or_else(|e| Outcome::fail(format!("error: {e}")));
        let elapsed = started.elapsed();
        let in_time = elapsed <= budget;
        let pass = outcome.pass && in_time;
        let timing = format!("{:.1}s of {}s", elapsed.as_secs_f64(), budget.as_secs());
        let note = if outcome.soft { " [hardware-limited, not counted]" } else { "" };
        println!(
            "criterion {n} ({name}): {} - {} [{timing}]{note}",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
        ran += 1;
        if pass {
            passed += 1;
        } else if !(outcome.soft && in_time) {
            hard_failures += 1;
        }
    }
    println!("{passed}/{ran} criteria passed, {hard_failures} hard failures");
    if hard_failures > 0 {
        eprintln!("{hard_failures} criteria failed");
        std::process::exit(1);
    }
}
