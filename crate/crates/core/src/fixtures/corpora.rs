//! Ready-made corpora: noise-free, realistic, scaling, case studies and a
//! planted two-topic set for clustering checks.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::extract::{FactBundle, HyperparamFact, Metadata, Metric, Split};

use super::{
    CorpusInfo, FixtureError, NoiseProfile, SyntheticPaperSpec, Theme, cite, generate_corpus, hyper, hyper_text,
    id_seed, random_abstract, random_authors, random_references, random_title, reference, result,
};

fn pick<T: Copy>(rng: &mut ChaCha8Rng, xs: &[T]) -> T {
    *xs.choose(rng).unwrap()
}

fn settings(theme: Theme, rng: &mut ChaCha8Rng) -> Vec<HyperparamFact> {
    let mut core = Vec::new();
    let mut optional: Vec<HyperparamFact> = Vec::new();
    match theme {
        Theme::Recurrent => {
            core.push(hyper_text("architecture", pick(rng, &["LSTM", "GRU"])));
            core.push(hyper("num_layers", pick(rng, &[2.0, 3.0, 4.0])));
            if rng.gen_bool(0.3) {
                let wide = pick(rng, &[1000.0, 1150.0, 1500.0]);
                core.extend([hyper("hidden_size", wide), hyper("hidden_size", wide), hyper("hidden_size", pick(rng, &[400.0, 650.0]))]);
            } else {
                optional.push(hyper("hidden_size", pick(rng, &[650.0, 1000.0, 1150.0, 1500.0])));
            }
            let sgd = rng.gen_bool(0.5);
            optional.push(hyper_text("optimizer", if sgd { "SGD" } else { "Adam" }));
            optional.push(hyper("learning_rate", if sgd { pick(rng, &[10.0, 20.0, 30.0]) } else { pick(rng, &[0.001, 0.002, 0.003]) }));
            optional.push(hyper("embed_size", pick(rng, &[200.0, 400.0, 650.0])));
            optional.push(hyper("dropout", pick(rng, &[0.2, 0.3, 0.4, 0.5])));
            optional.push(hyper("grad_clip", pick(rng, &[0.1, 0.25, 0.5])));
            optional.push(hyper("epochs", pick(rng, &[40.0, 100.0, 250.0, 500.0, 750.0])));
            optional.push(hyper("batch_size", pick(rng, &[20.0, 40.0, 80.0])));
            optional.push(hyper("seq_length", pick(rng, &[35.0, 70.0, 100.0])));
        }
        Theme::Attention => {
            core.push(hyper_text("architecture", pick(rng, &["Transformer", "Transformer-XL"])));
            core.push(hyper("num_layers", pick(rng, &[6.0, 12.0, 16.0, 18.0, 24.0])));
            optional.push(hyper("hidden_size", pick(rng, &[512.0, 768.0, 1024.0])));
            optional.push(hyper("num_heads", pick(rng, &[8.0, 12.0, 16.0])));
            optional.push(hyper("dropout", pick(rng, &[0.1, 0.2, 0.3])));
            optional.push(hyper("learning_rate", pick(rng, &[0.0001, 0.00025, 0.0005])));
            optional.push(hyper_text("optimizer", pick(rng, &["Adam", "AdamW"])));
            optional.push(hyper("steps", pick(rng, &[100_000.0, 200_000.0, 400_000.0])));
            optional.push(hyper("batch_size", pick(rng, &[32.0, 60.0, 128.0])));
            optional.push(hyper("seq_length", pick(rng, &[150.0, 256.0, 512.0])));
            optional.push(hyper("mem_length", pick(rng, &[150.0, 384.0, 640.0])));
        }
        Theme::Music => {
            optional.push(hyper("vocab_size", pick(rng, &[256.0, 388.0, 512.0])));
            optional.push(hyper("param_count", pick(rng, &[30e6, 120e6, 360e6])));
            optional.push(hyper("steps", pick(rng, &[100_000.0, 400_000.0, 800_000.0])));
            optional.push(hyper("num_heads", pick(rng, &[4.0, 8.0])));
            optional.push(hyper("dropout", pick(rng, &[0.1, 0.2])));
            optional.push(hyper("learning_rate", pick(rng, &[0.0003, 0.0006])));
            optional.push(hyper("batch_size", pick(rng, &[16.0, 64.0])));
            optional.push(hyper("seq_length", pick(rng, &[1024.0, 2048.0])));
        }
        Theme::Forecasting => {
            optional.push(hyper("learning_rate", pick(rng, &[0.01, 0.05])));
            optional.push(hyper("batch_size", pick(rng, &[32.0, 64.0])));
            optional.push(hyper("epochs", pick(rng, &[20.0, 50.0])));
        }
        Theme::Vision => {
            optional.push(hyper("learning_rate", pick(rng, &[0.01, 0.1])));
            optional.push(hyper("batch_size", pick(rng, &[8.0, 16.0])));
            optional.push(hyper("epochs", pick(rng, &[30.0, 90.0])));
        }
    }
    optional.shuffle(rng);
    let keep = rng.gen_range(optional.len().saturating_sub(3).max(1)..=optional.len());
    optional.truncate(keep);
    core.extend(optional);
    core
}

fn results(theme: Theme, rng: &mut ChaCha8Rng) -> Vec<crate::extract::ResultFact> {
    let tenth = |rng: &mut ChaCha8Rng, lo: u32, hi: u32| rng.gen_range(lo * 10..hi * 10) as f64 / 10.0;
    let split = |rng: &mut ChaCha8Rng| pick(rng, &[Some(Split::Test), Some(Split::Valid)]);
    let n = rng.gen_range(1..=3);
    (0..n)
        .map(|_| match theme {
            Theme::Recurrent => {
                let d = pick(rng, &["Penn Treebank", "WikiText-2", "WikiText-103"]);
                let v = tenth(rng, 50, 120);
                result(Metric::Perplexity, v, Some(d), split(rng))
            }
            Theme::Attention => {
                let d = pick(rng, &["WikiText-103", "One Billion Word", "enwik8"]);
                let v = tenth(rng, 15, 40);
                result(Metric::Perplexity, v, Some(d), split(rng))
            }
            Theme::Music => {
                let d = pick(rng, &["Lakh MIDI", "MAESTRO"]);
                if rng.gen_bool(0.5) {
                    let v = tenth(rng, 60, 90);
                    result(Metric::Perplexity, v, Some(d), split(rng))
                } else {
                    let v = tenth(rng, 30, 60);
                    result(Metric::Accuracy, v, Some(d), split(rng))
                }
            }
            Theme::Forecasting | Theme::Vision => {
                let v = tenth(rng, 60, 90);
                result(Metric::Accuracy, v, None, split(rng))
            }
        })
        .collect()
}

/// A random paper of one theme. Titles are unique within `taken`.
fn random_spec(
    theme: Theme,
    stem: &str,
    length: usize,
    noise: NoiseProfile,
    rng: &mut ChaCha8Rng,
    taken: &mut std::collections::BTreeSet<String>,
) -> SyntheticPaperSpec {
    let mut title = random_title(theme, rng);
    let mut attempt = 2;
    while !taken.insert(crate::text::normalize_title(&title)) {
        title = if attempt < 6 {
            random_title(theme, rng)
        } else {
            format!("{} {}", random_title(theme, rng), roman(attempt))
        };
        attempt += 1;
    }
    let references = random_references(rng.gen_range(3..=6), rng);
    let mut citations: Vec<_> = references.iter().map(|r| cite(&r.key)).collect();
    citations.shuffle(rng);
    let planted = FactBundle {
        metadata: Metadata {
            title,
            authors: random_authors(rng),
            year: Some(rng.gen_range(2015..=2024)),
            venue: Some("Workshop on Sequence Learning".into()),
            abstract_text: Some(random_abstract(theme, rng)),
        },
        hyperparams: settings(theme, rng),
        results: results(theme, rng),
        citations,
        references,
        ..Default::default()
    };
    SyntheticPaperSpec {
        canonical_id: format!("local:{stem}"),
        theme,
        planted,
        length,
        noise,
    }
}

fn roman(n: usize) -> String {
    ["I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X"]
        .get(n.saturating_sub(1))
        .map(|s| s.to_string())
        .unwrap_or_else(|| {
            // titles must not carry digits, so spell the index in letters
            let mut s = String::new();
            let mut k = n;
            while k > 0 {
                s.insert(0, (b'a' + (k % 26) as u8) as char);
                k /= 26;
            }
            s
        })
}

/// Twelve relevant papers whose every fact is extractable.
pub fn noise_free_specs(seed: u64) -> Vec<SyntheticPaperSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(id_seed(seed, "noise-free"));
    let mut taken = Default::default();
    let themes = [Theme::Recurrent, Theme::Attention, Theme::Music];
    (0..12)
        .map(|i| random_spec(themes[i % 3], &format!("clean-{i:02}"), 600, NoiseProfile::NoiseFree, &mut rng, &mut taken))
        .collect()
}

/// Fifteen relevant papers with realistic noise, three off-topic papers
/// that pass the keyword screen, and two that fail it.
pub fn realistic_specs(seed: u64) -> Vec<SyntheticPaperSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(id_seed(seed, "realistic"));
    let mut taken = Default::default();
    let mut plan: Vec<Theme> = Vec::new();
    for _ in 0..5 {
        plan.extend([Theme::Recurrent, Theme::Attention, Theme::Music]);
    }
    plan.extend([Theme::Forecasting; 3]);
    plan.extend([Theme::Vision; 2]);
    plan.iter()
        .enumerate()
        .map(|(i, &t)| random_spec(t, &format!("paper-{i:02}"), 900, NoiseProfile::Realistic, &mut rng, &mut taken))
        .collect()
}

/// `n` relevant papers of about `length` words for timing runs.
pub fn scaling_specs(n: usize, seed: u64, length: usize) -> Vec<SyntheticPaperSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(id_seed(seed, "scaling"));
    let mut taken = Default::default();
    let themes = [Theme::Recurrent, Theme::Attention, Theme::Music];
    (0..n)
        .map(|i| random_spec(themes[i % 3], &format!("synth-{i:05}"), length, NoiseProfile::Realistic, &mut rng, &mut taken))
        .collect()
}

pub fn noise_free_corpus(dir: &Path, seed: u64) -> Result<CorpusInfo, FixtureError> {
    generate_corpus(&noise_free_specs(seed), seed, dir)
}

pub fn realistic_corpus(dir: &Path, seed: u64) -> Result<CorpusInfo, FixtureError> {
    generate_corpus(&realistic_specs(seed), seed, dir)
}

/// Words per synthetic paper in scaling corpora.
pub const SCALING_PAPER_WORDS: usize = 3000;

pub fn scaling_corpus(dir: &Path, n: usize, seed: u64) -> Result<CorpusInfo, FixtureError> {
    generate_corpus(&scaling_specs(n, seed, SCALING_PAPER_WORDS), seed, dir)
}

fn case(
    stem: &str,
    theme: Theme,
    title: &str,
    authors: &[&str],
    year: i32,
    abstract_text: &str,
    hyperparams: Vec<HyperparamFact>,
    results: Vec<crate::extract::ResultFact>,
    references: Vec<crate::extract::ReferenceEntry>,
) -> SyntheticPaperSpec {
    SyntheticPaperSpec {
        canonical_id: format!("local:{stem}"),
        theme,
        planted: FactBundle {
            metadata: Metadata {
                title: title.into(),
                authors: authors.iter().map(|a| a.to_string()).collect(),
                year: Some(year),
                venue: Some("Workshop on Sequence Learning".into()),
                abstract_text: Some(abstract_text.into()),
            },
            hyperparams,
            results,
            citations: references.iter().map(|r| cite(&r.key)).collect(),
            references,
            ..Default::default()
        },
        length: 700,
        noise: NoiseProfile::NoiseFree,
    }
}

/// The three reproduction case studies: a regularised LSTM language model,
/// a segment-recurrent Transformer, and an event-sequence music model.
pub fn case_study_specs() -> Vec<SyntheticPaperSpec> {
    vec![
        case(
            "case-awd-lstm",
            Theme::Recurrent,
            "Regularised Recurrent Baselines for Word-Level Language Modelling",
            &["Ada Quill", "Bram Oster", "Cleo Ruiz"],
            2018,
            "We revisit word-level language modelling with stacked recurrent networks. Dropout on hidden connections and averaged weight updates both matter for generalisation. A careful schedule for the step size matters more than extra depth.",
            vec![
                hyper_text("architecture", "LSTM"),
                hyper("num_layers", 3.0),
                hyper("hidden_size", 1150.0),
                hyper("hidden_size", 1150.0),
                hyper("hidden_size", 400.0),
                hyper("dropout_emb", 0.4),
                hyper_text("optimizer", "SGD"),
                hyper("learning_rate", 30.0),
                hyper("grad_clip", 0.25),
                hyper("epochs", 500.0),
            ],
            vec![result(Metric::Perplexity, 69.1, Some("WikiText-2"), Some(Split::Valid))],
            vec![
                reference("Hollis", 2016, "Averaging Recurrent Networks", "Journal of Machine Learning Practice"),
                reference("Varga", 2014, "Dropout for Sequence Models", "Workshop on Sequence Learning"),
            ],
        ),
        case(
            "case-transformer-xl",
            Theme::Attention,
            "Segment Memory for Long-Context Transformer Language Models",
            &["Dario Tanaka", "Esme Okafor"],
            2019,
            "We present an attention-based autoregressive language model with segment-level memory. Caching hidden states from earlier segments extends the usable context. Adaptive input representations reduce the cost of large vocabularies.",
            vec![
                hyper_text("architecture", "Transformer-XL"),
                hyper("num_layers", 18.0),
                hyper("hidden_size", 1024.0),
                hyper("num_heads", 16.0),
                hyper("mem_length", 150.0),
                hyper_text("optimizer", "Adam"),
                hyper("learning_rate", 0.0002),
                hyper("steps", 200_000.0),
            ],
            vec![result(Metric::Perplexity, 18.9, Some("WikiText-103"), Some(Split::Valid))],
            vec![
                reference("Lindqvist", 2017, "Attention Decoders", "Conference on Representation Learning"),
                reference("Berrada", 2018, "Relative Context Windows", "Transactions on Language Modelling"),
            ],
        ),
        case(
            "case-music",
            Theme::Music,
            "Arrival-Time Event Models for Symbolic Music Generation",
            &["Femi Anand", "Greta Castell", "Hugo Dimitrov"],
            2023,
            "We model performance recordings as an autoregressive stream of timed events. Notes, durations and velocities are encoded as discrete events. Anticipation of future control events enables infilling of partial scores.",
            vec![hyper("vocab_size", 512.0), hyper("param_count", 360e6), hyper("steps", 800_000.0)],
            vec![result(Metric::Accuracy, 41.2, Some("Lakh MIDI"), Some(Split::Valid))],
            vec![
                reference("Eklund", 2020, "Music Events", "Symposium on Music Information Processing"),
                reference("Farrow", 2021, "Structure in Music Tokens", "Symposium on Music Information Processing"),
            ],
        ),
    ]
}

pub fn case_study_corpus(dir: &Path) -> Result<CorpusInfo, FixtureError> {
    generate_corpus(&case_study_specs(), 42, dir)
}

const TOPIC_A: &[&str] = &[
    "violin", "cello", "sonata", "orchestra", "conductor", "rehearsal", "overture", "concerto", "quartet", "soloist",
    "tempo", "crescendo", "harmony", "melody", "recital", "viola", "symphony", "encore", "baton", "aria",
];
const TOPIC_B: &[&str] = &[
    "glacier", "moraine", "crevasse", "icefield", "meltwater", "serac", "firn", "cirque", "outwash", "drumlin",
    "esker", "calving", "ablation", "nunatak", "snowline", "icefall", "tarn", "erratic", "fjord", "permafrost",
];

/// Documents over two disjoint vocabularies: `(id, text, planted topic)`.
pub fn two_topic_documents(per_topic: usize, seed: u64) -> Vec<(String, String, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(id_seed(seed, "two-topic"));
    let mut docs = Vec::new();
    for (topic, vocab) in [TOPIC_A, TOPIC_B].iter().enumerate() {
        for i in 0..per_topic {
            let words: Vec<&str> = (0..40).map(|_| *vocab.choose(&mut rng).unwrap()).collect();
            docs.push((format!("t{topic}-{i:02}"), words.join(" "), topic));
        }
    }
    docs
}
