use std::collections::BTreeSet;
use std::path::Path;

use litsynth::config::SourceKind;
use litsynth::eval::compute_prf;
use litsynth::extract::{FactBundle, HyperValue, extract_hyperparams};
use litsynth::fixtures::{self, hyper, hyper_text};
use litsynth::ingest::PaperRecord;
use litsynth::kb::{KnowledgeBase, Query, aggregate_entries};
use proptest::prelude::*;

fn record(i: usize, title: &str, year: i32) -> PaperRecord {
    let mut r = PaperRecord::new(SourceKind::LocalFile, format!("{title} {i}")).with_source_id(format!("p{i}"));
    r.year = Some(year);
    r
}

const NAMES: [&str; 5] = ["learning_rate", "dropout", "batch_size", "epochs", "num_layers"];

fn bundle(facts: &[(usize, u32)], optimizer: Option<&str>) -> FactBundle {
    let mut b = FactBundle::default();
    for &(n, v) in facts {
        b.hyperparams.push(hyper(NAMES[n % NAMES.len()], f64::from(v) / 8.0));
    }
    if let Some(o) = optimizer {
        b.hyperparams.push(hyper_text("optimizer", o));
    }
    b
}

fn paper() -> impl Strategy<Value = (String, i32, Vec<(usize, u32)>, Option<String>)> {
    (
        "[A-Za-z ]{1,24}",
        1990..2030i32,
        prop::collection::vec((0..5usize, 1..4000u32), 0..8),
        prop::option::of(prop::sample::select(vec!["Adam".to_string(), "SGD".to_string()])),
    )
}

proptest! {
    #[test]
    fn prf_swaps_precision_and_recall(e in prop::collection::btree_set(0..60u8, 0..40), g in prop::collection::btree_set(0..60u8, 0..40)) {
        let a = compute_prf(&e, &g);
        let b = compute_prf(&g, &e);
        prop_assert_eq!(a.precision, b.recall);
        prop_assert_eq!(a.recall, b.precision);
        prop_assert!(a.f1 <= 2.0 * a.precision.min(a.recall) + 1e-12);
        if a.precision > 0.0 && a.recall > 0.0 {
            prop_assert!(a.f1 >= a.precision.min(a.recall) - 1e-12);
        }
    }

    #[test]
    fn kb_round_trips_and_aggregates_are_derivable(papers in prop::collection::vec(paper(), 0..12)) {
        let mut kb = KnowledgeBase::new();
        for (i, (title, year, facts, opt)) in papers.iter().enumerate() {
            kb.append(record(i, title, *year), bundle(facts, opt.as_deref()), false).unwrap();
        }
        let text = kb.to_jsonl();
        let back = KnowledgeBase::from_jsonl(&text, Path::new("mem")).unwrap();
        prop_assert_eq!(back.to_jsonl(), text);
        prop_assert_eq!(back.aggregate(), &aggregate_entries(kb.entries()));
    }

    #[test]
    fn adding_a_paper_never_removes_query_rows(papers in prop::collection::vec(paper(), 1..10), extra in paper()) {
        let mut kb = KnowledgeBase::new();
        for (i, (title, year, facts, opt)) in papers.iter().enumerate() {
            kb.append(record(i, title, *year), bundle(facts, opt.as_deref()), false).unwrap();
        }
        let queries: Vec<Query> = NAMES
            .iter()
            .map(|n| Query::FactsByName { name: n.to_string() })
            .chain([Query::FreeLookup { text: "a".into() }])
            .collect();
        let before: Vec<_> = queries.iter().map(|q| kb.query(q).unwrap()).collect();
        let (title, year, facts, opt) = extra;
        kb.append(record(papers.len(), &title, year), bundle(&facts, opt.as_deref()), false).unwrap();
        for (q, old) in queries.iter().zip(before) {
            let new = kb.query(q).unwrap();
            for row in old {
                prop_assert!(new.contains(&row));
            }
        }
    }

    #[test]
    fn learning_rates_are_read_back(mantissa in 1..100u32, exp in 0..6i32) {
        let value = f64::from(mantissa) * 10f64.powi(-exp);
        let shown = format!("{value}");
        for text in [
            format!("We use a learning rate of {shown}."),
            format!("Training uses learning rate {shown} with a short warmup."),
            format!("Optimisation starts from lr = {shown}."),
        ] {
            let facts = extract_hyperparams(&text);
            let lrs: Vec<f64> = facts
                .iter()
                .filter(|f| f.name.as_str() == "learning_rate")
                .filter_map(|f| match f.value { HyperValue::Number(v) => Some(v), _ => None })
                .collect();
            prop_assert_eq!(lrs.len(), 1, "{}", text);
            prop_assert!((lrs[0] - value).abs() <= 1e-12 * value.max(1.0));
        }
    }

    #[test]
    fn dropout_percentages_become_fractions(pct in 1..90u32) {
        let text = format!("The dropout was set to {pct}%.");
        let facts = extract_hyperparams(&text);
        let d: Vec<&HyperValue> = facts.iter().filter(|f| f.name.as_str() == "dropout").map(|f| &f.value).collect();
        prop_assert_eq!(d.len(), 1);
        prop_assert_eq!(d[0], &HyperValue::Number(f64::from(pct) / 100.0));
    }
}

#[test]
fn corpus_generation_is_deterministic_and_rejects_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let a = fixtures::noise_free_corpus(&dir.path().join("a"), 9).unwrap();
    let b = fixtures::noise_free_corpus(&dir.path().join("b"), 9).unwrap();
    assert_eq!(a.texts, b.texts);
    for name in ["manifest.jsonl", "gold.jsonl", "keywords.txt", "relevance_train.jsonl"] {
        assert_eq!(std::fs::read(a.dir.join(name)).unwrap(), std::fs::read(b.dir.join(name)).unwrap(), "{name}");
    }
    let c = fixtures::noise_free_corpus(&dir.path().join("c"), 10).unwrap();
    assert_ne!(a.texts, c.texts);

    let mut specs = fixtures::noise_free_specs(1);
    specs.push(specs[0].clone());
    assert!(matches!(
        fixtures::generate_corpus(&specs, 1, &dir.path().join("d")),
        Err(fixtures::FixtureError::DuplicateId(_))
    ));
}

#[test]
fn scaling_corpus_has_requested_size() {
    let dir = tempfile::tempdir().unwrap();
    let info = fixtures::scaling_corpus(dir.path(), 40, 3).unwrap();
    assert_eq!(info.ids.len(), 40);
    let files = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "txt") && !p.ends_with("keywords.txt"))
        .count();
    assert_eq!(files, 40);
    let min_words = info.texts.values().map(|t| t.split_whitespace().count()).min().unwrap();
    assert!(min_words >= fixtures::SCALING_PAPER_WORDS, "{min_words}");
    let ids: BTreeSet<&String> = info.ids.iter().collect();
    assert_eq!(ids.len(), 40);
}
