//! Binds settings extracted from the regularised-LSTM case study into the
//! recurrent training template and prints the script.
//!
//! cargo run --example reproduce_script

use litsynth::extract::Extractor;
use litsynth::fixtures;
use litsynth::scriptgen::{TemplateRegistry, choose_template, plan_reproduction, render_script};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let corpus = fixtures::case_study_corpus(dir.path())?;
    let registry = TemplateRegistry::shipped();
    for (id, text) in &corpus.texts {
        let facts = Extractor::default().extract(text, None);
        let template = registry.get(choose_template(&facts))?;
        let plan = plan_reproduction(id, &facts, template);
        let bound: Vec<String> = plan.bindings.iter().map(|(k, b)| format!("{k}={}", b.value.render())).collect();
        println!("{id} -> {}: {}", template.template_id, bound.join(" "));
        if !plan.unresolved.is_empty() {
            println!("  unresolved: {}", plan.unresolved.join(", "));
        }
    }

    let facts = Extractor::default().extract(&corpus.texts["local:case-awd-lstm"], None);
    let plan = plan_reproduction("local:case-awd-lstm", &facts, registry.get("rnn-lm")?);
    println!("\n{}", render_script(&plan, &registry)?);
    Ok(())
}
