//! Literature mining for one research topic: retrieve candidate papers,
//! screen them, parse and extract facts in parallel into a knowledge base,
//! cluster and summarise the corpus with grounded citations, and emit
//! training scripts from the extracted hyperparameters.

pub mod cli;
pub mod config;
pub mod error;
pub mod eval;
pub mod extract;
pub mod fixtures;
pub mod ingest;
pub mod kb;
pub mod parse;
pub mod pipeline;
pub mod relevance;
pub mod scriptgen;
pub mod text;
pub mod topics;

pub use config::{Component, RunConfig, StageToggles};
pub use error::{Error, Result};
pub use pipeline::{RunOutput, StageName, run_pipeline, run_pipeline_with};
