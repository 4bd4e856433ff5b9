use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;
use crate::eval::EvalError;
use crate::extract::RuleError;
use crate::fixtures::FixtureError;
use crate::ingest::IngestError;
use crate::kb::KbError;
use crate::pipeline::StageName;
use crate::relevance::RelevanceError;
use crate::scriptgen::ScriptError;
use crate::topics::TopicError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Ingest(#[from] IngestError),

    #[error(transparent)]
    Relevance(#[from] RelevanceError),

    #[error(transparent)]
    Rules(#[from] RuleError),

    #[error(transparent)]
    Kb(#[from] KbError),

    #[error(transparent)]
    Topic(#[from] TopicError),

    #[error(transparent)]
    Script(#[from] ScriptError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error(transparent)]
    Fixture(#[from] FixtureError),

    #[error("run stopped during {failed}; completed stages: {}", display_stages(completed))]
    PartialRun {
        completed: Vec<StageName>,
        failed: StageName,
        #[source]
        cause: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn display_stages(stages: &[StageName]) -> String {
    if stages.is_empty() {
        return "none".to_string();
    }
    stages
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
