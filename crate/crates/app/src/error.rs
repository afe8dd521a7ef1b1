use std::process::ExitCode;

use qgen_core::corpus::{CorpusError, LexiconError};
use qgen_core::grammargen::GrammarError;
use qgen_core::pipeline::GenerateError;
use qgen_core::quizengine::BankError;
use qgen_core::sim::SimError;

use crate::store::StoreError;

/// CLI failure, mapped to an exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
            CliError::Usage(_) => 64,
        })
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Io(e.to_string())
        }
    }
}

impl From<LexiconError> for CliError {
    fn from(e: LexiconError) -> Self {
        match e {
            LexiconError::Io { .. } => CliError::Io(format!("lexicon: {e}")),
            _ => CliError::Validation(format!("lexicon: {e}")),
        }
    }
}

impl From<GrammarError> for CliError {
    fn from(e: GrammarError) -> Self {
        match e {
            GrammarError::Io { .. } => CliError::Io(format!("registry: {e}")),
            _ => CliError::Validation(format!("registry: {e}")),
        }
    }
}

impl From<BankError> for CliError {
    fn from(e: BankError) -> Self {
        match e {
            BankError::Io { .. } => CliError::Io(format!("bank: {e}")),
            _ => CliError::Validation(format!("bank: {e}")),
        }
    }
}

impl From<GenerateError> for CliError {
    fn from(e: GenerateError) -> Self {
        match e {
            GenerateError::Grammar(e) => e.into(),
            GenerateError::Bank(e) => e.into(),
            GenerateError::Read(e) => CliError::Validation(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}
