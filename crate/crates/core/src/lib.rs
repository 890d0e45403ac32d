//! Kāraka-yogyatā engine for Sanskrit.
//!
//! The crate stores compatibility rules between verbal roots and the senses
//! of dictionary words, enumerates the candidate kāraka analyses of a
//! morphologically ambiguous sentence, and prunes them with expectancy and
//! compatibility constraints.

pub mod analyzer;
pub mod karaka;
pub mod lexicon;
pub mod ontology;
pub mod records;
pub mod rulestore;
pub mod seed;
pub mod translit;

use std::path::Path;
use std::sync::Arc;

pub use analyzer::{Analyzer, Mode};
pub use karaka::KarakaRole;
pub use lexicon::{DhatuEntry, LWord, LexemeEntry, LexemeSense, Lexicon, LexiconError, Prefix};
pub use ontology::{Ontology, OntologyError, OntologyTag, TagId};
pub use rulestore::{RuleDraft, RuleId, RuleStore, StoreError, YogyataRule};
pub use translit::{transliterate, Scheme};

/// Journal of rule mutations inside a data directory.
pub const JOURNAL_FILE: &str = "rules.journal";

/// The immutable resources every component shares.
#[derive(Debug, Clone)]
pub struct Resources {
    pub ontology: Arc<Ontology>,
    pub lexicon: Arc<Lexicon>,
}

#[derive(Debug, thiserror::Error)]
pub enum ResourceError {
    #[error("{file}: {source}")]
    Io { file: String, source: std::io::Error },
    #[error("{file}: {source}")]
    Ontology { file: String, source: OntologyError },
    #[error("{file}: {source}")]
    Lexicon { file: String, source: LexiconError },
}

impl Resources {
    /// Loads `ontology.jsonl`, `dhatus.jsonl`, `prefixes.jsonl` and
    /// `lexicon.jsonl` from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, ResourceError> {
        let read = |name: &str| {
            std::fs::read_to_string(dir.join(name)).map_err(|source| ResourceError::Io {
                file: dir.join(name).display().to_string(),
                source,
            })
        };
        let ontology = Ontology::load(&read("ontology.jsonl")?).map_err(|source| ResourceError::Ontology {
            file: "ontology.jsonl".into(),
            source,
        })?;
        let dhatus = read("dhatus.jsonl")?;
        let prefixes = read("prefixes.jsonl")?;
        let lexemes = read("lexicon.jsonl")?;
        let lex_err = |file: &str| {
            let file = file.to_string();
            move |source| ResourceError::Lexicon { file, source }
        };
        let lexicon = Lexicon::from_parts(
            lexicon::load_dhatus(&dhatus, &ontology).map_err(lex_err("dhatus.jsonl"))?,
            lexicon::load_prefixes(&prefixes).map_err(lex_err("prefixes.jsonl"))?,
            lexicon::load_lexemes(&lexemes, &ontology).map_err(lex_err("lexicon.jsonl"))?,
        );
        Ok(Resources {
            ontology: Arc::new(ontology),
            lexicon: Arc::new(lexicon),
        })
    }

    /// Opens the journal-backed rule store of a data directory.
    pub fn open_store(&self, dir: &Path) -> Result<RuleStore, StoreError> {
        RuleStore::open(&dir.join(JOURNAL_FILE), self.lexicon.clone())
    }

    pub fn analyzer(&self) -> Analyzer {
        Analyzer::new(self.ontology.clone(), self.lexicon.clone())
    }
}
