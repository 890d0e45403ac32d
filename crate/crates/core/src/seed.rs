//! Seed data bundled with the crate.

use std::io;
use std::path::Path;
use std::sync::Arc;

use crate::{Lexicon, Ontology, Resources};

pub const ONTOLOGY: &str = include_str!("../data/ontology.jsonl");
pub const DHATUS: &str = include_str!("../data/dhatus.jsonl");
pub const PREFIXES: &str = include_str!("../data/prefixes.jsonl");
pub const LEXICON: &str = include_str!("../data/lexicon.jsonl");
/// The six kaṃsa rules of the apādāna case study.
pub const RULES: &str = include_str!("../data/rules.jsonl");

/// File names used when the seed is written to or read from a directory.
pub const FILES: [(&str, &str); 5] = [
    ("ontology.jsonl", ONTOLOGY),
    ("dhatus.jsonl", DHATUS),
    ("prefixes.jsonl", PREFIXES),
    ("lexicon.jsonl", LEXICON),
    ("rules.jsonl", RULES),
];

/// Ontology and lexicon loaded from the bundled seed.
pub fn resources() -> Resources {
    let ontology = Ontology::load(ONTOLOGY).expect("bundled ontology is valid");
    let lexicon = Lexicon::load(&ontology, DHATUS, PREFIXES, LEXICON).expect("bundled lexicon is valid");
    Resources {
        ontology: Arc::new(ontology),
        lexicon: Arc::new(lexicon),
    }
}

/// Example sentences with their full morphological ambiguity, by file stem.
pub const SENTENCES: [(&str, &str); 2] = [
    ("yanam-vanam-gacchati", include_str!("../data/sentences/yanam-vanam-gacchati.json")),
    ("sitam-ghatam-sprsati", include_str!("../data/sentences/sitam-ghatam-sprsati.json")),
];

/// Parses one of [`SENTENCES`] by name.
pub fn sentence(name: &str) -> Option<crate::analyzer::SentenceInput> {
    SENTENCES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, doc)| serde_json::from_str(doc).expect("bundled sentence is valid"))
}

/// Writes every seed file that `dir` does not have yet; existing files are
/// left alone. Returns the names written.
pub fn install(dir: &Path) -> io::Result<Vec<&'static str>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, content) in FILES {
        let path = dir.join(name);
        if !path.exists() {
            std::fs::write(path, content)?;
            written.push(name);
        }
    }
    Ok(written)
}
