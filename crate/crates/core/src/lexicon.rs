//! Verbal roots with their kāraka expectancy, the prefix inventory,
//! dictionary headwords with tagged senses, and L-word composition.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::karaka::KarakaRole;
use crate::ontology::{Ontology, TagId};
use crate::records::{parse_records, write_records, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SemanticClass {
    Gati,
    Bhaya,
    Raksana,
    Kutsa,
    Anadara,
    Other(String),
}

impl SemanticClass {
    pub fn name(&self) -> &str {
        match self {
            SemanticClass::Gati => "gati",
            SemanticClass::Bhaya => "bhaya",
            SemanticClass::Raksana => "rakṣaṇa",
            SemanticClass::Kutsa => "kutsā",
            SemanticClass::Anadara => "anādara",
            SemanticClass::Other(label) => label,
        }
    }

    fn from_name(name: &str) -> Self {
        match name {
            "gati" => SemanticClass::Gati,
            "bhaya" => SemanticClass::Bhaya,
            "rakṣaṇa" => SemanticClass::Raksana,
            "kutsā" => SemanticClass::Kutsa,
            "anādara" => SemanticClass::Anadara,
            other => SemanticClass::Other(other.to_string()),
        }
    }
}

impl Serialize for SemanticClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for SemanticClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(SemanticClass::from_name(&String::deserialize(deserializer)?))
    }
}

/// A verbal root together with its ākāṅkṣā (expected kārakas) and the
/// ontological requirement each expected role places on its filler.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DhatuEntry {
    pub root: String,
    pub artha: String,
    pub semantic_class: SemanticClass,
    pub expectancy: BTreeSet<KarakaRole>,
    /// Any-of requirement per role; a missing or empty entry means unconstrained.
    pub role_requirements: BTreeMap<KarakaRole, BTreeSet<TagId>>,
    pub provenance: Option<String>,
    /// Set for roots whose printed form could not be confirmed.
    pub unverified: bool,
    pub note: Option<String>,
}

impl DhatuEntry {
    pub fn expects(&self, role: KarakaRole) -> bool {
        self.expectancy.contains(&role)
    }

    pub fn requirement(&self, role: KarakaRole) -> Option<&BTreeSet<TagId>> {
        self.role_requirements.get(&role).filter(|r| !r.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prefix {
    pub form: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexemeSense {
    pub sense_id: u32,
    pub gloss: String,
    pub tag: TagId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexemeEntry {
    pub headword: String,
    pub senses: Vec<LexemeSense>,
}

impl LexemeEntry {
    pub fn sense(&self, sense_id: u32) -> Option<&LexemeSense> {
        self.senses.iter().find(|s| s.sense_id == sense_id)
    }
}

/// The left-hand side of a rule: an optional prefix plus a root, with the
/// annotator-supplied surface form after sandhi.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LWord {
    pub prefix: Option<String>,
    pub dhatu: String,
    pub sandhi_form: String,
    pub changed_artha: Option<String>,
}

impl LWord {
    /// Identity used for duplicate detection; the gloss is not part of it.
    pub fn key(&self) -> (Option<&str>, &str, &str) {
        (self.prefix.as_deref(), &self.dhatu, &self.sandhi_form)
    }

    pub fn bare(root: &str) -> Self {
        LWord {
            prefix: None,
            dhatu: root.to_string(),
            sandhi_form: root.to_string(),
            changed_artha: None,
        }
    }
}

// Sorted by surface form first, which is how query views list L-words.
impl Ord for LWord {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.sandhi_form, &self.prefix, &self.dhatu, &self.changed_artha).cmp(&(
            &other.sandhi_form,
            &other.prefix,
            &other.dhatu,
            &other.changed_artha,
        ))
    }
}

impl PartialOrd for LWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.prefix {
            Some(p) => write!(f, "{} ({}+{})", self.sandhi_form, p, self.dhatu),
            None => f.write_str(&self.sandhi_form),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("line {line}: duplicate {kind} `{key}`")]
    Duplicate { line: usize, kind: &'static str, key: String },
    #[error("dhātu `{root}`: expectancy is empty")]
    EmptyExpectancy { root: String },
    #[error("dhātu `{root}`: requirement given for {role}, which is not in its expectancy")]
    RequirementOutsideExpectancy { root: String, role: KarakaRole },
    #[error("{record}: unknown ontology tag `{tag}`")]
    UnknownTag { record: String, tag: TagId },
    #[error("headword `{headword}`: {problem}")]
    BadSenses { headword: String, problem: String },
    #[error("line {line}: empty prefix")]
    EmptyPrefix { line: usize },
    #[error("{kind} `{key}` not found")]
    NotFound { kind: &'static str, key: String },
    #[error("prefix `{prefix}` with `{root}` needs a manually entered sandhi form")]
    MissingSandhi { prefix: String, root: String },
    #[error("without a prefix the sandhi form must equal the root `{root}`, got `{sandhi_form}`")]
    SandhiMismatch { root: String, sandhi_form: String },
}

pub(crate) fn nfc(s: &str) -> String {
    s.nfc().collect()
}

fn check_tag(ontology: &Ontology, record: impl FnOnce() -> String, tag: &TagId) -> Result<(), LexiconError> {
    if ontology.contains(tag) {
        Ok(())
    } else {
        Err(LexiconError::UnknownTag { record: record(), tag: tag.clone() })
    }
}

pub fn load_dhatus(document: &str, ontology: &Ontology) -> Result<BTreeMap<String, DhatuEntry>, LexiconError> {
    let mut out = BTreeMap::new();
    for (line, entry) in parse_records::<DhatuEntry>(document)? {
        if entry.expectancy.is_empty() {
            return Err(LexiconError::EmptyExpectancy { root: entry.root });
        }
        for (role, tags) in &entry.role_requirements {
            if !entry.expects(*role) {
                return Err(LexiconError::RequirementOutsideExpectancy {
                    root: entry.root.clone(),
                    role: *role,
                });
            }
            for tag in tags {
                check_tag(ontology, || format!("dhātu `{}` ({role})", entry.root), tag)?;
            }
        }
        if out.contains_key(&entry.root) {
            return Err(LexiconError::Duplicate { line, kind: "dhātu", key: entry.root });
        }
        out.insert(entry.root.clone(), entry);
    }
    Ok(out)
}

pub fn load_prefixes(document: &str) -> Result<Vec<Prefix>, LexiconError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, prefix) in parse_records::<Prefix>(document)? {
        if prefix.form.trim().is_empty() {
            return Err(LexiconError::EmptyPrefix { line });
        }
        if !seen.insert(prefix.form.clone()) {
            return Err(LexiconError::Duplicate { line, kind: "prefix", key: prefix.form });
        }
        out.push(prefix);
    }
    Ok(out)
}

pub fn load_lexemes(document: &str, ontology: &Ontology) -> Result<BTreeMap<String, LexemeEntry>, LexiconError> {
    let mut out = BTreeMap::new();
    for (line, entry) in parse_records::<LexemeEntry>(document)? {
        if entry.senses.is_empty() {
            return Err(LexiconError::BadSenses {
                headword: entry.headword,
                problem: "no senses".into(),
            });
        }
        for (i, sense) in entry.senses.iter().enumerate() {
            if sense.sense_id as usize != i + 1 {
                return Err(LexiconError::BadSenses {
                    headword: entry.headword.clone(),
                    problem: format!("sense ids must run 1, 2, …; found {} at position {}", sense.sense_id, i + 1),
                });
            }
            check_tag(ontology, || format!("`{}` sense {}", entry.headword, sense.sense_id), &sense.tag)?;
        }
        if out.contains_key(&entry.headword) {
            return Err(LexiconError::Duplicate { line, kind: "headword", key: entry.headword });
        }
        out.insert(entry.headword.clone(), entry);
    }
    Ok(out)
}

/// Dhātu inventory, prefix inventory and dictionary, validated against one ontology.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    dhatus: BTreeMap<String, DhatuEntry>,
    prefixes: Vec<Prefix>,
    lexemes: BTreeMap<String, LexemeEntry>,
}

impl Lexicon {
    pub fn load(
        ontology: &Ontology,
        dhatus: &str,
        prefixes: &str,
        lexemes: &str,
    ) -> Result<Self, LexiconError> {
        Ok(Lexicon {
            dhatus: load_dhatus(dhatus, ontology)?,
            prefixes: load_prefixes(prefixes)?,
            lexemes: load_lexemes(lexemes, ontology)?,
        })
    }

    pub fn from_parts(
        dhatus: BTreeMap<String, DhatuEntry>,
        prefixes: Vec<Prefix>,
        lexemes: BTreeMap<String, LexemeEntry>,
    ) -> Self {
        Lexicon { dhatus, prefixes, lexemes }
    }

    pub fn get_dhatu(&self, root: &str) -> Result<&DhatuEntry, LexiconError> {
        self.dhatus
            .get(root)
            .or_else(|| self.dhatus.get(&nfc(root)))
            .ok_or_else(|| LexiconError::NotFound { kind: "dhātu", key: root.to_string() })
    }

    pub fn get_lexeme(&self, headword: &str) -> Result<&LexemeEntry, LexiconError> {
        self.lexemes
            .get(headword)
            .or_else(|| self.lexemes.get(&nfc(headword)))
            .ok_or_else(|| LexiconError::NotFound { kind: "headword", key: headword.to_string() })
    }

    pub fn has_prefix(&self, form: &str) -> bool {
        self.prefixes.iter().any(|p| p.form == form)
    }

    /// Dhātus sorted by root.
    pub fn dhatus(&self) -> impl Iterator<Item = &DhatuEntry> {
        self.dhatus.values()
    }

    /// Prefixes in inventory order.
    pub fn prefixes(&self) -> &[Prefix] {
        &self.prefixes
    }

    /// Lexemes sorted by headword.
    pub fn lexemes(&self) -> impl Iterator<Item = &LexemeEntry> {
        self.lexemes.values()
    }

    /// Builds an L-word. Sandhi is never computed: a prefixed root needs the
    /// surface form supplied by the annotator.
    pub fn compose_lword(
        &self,
        prefix: Option<&str>,
        root: &str,
        sandhi_form: Option<&str>,
        changed_artha: Option<&str>,
    ) -> Result<LWord, LexiconError> {
        let dhatu = self.get_dhatu(root)?;
        let prefix = prefix.map(str::trim).filter(|p| !p.is_empty());
        let sandhi_form = sandhi_form.map(str::trim).filter(|s| !s.is_empty());
        let changed_artha = changed_artha.map(str::trim).filter(|s| !s.is_empty()).map(String::from);
        match prefix {
            Some(p) => {
                if !self.has_prefix(p) {
                    return Err(LexiconError::NotFound { kind: "prefix", key: p.to_string() });
                }
                let sandhi = sandhi_form.ok_or_else(|| LexiconError::MissingSandhi {
                    prefix: p.to_string(),
                    root: dhatu.root.clone(),
                })?;
                Ok(LWord {
                    prefix: Some(p.to_string()),
                    dhatu: dhatu.root.clone(),
                    sandhi_form: sandhi.to_string(),
                    changed_artha,
                })
            }
            None => {
                if let Some(s) = sandhi_form {
                    if s != dhatu.root {
                        return Err(LexiconError::SandhiMismatch {
                            root: dhatu.root.clone(),
                            sandhi_form: s.to_string(),
                        });
                    }
                }
                Ok(LWord {
                    prefix: None,
                    dhatu: dhatu.root.clone(),
                    sandhi_form: dhatu.root.clone(),
                    changed_artha,
                })
            }
        }
    }

    pub fn export_dhatus(&self) -> String {
        write_records(self.dhatus.values())
    }

    pub fn export_prefixes(&self) -> String {
        write_records(&self.prefixes)
    }

    pub fn export_lexemes(&self) -> String {
        write_records(self.lexemes.values())
    }
}
