//! Yogyatā rule store.
//!
//! Rules bind an L-word to one sense of a dictionary headword and list the
//! kāraka roles that sense can fill. The store keeps every rule ever created;
//! deletion leaves a tombstone. When opened on a path, each mutation is
//! appended to a journal and synced before it becomes visible.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::Path;
use std::sync::{Arc, RwLock};

use chrono::{DateTime, SubsecRound, Utc};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::karaka::{format_roles, KarakaRole};
use crate::lexicon::{LWord, Lexicon, LexiconError};
use crate::records::{parse_records, write_records, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleId(pub String);

impl RuleId {
    fn from_seq(seq: u64) -> Self {
        RuleId(format!("r{seq:06}"))
    }

    fn seq(&self) -> Option<u64> {
        self.0.strip_prefix('r')?.parse().ok()
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

mod iso_seconds {
    use chrono::{DateTime, SecondsFormat, SubsecRound, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(at: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&at.to_rfc3339_opts(SecondsFormat::Secs, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&raw)
            .map(|t| t.with_timezone(&Utc).trunc_subsecs(0))
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct YogyataRule {
    pub id: RuleId,
    pub l_word: LWord,
    pub headword: String,
    pub sense_id: u32,
    pub roles: BTreeSet<KarakaRole>,
    pub comment: Option<String>,
    pub annotator: String,
    #[serde(with = "iso_seconds")]
    pub created_at: DateTime<Utc>,
}

/// What an annotator submits; the store assigns id, annotator and timestamp.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RuleDraft {
    #[serde(default)]
    pub prefix: Option<String>,
    pub dhatu: String,
    #[serde(default)]
    pub sandhi_form: Option<String>,
    #[serde(default)]
    pub changed_artha: Option<String>,
    pub headword: String,
    pub sense_id: u32,
    pub roles: BTreeSet<KarakaRole>,
    #[serde(default)]
    pub comment: Option<String>,
}

/// Flat export record. Field order is part of the file format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleRecord {
    pub id: RuleId,
    pub prefix: Option<String>,
    pub dhatu: String,
    pub sandhi_form: String,
    pub changed_artha: Option<String>,
    pub headword: String,
    pub sense_id: u32,
    pub roles: BTreeSet<KarakaRole>,
    pub comment: Option<String>,
    pub annotator: String,
    #[serde(with = "iso_seconds")]
    pub created_at: DateTime<Utc>,
}

impl From<&YogyataRule> for RuleRecord {
    fn from(rule: &YogyataRule) -> Self {
        RuleRecord {
            id: rule.id.clone(),
            prefix: rule.l_word.prefix.clone(),
            dhatu: rule.l_word.dhatu.clone(),
            sandhi_form: rule.l_word.sandhi_form.clone(),
            changed_artha: rule.l_word.changed_artha.clone(),
            headword: rule.headword.clone(),
            sense_id: rule.sense_id,
            roles: rule.roles.clone(),
            comment: rule.comment.clone(),
            annotator: rule.annotator.clone(),
            created_at: rule.created_at,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tombstone {
    pub deleted_by: String,
    #[serde(with = "iso_seconds")]
    pub deleted_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("{role} is not in the expectancy of `{dhatu}` {}", format_roles(.expectancy))]
    RoleOutsideExpectancy {
        role: KarakaRole,
        dhatu: String,
        expectancy: BTreeSet<KarakaRole>,
    },
    #[error("roles must not be empty")]
    EmptyRoles,
    #[error("annotator must not be empty")]
    EmptyAnnotator,
    #[error("duplicate rule id `{0}`")]
    DuplicateId(RuleId),
    #[error("{0}")]
    LWord(LexiconError),
}

impl ValidationError {
    /// Name of the draft field the error refers to.
    pub fn field(&self) -> &'static str {
        match self {
            ValidationError::RoleOutsideExpectancy { .. } | ValidationError::EmptyRoles => "roles",
            ValidationError::EmptyAnnotator => "annotator",
            ValidationError::DuplicateId(_) => "id",
            ValidationError::LWord(LexiconError::MissingSandhi { .. })
            | ValidationError::LWord(LexiconError::SandhiMismatch { .. }) => "sandhi_form",
            ValidationError::LWord(_) => "dhatu",
        }
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("validation failed on `{field}`: {err}", field = .0.field(), err = .0)]
    Validation(ValidationError),
    #[error("record {index}: {source}")]
    InvalidRecord { index: usize, source: Box<StoreError> },
    #[error("{kind} `{key}` not found")]
    NotFound { kind: &'static str, key: String },
    #[error("an active rule for {l_word} / {headword} sense {sense_id} already exists as {existing}")]
    Duplicate {
        existing: RuleId,
        l_word: String,
        headword: String,
        sense_id: u32,
    },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("journal line {line} is corrupt: {message}")]
    Corrupt { line: usize, message: String },
    #[error("journal i/o: {0}")]
    Io(#[from] io::Error),
}

impl StoreError {
    /// Strips the record wrapper added by bulk import.
    pub fn root_cause(&self) -> &StoreError {
        match self {
            StoreError::InvalidRecord { source, .. } => source.root_cause(),
            other => other,
        }
    }
}

impl From<LexiconError> for StoreError {
    fn from(e: LexiconError) -> Self {
        match e {
            LexiconError::NotFound { kind, key } => StoreError::NotFound { kind, key },
            other => StoreError::Validation(ValidationError::LWord(other)),
        }
    }
}

/// Aggregation behind the per-lexeme view: L-word → sense → roles.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LexemeRelations(pub BTreeMap<LWord, BTreeMap<u32, BTreeSet<KarakaRole>>>);

impl LexemeRelations {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Looks up by bare surface form.
    pub fn for_sandhi(&self, sandhi_form: &str) -> Option<&BTreeMap<u32, BTreeSet<KarakaRole>>> {
        self.0.iter().find(|(l, _)| l.sandhi_form == sandhi_form).map(|(_, v)| v)
    }
}

impl Serialize for LexemeRelations {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a> {
            l_word: &'a LWord,
            senses: &'a BTreeMap<u32, BTreeSet<KarakaRole>>,
        }
        let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
        for (l_word, senses) in &self.0 {
            seq.serialize_element(&Entry { l_word, senses })?;
        }
        seq.end()
    }
}

/// Read-only view of the active rules at one point in time.
#[derive(Debug, Clone, Default)]
pub struct RuleSnapshot {
    rules: Vec<YogyataRule>,
}

impl RuleSnapshot {
    pub fn new(mut rules: Vec<YogyataRule>) -> Self {
        rules.sort_by(|a, b| (a.created_at, &a.id).cmp(&(b.created_at, &b.id)));
        RuleSnapshot { rules }
    }

    pub fn rules(&self) -> &[YogyataRule] {
        &self.rules
    }

    /// First active rule whose L-word surface form, headword and sense match.
    pub fn find(&self, sandhi_form: &str, headword: &str, sense_id: u32) -> Option<&YogyataRule> {
        self.rules
            .iter()
            .find(|r| r.l_word.sandhi_form == sandhi_form && r.headword == headword && r.sense_id == sense_id)
    }

    /// An L-word with the given surface form, if any rule uses one.
    pub fn lword_by_sandhi(&self, sandhi_form: &str) -> Option<&LWord> {
        self.rules
            .iter()
            .map(|r| &r.l_word)
            .find(|l| l.sandhi_form == sandhi_form)
    }
}

pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
enum JournalEntry {
    Create { rule: RuleRecord },
    Delete { id: RuleId, tombstone: Tombstone },
    Import { rules: Vec<RuleRecord> },
}

type TripleKey = (Option<String>, String, String, String, u32);

fn triple_key(l_word: &LWord, headword: &str, sense_id: u32) -> TripleKey {
    (
        l_word.prefix.clone(),
        l_word.dhatu.clone(),
        l_word.sandhi_form.clone(),
        headword.to_string(),
        sense_id,
    )
}

#[derive(Default)]
struct State {
    rules: BTreeMap<RuleId, (YogyataRule, Option<Tombstone>)>,
    active: HashMap<TripleKey, RuleId>,
    next_seq: u64,
    journal: Option<File>,
}

impl State {
    fn insert(&mut self, rule: YogyataRule) {
        if let Some(seq) = rule.id.seq() {
            self.next_seq = self.next_seq.max(seq + 1);
        }
        self.active
            .insert(triple_key(&rule.l_word, &rule.headword, rule.sense_id), rule.id.clone());
        self.rules.insert(rule.id.clone(), (rule, None));
    }

    fn tombstone(&mut self, id: &RuleId, tombstone: Tombstone) -> Result<(), StoreError> {
        let (rule, slot) = match self.rules.get_mut(id) {
            Some((rule, slot @ None)) => (rule, slot),
            _ => return Err(StoreError::NotFound { kind: "rule", key: id.0.clone() }),
        };
        self.active.remove(&triple_key(&rule.l_word, &rule.headword, rule.sense_id));
        *slot = Some(tombstone);
        Ok(())
    }

    fn append(&mut self, entry: &JournalEntry) -> Result<(), StoreError> {
        if let Some(file) = self.journal.as_mut() {
            let mut line = serde_json::to_string(entry).expect("journal entry serializes");
            line.push('\n');
            file.write_all(line.as_bytes())?;
            file.sync_data()?;
        }
        Ok(())
    }

    fn active_rules(&self) -> impl Iterator<Item = &YogyataRule> {
        self.rules.values().filter(|(_, t)| t.is_none()).map(|(r, _)| r)
    }
}

pub struct RuleStore {
    lexicon: Arc<Lexicon>,
    state: RwLock<State>,
    clock: Clock,
}

impl fmt::Debug for RuleStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RuleStore").finish_non_exhaustive()
    }
}

impl RuleStore {
    /// A store that lives only in memory.
    pub fn in_memory(lexicon: Arc<Lexicon>) -> Self {
        RuleStore {
            lexicon,
            state: RwLock::new(State { next_seq: 1, ..State::default() }),
            clock: Arc::new(Utc::now),
        }
    }

    /// Opens (or creates) a journal-backed store and replays it.
    pub fn open(path: &Path, lexicon: Arc<Lexicon>) -> Result<Self, StoreError> {
        let store = RuleStore::in_memory(lexicon);
        let existing = match std::fs::read_to_string(path) {
            Ok(s) => s,
            Err(e) if e.kind() == io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(e.into()),
        };
        {
            let mut state = store.state.write().unwrap();
            replay(&store, &mut state, &existing)?;
            let file = OpenOptions::new().create(true).append(true).open(path)?;
            if !existing.is_empty() && !existing.ends_with('\n') {
                // Drop the torn tail so the next append starts on a fresh line.
                let keep = existing.rfind('\n').map_or(0, |i| i + 1);
                file.set_len(keep as u64)?;
            }
            state.journal = Some(file);
        }
        Ok(store)
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    pub fn lexicon(&self) -> &Arc<Lexicon> {
        &self.lexicon
    }

    fn now(&self) -> DateTime<Utc> {
        (self.clock)().trunc_subsecs(0)
    }

    fn validate(
        &self,
        draft: &RuleDraft,
        annotator: &str,
    ) -> Result<LWord, StoreError> {
        let l_word = self.lexicon.compose_lword(
            draft.prefix.as_deref(),
            &draft.dhatu,
            draft.sandhi_form.as_deref(),
            draft.changed_artha.as_deref(),
        )?;
        let lexeme = self.lexicon.get_lexeme(&draft.headword)?;
        if lexeme.sense(draft.sense_id).is_none() {
            return Err(StoreError::NotFound {
                kind: "sense",
                key: format!("{} #{}", draft.headword, draft.sense_id),
            });
        }
        if draft.roles.is_empty() {
            return Err(StoreError::Validation(ValidationError::EmptyRoles));
        }
        let dhatu = self.lexicon.get_dhatu(&l_word.dhatu)?;
        if let Some(role) = draft.roles.iter().find(|r| !dhatu.expects(**r)) {
            return Err(StoreError::Validation(ValidationError::RoleOutsideExpectancy {
                role: *role,
                dhatu: dhatu.root.clone(),
                expectancy: dhatu.expectancy.clone(),
            }));
        }
        if annotator.trim().is_empty() {
            return Err(StoreError::Validation(ValidationError::EmptyAnnotator));
        }
        Ok(l_word)
    }

    fn check_duplicate(state: &State, key: &TripleKey, l_word: &LWord) -> Result<(), StoreError> {
        match state.active.get(key) {
            Some(existing) => Err(StoreError::Duplicate {
                existing: existing.clone(),
                l_word: l_word.to_string(),
                headword: key.3.clone(),
                sense_id: key.4,
            }),
            None => Ok(()),
        }
    }

    pub fn create_rule(&self, draft: RuleDraft, annotator: &str) -> Result<YogyataRule, StoreError> {
        let l_word = self.validate(&draft, annotator)?;
        let headword = self.lexicon.get_lexeme(&draft.headword)?.headword.clone();
        let key = triple_key(&l_word, &headword, draft.sense_id);
        let mut state = self.state.write().unwrap();
        Self::check_duplicate(&state, &key, &l_word)?;
        let rule = YogyataRule {
            id: RuleId::from_seq(state.next_seq),
            l_word,
            headword,
            sense_id: draft.sense_id,
            roles: draft.roles,
            comment: draft.comment.filter(|c| !c.trim().is_empty()),
            annotator: annotator.to_string(),
            created_at: self.now(),
        };
        state.append(&JournalEntry::Create { rule: RuleRecord::from(&rule) })?;
        state.insert(rule.clone());
        Ok(rule)
    }

    pub fn get_rule(&self, id: &RuleId) -> Option<YogyataRule> {
        let state = self.state.read().unwrap();
        state
            .rules
            .get(id)
            .filter(|(_, t)| t.is_none())
            .map(|(r, _)| r.clone())
    }

    /// Active rules matching both filters, oldest first. The L-word filter
    /// matches the surface form; `None` is a wildcard.
    pub fn get_rules(&self, l_word: Option<&str>, headword: Option<&str>) -> Vec<YogyataRule> {
        let state = self.state.read().unwrap();
        let rules = state
            .active_rules()
            .filter(|r| l_word.is_none_or(|l| r.l_word.sandhi_form == l))
            .filter(|r| headword.is_none_or(|h| r.headword == h))
            .cloned()
            .collect();
        RuleSnapshot::new(rules).rules
    }

    /// Soft delete: the rule disappears from every query, its tombstone stays.
    pub fn delete_rule(&self, id: &RuleId, annotator: &str) -> Result<Tombstone, StoreError> {
        let mut state = self.state.write().unwrap();
        if !matches!(state.rules.get(id), Some((_, None))) {
            return Err(StoreError::NotFound { kind: "rule", key: id.0.clone() });
        }
        let tombstone = Tombstone {
            deleted_by: annotator.to_string(),
            deleted_at: self.now(),
        };
        state.append(&JournalEntry::Delete { id: id.clone(), tombstone: tombstone.clone() })?;
        state.tombstone(id, tombstone.clone())?;
        Ok(tombstone)
    }

    pub fn tombstone(&self, id: &RuleId) -> Option<Tombstone> {
        let state = self.state.read().unwrap();
        state.rules.get(id).and_then(|(_, t)| t.clone())
    }

    pub fn relations_for_lexeme(&self, headword: &str) -> Result<LexemeRelations, StoreError> {
        let headword = self.lexicon.get_lexeme(headword)?.headword.clone();
        let mut out = LexemeRelations::default();
        for rule in self.get_rules(None, Some(&headword)) {
            out.0
                .entry(rule.l_word)
                .or_default()
                .entry(rule.sense_id)
                .or_default()
                .extend(rule.roles);
        }
        Ok(out)
    }

    /// Distinct L-words with at least one rule granting `role`, sorted by surface form.
    pub fn dhatus_for_karaka(&self, role: KarakaRole) -> Vec<LWord> {
        let state = self.state.read().unwrap();
        let set: BTreeSet<LWord> = state
            .active_rules()
            .filter(|r| r.roles.contains(&role))
            .map(|r| r.l_word.clone())
            .collect();
        set.into_iter().collect()
    }

    pub fn snapshot(&self) -> RuleSnapshot {
        let state = self.state.read().unwrap();
        RuleSnapshot::new(state.active_rules().cloned().collect())
    }

    pub fn active_count(&self) -> usize {
        self.state.read().unwrap().active.len()
    }

    /// Deterministic export of the active rules, one record per line.
    pub fn export_rules(&self) -> String {
        let records: Vec<RuleRecord> = self.get_rules(None, None).iter().map(RuleRecord::from).collect();
        write_records(&records)
    }

    /// All-or-nothing import. Every record is validated as if created by its
    /// annotator; ids and timestamps are preserved.
    pub fn import_rules(&self, document: &str) -> Result<usize, StoreError> {
        let records: Vec<RuleRecord> = parse_records(document)?.into_iter().map(|(_, r)| r).collect();
        self.import_records(records, false)
    }

    /// Like [`RuleStore::import_rules`], but records whose id the store already
    /// knows (active or deleted) are skipped. Used for repeatable seeding.
    pub fn import_new(&self, document: &str) -> Result<usize, StoreError> {
        let records: Vec<RuleRecord> = parse_records(document)?.into_iter().map(|(_, r)| r).collect();
        self.import_records(records, true)
    }

    fn import_records(&self, records: Vec<RuleRecord>, skip_known: bool) -> Result<usize, StoreError> {
        let mut state = self.state.write().unwrap();
        let records: Vec<RuleRecord> = if skip_known {
            records.into_iter().filter(|r| !state.rules.contains_key(&r.id)).collect()
        } else {
            records
        };
        let rules = self.validate_batch(&state, &records)?;
        if rules.is_empty() {
            return Ok(0);
        }
        state.append(&JournalEntry::Import { rules: records })?;
        let n = rules.len();
        for rule in rules {
            state.insert(rule);
        }
        Ok(n)
    }

    fn validate_batch(&self, state: &State, records: &[RuleRecord]) -> Result<Vec<YogyataRule>, StoreError> {
        let mut ids = HashSet::new();
        let mut keys = HashSet::new();
        let mut out = Vec::with_capacity(records.len());
        for (index, record) in records.iter().enumerate() {
            let wrap = |e: StoreError| StoreError::InvalidRecord { index: index + 1, source: Box::new(e) };
            let rule = self.record_to_rule(record).map_err(wrap)?;
            if state.rules.contains_key(&rule.id) || !ids.insert(rule.id.clone()) {
                return Err(wrap(StoreError::Validation(ValidationError::DuplicateId(rule.id))));
            }
            let key = triple_key(&rule.l_word, &rule.headword, rule.sense_id);
            Self::check_duplicate(state, &key, &rule.l_word).map_err(wrap)?;
            if !keys.insert(key.clone()) {
                return Err(wrap(StoreError::Duplicate {
                    existing: rule.id.clone(),
                    l_word: rule.l_word.to_string(),
                    headword: key.3,
                    sense_id: key.4,
                }));
            }
            out.push(rule);
        }
        Ok(out)
    }

    fn record_to_rule(&self, record: &RuleRecord) -> Result<YogyataRule, StoreError> {
        let draft = RuleDraft {
            prefix: record.prefix.clone(),
            dhatu: record.dhatu.clone(),
            sandhi_form: Some(record.sandhi_form.clone()),
            changed_artha: record.changed_artha.clone(),
            headword: record.headword.clone(),
            sense_id: record.sense_id,
            roles: record.roles.clone(),
            comment: record.comment.clone(),
        };
        let l_word = self.validate(&draft, &record.annotator)?;
        Ok(YogyataRule {
            id: record.id.clone(),
            l_word,
            headword: record.headword.clone(),
            sense_id: record.sense_id,
            roles: record.roles.clone(),
            comment: record.comment.clone(),
            annotator: record.annotator.clone(),
            created_at: record.created_at,
        })
    }
}

fn replay(store: &RuleStore, state: &mut State, journal: &str) -> Result<(), StoreError> {
    let torn_tail = !journal.is_empty() && !journal.ends_with('\n');
    let lines: Vec<&str> = journal.lines().collect();
    for (idx, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let corrupt = |message: String| StoreError::Corrupt { line: idx + 1, message };
        let entry: JournalEntry = match serde_json::from_str(line) {
            Ok(e) => e,
            // A crash mid-append leaves an unterminated last line; that write never completed.
            Err(_) if torn_tail && idx + 1 == lines.len() => break,
            Err(e) => return Err(corrupt(e.to_string())),
        };
        match entry {
            JournalEntry::Create { rule } => {
                let mut batch = store.validate_batch(state, std::slice::from_ref(&rule)).map_err(|e| corrupt(e.to_string()))?;
                state.insert(batch.remove(0));
            }
            JournalEntry::Import { rules } => {
                for rule in store.validate_batch(state, &rules).map_err(|e| corrupt(e.to_string()))? {
                    state.insert(rule);
                }
            }
            JournalEntry::Delete { id, tombstone } => {
                state.tombstone(&id, tombstone).map_err(|e| corrupt(e.to_string()))?;
            }
        }
    }
    Ok(())
}
