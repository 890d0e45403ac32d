//! Candidate kāraka analyses of a sentence and their pruning.
//!
//! Input is a sentence whose tokens carry every morphological reading they
//! admit. From the readings we enumerate single role statements (and
//! statements pairing a role with a viśeṣaṇa), or complete labelings of the
//! sentence. Each candidate is then expanded over the senses of the words it
//! labels and checked against the expectancy of the verb, the rule store,
//! and the ontological requirements of the verb's roles.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::karaka::{format_roles, KarakaRole};
use crate::lexicon::{DhatuEntry, LexemeSense, Lexicon};
use crate::ontology::{Ontology, TagId};
use crate::rulestore::{RuleId, RuleSnapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    M,
    F,
    N,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Number {
    Sg,
    Du,
    Pl,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MorphReading {
    Nominal {
        stem: String,
        gender: Gender,
        case: u8,
        number: Number,
    },
    Verbal {
        root: String,
        person: u8,
        lakara: String,
        number: Number,
    },
    /// Accepted in input; no role statements are generated from it.
    Participle {
        stem: String,
        gender: Gender,
        case: u8,
        number: Number,
    },
}

impl MorphReading {
    pub fn nominal(stem: &str, gender: Gender, case: u8, number: Number) -> Self {
        MorphReading::Nominal { stem: stem.into(), gender, case, number }
    }

    pub fn verbal(root: &str) -> Self {
        MorphReading::Verbal {
            root: root.into(),
            person: 3,
            lakara: "laṭ".into(),
            number: Number::Sg,
        }
    }

    fn nominal_parts(&self) -> Option<(&str, Gender, u8, Number)> {
        match self {
            MorphReading::Nominal { stem, gender, case, number } => Some((stem, *gender, *case, *number)),
            _ => None,
        }
    }

    fn agrees_with(&self, other: &MorphReading) -> bool {
        match (self.nominal_parts(), other.nominal_parts()) {
            (Some((_, g1, c1, n1)), Some((_, g2, c2, n2))) => g1 == g2 && c1 == c2 && n1 == n2,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub readings: Vec<MorphReading>,
    /// Pins the sense used for a stem instead of trying all of them.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sense_hints: BTreeMap<String, u32>,
}

impl Token {
    pub fn new(surface: &str, readings: Vec<MorphReading>) -> Self {
        Token { surface: surface.into(), readings, sense_hints: BTreeMap::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceInput {
    pub tokens: Vec<Token>,
}

impl SentenceInput {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        for (i, token) in self.tokens.iter().enumerate() {
            if token.readings.is_empty() {
                return Err(AnalysisError::NoReadings { token: i });
            }
            for reading in &token.readings {
                match reading {
                    MorphReading::Nominal { case, .. } | MorphReading::Participle { case, .. } => {
                        if !(1..=7).contains(case) {
                            return Err(AnalysisError::CaseOutOfRange { case: *case });
                        }
                    }
                    MorphReading::Verbal { person, .. } => {
                        if !(1..=3).contains(person) {
                            return Err(AnalysisError::PersonOutOfRange { token: i, person: *person });
                        }
                    }
                }
            }
        }
        if self.verb_choices().is_empty() {
            return Err(AnalysisError::NoVerb);
        }
        Ok(())
    }

    fn verb_choices(&self) -> Vec<VerbChoice> {
        let mut out = Vec::new();
        for (t, token) in self.tokens.iter().enumerate() {
            for (r, reading) in token.readings.iter().enumerate() {
                if let MorphReading::Verbal { root, .. } = reading {
                    out.push(VerbChoice { token: t, reading: r, root: root.clone() });
                }
            }
        }
        out
    }

    fn reading(&self, token: usize, reading: usize) -> Option<&MorphReading> {
        self.tokens.get(token)?.readings.get(reading)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Karaka(KarakaRole),
    /// Adjective of the token at this index.
    Visheshana(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RoleHypothesis {
    pub token: usize,
    pub reading: usize,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VerbChoice {
    pub token: usize,
    pub reading: usize,
    pub root: String,
}

/// One enumerated statement: a token filling a role, optionally with a
/// second token qualifying it as viśeṣaṇa.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hypothesis {
    pub verb: VerbChoice,
    pub head: RoleHypothesis,
    pub modifier: Option<RoleHypothesis>,
}

/// A complete labeling: every non-verb token carries exactly one label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FullAnalysis {
    pub verb: VerbChoice,
    /// Sorted by token index.
    pub assignment: Vec<RoleHypothesis>,
    pub unfilled: BTreeSet<KarakaRole>,
}

impl FullAnalysis {
    pub fn label_of(&self, token: usize) -> Option<Label> {
        self.assignment.iter().find(|h| h.token == token).map(|h| h.label)
    }
}

/// Something the pruner can judge: a verb plus labeled tokens.
pub trait Candidate: Clone {
    fn verb(&self) -> &VerbChoice;
    /// Labels in the order they are checked.
    fn labels(&self) -> Vec<&RoleHypothesis>;

    fn reading_of(&self, token: usize) -> Option<usize> {
        self.labels().into_iter().find(|h| h.token == token).map(|h| h.reading)
    }
}

impl Candidate for Hypothesis {
    fn verb(&self) -> &VerbChoice {
        &self.verb
    }

    fn labels(&self) -> Vec<&RoleHypothesis> {
        std::iter::once(&self.head).chain(self.modifier.as_ref()).collect()
    }
}

impl Candidate for FullAnalysis {
    fn verb(&self) -> &VerbChoice {
        &self.verb
    }

    fn labels(&self) -> Vec<&RoleHypothesis> {
        self.assignment.iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SenseChoice {
    pub token: usize,
    pub stem: String,
    /// `None` when the stem is not in the lexicon.
    pub sense_id: Option<u32>,
}

/// A candidate together with one choice of sense per labeled token.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sensed<T> {
    pub item: T,
    pub senses: Vec<SenseChoice>,
}

impl<T> Sensed<T> {
    pub fn sense_of(&self, token: usize) -> Option<&SenseChoice> {
        self.senses.iter().find(|s| s.token == token)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum Justification {
    Rule(RuleId),
    Constraint(String),
    AgreementFailure(String),
    ExpectancyViolation(String),
}

impl Justification {
    pub fn is_rule(&self) -> bool {
        matches!(self, Justification::Rule(_))
    }
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Rule(id) => write!(f, "rule {id}"),
            Justification::Constraint(c) => write!(f, "constraint {c}"),
            Justification::AgreementFailure(d) => write!(f, "agreement failure: {d}"),
            Justification::ExpectancyViolation(d) => write!(f, "expectancy violation: {d}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelDecision {
    pub token: usize,
    pub label: Label,
    pub justification: Justification,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Survivor<T> {
    pub item: Sensed<T>,
    /// One decision per label, all of them keeps.
    pub support: Vec<LabelDecision>,
}

impl<T> Survivor<T> {
    pub fn rule_backed(&self) -> usize {
        self.support.iter().filter(|d| d.justification.is_rule()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pruned<T> {
    pub item: Sensed<T>,
    /// The first label that failed.
    pub token: usize,
    pub justification: Justification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strict,
    #[default]
    Permissive,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "strict" => Ok(Mode::Strict),
            "permissive" => Ok(Mode::Permissive),
            other => Err(format!("unknown mode `{other}` (expected strict or permissive)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneReport<T> {
    pub mode: Mode,
    pub surviving: Vec<Survivor<T>>,
    pub pruned: Vec<Pruned<T>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedSense {
    pub token: usize,
    pub stem: String,
    pub sense_id: Option<u32>,
    pub gloss: Option<String>,
    pub tag: Option<TagId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedAnalysis {
    pub rank: usize,
    pub analysis: FullAnalysis,
    /// The word-sense resolution this analysis commits to.
    pub senses: Vec<ResolvedSense>,
    pub unfilled_count: usize,
    pub rule_backed: usize,
    pub support: Vec<LabelDecision>,
}

impl RankedAnalysis {
    fn score(&self) -> (usize, std::cmp::Reverse<usize>) {
        (self.unfilled_count, std::cmp::Reverse(self.rule_backed))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Disambiguation {
    pub ranked: Vec<RankedAnalysis>,
    pub report: PruneReport<FullAnalysis>,
}

impl Disambiguation {
    pub fn top(&self) -> &RankedAnalysis {
        &self.ranked[0]
    }

    /// True when the best analysis wins on score alone, not on the
    /// enumeration-order tiebreak.
    pub fn top_is_unique(&self) -> bool {
        match self.ranked.get(1) {
            Some(second) => self.ranked[0].score() != second.score(),
            None => !self.ranked.is_empty(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("the sentence has no verbal reading")]
    NoVerb,
    #[error("token {token} has no readings")]
    NoReadings { token: usize },
    #[error("case {case} is outside 1..=7")]
    CaseOutOfRange { case: u8 },
    #[error("token {token}: person {person} is outside 1..=3")]
    PersonOutOfRange { token: usize, person: u8 },
    #[error("dhātu `{0}` is neither in the lexicon nor used by any rule")]
    UnknownDhatu(String),
    #[error("stem `{0}` is not in the lexicon")]
    UnknownLexeme(String),
    #[error("sense hint {sense_id} for `{stem}` does not exist")]
    BadSenseHint { stem: String, sense_id: u32 },
    #[error("every candidate analysis was pruned")]
    NoAnalysis(Box<PruneReport<FullAnalysis>>),
}

/// Vibhakti → candidate kāraka roles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseTable([BTreeSet<KarakaRole>; 7]);

impl Default for CaseTable {
    /// Active voice: 1 kartā, 2 karma, 3 karaṇa, 4 sampradāna, 5 apādāna,
    /// 6 none (genitive is not a kāraka), 7 adhikaraṇa.
    fn default() -> Self {
        use KarakaRole::*;
        CaseTable([
            BTreeSet::from([Karta]),
            BTreeSet::from([Karma]),
            BTreeSet::from([Karana]),
            BTreeSet::from([Sampradana]),
            BTreeSet::from([Apadana]),
            BTreeSet::new(),
            BTreeSet::from([Adhikarana]),
        ])
    }
}

impl CaseTable {
    pub fn roles(&self, case: u8) -> Result<&BTreeSet<KarakaRole>, AnalysisError> {
        match case {
            1..=7 => Ok(&self.0[usize::from(case - 1)]),
            _ => Err(AnalysisError::CaseOutOfRange { case }),
        }
    }

    pub fn set(&mut self, case: u8, roles: BTreeSet<KarakaRole>) -> Result<(), AnalysisError> {
        match case {
            1..=7 => {
                self.0[usize::from(case - 1)] = roles;
                Ok(())
            }
            _ => Err(AnalysisError::CaseOutOfRange { case }),
        }
    }
}

pub fn case_to_roles(case: u8) -> Result<BTreeSet<KarakaRole>, AnalysisError> {
    CaseTable::default().roles(case).cloned()
}

/// Id of the tag every kāraka filler must fall under. When the loaded
/// ontology lacks it, the check is skipped.
pub const SUBSTANCE_TAG: &str = "dravya";

enum Verdict {
    Keep(Justification),
    Prune(Justification),
}

#[derive(Debug, Clone)]
pub struct Analyzer {
    ontology: Arc<Ontology>,
    lexicon: Arc<Lexicon>,
    cases: CaseTable,
}

impl Analyzer {
    pub fn new(ontology: Arc<Ontology>, lexicon: Arc<Lexicon>) -> Self {
        Analyzer { ontology, lexicon, cases: CaseTable::default() }
    }

    pub fn with_case_table(mut self, cases: CaseTable) -> Self {
        self.cases = cases;
        self
    }

    pub fn case_table(&self) -> &CaseTable {
        &self.cases
    }

    fn nominal_roles(&self, reading: &MorphReading) -> Vec<KarakaRole> {
        match reading.nominal_parts() {
            Some((_, _, case, _)) => self.cases.roles(case).map(|r| r.iter().copied().collect()).unwrap_or_default(),
            None => Vec::new(),
        }
    }

    /// Single-token role statements followed by role + viśeṣaṇa pairs.
    pub fn enumerate_hypotheses(&self, sentence: &SentenceInput) -> Result<Vec<Hypothesis>, AnalysisError> {
        sentence.validate()?;
        let mut out = Vec::new();
        for verb in sentence.verb_choices() {
            let nominals = nominal_readings(sentence, verb.token);
            let mut singles = nominals.clone();
            singles.sort_by_key(|&(t, r, reading)| (t, reading_case(reading), r));
            for (t, r, reading) in singles {
                for role in self.nominal_roles(reading) {
                    out.push(Hypothesis {
                        verb: verb.clone(),
                        head: RoleHypothesis { token: t, reading: r, label: Label::Karaka(role) },
                        modifier: None,
                    });
                }
            }
            let mut pairs = Vec::new();
            for &(a, ra, head) in &nominals {
                for &(b, rb, adj) in &nominals {
                    if a == b || !head.agrees_with(adj) {
                        continue;
                    }
                    for role in self.nominal_roles(head) {
                        pairs.push((reading_case(head), role, a, b, ra, rb));
                    }
                }
            }
            pairs.sort();
            for (_, role, a, b, ra, rb) in pairs {
                out.push(Hypothesis {
                    verb: verb.clone(),
                    head: RoleHypothesis { token: a, reading: ra, label: Label::Karaka(role) },
                    modifier: Some(RoleHypothesis { token: b, reading: rb, label: Label::Visheshana(a) }),
                });
            }
        }
        Ok(out)
    }

    fn expectancy(&self, root: &str) -> BTreeSet<KarakaRole> {
        self.lexicon.get_dhatu(root).map(|d| d.expectancy.clone()).unwrap_or_default()
    }

    /// Every complete, consistent labeling of the sentence.
    ///
    /// Constraints: one verb reading; each other token labeled once from a
    /// nominal reading; at most one filler per role; a viśeṣaṇa agrees with
    /// its head in case, gender and number, and the head fills a role.
    pub fn enumerate_analyses(&self, sentence: &SentenceInput) -> Result<Vec<FullAnalysis>, AnalysisError> {
        sentence.validate()?;
        let mut out = Vec::new();
        for verb in sentence.verb_choices() {
            let expectancy = self.expectancy(&verb.root);
            let others: Vec<usize> = (0..sentence.tokens.len()).filter(|&t| t != verb.token).collect();
            let mut search = LabelSearch {
                analyzer: self,
                sentence,
                others: &others,
                chosen: Vec::with_capacity(others.len()),
                used: BTreeSet::new(),
                found: Vec::new(),
            };
            search.run(0);
            for assignment in search.found {
                let filled: BTreeSet<KarakaRole> = assignment
                    .iter()
                    .filter_map(|h| match h.label {
                        Label::Karaka(r) => Some(r),
                        Label::Visheshana(_) => None,
                    })
                    .collect();
                out.push(FullAnalysis {
                    verb: verb.clone(),
                    assignment,
                    unfilled: expectancy.difference(&filled).copied().collect(),
                });
            }
        }
        Ok(out)
    }

    /// Expands each candidate over the senses of the words it labels.
    /// A sense hint on the token restricts its stem to that sense.
    pub fn expand_senses<T: Candidate>(
        &self,
        sentence: &SentenceInput,
        items: &[T],
    ) -> Result<Vec<Sensed<T>>, AnalysisError> {
        let mut out = Vec::new();
        for item in items {
            let mut choices: Vec<Vec<SenseChoice>> = vec![Vec::new()];
            let mut tokens: Vec<(usize, usize)> = item.labels().iter().map(|h| (h.token, h.reading)).collect();
            tokens.sort();
            for (t, r) in tokens {
                let Some((stem, ..)) = sentence.reading(t, r).and_then(MorphReading::nominal_parts) else {
                    continue;
                };
                let options = self.sense_options(&sentence.tokens[t], stem)?;
                choices = choices
                    .into_iter()
                    .flat_map(|prefix| {
                        options.iter().map(move |&sense_id| {
                            let mut next = prefix.clone();
                            next.push(SenseChoice { token: t, stem: stem.to_string(), sense_id });
                            next
                        })
                    })
                    .collect();
            }
            out.extend(choices.into_iter().map(|senses| Sensed { item: item.clone(), senses }));
        }
        Ok(out)
    }

    fn sense_options(&self, token: &Token, stem: &str) -> Result<Vec<Option<u32>>, AnalysisError> {
        let Ok(lexeme) = self.lexicon.get_lexeme(stem) else {
            return Ok(vec![None]);
        };
        match token.sense_hints.get(stem) {
            Some(&id) if lexeme.sense(id).is_some() => Ok(vec![Some(id)]),
            Some(&id) => Err(AnalysisError::BadSenseHint { stem: stem.to_string(), sense_id: id }),
            None => Ok(lexeme.senses.iter().map(|s| Some(s.sense_id)).collect()),
        }
    }

    fn resolve_verb(&self, root: &str, rules: &RuleSnapshot) -> Result<&DhatuEntry, AnalysisError> {
        if let Ok(d) = self.lexicon.get_dhatu(root) {
            return Ok(d);
        }
        rules
            .lword_by_sandhi(root)
            .and_then(|l| self.lexicon.get_dhatu(&l.dhatu).ok())
            .ok_or_else(|| AnalysisError::UnknownDhatu(root.to_string()))
    }

    fn sense_entry(&self, choice: &SenseChoice) -> Option<(&str, &LexemeSense)> {
        let lexeme = self.lexicon.get_lexeme(&choice.stem).ok()?;
        Some((&lexeme.headword, lexeme.sense(choice.sense_id?)?))
    }

    fn is_substance(&self, tag: &TagId) -> bool {
        let substance = TagId::new(SUBSTANCE_TAG);
        if !self.ontology.contains(&substance) {
            return true;
        }
        self.ontology.subsumes(&substance, tag).unwrap_or(false)
    }

    /// Keeps or drops each item; every decision carries a justification.
    pub fn prune<T: Candidate>(
        &self,
        sentence: &SentenceInput,
        rules: &RuleSnapshot,
        items: Vec<Sensed<T>>,
        mode: Mode,
    ) -> Result<PruneReport<T>, AnalysisError> {
        let mut report = PruneReport { mode, surviving: Vec::new(), pruned: Vec::new() };
        'items: for item in items {
            let verb = item.item.verb();
            let dhatu = self.resolve_verb(&verb.root, rules)?;
            let mut support = Vec::new();
            for hyp in item.item.labels() {
                match self.judge(sentence, rules, dhatu, &verb.root, &item, hyp, mode)? {
                    Verdict::Keep(justification) => support.push(LabelDecision {
                        token: hyp.token,
                        label: hyp.label,
                        justification,
                    }),
                    Verdict::Prune(justification) => {
                        report.pruned.push(Pruned { token: hyp.token, item, justification });
                        continue 'items;
                    }
                }
            }
            report.surviving.push(Survivor { item, support });
        }
        Ok(report)
    }

    #[allow(clippy::too_many_arguments)]
    fn judge<T: Candidate>(
        &self,
        sentence: &SentenceInput,
        rules: &RuleSnapshot,
        dhatu: &DhatuEntry,
        verb_form: &str,
        item: &Sensed<T>,
        hyp: &RoleHypothesis,
        mode: Mode,
    ) -> Result<Verdict, AnalysisError> {
        let reading = sentence.reading(hyp.token, hyp.reading);
        match hyp.label {
            Label::Karaka(role) => {
                let Some((stem, ..)) = reading.and_then(MorphReading::nominal_parts) else {
                    return Ok(Verdict::Prune(Justification::Constraint(
                        "kāraka-needs-nominal: only nominal readings fill kāraka roles".into(),
                    )));
                };
                if !dhatu.expects(role) {
                    return Ok(Verdict::Prune(Justification::ExpectancyViolation(format!(
                        "{role} ∉ expectancy({}) = {}",
                        dhatu.root,
                        format_roles(&dhatu.expectancy)
                    ))));
                }
                let choice = item.sense_of(hyp.token);
                let Some((headword, sense)) = choice.and_then(|c| self.sense_entry(c)) else {
                    return unknown_lexeme(stem, mode);
                };
                if let Some(rule) = rules.find(verb_form, headword, sense.sense_id) {
                    let j = Justification::Rule(rule.id.clone());
                    return Ok(if rule.roles.contains(&role) { Verdict::Keep(j) } else { Verdict::Prune(j) });
                }
                if !self.is_substance(&sense.tag) {
                    return Ok(Verdict::Prune(Justification::Constraint(format!(
                        "C-GUNA: {headword} ({}) is not a dravya and cannot fill a kāraka role",
                        self.ontology.label(&sense.tag)
                    ))));
                }
                match dhatu.requirement(role) {
                    Some(requirement) => {
                        let detail = format!(
                            "{role} of {} requires {}",
                            dhatu.root,
                            self.ontology.format_tags(requirement)
                        );
                        if self.ontology.compatible(&sense.tag, requirement).unwrap_or(false) {
                            Ok(Verdict::Keep(Justification::Constraint(format!("role-requirement met: {detail}"))))
                        } else {
                            Ok(Verdict::Prune(Justification::Constraint(format!("role-requirement: {detail}"))))
                        }
                    }
                    None => match mode {
                        Mode::Permissive => Ok(Verdict::Keep(Justification::Constraint("unconstrained".into()))),
                        Mode::Strict => Ok(Verdict::Prune(Justification::ExpectancyViolation(format!(
                            "no supporting evidence for {headword} as {role} of {}",
                            dhatu.root
                        )))),
                    },
                }
            }
            Label::Visheshana(head) => {
                let head_reading = item.item.reading_of(head).and_then(|r| sentence.reading(head, r));
                let (Some(adj), Some(head_reading)) = (reading, head_reading) else {
                    return Ok(Verdict::Prune(Justification::AgreementFailure(format!(
                        "token {} qualifies token {head}, which carries no label",
                        hyp.token
                    ))));
                };
                if head == hyp.token || !adj.agrees_with(head_reading) {
                    return Ok(Verdict::Prune(Justification::AgreementFailure(format!(
                        "token {} does not agree with token {head} in case, gender and number",
                        hyp.token
                    ))));
                }
                let head_stem = head_reading.nominal_parts().map(|p| p.0).unwrap_or_default();
                let Some((headword, sense)) = item.sense_of(head).and_then(|c| self.sense_entry(c)) else {
                    return unknown_lexeme(head_stem, mode);
                };
                if !self.is_substance(&sense.tag) {
                    return Ok(Verdict::Prune(Justification::Constraint(format!(
                        "C-GUNA: head {headword} ({}) is not a dravya and cannot carry a viśeṣaṇa",
                        self.ontology.label(&sense.tag)
                    ))));
                }
                Ok(Verdict::Keep(Justification::Constraint("viśeṣaṇa agrees with a dravya head".into())))
            }
        }
    }

    /// Enumerates, prunes and ranks complete analyses.
    ///
    /// Ranking: fewer unfilled expected roles first, then more rule-backed
    /// labels, then enumeration order.
    pub fn disambiguate(
        &self,
        sentence: &SentenceInput,
        rules: &RuleSnapshot,
        mode: Mode,
    ) -> Result<Disambiguation, AnalysisError> {
        let analyses = self.enumerate_analyses(sentence)?;
        let sensed = self.expand_senses(sentence, &analyses)?;
        let report = self.prune(sentence, rules, sensed, mode)?;
        if report.surviving.is_empty() {
            return Err(AnalysisError::NoAnalysis(Box::new(report)));
        }
        let mut ranked: Vec<RankedAnalysis> = report
            .surviving
            .iter()
            .map(|s| RankedAnalysis {
                rank: 0,
                analysis: s.item.item.clone(),
                senses: s.item.senses.iter().map(|c| self.resolve_sense(c)).collect(),
                unfilled_count: s.item.item.unfilled.len(),
                rule_backed: s.rule_backed(),
                support: s.support.clone(),
            })
            .collect();
        // Stable sort keeps enumeration order among equal scores.
        ranked.sort_by_key(RankedAnalysis::score);
        for (i, r) in ranked.iter_mut().enumerate() {
            r.rank = i + 1;
        }
        Ok(Disambiguation { ranked, report })
    }

    fn resolve_sense(&self, choice: &SenseChoice) -> ResolvedSense {
        let entry = self.sense_entry(choice);
        ResolvedSense {
            token: choice.token,
            stem: choice.stem.clone(),
            sense_id: choice.sense_id,
            gloss: entry.map(|(_, s)| s.gloss.clone()),
            tag: entry.map(|(_, s)| s.tag.clone()),
        }
    }
}

fn unknown_lexeme(stem: &str, mode: Mode) -> Result<Verdict, AnalysisError> {
    match mode {
        Mode::Strict => Err(AnalysisError::UnknownLexeme(stem.to_string())),
        Mode::Permissive => Ok(Verdict::Keep(Justification::Constraint("unknown-lexeme-retained".into()))),
    }
}

fn reading_case(reading: &MorphReading) -> u8 {
    reading.nominal_parts().map(|p| p.2).unwrap_or(0)
}

fn nominal_readings(sentence: &SentenceInput, verb_token: usize) -> Vec<(usize, usize, &MorphReading)> {
    let mut out = Vec::new();
    for (t, token) in sentence.tokens.iter().enumerate() {
        if t == verb_token {
            continue;
        }
        for (r, reading) in token.readings.iter().enumerate() {
            if reading.nominal_parts().is_some() {
                out.push((t, r, reading));
            }
        }
    }
    out
}

/// Depth-first labeling of the non-verb tokens, with role uniqueness and
/// viśeṣaṇa consistency enforced as soon as both ends are labeled.
struct LabelSearch<'a> {
    analyzer: &'a Analyzer,
    sentence: &'a SentenceInput,
    others: &'a [usize],
    chosen: Vec<RoleHypothesis>,
    used: BTreeSet<KarakaRole>,
    found: Vec<Vec<RoleHypothesis>>,
}

impl LabelSearch<'_> {
    fn run(&mut self, depth: usize) {
        if depth == self.others.len() {
            self.found.push(self.chosen.clone());
            return;
        }
        let token = self.others[depth];
        for (r, reading) in self.sentence.tokens[token].readings.iter().enumerate() {
            if reading.nominal_parts().is_none() {
                continue;
            }
            for role in self.analyzer.nominal_roles(reading) {
                if self.used.contains(&role) {
                    continue;
                }
                let hyp = RoleHypothesis { token, reading: r, label: Label::Karaka(role) };
                if !self.consistent_with_modifiers(&hyp) {
                    continue;
                }
                self.used.insert(role);
                self.chosen.push(hyp);
                self.run(depth + 1);
                self.chosen.pop();
                self.used.remove(&role);
            }
            for &head in self.others {
                if head == token {
                    continue;
                }
                let hyp = RoleHypothesis { token, reading: r, label: Label::Visheshana(head) };
                if !self.consistent_with_modifiers(&hyp) || !self.head_ok(&hyp) {
                    continue;
                }
                self.chosen.push(hyp);
                self.run(depth + 1);
                self.chosen.pop();
            }
        }
    }

    fn reading(&self, h: &RoleHypothesis) -> &MorphReading {
        &self.sentence.tokens[h.token].readings[h.reading]
    }

    /// A new viśeṣaṇa needs its head (if already labeled) to be a kāraka
    /// with an agreeing reading.
    fn head_ok(&self, hyp: &RoleHypothesis) -> bool {
        let Label::Visheshana(head) = hyp.label else { return true };
        match self.chosen.iter().find(|c| c.token == head) {
            Some(h) => matches!(h.label, Label::Karaka(_)) && self.reading(h).agrees_with(self.reading(hyp)),
            None => true,
        }
    }

    /// Earlier tokens that chose `hyp.token` as their head must be satisfied by it.
    fn consistent_with_modifiers(&self, hyp: &RoleHypothesis) -> bool {
        self.chosen
            .iter()
            .filter(|c| c.label == Label::Visheshana(hyp.token))
            .all(|c| matches!(hyp.label, Label::Karaka(_)) && self.reading(c).agrees_with(self.reading(hyp)))
    }
}
