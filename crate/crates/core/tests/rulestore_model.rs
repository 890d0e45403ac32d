//! Randomized create/delete/query sequences checked against a plain model,
//! with the journal replayed at the end.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use yogyata_core::rulestore::{Clock, RuleDraft, StoreError};
use yogyata_core::{seed, KarakaRole, RuleId, RuleStore};

const DHATUS: [&str; 6] = ["gam", "pā", "ñibhī", "spṛś", "añcu", "drā"];
const HEADWORDS: [&str; 6] = ["kaṃsa", "kara", "vana", "nara", "ghaṭa", "nope"];
const PREFIXES: [Option<&str>; 4] = [None, None, Some("ā"), Some("upa")];

#[derive(Debug, Clone)]
struct ModelRule {
    id: RuleId,
    key: (Option<String>, String, String, String, u32),
    roles: BTreeSet<KarakaRole>,
    active: bool,
}

#[derive(Debug, PartialEq)]
enum Outcome {
    Created,
    NotFound,
    Invalid,
    Duplicate,
}

fn ticking_clock() -> Clock {
    let t = Arc::new(AtomicI64::new(1_767_225_600));
    Arc::new(move || DateTime::<Utc>::from_timestamp(t.fetch_add(1, Ordering::SeqCst), 0).unwrap())
}

fn random_draft(rng: &mut ChaCha8Rng) -> RuleDraft {
    let dhatu = *DHATUS.choose(rng).unwrap();
    let prefix = *PREFIXES.choose(rng).unwrap();
    let roles: BTreeSet<KarakaRole> =
        KarakaRole::ALL.iter().copied().filter(|_| rng.random_bool(0.3)).collect();
    RuleDraft {
        prefix: prefix.map(String::from),
        dhatu: dhatu.into(),
        sandhi_form: prefix.map(|p| format!("{p}{dhatu}")),
        changed_artha: None,
        headword: HEADWORDS.choose(rng).unwrap().to_string(),
        sense_id: rng.random_range(1..=3),
        roles,
        comment: Some("model".into()),
    }
}

fn predict(model: &[ModelRule], draft: &RuleDraft) -> Outcome {
    let lexicon = seed::resources().lexicon;
    if draft.prefix.as_deref().is_some_and(|p| !lexicon.has_prefix(p)) {
        return Outcome::NotFound;
    }
    let Ok(lexeme) = lexicon.get_lexeme(&draft.headword) else { return Outcome::NotFound };
    if lexeme.sense(draft.sense_id).is_none() {
        return Outcome::NotFound;
    }
    let dhatu = lexicon.get_dhatu(&draft.dhatu).unwrap();
    if draft.roles.is_empty() || draft.roles.iter().any(|r| !dhatu.expects(*r)) {
        return Outcome::Invalid;
    }
    if model.iter().any(|m| m.active && m.key == key(draft)) {
        return Outcome::Duplicate;
    }
    Outcome::Created
}

fn key(d: &RuleDraft) -> (Option<String>, String, String, String, u32) {
    (
        d.prefix.clone(),
        d.dhatu.clone(),
        d.sandhi_form.clone().unwrap_or_else(|| d.dhatu.clone()),
        d.headword.clone(),
        d.sense_id,
    )
}

fn classify(r: &Result<yogyata_core::YogyataRule, StoreError>) -> Outcome {
    match r {
        Ok(_) => Outcome::Created,
        Err(StoreError::NotFound { .. }) => Outcome::NotFound,
        Err(StoreError::Validation(_)) => Outcome::Invalid,
        Err(StoreError::Duplicate { .. }) => Outcome::Duplicate,
        Err(e) => panic!("unexpected {e}"),
    }
}

#[test]
fn random_crud_against_model() {
    let dir = tempfile::tempdir().unwrap();
    let journal = dir.path().join("rules.journal");
    let lexicon = seed::resources().lexicon;
    let store = RuleStore::open(&journal, lexicon.clone()).unwrap().with_clock(ticking_clock());
    let mut model: Vec<ModelRule> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut counts = [0usize; 4];

    for step in 0..1500 {
        match rng.random_range(0..10) {
            0..=5 => {
                let draft = random_draft(&mut rng);
                let expected = predict(&model, &draft);
                let got = store.create_rule(draft.clone(), "annotator");
                assert_eq!(classify(&got), expected, "step {step}: {draft:?}");
                counts[0] += usize::from(expected == Outcome::Created);
                if let Ok(rule) = got {
                    assert_eq!(rule.id, RuleId(format!("r{:06}", model.len() + 1)));
                    model.push(ModelRule { id: rule.id, key: key(&draft), roles: draft.roles, active: true });
                }
            }
            6 | 7 => {
                let id = if !model.is_empty() && rng.random_bool(0.85) {
                    model.choose(&mut rng).unwrap().id.clone()
                } else {
                    RuleId("r999999".into())
                };
                let active = model.iter().any(|m| m.id == id && m.active);
                let got = store.delete_rule(&id, "deleter");
                assert_eq!(got.is_ok(), active, "step {step}: delete {id}");
                if got.is_ok() {
                    counts[1] += 1;
                    model.iter_mut().find(|m| m.id == id).unwrap().active = false;
                    assert_eq!(store.tombstone(&id).unwrap().deleted_by, "deleter");
                    assert!(store.get_rule(&id).is_none());
                }
            }
            8 => {
                counts[2] += 1;
                let l = rng.random_bool(0.5).then(|| DHATUS.choose(&mut rng).unwrap().to_string());
                let h = rng.random_bool(0.5).then(|| HEADWORDS.choose(&mut rng).unwrap().to_string());
                let got: Vec<RuleId> = store.get_rules(l.as_deref(), h.as_deref()).into_iter().map(|r| r.id).collect();
                let want: Vec<RuleId> = model
                    .iter()
                    .filter(|m| m.active)
                    .filter(|m| l.as_ref().is_none_or(|l| &m.key.2 == l))
                    .filter(|m| h.as_ref().is_none_or(|h| &m.key.3 == h))
                    .map(|m| m.id.clone())
                    .collect();
                assert_eq!(got, want, "step {step}");
            }
            _ => {
                counts[3] += 1;
                let role = *KarakaRole::ALL.choose(&mut rng).unwrap();
                let got: BTreeSet<String> =
                    store.dhatus_for_karaka(role).into_iter().map(|l| l.sandhi_form).collect();
                let want: BTreeSet<String> = model
                    .iter()
                    .filter(|m| m.active && m.roles.contains(&role))
                    .map(|m| m.key.2.clone())
                    .collect();
                assert_eq!(got, want);
                let headword = "kaṃsa";
                let rel = store.relations_for_lexeme(headword).unwrap();
                for m in model.iter().filter(|m| m.active && m.key.3 == headword) {
                    let senses = rel.for_sandhi(&m.key.2).unwrap();
                    assert!(senses[&m.key.4].is_superset(&m.roles));
                }
            }
        }
        // No two active rules ever share a key.
        let active: Vec<_> = model.iter().filter(|m| m.active).map(|m| m.key.clone()).collect();
        let distinct: BTreeSet<_> = active.iter().cloned().collect();
        assert_eq!(active.len(), distinct.len());
        assert_eq!(store.active_count(), active.len());
    }
    assert!(counts.iter().all(|&c| c > 50), "op mix too thin: {counts:?}");

    // Replaying the journal reproduces the state exactly.
    let export = store.export_rules();
    drop(store);
    let reopened = RuleStore::open(&journal, lexicon.clone()).unwrap();
    assert_eq!(reopened.export_rules(), export);
    for m in &model {
        assert_eq!(reopened.get_rule(&m.id).is_some(), m.active);
        assert_eq!(reopened.tombstone(&m.id).is_some(), !m.active);
    }

    // Export → import → export is byte-identical.
    let fresh = RuleStore::in_memory(lexicon);
    assert_eq!(fresh.import_rules(&export).unwrap(), model.iter().filter(|m| m.active).count());
    assert_eq!(fresh.export_rules(), export);
}

#[test]
fn concurrent_creates_never_duplicate() {
    let lexicon = seed::resources().lexicon;
    let store = Arc::new(RuleStore::in_memory(lexicon));
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let store = store.clone();
            std::thread::spawn(move || {
                let draft = RuleDraft {
                    dhatu: "pā".into(),
                    headword: "kaṃsa".into(),
                    sense_id: 2,
                    roles: [KarakaRole::Apadana].into(),
                    ..RuleDraft::default()
                };
                store.create_rule(draft, "t").is_ok()
            })
        })
        .collect();
    let created = handles.into_iter().map(|h| h.join().unwrap()).filter(|&ok| ok).count();
    assert_eq!(created, 1);
    assert_eq!(store.active_count(), 1);
}
