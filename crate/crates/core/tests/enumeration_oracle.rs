//! `enumerate_analyses` and `enumerate_hypotheses` against brute force.

mod common;

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use yogyata_core::analyzer::{case_to_roles, Analyzer, Label, MorphReading, RoleHypothesis, SentenceInput};
use yogyata_core::{seed, KarakaRole};

fn analyzer() -> Analyzer {
    let r = seed::resources();
    Analyzer::new(r.ontology, r.lexicon)
}

fn nominal(r: &MorphReading) -> Option<(u8, (String, u8, String))> {
    match r {
        MorphReading::Nominal { case, gender, number, .. } => {
            Some((*case, (format!("{gender:?}"), *case, format!("{number:?}"))))
        }
        _ => None,
    }
}

/// Every (reading, label) pair for every non-verb token, all combinations,
/// keeping the ones that satisfy the constraints checked one by one.
fn oracle_analyses(sentence: &SentenceInput) -> BTreeSet<(usize, Vec<RoleHypothesis>, BTreeSet<KarakaRole>)> {
    let lexicon = seed::resources().lexicon;
    let mut out = BTreeSet::new();
    for (vt, token) in sentence.tokens.iter().enumerate() {
        for reading in &token.readings {
            let MorphReading::Verbal { root, .. } = reading else { continue };
            let others: Vec<usize> = (0..sentence.tokens.len()).filter(|&t| t != vt).collect();
            let options: Vec<Vec<RoleHypothesis>> = others
                .iter()
                .map(|&t| {
                    let mut opts = Vec::new();
                    for r in 0..sentence.tokens[t].readings.len() {
                        for role in KarakaRole::ALL {
                            opts.push(RoleHypothesis { token: t, reading: r, label: Label::Karaka(role) });
                        }
                        for h in 0..sentence.tokens.len() {
                            opts.push(RoleHypothesis { token: t, reading: r, label: Label::Visheshana(h) });
                        }
                    }
                    opts
                })
                .collect();
            let mut idx = vec![0usize; options.len()];
            loop {
                let pick: Vec<RoleHypothesis> = idx.iter().zip(&options).map(|(&i, o)| o[i].clone()).collect();
                if valid(sentence, vt, &pick) {
                    let expectancy = lexicon.get_dhatu(root).map(|d| d.expectancy.clone()).unwrap_or_default();
                    let filled: BTreeSet<KarakaRole> = pick
                        .iter()
                        .filter_map(|h| if let Label::Karaka(r) = h.label { Some(r) } else { None })
                        .collect();
                    out.insert((vt, pick, expectancy.difference(&filled).copied().collect()));
                }
                // Odometer increment.
                let mut k = 0;
                loop {
                    if k == idx.len() {
                        break;
                    }
                    idx[k] += 1;
                    if idx[k] < options[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == idx.len() {
                    break;
                }
            }
        }
    }
    out
}

fn valid(sentence: &SentenceInput, vt: usize, pick: &[RoleHypothesis]) -> bool {
    let reading = |h: &RoleHypothesis| &sentence.tokens[h.token].readings[h.reading];
    let mut roles = BTreeSet::new();
    for h in pick {
        let Some((case, _)) = nominal(reading(h)) else { return false };
        match h.label {
            Label::Karaka(role) => {
                if !case_to_roles(case).unwrap().contains(&role) || !roles.insert(role) {
                    return false;
                }
            }
            Label::Visheshana(head) => {
                if head == h.token || head == vt {
                    return false;
                }
                let Some(hh) = pick.iter().find(|p| p.token == head) else { return false };
                if !matches!(hh.label, Label::Karaka(_)) {
                    return false;
                }
                if nominal(reading(h)).unwrap().1 != nominal(reading(hh)).map(|n| n.1).unwrap_or_default() {
                    return false;
                }
            }
        }
    }
    true
}

#[test]
fn analyses_match_exhaustive_oracle() {
    let a = analyzer();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut nonempty = 0;
    for _ in 0..300 {
        let s = common::random_sentence(&mut rng, 3, &common::STEMS[..5]);
        let got = a.enumerate_analyses(&s).unwrap();
        let got_set: BTreeSet<_> = got
            .iter()
            .map(|f| (f.verb.token, f.assignment.clone(), f.unfilled.clone()))
            .collect();
        assert_eq!(got_set.len(), got.len(), "duplicate analyses for {s:?}");
        assert_eq!(got_set, oracle_analyses(&s), "sentence {s:?}");
        nonempty += usize::from(!got.is_empty());
    }
    assert!(nonempty > 100, "generator too sparse: {nonempty}");
}

#[test]
fn analysis_enumeration_is_deterministic() {
    let a = analyzer();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let s = common::random_sentence(&mut rng, 3, &common::STEMS);
        assert_eq!(a.enumerate_analyses(&s).unwrap(), a.enumerate_analyses(&s).unwrap());
        assert_eq!(a.enumerate_hypotheses(&s).unwrap(), a.enumerate_hypotheses(&s).unwrap());
    }
}

/// Hypotheses: one statement per (token, nominal reading, role of its case),
/// plus one per ordered pair of agreeing readings and role of the head.
#[test]
fn hypotheses_match_counting_oracle() {
    let a = analyzer();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let s = common::random_sentence(&mut rng, 3, &common::STEMS);
        let hyps = a.enumerate_hypotheses(&s).unwrap();
        let mut expected = 0;
        let vt = s
            .tokens
            .iter()
            .position(|t| t.readings.iter().any(|r| matches!(r, MorphReading::Verbal { .. })))
            .unwrap();
        let readings: Vec<(usize, &MorphReading)> = s
            .tokens
            .iter()
            .enumerate()
            .filter(|(t, _)| *t != vt)
            .flat_map(|(t, tok)| tok.readings.iter().map(move |r| (t, r)))
            .collect();
        for (t, r) in &readings {
            let Some((case, key)) = nominal(r) else { continue };
            let n_roles = case_to_roles(case).unwrap().len();
            expected += n_roles;
            for (u, q) in &readings {
                if u != t && nominal(q).map(|n| n.1) == Some(key.clone()) {
                    expected += n_roles;
                }
            }
        }
        assert_eq!(hyps.len(), expected, "{s:?}");
        for h in &hyps {
            assert!(matches!(h.head.label, Label::Karaka(_)));
            if let Some(m) = &h.modifier {
                assert_eq!(m.label, Label::Visheshana(h.head.token));
            }
        }
    }
}

#[test]
fn bundled_sentences_give_eight_statements_each() {
    let a = analyzer();
    for (name, _) in seed::SENTENCES {
        let s = seed::sentence(name).unwrap();
        assert_eq!(a.enumerate_hypotheses(&s).unwrap().len(), 8, "{name}");
        assert_eq!(a.enumerate_analyses(&s).unwrap().len(), 6, "{name}");
    }
}
