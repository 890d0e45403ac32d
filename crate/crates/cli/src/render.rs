//! Human-readable renderings. Machine output is plain JSON of the library
//! results and does not go through here.

use std::fmt::Write;

use yogyata_core::analyzer::{Disambiguation, Label, SentenceInput};
use yogyata_core::karaka::format_roles;
use yogyata_core::rulestore::LexemeRelations;
use yogyata_core::{LWord, Lexicon, YogyataRule};

pub fn relations(headword: &str, rel: &LexemeRelations, lexicon: &Lexicon) -> String {
    let mut out = format!("{headword}\n");
    if rel.is_empty() {
        out.push_str("  (no rules)\n");
    }
    let entry = lexicon.get_lexeme(headword).ok();
    for (l_word, senses) in &rel.0 {
        let _ = writeln!(out, "  {l_word}");
        for (sense_id, roles) in senses {
            let gloss = entry.and_then(|e| e.sense(*sense_id)).map_or("", |s| s.gloss.as_str());
            let _ = writeln!(out, "    {sense_id} {gloss}: {}", format_roles(roles));
        }
    }
    out
}

pub fn lwords(words: &[LWord]) -> String {
    words.iter().map(|w| format!("{w}\n")).collect()
}

pub fn rules(rules: &[YogyataRule]) -> String {
    let mut out = String::new();
    for r in rules {
        let _ = write!(
            out,
            "{}  {}  {} #{}  {}  by {} at {}",
            r.id,
            r.l_word,
            r.headword,
            r.sense_id,
            format_roles(&r.roles),
            r.annotator,
            r.created_at.format("%Y-%m-%dT%H:%M:%SZ")
        );
        if let Some(c) = &r.comment {
            let _ = write!(out, "  — {c}");
        }
        out.push('\n');
    }
    out
}

fn label(label: &Label, sentence: &SentenceInput) -> String {
    match label {
        Label::Karaka(role) => role.to_string(),
        Label::Visheshana(head) => {
            format!("viśeṣaṇa of {}", sentence.tokens.get(*head).map_or("?", |t| t.surface.as_str()))
        }
    }
}

pub fn analysis(d: &Disambiguation, sentence: &SentenceInput) -> String {
    let mut out = String::new();
    for r in &d.ranked {
        let a = &r.analysis;
        let _ = writeln!(
            out,
            "#{} verb {} ({}); unfilled {}; rule-backed {}",
            r.rank,
            a.verb.root,
            sentence.tokens[a.verb.token].surface,
            format_roles(&a.unfilled),
            r.rule_backed
        );
        for (h, support) in a.assignment.iter().zip(&r.support) {
            let sense = r.senses.iter().find(|s| s.token == h.token);
            let sense = match sense {
                Some(s) => match (s.sense_id, &s.gloss) {
                    (Some(id), Some(g)) => format!("{}#{id} {g}", s.stem),
                    _ => format!("{} (not in lexicon)", s.stem),
                },
                None => String::new(),
            };
            let _ = writeln!(
                out,
                "    {} = {}  [{}]  {}",
                sentence.tokens[h.token].surface,
                label(&h.label, sentence),
                sense,
                support.justification
            );
        }
    }
    let _ = writeln!(out, "pruned {} candidate(s)", d.report.pruned.len());
    for p in &d.report.pruned {
        let labels: Vec<String> = p
            .item
            .item
            .assignment
            .iter()
            .map(|h| format!("{}={}", sentence.tokens[h.token].surface, label(&h.label, sentence)))
            .collect();
        let _ = writeln!(out, "    {}: {}", labels.join(", "), p.justification);
    }
    out
}
