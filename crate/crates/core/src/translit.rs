//! IAST / SLP1 / Devanagari transliteration.
//!
//! Every scheme is parsed into a stream of phonemes (held as their one-char
//! SLP1 codes) plus raw pass-through characters, then rendered into the
//! target scheme. IAST digraphs that would be ambiguous after rendering get
//! a separator: a diaeresis for vowel hiatus (`aï`, `aü`) and a zero-width
//! non-joiner between a stop and a following `h`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Iast,
    Slp1,
    Devanagari,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Iast => "iast",
            Scheme::Slp1 => "slp1",
            Scheme::Devanagari => "devanagari",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown scheme `{0}` (expected iast, slp1 or devanagari)")]
pub struct UnknownScheme(pub String);

impl FromStr for Scheme {
    type Err = UnknownScheme;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "iast" => Ok(Scheme::Iast),
            "slp1" => Ok(Scheme::Slp1),
            "devanagari" | "deva" => Ok(Scheme::Devanagari),
            _ => Err(UnknownScheme(s.to_string())),
        }
    }
}

/// A character the source scheme does not define, copied through unchanged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassThrough {
    /// Position in the input, counted in chars (after NFC normalization for IAST).
    pub index: usize,
    pub ch: char,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transliteration {
    pub text: String,
    pub flags: Vec<PassThrough>,
}

pub fn transliterate(text: &str, from: Scheme, to: Scheme) -> Transliteration {
    let (syms, flags) = match from {
        Scheme::Iast => parse_iast(text),
        Scheme::Slp1 => parse_slp1(text),
        Scheme::Devanagari => parse_devanagari(text),
    };
    let text = if from == to {
        text.to_string()
    } else {
        match to {
            Scheme::Iast => render_iast(&syms),
            Scheme::Slp1 => render_slp1(&syms),
            Scheme::Devanagari => render_devanagari(&syms),
        }
    };
    Transliteration { text, flags }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sym {
    Phoneme(char),
    Raw(char),
}

const ZWNJ: char = '\u{200C}';
const VIRAMA: char = '\u{094D}';

const VOWELS: &str = "aAiIuUfFxXeEoO";
const CONSONANTS: &str = "kKgGNcCjJYwWqQRtTdDnpPbBmyrlvSzshL";
const MARKS: &str = "MH~'";
// Unaspirated stops: an IAST `h` after these would read as aspiration.
const ASPIRABLE: &str = "kgcjwqtdpb";

fn is_vowel(c: char) -> bool {
    VOWELS.contains(c)
}

fn is_consonant(c: char) -> bool {
    CONSONANTS.contains(c)
}

fn is_phoneme(c: char) -> bool {
    is_vowel(c) || is_consonant(c) || MARKS.contains(c)
}

/// Letters and combining marks outside the scheme are worth flagging;
/// whitespace, digits and punctuation are not.
fn is_suspicious(c: char) -> bool {
    c.is_alphabetic() || matches!(c, '\u{0300}'..='\u{036F}' | '\u{0900}'..='\u{097F}')
}

// (IAST, SLP1). Multi-char keys are tried before shorter ones.
const IAST_TABLE: &[(&str, char)] = &[
    ("a", 'a'),
    ("ā", 'A'),
    ("i", 'i'),
    ("ī", 'I'),
    ("u", 'u'),
    ("ū", 'U'),
    ("ṛ", 'f'),
    ("ṝ", 'F'),
    ("ḷ", 'x'),
    ("ḹ", 'X'),
    ("e", 'e'),
    ("ai", 'E'),
    ("o", 'o'),
    ("au", 'O'),
    ("ṃ", 'M'),
    ("ḥ", 'H'),
    ("m\u{0310}", '~'),
    ("'", '\''),
    ("k", 'k'),
    ("kh", 'K'),
    ("g", 'g'),
    ("gh", 'G'),
    ("ṅ", 'N'),
    ("c", 'c'),
    ("ch", 'C'),
    ("j", 'j'),
    ("jh", 'J'),
    ("ñ", 'Y'),
    ("ṭ", 'w'),
    ("ṭh", 'W'),
    ("ḍ", 'q'),
    ("ḍh", 'Q'),
    ("ṇ", 'R'),
    ("t", 't'),
    ("th", 'T'),
    ("d", 'd'),
    ("dh", 'D'),
    ("n", 'n'),
    ("p", 'p'),
    ("ph", 'P'),
    ("b", 'b'),
    ("bh", 'B'),
    ("m", 'm'),
    ("y", 'y'),
    ("r", 'r'),
    ("l", 'l'),
    ("v", 'v'),
    ("ś", 'S'),
    ("ṣ", 'z'),
    ("s", 's'),
    ("h", 'h'),
    ("ḻ", 'L'),
];

// Accepted on input only.
const IAST_VARIANTS: &[(&str, char)] = &[
    ("ṁ", 'M'),
    ("r\u{0325}\u{0304}", 'F'),
    ("r\u{0325}", 'f'),
    ("l\u{0325}\u{0304}", 'X'),
    ("l\u{0325}", 'x'),
    ("ï", 'i'),
    ("ü", 'u'),
];

fn iast_of(p: char) -> &'static str {
    IAST_TABLE
        .iter()
        .find(|(_, s)| *s == p)
        .map(|(i, _)| *i)
        .expect("every phoneme has an IAST spelling")
}

fn parse_iast(text: &str) -> (Vec<Sym>, Vec<PassThrough>) {
    let chars: Vec<char> = text.nfc().collect();
    let mut syms = Vec::with_capacity(chars.len());
    let mut flags = Vec::new();
    let mut i = 0;
    'outer: while i < chars.len() {
        if chars[i] == ZWNJ {
            i += 1;
            continue;
        }
        for len in (1..=3).rev() {
            if i + len > chars.len() {
                continue;
            }
            let window: String = chars[i..i + len].iter().collect();
            let hit = IAST_TABLE
                .iter()
                .chain(IAST_VARIANTS)
                .find(|(k, _)| *k == window)
                .map(|(_, p)| *p);
            if let Some(p) = hit {
                syms.push(Sym::Phoneme(p));
                i += len;
                continue 'outer;
            }
        }
        raw(chars[i], i, &mut syms, &mut flags);
        i += 1;
    }
    (syms, flags)
}

fn raw(c: char, index: usize, syms: &mut Vec<Sym>, flags: &mut Vec<PassThrough>) {
    if is_suspicious(c) {
        flags.push(PassThrough { index, ch: c });
    }
    syms.push(Sym::Raw(c));
}

fn parse_slp1(text: &str) -> (Vec<Sym>, Vec<PassThrough>) {
    let mut syms = Vec::new();
    let mut flags = Vec::new();
    for (i, c) in text.chars().enumerate() {
        if is_phoneme(c) {
            syms.push(Sym::Phoneme(c));
        } else {
            raw(c, i, &mut syms, &mut flags);
        }
    }
    (syms, flags)
}

fn render_iast(syms: &[Sym]) -> String {
    let mut out = String::new();
    let mut prev: Option<Sym> = None;
    for &sym in syms {
        match sym {
            Sym::Phoneme(p) => {
                let after_a = prev == Some(Sym::Phoneme('a'));
                match p {
                    'i' if after_a => out.push('ï'),
                    'u' if after_a => out.push('ü'),
                    'h' if matches!(prev, Some(Sym::Phoneme(q)) if ASPIRABLE.contains(q)) => {
                        out.push(ZWNJ);
                        out.push('h');
                    }
                    _ => out.push_str(iast_of(p)),
                }
            }
            Sym::Raw(c) => out.push(c),
        }
        prev = Some(sym);
    }
    out
}

fn render_slp1(syms: &[Sym]) -> String {
    syms.iter()
        .map(|s| match *s {
            Sym::Phoneme(c) | Sym::Raw(c) => c,
        })
        .collect()
}

// (SLP1, independent form, dependent sign). The dependent sign of `a` is empty.
const DEVA_VOWELS: &[(char, char, &str)] = &[
    ('a', 'अ', ""),
    ('A', 'आ', "\u{093E}"),
    ('i', 'इ', "\u{093F}"),
    ('I', 'ई', "\u{0940}"),
    ('u', 'उ', "\u{0941}"),
    ('U', 'ऊ', "\u{0942}"),
    ('f', 'ऋ', "\u{0943}"),
    ('F', 'ॠ', "\u{0944}"),
    ('x', 'ऌ', "\u{0962}"),
    ('X', 'ॡ', "\u{0963}"),
    ('e', 'ए', "\u{0947}"),
    ('E', 'ऐ', "\u{0948}"),
    ('o', 'ओ', "\u{094B}"),
    ('O', 'औ', "\u{094C}"),
];

const DEVA_CONSONANTS: &[(char, char)] = &[
    ('k', 'क'),
    ('K', 'ख'),
    ('g', 'ग'),
    ('G', 'घ'),
    ('N', 'ङ'),
    ('c', 'च'),
    ('C', 'छ'),
    ('j', 'ज'),
    ('J', 'झ'),
    ('Y', 'ञ'),
    ('w', 'ट'),
    ('W', 'ठ'),
    ('q', 'ड'),
    ('Q', 'ढ'),
    ('R', 'ण'),
    ('t', 'त'),
    ('T', 'थ'),
    ('d', 'द'),
    ('D', 'ध'),
    ('n', 'न'),
    ('p', 'प'),
    ('P', 'फ'),
    ('b', 'ब'),
    ('B', 'भ'),
    ('m', 'म'),
    ('y', 'य'),
    ('r', 'र'),
    ('l', 'ल'),
    ('v', 'व'),
    ('S', 'श'),
    ('z', 'ष'),
    ('s', 'स'),
    ('h', 'ह'),
    ('L', 'ळ'),
];

const DEVA_MARKS: &[(char, char)] = &[('M', 'ं'), ('H', 'ः'), ('~', 'ँ'), ('\'', 'ऽ')];

fn render_devanagari(syms: &[Sym]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < syms.len() {
        match syms[i] {
            Sym::Phoneme(p) if is_consonant(p) => {
                let (_, glyph) = DEVA_CONSONANTS.iter().find(|(s, _)| *s == p).unwrap();
                out.push(*glyph);
                match syms.get(i + 1) {
                    Some(Sym::Phoneme(v)) if is_vowel(*v) => {
                        let (_, _, sign) = DEVA_VOWELS.iter().find(|(s, _, _)| s == v).unwrap();
                        out.push_str(sign);
                        i += 1;
                    }
                    _ => out.push(VIRAMA),
                }
            }
            Sym::Phoneme(p) if is_vowel(p) => {
                let (_, glyph, _) = DEVA_VOWELS.iter().find(|(s, _, _)| *s == p).unwrap();
                out.push(*glyph);
            }
            Sym::Phoneme(p) => {
                let (_, glyph) = DEVA_MARKS.iter().find(|(s, _)| *s == p).unwrap();
                out.push(*glyph);
            }
            Sym::Raw('|') if syms.get(i + 1) == Some(&Sym::Raw('|')) => {
                out.push('॥');
                i += 1;
            }
            Sym::Raw('|') => out.push('।'),
            Sym::Raw(c) => out.push(c),
        }
        i += 1;
    }
    out
}

fn parse_devanagari(text: &str) -> (Vec<Sym>, Vec<PassThrough>) {
    let chars: Vec<char> = text.chars().collect();
    let mut syms = Vec::with_capacity(chars.len() * 2);
    let mut flags = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if let Some((p, _)) = DEVA_CONSONANTS.iter().find(|(_, g)| *g == c) {
            syms.push(Sym::Phoneme(*p));
            let next = chars.get(i + 1).copied();
            if next == Some(VIRAMA) {
                i += 1;
            } else if let Some((v, _, _)) = next.and_then(|n| {
                DEVA_VOWELS
                    .iter()
                    .find(|(_, _, sign)| !sign.is_empty() && sign.starts_with(n))
            }) {
                syms.push(Sym::Phoneme(*v));
                i += 1;
            } else {
                syms.push(Sym::Phoneme('a'));
            }
        } else if let Some((v, _, _)) = DEVA_VOWELS.iter().find(|(_, g, _)| *g == c) {
            syms.push(Sym::Phoneme(*v));
        } else if let Some((m, _)) = DEVA_MARKS.iter().find(|(_, g)| *g == c) {
            syms.push(Sym::Phoneme(*m));
        } else if c == '।' {
            syms.push(Sym::Raw('|'));
        } else if c == '॥' {
            syms.push(Sym::Raw('|'));
            syms.push(Sym::Raw('|'));
        } else if ('०'..='९').contains(&c) {
            syms.push(Sym::Raw(c));
        } else {
            raw(c, i, &mut syms, &mut flags);
        }
        i += 1;
    }
    (syms, flags)
}
