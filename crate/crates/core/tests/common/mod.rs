#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use yogyata_core::analyzer::{Gender, MorphReading, Number, SentenceInput, Token};

/// Stems from the bundled lexicon, plus one that is not in it.
pub const STEMS: [&str; 9] = ["yāna", "vana", "ghaṭa", "śīta", "kaṃsa", "ratha", "nara", "siṃha", "kāla"];
pub const ROOTS: [&str; 6] = ["gam", "spṛś", "ñibhī", "pā", "añcu", "drā"];

fn nominal(rng: &mut ChaCha8Rng, stems: &[&str]) -> MorphReading {
    let stem = *stems.choose(rng).unwrap();
    let gender = *[Gender::M, Gender::N].choose(rng).unwrap();
    let number = *[Number::Sg, Number::Du].choose(rng).unwrap();
    MorphReading::nominal(stem, gender, rng.random_range(1..=7), number)
}

/// A sentence of one verb and up to `max_nominals` nominals with one or two
/// readings each. Readings of a token share its stem.
pub fn random_sentence(rng: &mut ChaCha8Rng, max_nominals: usize, stems: &[&str]) -> SentenceInput {
    let n = rng.random_range(0..=max_nominals);
    let mut tokens = Vec::new();
    for i in 0..n {
        let first = nominal(rng, stems);
        let mut readings = vec![first.clone()];
        if rng.random_bool(0.6) {
            let MorphReading::Nominal { stem, .. } = &first else { unreachable!() };
            let mut second = nominal(rng, &[stem.as_str()]);
            if second == first {
                if let MorphReading::Nominal { case, .. } = &mut second {
                    *case = *case % 7 + 1;
                }
            }
            readings.push(second);
        }
        tokens.push(Token::new(&format!("w{i}"), readings));
    }
    let mut verb = vec![MorphReading::verbal(ROOTS.choose(rng).unwrap())];
    if rng.random_bool(0.3) {
        verb.push(MorphReading::Participle {
            stem: "gacchat".into(),
            gender: Gender::M,
            case: 7,
            number: Number::Sg,
        });
    }
    let at = rng.random_range(0..=tokens.len());
    tokens.insert(at, Token::new("v", verb));
    SentenceInput { tokens }
}
