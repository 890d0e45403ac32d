use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// The six kāraka relations a nominal can bear to a verbal action.
///
/// Variant order is the traditional enumeration order and is used for
/// every sorted output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KarakaRole {
    Karta,
    Karma,
    Karana,
    Sampradana,
    Apadana,
    Adhikarana,
}

impl KarakaRole {
    pub const ALL: [KarakaRole; 6] = [
        KarakaRole::Karta,
        KarakaRole::Karma,
        KarakaRole::Karana,
        KarakaRole::Sampradana,
        KarakaRole::Apadana,
        KarakaRole::Adhikarana,
    ];

    /// Canonical IAST name.
    pub fn name(self) -> &'static str {
        match self {
            KarakaRole::Karta => "kartā",
            KarakaRole::Karma => "karma",
            KarakaRole::Karana => "karaṇa",
            KarakaRole::Sampradana => "sampradāna",
            KarakaRole::Apadana => "apādāna",
            KarakaRole::Adhikarana => "adhikaraṇa",
        }
    }

    fn ascii_name(self) -> &'static str {
        match self {
            KarakaRole::Karta => "karta",
            KarakaRole::Karma => "karma",
            KarakaRole::Karana => "karana",
            KarakaRole::Sampradana => "sampradana",
            KarakaRole::Apadana => "apadana",
            KarakaRole::Adhikarana => "adhikarana",
        }
    }
}

impl fmt::Display for KarakaRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown kāraka role `{0}`")]
pub struct UnknownRole(pub String);

impl FromStr for KarakaRole {
    type Err = UnknownRole;

    /// Accepts the IAST name or its diacritic-free ASCII spelling.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        KarakaRole::ALL
            .into_iter()
            .find(|r| r.name() == s || r.ascii_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownRole(s.to_string()))
    }
}

impl Serialize for KarakaRole {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for KarakaRole {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Formats a role set as `{kartā, apādāna}`.
pub fn format_roles<'a, I: IntoIterator<Item = &'a KarakaRole>>(roles: I) -> String {
    let names: Vec<&str> = roles.into_iter().map(|r| r.name()).collect();
    format!("{{{}}}", names.join(", "))
}
