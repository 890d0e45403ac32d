//! Annotator accounts and bearer-token sessions.

use std::collections::HashMap;
use std::path::Path;
use std::sync::RwLock;
use std::time::Duration;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use yogyata_core::rulestore::Clock;

/// `hex(sha256(salt ‖ password))`.
pub fn hash_password(salt: &str, password: &str) -> String {
    let mut h = Sha256::new();
    h.update(salt.as_bytes());
    h.update(password.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Account {
    pub name: String,
    pub salt: String,
    pub hash: String,
}

impl Account {
    pub fn new(name: &str, salt: &str, password: &str) -> Self {
        Account { name: name.into(), salt: salt.into(), hash: hash_password(salt, password) }
    }
}

/// The static account list. There is no self-registration.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Accounts {
    #[serde(default, rename = "account")]
    pub accounts: Vec<Account>,
}

impl Accounts {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// A missing file means no one can log in; the read-only API still works.
    pub fn load(path: &Path) -> Result<Self, String> {
        match std::fs::read_to_string(path) {
            Ok(text) => Self::from_toml(&text).map_err(|e| format!("{}: {e}", path.display())),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Accounts::default()),
            Err(e) => Err(format!("{}: {e}", path.display())),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("accounts serialize")
    }

    pub fn verify(&self, name: &str, password: &str) -> bool {
        self.accounts
            .iter()
            .find(|a| a.name == name)
            .is_some_and(|a| constant_time_eq(a.hash.as_bytes(), hash_password(&a.salt, password).as_bytes()))
    }
}

fn constant_time_eq(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub token: String,
    pub annotator: String,
    pub expires_at: String,
}

#[derive(Debug)]
struct Live {
    annotator: String,
    expires_at: DateTime<Utc>,
}

pub struct Sessions {
    ttl: Duration,
    clock: Clock,
    live: RwLock<HashMap<String, Live>>,
}

impl Sessions {
    pub fn new(ttl: Duration, clock: Clock) -> Self {
        Sessions { ttl, clock, live: RwLock::new(HashMap::new()) }
    }

    pub fn issue(&self, annotator: &str) -> Session {
        let now = (self.clock)();
        let expires_at = now + chrono::Duration::from_std(self.ttl).unwrap_or(chrono::Duration::MAX);
        let token = hex::encode(rand::random::<[u8; 24]>());
        let mut live = self.live.write().unwrap();
        live.retain(|_, s| s.expires_at > now);
        live.insert(token.clone(), Live { annotator: annotator.into(), expires_at });
        Session {
            token,
            annotator: annotator.into(),
            expires_at: expires_at.to_rfc3339_opts(SecondsFormat::Secs, true),
        }
    }

    /// The annotator behind a live token.
    pub fn check(&self, token: &str) -> Option<String> {
        let now = (self.clock)();
        let live = self.live.read().unwrap();
        live.get(token).filter(|s| s.expires_at > now).map(|s| s.annotator.clone())
    }
}
