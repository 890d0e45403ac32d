//! HTTP annotation service: browse prefixes, dhātus and words, manage
//! yogyatā rules, query the aggregated views, analyze sentences and
//! transliterate text.

pub mod api;
pub mod auth;
pub mod config;
pub mod error;

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;
use yogyata_core::rulestore::Clock;
use yogyata_core::{Analyzer, Resources, RuleStore};

pub use api::router;
pub use auth::{hash_password, Account, Accounts, Session};
pub use config::ServiceConfig;

pub struct AppState {
    pub resources: Resources,
    pub store: RuleStore,
    pub analyzer: Analyzer,
    pub accounts: Accounts,
    pub sessions: auth::Sessions,
}

#[derive(Debug, Error)]
pub enum StartError {
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Resources(#[from] yogyata_core::ResourceError),
    #[error(transparent)]
    Store(#[from] yogyata_core::StoreError),
    #[error("accounts: {0}")]
    Accounts(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl AppState {
    pub fn new(resources: Resources, store: RuleStore, accounts: Accounts, ttl: Duration) -> Self {
        Self::with_clock(resources, store, accounts, ttl, Arc::new(chrono::Utc::now))
    }

    pub fn with_clock(resources: Resources, store: RuleStore, accounts: Accounts, ttl: Duration, clock: Clock) -> Self {
        AppState {
            analyzer: resources.analyzer(),
            resources,
            store,
            accounts,
            sessions: auth::Sessions::new(ttl, clock),
        }
    }

    /// Loads resources, the rule journal and the accounts named by `config`.
    pub fn open(config: &ServiceConfig) -> Result<Self, StartError> {
        let dir: &Path = &config.data_dir;
        let resources = Resources::load_dir(dir)?;
        let store = resources.open_store(dir)?;
        let accounts = Accounts::load(&config.accounts_path()).map_err(StartError::Accounts)?;
        Ok(AppState::new(resources, store, accounts, config.session_ttl()))
    }
}

/// Binds and serves until interrupted.
pub async fn serve(config: ServiceConfig) -> Result<(), StartError> {
    let state = Arc::new(AppState::open(&config)?);
    let listener = tokio::net::TcpListener::bind(&config.bind).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
