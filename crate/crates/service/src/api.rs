//! Routes. Every handler parses its input, makes one library call, and
//! serializes the result unchanged.

use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use yogyata_core::analyzer::{Disambiguation, SentenceInput};
use yogyata_core::records::Page;
use yogyata_core::rulestore::{LexemeRelations, Tombstone};
use yogyata_core::translit::Transliteration;
use yogyata_core::{transliterate, DhatuEntry, KarakaRole, LWord, LexemeEntry, Mode, Prefix, RuleDraft, RuleId, Scheme, YogyataRule};

use crate::auth::Session;
use crate::error::ApiError;
use crate::AppState;

pub const DEFAULT_PAGE: usize = 50;
pub const MAX_PAGE: usize = 1000;

type Shared = State<Arc<AppState>>;
type ApiResult<T> = Result<Json<T>, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/login", post(login))
        .route("/prefixes", get(prefixes))
        .route("/dhatus", get(dhatus))
        .route("/words", get(words))
        .route("/rules", post(create_rule).get(list_rules))
        .route("/rules/{id}", delete(delete_rule))
        .route("/lexemes/{headword}/relations", get(relations))
        .route("/karakas/{role}/dhatus", get(karaka_dhatus))
        .route("/analyze", post(analyze))
        .route("/transliterate", post(translit))
        .with_state(state)
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed body: {e}")))
}

/// `cursor` is an offset from a previous page; `limit` bounds the page size.
pub fn page_window(query: &HashMap<String, String>) -> Result<(usize, usize), ApiError> {
    let offset = match query.get("cursor") {
        None => 0,
        Some(c) => c.parse().map_err(|_| ApiError::bad_request(format!("malformed cursor `{c}`")))?,
    };
    let limit = match query.get("limit") {
        None => DEFAULT_PAGE,
        Some(l) => match l.parse::<usize>() {
            Ok(n) if (1..=MAX_PAGE).contains(&n) => n,
            _ => return Err(ApiError::bad_request(format!("limit must be 1..={MAX_PAGE}, got `{l}`"))),
        },
    };
    Ok((offset, limit))
}

fn annotator(state: &AppState, headers: &HeaderMap) -> Result<String, ApiError> {
    let token = headers
        .get("authorization")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .ok_or_else(ApiError::unauthorized)?;
    state.sessions.check(token.trim()).ok_or_else(ApiError::unauthorized)
}

#[derive(Debug, Deserialize)]
pub struct Credentials {
    pub name: String,
    pub password: String,
}

async fn login(State(state): Shared, body: Bytes) -> ApiResult<Session> {
    let creds: Credentials = parse_body(&body)?;
    if !state.accounts.verify(&creds.name, &creds.password) {
        return Err(ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "unknown annotator or wrong password"));
    }
    Ok(Json(state.sessions.issue(&creds.name)))
}

async fn prefixes(State(state): Shared, Query(q): Query<HashMap<String, String>>) -> ApiResult<Page<Prefix>> {
    let (offset, limit) = page_window(&q)?;
    Ok(Json(Page::of(state.resources.lexicon.prefixes().iter().cloned(), offset, limit)))
}

async fn dhatus(State(state): Shared, Query(q): Query<HashMap<String, String>>) -> ApiResult<Page<DhatuEntry>> {
    let (offset, limit) = page_window(&q)?;
    Ok(Json(Page::of(state.resources.lexicon.dhatus().cloned(), offset, limit)))
}

async fn words(State(state): Shared, Query(q): Query<HashMap<String, String>>) -> ApiResult<Page<LexemeEntry>> {
    let (offset, limit) = page_window(&q)?;
    Ok(Json(Page::of(state.resources.lexicon.lexemes().cloned(), offset, limit)))
}

async fn create_rule(
    State(state): Shared,
    headers: HeaderMap,
    body: Bytes,
) -> Result<(StatusCode, Json<YogyataRule>), ApiError> {
    let who = annotator(&state, &headers)?;
    let draft: RuleDraft = parse_body(&body)?;
    let rule = state.store.create_rule(draft, &who)?;
    Ok((StatusCode::CREATED, Json(rule)))
}

async fn list_rules(State(state): Shared, Query(q): Query<HashMap<String, String>>) -> ApiResult<Vec<YogyataRule>> {
    Ok(Json(state.store.get_rules(q.get("l").map(String::as_str), q.get("r").map(String::as_str))))
}

async fn delete_rule(State(state): Shared, headers: HeaderMap, Path(id): Path<String>) -> ApiResult<Tombstone> {
    let who = annotator(&state, &headers)?;
    Ok(Json(state.store.delete_rule(&RuleId(id), &who)?))
}

async fn relations(State(state): Shared, Path(headword): Path<String>) -> ApiResult<LexemeRelations> {
    Ok(Json(state.store.relations_for_lexeme(&headword)?))
}

async fn karaka_dhatus(State(state): Shared, Path(role): Path<String>) -> ApiResult<Vec<LWord>> {
    let role: KarakaRole = role.parse().map_err(|e| ApiError::not_found(format!("{e}")))?;
    Ok(Json(state.store.dhatus_for_karaka(role)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeRequest {
    #[serde(flatten)]
    pub sentence: SentenceInput,
    #[serde(default)]
    pub mode: Mode,
}

async fn analyze(State(state): Shared, body: Bytes) -> ApiResult<Disambiguation> {
    let req: AnalyzeRequest = parse_body(&body)?;
    Ok(Json(state.analyzer.disambiguate(&req.sentence, &state.store.snapshot(), req.mode)?))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranslitRequest {
    pub text: String,
    pub from: Scheme,
    pub to: Scheme,
}

async fn translit(body: Bytes) -> ApiResult<Transliteration> {
    let req: TranslitRequest = parse_body(&body)?;
    Ok(Json(transliterate(&req.text, req.from, req.to)))
}
