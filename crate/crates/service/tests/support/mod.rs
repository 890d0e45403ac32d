//! Driven pairs: one state behind the HTTP router, a twin driven through
//! direct library calls, both built from the same seed and the same clocks.

#![allow(dead_code)]

use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use chrono::DateTime;
use http_body_util::BodyExt;
use serde::Serialize;
use serde_json::{json, Value};
use tower::ServiceExt;
use yogyata_core::analyzer::SentenceInput;
use yogyata_core::records::Page;
use yogyata_core::rulestore::Clock;
use yogyata_core::{seed, transliterate, Analyzer, KarakaRole, Mode, Resources, RuleDraft, RuleId, RuleStore, Scheme};
use yogyata_service::{router, Account, Accounts, AppState};

pub const USER: &str = "asha";
pub const PASSWORD: &str = "kamsa-vadha";
pub const TTL: Duration = Duration::from_secs(3600);
const EPOCH: i64 = 1_767_225_600;

pub struct Twin {
    pub resources: Resources,
    pub store: RuleStore,
    pub analyzer: Analyzer,
}

pub struct Pair {
    pub app: Router,
    pub state: Arc<AppState>,
    pub twin: Twin,
    /// Seconds added to the session clock.
    pub session_offset: Arc<AtomicI64>,
}

fn store_clock() -> Clock {
    Arc::new(|| DateTime::from_timestamp(EPOCH, 0).unwrap())
}

fn store(resources: &Resources, seeded: bool) -> RuleStore {
    let store = RuleStore::in_memory(resources.lexicon.clone()).with_clock(store_clock());
    if seeded {
        store.import_rules(seed::RULES).unwrap();
    }
    store
}

pub fn pair(seeded: bool) -> Pair {
    let resources = seed::resources();
    let offset = Arc::new(AtomicI64::new(0));
    let o = offset.clone();
    let session_clock: Clock =
        Arc::new(move || DateTime::from_timestamp(EPOCH + o.load(Ordering::SeqCst), 0).unwrap());
    let accounts = Accounts { accounts: vec![Account::new(USER, "pepper", PASSWORD)] };
    let state = Arc::new(AppState::with_clock(
        resources.clone(),
        store(&resources, seeded),
        accounts,
        TTL,
        session_clock,
    ));
    let twin = Twin { store: store(&resources, seeded), analyzer: resources.analyzer(), resources };
    Pair { app: router(state.clone()), state, twin, session_offset: offset }
}

pub struct Reply {
    pub status: StatusCode,
    pub body: Value,
    pub content_type: String,
}

pub async fn call(app: &Router, method: &str, uri: &str, token: Option<&str>, body: Option<Value>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        req = req.header("authorization", format!("Bearer {t}"));
    }
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let content_type = resp
        .headers()
        .get("content-type")
        .map(|v| v.to_str().unwrap().to_string())
        .unwrap_or_default();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let body = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    Reply { status, body, content_type }
}

pub async fn login(app: &Router) -> String {
    let r = call(app, "POST", "/login", None, Some(json!({"name": USER, "password": PASSWORD}))).await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.body);
    r.body["token"].as_str().unwrap().to_string()
}

pub fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap()
}

/// Percent-encodes a path segment (the IAST names are not ASCII).
pub fn seg(s: &str) -> String {
    s.bytes()
        .map(|b| if b.is_ascii_alphanumeric() || b == b'-' { (b as char).to_string() } else { format!("%{b:02X}") })
        .collect()
}

pub fn sentence(name: &str) -> SentenceInput {
    seed::sentence(name).unwrap()
}

#[derive(Debug)]
pub struct Check {
    pub name: &'static str,
    pub ok: bool,
    pub detail: String,
}

#[derive(Default)]
pub struct Checks(pub Vec<Check>);

impl Checks {
    fn add(&mut self, name: &'static str, ok: bool, detail: impl Into<String>) {
        self.0.push(Check { name, ok, detail: detail.into() });
    }

    /// Status must match and the body must equal the library result.
    fn same(&mut self, name: &'static str, r: &Reply, status: StatusCode, lib: Value) {
        let ok = r.status == status && r.body == lib && r.content_type.starts_with("application/json");
        self.add(name, ok, if ok { String::new() } else { format!("{} {} vs {}", r.status, r.body, lib) });
    }

    fn status(&mut self, name: &'static str, r: &Reply, status: StatusCode) {
        self.add(name, r.status == status, format!("{} {}", r.status, r.body));
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.0.iter().filter(|c| !c.ok).collect()
    }
}

fn draft(dhatu: &str, sense_id: u32, roles: &[KarakaRole]) -> RuleDraft {
    RuleDraft {
        dhatu: dhatu.into(),
        headword: "kaṃsa".into(),
        sense_id,
        roles: roles.iter().copied().collect(),
        ..RuleDraft::default()
    }
}

/// Every endpoint, driven over HTTP and through the library on twin state.
pub async fn pass_through() -> Checks {
    let mut c = Checks::default();
    mutations(&mut c).await;
    reads(&mut c).await;
    c
}

async fn mutations(c: &mut Checks) {
    let p = pair(false);
    let app = &p.app;

    let r = call(app, "POST", "/login", None, Some(json!({"name": USER, "password": PASSWORD}))).await;
    let expires = DateTime::from_timestamp(EPOCH + TTL.as_secs() as i64, 0).unwrap();
    c.add(
        "POST /login issues a session",
        r.status == StatusCode::OK
            && r.body["annotator"] == USER
            && r.body["expires_at"] == expires.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
            && p.state.sessions.check(r.body["token"].as_str().unwrap_or("")).as_deref() == Some(USER),
        r.body.to_string(),
    );
    let token = r.body["token"].as_str().unwrap_or_default().to_string();
    let bad = call(app, "POST", "/login", None, Some(json!({"name": USER, "password": "nope"}))).await;
    c.add(
        "POST /login rejects bad credentials",
        bad.status == StatusCode::UNAUTHORIZED && !p.state.accounts.verify(USER, "nope"),
        bad.body.to_string(),
    );

    let body = json!({"dhatu": "pā", "headword": "kaṃsa", "sense_id": 1, "roles": ["karma"]});
    let r = call(app, "POST", "/rules", None, Some(body.clone())).await;
    c.status("POST /rules without a token", &r, StatusCode::UNAUTHORIZED);

    let r = call(app, "POST", "/rules", Some(&token), Some(body.clone())).await;
    let lib = p.twin.store.create_rule(draft("pā", 1, &[KarakaRole::Karma]), USER).unwrap();
    c.same("POST /rules creates", &r, StatusCode::CREATED, value(&lib));

    let r = call(app, "POST", "/rules", Some(&token), Some(body.clone())).await;
    let lib = p.twin.store.create_rule(draft("pā", 1, &[KarakaRole::Karma]), USER).unwrap_err();
    c.add(
        "POST /rules duplicate",
        r.status == StatusCode::CONFLICT && r.body["message"] == lib.to_string() && r.body["detail"]["existing"] == "r000001",
        r.body.to_string(),
    );

    let r = call(
        app,
        "POST",
        "/rules",
        Some(&token),
        Some(json!({"dhatu": "ñibhī", "headword": "kaṃsa", "sense_id": 1, "roles": ["karma"]})),
    )
    .await;
    let lib = p.twin.store.create_rule(draft("ñibhī", 1, &[KarakaRole::Karma]), USER).unwrap_err();
    c.add(
        "POST /rules outside expectancy",
        r.status == StatusCode::UNPROCESSABLE_ENTITY && r.body["field"] == "roles" && r.body["message"] == lib.to_string(),
        r.body.to_string(),
    );

    let r = call(
        app,
        "POST",
        "/rules",
        Some(&token),
        Some(json!({"dhatu": "pā", "headword": "zzz", "sense_id": 1, "roles": ["karma"]})),
    )
    .await;
    c.status("POST /rules unknown headword", &r, StatusCode::NOT_FOUND);

    let r = call(app, "GET", &format!("/rules?l={}&r={}", seg("pā"), seg("kaṃsa")), None, None).await;
    c.same("GET /rules?l&r", &r, StatusCode::OK, value(&p.twin.store.get_rules(Some("pā"), Some("kaṃsa"))));

    let r = call(app, "DELETE", "/rules/r000001", None, None).await;
    c.status("DELETE /rules without a token", &r, StatusCode::UNAUTHORIZED);
    let r = call(app, "DELETE", "/rules/r000001", Some(&token), None).await;
    let lib = p.twin.store.delete_rule(&RuleId("r000001".into()), USER).unwrap();
    c.same("DELETE /rules/{id}", &r, StatusCode::OK, value(&lib));
    let r = call(app, "DELETE", "/rules/r000001", Some(&token), None).await;
    c.status("DELETE /rules/{id} twice", &r, StatusCode::NOT_FOUND);
    let r = call(app, "GET", "/rules", None, None).await;
    c.same("GET /rules after delete", &r, StatusCode::OK, value(&p.twin.store.get_rules(None, None)));

    p.session_offset.store(TTL.as_secs() as i64, Ordering::SeqCst);
    let r = call(app, "POST", "/rules", Some(&token), Some(body)).await;
    c.status("POST /rules with an expired token", &r, StatusCode::UNAUTHORIZED);
}

async fn walk<T: Serialize>(
    c: &mut Checks,
    name: &'static str,
    app: &Router,
    path: &str,
    limit: usize,
    lib: impl Fn(usize) -> Page<T>,
) {
    let mut cursor = Some("0".to_string());
    let mut ok = true;
    let mut pages = 0;
    while let Some(cur) = cursor {
        let r = call(app, "GET", &format!("{path}?cursor={cur}&limit={limit}"), None, None).await;
        let offset: usize = cur.parse().unwrap();
        let expected = value(&lib(offset));
        ok &= r.status == StatusCode::OK && r.body == expected;
        cursor = r.body["next_cursor"].as_str().map(String::from);
        pages += 1;
        if pages > 100 {
            ok = false;
            break;
        }
    }
    c.add(name, ok, format!("{pages} pages"));
}

async fn reads(c: &mut Checks) {
    let p = pair(true);
    let app = &p.app;
    let lex = p.twin.resources.lexicon.clone();

    walk(c, "GET /prefixes", app, "/prefixes", 5, |o| Page::of(lex.prefixes().iter().cloned(), o, 5)).await;
    walk(c, "GET /dhatus", app, "/dhatus", 4, |o| Page::of(lex.dhatus().cloned(), o, 4)).await;
    walk(c, "GET /words", app, "/words", 7, |o| Page::of(lex.lexemes().cloned(), o, 7)).await;
    let r = call(app, "GET", "/words", None, None).await;
    c.same("GET /words default page", &r, StatusCode::OK, value(&Page::of(lex.lexemes().cloned(), 0, 50)));
    let r = call(app, "GET", "/dhatus?cursor=abc", None, None).await;
    c.status("GET /dhatus malformed cursor", &r, StatusCode::BAD_REQUEST);
    let r = call(app, "GET", "/words?cursor=9999", None, None).await;
    c.add(
        "GET /words past the end",
        r.status == StatusCode::OK && r.body == json!({"items": [], "next_cursor": null}),
        r.body.to_string(),
    );

    let r = call(app, "GET", &format!("/lexemes/{}/relations", seg("kaṃsa")), None, None).await;
    c.same(
        "GET /lexemes/{headword}/relations",
        &r,
        StatusCode::OK,
        value(&p.twin.store.relations_for_lexeme("kaṃsa").unwrap()),
    );
    let r = call(app, "GET", "/lexemes/zzz/relations", None, None).await;
    c.status("GET /lexemes/zzz/relations", &r, StatusCode::NOT_FOUND);

    for role in KarakaRole::ALL {
        let r = call(app, "GET", &format!("/karakas/{}/dhatus", seg(role.name())), None, None).await;
        c.same("GET /karakas/{role}/dhatus", &r, StatusCode::OK, value(&p.twin.store.dhatus_for_karaka(role)));
    }
    let r = call(app, "GET", "/karakas/nominative/dhatus", None, None).await;
    c.status("GET /karakas/{unknown}/dhatus", &r, StatusCode::NOT_FOUND);

    for (name, _) in seed::SENTENCES {
        for mode in [Mode::Permissive, Mode::Strict] {
            let s = sentence(name);
            let mut body = value(&s);
            body["mode"] = value(&mode);
            let r = call(app, "POST", "/analyze", None, Some(body)).await;
            match p.twin.analyzer.disambiguate(&s, &p.twin.store.snapshot(), mode) {
                Ok(d) => c.same("POST /analyze", &r, StatusCode::OK, value(&d)),
                Err(yogyata_core::analyzer::AnalysisError::NoAnalysis(report)) => c.add(
                    "POST /analyze without survivors",
                    r.status == StatusCode::UNPROCESSABLE_ENTITY && r.body["detail"] == value(&*report),
                    r.body.to_string(),
                ),
                Err(e) => c.add("POST /analyze", false, e.to_string()),
            }
        }
    }
    let mut verbless = sentence("yanam-vanam-gacchati");
    verbless.tokens.pop();
    let r = call(app, "POST", "/analyze", None, Some(value(&verbless))).await;
    c.status("POST /analyze without a verb", &r, StatusCode::BAD_REQUEST);
    let r = call(app, "POST", "/analyze", None, Some(json!({"tokens": 3}))).await;
    c.status("POST /analyze malformed", &r, StatusCode::BAD_REQUEST);

    for (text, from, to) in [
        ("śītam", Scheme::Iast, Scheme::Slp1),
        ("gacCati", Scheme::Slp1, Scheme::Devanagari),
        ("यानं वनं गच्छति", Scheme::Devanagari, Scheme::Iast),
        ("kaṃsa 42 x", Scheme::Iast, Scheme::Devanagari),
    ] {
        let r = call(app, "POST", "/transliterate", None, Some(json!({"text": text, "from": from, "to": to}))).await;
        c.same("POST /transliterate", &r, StatusCode::OK, value(&transliterate(text, from, to)));
    }
    let r = call(app, "POST", "/transliterate", None, Some(json!({"text": "a", "from": "klingon", "to": "iast"}))).await;
    c.status("POST /transliterate unknown scheme", &r, StatusCode::BAD_REQUEST);
}
