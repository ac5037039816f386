//! In-process HTTP tests against the router.

use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use parley::api::{router, AppState};
use parley::cli::build_runtime;
use parley::config::Config;
use parley_core::dialogue::TurnBudget;
use parley_core::persistence::{RegistryStore, SurveyRecord};
use parley_core::{Transcript, Utterance};
use serde_json::{json, Value};
use tower::ServiceExt;

fn app(store: &Path, budget: TurnBudget) -> Router {
    let config = Config {
        store: store.to_path_buf(),
        budget,
        ..Config::default()
    };
    router(AppState::new(build_runtime(&config).unwrap()), &[]).unwrap()
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<&str>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    if body.is_some() {
        req = req.header(header::CONTENT_TYPE, "application/json");
    }
    let req = req.body(Body::from(body.unwrap_or("").to_string())).unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

async fn start(app: &Router, body: &str) -> (String, Value) {
    let (status, v) = call(app, "POST", "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    (v["session_id"].as_str().unwrap().to_string(), v)
}

async fn say(app: &Router, id: &str, text: &str) -> (StatusCode, Value) {
    let body = json!({ "text": text, "duration_ms": 2000 }).to_string();
    call(app, "POST", &format!("/sessions/{id}/turn"), Some(&body)).await
}

fn reply_for(state: &str) -> &'static str {
    match state {
        "IntroNewUser" => "My name is Rhea.",
        "FeedbackDelivery" => "No thanks.",
        "Survey" => "5",
        _ => "I really like science fiction movies.",
    }
}

/// Plays a cooperative user until the session ends.
async fn finish(app: &Router, id: &str, mut state: String) {
    for _ in 0..80 {
        let (status, v) = say(app, id, reply_for(&state)).await;
        assert_eq!(status, StatusCode::OK, "{v}");
        state = v["state"].as_str().unwrap().to_string();
        if v["done"].as_bool().unwrap() {
            return;
        }
    }
    panic!("session did not end");
}

#[tokio::test]
async fn health_check() {
    let dir = tempfile::tempdir().unwrap();
    let (status, v) = call(&app(dir.path(), TurnBudget::default()), "GET", "/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["status"], "ok");
}

#[tokio::test]
async fn new_session_asks_for_a_name() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), TurnBudget::default());
    for body in ["", "{}", "{\"name_hint\": \"Nobody\"}"] {
        let (status, v) = call(&app, "POST", "/sessions", Some(body)).await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
        assert_eq!(v["state"], "IntroNewUser");
        assert_eq!(v["bot_text"], "Hello, what is your name?");
    }
}

#[tokio::test]
async fn malformed_bodies_are_400() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), TurnBudget::default());
    for body in ["{", "[1,2]", "{\"name\": \"x\"}", "{\"name_hint\": 3}"] {
        let (status, _) = call(&app, "POST", "/sessions", Some(body)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
    }
    let (id, _) = start(&app, "{}").await;
    let uri = format!("/sessions/{id}/turn");
    for body in ["{}", "{\"text\": \"hi\", \"audio_ref\": \"a.wav\"}", "{\"txt\": \"hi\"}", "nonsense"] {
        let (status, _) = call(&app, "POST", &uri, Some(body)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
    }
}

#[tokio::test]
async fn registered_name_gets_returning_greeting() {
    let dir = tempfile::tempdir().unwrap();
    {
        let store = RegistryStore::open(dir.path()).unwrap();
        let mut t = Transcript::new("seed");
        t.push(Utterance::user("hello", 0, 500).unwrap()).unwrap();
        let survey = SurveyRecord {
            answers: Vec::new(),
            rating: Some(3),
        };
        store.record_session(Some("Rhea"), &t, None, &survey).unwrap();
    }
    let app = app(dir.path(), TurnBudget::default());
    let (_, v) = start(&app, "{\"name_hint\": \"rhea\"}").await;
    assert_eq!(v["state"], "IntroReturning");
    let text = v["bot_text"].as_str().unwrap();
    assert!(text.contains("Welcome back, Rhea") && text.contains("3 out of 5"), "{text}");
}

#[tokio::test]
async fn unknown_session_is_404() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), TurnBudget::default());
    assert_eq!(say(&app, "nope", "hi").await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&app, "GET", "/sessions/nope/report", None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&app, "GET", "/sessions/nope", None).await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn text_turn_in_health_moves_through_topics() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), TurnBudget::default());
    let (id, _) = start(&app, "{}").await;
    let mut state = "IntroNewUser".to_string();
    let mut health_texts = Vec::new();
    while state != "Travel" && state != "Entertainment" {
        let reply = if state == "Health" {
            "I go hiking and I love vacations abroad."
        } else {
            reply_for(&state)
        };
        let (status, v) = say(&app, &id, reply).await;
        assert_eq!(status, StatusCode::OK);
        state = v["state"].as_str().unwrap().to_string();
        if state == "Health" {
            health_texts.push(v["bot_text"].as_str().unwrap().to_string());
        }
    }
    assert!(!health_texts.is_empty());
    // A travel cue in the last health answer picks travel next.
    assert_eq!(state, "Travel");
    let (_, status) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    let trace: Vec<&str> = status["trace"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
    assert_eq!(trace, ["Start", "IntroNewUser", "Health", "Travel"]);
}

#[tokio::test]
async fn report_lifecycle_and_restart() {
    let dir = tempfile::tempdir().unwrap();
    let app1 = app(dir.path(), TurnBudget::new(3, u64::MAX));
    let (id, _) = start(&app1, "{}").await;
    let report_uri = format!("/sessions/{id}/report");
    assert_eq!(call(&app1, "GET", &report_uri, None).await.0, StatusCode::CONFLICT);

    finish(&app1, &id, "IntroNewUser".into()).await;
    let (status, report) = call(&app1, "GET", &report_uri, None).await;
    assert_eq!(status, StatusCode::OK);
    for key in ["awkward", "questions", "pace", "tics", "acknowledgment"] {
        assert!(report[key]["verdict"].is_string(), "{key}");
    }
    let (status, _) = say(&app1, &id, "one more thing").await;
    assert_eq!(status, StatusCode::CONFLICT);

    // A fresh process over the same store still serves the report.
    let app2 = app(dir.path(), TurnBudget::new(3, u64::MAX));
    let (status, again) = call(&app2, "GET", &report_uri, None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(again, report);
}

#[tokio::test]
async fn cors_allows_browser_origin() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), TurnBudget::default());
    let req = Request::builder()
        .uri("/health")
        .header(header::ORIGIN, "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let res = app.oneshot(req).await.unwrap();
    assert_eq!(res.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN], "*");
}

#[cfg(unix)]
#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn overlapping_turn_is_409() {
    let dir = tempfile::tempdir().unwrap();
    let fifo = dir.path().join("slow-turn.txt");
    let made = std::process::Command::new("mkfifo").arg(&fifo).status().unwrap();
    assert!(made.success());

    let app = app(&dir.path().join("store"), TurnBudget::default());
    let (id, _) = start(&app, "{}").await;
    let uri = format!("/sessions/{id}/turn");

    // The first turn blocks reading the pipe until we write to it.
    let body = json!({ "audio_ref": fifo.display().to_string() }).to_string();
    let first = {
        let app = app.clone();
        let uri = uri.clone();
        tokio::spawn(async move { call(&app, "POST", &uri, Some(&body)).await })
    };
    // Opening the write end waits for the reader, so the first turn is now in flight.
    let writer = {
        let fifo = Arc::new(fifo.clone());
        tokio::task::spawn_blocking(move || std::fs::OpenOptions::new().write(true).open(&*fifo).unwrap())
            .await
            .unwrap()
    };
    let (status, v) = say(&app, &id, "hello?").await;
    assert_eq!(status, StatusCode::CONFLICT, "{v}");

    tokio::task::spawn_blocking(move || {
        use std::io::Write;
        let mut writer = writer;
        writer.write_all(b"duration_ms: 900\nMy name is Max.\n").unwrap();
    })
    .await
    .unwrap();
    let (status, v) = first.await.unwrap();
    assert_eq!(status, StatusCode::OK, "{v}");
    assert!(v["bot_text"].as_str().unwrap().contains("Max"), "{v}");
}
