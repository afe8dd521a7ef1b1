//! Session service over the synthetic bank, driven through the router.

use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use qgen::config::ServiceConfig;
use qgen::server::{router, Service};
use qgen::store::{read_log, read_snapshot};
use qgen_core::quizengine::replay;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};
use tower::ServiceExt;

const CONFIG: &str = r#"
master_seed = 11
activities = 12
[bank]
kind = "synthetic"
"#;

fn config(activities: u32) -> ServiceConfig {
    let mut cfg = ServiceConfig::parse_toml(CONFIG).unwrap();
    cfg.activities = activities;
    cfg
}

fn open(dir: &Path, activities: u32) -> Arc<Service> {
    Arc::new(Service::open(config(activities), dir).unwrap())
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let body = body.map_or_else(Body::empty, |v| Body::from(v.to_string()));
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body)
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

async fn raw(app: &Router, method: &str, uri: &str, body: &str) -> StatusCode {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    app.clone().oneshot(req).await.unwrap().status()
}

fn answers(quiz: &Value, rng: &mut impl Rng) -> Value {
    let n = quiz["questions"].as_array().unwrap().len();
    json!((0..n).map(|_| rng.gen_range(0..4)).collect::<Vec<usize>>())
}

fn submission(quiz: &Value, rng: &mut impl Rng) -> Value {
    json!({ "quiz_id": quiz["quiz_id"], "answers": answers(quiz, rng) })
}

async fn create(app: &Router, learner: &str) -> Value {
    let (status, body) = call(app, "POST", "/sessions", Some(json!({ "learner_id": learner }))).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    body
}

/// Runs a learner from creation through the post-test, returning every response body.
async fn full_session(app: &Router, learner: &str, activities: u32, seed: u64) -> Vec<Value> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut seen = vec![create(app, learner).await];
    let pre = seen[0]["quiz"].clone();
    let (status, body) = call(app, "POST", &format!("/sessions/{learner}/pretest"), Some(submission(&pre, &mut rng))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    seen.push(body);
    for a in 1..=activities + 1 {
        let (status, act) = call(app, "GET", &format!("/sessions/{learner}/activity"), None).await;
        assert_eq!(status, StatusCode::OK, "{act}");
        if a <= activities {
            assert_eq!(act["kind"], "activity");
            assert_eq!(act["activity"], a);
        } else {
            assert_eq!(act["kind"], "posttest");
        }
        let (status, res) = call(
            app,
            "POST",
            &format!("/sessions/{learner}/responses"),
            Some(submission(&act["quiz"], &mut rng)),
        )
        .await;
        assert_eq!(status, StatusCode::OK, "{res}");
        seen.push(act);
        seen.push(res);
    }
    seen
}

const QUIZ_KEYS: [&str; 4] = ["quiz_id", "kind", "activity", "questions"];
const QUESTION_KEYS: [&str; 5] = ["position", "qtype", "difficulty", "stem", "options"];

fn audit_quiz(quiz: &Value) {
    let obj = quiz.as_object().unwrap();
    assert!(obj.keys().all(|k| QUIZ_KEYS.contains(&k.as_str())), "quiz keys {:?}", obj.keys());
    for q in quiz["questions"].as_array().unwrap() {
        let obj = q.as_object().unwrap();
        let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        keys.sort();
        let mut want = QUESTION_KEYS.to_vec();
        want.sort();
        assert_eq!(keys, want);
        assert_eq!(q["options"].as_array().unwrap().len(), 4);
    }
}

#[tokio::test]
async fn twelve_activity_session_replays_to_the_same_profile() {
    let dir = tempfile::tempdir().unwrap();
    let svc = open(dir.path(), 12);
    let app = router(svc.clone());
    let seen = full_session(&app, "ada", 12, 1).await;

    let last = seen.last().unwrap();
    assert_eq!(last["kind"], "posttest");
    assert_eq!(last["complete"], true);
    let (status, profile) = call(&app, "GET", "/sessions/ada/profile", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(profile["activity"], 12);
    assert_eq!(profile["posttest_done"], true);
    assert_eq!(profile["responses"], 28 + 12 * 18 + 28);

    // the log alone reproduces the live state, and so does the snapshot
    let live = svc.state("ada").await.unwrap();
    let session_dir = dir.path().join("sessions/ada");
    let events = read_log(&session_dir.join("events.jsonl")).unwrap();
    assert_eq!(events.len(), 1 + 14 + 14 + 28 + 12 * 18 + 28);
    let replayed = replay(&events, &config(12).estimator).unwrap();
    assert_eq!(replayed, live);
    let snap = read_snapshot(&session_dir).unwrap().unwrap();
    assert_eq!(snap.events, events.len());
    assert_eq!(snap.state, live);

    // a restarted service serves the same profile
    drop(app);
    drop(svc);
    let again = router(open(dir.path(), 12));
    let (_, reloaded) = call(&again, "GET", "/sessions/ada/profile", None).await;
    assert_eq!(reloaded, profile);

    let (status, _) = call(&again, "GET", "/sessions/ada/activity", None).await;
    assert_eq!(status, StatusCode::CONFLICT, "a finished session serves nothing more");
}

#[tokio::test]
async fn every_acknowledged_request_survives_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let mut svc = open(dir.path(), 3);
    let learner = "grace";
    let mut step = 0;
    loop {
        let app = router(svc.clone());
        let (status, body) = match step {
            0 => call(&app, "POST", "/sessions", Some(json!({ "learner_id": learner }))).await,
            1 => {
                let quiz = svc.state(learner).await.unwrap().open.unwrap().quiz;
                let sub = json!({ "quiz_id": quiz.id, "answers": (0..quiz.deliveries.len()).map(|_| rng.gen_range(0..4)).collect::<Vec<usize>>() });
                call(&app, "POST", &format!("/sessions/{learner}/pretest"), Some(sub)).await
            }
            s if s % 2 == 0 => call(&app, "GET", &format!("/sessions/{learner}/activity"), None).await,
            _ => {
                let quiz = svc.state(learner).await.unwrap().open.unwrap().quiz;
                let sub = json!({ "quiz_id": quiz.id, "answers": (0..quiz.deliveries.len()).map(|_| rng.gen_range(0..4)).collect::<Vec<usize>>() });
                call(&app, "POST", &format!("/sessions/{learner}/responses"), Some(sub)).await
            }
        };
        assert!(status.is_success(), "step {step}: {body}");
        let before = svc.state(learner).await.unwrap();
        drop(app);
        svc = open(dir.path(), 3);
        assert_eq!(svc.state(learner).await.unwrap(), before, "state lost after step {step}");
        if before.posttest_done {
            break;
        }
        step += 1;
    }
    assert_eq!(step, 1 + 2 * 4);
}

#[tokio::test]
async fn torn_tail_is_dropped_on_recovery() {
    let dir = tempfile::tempdir().unwrap();
    let svc = open(dir.path(), 2);
    let app = router(svc.clone());
    create(&app, "lin").await;
    let before = svc.state("lin").await.unwrap();
    drop(app);
    drop(svc);
    let log = dir.path().join("sessions/lin/events.jsonl");
    let mut text = std::fs::read_to_string(&log).unwrap();
    text.push_str("{\"event\":\"answ");
    std::fs::write(&log, text).unwrap();

    let svc = open(dir.path(), 2);
    assert_eq!(svc.state("lin").await.unwrap(), before);
    // the next append starts on a fresh line
    let app = router(svc.clone());
    let quiz = before.open.unwrap().quiz;
    let sub = json!({ "quiz_id": quiz.id, "answers": vec![0; quiz.deliveries.len()] });
    let (status, _) = call(&app, "POST", "/sessions/lin/pretest", Some(sub)).await;
    assert_eq!(status, StatusCode::OK);
    let events = read_log(&log).unwrap();
    assert_eq!(replay(&events, &config(2).estimator).unwrap(), svc.state("lin").await.unwrap());
}

#[tokio::test]
async fn malformed_payloads_are_unprocessable() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(open(dir.path(), 2));
    let created = create(&app, "mo").await;
    let quiz = &created["quiz"];
    let n = quiz["questions"].as_array().unwrap().len();
    let uri = "/sessions/mo/pretest";

    let mut five = vec![0usize; n];
    five[3] = 5;
    let (status, body) = call(&app, "POST", uri, Some(json!({ "quiz_id": quiz["quiz_id"], "answers": five }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["error"].as_str().unwrap().contains("answers[3]"), "{body}");

    let short = vec![0usize; n - 1];
    let (status, _) = call(&app, "POST", uri, Some(json!({ "quiz_id": quiz["quiz_id"], "answers": short }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(raw(&app, "POST", uri, "{not json").await, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(raw(&app, "POST", uri, r#"{"quiz_id": 3}"#).await, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(
        raw(&app, "POST", uri, &json!({ "quiz_id": quiz["quiz_id"], "answers": [-1] }).to_string()).await,
        StatusCode::UNPROCESSABLE_ENTITY
    );
    assert_eq!(
        raw(&app, "POST", "/sessions", r#"{"learner_id": "../etc"}"#).await,
        StatusCode::UNPROCESSABLE_ENTITY
    );
    assert_eq!(raw(&app, "POST", "/sessions", r#"{"name": "x"}"#).await, StatusCode::UNPROCESSABLE_ENTITY);

    // none of the rejected submissions was recorded
    let (_, profile) = call(&app, "GET", "/sessions/mo/profile", None).await;
    assert_eq!(profile["responses"], 0);
    assert_eq!(profile["pretest_done"], false);
}

#[tokio::test]
async fn unknown_sessions_are_not_found() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(open(dir.path(), 2));
    for (method, uri) in [
        ("GET", "/sessions/nobody/profile"),
        ("GET", "/sessions/nobody/activity"),
        ("POST", "/sessions/nobody/pretest"),
        ("POST", "/sessions/nobody/responses"),
    ] {
        let (status, _) = call(&app, method, uri, Some(json!({ "quiz_id": "x", "answers": [] }))).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{method} {uri}");
    }
}

#[tokio::test]
async fn stale_and_misrouted_submissions_conflict() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(open(dir.path(), 2));
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let created = create(&app, "kay").await;
    let (status, _) = call(&app, "POST", "/sessions", Some(json!({ "learner_id": "kay" }))).await;
    assert_eq!(status, StatusCode::CONFLICT, "duplicate learner");

    let pre = created["quiz"].clone();
    let (status, _) = call(&app, "GET", "/sessions/kay/activity", None).await;
    assert_eq!(status, StatusCode::CONFLICT, "pretest comes first");
    let (status, _) = call(&app, "POST", "/sessions/kay/responses", Some(submission(&pre, &mut rng))).await;
    assert_eq!(status, StatusCode::CONFLICT, "pretest goes to its own endpoint");
    let (status, _) = call(&app, "POST", "/sessions/kay/pretest", Some(submission(&pre, &mut rng))).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = call(&app, "POST", "/sessions/kay/pretest", Some(submission(&pre, &mut rng))).await;
    assert_eq!(status, StatusCode::CONFLICT, "resubmitting a closed quiz");

    let (_, first) = call(&app, "GET", "/sessions/kay/activity", None).await;
    let (_, again) = call(&app, "GET", "/sessions/kay/activity", None).await;
    assert_eq!(first, again, "an open activity is served again unchanged");
    let (status, _) = call(&app, "POST", "/sessions/kay/responses", Some(submission(&pre, &mut rng))).await;
    assert_eq!(status, StatusCode::CONFLICT, "stale quiz id");
    let (status, _) = call(&app, "POST", "/sessions/kay/responses", Some(submission(&first["quiz"], &mut rng))).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_submits_have_one_winner() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(open(dir.path(), 2));
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    for round in 0..10 {
        let learner = format!("pair-{round}");
        let created = create(&app, &learner).await;
        let body = submission(&created["quiz"], &mut rng);
        let uri = format!("/sessions/{learner}/pretest");
        let (a, b) = tokio::join!(
            tokio::spawn({
                let (app, uri, body) = (app.clone(), uri.clone(), body.clone());
                async move { call(&app, "POST", &uri, Some(body)).await.0 }
            }),
            tokio::spawn({
                let (app, uri, body) = (app.clone(), uri.clone(), body.clone());
                async move { call(&app, "POST", &uri, Some(body)).await.0 }
            })
        );
        let mut got = [a.unwrap(), b.unwrap()];
        got.sort();
        assert_eq!(got, [StatusCode::OK, StatusCode::CONFLICT], "round {round}");
        let (_, profile) = call(&app, "GET", &format!("/sessions/{learner}/profile"), None).await;
        assert_eq!(profile["responses"], 28);
    }
}

#[tokio::test]
async fn client_payloads_carry_no_answer_key() {
    let dir = tempfile::tempdir().unwrap();
    let svc = open(dir.path(), 2);
    let app = router(svc.clone());
    let seen = full_session(&app, "ivy", 2, 4).await;
    let mut quizzes = 0;
    for body in &seen {
        if let Some(quiz) = body.get("quiz") {
            audit_quiz(quiz);
            quizzes += 1;
            let text = quiz.to_string();
            for banned in ["correct", "item_id", "concept", "bucket", "order", "canonical"] {
                assert!(!text.contains(&format!("\"{banned}")), "{banned} leaked");
            }
        }
    }
    assert_eq!(quizzes, 1 + 2 + 1);

    // options are shuffled per delivery, so the correct position varies
    let mut at = [0usize; 4];
    for body in &seen {
        for r in body.get("results").and_then(Value::as_array).into_iter().flatten() {
            at[r["correct_option"].as_u64().unwrap() as usize] += 1;
        }
    }
    assert!(at.iter().all(|&c| c > 0), "{at:?}");
    assert!(svc.state("ivy").await.unwrap().posttest_done);
}

#[tokio::test]
async fn metrics_match_each_learners_profile() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(open(dir.path(), 3));
    full_session(&app, "a1", 3, 10).await;
    full_session(&app, "a2", 3, 11).await;
    create(&app, "a3").await;
    let (status, metrics) = call(&app, "GET", "/metrics", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(metrics["sessions"], 3);
    assert_eq!(metrics["completed"], 2);
    for l in metrics["learners"].as_array().unwrap() {
        let id = l["learner_id"].as_str().unwrap();
        let (_, p) = call(&app, "GET", &format!("/sessions/{id}/profile"), None).await;
        for k in ["pretest_score", "posttest_score", "placement", "proficiency", "rectification_rate", "activity"] {
            assert_eq!(l[k], p[k], "{id} {k}");
        }
    }
    let gains: Vec<f64> = metrics["learners"]
        .as_array()
        .unwrap()
        .iter()
        .filter_map(|l| l["gain"].as_f64())
        .collect();
    assert_eq!(gains.len(), 2);
    let mean = metrics["mean_gain"].as_f64().unwrap();
    assert!((mean - (gains[0] + gains[1]) / 2.0).abs() < 1e-12);
}

#[tokio::test]
async fn generated_ids_are_unique() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(open(dir.path(), 2));
    let (_, a) = call(&app, "POST", "/sessions", None).await;
    let (_, b) = call(&app, "POST", "/sessions", Some(json!({}))).await;
    assert_ne!(a["session_id"], b["session_id"]);
    assert_eq!(a["quiz"]["kind"], "pretest");
    assert_eq!(a["quiz"]["questions"].as_array().unwrap().len(), 28);
}
