//! HTTP/JSON session service. Every mutation is appended to the learner's
//! event log and synced before the response is sent.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use qgen_core::corpus::{load_articles_dir, Level};
use qgen_core::question::QType;
use qgen_core::quizengine::{
    assemble_quiz, cohort_rectification, mean_sd, normalized_score, placement, rectification_rate, Applied,
    Bucket, ClientQuiz, Closure, CohortRate, Event, ItemBank, LearnerState, PerSkill, Quiz, QuizError, QuizKind,
    ResponseRecord, StateError,
};
use qgen_core::seed;
use qgen_core::sim::Materials;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::sync::{Mutex, RwLock};

use crate::config::{load_bank, ServiceConfig};
use crate::error::CliError;
use crate::store::{SessionLog, SessionStore, StoreError};

/// JSON error body: `{"error": "..."}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }
    fn conflict(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::CONFLICT, message)
    }
    fn unprocessable(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }
    fn not_found(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, format!("unknown session {id:?}"))
    }
    fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

impl From<StateError> for ApiError {
    fn from(e: StateError) -> Self {
        match e {
            StateError::Quiz(QuizError::InvalidOption(_) | QuizError::UnknownDelivery(_)) => {
                ApiError::unprocessable(e.to_string())
            }
            _ => ApiError::conflict(e.to_string()),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Exists(_) => ApiError::conflict(e.to_string()),
            _ => ApiError::internal(e.to_string()),
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: DeserializeOwned + Default>(body: &Bytes, allow_empty: bool) -> ApiResult<T> {
    if allow_empty && body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| ApiError::unprocessable(format!("malformed payload: {e}")))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    #[serde(default)]
    pub learner_id: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmitRequest {
    pub quiz_id: String,
    /// Chosen option per question position, each in 0..4.
    pub answers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateResponse {
    pub session_id: String,
    pub learner_id: String,
    pub quiz: ClientQuiz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleText {
    pub id: String,
    pub title: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityResponse {
    pub session_id: String,
    pub kind: QuizKind,
    pub activity: u32,
    /// Activities before the post-test.
    pub activities: u32,
    /// Source articles of the quiz's items, in order of first use.
    pub articles: Vec<ArticleText>,
    pub quiz: ClientQuiz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemResult {
    pub position: usize,
    pub qtype: QType,
    pub chosen: usize,
    pub correct: bool,
    /// Position of the correct option, revealed once the quiz is closed.
    pub correct_option: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitResponse {
    pub session_id: String,
    pub quiz_id: String,
    pub kind: QuizKind,
    pub activity: u32,
    pub results: Vec<ItemResult>,
    pub score: f64,
    /// Previously missed concepts answered correctly in this quiz.
    pub rectified: Vec<String>,
    pub proficiency_before: PerSkill<Level>,
    pub proficiency_after: PerSkill<Level>,
    /// Placement from the pretest; present only on pretest submissions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placement: Option<PerSkill<Level>>,
    /// True once the post-test has been submitted.
    pub complete: bool,
    pub profile: ProfileView,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenQuizView {
    pub quiz_id: String,
    pub kind: QuizKind,
    pub activity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissedConcept {
    pub qtype: QType,
    pub concept: String,
    pub missed_at: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rectified_at: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileView {
    pub session_id: String,
    pub learner_id: String,
    pub proficiency: PerSkill<Level>,
    /// Activities completed.
    pub activity: u32,
    pub activities: u32,
    pub pretest_done: bool,
    pub posttest_done: bool,
    pub open_quiz: Option<OpenQuizView>,
    pub placement: Option<PerSkill<Level>>,
    pub pretest_score: Option<f64>,
    pub posttest_score: Option<f64>,
    pub responses: usize,
    pub unrectified: Vec<MissedConcept>,
    pub rectified: Vec<MissedConcept>,
    pub rectification_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerMetrics {
    pub learner_id: String,
    pub activity: u32,
    pub complete: bool,
    pub placement: Option<PerSkill<Level>>,
    pub proficiency: PerSkill<Level>,
    pub pretest_score: Option<f64>,
    pub posttest_score: Option<f64>,
    pub gain: Option<f64>,
    pub rectification_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsResponse {
    pub sessions: usize,
    pub completed: usize,
    pub mean_gain: Option<f64>,
    pub rectification: CohortRate,
    pub learners: Vec<LearnerMetrics>,
}

struct Session {
    state: LearnerState,
    log: SessionLog,
}

/// Shared service state: the immutable bank and the live sessions.
pub struct Service {
    cfg: ServiceConfig,
    bank: ItemBank,
    materials: Materials,
    articles: BTreeMap<String, ArticleText>,
    store: SessionStore,
    sessions: RwLock<BTreeMap<String, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

fn valid_id(id: &str) -> bool {
    (1..=64).contains(&id.len()) && id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) && !id.starts_with('.')
}

fn test_score(state: &LearnerState, bucket: Bucket) -> Option<f64> {
    normalized_score(state.profile.history.iter().filter(|r| r.bucket == bucket))
}

fn pretest_responses(state: &LearnerState) -> Vec<ResponseRecord> {
    state
        .profile
        .history
        .iter()
        .filter(|r| r.bucket == Bucket::Pretest)
        .cloned()
        .collect()
}

impl Service {
    /// Loads the bank and articles and recovers every session in the store.
    pub fn open(cfg: ServiceConfig, data_dir: &Path) -> Result<Service, CliError> {
        let bank = load_bank(&cfg.bank)?;
        let materials = Materials::prepare(&bank, cfg.master_seed)?;
        let mut articles = BTreeMap::new();
        if let Some(dir) = &cfg.articles {
            for a in load_articles_dir(dir)? {
                let text = a.text();
                articles.insert(
                    a.id.clone(),
                    ArticleText {
                        id: a.id,
                        title: a.title,
                        text,
                    },
                );
            }
        }
        let store = SessionStore::open(data_dir)?;
        let mut sessions = BTreeMap::new();
        for r in store.recover(&cfg.estimator)? {
            if !r.snapshot_consistent {
                eprintln!("warning: session {}: snapshot disagrees with replayed log; using the log", r.id);
            }
            sessions.insert(
                r.id,
                Arc::new(Mutex::new(Session {
                    state: r.state,
                    log: r.log,
                })),
            );
        }
        let next_id = AtomicU64::new(sessions.len() as u64);
        Ok(Service {
            cfg,
            bank,
            materials,
            articles,
            store,
            sessions: RwLock::new(sessions),
            next_id,
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.cfg
    }

    pub fn bank(&self) -> &ItemBank {
        &self.bank
    }

    /// Current state of a session, if it exists.
    pub async fn state(&self, id: &str) -> Option<LearnerState> {
        let session = self.sessions.read().await.get(id).cloned()?;
        let s = session.lock().await;
        Some(s.state.clone())
    }

    fn quiz_seed(&self, learner: &str, kind: &str, activity: u32) -> u64 {
        seed::derive(self.cfg.master_seed, &["session", learner, kind, &activity.to_string()])
    }

    async fn session(&self, id: &str) -> ApiResult<Arc<Mutex<Session>>> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    /// Applies events to a copy of the state, logs them, then swaps the copy in.
    fn commit(&self, s: &mut Session, events: Vec<Event>) -> ApiResult<Vec<Applied>> {
        let mut next = s.state.clone();
        let applied = events
            .iter()
            .map(|e| next.apply(e, &self.cfg.estimator))
            .collect::<Result<Vec<_>, _>>()?;
        s.log.append(&events)?;
        s.state = next;
        if let Err(e) = s.log.snapshot(&s.state) {
            eprintln!("warning: {e}");
        }
        Ok(applied)
    }

    fn profile_view(&self, id: &str, state: &LearnerState) -> ProfileView {
        let p = &state.profile;
        let missed = |rectified: bool| {
            p.mistake_ledger
                .values()
                .filter(|e| e.rectified == rectified)
                .map(|e| MissedConcept {
                    qtype: e.qtype,
                    concept: e.concept.clone(),
                    missed_at: e.missed_at,
                    rectified_at: e.rectified_at,
                })
                .collect()
        };
        ProfileView {
            session_id: id.to_string(),
            learner_id: p.learner_id.clone(),
            proficiency: p.proficiency,
            activity: p.activity,
            activities: self.cfg.activities,
            pretest_done: state.pretest_done,
            posttest_done: state.posttest_done,
            open_quiz: state.open.as_ref().map(|o| OpenQuizView {
                quiz_id: o.quiz.id.clone(),
                kind: o.quiz.kind,
                activity: o.quiz.activity,
            }),
            placement: state.pretest_done.then(|| placement(&pretest_responses(state))),
            pretest_score: test_score(state, Bucket::Pretest),
            posttest_score: test_score(state, Bucket::Posttest),
            responses: p.history.len(),
            unrectified: missed(false),
            rectified: missed(true),
            rectification_rate: rectification_rate(p),
        }
    }

    fn activity_view(&self, id: &str, quiz: &Quiz) -> ActivityResponse {
        let mut articles: Vec<ArticleText> = Vec::new();
        for d in &quiz.deliveries {
            let Some(item) = self.bank.get(&d.item_id) else { continue };
            if articles.iter().any(|a| a.id == item.source.article) {
                continue;
            }
            if let Some(a) = self.articles.get(&item.source.article) {
                articles.push(a.clone());
            }
        }
        ActivityResponse {
            session_id: id.to_string(),
            kind: quiz.kind,
            activity: quiz.activity,
            activities: self.cfg.activities,
            articles,
            quiz: quiz.client_view(&self.bank),
        }
    }

    pub async fn create_session(&self, req: CreateRequest) -> ApiResult<CreateResponse> {
        let mut sessions = self.sessions.write().await;
        let id = match req.learner_id {
            Some(id) if valid_id(&id) => id,
            Some(id) => {
                return Err(ApiError::unprocessable(format!(
                    "learner_id {id:?}: use 1 to 64 of A-Z a-z 0-9 - _ ."
                )))
            }
            None => loop {
                let n = self.next_id.fetch_add(1, Ordering::Relaxed) + 1;
                let id = format!("learner-{n:06}");
                if !sessions.contains_key(&id) {
                    break id;
                }
            },
        };
        if sessions.contains_key(&id) {
            return Err(ApiError::conflict(format!("session {id:?} already exists")));
        }
        let quiz = self.materials.pretest.quiz(
            &self.materials.test_bank,
            QuizKind::Pretest,
            0,
            self.quiz_seed(&id, "pretest", 0),
        );
        let events = vec![
            Event::Created { learner_id: id.clone() },
            Event::Delivered { quiz: quiz.clone() },
        ];
        let mut state = LearnerState::new(id.clone());
        state.apply(&events[1], &self.cfg.estimator)?;
        let mut log = self.store.create(&id)?;
        log.append(&events)?;
        if let Err(e) = log.snapshot(&state) {
            eprintln!("warning: {e}");
        }
        sessions.insert(id.clone(), Arc::new(Mutex::new(Session { state, log })));
        Ok(CreateResponse {
            session_id: id.clone(),
            learner_id: id,
            quiz: quiz.client_view(&self.bank),
        })
    }

    async fn submit(&self, id: &str, req: SubmitRequest, pretest: bool) -> ApiResult<SubmitResponse> {
        let session = self.session(id).await?;
        let mut guard = session.lock().await;
        let s = &mut *guard;
        let open = s.state.open.as_ref().ok_or_else(|| ApiError::conflict("no quiz is open"))?;
        if open.quiz.id != req.quiz_id {
            return Err(ApiError::conflict(format!(
                "quiz {} is not the open quiz {}",
                req.quiz_id, open.quiz.id
            )));
        }
        if (open.quiz.kind == QuizKind::Pretest) != pretest {
            let route = if pretest { "/responses" } else { "/pretest" };
            let kind = if pretest { "an activity or post-test" } else { "the pretest" };
            return Err(ApiError::conflict(format!("the open quiz is {kind}; submit it to {route}")));
        }
        let n = open.quiz.deliveries.len();
        if req.answers.len() != n {
            return Err(ApiError::unprocessable(format!(
                "answers: expected {n} entries, got {}",
                req.answers.len()
            )));
        }
        if let Some((i, a)) = req.answers.iter().enumerate().find(|(_, &a)| a >= 4) {
            return Err(ApiError::unprocessable(format!("answers[{i}]: option {a} is out of range (0..4)")));
        }
        let quiz = open.quiz.clone();
        let ts = now_ms();
        let mut events: Vec<Event> = req
            .answers
            .iter()
            .enumerate()
            .map(|(position, &chosen)| Event::Answered {
                position,
                chosen,
                timestamp: ts,
            })
            .collect();
        events.push(Event::Closed { timestamp: ts });
        let applied = self.commit(s, events)?;
        let Some(Applied::Closed(closure)) = applied.into_iter().last() else {
            return Err(ApiError::internal("closing the quiz produced no closure"));
        };
        Ok(self.submit_view(id, &s.state, &quiz, closure))
    }

    fn submit_view(&self, id: &str, state: &LearnerState, quiz: &Quiz, closure: Closure) -> SubmitResponse {
        let results = closure
            .responses
            .iter()
            .zip(&quiz.deliveries)
            .enumerate()
            .map(|(position, (r, d))| ItemResult {
                position,
                qtype: r.qtype,
                chosen: r.chosen,
                correct: r.correct,
                correct_option: d.correct_index,
            })
            .collect();
        SubmitResponse {
            session_id: id.to_string(),
            quiz_id: closure.quiz_id.clone(),
            kind: closure.kind,
            activity: closure.activity,
            results,
            score: normalized_score(closure.responses.iter()).unwrap_or(0.0),
            rectified: closure.rectified.clone(),
            proficiency_before: closure.proficiency_before,
            proficiency_after: closure.proficiency_after,
            placement: (closure.kind == QuizKind::Pretest).then_some(closure.proficiency_after),
            complete: state.posttest_done,
            profile: self.profile_view(id, state),
        }
    }

    pub async fn submit_pretest(&self, id: &str, req: SubmitRequest) -> ApiResult<SubmitResponse> {
        self.submit(id, req, true).await
    }

    pub async fn submit_responses(&self, id: &str, req: SubmitRequest) -> ApiResult<SubmitResponse> {
        self.submit(id, req, false).await
    }

    /// The open activity or post-test, or the next one, delivering it if new.
    pub async fn next_activity(&self, id: &str) -> ApiResult<ActivityResponse> {
        let session = self.session(id).await?;
        let mut guard = session.lock().await;
        let s = &mut *guard;
        if let Some(open) = &s.state.open {
            if open.quiz.kind == QuizKind::Pretest {
                return Err(ApiError::conflict("submit the pretest first"));
            }
            return Ok(self.activity_view(id, &open.quiz));
        }
        if s.state.posttest_done {
            return Err(ApiError::conflict("session complete: the post-test has been submitted"));
        }
        let done = s.state.profile.activity;
        let learner = s.state.profile.learner_id.clone();
        let quiz = if done < self.cfg.activities {
            assemble_quiz(
                &self.materials.activity_bank,
                &s.state.profile,
                &self.cfg.quiz,
                self.quiz_seed(&learner, "activity", done + 1),
            )
            .map_err(|e| ApiError::internal(e.to_string()))?
        } else {
            self.materials.posttest.quiz(
                &self.materials.test_bank,
                QuizKind::Posttest,
                done,
                self.quiz_seed(&learner, "posttest", done),
            )
        };
        self.commit(s, vec![Event::Delivered { quiz: quiz.clone() }])?;
        Ok(self.activity_view(id, &quiz))
    }

    pub async fn profile(&self, id: &str) -> ApiResult<ProfileView> {
        let session = self.session(id).await?;
        let s = session.lock().await;
        Ok(self.profile_view(id, &s.state))
    }

    pub async fn metrics(&self) -> MetricsResponse {
        let sessions: Vec<Arc<Mutex<Session>>> = self.sessions.read().await.values().cloned().collect();
        let mut states = Vec::with_capacity(sessions.len());
        for s in sessions {
            states.push(s.lock().await.state.clone());
        }
        let learners: Vec<LearnerMetrics> = states
            .iter()
            .map(|st| {
                let pre = test_score(st, Bucket::Pretest);
                let post = test_score(st, Bucket::Posttest);
                LearnerMetrics {
                    learner_id: st.profile.learner_id.clone(),
                    activity: st.profile.activity,
                    complete: st.posttest_done,
                    placement: st.pretest_done.then(|| placement(&pretest_responses(st))),
                    proficiency: st.profile.proficiency,
                    pretest_score: pre,
                    posttest_score: post,
                    gain: pre.zip(post).map(|(a, b)| b - a),
                    rectification_rate: rectification_rate(&st.profile),
                }
            })
            .collect();
        let gains: Vec<f64> = learners.iter().filter_map(|l| l.gain).collect();
        MetricsResponse {
            sessions: learners.len(),
            completed: learners.iter().filter(|l| l.complete).count(),
            mean_gain: mean_sd(&gains).map(|m| m.0),
            rectification: cohort_rectification(states.iter().map(|s| &s.profile)),
            learners,
        }
    }
}

async fn create_session(State(svc): State<Arc<Service>>, body: Bytes) -> ApiResult<(StatusCode, Json<CreateResponse>)> {
    let req: CreateRequest = parse_body(&body, true)?;
    Ok((StatusCode::CREATED, Json(svc.create_session(req).await?)))
}

async fn submit_pretest(
    State(svc): State<Arc<Service>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<Json<SubmitResponse>> {
    svc.session(&id).await?;
    let req = parse_body(&body, false)?;
    Ok(Json(svc.submit_pretest(&id, req).await?))
}

async fn next_activity(State(svc): State<Arc<Service>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<ActivityResponse>> {
    Ok(Json(svc.next_activity(&id).await?))
}

async fn submit_responses(
    State(svc): State<Arc<Service>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<Json<SubmitResponse>> {
    svc.session(&id).await?;
    let req = parse_body(&body, false)?;
    Ok(Json(svc.submit_responses(&id, req).await?))
}

async fn get_profile(State(svc): State<Arc<Service>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<ProfileView>> {
    Ok(Json(svc.profile(&id).await?))
}

async fn get_metrics(State(svc): State<Arc<Service>>) -> Json<MetricsResponse> {
    Json(svc.metrics().await)
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/pretest", post(submit_pretest))
        .route("/sessions/{id}/activity", get(next_activity))
        .route("/sessions/{id}/responses", post(submit_responses))
        .route("/sessions/{id}/profile", get(get_profile))
        .route("/metrics", get(get_metrics))
        .with_state(service)
}

/// Serves until interrupted.
pub async fn serve(service: Arc<Service>) -> std::io::Result<()> {
    let addr = format!("{}:{}", service.cfg.host, service.cfg.port);
    let listener = tokio::net::TcpListener::bind(&addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
