//! Local HTTP service for the designer review loop: create a session from
//! component files, review and decide conflicts, preview, finalize.

mod error;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex as StdMutex};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use bcfuse_core::align::{alignment_export, AlignmentParams, ConceptRef, RelationType};
use bcfuse_core::merge::IntegrationReport;
use bcfuse_core::pipeline::{ComponentSource, Finalized, PipelineInput, Prepared};
use bcfuse_core::resolve::{ActionKind, Conflict, ConflictStatus, HistoryStore, ResolutionAction};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tokio::sync::{Mutex, RwLock};

pub use error::ApiError;

pub const DEFAULT_PORT: u16 = 7341;

type Clock = dyn Fn() -> DateTime<Utc> + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Reviewing,
    Finalized,
}

struct Session {
    prepared: Prepared,
    phase: Phase,
    result: Option<Finalized>,
}

/// Shared service state. The history store is shared by all sessions and
/// written through on every decision.
#[derive(Clone)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Arc<Mutex<Session>>>>>,
    history: Arc<StdMutex<HistoryStore>>,
    clock: Arc<Clock>,
}

impl AppState {
    pub fn new(history: HistoryStore) -> Self {
        Self::with_clock(history, Utc::now)
    }

    pub fn with_clock(
        history: HistoryStore,
        clock: impl Fn() -> DateTime<Utc> + Send + Sync + 'static,
    ) -> Self {
        AppState {
            sessions: Arc::default(),
            history: Arc::new(StdMutex::new(history)),
            clock: Arc::new(clock),
        }
    }

    /// Number of records currently in the shared history.
    pub fn history_len(&self) -> usize {
        self.history.lock().expect("history lock").history().len()
    }

    /// Creates a session directly, as `POST /sessions` does.
    pub async fn create_session(&self, input: &PipelineInput) -> Result<SessionView, ApiError> {
        let prepared = {
            let store = self.history.lock().expect("history lock");
            Prepared::new(input, store.history())?
        };
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Session {
            prepared,
            phase: Phase::Reviewing,
            result: None,
        };
        let view = SessionView::new(&id, &session);
        self.sessions
            .write()
            .await
            .insert(id, Arc::new(Mutex::new(session)));
        Ok(view)
    }

    async fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::session_not_found(id))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/conflicts", get(list_conflicts))
        .route("/sessions/{id}/conflicts/{index}/decision", post(decide))
        .route("/sessions/{id}/preview", get(preview))
        .route("/sessions/{id}/finalize", post(finalize))
        .route("/sessions/{id}/alignment", get(alignment))
        .with_state(state)
}

/// Binds and serves until the process is stopped.
pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ComponentUpload {
    Text(String),
    Named { name: String, text: String },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ParamsBody {
    pub anchor_threshold: Option<f64>,
    pub homonym_attr_jaccard_max: Option<f64>,
    pub lexical_weight: Option<f64>,
}

/// `POST /sessions` body; files are embedded as text.
#[derive(Debug, Clone, Deserialize)]
pub struct CreateSessionBody {
    pub components: Vec<ComponentUpload>,
    pub domain: String,
    #[serde(default)]
    pub lexicon: Option<String>,
    #[serde(default)]
    pub params: ParamsBody,
}

impl CreateSessionBody {
    pub fn into_input(self) -> Result<PipelineInput, ApiError> {
        let d = AlignmentParams::default();
        let p = self.params;
        let params = AlignmentParams::new(
            p.anchor_threshold.unwrap_or(d.anchor_threshold),
            p.homonym_attr_jaccard_max
                .unwrap_or(d.homonym_attr_jaccard_max),
            p.lexical_weight.unwrap_or(d.lexical_weight),
        )
        .map_err(|e| {
            ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "INVALID_INPUT",
                e.to_string(),
            )
        })?;
        let components = self
            .components
            .into_iter()
            .enumerate()
            .map(|(i, c)| match c {
                ComponentUpload::Text(text) => ComponentSource {
                    origin: format!("components[{i}]"),
                    text,
                },
                ComponentUpload::Named { name, text } => ComponentSource { origin: name, text },
            })
            .collect();
        Ok(PipelineInput {
            components,
            domain: self.domain,
            lexicon: self.lexicon,
            params,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConflictView {
    pub index: usize,
    pub source: ConceptRef,
    pub target: ConceptRef,
    pub relation: RelationType,
    pub confidence: f64,
    pub anchor: Option<String>,
    pub context_key: String,
    pub default_action: ResolutionAction,
    pub recommended_action: ResolutionAction,
    pub from_history: bool,
    /// Every legal action with default parameters, default first.
    pub alternatives: Vec<ResolutionAction>,
    pub legal_actions: Vec<ActionKind>,
    pub status: ConflictStatus,
}

impl ConflictView {
    pub fn new(index: usize, c: &Conflict) -> Self {
        let rule = c.rule();
        let legal: Vec<ActionKind> = std::iter::once(rule.default_action)
            .chain(rule.alternatives.iter().copied())
            .collect();
        ConflictView {
            index,
            source: c.correspondence.source.clone(),
            target: c.correspondence.target.clone(),
            relation: c.correspondence.relation,
            confidence: c.correspondence.confidence,
            anchor: c.correspondence.anchor().map(str::to_string),
            context_key: c.context_key.clone(),
            default_action: c.default_action.clone(),
            recommended_action: c.recommended_action.clone(),
            from_history: c.recommended_action != c.default_action,
            alternatives: legal.iter().map(|k| c.instantiate(*k)).collect(),
            legal_actions: legal,
            status: c.status.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionView {
    pub id: String,
    pub phase: Phase,
    pub pending: Vec<usize>,
    pub conflicts: Vec<ConflictView>,
}

impl SessionView {
    fn new(id: &str, s: &Session) -> Self {
        SessionView {
            id: id.to_string(),
            phase: s.phase,
            pending: s.prepared.pending(),
            conflicts: s
                .prepared
                .conflicts
                .iter()
                .enumerate()
                .map(|(i, c)| ConflictView::new(i, c))
                .collect(),
        }
    }
}

/// Accepts either the structured form `{"kind": "renameSame", "label": ..}`
/// or the compact text form `"renameSame(Paper)"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ActionInput {
    Structured(ResolutionAction),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
pub struct DecisionBody {
    pub action: ActionInput,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinalizeView {
    pub bcm: String,
    pub report: String,
    pub entries: IntegrationReport,
}

impl From<&Finalized> for FinalizeView {
    fn from(f: &Finalized) -> Self {
        FinalizeView {
            bcm: f.bcm.clone(),
            report: f.report_text(),
            entries: f.report.clone(),
        }
    }
}

fn json_body<T>(body: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    body.map(|Json(b)| b)
        .map_err(|e| ApiError::bad_request(e.body_text()))
}

async fn create_session(
    State(state): State<AppState>,
    body: Result<Json<CreateSessionBody>, JsonRejection>,
) -> Result<impl IntoResponse, ApiError> {
    let input = json_body(body)?.into_input()?;
    let view = state.create_session(&input).await?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn list_conflicts(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<SessionView>, ApiError> {
    let session = state.session(&id).await?;
    let s = session.lock().await;
    Ok(Json(SessionView::new(&id, &s)))
}

async fn decide(
    State(state): State<AppState>,
    Path((id, index)): Path<(String, usize)>,
    body: Result<Json<DecisionBody>, JsonRejection>,
) -> Result<Json<ConflictView>, ApiError> {
    let action = match json_body(body)?.action {
        ActionInput::Structured(a) => a,
        ActionInput::Text(t) => t.parse().map_err(|e: bcfuse_core::resolve::ResolveError| {
            ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "ILLEGAL_ACTION",
                e.to_string(),
            )
        })?,
    };
    let session = state.session(&id).await?;
    let mut s = session.lock().await;
    if s.phase == Phase::Finalized {
        return Err(ApiError::finalized());
    }
    {
        let mut store = state.history.lock().expect("history lock");
        s.prepared
            .decide(index, action, &mut store, (state.clock)())?;
    }
    Ok(Json(ConflictView::new(index, &s.prepared.conflicts[index])))
}

async fn preview(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<bcfuse_core::merge::Preview>, ApiError> {
    let session = state.session(&id).await?;
    let s = session.lock().await;
    Ok(Json(s.prepared.preview()?))
}

async fn finalize(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<FinalizeView>, ApiError> {
    let session = state.session(&id).await?;
    let mut s = session.lock().await;
    if let Some(done) = &s.result {
        return Ok(Json(done.into()));
    }
    let done = s.prepared.finalize()?;
    let view = FinalizeView::from(&done);
    s.result = Some(done);
    s.phase = Phase::Finalized;
    Ok(Json(view))
}

async fn alignment(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<Value>, ApiError> {
    let session = state.session(&id).await?;
    let s = session.lock().await;
    Ok(Json(alignment_export(&s.prepared.alignment)))
}
