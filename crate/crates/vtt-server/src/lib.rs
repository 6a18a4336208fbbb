//! HTTP front of a Visual Turing Test session.
//!
//! Rater routes (`next`, `progress`, `payload`, `rating`) never expose the
//! hidden truth or how many cases belong to each cohort. Admin routes
//! (`report`, `ratings.csv`) require `Authorization: Bearer <token>`.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use medsynth_core::io::{nifti, render_slice_png, Window};
use medsynth_core::vtt::{
    session_report, write_ratings_csv, Journal, Presentation, ReportConfig, SessionConfig, VttSession,
};
use medsynth_core::{Error, ErrorCategory, IntensityKind, Volume};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

/// One session together with the directory its case files live in.
pub struct HostedSession {
    pub session: VttSession,
    pub payload_dir: PathBuf,
}

impl HostedSession {
    pub fn new(session: VttSession, payload_dir: impl Into<PathBuf>) -> Self {
        Self { session, payload_dir: payload_dir.into() }
    }

    /// Loads the config and opens (or creates) its journal.
    pub fn open(config: &Path, journal: &Path, payload_dir: &Path) -> medsynth_core::Result<Self> {
        let cfg = SessionConfig::load(config)?;
        Ok(Self {
            session: VttSession::new(cfg, Journal::open(journal)?)?,
            payload_dir: payload_dir.to_path_buf(),
        })
    }
}

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<BTreeMap<String, HostedSession>>,
    admin_token: Option<Arc<str>>,
}

impl AppState {
    /// Without a token the admin routes answer 403.
    pub fn new(sessions: Vec<HostedSession>, admin_token: Option<String>) -> Self {
        let sessions = sessions.into_iter().map(|s| (s.session.config.id.clone(), s)).collect();
        Self {
            sessions: Arc::new(sessions),
            admin_token: admin_token.map(Arc::from),
        }
    }

    fn session(&self, id: &str) -> Result<&HostedSession, ApiError> {
        self.sessions
            .get(id)
            .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("unknown session `{id}`")))
    }

    fn check_admin(&self, headers: &HeaderMap) -> Result<(), ApiError> {
        let Some(token) = &self.admin_token else {
            return Err(ApiError(StatusCode::FORBIDDEN, "admin routes are disabled".into()));
        };
        let given = headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        if given == Some(token.as_ref()) {
            Ok(())
        } else {
            Err(ApiError(StatusCode::UNAUTHORIZED, "missing or wrong admin token".into()))
        }
    }
}

#[derive(Debug)]
pub struct ApiError(pub StatusCode, pub String);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match (&e, e.category()) {
            (Error::UnknownName { .. }, _) => StatusCode::NOT_FOUND,
            (_, ErrorCategory::Io) => StatusCode::INTERNAL_SERVER_ERROR,
            (_, ErrorCategory::Validation) => StatusCode::UNPROCESSABLE_ENTITY,
            (_, ErrorCategory::Numeric) => StatusCode::CONFLICT,
        };
        ApiError(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

#[derive(Deserialize)]
struct RaterQuery {
    rater: String,
}

#[derive(Deserialize)]
struct ReportQuery {
    preset: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatingSubmission {
    pub rater_id: String,
    pub case_id: String,
    pub score: u8,
}

/// Rater-facing acknowledgement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatingAck {
    pub case_id: String,
    pub score: u8,
    pub rated: usize,
    pub total: usize,
}

async fn next_case(
    State(st): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<RaterQuery>,
) -> Result<Response, ApiError> {
    let s = st.session(&id)?;
    match s.session.next_case(&q.rater)? {
        Some(next) => Ok(Json(next).into_response()),
        None => Ok(Json(serde_json::json!({ "done": true })).into_response()),
    }
}

async fn progress(
    State(st): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<RaterQuery>,
) -> Result<Response, ApiError> {
    Ok(Json(st.session(&id)?.session.progress(&q.rater)?).into_response())
}

async fn submit(
    State(st): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Json(body): Json<RatingSubmission>,
) -> Result<Response, ApiError> {
    let s = st.session(&id)?;
    let rec = s.session.submit(&body.rater_id, &body.case_id, body.score)?;
    let p = s.session.progress(&body.rater_id)?;
    Ok(Json(RatingAck { case_id: rec.case_id, score: rec.score, rated: p.rated, total: p.total }).into_response())
}

fn window_for(v: &Volume) -> Window {
    match v.kind() {
        IntensityKind::Hu => Window::CT_SOFT_TISSUE,
        IntensityKind::Normalized => Window::NORMALIZED,
        IntensityKind::Arbitrary => {
            let (lo, hi) = v.min_max();
            let width = if hi > lo { hi - lo } else { 1.0 };
            Window { center: lo + width / 2.0, width }
        }
    }
}

/// Slice cases come back as PNG, volume cases as a re-encoded NIfTI so the
/// original header (description, file name) never reaches the rater.
async fn payload(
    State(st): State<AppState>,
    UrlPath((id, case_id)): UrlPath<(String, String)>,
) -> Result<Response, ApiError> {
    let s = st.session(&id)?;
    let case = s
        .session
        .config
        .case(&case_id)
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("unknown case `{case_id}`")))?
        .clone();
    let path = s.payload_dir.join(&case.file);
    let bytes = tokio::task::spawn_blocking(move || -> medsynth_core::Result<(Vec<u8>, &'static str)> {
        let v = nifti::read_volume(&path, IntensityKind::Arbitrary)?;
        match case.presentation {
            Presentation::Slice => {
                let slice = case.slice.unwrap_or(medsynth_core::vtt::SliceRef { axis: 2, index: v.dims()[2] / 2 });
                Ok((render_slice_png(&v, slice.axis, slice.index, window_for(&v))?, "image/png"))
            }
            Presentation::Volume => Ok((nifti::encode_volume(&v)?, "application/octet-stream")),
        }
    })
    .await
    .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let ext = if bytes.1 == "image/png" { "png" } else { "nii" };
    Ok((
        [
            (header::CONTENT_TYPE, bytes.1.to_string()),
            (header::CONTENT_DISPOSITION, format!("inline; filename=\"{case_id}.{ext}\"")),
        ],
        bytes.0,
    )
        .into_response())
}

async fn report(
    State(st): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<ReportQuery>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    st.check_admin(&headers)?;
    let s = st.session(&id)?;
    let rc = ReportConfig::preset(q.preset.as_deref().unwrap_or("default"))?;
    let rep = session_report(&s.session.config, &s.session.journal.records(), &rc)?;
    Ok(Json(rep).into_response())
}

async fn ratings_csv(
    State(st): State<AppState>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    st.check_admin(&headers)?;
    let s = st.session(&id)?;
    let mut out = Vec::new();
    write_ratings_csv(&s.session.journal.records(), &mut out)?;
    Ok(([(header::CONTENT_TYPE, "text/csv")], out).into_response())
}

/// All routes; `static_dir`, when given, is served for every other path.
pub fn router(state: AppState, static_dir: Option<&Path>) -> Router {
    let r = Router::new()
        .route("/session/{id}/next", get(next_case))
        .route("/session/{id}/progress", get(progress))
        .route("/session/{id}/rating", post(submit))
        .route("/session/{id}/payload/{case}", get(payload))
        .route("/session/{id}/report", get(report))
        .route("/session/{id}/ratings.csv", get(ratings_csv))
        .with_state(state);
    match static_dir {
        Some(dir) => r.fallback_service(ServeDir::new(dir)),
        None => r,
    }
}

pub async fn serve(addr: SocketAddr, state: AppState, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state, static_dir.as_deref())).await
}
