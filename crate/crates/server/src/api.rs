//! JSON HTTP API over a swappable search snapshot.

use std::sync::{Arc, RwLock};

use axum::extract::{Path, Query as QueryParams, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use sentisearch_core::sentiment::{self, SentimentScore};
use sentisearch_core::{DocId, Query, Ranker, RankingParams, SearchEngine, SearchError};

use crate::snapshot::SnapshotPaths;

pub const DEFAULT_RELATED_K: usize = 5;

pub struct AppState {
    engine: RwLock<Arc<SearchEngine>>,
    paths: Option<SnapshotPaths>,
}

impl AppState {
    /// `paths` is where `/admin/reload` reads the next snapshot from.
    pub fn new(engine: SearchEngine, paths: Option<SnapshotPaths>) -> Arc<AppState> {
        Arc::new(AppState {
            engine: RwLock::new(Arc::new(engine)),
            paths,
        })
    }

    pub fn snapshot(&self) -> Arc<SearchEngine> {
        self.engine
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .clone()
    }

    pub fn swap(&self, engine: SearchEngine) {
        *self.engine.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(engine);
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/search", get(search))
        .route("/related/{id}", get(related))
        .route("/doc/{id}", get(doc))
        .route("/categories", get(categories))
        .route("/stats", get(stats))
        .route("/admin/reload", post(reload))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    fn unknown_doc(id: &str) -> ApiError {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "unknown_doc",
            format!("no document with id {id}"),
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"error": {"code": self.code, "message": self.message}});
        (self.status, Json(body)).into_response()
    }
}

impl From<SearchError> for ApiError {
    fn from(e: SearchError) -> ApiError {
        match e {
            SearchError::EmptyQuery => {
                ApiError::new(StatusCode::BAD_REQUEST, "empty_query", e.to_string())
            }
            SearchError::InvalidQuery(_) | SearchError::Ranking(_) => {
                ApiError::bad_request(e.to_string())
            }
            SearchError::SnapshotMismatch(_) => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
            }
        }
    }
}

// Everything arrives as text so malformed numbers get our error body
// instead of the extractor's plain-text rejection.
#[derive(Debug, Default, Deserialize)]
pub struct SearchParams {
    q: Option<String>,
    category: Option<String>,
    limit: Option<String>,
    ranker: Option<String>,
    k1: Option<String>,
    b: Option<String>,
}

fn parse_opt<T: std::str::FromStr>(name: &str, raw: Option<&str>) -> Result<Option<T>, ApiError> {
    raw.map(|v| {
        v.trim()
            .parse()
            .map_err(|_| ApiError::bad_request(format!("invalid {name}: {v:?}")))
    })
    .transpose()
}

impl SearchParams {
    fn to_query(&self) -> Result<Query, ApiError> {
        let mut query = Query::new(self.q.clone().unwrap_or_default());
        if let Some(c) = self.category.as_deref().filter(|c| !c.is_empty()) {
            query = query.category(c);
        }
        if let Some(limit) = parse_opt::<usize>("limit", self.limit.as_deref())? {
            query = query.limit(limit);
        }
        if let Some(ranker) = self.ranker.as_deref() {
            query = query.ranker(
                ranker
                    .parse::<Ranker>()
                    .map_err(|e| ApiError::bad_request(e.to_string()))?,
            );
        }
        let defaults = RankingParams::default();
        let k1 = parse_opt("k1", self.k1.as_deref())?.unwrap_or(defaults.k1);
        let b = parse_opt("b", self.b.as_deref())?.unwrap_or(defaults.b);
        Ok(query.params(RankingParams { k1, b }))
    }
}

async fn search(
    State(state): State<Arc<AppState>>,
    QueryParams(params): QueryParams<SearchParams>,
) -> Result<Response, ApiError> {
    let query = params.to_query()?;
    let engine = state.snapshot();
    let resp = engine.search(&query)?;
    Ok(Json(resp).into_response())
}

fn parse_id(raw: &str) -> Result<DocId, ApiError> {
    raw.parse().map_err(|_| ApiError::unknown_doc(raw))
}

#[derive(Debug, Deserialize)]
pub struct RelatedParams {
    k: Option<String>,
}

#[derive(Debug, Serialize)]
struct RelatedDoc {
    id: DocId,
    title: String,
    url: String,
    label: String,
    similarity: f64,
}

async fn related(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    QueryParams(params): QueryParams<RelatedParams>,
) -> Result<Response, ApiError> {
    let id = parse_id(&id)?;
    let k = parse_opt("k", params.k.as_deref())?.unwrap_or(DEFAULT_RELATED_K);
    let engine = state.snapshot();
    if engine.corpus().get(id).is_none() {
        return Err(ApiError::unknown_doc(&id.to_string()));
    }
    // a document that produced no index terms has nothing to compare
    let hits = engine.related(id, k).unwrap_or_default();
    let related: Vec<RelatedDoc> = hits
        .into_iter()
        .filter_map(|r| {
            let d = engine.corpus().get(r.doc_id)?;
            Some(RelatedDoc {
                id: d.id,
                title: d.title.clone(),
                url: d.url.clone(),
                label: d.label.clone(),
                similarity: r.similarity,
            })
        })
        .collect();
    Ok(Json(json!({"id": id, "related": related})).into_response())
}

#[derive(Debug, Serialize)]
struct DocView<'a> {
    #[serde(flatten)]
    doc: &'a sentisearch_core::Document,
    sentiment: SentimentScore,
}

async fn doc(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let id = parse_id(&id)?;
    let engine = state.snapshot();
    let doc = engine
        .corpus()
        .get(id)
        .ok_or_else(|| ApiError::unknown_doc(&id.to_string()))?;
    let view = DocView {
        doc,
        sentiment: sentiment::score_document(doc, engine.lexicon()),
    };
    Ok(Json(&view).into_response())
}

async fn categories(State(state): State<Arc<AppState>>) -> Response {
    let engine = state.snapshot();
    let categories: Vec<_> = engine
        .corpus()
        .label_index()
        .iter()
        .map(|(label, ids)| json!({"label": label, "n_docs": ids.len()}))
        .collect();
    Json(json!({ "categories": categories })).into_response()
}

async fn stats(State(state): State<Arc<AppState>>) -> Response {
    Json(state.snapshot().index().stats()).into_response()
}

async fn reload(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let failed =
        |msg: String| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "reload_failed", msg);
    let paths = state
        .paths
        .clone()
        .ok_or_else(|| failed("server was started without snapshot paths".into()))?;
    let engine = tokio::task::spawn_blocking(move || paths.load())
        .await
        .map_err(|e| failed(e.to_string()))?
        .map_err(|e| failed(format!("{e:#}")))?;
    let stats = engine.index().stats();
    state.swap(engine);
    tracing::info!(
        n_docs = stats.n_docs,
        n_terms = stats.n_terms,
        "snapshot reloaded"
    );
    Ok(Json(json!({"status": "reloaded", "stats": stats})).into_response())
}
