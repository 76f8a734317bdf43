//! JSON HTTP API for the study client.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, MutexGuard};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use biasview_core::corpus::{load_corpus, Hotel, Review};
use biasview_core::pipeline::{analyze, Analysis};
use biasview_core::studylab::{Condition, Event, Questionnaire, Selection, TelemetryRecord, SELECTION_SIZE};
use biasview_core::transparency::{
    build_category_slice, filter_reviews, CategoryFilter, InfoType, Selector,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::StudyConfig;
use crate::sessions::{offer_batch, store_selection, BatchOutcome, Clock, Session, SessionStore};

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub detail: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into(), detail: Value::Null }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_request", message)
    }

    fn internal(err: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", err.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "code": self.code, "message": self.message, "detail": self.detail });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub struct AppState {
    pub analysis: Analysis,
    pub questionnaire: Questionnaire,
    pub sessions: SessionStore,
    pub clock: Arc<dyn Clock>,
    pub page_size: usize,
}

impl AppState {
    /// Loads and analyzes the corpus and reopens the telemetry directory.
    pub fn from_config(cfg: &StudyConfig, clock: Arc<dyn Clock>) -> anyhow::Result<Self> {
        cfg.validate()?;
        let hotels = load_corpus(&cfg.corpus)?;
        let analysis = analyze(&hotels, &cfg.pipeline_config()?)?;
        let sessions = SessionStore::open(&cfg.telemetry_dir, cfg.seed, cfg.condition_mode, cfg.fixed_condition)?;
        Ok(Self { analysis, questionnaire: cfg.questionnaire()?, sessions, clock, page_size: cfg.page_size })
    }

    fn hotel_ids(&self) -> Vec<String> {
        self.analysis.hotels.iter().map(|h| h.id().to_string()).collect()
    }

    fn hotel(&self, hotel_id: &str) -> ApiResult<&Hotel> {
        self.analysis.hotel(hotel_id).ok_or_else(|| {
            ApiError::new(StatusCode::NOT_FOUND, "unknown_hotel", format!("no hotel `{hotel_id}`"))
        })
    }

    fn session(&self, session_id: &str) -> ApiResult<Arc<Mutex<Session>>> {
        self.sessions.get(session_id).ok_or_else(|| {
            ApiError::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session `{session_id}`"))
        })
    }

    fn condition(&self, session_id: &str) -> ApiResult<Condition> {
        Ok(lock(&self.session(session_id)?).log.condition)
    }
}

fn lock(session: &Arc<Mutex<Session>>) -> MutexGuard<'_, Session> {
    session.lock().unwrap_or_else(|e| e.into_inner())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", axum::routing::post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/events", axum::routing::post(post_events))
        .route("/sessions/{id}/selection", get(get_selection).post(post_selection))
        .route("/sessions/{id}/questionnaire", axum::routing::post(post_questionnaire))
        .route("/hotels", get(list_hotels))
        .route("/hotels/{id}/transparency", get(transparency))
        .route("/hotels/{id}/transparency/{category}", get(category_slice))
        .route("/hotels/{id}/reviews", get(reviews))
        .route("/questionnaire", get(questionnaire))
        .with_state(state)
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed body: {e}")))
}

fn require_session(q: &BTreeMap<String, String>) -> ApiResult<&str> {
    q.get("session")
        .map(String::as_str)
        .ok_or_else(|| ApiError::bad_request("missing `session` query parameter"))
}

fn parse_info(raw: &str) -> ApiResult<InfoType> {
    raw.parse().map_err(|_| {
        let valid: Vec<String> = InfoType::ALL.iter().map(|t| t.id().to_ascii_lowercase()).collect();
        ApiError::new(
            StatusCode::BAD_REQUEST,
            "unknown_info_type",
            format!("unknown information type `{raw}`; expected one of {}", valid.join(", ")),
        )
        .with_detail(json!({ "valid": valid }))
    })
}

fn parse_number<T: std::str::FromStr>(q: &BTreeMap<String, String>, key: &str) -> ApiResult<Option<T>> {
    q.get(key)
        .map(|v| v.parse().map_err(|_| ApiError::bad_request(format!("`{key}` must be a non-negative integer"))))
        .transpose()
}

fn denied(info: InfoType) -> ApiError {
    ApiError::new(
        StatusCode::FORBIDDEN,
        "condition_forbidden",
        format!("{info} information is not available in the baseline condition"),
    )
}

#[derive(Serialize)]
struct SessionCreated {
    session_id: String,
    condition: Condition,
    hotel_order: Vec<String>,
}

async fn create_session(State(state): State<Arc<AppState>>) -> ApiResult<(StatusCode, Json<SessionCreated>)> {
    let session = state.sessions.create(&state.hotel_ids(), state.clock.now_ms()).map_err(ApiError::internal)?;
    let s = lock(&session);
    Ok((
        StatusCode::CREATED,
        Json(SessionCreated {
            session_id: s.log.session_id.clone(),
            condition: s.log.condition,
            hotel_order: s.hotel_order.clone(),
        }),
    ))
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let session = state.session(&id)?;
    let s = lock(&session);
    Ok(Json(json!({
        "session_id": s.log.session_id,
        "condition": s.log.condition,
        "hotel_order": s.hotel_order,
        "started_ms": s.log.started_ms,
        "event_count": s.log.events.len(),
        "next_seq": s.next_seq,
        "submitted": s.log.selection.is_some(),
        "completed": s.completed(),
    })))
}

#[derive(Serialize)]
struct HotelCard {
    hotel_id: String,
    name: String,
    price_per_night: Option<f64>,
    star_class: Option<u8>,
    average_rating: Option<f64>,
    review_count: usize,
    photo: Option<String>,
}

fn card(hotel: &Hotel) -> HotelCard {
    HotelCard {
        hotel_id: hotel.id().to_string(),
        name: hotel.meta.name.clone(),
        price_per_night: hotel.meta.price_per_night,
        star_class: hotel.meta.star_class,
        average_rating: hotel.average_rating().map(|a| (a * 10.0).round() / 10.0),
        review_count: hotel.reviews.len(),
        photo: hotel.meta.photo.clone(),
    }
}

async fn list_hotels(
    State(state): State<Arc<AppState>>,
    Query(q): Query<BTreeMap<String, String>>,
) -> ApiResult<Json<Vec<HotelCard>>> {
    let session = state.session(require_session(&q)?)?;
    let order = lock(&session).hotel_order.clone();
    let cards = order
        .iter()
        .filter_map(|id| state.analysis.hotel(id))
        .map(card)
        .collect();
    Ok(Json(cards))
}

fn bias_aware_info(state: &AppState, q: &BTreeMap<String, String>) -> ApiResult<InfoType> {
    let condition = state.condition(require_session(q)?)?;
    let raw = q.get("info").ok_or_else(|| ApiError::bad_request("missing `info` query parameter"))?;
    let info = parse_info(raw)?;
    if condition == Condition::Baseline {
        return Err(denied(info));
    }
    Ok(info)
}

async fn transparency(
    State(state): State<Arc<AppState>>,
    Path(hotel_id): Path<String>,
    Query(q): Query<BTreeMap<String, String>>,
) -> ApiResult<Response> {
    let info = bias_aware_info(&state, &q)?;
    state.hotel(&hotel_id)?;
    let breakdown = state.analysis.breakdown(&hotel_id, info).ok_or_else(|| ApiError::internal("missing breakdown"))?;
    Ok(Json(breakdown).into_response())
}

async fn category_slice(
    State(state): State<Arc<AppState>>,
    Path((hotel_id, category)): Path<(String, String)>,
    Query(q): Query<BTreeMap<String, String>>,
) -> ApiResult<Response> {
    let info = bias_aware_info(&state, &q)?;
    let hotel = state.hotel(&hotel_id)?;
    let slice = build_category_slice(hotel, state.analysis.scheme(info), &category, state.analysis.labels(info))
        .map_err(|e| ApiError::new(StatusCode::NOT_FOUND, "unknown_category", e.to_string()))?;
    Ok(Json(slice).into_response())
}

#[derive(Serialize)]
struct TaggedReview<'a> {
    #[serde(flatten)]
    review: &'a Review,
    tags: BTreeMap<InfoType, &'a [String]>,
}

#[derive(Serialize)]
struct ReviewPageBody<'a> {
    items: Vec<TaggedReview<'a>>,
    total: usize,
    page: usize,
    page_size: usize,
    has_more: bool,
}

async fn reviews(
    State(state): State<Arc<AppState>>,
    Path(hotel_id): Path<String>,
    Query(q): Query<BTreeMap<String, String>>,
) -> ApiResult<Response> {
    let condition = state.condition(require_session(&q)?)?;
    let hotel = state.hotel(&hotel_id)?;
    let rating: Option<u8> = parse_number(&q, "rating")?;
    let page: usize = parse_number(&q, "page")?.unwrap_or(0);
    let page_size: usize = parse_number(&q, "page_size")?.unwrap_or(state.page_size);
    let info = q.get("info").map(|raw| parse_info(raw)).transpose()?;
    let category = match (info, q.get("category")) {
        (Some(info), Some(category_id)) => {
            if condition == Condition::Baseline && info != InfoType::Aspects {
                return Err(denied(info));
            }
            Some(CategoryFilter {
                scheme: state.analysis.scheme(info),
                labels: state.analysis.labels(info),
                category_id,
            })
        }
        (None, None) => None,
        _ => return Err(ApiError::bad_request("`info` and `category` go together")),
    };
    let result = filter_reviews(hotel, &Selector { rating, category }, page, page_size)
        .map_err(|e| ApiError::bad_request(e.to_string()))?;

    let visible: Vec<InfoType> = match condition {
        Condition::Baseline => vec![InfoType::Aspects],
        Condition::BiasAware => InfoType::ALL.to_vec(),
    };
    let items = result
        .items
        .iter()
        .map(|review| {
            let original = hotel.reviews.iter().find(|r| r.review_id == review.review_id).unwrap_or(review);
            let tags = visible
                .iter()
                .map(|&t| (t, state.analysis.labels(t).of(&original.review_id).unwrap_or(&[])))
                .collect();
            TaggedReview { review: original, tags }
        })
        .collect();
    Ok(Json(ReviewPageBody {
        items,
        total: result.total,
        page: result.page,
        page_size: result.page_size,
        has_more: result.has_more,
    })
    .into_response())
}

fn closed(s: &Session) -> ApiResult<()> {
    if s.completed() {
        return Err(ApiError::new(StatusCode::CONFLICT, "session_closed", "the questionnaire is already submitted"));
    }
    Ok(())
}

async fn post_events(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let session = state.session(&id)?;
    let raw: Value = parse_body(&body)?;
    let seq = raw
        .get("seq")
        .and_then(Value::as_u64)
        .ok_or_else(|| ApiError::bad_request("`seq` must be a non-negative integer"))?;
    let items = raw
        .get("events")
        .and_then(Value::as_array)
        .ok_or_else(|| ApiError::bad_request("`events` must be an array"))?;
    let invalid = |index: usize, message: String| {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_event", format!("event {index}: {message}"))
            .with_detail(json!({ "index": index }))
    };
    let mut events = Vec::with_capacity(items.len());
    for (index, item) in items.iter().enumerate() {
        let event: Event = serde_json::from_value(item.clone()).map_err(|e| invalid(index, e.to_string()))?;
        if event.rating.is_some_and(|r| !(1..=5).contains(&r)) {
            return Err(invalid(index, "rating is outside 1..=5".into()));
        }
        if events.last().is_some_and(|prev: &Event| prev.t_ms > event.t_ms) {
            return Err(invalid(index, "timestamp precedes the previous event".into()));
        }
        events.push(event);
    }

    let mut s = lock(&session);
    closed(&s)?;
    match offer_batch(&mut s, seq, events).map_err(ApiError::internal)? {
        BatchOutcome::Accepted(n) => Ok(Json(json!({ "accepted": n, "next_seq": s.next_seq }))),
        BatchOutcome::Replayed => Ok(Json(json!({ "accepted": 0, "next_seq": s.next_seq }))),
        BatchOutcome::OutOfOrder { expected } => Err(ApiError::new(
            StatusCode::CONFLICT,
            "out_of_order",
            format!("batch {seq} arrived before batch {expected}"),
        )
        .with_detail(json!({ "expected_seq": expected }))),
    }
}

fn selection_body(s: &Session) -> Value {
    json!({ "selection": s.log.selection, "submitted_ms": s.selected_at_ms })
}

async fn post_selection(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let session = state.session(&id)?;
    let selection: Selection = parse_body(&body)?;
    let reject = |message: String| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_selection", message);
    selection.validate(&id).map_err(|_| {
        reject(format!(
            "choose exactly the top {SELECTION_SIZE} distinct hotels, got {}",
            selection.hotels.len()
        ))
    })?;
    if let Some(unknown) = selection.hotels.iter().find(|h| state.analysis.hotel(h).is_none()) {
        return Err(reject(format!("unknown hotel `{unknown}`")));
    }
    if selection.reasons.len() != SELECTION_SIZE || selection.reasons.iter().any(|r| r.trim().is_empty()) {
        return Err(reject(format!("each of the {SELECTION_SIZE} hotels needs a non-empty reason")));
    }
    let mut s = lock(&session);
    closed(&s)?;
    if s.log.selection.is_some() {
        return Err(ApiError::new(StatusCode::CONFLICT, "already_submitted", "a selection is already stored"));
    }
    store_selection(&mut s, selection, state.clock.now_ms()).map_err(ApiError::internal)?;
    Ok((StatusCode::CREATED, Json(selection_body(&s))))
}

async fn get_selection(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let session = state.session(&id)?;
    let s = lock(&session);
    if s.log.selection.is_none() {
        return Err(ApiError::new(StatusCode::NOT_FOUND, "no_selection", "no selection submitted yet"));
    }
    Ok(Json(selection_body(&s)))
}

async fn questionnaire(
    State(state): State<Arc<AppState>>,
    Query(q): Query<BTreeMap<String, String>>,
) -> ApiResult<Json<Value>> {
    let condition = state.condition(require_session(&q)?)?;
    let items: Vec<_> = state.questionnaire.items_for(condition).collect();
    Ok(Json(json!({ "scale": state.questionnaire.scale, "items": items })))
}

#[derive(Deserialize)]
struct Answers {
    answers: BTreeMap<String, u8>,
}

async fn post_questionnaire(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let session = state.session(&id)?;
    let Answers { answers } = parse_body(&body)?;
    let mut s = lock(&session);
    closed(&s)?;
    if s.log.selection.is_none() {
        return Err(ApiError::new(StatusCode::CONFLICT, "selection_required", "submit the selection first"));
    }
    state
        .questionnaire
        .validate_response(&id, s.log.condition, &answers)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_response", e.to_string()))?;
    let now = state.clock.now_ms();
    s.append(TelemetryRecord::Questionnaire { t_ms: now, answers }).map_err(ApiError::internal)?;
    s.append(TelemetryRecord::Ended { t_ms: now }).map_err(ApiError::internal)?;
    Ok((StatusCode::CREATED, Json(json!({ "completed": true, "ended_ms": now }))))
}
