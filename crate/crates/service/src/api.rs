use adaptree_core::context::{assign_level, Orientation, UserPreferences, UserProfile};
use adaptree_core::game::{
    apply_level_choice, check_answer, generate_question, next_review, record_answer, resolve_review, GameError,
    Level, LevelRecord, Question, UnitRecord, TIME_LIMIT_MS, UNIT_SIZE,
};
use adaptree_core::model::Rgb;
use adaptree_core::ActionSet;
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{FromRequestParts, Query, State};
use axum::http::header::AUTHORIZATION;
use axum::http::request::Parts;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};

use crate::auth::{hash_password, new_token, verify_password};
use crate::store::{valid_username, ActiveQuestion, Mode, SessionRecord};
use crate::{ApiError, AppState, SESSION_TTL};

pub fn routes() -> Router<AppState> {
    Router::new()
        .route("/register", post(register))
        .route("/login", post(login))
        .route("/adaptation", get(adaptation))
        .route("/game/next", get(next_question))
        .route("/game/answer", post(answer))
        .route("/level/choice", post(level_choice))
        .route("/settings", post(settings))
        .route("/progress", get(progress))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint") })
}

/// The user behind a valid `Authorization: Bearer <token>` header.
pub struct Auth {
    token: String,
    username: String,
}

impl FromRequestParts<AppState> for Auth {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, ApiError> {
        let token = parts
            .headers
            .get(AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .ok_or_else(|| ApiError::unauthorized("missing bearer token"))?;
        let username = state.touch_session(token)?;
        Ok(Auth {
            token: token.to_string(),
            username,
        })
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    Ok(payload?.0)
}

fn query<T>(payload: Result<Query<T>, QueryRejection>) -> ApiResult<T> {
    Ok(payload?.0)
}

async fn load_profile(state: &AppState, username: &str) -> ApiResult<UserProfile> {
    state
        .profiles()
        .load(username)?
        .ok_or_else(|| ApiError::unauthorized(format!("user `{username}` no longer exists")))
}

#[derive(Deserialize)]
struct RegisterBody {
    username: String,
    password: String,
    age: i64,
}

#[derive(Serialize)]
struct ProfileSummary {
    username: String,
    age: u32,
    current_level: Level,
    first_time: bool,
}

impl From<&UserProfile> for ProfileSummary {
    fn from(p: &UserProfile) -> Self {
        ProfileSummary {
            username: p.username.clone(),
            age: p.age,
            current_level: p.current_level,
            first_time: p.first_time,
        }
    }
}

async fn register(State(state): State<AppState>, payload: Result<Json<RegisterBody>, JsonRejection>) -> ApiResult<Response> {
    let req = body(payload)?;
    if !valid_username(&req.username) {
        return Err(ApiError::unprocessable(
            "invalid_username",
            "usernames are 1 to 32 letters, digits, `_` or `-`",
        ));
    }
    if req.password.is_empty() {
        return Err(ApiError::unprocessable("invalid_password", "password must not be empty"));
    }
    let level = assign_level(req.age).map_err(|e| ApiError::unprocessable("invalid_age", e.to_string()))?;
    let age = u32::try_from(req.age).map_err(|_| ApiError::unprocessable("invalid_age", "age is too large"))?;

    let _guard = state.lock_user(&req.username).await;
    if state.profiles().load(&req.username)?.is_some() {
        return Err(ApiError::conflict("username_taken", format!("username `{}` is taken", req.username)));
    }
    let hash = tokio::task::spawn_blocking(move || hash_password(&req.password))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?;
    let profile = UserProfile::new(req.username, hash, age, level, UserPreferences::default());
    state.profiles().create(&profile)?;
    Ok((StatusCode::CREATED, Json(ProfileSummary::from(&profile))).into_response())
}

#[derive(Deserialize)]
struct LoginBody {
    username: String,
    password: String,
}

#[derive(Serialize)]
struct LoginResponse {
    token: String,
    username: String,
    expires_at: DateTime<Utc>,
}

async fn login(State(state): State<AppState>, payload: Result<Json<LoginBody>, JsonRejection>) -> ApiResult<Json<LoginResponse>> {
    let req = body(payload)?;
    let mismatch = || ApiError::unauthorized("unknown user or wrong password");
    let profile = state.profiles().load(&req.username)?.ok_or_else(mismatch)?;
    let hash = profile.password_hash.clone();
    let ok = tokio::task::spawn_blocking(move || verify_password(&req.password, &hash))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?;
    if !ok {
        return Err(mismatch());
    }
    let token = new_token();
    let now = state.now();
    state.insert_session(
        &token,
        SessionRecord {
            username: profile.username.clone(),
            last_seen: now,
            requests: 0,
            active: None,
        },
    )?;
    Ok(Json(LoginResponse {
        token,
        username: profile.username,
        expires_at: now + SESSION_TTL,
    }))
}

#[derive(Deserialize)]
struct OrientationQuery {
    orientation: Option<String>,
}

fn orientation(q: OrientationQuery) -> ApiResult<Orientation> {
    q.orientation
        .as_deref()
        .map_or(Ok(Orientation::Portrait), str::parse)
        .map_err(|e| ApiError::unprocessable("invalid_orientation", e.to_string()))
}

async fn adaptation(
    State(state): State<AppState>,
    auth: Auth,
    q: Result<Query<OrientationQuery>, QueryRejection>,
) -> ApiResult<Json<ActionSet>> {
    let orientation = orientation(query(q)?)?;
    let _guard = state.lock_user(&auth.username).await;
    let profile = load_profile(&state, &auth.username).await?;
    Ok(Json(state.adaptation(&profile, orientation).await?))
}

#[derive(Deserialize)]
struct NextQuery {
    mode: Option<String>,
}

/// A question as sent to the client: no answer.
#[derive(Serialize)]
struct QuestionView {
    /// Decimal string: ids use all 64 bits.
    question_id: String,
    mode: Mode,
    level: Level,
    operator: adaptree_core::game::Operator,
    left: i64,
    right: i64,
    text: String,
    issued_at: DateTime<Utc>,
    deadline: DateTime<Utc>,
    time_limit_ms: u64,
}

impl From<&ActiveQuestion> for QuestionView {
    fn from(a: &ActiveQuestion) -> Self {
        let q = &a.question;
        QuestionView {
            question_id: q.id.to_string(),
            mode: a.mode,
            level: q.level,
            operator: q.operator,
            left: q.left,
            right: q.right,
            text: q.to_string(),
            issued_at: a.issued_at,
            deadline: a.issued_at + TimeDelta::milliseconds(TIME_LIMIT_MS as i64),
            time_limit_ms: TIME_LIMIT_MS,
        }
    }
}

/// Issues the next question. While a question of the requested mode is
/// unanswered it is returned again with its original deadline.
async fn next_question(
    State(state): State<AppState>,
    auth: Auth,
    q: Result<Query<NextQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let mode = match query(q)?.mode.as_deref() {
        None | Some("standard") => Mode::Standard,
        Some("review") => Mode::Review,
        Some(other) => {
            return Err(ApiError::unprocessable(
                "invalid_mode",
                format!("mode must be `standard` or `review`, got `{other}`"),
            ))
        }
    };
    let _guard = state.lock_user(&auth.username).await;
    let profile = load_profile(&state, &auth.username).await?;
    let pending = state.update_session(&auth.token, |s| s.active.clone())?;
    if let Some(active) = pending.filter(|a| a.mode == mode) {
        return Ok(Json(QuestionView::from(&active)).into_response());
    }
    let question: Question = match mode {
        Mode::Standard => {
            if profile.level_choice_pending {
                return Err(ApiError::conflict(
                    "level_choice_pending",
                    "answer the level-up choice before the next unit",
                ));
            }
            generate_question(profile.current_level, &mut rand::rng())
        }
        Mode::Review => match next_review(&profile) {
            Ok(q) => q.clone(),
            Err(_) => return Ok(StatusCode::NO_CONTENT.into_response()),
        },
    };
    let active = ActiveQuestion {
        question,
        mode,
        issued_at: state.now(),
    };
    state.update_session(&auth.token, |s| s.active = Some(active.clone()))?;
    Ok(Json(QuestionView::from(&active)).into_response())
}

#[derive(Deserialize)]
struct AnswerBody {
    question_id: String,
    answer: Option<i64>,
    elapsed_ms: u64,
}

#[derive(Serialize)]
struct UnitProgress {
    answered: usize,
    correct: usize,
    size: usize,
}

impl UnitProgress {
    fn of(p: &UserProfile) -> Self {
        UnitProgress {
            answered: p.current_unit.len(),
            correct: p.current_unit.iter().filter(|o| o.is_correct()).count(),
            size: UNIT_SIZE,
        }
    }
}

#[derive(Serialize)]
struct AnswerResponse {
    outcome: adaptree_core::game::Outcome,
    correct_answer: i64,
    /// Elapsed time used for grading: the larger of the client's report
    /// and the time since the question was issued.
    elapsed_ms: u64,
    mode: Mode,
    unit: UnitProgress,
    #[serde(skip_serializing_if = "Option::is_none")]
    completed_unit: Option<UnitRecord>,
    level_up_eligible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    adaptation: Option<ActionSet>,
    review_queue_size: usize,
}

async fn answer(
    State(state): State<AppState>,
    auth: Auth,
    q: Result<Query<OrientationQuery>, QueryRejection>,
    payload: Result<Json<AnswerBody>, JsonRejection>,
) -> ApiResult<Json<AnswerResponse>> {
    let orientation = orientation(query(q)?)?;
    let req = body(payload)?;
    let _guard = state.lock_user(&auth.username).await;
    let mut profile = load_profile(&state, &auth.username).await?;
    let now = state.now();
    let active = state.update_session(&auth.token, |s| match &s.active {
        Some(a) if a.question.id.to_string() == req.question_id => s.active.take(),
        _ => None,
    })?;
    let Some(active) = active else {
        return Err(ApiError::conflict(
            "no_active_question",
            format!("question {} is not awaiting an answer", req.question_id),
        ));
    };
    let server_ms = (now - active.issued_at).num_milliseconds().max(0) as u64;
    let elapsed_ms = req.elapsed_ms.max(server_ms);
    let outcome = check_answer(&active.question, req.answer, elapsed_ms);

    let mut completed_unit = None;
    let mut eligible = false;
    match active.mode {
        Mode::Standard => {
            let effect = record_answer(&mut profile, &active.question, outcome);
            completed_unit = effect.completed_unit;
            eligible = effect.level_up_eligible;
        }
        Mode::Review => {
            resolve_review(&mut profile, active.question.id, outcome);
        }
    }
    state.profiles().save(&profile)?;
    let adaptation = match completed_unit {
        Some(_) => Some(state.adaptation(&profile, orientation).await?),
        None => None,
    };
    Ok(Json(AnswerResponse {
        outcome,
        correct_answer: active.question.answer,
        elapsed_ms,
        mode: active.mode,
        unit: UnitProgress::of(&profile),
        completed_unit,
        level_up_eligible: eligible,
        adaptation,
        review_queue_size: profile.review_queue.len(),
    }))
}

#[derive(Deserialize)]
struct ChoiceBody {
    accept: bool,
}

#[derive(Serialize)]
struct ChoiceResponse {
    accepted: bool,
    current_level: Level,
}

async fn level_choice(
    State(state): State<AppState>,
    auth: Auth,
    payload: Result<Json<ChoiceBody>, JsonRejection>,
) -> ApiResult<Json<ChoiceResponse>> {
    let req = body(payload)?;
    let _guard = state.lock_user(&auth.username).await;
    let mut profile = load_profile(&state, &auth.username).await?;
    let level = apply_level_choice(&mut profile, req.accept).map_err(|e| match e {
        GameError::NotEligible => ApiError::conflict("not_eligible", e.to_string()),
        other => ApiError::internal(other.to_string()),
    })?;
    state.profiles().save(&profile)?;
    Ok(Json(ChoiceResponse {
        accepted: req.accept,
        current_level: level,
    }))
}

#[derive(Deserialize)]
struct SettingsBody {
    font_color: String,
    background_color: String,
    button_font_color: String,
    button_background_color: String,
    time_based_background: bool,
}

/// Strict `#RRGGBB`.
fn color(field: &str, text: &str) -> ApiResult<Rgb> {
    let well_formed = text.len() == 7 && text.starts_with('#') && text[1..].bytes().all(|b| b.is_ascii_hexdigit());
    well_formed
        .then(|| text.parse().ok())
        .flatten()
        .ok_or_else(|| ApiError::unprocessable("invalid_color", format!("{field} must be #RRGGBB, got `{text}`")))
}

async fn settings(
    State(state): State<AppState>,
    auth: Auth,
    payload: Result<Json<SettingsBody>, JsonRejection>,
) -> ApiResult<Json<UserPreferences>> {
    let req = body(payload)?;
    let prefs = UserPreferences {
        font_color: color("font_color", &req.font_color)?,
        background_color: color("background_color", &req.background_color)?,
        button_font_color: color("button_font_color", &req.button_font_color)?,
        button_background_color: color("button_background_color", &req.button_background_color)?,
        time_based_background: req.time_based_background,
    };
    let _guard = state.lock_user(&auth.username).await;
    let mut profile = load_profile(&state, &auth.username).await?;
    profile.preferences = prefs.clone();
    state.profiles().save(&profile)?;
    Ok(Json(prefs))
}

#[derive(Serialize)]
struct ProgressResponse {
    #[serde(flatten)]
    summary: ProfileSummary,
    level_choice_pending: bool,
    preferences: UserPreferences,
    levels: Vec<LevelRecord>,
    accuracy_history: Vec<u8>,
    unit: UnitProgress,
    review_queue_size: usize,
}

async fn progress(State(state): State<AppState>, auth: Auth) -> ApiResult<Json<ProgressResponse>> {
    let _guard = state.lock_user(&auth.username).await;
    let p = load_profile(&state, &auth.username).await?;
    Ok(Json(ProgressResponse {
        summary: ProfileSummary::from(&p),
        level_choice_pending: p.level_choice_pending,
        preferences: p.preferences.clone(),
        levels: p.levels.clone(),
        accuracy_history: p.performance().map(|u| u.accuracy).collect(),
        unit: UnitProgress::of(&p),
        review_queue_size: p.review_queue.len(),
    }))
}
