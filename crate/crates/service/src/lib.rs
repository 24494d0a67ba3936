//! HTTP service for the adaptive arithmetic game.
//!
//! Binds the rule engine, context acquisition and game engine behind a
//! JSON API under `/api`, persists profiles and sessions as one JSON file
//! each under a data directory, and serves the web client's static files
//! at `/`.

mod api;
mod auth;
mod error;
mod store;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use adaptree_core::context::{
    parse_clock, resolve_snapshot, weather_from_env, Clock, ContextError, Orientation, UserProfile,
    WeatherClient, WeatherError,
};
use adaptree_core::dsl::RuleDocument;
use adaptree_core::tree::evaluate_chain;
use adaptree_core::ActionSet;
use axum::Router;
use chrono::{DateTime, TimeDelta, Utc};
use thiserror::Error;
use tower_http::services::ServeDir;

pub use error::ApiError;
pub use store::{atomic_write, valid_username, ActiveQuestion, Mode, ProfileStore, SessionRecord, SessionStore, StoreError};

/// Sessions expire after this much inactivity.
pub const SESSION_TTL: TimeDelta = TimeDelta::hours(24);
/// Requests one session may make before it must log in again.
pub const SESSION_REQUEST_CAP: u64 = 100_000;

/// Wall-clock source for session expiry and answer timing.
pub type Now = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

pub struct Config {
    pub rules: RuleDocument,
    pub data_dir: PathBuf,
    /// Clock for the `local_time` context variable.
    pub clock: Arc<dyn Clock>,
    pub weather: Arc<dyn WeatherClient>,
    /// Location passed to the weather client.
    pub location: String,
    pub static_dir: Option<PathBuf>,
    pub now: Now,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("ADAPTREE_CLOCK: {0}")]
    Clock(#[from] ContextError),
    #[error(transparent)]
    Weather(#[from] WeatherError),
}

fn env_or(name: &str, default: &str) -> String {
    std::env::var(name).ok().filter(|v| !v.is_empty()).unwrap_or_else(|| default.to_string())
}

impl Config {
    /// Reads `ADAPTREE_DATA_DIR` (default `adaptree-data`),
    /// `ADAPTREE_CLOCK` (`system` or `fixed:HH:MM`), the weather settings,
    /// `ADAPTREE_LOCATION` (default `la_crosse`) and `ADAPTREE_STATIC_DIR`
    /// (default `web-ui/dist`).
    pub fn from_env(rules: RuleDocument) -> Result<Self, ConfigError> {
        Ok(Config {
            rules,
            data_dir: env_or("ADAPTREE_DATA_DIR", "adaptree-data").into(),
            clock: Arc::from(parse_clock(&env_or("ADAPTREE_CLOCK", "system"))?),
            weather: Arc::from(weather_from_env()?),
            location: env_or("ADAPTREE_LOCATION", "la_crosse"),
            static_dir: Some(env_or("ADAPTREE_STATIC_DIR", "web-ui/dist").into()),
            now: Arc::new(Utc::now),
        })
    }
}

struct Shared {
    config: Config,
    profiles: ProfileStore,
    session_store: SessionStore,
    sessions: Mutex<HashMap<String, SessionRecord>>,
    user_locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

#[derive(Clone)]
pub struct AppState(Arc<Shared>);

impl AppState {
    /// Opens the data directory and reloads the stored sessions.
    pub fn open(config: Config) -> Result<Self, StoreError> {
        let profiles = ProfileStore::open(&config.data_dir)?;
        let session_store = SessionStore::open(&config.data_dir)?;
        let sessions = session_store.load_all()?.into_iter().collect();
        Ok(AppState(Arc::new(Shared {
            config,
            profiles,
            session_store,
            sessions: Mutex::new(sessions),
            user_locks: Mutex::new(HashMap::new()),
        })))
    }

    pub fn config(&self) -> &Config {
        &self.0.config
    }

    pub fn profiles(&self) -> &ProfileStore {
        &self.0.profiles
    }

    fn now(&self) -> DateTime<Utc> {
        (self.0.config.now)()
    }

    /// Serializes all state changes of one user.
    async fn lock_user(&self, username: &str) -> tokio::sync::OwnedMutexGuard<()> {
        let lock = self
            .0
            .user_locks
            .lock()
            .expect("user lock table")
            .entry(username.to_string())
            .or_default()
            .clone();
        lock.lock_owned().await
    }

    fn insert_session(&self, token: &str, record: SessionRecord) -> Result<(), StoreError> {
        let mut sessions = self.0.sessions.lock().expect("session table");
        self.0.session_store.save(token, &record)?;
        sessions.insert(token.to_string(), record);
        Ok(())
    }

    /// Validates `token`, counts the request and refreshes its expiry.
    /// Returns the session's user.
    fn touch_session(&self, token: &str) -> Result<String, ApiError> {
        let now = self.now();
        let mut sessions = self.0.sessions.lock().expect("session table");
        let Some(record) = sessions.get_mut(token) else {
            return Err(ApiError::unauthorized("unknown session"));
        };
        if now - record.last_seen > SESSION_TTL {
            sessions.remove(token);
            self.0.session_store.remove(token)?;
            return Err(ApiError::unauthorized("session expired"));
        }
        if record.requests >= SESSION_REQUEST_CAP {
            return Err(ApiError::new(
                axum::http::StatusCode::TOO_MANY_REQUESTS,
                "request_cap",
                "session request cap reached; log in again",
            ));
        }
        record.requests += 1;
        record.last_seen = now;
        self.0.session_store.save(token, record)?;
        Ok(record.username.clone())
    }

    /// Runs `f` on the session record and persists the result.
    fn update_session<R>(&self, token: &str, f: impl FnOnce(&mut SessionRecord) -> R) -> Result<R, ApiError> {
        let mut sessions = self.0.sessions.lock().expect("session table");
        let record = sessions.get_mut(token).ok_or_else(|| ApiError::unauthorized("unknown session"))?;
        let out = f(record);
        self.0.session_store.save(token, record)?;
        Ok(out)
    }

    /// `evaluate_chain` over the configured rules and the snapshot resolved
    /// from `profile`, the configured clock and weather, and `orientation`.
    pub async fn adaptation(&self, profile: &UserProfile, orientation: Orientation) -> Result<ActionSet, ApiError> {
        let shared = self.0.clone();
        let profile = profile.clone();
        let snapshot = tokio::task::spawn_blocking(move || {
            let c = &shared.config;
            resolve_snapshot(&profile, c.clock.as_ref(), c.weather.as_ref(), &c.location, orientation)
        })
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?;
        evaluate_chain(&self.0.config.rules.trees, &snapshot).map_err(|e| ApiError::internal(format!("rule evaluation failed: {e}")))
    }
}

/// The API under `/api` and, when configured, static files at `/`.
pub fn router(state: AppState) -> Router {
    let static_dir = state.config().static_dir.clone();
    let app = Router::new().nest("/api", api::routes()).with_state(state);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

/// Serves until Ctrl-C.
pub async fn serve(config: Config, addr: SocketAddr) -> Result<(), ServeError> {
    let state = AppState::open(config)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("adaptree listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
