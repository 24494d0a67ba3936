//! Context acquisition: physical context (clock, weather, orientation) and
//! logical context (the user's profile) assembled into snapshots for the
//! rule engine.

mod clock;
mod profile;
mod weather;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::Level;
use crate::model::{ContextSnapshot, ContextValue, TimeOfDay};

pub use clock::{parse_clock, Clock, FixedClock, SystemClock};
pub use profile::{UserPreferences, UserProfile};
pub use weather::{
    fetch_weather, weather_from_env, FixtureWeather, HttpWeather, WeatherClient, WeatherError,
    DEFAULT_WEATHER_TIMEOUT,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("age cannot be negative, got {0}")]
    NegativeAge(i64),
    #[error("unknown {kind} `{value}`")]
    UnknownValue { kind: &'static str, value: String },
    #[error("invalid clock setting `{0}`: expected `system` or `fixed:HH:MM`")]
    InvalidClock(String),
}

macro_rules! token_enum {
    ($(#[$meta:meta])* $name:ident, $kind:literal, { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = ContextError;

            fn from_str(s: &str) -> Result<Self, ContextError> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($text => Ok($name::$variant),)+
                    other => Err(ContextError::UnknownValue { kind: $kind, value: other.to_string() }),
                }
            }
        }
    };
}

token_enum!(WeatherKind, "weather", {
    Sunny => "sunny",
    Cloudy => "cloudy",
    Rainy => "rainy",
    Snowy => "snowy",
});

token_enum!(TimePeriod, "time period", {
    Day => "day",
    Sunset => "sunset",
    Night => "night",
});

token_enum!(Orientation, "orientation", {
    Portrait => "portrait",
    Landscape => "landscape",
});

/// Value of `local_weather` when no weather could be obtained.
pub const WEATHER_UNAVAILABLE: &str = "unavailable";

/// `[06:00,17:01)` day, `[17:01,19:01)` sunset, the rest of the day night.
pub fn time_period(t: TimeOfDay) -> TimePeriod {
    match t.minutes() {
        360..=1020 => TimePeriod::Day,
        1021..=1140 => TimePeriod::Sunset,
        _ => TimePeriod::Night,
    }
}

/// `[0,5]` level 1, `[6,12]` level 2, 13 and up level 3.
pub fn assign_level(age: i64) -> Result<Level, ContextError> {
    match age {
        ..0 => Err(ContextError::NegativeAge(age)),
        0..=5 => Ok(Level::ONE),
        6..=12 => Ok(Level::TWO),
        _ => Ok(Level::THREE),
    }
}

/// Builds the rule engine's input from already acquired values. A profile
/// without completed units reports an accuracy of 0.
pub fn snapshot_from_parts(
    profile: &UserProfile,
    local_time: TimeOfDay,
    weather: Option<WeatherKind>,
    orientation: Orientation,
) -> ContextSnapshot {
    let prefs = &profile.preferences;
    ContextSnapshot::new()
        .with("first_time", ContextValue::Bool(profile.first_time))
        .with(
            "last_unit_accuracy",
            ContextValue::Int(profile.last_unit_accuracy().unwrap_or(0) as i64),
        )
        .with("device_orientation", ContextValue::Token(orientation.as_str().into()))
        .with("local_time", ContextValue::Time(local_time))
        .with(
            "local_weather",
            ContextValue::Token(weather.map_or(WEATHER_UNAVAILABLE, WeatherKind::as_str).into()),
        )
        .with("time_based_background", ContextValue::Bool(prefs.time_based_background))
        .with("font_color_pref", ContextValue::Color(prefs.font_color))
        .with("background_color_pref", ContextValue::Color(prefs.background_color))
        .with("button_font_color_pref", ContextValue::Color(prefs.button_font_color))
        .with("button_background_color_pref", ContextValue::Color(prefs.button_background_color))
}

/// Reads the clock and the weather client and assembles a snapshot. A
/// weather failure degrades to the `unavailable` marker.
pub fn resolve_snapshot(
    profile: &UserProfile,
    clock: &dyn Clock,
    weather: &dyn WeatherClient,
    location: &str,
    orientation: Orientation,
) -> ContextSnapshot {
    let kind = fetch_weather(weather, location).ok();
    snapshot_from_parts(profile, clock.local_time(), kind, orientation)
}
