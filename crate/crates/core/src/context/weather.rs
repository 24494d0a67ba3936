use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use thiserror::Error;

use super::WeatherKind;

/// Upper bound on a live weather lookup.
pub const DEFAULT_WEATHER_TIMEOUT: Duration = Duration::from_secs(2);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeatherError {
    #[error("weather unavailable: {0}")]
    Unavailable(String),
    #[error("weather fixture line {line}: {message}")]
    Fixture { line: usize, message: String },
}

pub trait WeatherClient: Send + Sync {
    fn fetch(&self, location: &str) -> Result<WeatherKind, WeatherError>;
}

pub fn fetch_weather(client: &dyn WeatherClient, location: &str) -> Result<WeatherKind, WeatherError> {
    client.fetch(location)
}

/// Fixed `location=kind` table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FixtureWeather {
    table: BTreeMap<String, WeatherKind>,
}

impl FixtureWeather {
    pub fn new(table: impl IntoIterator<Item = (String, WeatherKind)>) -> Self {
        FixtureWeather {
            table: table.into_iter().collect(),
        }
    }

    /// Reads one `location=kind` pair per line; blank lines and `#`
    /// comments are skipped.
    pub fn parse(text: &str) -> Result<Self, WeatherError> {
        let mut table = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| WeatherError::Fixture { line: i + 1, message };
            let (loc, kind) = line
                .split_once('=')
                .ok_or_else(|| err("expected `location=kind`".into()))?;
            let kind = kind.parse::<WeatherKind>().map_err(|e| err(e.to_string()))?;
            table.insert(loc.trim().to_string(), kind);
        }
        Ok(FixtureWeather { table })
    }

    pub fn from_file(path: &Path) -> Result<Self, WeatherError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| WeatherError::Unavailable(format!("cannot read {}: {e}", path.display())))?;
        FixtureWeather::parse(&text)
    }
}

impl WeatherClient for FixtureWeather {
    fn fetch(&self, location: &str) -> Result<WeatherKind, WeatherError> {
        self.table
            .get(location)
            .copied()
            .ok_or_else(|| WeatherError::Unavailable(format!("no weather for `{location}`")))
    }
}

/// Live lookup: GET on a URL template where `{location}` is replaced, then
/// the first weather word found in the body.
#[derive(Debug, Clone)]
pub struct HttpWeather {
    url_template: String,
    agent: ureq::Agent,
}

impl HttpWeather {
    pub fn new(url_template: impl Into<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .new_agent();
        HttpWeather {
            url_template: url_template.into(),
            agent,
        }
    }
}

impl WeatherClient for HttpWeather {
    fn fetch(&self, location: &str) -> Result<WeatherKind, WeatherError> {
        let url = self.url_template.replace("{location}", location);
        let unavailable = |e: ureq::Error| WeatherError::Unavailable(e.to_string());
        let body = self
            .agent
            .get(&url)
            .call()
            .map_err(unavailable)?
            .body_mut()
            .read_to_string()
            .map_err(unavailable)?;
        extract_weather(&body).ok_or_else(|| WeatherError::Unavailable("no weather word in response".into()))
    }
}

/// First word of `body` naming a weather kind, ignoring case.
fn extract_weather(body: &str) -> Option<WeatherKind> {
    body.split(|c: char| !c.is_ascii_alphabetic())
        .find_map(|w| w.parse::<WeatherKind>().ok())
}

/// `ADAPTREE_WEATHER_URL` selects the live client; otherwise the fixture
/// at `ADAPTREE_WEATHER_FIXTURE` is used. With neither, every lookup
/// reports unavailable weather.
pub fn weather_from_env() -> Result<Box<dyn WeatherClient>, WeatherError> {
    if let Ok(url) = std::env::var("ADAPTREE_WEATHER_URL") {
        if !url.is_empty() {
            return Ok(Box::new(HttpWeather::new(url, DEFAULT_WEATHER_TIMEOUT)));
        }
    }
    match std::env::var("ADAPTREE_WEATHER_FIXTURE") {
        Ok(path) if !path.is_empty() => Ok(Box::new(FixtureWeather::from_file(Path::new(&path))?)),
        _ => Ok(Box::new(FixtureWeather::default())),
    }
}
