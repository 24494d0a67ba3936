use chrono::Timelike;

use super::ContextError;
use crate::model::TimeOfDay;

/// Source of the local time of day.
pub trait Clock: Send + Sync {
    fn local_time(&self) -> TimeOfDay;
}

/// The host's local wall clock.
#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn local_time(&self) -> TimeOfDay {
        let now = chrono::Local::now();
        TimeOfDay::new(now.hour() as u8, now.minute() as u8).expect("wall clock time is valid")
    }
}

/// Always reports the same time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedClock(pub TimeOfDay);

impl Clock for FixedClock {
    fn local_time(&self) -> TimeOfDay {
        self.0
    }
}

/// Parses `system` or `fixed:HH:MM`.
pub fn parse_clock(setting: &str) -> Result<Box<dyn Clock>, ContextError> {
    let setting = setting.trim();
    if setting.is_empty() || setting == "system" {
        return Ok(Box::new(SystemClock));
    }
    setting.strip_prefix("fixed:")
        .and_then(|t| t.parse::<TimeOfDay>().ok())
        .map(|t| Box::new(FixedClock(t)) as Box<dyn Clock>)
        .ok_or_else(|| ContextError::InvalidClock(setting.to_string()))
}
