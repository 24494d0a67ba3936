use serde::{Deserialize, Serialize};

use crate::game::{Level, LevelRecord, Outcome, Question, UnitRecord};
use crate::model::Rgb;

/// Colors and background choice set on the settings screen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserPreferences {
    pub font_color: Rgb,
    pub background_color: Rgb,
    pub button_font_color: Rgb,
    pub button_background_color: Rgb,
    /// When off, the weather & time theme shows a flat color background.
    pub time_based_background: bool,
}

impl Default for UserPreferences {
    fn default() -> Self {
        UserPreferences {
            font_color: Rgb(0x1B, 0x3A, 0x5C),
            background_color: Rgb(0xEA, 0xF4, 0xFB),
            button_font_color: Rgb(0xFF, 0xFF, 0xFF),
            button_background_color: Rgb(0x2E, 0x7D, 0x32),
            time_based_background: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub username: String,
    /// Opaque salted hash produced by the service.
    pub password_hash: String,
    pub age: u32,
    pub first_time: bool,
    pub current_level: Level,
    pub preferences: UserPreferences,
    /// Level passes in order; the last one is in progress.
    pub levels: Vec<LevelRecord>,
    /// Results of the unit in progress.
    pub current_unit: Vec<Outcome>,
    pub level_choice_pending: bool,
    pub review_queue: Vec<Question>,
}

impl UserProfile {
    pub fn new(
        username: impl Into<String>,
        password_hash: impl Into<String>,
        age: u32,
        level: Level,
        preferences: UserPreferences,
    ) -> Self {
        UserProfile {
            username: username.into(),
            password_hash: password_hash.into(),
            age,
            first_time: true,
            current_level: level,
            preferences,
            levels: vec![LevelRecord::new(level)],
            current_unit: Vec::new(),
            level_choice_pending: false,
            review_queue: Vec::new(),
        }
    }

    /// Every completed unit, oldest first.
    pub fn performance(&self) -> impl Iterator<Item = &UnitRecord> {
        self.levels.iter().flat_map(|l| &l.units)
    }

    pub fn last_unit_accuracy(&self) -> Option<u8> {
        self.performance().last().map(|u| u.accuracy)
    }

    pub fn current_record(&self) -> Option<&LevelRecord> {
        self.levels.last()
    }
}
