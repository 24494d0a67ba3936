//! The arithmetic game: question generation per level, answer checking,
//! unit and level bookkeeping, level-up choices and the review queue.

mod question;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::UserProfile;

pub use question::{generate_for, generate_question, Operator, Question};

/// Questions per unit.
pub const UNIT_SIZE: usize = 10;
/// Units per level pass.
pub const UNITS_PER_LEVEL: usize = 10;
/// Answer time limit in milliseconds.
pub const TIME_LIMIT_MS: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("level must be 1, 2 or 3, got {0}")]
    InvalidLevel(i64),
    #[error("{op} questions are not available at level {level}")]
    OperatorUnavailable { level: Level, op: Operator },
    #[error("accuracy {0} is outside 0..=100")]
    OutOfRange(i64),
    #[error("no level-up choice is pending")]
    NotEligible,
    #[error("the review queue is empty")]
    EmptyQueue,
    #[error("a unit needs exactly {UNIT_SIZE} results, got {0}")]
    IncompleteUnit(usize),
}

/// Game level, 1 through 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct Level(u8);

impl Level {
    pub const ONE: Level = Level(1);
    pub const TWO: Level = Level(2);
    pub const THREE: Level = Level(3);
    pub const ALL: [Level; 3] = [Level::ONE, Level::TWO, Level::THREE];

    pub fn new(level: i64) -> Result<Self, GameError> {
        match level {
            1..=3 => Ok(Level(level as u8)),
            _ => Err(GameError::InvalidLevel(level)),
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// The next level, capped at 3.
    pub fn next(self) -> Level {
        Level((self.0 + 1).min(3))
    }
}

impl TryFrom<i64> for Level {
    type Error = GameError;

    fn try_from(v: i64) -> Result<Self, GameError> {
        Level::new(v)
    }
}

impl From<Level> for u8 {
    fn from(l: Level) -> u8 {
        l.0
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Correct,
    Incorrect,
    Timeout,
}

impl Outcome {
    pub fn is_correct(self) -> bool {
        self == Outcome::Correct
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Correct => "correct",
            Outcome::Incorrect => "incorrect",
            Outcome::Timeout => "timeout",
        })
    }
}

/// Timeout when the answer is missing or late, otherwise exact comparison.
pub fn check_answer(q: &Question, submitted: Option<i64>, elapsed_ms: u64) -> Outcome {
    match submitted {
        _ if elapsed_ms > TIME_LIMIT_MS => Outcome::Timeout,
        None => Outcome::Timeout,
        Some(v) if v == q.answer => Outcome::Correct,
        Some(_) => Outcome::Incorrect,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccuracyGroup {
    Default,
    PreferredColor,
    WeatherTime,
}

impl AccuracyGroup {
    /// The theme token the group selects.
    pub fn as_str(self) -> &'static str {
        match self {
            AccuracyGroup::Default => "default",
            AccuracyGroup::PreferredColor => "preferred_color",
            AccuracyGroup::WeatherTime => "weather_time",
        }
    }
}

impl fmt::Display for AccuracyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `[0,60]` default, `(60,90)` preferred color, `[90,100]` weather & time.
pub fn accuracy_group(pct: i64) -> Result<AccuracyGroup, GameError> {
    match pct {
        0..=60 => Ok(AccuracyGroup::Default),
        61..=89 => Ok(AccuracyGroup::PreferredColor),
        90..=100 => Ok(AccuracyGroup::WeatherTime),
        _ => Err(GameError::OutOfRange(pct)),
    }
}

/// A completed unit of ten standard-mode questions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitRecord {
    pub level: Level,
    /// 1-based position within its level pass.
    pub unit_index: u8,
    pub results: Vec<Outcome>,
    /// Percentage of correct answers.
    pub accuracy: u8,
}

impl UnitRecord {
    pub fn new(level: Level, unit_index: u8, results: Vec<Outcome>) -> Result<Self, GameError> {
        if results.len() != UNIT_SIZE {
            return Err(GameError::IncompleteUnit(results.len()));
        }
        let correct = results.iter().filter(|o| o.is_correct()).count();
        Ok(UnitRecord {
            level,
            unit_index,
            results,
            accuracy: (correct * 100 / UNIT_SIZE) as u8,
        })
    }

    pub fn correct(&self) -> usize {
        self.results.iter().filter(|o| o.is_correct()).count()
    }
}

/// One pass through a level: up to ten units.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: Level,
    pub units: Vec<UnitRecord>,
}

impl LevelRecord {
    pub fn new(level: Level) -> Self {
        LevelRecord { level, units: Vec::new() }
    }

    pub fn total_correct(&self) -> usize {
        self.units.iter().map(UnitRecord::correct).sum()
    }

    pub fn is_complete(&self) -> bool {
        self.units.len() >= UNITS_PER_LEVEL
    }
}

/// True when the latest unit was perfect, or the whole level pass is done
/// with at least 90 correct answers.
pub fn level_up_eligible(record: &LevelRecord) -> bool {
    let perfect_unit = record.units.last().is_some_and(|u| u.correct() == UNIT_SIZE);
    let strong_level = record.is_complete() && record.total_correct() >= 90;
    perfect_unit || strong_level
}

/// Effect of one standard-mode answer on the profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerEffect {
    pub outcome: Outcome,
    /// Set when this answer completed a unit.
    pub completed_unit: Option<UnitRecord>,
    pub level_up_eligible: bool,
}

/// Records a standard-mode answer: misses go to the review queue, and the
/// tenth answer of a unit closes it. A closed unit clears the first-time
/// flag and, when the level pass allows it, opens a level-up choice.
pub fn record_answer(profile: &mut UserProfile, q: &Question, outcome: Outcome) -> AnswerEffect {
    if !outcome.is_correct() {
        record_mistake(profile, q);
    }
    profile.current_unit.push(outcome);
    let mut effect = AnswerEffect {
        outcome,
        completed_unit: None,
        level_up_eligible: false,
    };
    if profile.current_unit.len() < UNIT_SIZE {
        return effect;
    }
    if profile.levels.last().is_none_or(LevelRecord::is_complete) {
        profile.levels.push(LevelRecord::new(profile.current_level));
    }
    let record = profile.levels.last_mut().expect("level record present");
    let results = std::mem::take(&mut profile.current_unit);
    let unit = UnitRecord::new(record.level, record.units.len() as u8 + 1, results).expect("ten results");
    record.units.push(unit.clone());
    profile.first_time = false;
    let eligible = level_up_eligible(record);
    profile.level_choice_pending = eligible;
    effect.completed_unit = Some(unit);
    effect.level_up_eligible = eligible;
    effect
}

/// Accepting moves up one level (3 is the ceiling) and starts a new pass;
/// declining keeps the level and continues with a fresh unit.
pub fn apply_level_choice(profile: &mut UserProfile, accept: bool) -> Result<Level, GameError> {
    if !profile.level_choice_pending {
        return Err(GameError::NotEligible);
    }
    profile.level_choice_pending = false;
    profile.current_unit.clear();
    if accept {
        profile.current_level = profile.current_level.next();
        profile.levels.push(LevelRecord::new(profile.current_level));
    }
    Ok(profile.current_level)
}

/// Queues a missed question once, keyed by id.
pub fn record_mistake(profile: &mut UserProfile, q: &Question) {
    if !profile.review_queue.iter().any(|r| r.id == q.id) {
        profile.review_queue.push(q.clone());
    }
}

/// Oldest queued question.
pub fn next_review(profile: &UserProfile) -> Result<&Question, GameError> {
    profile.review_queue.first().ok_or(GameError::EmptyQueue)
}

/// Drops `question_id` from the queue when it was answered correctly.
/// Returns whether it was removed.
pub fn resolve_review(profile: &mut UserProfile, question_id: u64, outcome: Outcome) -> bool {
    if !outcome.is_correct() {
        return false;
    }
    let before = profile.review_queue.len();
    profile.review_queue.retain(|q| q.id != question_id);
    profile.review_queue.len() != before
}
