//! Headless players driven through the game and the bundled rules.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::context::{assign_level, snapshot_from_parts, Orientation, UserPreferences, UserProfile};
use crate::dsl::RuleDocument;
use crate::game::{apply_level_choice, check_answer, generate_question, record_answer, Level, UNIT_SIZE};
use crate::model::{ActionValue, TimeOfDay};
use crate::tree::{evaluate_chain, EvalError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub users: usize,
    pub seed: u64,
    pub units: usize,
}

/// One completed unit of one simulated player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimRow {
    pub user: usize,
    pub unit: usize,
    pub age: u32,
    pub accuracy: u8,
    /// Theme in effect while the unit was played.
    pub theme: String,
    /// Level the unit was played at.
    pub level: Level,
    pub level_up_eligible: bool,
}

/// Plays `units` units for each of `users` players. Player `u` draws its
/// age and skill from a generator seeded by `seed` on stream `u`, answers
/// each question correctly with probability `skill` and always accepts a
/// level-up. Results are identical for identical configurations.
pub fn simulate(rules: &RuleDocument, config: SimulationConfig) -> Result<Vec<SimRow>, EvalError> {
    let mut rows = Vec::with_capacity(config.users * config.units);
    let noon = TimeOfDay::new(12, 0).expect("valid time");
    for user in 0..config.users {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(user as u64);
        let age: u32 = rng.random_range(4..=30);
        let skill: f64 = rng.random();
        let level = assign_level(age as i64).expect("non-negative age");
        let mut profile = UserProfile::new(format!("player{user}"), "", age, level, UserPreferences::default());
        for unit in 1..=config.units {
            let snapshot = snapshot_from_parts(&profile, noon, None, Orientation::Portrait);
            let actions = evaluate_chain(&rules.trees, &snapshot)?;
            let theme = match actions.get("theme") {
                Some(ActionValue::Token(t)) => t.clone(),
                Some(other) => other.to_string(),
                None => String::new(),
            };
            let played_at = profile.current_level;
            let mut effect = None;
            for _ in 0..UNIT_SIZE {
                let q = generate_question(profile.current_level, &mut rng);
                let submitted = if rng.random_bool(skill) { q.answer } else { q.answer + 1 };
                let elapsed = rng.random_range(500..=9_000);
                let outcome = check_answer(&q, Some(submitted), elapsed);
                effect = Some(record_answer(&mut profile, &q, outcome));
            }
            let effect = effect.expect("unit has questions");
            let completed = effect.completed_unit.expect("tenth answer completes the unit");
            if effect.level_up_eligible {
                apply_level_choice(&mut profile, true).expect("choice pending");
            }
            rows.push(SimRow {
                user,
                unit,
                age,
                accuracy: completed.accuracy,
                theme,
                level: played_at,
                level_up_eligible: effect.level_up_eligible,
            });
        }
    }
    Ok(rows)
}

pub fn to_csv(rows: &[SimRow]) -> String {
    let mut out = String::from("user,unit,accuracy,theme,level\n");
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.user, r.unit, r.accuracy, r.theme, r.level).unwrap();
    }
    out
}
