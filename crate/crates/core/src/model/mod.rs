//! Features, action values, context variables and the set algebra that ties
//! them together.

mod action;
mod feature;
mod schema;

pub use action::{union_actions, ActionSet, ActionTemplate, ActionValue, Rgb, ValueExpr};
pub use feature::{are_disjoint, validate_partition, Feature, FeatureSet, PartitionCheck};
pub use schema::{
    Category, ContextSchema, ContextSnapshot, ContextValue, ContextVariable, Domain, SnapshotError,
    TimeOfDay, MINUTES_PER_DAY,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("feature set must not be empty")]
    EmptySet,
    #[error("invalid identifier `{0}`: expected lowercase snake_case")]
    InvalidIdentifier(String),
    #[error("conflicting assignment for `{feature}`: {left} vs {right}")]
    ConflictingAssignment {
        feature: Feature,
        left: String,
        right: String,
    },
    #[error("invalid color `{0}`: expected #RRGGBB")]
    InvalidColor(String),
    #[error("invalid time of day `{0}`: expected HH:MM")]
    InvalidTime(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
}

/// Lowercase snake_case: `[a-z][a-z0-9_]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}
