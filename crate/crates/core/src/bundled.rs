//! Rule files shipped with the crate.

use crate::dsl::{parse, RuleDocument};

pub const ARITH_GAME: &str = include_str!("../../../rules/arith_game.atree");
pub const THEME: &str = include_str!("../../../rules/theme.atree");
pub const ARITH_FULL: &str = include_str!("../../../rules/arith_full.atree");
pub const ARITH_PARTS: &str = include_str!("../../../rules/arith_parts.atree");
pub const BATTERY_FULL: &str = include_str!("../../../rules/battery_full.atree");
pub const BATTERY_PARTS_A: &str = include_str!("../../../rules/battery_parts_a.atree");
pub const BATTERY_PARTS_B: &str = include_str!("../../../rules/battery_parts_b.atree");
pub const BATTERY_PARTS_C: &str = include_str!("../../../rules/battery_parts_c.atree");
pub const BATTERY_PARTS_MUTATED: &str = include_str!("../../../rules/battery_parts_mutated.atree");

/// Every bundled file as `(file name, source)`.
pub const ALL: [(&str, &str); 9] = [
    ("arith_game.atree", ARITH_GAME),
    ("theme.atree", THEME),
    ("arith_full.atree", ARITH_FULL),
    ("arith_parts.atree", ARITH_PARTS),
    ("battery_full.atree", BATTERY_FULL),
    ("battery_parts_a.atree", BATTERY_PARTS_A),
    ("battery_parts_b.atree", BATTERY_PARTS_B),
    ("battery_parts_c.atree", BATTERY_PARTS_C),
    ("battery_parts_mutated.atree", BATTERY_PARTS_MUTATED),
];

/// The game's rule document.
pub fn arith_game() -> RuleDocument {
    parse(ARITH_GAME).expect("bundled arith_game.atree parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::serialize;

    #[test]
    fn all_bundled_files_parse_and_validate_cleanly() {
        for (name, src) in ALL {
            let (doc, map) = crate::dsl::parse_with_source_map(src).unwrap_or_else(|d| panic!("{name}: {d:?}"));
            let diags = doc.validate(Some(&map));
            assert!(diags.is_empty(), "{name}: {diags:?}");
        }
    }

    #[test]
    fn canonical_files_are_fixed_points() {
        for (name, src) in ALL {
            let doc = parse(src).unwrap();
            let text = serialize(&doc);
            assert_eq!(parse(&text).unwrap(), doc, "{name}");
        }
    }

    #[test]
    fn theme_file_has_two_trees() {
        let doc = parse(THEME).unwrap();
        let names: Vec<(&str, i64)> = doc.trees.iter().map(|t| (t.name.as_str(), t.priority)).collect();
        assert_eq!(names, [("theme", 1), ("background_image", 2)]);
    }
}
