mod common;

use adaptree_core::bundled;
use adaptree_core::context::{assign_level, UserPreferences, UserProfile};
use adaptree_core::game::{
    accuracy_group, apply_level_choice, generate_for, generate_question, next_review, record_answer,
    resolve_review, GameError, Level, Operator, Outcome, UNIT_SIZE,
};
use adaptree_core::model::{ActionValue, ContextSnapshot, ContextValue};
use adaptree_core::tree::evaluate;
use common::constraint_violation;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn ten_thousand_questions_per_level_and_operator() {
    for level in Level::ALL {
        for &op in Operator::available(level) {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..10_000 {
                let q = generate_for(level, op, &mut rng).unwrap();
                assert_eq!(constraint_violation(&q), None, "{q:?}");
            }
        }
    }
}

#[test]
fn level_one_offers_only_addition_and_subtraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..10_000 {
        let q = generate_question(Level::ONE, &mut rng);
        assert!(matches!(q.operator, Operator::Add | Operator::Sub));
        assert_eq!(constraint_violation(&q), None);
    }
    for op in [Operator::Mul, Operator::Div] {
        assert_eq!(
            generate_for(Level::ONE, op, &mut rng),
            Err(GameError::OperatorUnavailable { level: Level::ONE, op })
        );
    }
}

#[test]
fn operators_are_drawn_uniformly() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut counts = [0usize; 4];
    for _ in 0..40_000 {
        counts[generate_question(Level::THREE, &mut rng).operator as usize] += 1;
    }
    assert!(counts.iter().all(|&c| (9_000..11_000).contains(&c)), "{counts:?}");
}

#[test]
fn accuracy_group_agrees_with_the_theme_tree() {
    let doc = adaptree_core::dsl::parse(bundled::THEME).unwrap();
    let tree = doc.tree("theme").unwrap();
    for pct in 0..=100 {
        let s = ContextSnapshot::new()
            .with("first_time", ContextValue::Bool(false))
            .with("last_unit_accuracy", ContextValue::Int(pct));
        let group = accuracy_group(pct).unwrap();
        assert_eq!(evaluate(tree, &s).unwrap().get("theme"), Some(&ActionValue::token(group.as_str())), "{pct}");
        assert_eq!(group.as_str(), common::theme_oracle(false, pct));
    }
}

fn question(id: u64) -> adaptree_core::game::Question {
    let mut rng = ChaCha8Rng::seed_from_u64(id);
    let mut q = generate_question(Level::TWO, &mut rng);
    q.id = id;
    q
}

#[test]
fn repeated_misses_queue_a_question_once() {
    let mut p = UserProfile::new("u", "", 8, Level::TWO, UserPreferences::default());
    record_answer(&mut p, &question(1), Outcome::Incorrect);
    record_answer(&mut p, &question(1), Outcome::Timeout);
    assert_eq!(p.review_queue.len(), 1);
    assert_eq!(next_review(&p).unwrap().id, 1);
    assert!(resolve_review(&mut p, 1, Outcome::Correct));
    assert_eq!(next_review(&p), Err(GameError::EmptyQueue));
}

proptest! {
    #[test]
    fn generated_questions_satisfy_table_one(seed in any::<u64>(), level in 1i64..=3) {
        let level = Level::new(level).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..200 {
            let q = generate_question(level, &mut rng);
            prop_assert_eq!(constraint_violation(&q), None, "{:?}", q);
        }
    }

    #[test]
    fn level_assignment_is_monotone(a in 0i64..200, b in 0i64..200) {
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(assign_level(lo).unwrap() <= assign_level(hi).unwrap());
        let expected = if a <= 5 { 1 } else if a <= 12 { 2 } else { 3 };
        prop_assert_eq!(assign_level(a).unwrap().get(), expected);
    }

    /// Arbitrary standard-mode play keeps the bookkeeping invariants:
    /// unit accuracy is a multiple of ten, a level pass never exceeds 100
    /// correct answers, and the review queue holds exactly the missed
    /// questions not yet answered correctly in review.
    #[test]
    fn play_keeps_bookkeeping_invariants(
        outcomes in proptest::collection::vec((0u64..30, 0u8..3), 0..250),
        accept in any::<bool>(),
        reviews in proptest::collection::vec(any::<bool>(), 0..20),
    ) {
        let mut p = UserProfile::new("u", "", 8, Level::TWO, UserPreferences::default());
        let mut missed = std::collections::BTreeSet::new();
        for (id, o) in outcomes {
            let outcome = [Outcome::Correct, Outcome::Incorrect, Outcome::Timeout][o as usize];
            let effect = record_answer(&mut p, &question(id), outcome);
            if !outcome.is_correct() {
                missed.insert(id);
            }
            if let Some(unit) = &effect.completed_unit {
                prop_assert_eq!(unit.accuracy % 10, 0);
                prop_assert_eq!(unit.accuracy as usize, unit.correct() * 100 / UNIT_SIZE);
            }
            if effect.level_up_eligible {
                prop_assert!(apply_level_choice(&mut p, accept).is_ok());
            }
        }
        for record in &p.levels {
            prop_assert!(record.total_correct() <= 100);
            prop_assert!(record.units.len() <= 10);
        }
        for correct in reviews {
            let Ok(q) = next_review(&p) else { break };
            let id = q.id;
            let outcome = if correct { Outcome::Correct } else { Outcome::Incorrect };
            prop_assert_eq!(resolve_review(&mut p, id, outcome), correct);
            if correct {
                missed.remove(&id);
            } else {
                break;
            }
        }
        let queued: std::collections::BTreeSet<u64> = p.review_queue.iter().map(|q| q.id).collect();
        prop_assert_eq!(queued.len(), p.review_queue.len());
        prop_assert_eq!(queued, missed);
    }
}
