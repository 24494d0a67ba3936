mod common;

use adaptree_core::model::{ActionTemplate, ContextSnapshot, FeatureSet};
use adaptree_core::tree::{
    check_distributive, evaluate, evaluate_chain, evaluate_leaf, evaluate_table, extract_rules,
    to_decision_table, to_region_table, validate_tree, AdaptionFunction, AdaptionTree, Branch,
    DistributiveOutcome, EvalError, IssueKind, Node, Severity,
};
use common::{for_each_snapshot, random_tree, small_schema, tested_vars, FEATURES};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tree and table agree when both succeed with the same action set, or
/// the tree finds no branch where the table hits an unreachable row.
fn agrees(tree: Result<adaptree_core::ActionSet, EvalError>, table: Result<adaptree_core::ActionSet, EvalError>) -> bool {
    match (tree, table) {
        (Ok(a), Ok(b)) => a == b,
        (Err(EvalError::NoMatchingBranch { .. }), Err(EvalError::UnreachableRow(_))) => true,
        _ => false,
    }
}

fn map_leaves(node: &Node, f: &impl Fn(&ActionTemplate) -> ActionTemplate) -> Node {
    match node {
        Node::Conclusion(c) => Node::leaf(f(&c.actions)),
        Node::Condition(c) => Node::cond(
            c.variable(),
            c.branches().iter().map(|b| Branch::new(b.guard.clone(), map_leaves(&b.child, f))).collect(),
        )
        .unwrap(),
    }
}

fn project(tree: &AdaptionTree, name: &str, set: &FeatureSet) -> AdaptionTree {
    AdaptionTree::new(name, tree.priority, map_leaves(&tree.root, &|a| a.project(set)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tree_and_tables_agree(seed in any::<u64>(), complete in any::<bool>(), with_time in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schema = small_schema(with_time);
        let tree = random_tree(&mut rng, &schema, "t", &FEATURES, complete);
        let full = to_decision_table(&tree, &schema).unwrap();
        let compressed = full.compressed();
        let regions = to_region_table(&tree, &schema).unwrap();
        prop_assert!(regions.rows.len() <= full.rows.len());
        let vars = tested_vars(&schema, &[&tree]);
        let mut ok = true;
        for_each_snapshot(&vars, |s| {
            let expected = || evaluate(&tree, s);
            ok &= agrees(expected(), evaluate_table(&full, s));
            ok &= agrees(expected(), evaluate_table(&compressed, s));
            ok &= agrees(expected(), evaluate_table(&regions, s));
        });
        prop_assert!(ok);
    }

    #[test]
    fn rules_partition_a_validated_tree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schema = small_schema(false);
        let tree = random_tree(&mut rng, &schema, "t", &FEATURES, true);
        prop_assert!(validate_tree(&tree, &schema).iter().all(|d| d.severity == Severity::Warning));
        let rules = extract_rules(&tree);
        prop_assert_eq!(rules.len(), tree.leaves().len());
        let vars = schema.variables().to_vec();
        let mut ok = true;
        for_each_snapshot(&vars, |s| {
            let matching: Vec<_> = rules.iter().filter(|r| r.matches(s)).collect();
            ok &= matching.len() == 1;
            ok &= matching.first().map(|r| &r.action) == evaluate_leaf(&tree, s).ok().map(|c| &c.actions);
        });
        prop_assert!(ok);
    }

    #[test]
    fn validator_errors_explain_evaluation_failures(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schema = small_schema(false);
        let tree = random_tree(&mut rng, &schema, "t", &FEATURES, false);
        let diags = validate_tree(&tree, &schema);
        let incomplete = diags.iter().any(|d| d.kind == IssueKind::Incomplete);
        let mut fails = false;
        for_each_snapshot(schema.variables(), |s| {
            fails |= matches!(evaluate(&tree, s), Err(EvalError::NoMatchingBranch { .. }));
        });
        prop_assert_eq!(fails, incomplete, "{:?}", diags);
    }

    #[test]
    fn projected_parts_are_distributive(seed in any::<u64>(), split in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schema = small_schema(true);
        let tree = random_tree(&mut rng, &schema, "full", &FEATURES, true);
        let Some(all) = tree.assigned_features() else { return Ok(()) };
        let names: Vec<String> = all.iter().map(|f| f.to_string()).collect();
        if names.len() <= split {
            return Ok(());
        }
        let left = FeatureSet::from_names(names[..split].iter().map(String::as_str)).unwrap();
        let right = FeatureSet::from_names(names[split..].iter().map(String::as_str)).unwrap();
        let full = AdaptionFunction::new(all, tree.clone()).unwrap();
        let parts = [
            AdaptionFunction::new(left.clone(), project(&tree, "left", &left)).unwrap(),
            AdaptionFunction::new(right.clone(), project(&tree, "right", &right)).unwrap(),
        ];
        prop_assert!(check_distributive(&full, &parts, &schema).unwrap().holds());
    }

    /// Region enumeration gives the same verdict as visiting every snapshot.
    #[test]
    fn distributive_check_matches_brute_force(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schema = small_schema(true);
        let full_tree = random_tree(&mut rng, &schema, "full", &["f", "g"], true);
        let f_tree = random_tree(&mut rng, &schema, "pf", &["f"], true);
        let g_tree = if rng.random_bool(0.5) {
            project(&full_tree, "pg", &FeatureSet::from_names(["g"]).unwrap())
        } else {
            random_tree(&mut rng, &schema, "pg", &["g"], true)
        };
        let (Some(fs_full), Some(fs_f), Some(fs_g)) =
            (full_tree.assigned_features(), f_tree.assigned_features(), g_tree.assigned_features())
        else {
            return Ok(());
        };
        if fs_full.len() != 2 {
            return Ok(());
        }
        let full = AdaptionFunction::new(fs_full, full_tree.clone()).unwrap();
        let parts = [
            AdaptionFunction::new(fs_f, f_tree.clone()).unwrap(),
            AdaptionFunction::new(fs_g, g_tree.clone()).unwrap(),
        ];
        let verdict = check_distributive(&full, &parts, &schema).unwrap();

        let vars = tested_vars(&schema, &[&full_tree, &f_tree, &g_tree]);
        let mut brute_holds = true;
        for_each_snapshot(&vars, |s| {
            let lhs = evaluate_leaf(&full_tree, s).map(|c| c.actions.clone()).ok();
            let rhs = evaluate_leaf(&f_tree, s)
                .and_then(|a| evaluate_leaf(&g_tree, s).map(|b| (a, b)))
                .ok()
                .and_then(|(a, b)| a.actions.union(&b.actions).ok());
            brute_holds &= lhs.is_some() && lhs == rhs;
        });
        prop_assert_eq!(verdict.holds(), brute_holds);
        if let DistributiveOutcome::Fails(cx) = verdict {
            prop_assert_ne!(cx.full.ok(), cx.parts.ok());
        }
    }

    #[test]
    fn chain_is_order_insensitive_for_independent_trees(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schema = small_schema(false);
        let mut trees: Vec<AdaptionTree> = FEATURES
            .iter()
            .map(|f| {
                let mut t = random_tree(&mut rng, &schema, f, &[*f], true);
                t.priority = rng.random_range(0..2);
                t
            })
            .collect();
        let snapshots: Vec<ContextSnapshot> = {
            let mut v = Vec::new();
            for_each_snapshot(schema.variables(), |s| v.push(s.clone()));
            v
        };
        let before: Vec<_> = snapshots.iter().map(|s| evaluate_chain(&trees, s)).collect();
        trees.shuffle(&mut rng);
        let after: Vec<_> = snapshots.iter().map(|s| evaluate_chain(&trees, s)).collect();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn evaluation_is_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schema = small_schema(false);
        let tree = random_tree(&mut rng, &schema, "t", &FEATURES, false);
        let copy = tree.clone();
        let mut ok = true;
        for_each_snapshot(schema.variables(), |s| ok &= evaluate(&tree, s) == evaluate(&copy, s));
        prop_assert!(ok);
    }
}
