//! Context-aware adaptation engine built around adaption trees.
//!
//! An adaption tree maps a context snapshot to an [`ActionSet`]: condition
//! nodes test context variables, conclusion leaves assign values to UI
//! features, and every root-to-leaf path is one adaptation rule. On top of
//! the evaluator sit the analysis tools (rule extraction, validation,
//! decision-table expansion, the distributive check), a small text format
//! for rule files, context acquisition, and the arithmetic game that drives
//! the bundled rules.

pub mod bundled;
pub mod context;
pub mod dsl;
pub mod game;
pub mod model;
pub mod simulation;
pub mod tree;

pub use model::{
    are_disjoint, union_actions, validate_partition, ActionSet, ActionTemplate, ActionValue,
    Category, ContextSchema, ContextSnapshot, ContextValue, ContextVariable, Domain, Feature,
    FeatureSet, ModelError, PartitionCheck, Rgb, TimeOfDay, ValueExpr,
};
pub use tree::{
    check_distributive, evaluate, evaluate_chain, evaluate_table, extract_rules,
    to_decision_table, validate_tree, AdaptionFunction, AdaptionTree, Branch, ConditionNode,
    DecisionTable, EvalError, Guard, Node, Rule,
};
