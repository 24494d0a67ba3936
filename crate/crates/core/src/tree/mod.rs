//! Adaption trees: condition nodes test context variables, conclusion
//! leaves assign UI actions, and each root-to-leaf path is one rule.

mod distributive;
mod eval;
mod ranges;
mod regions;
mod rules;
mod table;
mod validate;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{
    ActionTemplate, ActionValue, ContextValue, Domain, Feature, FeatureSet, ModelError, TimeOfDay,
};

pub use distributive::{check_distributive, AdaptionFunction, Counterexample, DistributiveError, DistributiveOutcome};
pub use eval::{evaluate, evaluate_chain, evaluate_leaf, EvalError};
pub use ranges::RangeSet;
pub use rules::{extract_rules, Rule, RuleCondition, RuleTest};
pub use table::{
    evaluate_table, to_decision_table, to_decision_table_with_limit, to_region_table, Cell, DecisionTable,
    RowOutcome, TableError, TableRow, DEFAULT_ROW_LIMIT,
};
pub use validate::{validate_tree, IssueKind, Severity, TreeDiagnostic};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("condition on `{0}` needs at least two branches, or one branch plus a default")]
    TooFewBranches(String),
    #[error("condition on `{0}` has a default branch that is not last")]
    DefaultNotLast(String),
    #[error("empty interval {0}")]
    EmptyInterval(Interval),
    #[error("time window {0} is empty")]
    EmptyWindow(TimeWindow),
}

/// Numeric interval with explicit endpoint inclusivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: i64,
    pub hi: i64,
    pub lo_inclusive: bool,
    pub hi_inclusive: bool,
}

impl Interval {
    pub fn new(lo: i64, hi: i64, lo_inclusive: bool, hi_inclusive: bool) -> Result<Self, TreeError> {
        let iv = Interval {
            lo,
            hi,
            lo_inclusive,
            hi_inclusive,
        };
        match iv.bounds() {
            Some(_) => Ok(iv),
            None => Err(TreeError::EmptyInterval(iv)),
        }
    }

    pub fn closed(lo: i64, hi: i64) -> Result<Self, TreeError> {
        Interval::new(lo, hi, true, true)
    }

    pub fn open(lo: i64, hi: i64) -> Result<Self, TreeError> {
        Interval::new(lo, hi, false, false)
    }

    /// Inclusive integer bounds, or `None` if no integer lies inside.
    pub fn bounds(&self) -> Option<(i64, i64)> {
        let lo = if self.lo_inclusive { self.lo } else { self.lo.checked_add(1)? };
        let hi = if self.hi_inclusive { self.hi } else { self.hi.checked_sub(1)? };
        (lo <= hi).then_some((lo, hi))
    }

    pub fn contains(&self, v: i64) -> bool {
        let above = if self.lo_inclusive { v >= self.lo } else { v > self.lo };
        let below = if self.hi_inclusive { v <= self.hi } else { v < self.hi };
        above && below
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{},{}{}",
            if self.lo_inclusive { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_inclusive { ']' } else { ')' }
        )
    }
}

/// Half-open time-of-day window `[start, end)`; wraps past midnight when
/// `start > end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeWindow {
    pub start: TimeOfDay,
    pub end: TimeOfDay,
}

impl TimeWindow {
    pub fn new(start: TimeOfDay, end: TimeOfDay) -> Result<Self, TreeError> {
        let w = TimeWindow { start, end };
        if start == end {
            Err(TreeError::EmptyWindow(w))
        } else {
            Ok(w)
        }
    }

    pub fn wraps_midnight(&self) -> bool {
        self.start > self.end
    }

    pub fn contains(&self, t: TimeOfDay) -> bool {
        if self.wraps_midnight() {
            t >= self.start || t < self.end
        } else {
            t >= self.start && t < self.end
        }
    }
}

impl fmt::Display for TimeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Guard {
    Equals(ContextValue),
    Interval(Interval),
    Window(TimeWindow),
    Default,
}

impl Guard {
    /// Whether the guard accepts `value`. `Default` accepts everything; its
    /// position as the last branch gives it "otherwise" semantics.
    pub fn matches(&self, value: &ContextValue) -> bool {
        match (self, value) {
            (Guard::Equals(expected), v) => expected == v,
            (Guard::Interval(iv), ContextValue::Int(v)) => iv.contains(*v),
            (Guard::Window(w), ContextValue::Time(t)) => w.contains(*t),
            (Guard::Default, _) => true,
            _ => false,
        }
    }

    /// Checks that the guard kind fits the domain it is tested against.
    pub fn check_domain(&self, domain: &Domain) -> Result<(), String> {
        match (self, domain) {
            (Guard::Default, _) => Ok(()),
            (Guard::Equals(v), Domain::Bool | Domain::Enum(_) | Domain::Color) => {
                if domain.contains(v) {
                    Ok(())
                } else {
                    Err(format!("value `{v}` is not in domain {domain}"))
                }
            }
            (Guard::Interval(_), Domain::Int { .. }) => Ok(()),
            (Guard::Window(_), Domain::Time) => Ok(()),
            (Guard::Equals(_), _) => Err(format!("equality guard cannot test a {domain} variable")),
            (Guard::Interval(iv), _) => Err(format!("interval {iv} cannot test a {domain} variable")),
            (Guard::Window(w), _) => Err(format!("time window {w} cannot test a {domain} variable")),
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::Equals(v) => write!(f, "{v}"),
            Guard::Interval(iv) => write!(f, "{iv}"),
            Guard::Window(w) => write!(f, "{w}"),
            Guard::Default => f.write_str("default"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Branch {
    pub guard: Guard,
    pub child: Node,
}

impl Branch {
    pub fn new(guard: Guard, child: Node) -> Self {
        Branch { guard, child }
    }
}

/// Non-leaf node: tests one context variable and follows the first
/// matching branch.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConditionNode {
    variable: String,
    branches: Vec<Branch>,
}

impl ConditionNode {
    pub fn new(variable: impl Into<String>, branches: Vec<Branch>) -> Result<Self, TreeError> {
        let variable = variable.into();
        if let Some(pos) = branches.iter().position(|b| b.guard == Guard::Default) {
            if pos + 1 != branches.len() {
                return Err(TreeError::DefaultNotLast(variable));
            }
        }
        // a lone default branch is not enough either
        let guarded = branches.iter().filter(|b| b.guard != Guard::Default).count();
        if branches.len() < 2 || guarded == 0 {
            return Err(TreeError::TooFewBranches(variable));
        }
        Ok(ConditionNode { variable, branches })
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn has_default(&self) -> bool {
        self.branches.last().is_some_and(|b| b.guard == Guard::Default)
    }
}

/// Leaf node holding the UI action reached by a path.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Conclusion {
    pub actions: ActionTemplate,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Condition(ConditionNode),
    Conclusion(Conclusion),
}

impl Node {
    pub fn leaf(actions: ActionTemplate) -> Self {
        Node::Conclusion(Conclusion { actions })
    }

    pub fn cond(variable: impl Into<String>, branches: Vec<Branch>) -> Result<Self, TreeError> {
        ConditionNode::new(variable, branches).map(Node::Condition)
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<&Conclusion> {
        let mut out = Vec::new();
        self.walk(&mut |node| {
            if let Node::Conclusion(c) = node {
                out.push(c);
            }
        });
        out
    }

    fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Node)) {
        visit(self);
        if let Node::Condition(cond) = self {
            for branch in &cond.branches {
                branch.child.walk(visit);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Conclusion(_) => 0,
            Node::Condition(c) => 1 + c.branches.iter().map(|b| b.child.depth()).max().unwrap_or(0),
        }
    }
}

/// Optional activation condition of a tree: an earlier tree in the chain
/// must have produced `feature = value`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreeGuard {
    pub feature: Feature,
    pub value: ActionValue,
}

impl fmt::Display for TreeGuard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.feature, self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AdaptionTree {
    pub name: String,
    /// Lower priorities are evaluated first in a chain.
    pub priority: i64,
    pub guard: Option<TreeGuard>,
    pub root: Node,
}

impl AdaptionTree {
    pub fn new(name: impl Into<String>, priority: i64, root: Node) -> Self {
        AdaptionTree {
            name: name.into(),
            priority,
            guard: None,
            root,
        }
    }

    pub fn with_guard(mut self, feature: &str, value: ActionValue) -> Result<Self, ModelError> {
        self.guard = Some(TreeGuard {
            feature: Feature::new(feature)?,
            value,
        });
        Ok(self)
    }

    pub fn leaves(&self) -> Vec<&Conclusion> {
        self.root.leaves()
    }

    /// Variables tested anywhere in the tree, in first-visit order.
    pub fn tested_variables(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        self.root.walk(&mut |node| {
            if let Node::Condition(c) = node {
                if !seen.contains(&c.variable.as_str()) {
                    seen.push(c.variable.as_str());
                }
            }
        });
        seen
    }

    /// Variables copied into actions through `$name` references.
    pub fn referenced_variables(&self) -> BTreeSet<&str> {
        self.leaves()
            .into_iter()
            .flat_map(|c| c.actions.referenced_variables())
            .collect()
    }

    /// Every feature assigned by some leaf; `None` if no leaf assigns
    /// anything.
    pub fn assigned_features(&self) -> Option<FeatureSet> {
        let features: BTreeSet<Feature> = self
            .leaves()
            .into_iter()
            .flat_map(|c| c.actions.features().cloned())
            .collect();
        FeatureSet::new(features).ok()
    }
}

/// Branch indices from the root to a node.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodePath(pub Vec<usize>);

impl NodePath {
    pub fn child(&self, index: usize) -> NodePath {
        let mut v = self.0.clone();
        v.push(index);
        NodePath(v)
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("root")?;
        for i in &self.0 {
            write!(f, ".{i}")?;
        }
        Ok(())
    }
}
