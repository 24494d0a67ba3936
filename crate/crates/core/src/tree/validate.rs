use std::collections::BTreeMap;
use std::fmt;

use super::ranges::{guard_set, RangeSet};
use super::{AdaptionTree, Guard, Node, NodePath};
use crate::model::ContextSchema;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IssueKind {
    UnknownVariable,
    TypeMismatch,
    Overlap,
    Incomplete,
    Unreachable,
}

impl IssueKind {
    pub fn code(self) -> &'static str {
        match self {
            IssueKind::UnknownVariable => "unknown-variable",
            IssueKind::TypeMismatch => "type-mismatch",
            IssueKind::Overlap => "overlap",
            IssueKind::Incomplete => "incomplete",
            IssueKind::Unreachable => "unreachable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDiagnostic {
    pub severity: Severity,
    pub kind: IssueKind,
    pub tree: String,
    /// Path of the condition (or conclusion) node concerned.
    pub path: NodePath,
    /// Branch index within that node, when the issue is about one branch.
    pub branch: Option<usize>,
    pub message: String,
}

impl fmt::Display for TreeDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: [{}] tree `{}` at {}", self.severity, self.kind.code(), self.tree, self.path)?;
        if let Some(b) = self.branch {
            write!(f, " branch {b}")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Checks every condition node for overlapping guards, incomplete
/// coverage, unreachable branches and unknown or mistyped variables.
///
/// Coverage is judged against the values that can actually reach a node:
/// a variable tested again below an ancestor that already constrained it
/// only needs to cover what the ancestor let through.
pub fn validate_tree(tree: &AdaptionTree, schema: &ContextSchema) -> Vec<TreeDiagnostic> {
    let mut v = Validator {
        tree: &tree.name,
        schema,
        out: Vec::new(),
    };
    v.node(&tree.root, &NodePath::default(), &mut BTreeMap::new());
    v.out
}

struct Validator<'a> {
    tree: &'a str,
    schema: &'a ContextSchema,
    out: Vec<TreeDiagnostic>,
}

impl Validator<'_> {
    fn push(&mut self, severity: Severity, kind: IssueKind, path: &NodePath, branch: Option<usize>, message: String) {
        self.out.push(TreeDiagnostic {
            severity,
            kind,
            tree: self.tree.to_string(),
            path: path.clone(),
            branch,
            message,
        });
    }

    fn node(&mut self, node: &Node, path: &NodePath, reach_by_var: &mut BTreeMap<String, RangeSet>) {
        let cond = match node {
            Node::Conclusion(c) => {
                for var in c.actions.referenced_variables() {
                    if self.schema.get(var).is_none() {
                        self.push(
                            Severity::Error,
                            IssueKind::UnknownVariable,
                            path,
                            None,
                            format!("action references undeclared context variable `{var}`"),
                        );
                    }
                }
                return;
            }
            Node::Condition(cond) => cond,
        };
        let name = cond.variable();
        let Some(var) = self.schema.get(name) else {
            self.push(
                Severity::Error,
                IssueKind::UnknownVariable,
                path,
                None,
                format!("`{name}` is not a declared context variable"),
            );
            for (i, b) in cond.branches().iter().enumerate() {
                self.node(&b.child, &path.child(i), reach_by_var);
            }
            return;
        };
        let domain = &var.domain;
        if reach_by_var.values().any(RangeSet::is_empty) {
            // Below a branch already reported as unreachable only the
            // variable and guard types are checked.
            for (i, b) in cond.branches().iter().enumerate() {
                if let Err(why) = b.guard.check_domain(domain) {
                    self.push(Severity::Error, IssueKind::TypeMismatch, path, Some(i), why);
                }
                self.node(&b.child, &path.child(i), reach_by_var);
            }
            return;
        }
        let reach = reach_by_var
            .get(name)
            .cloned()
            .unwrap_or_else(|| RangeSet::full(domain.size()));

        let mut covered = RangeSet::empty();
        let mut accepted: Vec<(usize, RangeSet)> = Vec::new();
        for (i, branch) in cond.branches().iter().enumerate() {
            let effective = if branch.guard == Guard::Default {
                let rest = reach.subtract(&covered);
                if rest.is_empty() {
                    self.push(
                        Severity::Warning,
                        IssueKind::Unreachable,
                        path,
                        Some(i),
                        format!("default branch of `{name}` is unreachable: the guards already cover every value"),
                    );
                }
                covered = reach.clone();
                rest
            } else {
                match guard_set(&branch.guard, domain) {
                    None => {
                        let why = branch.guard.check_domain(domain).err().unwrap_or_default();
                        self.push(Severity::Error, IssueKind::TypeMismatch, path, Some(i), why);
                        RangeSet::empty()
                    }
                    Some(set) => {
                        let set = set.intersect(&reach);
                        if set.is_subset(&covered) {
                            self.push(
                                Severity::Warning,
                                IssueKind::Unreachable,
                                path,
                                Some(i),
                                format!("branch `{}` of `{name}` can never be taken", branch.guard),
                            );
                        } else {
                            for (j, earlier) in &accepted {
                                let shared = earlier.intersect(&set);
                                if !shared.is_empty() {
                                    self.push(
                                        Severity::Error,
                                        IssueKind::Overlap,
                                        path,
                                        Some(i),
                                        format!(
                                            "branch `{}` of `{name}` overlaps branch {j} on {}",
                                            branch.guard,
                                            shared.describe(domain)
                                        ),
                                    );
                                }
                            }
                        }
                        let effective = set.subtract(&covered);
                        covered = covered.union(&set);
                        accepted.push((i, set));
                        effective
                    }
                }
            };
            let previous = reach_by_var.insert(name.to_string(), effective);
            self.node(&branch.child, &path.child(i), reach_by_var);
            match previous {
                Some(p) => reach_by_var.insert(name.to_string(), p),
                None => reach_by_var.remove(name),
            };
        }

        if !cond.has_default() {
            let gap = reach.subtract(&covered);
            if !gap.is_empty() {
                self.push(
                    Severity::Error,
                    IssueKind::Incomplete,
                    path,
                    None,
                    format!("`{name}` is not covered for {}", gap.describe(domain)),
                );
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ActionTemplate, Category, ContextValue, ContextVariable, Domain};
    use crate::tree::{Branch, Interval};

    fn schema() -> ContextSchema {
        ContextSchema::new(vec![
            ContextVariable::new("first_time", Category::Logical, Domain::Bool).unwrap(),
            ContextVariable::new("acc", Category::Logical, Domain::int(0, 100).unwrap()).unwrap(),
        ])
        .unwrap()
    }

    fn leaf() -> Node {
        Node::leaf(ActionTemplate::new())
    }

    fn acc_tree(guards: Vec<Interval>) -> AdaptionTree {
        let branches = guards
            .into_iter()
            .map(|iv| Branch::new(Guard::Interval(iv), leaf()))
            .collect();
        AdaptionTree::new("t", 1, Node::cond("acc", branches).unwrap())
    }

    /// Independent oracle: enumerate 0..=100 and count guard hits per value.
    fn oracle(guards: &[Interval]) -> (Vec<i64>, Vec<i64>) {
        let mut overlap = Vec::new();
        let mut gap = Vec::new();
        for v in 0..=100 {
            let hits = guards.iter().filter(|g| g.contains(v)).count();
            if hits > 1 {
                overlap.push(v);
            }
            if hits == 0 {
                gap.push(v);
            }
        }
        (overlap, gap)
    }

    #[test]
    fn accuracy_groups_are_clean() {
        let guards = vec![
            Interval::closed(0, 60).unwrap(),
            Interval::open(60, 90).unwrap(),
            Interval::closed(90, 100).unwrap(),
        ];
        assert_eq!(oracle(&guards), (vec![], vec![]));
        assert!(validate_tree(&acc_tree(guards), &schema()).is_empty());
    }

    #[test]
    fn overlap_and_gap() {
        let guards = vec![Interval::closed(0, 60).unwrap(), Interval::closed(60, 90).unwrap()];
        let (overlap, gap) = oracle(&guards);
        assert_eq!(overlap, vec![60]);
        assert_eq!(gap, (91..=100).collect::<Vec<_>>());

        let diags = validate_tree(&acc_tree(guards), &schema());
        assert_eq!(diags.len(), 2, "{diags:#?}");
        assert!(diags.iter().all(|d| d.severity == Severity::Error));
        assert_eq!(diags[0].kind, IssueKind::Overlap);
        assert!(diags[0].message.ends_with("on 60"), "{}", diags[0].message);
        assert_eq!(diags[1].kind, IssueKind::Incomplete);
        assert!(diags[1].message.ends_with("91..100"), "{}", diags[1].message);
    }

    #[test]
    fn boolean_single_branch_is_incomplete() {
        let tree = AdaptionTree::new(
            "t",
            1,
            Node::Condition(super::super::ConditionNode {
                variable: "first_time".into(),
                branches: vec![Branch::new(Guard::Equals(ContextValue::Bool(true)), leaf())],
            }),
        );
        let diags = validate_tree(&tree, &schema());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, IssueKind::Incomplete);
        assert!(diags[0].message.contains("false"));
    }

    #[test]
    fn unknown_variable_and_type_mismatch() {
        let tree = AdaptionTree::new(
            "t",
            1,
            Node::cond(
                "first_time",
                vec![
                    Branch::new(Guard::Interval(Interval::closed(0, 1).unwrap()), leaf()),
                    Branch::new(
                        Guard::Default,
                        Node::cond(
                            "nope",
                            vec![Branch::new(Guard::Equals(ContextValue::Bool(true)), leaf()), Branch::new(Guard::Default, leaf())],
                        )
                        .unwrap(),
                    ),
                ],
            )
            .unwrap(),
        );
        let kinds: Vec<_> = validate_tree(&tree, &schema()).into_iter().map(|d| d.kind).collect();
        assert_eq!(kinds, vec![IssueKind::TypeMismatch, IssueKind::UnknownVariable]);
    }

    #[test]
    fn shadowed_and_redundant_default_are_unreachable() {
        let tree = AdaptionTree::new(
            "t",
            1,
            Node::cond(
                "acc",
                vec![
                    Branch::new(Guard::Interval(Interval::closed(0, 100).unwrap()), leaf()),
                    Branch::new(Guard::Interval(Interval::closed(10, 20).unwrap()), leaf()),
                    Branch::new(Guard::Default, leaf()),
                ],
            )
            .unwrap(),
        );
        let diags = validate_tree(&tree, &schema());
        assert_eq!(diags.len(), 2);
        assert!(diags.iter().all(|d| d.kind == IssueKind::Unreachable && d.severity == Severity::Warning));
    }

    #[test]
    fn nested_retest_uses_narrowed_domain() {
        // acc in [0,50] then re-test acc with [0,20] / [21,50]: complete.
        let inner = Node::cond(
            "acc",
            vec![
                Branch::new(Guard::Interval(Interval::closed(0, 20).unwrap()), leaf()),
                Branch::new(Guard::Interval(Interval::closed(21, 50).unwrap()), leaf()),
            ],
        )
        .unwrap();
        let tree = AdaptionTree::new(
            "t",
            1,
            Node::cond(
                "acc",
                vec![
                    Branch::new(Guard::Interval(Interval::closed(0, 50).unwrap()), inner),
                    Branch::new(Guard::Default, leaf()),
                ],
            )
            .unwrap(),
        );
        assert!(validate_tree(&tree, &schema()).is_empty());
    }
}
