use std::fmt;

use super::{AdaptionTree, Guard, Node};
use crate::model::{ActionTemplate, ContextSnapshot};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleTest {
    Guard(Guard),
    /// A default branch: none of the sibling guards matched.
    Otherwise(Vec<Guard>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleCondition {
    pub variable: String,
    pub test: RuleTest,
}

impl RuleCondition {
    pub fn holds(&self, snapshot: &ContextSnapshot) -> bool {
        let Some(value) = snapshot.get(&self.variable) else {
            return false;
        };
        match &self.test {
            RuleTest::Guard(g) => g.matches(value),
            RuleTest::Otherwise(others) => !others.iter().any(|g| g.matches(value)),
        }
    }
}

impl fmt::Display for RuleCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.test {
            RuleTest::Guard(Guard::Equals(v)) => write!(f, "{} = {v}", self.variable),
            RuleTest::Guard(g) => write!(f, "{} in {g}", self.variable),
            RuleTest::Otherwise(others) => {
                let list: Vec<String> = others.iter().map(ToString::to_string).collect();
                write!(f, "{} not in {{{}}}", self.variable, list.join(", "))
            }
        }
    }
}

/// One root-to-leaf path: a conjunction of conditions in path order and
/// the action at the leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub conditions: Vec<RuleCondition>,
    pub action: ActionTemplate,
}

impl Rule {
    pub fn matches(&self, snapshot: &ContextSnapshot) -> bool {
        self.conditions.iter().all(|c| c.holds(snapshot))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("IF ")?;
        if self.conditions.is_empty() {
            f.write_str("TRUE")?;
        }
        for (i, c) in self.conditions.iter().enumerate() {
            if i > 0 {
                f.write_str(" AND ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(" THEN ")?;
        let actions: Vec<String> = self.action.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&actions.join(", "))
    }
}

/// One rule per leaf, in left-to-right leaf order.
pub fn extract_rules(tree: &AdaptionTree) -> Vec<Rule> {
    let mut rules = Vec::new();
    collect(&tree.root, &mut Vec::new(), &mut rules);
    rules
}

fn collect(node: &Node, path: &mut Vec<RuleCondition>, out: &mut Vec<Rule>) {
    match node {
        Node::Conclusion(c) => out.push(Rule {
            conditions: path.clone(),
            action: c.actions.clone(),
        }),
        Node::Condition(cond) => {
            let siblings: Vec<Guard> = cond
                .branches()
                .iter()
                .filter(|b| b.guard != Guard::Default)
                .map(|b| b.guard.clone())
                .collect();
            for branch in cond.branches() {
                let test = match &branch.guard {
                    Guard::Default => RuleTest::Otherwise(siblings.clone()),
                    g => RuleTest::Guard(g.clone()),
                };
                path.push(RuleCondition {
                    variable: cond.variable().to_string(),
                    test,
                });
                collect(&branch.child, path, out);
                path.pop();
            }
        }
    }
}
