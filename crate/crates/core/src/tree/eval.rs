use thiserror::Error;

use super::{AdaptionTree, Conclusion, Node};
use crate::model::{ActionSet, ContextSnapshot, ContextValue, ModelError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("missing context value for `{0}`")]
    MissingContext(String),
    #[error("no branch of `{variable}` matches {value}")]
    NoMatchingBranch { variable: String, value: ContextValue },
    #[error(transparent)]
    Conflict(#[from] ModelError),
    #[error("no decision-table row matches the snapshot")]
    NoMatchingRow,
    #[error("decision-table row {0} is unreachable in the source tree")]
    UnreachableRow(usize),
}

/// Follows the tree from the root to the leaf selected by `snapshot`,
/// taking the first matching branch at each condition node.
pub fn evaluate_leaf<'t>(
    tree: &'t AdaptionTree,
    snapshot: &ContextSnapshot,
) -> Result<&'t Conclusion, EvalError> {
    let mut node = &tree.root;
    loop {
        match node {
            Node::Conclusion(c) => return Ok(c),
            Node::Condition(cond) => {
                let value = snapshot
                    .get(cond.variable())
                    .ok_or_else(|| EvalError::MissingContext(cond.variable().to_string()))?;
                node = cond
                    .branches()
                    .iter()
                    .find(|b| b.guard.matches(value))
                    .map(|b| &b.child)
                    .ok_or_else(|| EvalError::NoMatchingBranch {
                        variable: cond.variable().to_string(),
                        value: value.clone(),
                    })?;
            }
        }
    }
}

pub fn evaluate(tree: &AdaptionTree, snapshot: &ContextSnapshot) -> Result<ActionSet, EvalError> {
    evaluate_leaf(tree, snapshot)?
        .actions
        .resolve(snapshot)
        .map_err(EvalError::MissingContext)
}

/// Evaluates trees in ascending priority (stable for equal priorities).
///
/// A tree with a guard only contributes when an earlier tree produced the
/// guarded feature value. Two trees assigning the same feature is a
/// conflict.
pub fn evaluate_chain(
    trees: &[AdaptionTree],
    snapshot: &ContextSnapshot,
) -> Result<ActionSet, EvalError> {
    let mut ordered: Vec<&AdaptionTree> = trees.iter().collect();
    ordered.sort_by_key(|t| t.priority);

    let mut produced = ActionSet::new();
    for tree in ordered {
        if let Some(guard) = &tree.guard {
            if produced.get(guard.feature.as_str()) != Some(&guard.value) {
                continue;
            }
        }
        for (feature, value) in evaluate(tree, snapshot)?.iter() {
            if let Some(existing) = produced.get(feature.as_str()) {
                return Err(ModelError::ConflictingAssignment {
                    feature: feature.clone(),
                    left: existing.to_string(),
                    right: value.to_string(),
                }
                .into());
            }
            produced.insert(feature.clone(), value.clone());
        }
    }
    Ok(produced)
}
