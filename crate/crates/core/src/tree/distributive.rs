use std::collections::BTreeSet;

use thiserror::Error;

use super::eval::evaluate_leaf;
use super::regions::regions;
use super::table::{advance, TableError};
use super::{AdaptionTree, DEFAULT_ROW_LIMIT};
use crate::model::{
    validate_partition, ActionTemplate, ContextSchema, ContextSnapshot, ContextVariable, Feature,
    FeatureSet, ModelError, PartitionCheck,
};

/// `A(C, F)`: a tree together with the context it reads and the feature
/// set it is allowed to assign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaptionFunction {
    pub context: BTreeSet<String>,
    pub features: FeatureSet,
    pub body: AdaptionTree,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistributiveError {
    #[error("tree `{tree}` assigns `{feature}` outside its feature set")]
    FeatureOutsideSet { tree: String, feature: Feature },
    #[error("tree `{0}` assigns no features")]
    NoFeatures(String),
    #[error("parts do not partition the full feature set: {0}")]
    InvalidPartition(PartitionCheck),
    #[error(transparent)]
    Table(#[from] TableError),
}

impl AdaptionFunction {
    pub fn new(features: FeatureSet, body: AdaptionTree) -> Result<Self, DistributiveError> {
        for leaf in body.leaves() {
            if let Some(f) = leaf.actions.features().find(|f| !features.contains(f.as_str())) {
                return Err(DistributiveError::FeatureOutsideSet {
                    tree: body.name.clone(),
                    feature: f.clone(),
                });
            }
        }
        let context = body
            .tested_variables()
            .into_iter()
            .chain(body.referenced_variables())
            .map(String::from)
            .collect();
        Ok(AdaptionFunction {
            context,
            features,
            body,
        })
    }

    /// Uses the features assigned by the tree's leaves as `F`.
    pub fn from_tree(body: AdaptionTree) -> Result<Self, DistributiveError> {
        let features = body
            .assigned_features()
            .ok_or_else(|| DistributiveError::NoFeatures(body.name.clone()))?;
        AdaptionFunction::new(features, body)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub snapshot: ContextSnapshot,
    /// Result of the full function, or the evaluation error.
    pub full: Result<ActionTemplate, String>,
    /// Union of the part results, or the first error / conflict.
    pub parts: Result<ActionTemplate, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistributiveOutcome {
    /// `regions` representative snapshots were compared; together they
    /// stand for `covered` snapshots of the tested variables.
    Holds { regions: u64, covered: u128 },
    Fails(Box<Counterexample>),
}

impl DistributiveOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, DistributiveOutcome::Holds { .. })
    }
}

/// Checks `A(C, f1 ∪ … ∪ fn) = A(C, f1) ∪ … ∪ A(C, fn)` on every snapshot
/// of the variables tested by any of the trees. Values that no guard of
/// any tree distinguishes are checked once through a representative.
///
/// Leaf actions are compared before `$name` references are resolved, so
/// context variables that are only copied into actions (colors, for
/// instance) do not need to be enumerated.
pub fn check_distributive(
    full: &AdaptionFunction,
    parts: &[AdaptionFunction],
    schema: &ContextSchema,
) -> Result<DistributiveOutcome, DistributiveError> {
    let part_sets: Vec<FeatureSet> = parts.iter().map(|p| p.features.clone()).collect();
    let partition = validate_partition(&full.features, &part_sets);
    if !partition.is_valid() {
        return Err(DistributiveError::InvalidPartition(partition));
    }

    let mut tested: BTreeSet<&str> = full.body.tested_variables().into_iter().collect();
    for p in parts {
        tested.extend(p.body.tested_variables());
    }
    if let Some(unknown) = tested.iter().find(|v| schema.get(v).is_none()) {
        return Err(TableError::UnknownVariable(unknown.to_string()).into());
    }
    let columns: Vec<ContextVariable> = schema
        .variables()
        .iter()
        .filter(|v| tested.contains(v.name.as_str()))
        .cloned()
        .collect();
    let trees: Vec<&AdaptionTree> = std::iter::once(&full.body).chain(parts.iter().map(|p| &p.body)).collect();
    let cells = regions(&trees, &columns);
    let combos: u128 = cells.iter().map(|c| c.len() as u128).product();
    if combos > DEFAULT_ROW_LIMIT as u128 {
        return Err(TableError::DomainTooLarge {
            rows: combos,
            limit: DEFAULT_ROW_LIMIT,
        }
        .into());
    }
    let covered: u128 = columns.iter().map(|c| c.domain.size() as u128).product();

    let sizes: Vec<u64> = cells.iter().map(|c| c.len() as u64).collect();
    let mut index = vec![0u64; columns.len()];
    let mut checked = 0u64;
    loop {
        let snapshot: ContextSnapshot = columns
            .iter()
            .zip(&index)
            .zip(&cells)
            .map(|((c, &k), runs)| (c.name.clone(), c.domain.value_at(runs[k as usize].0).expect("index in domain")))
            .collect();
        let lhs = evaluate_leaf(&full.body, &snapshot)
            .map(|c| c.actions.clone())
            .map_err(|e| e.to_string());
        let rhs = union_of_parts(parts, &snapshot);
        checked += 1;
        if lhs.is_err() || lhs != rhs {
            return Ok(DistributiveOutcome::Fails(Box::new(Counterexample {
                snapshot,
                full: lhs,
                parts: rhs,
            })));
        }
        if !advance(&mut index, &sizes) {
            break;
        }
    }
    Ok(DistributiveOutcome::Holds {
        regions: checked,
        covered,
    })
}

fn union_of_parts(parts: &[AdaptionFunction], snapshot: &ContextSnapshot) -> Result<ActionTemplate, String> {
    let mut acc = ActionTemplate::new();
    for part in parts {
        let leaf = evaluate_leaf(&part.body, snapshot).map_err(|e| e.to_string())?;
        acc = acc
            .union(&leaf.actions)
            .map_err(|e: ModelError| e.to_string())?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ActionValue, Category, ContextValue, Domain};
    use crate::tree::{Branch, Guard, Node};

    fn schema() -> ContextSchema {
        ContextSchema::new(vec![ContextVariable::new("battery_low", Category::Physical, Domain::Bool).unwrap()])
            .unwrap()
    }

    fn battery_tree(name: &str, low: &[(&str, &str)], ok: &[(&str, &str)]) -> AdaptionTree {
        let leaf = |pairs: &[(&str, &str)]| {
            Node::leaf(
                pairs
                    .iter()
                    .fold(ActionTemplate::new(), |t, (f, v)| t.literal(f, ActionValue::token(*v))),
            )
        };
        AdaptionTree::new(
            name,
            1,
            Node::cond(
                "battery_low",
                vec![
                    Branch::new(Guard::Equals(ContextValue::Bool(true)), leaf(low)),
                    Branch::new(Guard::Equals(ContextValue::Bool(false)), leaf(ok)),
                ],
            )
            .unwrap(),
        )
    }

    fn full() -> AdaptionFunction {
        AdaptionFunction::from_tree(battery_tree(
            "full",
            &[("video", "off"), ("media_sound", "mute"), ("brightness_level", "decrease")],
            &[("video", "on"), ("media_sound", "regular"), ("brightness_level", "regular")],
        ))
        .unwrap()
    }

    fn media_brightness() -> AdaptionFunction {
        AdaptionFunction::from_tree(battery_tree(
            "media_brightness",
            &[("media_sound", "mute"), ("brightness_level", "decrease")],
            &[("media_sound", "regular"), ("brightness_level", "regular")],
        ))
        .unwrap()
    }

    #[test]
    fn battery_case_a_holds() {
        let video = AdaptionFunction::from_tree(battery_tree("video", &[("video", "off")], &[("video", "on")])).unwrap();
        let out = check_distributive(&full(), &[video, media_brightness()], &schema()).unwrap();
        assert_eq!(out, DistributiveOutcome::Holds { regions: 2, covered: 2 });
    }

    #[test]
    fn mutated_leaf_gives_counterexample() {
        let video = AdaptionFunction::from_tree(battery_tree("video", &[("video", "on")], &[("video", "on")])).unwrap();
        let out = check_distributive(&full(), &[video, media_brightness()], &schema()).unwrap();
        let DistributiveOutcome::Fails(cx) = out else { panic!("expected counterexample") };
        assert_eq!(cx.snapshot.get("battery_low"), Some(&ContextValue::Bool(true)));
    }

    #[test]
    fn identity_partition_holds() {
        let f = full();
        let out = check_distributive(&f, std::slice::from_ref(&f), &schema()).unwrap();
        assert!(out.holds());
    }

    #[test]
    fn invalid_partition_is_rejected() {
        let video = AdaptionFunction::from_tree(battery_tree("video", &[("video", "off")], &[("video", "on")])).unwrap();
        assert!(matches!(
            check_distributive(&full(), &[video], &schema()),
            Err(DistributiveError::InvalidPartition(_))
        ));
    }

    #[test]
    fn feature_outside_set() {
        let set = FeatureSet::from_names(["video"]).unwrap();
        let tree = battery_tree("x", &[("video", "off"), ("media_sound", "mute")], &[("video", "on")]);
        assert!(matches!(
            AdaptionFunction::new(set, tree),
            Err(DistributiveError::FeatureOutsideSet { .. })
        ));
    }
}
