use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{is_identifier, ModelError};

/// A single adaptable UI feature such as `font_color` or `orientation_mode`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Feature(String);

impl Feature {
    pub fn new(name: impl Into<String>) -> Result<Self, ModelError> {
        let name = name.into();
        if is_identifier(&name) {
            Ok(Feature(name))
        } else {
            Err(ModelError::InvalidIdentifier(name))
        }
    }

    /// Turns a prose name ("Button Font Color") into its identifier form
    /// (`button_font_color`).
    pub fn normalize(prose: &str) -> Result<Self, ModelError> {
        let joined = prose
            .split(|c: char| !c.is_ascii_alphanumeric())
            .filter(|w| !w.is_empty())
            .map(|w| w.to_ascii_lowercase())
            .collect::<Vec<_>>()
            .join("_");
        Feature::new(joined)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for Feature {
    type Error = ModelError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Feature::new(value)
    }
}

impl From<Feature> for String {
    fn from(f: Feature) -> String {
        f.0
    }
}

impl std::borrow::Borrow<str> for Feature {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// A non-empty set of UI features.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureSet(BTreeSet<Feature>);

impl FeatureSet {
    pub fn new(features: impl IntoIterator<Item = Feature>) -> Result<Self, ModelError> {
        let set: BTreeSet<Feature> = features.into_iter().collect();
        if set.is_empty() {
            return Err(ModelError::EmptySet);
        }
        Ok(FeatureSet(set))
    }

    /// Builds a set from identifier strings.
    pub fn from_names<I, S>(names: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let features = names
            .into_iter()
            .map(Feature::new)
            .collect::<Result<Vec<_>, _>>()?;
        FeatureSet::new(features)
    }

    pub fn contains(&self, feature: &str) -> bool {
        self.0.contains(feature)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Feature> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn union(&self, other: &FeatureSet) -> FeatureSet {
        FeatureSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn is_disjoint(&self, other: &FeatureSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn as_set(&self) -> &BTreeSet<Feature> {
        &self.0
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, feat) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{feat}")?;
        }
        f.write_str("}")
    }
}

/// True iff no feature occurs in more than one of `sets`.
pub fn are_disjoint(sets: &[FeatureSet]) -> bool {
    let mut seen = BTreeSet::new();
    sets.iter().flat_map(|s| s.iter()).all(|f| seen.insert(f))
}

/// Outcome of [`validate_partition`]. A partition is valid when nothing is
/// missing, nothing is extra and no feature is shared between parts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartitionCheck {
    /// Features of the whole not covered by any part.
    pub missing: Vec<Feature>,
    /// Features in some part but not in the whole.
    pub extra: Vec<Feature>,
    /// Features appearing in more than one part, with the part indices.
    pub shared: Vec<(Feature, Vec<usize>)>,
}

impl PartitionCheck {
    pub fn is_valid(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty() && self.shared.is_empty()
    }
}

impl fmt::Display for PartitionCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("valid partition");
        }
        let mut parts = Vec::new();
        if !self.missing.is_empty() {
            let names: Vec<_> = self.missing.iter().map(Feature::as_str).collect();
            parts.push(format!("missing: {}", names.join(", ")));
        }
        if !self.extra.is_empty() {
            let names: Vec<_> = self.extra.iter().map(Feature::as_str).collect();
            parts.push(format!("extra: {}", names.join(", ")));
        }
        for (feat, idx) in &self.shared {
            parts.push(format!("`{feat}` shared by parts {idx:?}"));
        }
        f.write_str(&parts.join("; "))
    }
}

pub fn validate_partition(whole: &FeatureSet, parts: &[FeatureSet]) -> PartitionCheck {
    let mut owners: BTreeMap<&Feature, Vec<usize>> = BTreeMap::new();
    for (i, part) in parts.iter().enumerate() {
        for feat in part.iter() {
            owners.entry(feat).or_default().push(i);
        }
    }
    PartitionCheck {
        missing: whole
            .iter()
            .filter(|f| !owners.contains_key(f))
            .cloned()
            .collect(),
        extra: owners
            .keys()
            .filter(|f| !whole.contains(f.as_str()))
            .map(|f| (*f).clone())
            .collect(),
        shared: owners
            .into_iter()
            .filter(|(_, idx)| idx.len() > 1)
            .map(|(f, idx)| (f.clone(), idx))
            .collect(),
    }
}
