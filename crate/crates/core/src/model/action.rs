use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};

use super::{ContextSnapshot, ContextValue, Feature, FeatureSet, ModelError};

/// 24-bit RGB color, written `#RRGGBB`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
#[serde(try_from = "String")]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub const BLACK: Rgb = Rgb(0, 0, 0);
    pub const WHITE: Rgb = Rgb(0xFF, 0xFF, 0xFF);

    pub fn packed(self) -> u32 {
        (self.0 as u32) << 16 | (self.1 as u32) << 8 | self.2 as u32
    }

    pub fn from_packed(v: u32) -> Self {
        Rgb((v >> 16) as u8, (v >> 8) as u8, v as u8)
    }

    /// `black` and `white` are accepted as aliases.
    pub fn named(name: &str) -> Option<Self> {
        match name {
            "black" => Some(Rgb::BLACK),
            "white" => Some(Rgb::WHITE),
            _ => None,
        }
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02X}{:02X}{:02X}", self.0, self.1, self.2)
    }
}

impl FromStr for Rgb {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(c) = Rgb::named(s) {
            return Ok(c);
        }
        let hex = s
            .strip_prefix('#')
            .filter(|h| h.len() == 6 && h.bytes().all(|b| b.is_ascii_hexdigit()))
            .ok_or_else(|| ModelError::InvalidColor(s.to_string()))?;
        let v = u32::from_str_radix(hex, 16).map_err(|_| ModelError::InvalidColor(s.to_string()))?;
        Ok(Rgb::from_packed(v))
    }
}

impl TryFrom<String> for Rgb {
    type Error = ModelError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl Serialize for Rgb {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Value assigned to a UI feature.
///
/// `Null` is an explicit assignment ("weather icon is null"), which is not
/// the same thing as leaving a feature out of an [`ActionSet`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionValue {
    Color(Rgb),
    Token(String),
    Null,
    Text(String),
    Int(i64),
    Bool(bool),
}

impl ActionValue {
    pub fn token(t: impl Into<String>) -> Self {
        ActionValue::Token(t.into())
    }

    pub fn as_token(&self) -> Option<&str> {
        match self {
            ActionValue::Token(t) => Some(t),
            _ => None,
        }
    }
}

impl fmt::Display for ActionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionValue::Color(c) => write!(f, "{c}"),
            ActionValue::Token(t) => f.write_str(t),
            ActionValue::Null => f.write_str("null"),
            ActionValue::Text(t) => write!(f, "{t:?}"),
            ActionValue::Int(i) => write!(f, "{i}"),
            ActionValue::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl Serialize for ActionValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ActionValue::Color(c) => c.serialize(s),
            ActionValue::Token(t) | ActionValue::Text(t) => s.serialize_str(t),
            ActionValue::Null => s.serialize_none(),
            ActionValue::Int(i) => s.serialize_i64(*i),
            ActionValue::Bool(b) => s.serialize_bool(*b),
        }
    }
}

impl From<ContextValue> for ActionValue {
    fn from(v: ContextValue) -> Self {
        match v {
            ContextValue::Bool(b) => ActionValue::Bool(b),
            ContextValue::Int(i) => ActionValue::Int(i),
            ContextValue::Time(t) => ActionValue::Text(t.to_string()),
            ContextValue::Token(t) => ActionValue::Token(t),
            ContextValue::Color(c) => ActionValue::Color(c),
        }
    }
}

/// Feature → value assignments; at most one value per feature.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct ActionSet(BTreeMap<Feature, ActionValue>);

impl ActionSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, feature: &str, value: ActionValue) -> Self {
        self.insert(Feature::new(feature).expect("valid feature name"), value);
        self
    }

    pub fn insert(&mut self, feature: Feature, value: ActionValue) -> Option<ActionValue> {
        self.0.insert(feature, value)
    }

    pub fn get(&self, feature: &str) -> Option<&ActionValue> {
        self.0.get(feature)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Feature, &ActionValue)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn features(&self) -> impl Iterator<Item = &Feature> {
        self.0.keys()
    }

    /// Restriction of this action set to the features in `set`.
    pub fn project(&self, set: &FeatureSet) -> ActionSet {
        ActionSet(
            self.0
                .iter()
                .filter(|(f, _)| set.contains(f.as_str()))
                .map(|(f, v)| (f.clone(), v.clone()))
                .collect(),
        )
    }

    /// One `feature=value` line per assignment, sorted by feature.
    pub fn to_lines(&self) -> String {
        self.0.iter().map(|(f, v)| format!("{f}={v}\n")).collect()
    }
}

impl FromIterator<(Feature, ActionValue)> for ActionSet {
    fn from_iter<T: IntoIterator<Item = (Feature, ActionValue)>>(iter: T) -> Self {
        ActionSet(iter.into_iter().collect())
    }
}

impl fmt::Display for ActionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_assignments(f, self.0.iter())
    }
}

/// Right-hand side of an assignment in a conclusion: a literal, or a copy
/// of a context value taken at evaluation time (`$font_color_pref`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValueExpr {
    Literal(ActionValue),
    Context(String),
}

impl fmt::Display for ValueExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueExpr::Literal(v) => write!(f, "{v}"),
            ValueExpr::Context(name) => write!(f, "${name}"),
        }
    }
}

/// The unresolved form of an action set, as stored in conclusion nodes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ActionTemplate(BTreeMap<Feature, ValueExpr>);

impl ActionTemplate {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn literal(mut self, feature: &str, value: ActionValue) -> Self {
        self.0.insert(
            Feature::new(feature).expect("valid feature name"),
            ValueExpr::Literal(value),
        );
        self
    }

    pub fn context(mut self, feature: &str, variable: &str) -> Self {
        self.0.insert(
            Feature::new(feature).expect("valid feature name"),
            ValueExpr::Context(variable.to_string()),
        );
        self
    }

    pub fn insert(&mut self, feature: Feature, value: ValueExpr) -> Option<ValueExpr> {
        self.0.insert(feature, value)
    }

    pub fn get(&self, feature: &str) -> Option<&ValueExpr> {
        self.0.get(feature)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Feature, &ValueExpr)> {
        self.0.iter()
    }

    pub fn features(&self) -> impl Iterator<Item = &Feature> {
        self.0.keys()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Context variables read by `$name` references.
    pub fn referenced_variables(&self) -> impl Iterator<Item = &str> {
        self.0.values().filter_map(|v| match v {
            ValueExpr::Context(name) => Some(name.as_str()),
            ValueExpr::Literal(_) => None,
        })
    }

    pub fn project(&self, set: &FeatureSet) -> ActionTemplate {
        ActionTemplate(
            self.0
                .iter()
                .filter(|(f, _)| set.contains(f.as_str()))
                .map(|(f, v)| (f.clone(), v.clone()))
                .collect(),
        )
    }

    /// Substitutes context references. Fails with the name of the first
    /// referenced variable missing from `snapshot`.
    pub fn resolve(&self, snapshot: &ContextSnapshot) -> Result<ActionSet, String> {
        self.0
            .iter()
            .map(|(f, expr)| {
                let value = match expr {
                    ValueExpr::Literal(v) => v.clone(),
                    ValueExpr::Context(name) => snapshot
                        .get(name)
                        .cloned()
                        .map(ActionValue::from)
                        .ok_or_else(|| name.clone())?,
                };
                Ok((f.clone(), value))
            })
            .collect()
    }

    pub fn union(&self, other: &ActionTemplate) -> Result<ActionTemplate, ModelError> {
        union_maps(&self.0, &other.0).map(ActionTemplate)
    }
}

impl FromIterator<(Feature, ValueExpr)> for ActionTemplate {
    fn from_iter<T: IntoIterator<Item = (Feature, ValueExpr)>>(iter: T) -> Self {
        ActionTemplate(iter.into_iter().collect())
    }
}

impl From<ActionSet> for ActionTemplate {
    fn from(set: ActionSet) -> Self {
        set.0
            .into_iter()
            .map(|(f, v)| (f, ValueExpr::Literal(v)))
            .collect()
    }
}

impl fmt::Display for ActionTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_assignments(f, self.0.iter())
    }
}

fn write_assignments<'a, V: fmt::Display + 'a>(
    f: &mut fmt::Formatter<'_>,
    items: impl Iterator<Item = (&'a Feature, &'a V)>,
) -> fmt::Result {
    f.write_str("{")?;
    for (i, (k, v)) in items.enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{k}: {v}")?;
    }
    f.write_str("}")
}

fn union_maps<V: Clone + PartialEq + fmt::Display>(
    a: &BTreeMap<Feature, V>,
    b: &BTreeMap<Feature, V>,
) -> Result<BTreeMap<Feature, V>, ModelError> {
    let mut out = a.clone();
    for (feature, value) in b {
        match out.get(feature) {
            Some(existing) if existing != value => {
                return Err(ModelError::ConflictingAssignment {
                    feature: feature.clone(),
                    left: existing.to_string(),
                    right: value.to_string(),
                })
            }
            Some(_) => {}
            None => {
                out.insert(feature.clone(), value.clone());
            }
        }
    }
    Ok(out)
}

/// Union of two action sets. Assigning the same value twice is fine;
/// assigning two different values to one feature is a conflict.
pub fn union_actions(a: &ActionSet, b: &ActionSet) -> Result<ActionSet, ModelError> {
    union_maps(&a.0, &b.0).map(ActionSet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tok(t: &str) -> ActionValue {
        ActionValue::token(t)
    }

    #[test]
    fn union_disjoint_keys() {
        let a = ActionSet::new().with("font_color", ActionValue::Color(Rgb::BLACK));
        let b = ActionSet::new().with("background_color", ActionValue::Color(Rgb::WHITE));
        let u = union_actions(&a, &b).unwrap();
        assert_eq!(u.len(), 2);
        assert_eq!(u.get("font_color"), Some(&ActionValue::Color(Rgb::BLACK)));
        assert_eq!(u.get("background_color"), Some(&ActionValue::Color(Rgb::WHITE)));
    }

    #[test]
    fn union_identity() {
        let a = ActionSet::new().with("font_color", ActionValue::Color(Rgb::BLACK));
        assert_eq!(union_actions(&a, &ActionSet::new()).unwrap(), a);
    }

    #[test]
    fn union_conflict() {
        let a = ActionSet::new().with("video", tok("off"));
        let b = ActionSet::new().with("video", tok("on"));
        assert!(matches!(
            union_actions(&a, &b),
            Err(ModelError::ConflictingAssignment { .. })
        ));
    }

    #[test]
    fn null_is_not_absent() {
        let with_null = ActionSet::new().with("weather_icon", ActionValue::Null);
        assert_ne!(with_null, ActionSet::new());
        assert_eq!(with_null.get("weather_icon"), Some(&ActionValue::Null));
        assert_eq!(ActionSet::new().get("weather_icon"), None);
    }

    #[test]
    fn colors() {
        assert_eq!("black".parse::<Rgb>().unwrap(), Rgb(0, 0, 0));
        assert_eq!("white".parse::<Rgb>().unwrap().to_string(), "#FFFFFF");
        assert_eq!("#1a2B3c".parse::<Rgb>().unwrap(), Rgb(0x1A, 0x2B, 0x3C));
        for bad in ["#12345", "123456", "#GGGGGG", "#1234567", "red"] {
            assert!(bad.parse::<Rgb>().is_err(), "{bad}");
        }
    }

    #[test]
    fn template_resolution() {
        let template = ActionTemplate::new()
            .literal("theme", tok("preferred_color"))
            .context("font_color", "font_color_pref");
        let snap = ContextSnapshot::new()
            .with("font_color_pref", ContextValue::Color(Rgb(1, 2, 3)));
        let set = template.resolve(&snap).unwrap();
        assert_eq!(set.get("font_color"), Some(&ActionValue::Color(Rgb(1, 2, 3))));
        assert_eq!(template.resolve(&ContextSnapshot::new()), Err("font_color_pref".into()));
    }

    fn arb_action_set() -> impl Strategy<Value = ActionSet> {
        proptest::collection::btree_map("[a-e]", 0u8..3, 0..5).prop_map(|m| {
            m.into_iter()
                .map(|(k, v)| (Feature::new(k).unwrap(), ActionValue::Int(v as i64)))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn union_commutative_and_associative(a in arb_action_set(), b in arb_action_set(), c in arb_action_set()) {
            let ab = union_actions(&a, &b);
            let ba = union_actions(&b, &a);
            prop_assert_eq!(ab.is_ok(), ba.is_ok());
            if let (Ok(ab), Ok(ba)) = (&ab, &ba) {
                prop_assert_eq!(ab, ba);
                if let Ok(abc) = union_actions(ab, &c) {
                    let bc = union_actions(&b, &c).unwrap();
                    prop_assert_eq!(union_actions(&a, &bc).unwrap(), abc);
                }
            }
            prop_assert_eq!(union_actions(&a, &ActionSet::new()).unwrap(), a.clone());
            prop_assert_eq!(union_actions(&ActionSet::new(), &a).unwrap(), a);
        }
    }
}
