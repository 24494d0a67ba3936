use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use super::{is_identifier, ModelError, Rgb};

pub const MINUTES_PER_DAY: u16 = 24 * 60;

/// Time of day at minute granularity, `00:00` through `23:59`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(try_from = "String")]
pub struct TimeOfDay(u16);

impl TimeOfDay {
    pub fn new(hour: u8, minute: u8) -> Result<Self, ModelError> {
        if hour < 24 && minute < 60 {
            Ok(TimeOfDay(hour as u16 * 60 + minute as u16))
        } else {
            Err(ModelError::InvalidTime(format!("{hour:02}:{minute:02}")))
        }
    }

    pub fn from_minutes(minutes: u16) -> Result<Self, ModelError> {
        if minutes < MINUTES_PER_DAY {
            Ok(TimeOfDay(minutes))
        } else {
            Err(ModelError::InvalidTime(format!("minute {minutes}")))
        }
    }

    pub fn minutes(self) -> u16 {
        self.0
    }

    pub fn hour(self) -> u8 {
        (self.0 / 60) as u8
    }

    pub fn minute(self) -> u8 {
        (self.0 % 60) as u8
    }

    /// Every minute of the day in order.
    pub fn all() -> impl Iterator<Item = TimeOfDay> {
        (0..MINUTES_PER_DAY).map(TimeOfDay)
    }
}

impl fmt::Display for TimeOfDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.hour(), self.minute())
    }
}

impl FromStr for TimeOfDay {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::InvalidTime(s.to_string());
        let (h, m) = s.split_once(':').ok_or_else(bad)?;
        if h.is_empty() || h.len() > 2 || m.len() != 2 {
            return Err(bad());
        }
        if !h.bytes().chain(m.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        TimeOfDay::new(h.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?)
            .map_err(|_| bad())
    }
}

impl TryFrom<String> for TimeOfDay {
    type Error = ModelError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl Serialize for TimeOfDay {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    /// Sensed by the device: clock, weather, orientation.
    Physical,
    /// Profile, performance and preferences.
    #[default]
    Logical,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Physical => "physical",
            Category::Logical => "logical",
        })
    }
}

/// The set of values a context variable may take.
///
/// Every domain is mapped onto a dense index space `0..size()`, which the
/// validator and the table expander use for interval arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Domain {
    Bool,
    Enum(Vec<String>),
    Int { lo: i64, hi: i64 },
    Time,
    Color,
}

impl Domain {
    pub fn enumeration<I, S>(values: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let values: Vec<String> = values.into_iter().map(Into::into).collect();
        if values.is_empty() {
            return Err(ModelError::InvalidDomain("enum needs at least one value".into()));
        }
        for (i, v) in values.iter().enumerate() {
            if !is_identifier(v) {
                return Err(ModelError::InvalidIdentifier(v.clone()));
            }
            if values[..i].contains(v) {
                return Err(ModelError::InvalidDomain(format!("duplicate enum value `{v}`")));
            }
        }
        Ok(Domain::Enum(values))
    }

    pub fn int(lo: i64, hi: i64) -> Result<Self, ModelError> {
        if lo > hi {
            return Err(ModelError::InvalidDomain(format!("empty range [{lo}, {hi}]")));
        }
        Ok(Domain::Int { lo, hi })
    }

    pub fn size(&self) -> u64 {
        match self {
            Domain::Bool => 2,
            Domain::Enum(values) => values.len() as u64,
            Domain::Int { lo, hi } => (*hi as i128 - *lo as i128 + 1) as u64,
            Domain::Time => MINUTES_PER_DAY as u64,
            Domain::Color => 1 << 24,
        }
    }

    pub fn contains(&self, value: &ContextValue) -> bool {
        self.index_of(value).is_some()
    }

    pub fn index_of(&self, value: &ContextValue) -> Option<u64> {
        match (self, value) {
            (Domain::Bool, ContextValue::Bool(b)) => Some(*b as u64),
            (Domain::Enum(values), ContextValue::Token(t)) => {
                values.iter().position(|v| v == t).map(|i| i as u64)
            }
            (Domain::Int { lo, hi }, ContextValue::Int(v)) if lo <= v && v <= hi => {
                Some((*v as i128 - *lo as i128) as u64)
            }
            (Domain::Time, ContextValue::Time(t)) => Some(t.minutes() as u64),
            (Domain::Color, ContextValue::Color(c)) => Some(c.packed() as u64),
            _ => None,
        }
    }

    /// Inverse of [`Domain::index_of`]; `None` when `index >= size()`.
    pub fn value_at(&self, index: u64) -> Option<ContextValue> {
        if index >= self.size() {
            return None;
        }
        Some(match self {
            Domain::Bool => ContextValue::Bool(index == 1),
            Domain::Enum(values) => ContextValue::Token(values[index as usize].clone()),
            Domain::Int { lo, .. } => ContextValue::Int((*lo as i128 + index as i128) as i64),
            Domain::Time => ContextValue::Time(TimeOfDay(index as u16)),
            Domain::Color => ContextValue::Color(Rgb::from_packed(index as u32)),
        })
    }

    /// Parses the textual form of a value of this domain (`true`, `42`,
    /// `18:30`, `snowy`, `#FF0000`).
    pub fn parse_value(&self, text: &str) -> Result<ContextValue, String> {
        let text = text.trim();
        let value = match self {
            Domain::Bool => match text {
                "true" => ContextValue::Bool(true),
                "false" => ContextValue::Bool(false),
                _ => return Err(format!("expected true or false, found `{text}`")),
            },
            Domain::Enum(_) => ContextValue::Token(text.to_string()),
            Domain::Int { .. } => ContextValue::Int(
                text.parse()
                    .map_err(|_| format!("expected an integer, found `{text}`"))?,
            ),
            Domain::Time => ContextValue::Time(text.parse().map_err(|e| format!("{e}"))?),
            Domain::Color => ContextValue::Color(text.parse().map_err(|e| format!("{e}"))?),
        };
        if self.contains(&value) {
            Ok(value)
        } else {
            Err(format!("`{text}` is outside the domain {self}"))
        }
    }

    pub fn is_finite_enumerable(&self, limit: u64) -> bool {
        self.size() <= limit
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Bool => f.write_str("bool"),
            Domain::Enum(values) => write!(f, "enum({})", values.join(", ")),
            Domain::Int { lo, hi } => write!(f, "int[{lo}, {hi}]"),
            Domain::Time => f.write_str("time"),
            Domain::Color => f.write_str("color"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContextVariable {
    pub name: String,
    pub category: Category,
    pub domain: Domain,
}

impl ContextVariable {
    pub fn new(name: impl Into<String>, category: Category, domain: Domain) -> Result<Self, ModelError> {
        let name = name.into();
        if !is_identifier(&name) {
            return Err(ModelError::InvalidIdentifier(name));
        }
        Ok(ContextVariable {
            name,
            category,
            domain,
        })
    }
}

/// A concrete context value as found in a snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ContextValue {
    Bool(bool),
    Int(i64),
    Time(TimeOfDay),
    Token(String),
    Color(Rgb),
}

impl fmt::Display for ContextValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextValue::Bool(b) => write!(f, "{b}"),
            ContextValue::Int(i) => write!(f, "{i}"),
            ContextValue::Time(t) => write!(f, "{t}"),
            ContextValue::Token(t) => f.write_str(t),
            ContextValue::Color(c) => write!(f, "{c}"),
        }
    }
}

impl Serialize for ContextValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ContextValue::Bool(b) => s.serialize_bool(*b),
            ContextValue::Int(i) => s.serialize_i64(*i),
            ContextValue::Time(t) => t.serialize(s),
            ContextValue::Token(t) => s.serialize_str(t),
            ContextValue::Color(c) => c.serialize(s),
        }
    }
}

/// Ordered list of declared context variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContextSchema {
    variables: Vec<ContextVariable>,
}

impl ContextSchema {
    pub fn new(variables: Vec<ContextVariable>) -> Result<Self, ModelError> {
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].iter().any(|w| w.name == v.name) {
                return Err(ModelError::InvalidDomain(format!(
                    "context variable `{}` declared twice",
                    v.name
                )));
            }
        }
        Ok(ContextSchema { variables })
    }

    pub fn get(&self, name: &str) -> Option<&ContextVariable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn variables(&self) -> &[ContextVariable] {
        &self.variables
    }

    /// Checks that every value in `snapshot` is declared and in-domain, and
    /// that every declared variable except those in `optional` is present.
    pub fn check_snapshot(&self, snapshot: &ContextSnapshot, optional: &[&str]) -> Vec<String> {
        let mut problems = Vec::new();
        for (name, value) in snapshot.iter() {
            match self.get(name) {
                None => problems.push(format!("`{name}` is not a declared context variable")),
                Some(var) if !var.domain.contains(value) => problems.push(format!(
                    "`{name}` = {value} is outside {}",
                    var.domain
                )),
                Some(_) => {}
            }
        }
        for var in &self.variables {
            if snapshot.get(&var.name).is_none() && !optional.contains(&var.name.as_str()) {
                problems.push(format!("`{}` is missing", var.name));
            }
        }
        problems
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct SnapshotError {
    pub line: usize,
    pub message: String,
}

/// Values of context variables at one evaluation instant.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ContextSnapshot(BTreeMap<String, ContextValue>);

impl ContextSnapshot {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, value: ContextValue) -> Self {
        self.insert(name, value);
        self
    }

    pub fn insert(&mut self, name: impl Into<String>, value: ContextValue) {
        self.0.insert(name.into(), value);
    }

    pub fn remove(&mut self, name: &str) -> Option<ContextValue> {
        self.0.remove(name)
    }

    pub fn get(&self, name: &str) -> Option<&ContextValue> {
        self.0.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut ContextValue> {
        self.0.get_mut(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &ContextValue)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses the `name=value` line format; blank lines and `#` comments
    /// are skipped. Values are typed by the schema.
    pub fn parse_kv(text: &str, schema: &ContextSchema) -> Result<Self, SnapshotError> {
        let mut snapshot = ContextSnapshot::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| SnapshotError {
                line: i + 1,
                message,
            };
            let (name, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected name=value".into()))?;
            let name = name.trim();
            let var = schema
                .get(name)
                .ok_or_else(|| err(format!("unknown context variable `{name}`")))?;
            let value = var.domain.parse_value(value).map_err(err)?;
            snapshot.insert(name, value);
        }
        Ok(snapshot)
    }

    /// Renders the snapshot back into `name=value` lines.
    pub fn to_kv(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

impl FromIterator<(String, ContextValue)> for ContextSnapshot {
    fn from_iter<T: IntoIterator<Item = (String, ContextValue)>>(iter: T) -> Self {
        ContextSnapshot(iter.into_iter().collect())
    }
}

impl fmt::Display for ContextSnapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}: {v}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_parse_and_display() {
        let t: TimeOfDay = "18:30".parse().unwrap();
        assert_eq!(t.minutes(), 18 * 60 + 30);
        assert_eq!(t.to_string(), "18:30");
        assert_eq!("6:05".parse::<TimeOfDay>().unwrap().to_string(), "06:05");
        for bad in ["24:00", "12:60", "1230", "ab:cd", "12:5", ""] {
            assert!(bad.parse::<TimeOfDay>().is_err(), "{bad}");
        }
    }

    #[test]
    fn domain_index_roundtrip() {
        let domains = [
            Domain::Bool,
            Domain::enumeration(["sunny", "rainy"]).unwrap(),
            Domain::int(-3, 4).unwrap(),
            Domain::Time,
        ];
        for d in &domains {
            for i in 0..d.size() {
                let v = d.value_at(i).unwrap();
                assert_eq!(d.index_of(&v), Some(i));
            }
            assert!(d.value_at(d.size()).is_none());
        }
        assert_eq!(Domain::Color.size(), 1 << 24);
    }

    #[test]
    fn invalid_domains() {
        assert!(Domain::int(5, 4).is_err());
        assert!(Domain::enumeration(Vec::<String>::new()).is_err());
        assert!(Domain::enumeration(["a", "a"]).is_err());
    }

    #[test]
    fn kv_snapshot_parse() {
        let schema = ContextSchema::new(vec![
            ContextVariable::new("first_time", Category::Logical, Domain::Bool).unwrap(),
            ContextVariable::new("local_time", Category::Physical, Domain::Time).unwrap(),
            ContextVariable::new("acc", Category::Logical, Domain::int(0, 100).unwrap()).unwrap(),
        ])
        .unwrap();
        let snap =
            ContextSnapshot::parse_kv("# test\nfirst_time=false\nlocal_time = 18:30\nacc=95\n", &schema)
                .unwrap();
        assert_eq!(snap.get("acc"), Some(&ContextValue::Int(95)));
        assert_eq!(snap.to_kv(), "acc=95\nfirst_time=false\nlocal_time=18:30\n");
        let err = ContextSnapshot::parse_kv("acc=101", &schema).unwrap_err();
        assert_eq!(err.line, 1);
        assert!(ContextSnapshot::parse_kv("nope=1", &schema).is_err());
        assert!(schema.check_snapshot(&snap, &[]).is_empty());
    }
}
