//! The `.atree` rule format.
//!
//! ```text
//! context first_time: bool logical
//! context last_unit_accuracy: int[0, 100]
//! feature theme
//!
//! tree theme priority 1 {
//!   cond first_time {
//!     case true -> action { theme = default }
//!     case false -> cond last_unit_accuracy {
//!       case [0,60] -> action { theme = default }
//!       case (60,90) -> action { theme = preferred_color }
//!       case [90,100] -> action { theme = weather_time }
//!     }
//!   }
//! }
//! ```
//!
//! Besides the core grammar, a context declaration may end with `physical`
//! or `logical` (default), `color` is accepted as a domain, conclusion
//! values may copy a context value with `$name`, and `"..."` is a text
//! literal.

mod lexer;
mod parser;
mod serialize;

use std::collections::BTreeMap;
use std::fmt;

pub use parser::{parse, parse_with_source_map};
pub use serialize::serialize;

use crate::model::{ContextSchema, Feature, FeatureSet};
use crate::tree::{validate_tree, AdaptionTree, NodePath, Severity, TreeDiagnostic};

/// Position in source text: 1-based line and column (in characters),
/// byte offset and byte length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Span {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticCode {
    Lexical,
    Syntax,
    UndeclaredIdentifier,
    TypeMismatch,
    DuplicateName,
    InvalidStructure,
    /// Semantic findings of the tree validator.
    Validation(&'static str),
}

impl DiagnosticCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiagnosticCode::Lexical => "lexical-error",
            DiagnosticCode::Syntax => "syntax-error",
            DiagnosticCode::UndeclaredIdentifier => "undeclared-identifier",
            DiagnosticCode::TypeMismatch => "type-mismatch",
            DiagnosticCode::DuplicateName => "duplicate-name",
            DiagnosticCode::InvalidStructure => "invalid-structure",
            DiagnosticCode::Validation(code) => code,
        }
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagnosticCode,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub(crate) fn error(code: DiagnosticCode, message: impl Into<String>, span: Span) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            span,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {} [{}]",
            self.span.line, self.span.column, self.severity, self.message, self.code
        )
    }
}

/// A parsed rule file: context schema, declared features and trees, in
/// declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleDocument {
    pub schema: ContextSchema,
    pub features: Vec<Feature>,
    pub trees: Vec<AdaptionTree>,
}

impl RuleDocument {
    pub fn tree(&self, name: &str) -> Option<&AdaptionTree> {
        self.trees.iter().find(|t| t.name == name)
    }

    pub fn feature_set(&self) -> Option<FeatureSet> {
        FeatureSet::new(self.features.iter().cloned()).ok()
    }

    /// Runs the tree validator over every tree and places findings at the
    /// offending node or guard when a source map is available.
    pub fn validate(&self, source_map: Option<&SourceMap>) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for tree in &self.trees {
            for d in validate_tree(tree, &self.schema) {
                let span = source_map.map(|m| m.locate(&d)).unwrap_or_default();
                out.push(Diagnostic {
                    severity: d.severity,
                    code: DiagnosticCode::Validation(d.kind.code()),
                    message: format!("tree `{}`: {}", d.tree, d.message),
                    span,
                });
            }
            if let Some(guard) = &tree.guard {
                let earlier = self
                    .trees
                    .iter()
                    .filter(|t| t.priority < tree.priority)
                    .filter_map(|t| t.assigned_features())
                    .any(|fs| fs.contains(guard.feature.as_str()));
                if !earlier {
                    let span = source_map
                        .and_then(|m| m.trees.get(&tree.name))
                        .map(|t| t.name)
                        .unwrap_or_default();
                    out.push(Diagnostic {
                        severity: Severity::Warning,
                        code: DiagnosticCode::Validation("guard-never-satisfied"),
                        message: format!(
                            "tree `{}` is guarded on `{}` but no higher-priority tree assigns it",
                            tree.name, guard.feature
                        ),
                        span,
                    });
                }
            }
        }
        out
    }
}

/// Source locations of tree elements, kept apart from the document so
/// that structural equality ignores formatting.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceMap {
    pub trees: BTreeMap<String, TreeSpans>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TreeSpans {
    pub name: Span,
    pub nodes: BTreeMap<NodePath, Span>,
    /// Guard of branch `i` of the condition at a path.
    pub guards: BTreeMap<(NodePath, usize), Span>,
}

impl SourceMap {
    pub fn locate(&self, d: &TreeDiagnostic) -> Span {
        let Some(tree) = self.trees.get(&d.tree) else {
            return Span::default();
        };
        d.branch
            .and_then(|b| tree.guards.get(&(d.path.clone(), b)))
            .or_else(|| tree.nodes.get(&d.path))
            .copied()
            .unwrap_or(tree.name)
    }
}
