use std::fmt::Write as _;

use super::RuleDocument;
use crate::model::{ActionTemplate, ActionValue, Category, ValueExpr};
use crate::tree::{Guard, Node};

const INDENT: &str = "  ";

/// Writes a document in canonical form. Parsing the output yields an equal
/// document, and serializing that again yields identical text.
pub fn serialize(doc: &RuleDocument) -> String {
    let mut out = String::new();
    for var in doc.schema.variables() {
        let category = match var.category {
            Category::Physical => "physical",
            Category::Logical => "logical",
        };
        writeln!(out, "context {}: {} {category}", var.name, var.domain).unwrap();
    }
    if !doc.features.is_empty() {
        if !out.is_empty() {
            out.push('\n');
        }
        for f in &doc.features {
            writeln!(out, "feature {f}").unwrap();
        }
    }
    for tree in &doc.trees {
        if !out.is_empty() {
            out.push('\n');
        }
        write!(out, "tree {} priority {}", tree.name, tree.priority).unwrap();
        if let Some(g) = &tree.guard {
            write!(out, " when {} = {}", g.feature, value(&g.value)).unwrap();
        }
        out.push_str(" {\n");
        out.push_str(INDENT);
        node(&mut out, &tree.root, 1);
        out.push_str("}\n");
    }
    out
}

/// Writes `n` starting at the current position and ends with a newline.
fn node(out: &mut String, n: &Node, depth: usize) {
    match n {
        Node::Conclusion(c) => action(out, &c.actions, depth),
        Node::Condition(c) => {
            writeln!(out, "cond {} {{", c.variable()).unwrap();
            for b in c.branches() {
                push_indent(out, depth + 1);
                match &b.guard {
                    Guard::Default => out.push_str("default -> "),
                    g => write!(out, "case {g} -> ").unwrap(),
                }
                node(out, &b.child, depth + 1);
            }
            push_indent(out, depth);
            out.push_str("}\n");
        }
    }
}

fn action(out: &mut String, actions: &ActionTemplate, depth: usize) {
    let items: Vec<String> = actions
        .iter()
        .map(|(f, v)| match v {
            ValueExpr::Literal(v) => format!("{f} = {}", value(v)),
            ValueExpr::Context(name) => format!("{f} = ${name}"),
        })
        .collect();
    if items.is_empty() {
        out.push_str("action { }\n");
    } else if items.len() <= 2 {
        writeln!(out, "action {{ {} }}", items.join(", ")).unwrap();
    } else {
        out.push_str("action {\n");
        for (i, item) in items.iter().enumerate() {
            push_indent(out, depth + 1);
            out.push_str(item);
            out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
        }
        push_indent(out, depth);
        out.push_str("}\n");
    }
}

fn value(v: &ActionValue) -> String {
    match v {
        ActionValue::Text(t) => {
            let mut s = String::with_capacity(t.len() + 2);
            s.push('"');
            for c in t.chars() {
                match c {
                    '"' => s.push_str("\\\""),
                    '\\' => s.push_str("\\\\"),
                    '\n' => s.push_str("\\n"),
                    c => s.push(c),
                }
            }
            s.push('"');
            s
        }
        other => other.to_string(),
    }
}

fn push_indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
}
