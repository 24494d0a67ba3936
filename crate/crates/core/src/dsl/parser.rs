use std::collections::{BTreeMap, HashMap};

use super::lexer::{lex, Tok, Token};
use super::{Diagnostic, DiagnosticCode, RuleDocument, SourceMap, Span, TreeSpans};
use crate::model::{
    is_identifier, ActionTemplate, ActionValue, Category, ContextSchema, ContextValue,
    ContextVariable, Domain, Feature, Rgb, TimeOfDay, ValueExpr,
};
use crate::tree::{
    AdaptionTree, Branch, ConditionNode, Guard, Interval, Node, NodePath, TimeWindow, TreeGuard,
};

#[derive(Debug, Clone)]
struct Name {
    text: String,
    span: Span,
}

#[derive(Debug, Clone)]
enum Lit {
    Ident(String),
    Int(i64),
    Color(Rgb),
    Null,
    Bool(bool),
    Str(String),
    Ref(String),
}

#[derive(Debug, Clone)]
struct LitAt {
    lit: Lit,
    span: Span,
}

#[derive(Debug)]
enum DomainAst {
    Bool,
    Enum(Vec<Name>),
    Int(i64, i64),
    Time,
    Color,
}

#[derive(Debug)]
struct ContextDecl {
    name: Name,
    domain: DomainAst,
    domain_span: Span,
    category: Category,
}

#[derive(Debug)]
enum GuardAst {
    Value(LitAt),
    Interval { lo: i64, hi: i64, lo_inc: bool, hi_inc: bool, span: Span },
    Window { start: TimeOfDay, end: TimeOfDay, span: Span },
    Default(Span),
}

impl GuardAst {
    fn span(&self) -> Span {
        match self {
            GuardAst::Value(l) => l.span,
            GuardAst::Interval { span, .. } | GuardAst::Window { span, .. } | GuardAst::Default(span) => *span,
        }
    }
}

#[derive(Debug)]
enum NodeAst {
    Cond {
        variable: Name,
        branches: Vec<(GuardAst, NodeAst)>,
        span: Span,
    },
    Action {
        assignments: Vec<(Name, LitAt)>,
        span: Span,
    },
}

#[derive(Debug)]
struct TreeDecl {
    name: Name,
    priority: i64,
    guard: Option<(Name, LitAt)>,
    root: NodeAst,
}

#[derive(Debug, Default)]
struct Ast {
    contexts: Vec<ContextDecl>,
    features: Vec<Name>,
    trees: Vec<TreeDecl>,
}

/// Parses a rule document. Either the whole document is accepted or at
/// least one error diagnostic is returned.
pub fn parse(source: &str) -> Result<RuleDocument, Vec<Diagnostic>> {
    parse_with_source_map(source).map(|(doc, _)| doc)
}

pub fn parse_with_source_map(source: &str) -> Result<(RuleDocument, SourceMap), Vec<Diagnostic>> {
    let (tokens, mut diags) = lex(source);
    let mut parser = Parser {
        tokens,
        pos: 0,
        diags: Vec::new(),
    };
    let ast = parser.document();
    diags.extend(parser.diags);
    if !diags.is_empty() {
        diags.sort_by_key(|d| d.span.offset);
        return Err(diags);
    }
    let mut resolver = Resolver::default();
    let result = resolver.document(ast);
    if resolver.diags.is_empty() {
        Ok(result)
    } else {
        resolver.diags.sort_by_key(|d| d.span.offset);
        Err(resolver.diags)
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
}

type PResult<T> = Result<T, ()>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn next(&mut self) -> Token {
        let t = self.peek().clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn fail<T>(&mut self, expected: &str) -> PResult<T> {
        let t = self.peek().clone();
        self.diags.push(Diagnostic::error(
            DiagnosticCode::Syntax,
            format!("expected {expected}, found {}", t.tok.describe()),
            t.span,
        ));
        Err(())
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> PResult<Span> {
        if self.peek().tok == tok {
            Ok(self.next().span)
        } else {
            self.fail(expected)
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<Span> {
        if self.is_keyword(kw) {
            Ok(self.next().span)
        } else {
            self.fail(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Name> {
        match self.peek().tok.clone() {
            Tok::Ident(text) => {
                let span = self.next().span;
                if !is_identifier(&text) {
                    self.diags.push(Diagnostic::error(
                        DiagnosticCode::Syntax,
                        format!("`{text}` is not a valid name: use lowercase snake_case"),
                        span,
                    ));
                }
                Ok(Name { text, span })
            }
            _ => self.fail(what),
        }
    }

    fn int(&mut self) -> PResult<i64> {
        match self.peek().tok {
            Tok::Int(v) => {
                self.next();
                Ok(v)
            }
            _ => self.fail("an integer"),
        }
    }

    fn document(&mut self) -> Ast {
        let mut ast = Ast::default();
        if self.peek().tok == Tok::Eof {
            let span = self.peek().span;
            self.diags.push(Diagnostic::error(DiagnosticCode::Syntax, "expected declaration", span));
            return ast;
        }
        while self.peek().tok != Tok::Eof {
            let ok = if self.is_keyword("context") {
                self.context_decl().map(|d| ast.contexts.push(d))
            } else if self.is_keyword("feature") {
                self.next();
                self.ident("a feature name").map(|n| ast.features.push(n))
            } else if self.is_keyword("tree") {
                self.tree_decl().map(|d| ast.trees.push(d))
            } else {
                self.fail("declaration (`context`, `feature` or `tree`)")
            };
            if ok.is_err() {
                self.recover();
            }
        }
        ast
    }

    /// Skips to the next top-level declaration keyword.
    fn recover(&mut self) {
        let mut depth = 0i32;
        loop {
            match &self.peek().tok {
                Tok::Eof => return,
                Tok::LBrace => depth += 1,
                Tok::RBrace => depth -= 1,
                Tok::Ident(s) if depth <= 0 && matches!(s.as_str(), "context" | "feature" | "tree") => return,
                _ => {}
            }
            self.next();
        }
    }

    fn context_decl(&mut self) -> PResult<ContextDecl> {
        self.keyword("context")?;
        let name = self.ident("a context variable name")?;
        self.expect(Tok::Colon, "`:`")?;
        let start = self.peek().span;
        let domain = match &self.peek().tok {
            Tok::Ident(s) if s == "bool" => {
                self.next();
                DomainAst::Bool
            }
            Tok::Ident(s) if s == "time" => {
                self.next();
                DomainAst::Time
            }
            Tok::Ident(s) if s == "color" => {
                self.next();
                DomainAst::Color
            }
            Tok::Ident(s) if s == "enum" => {
                self.next();
                self.expect(Tok::LParen, "`(`")?;
                let mut values = vec![self.ident("an enum value")?];
                while self.peek().tok == Tok::Comma {
                    self.next();
                    values.push(self.ident("an enum value")?);
                }
                self.expect(Tok::RParen, "`)`")?;
                DomainAst::Enum(values)
            }
            Tok::Ident(s) if s == "int" => {
                self.next();
                self.expect(Tok::LBracket, "`[`")?;
                let lo = self.int()?;
                self.expect(Tok::Comma, "`,`")?;
                let hi = self.int()?;
                self.expect(Tok::RBracket, "`]`")?;
                DomainAst::Int(lo, hi)
            }
            _ => return self.fail("a domain (`bool`, `enum(...)`, `int[lo, hi]`, `time` or `color`)"),
        };
        let domain_span = self.span_since(start);
        let category = if self.is_keyword("physical") {
            self.next();
            Category::Physical
        } else if self.is_keyword("logical") {
            self.next();
            Category::Logical
        } else {
            Category::Logical
        };
        Ok(ContextDecl {
            name,
            domain,
            domain_span,
            category,
        })
    }

    fn span_since(&self, start: Span) -> Span {
        let prev = &self.tokens[self.pos.saturating_sub(1)];
        Span {
            length: (prev.span.offset + prev.span.length).saturating_sub(start.offset),
            ..start
        }
    }

    fn tree_decl(&mut self) -> PResult<TreeDecl> {
        self.keyword("tree")?;
        let name = self.ident("a tree name")?;
        self.keyword("priority")?;
        let priority = self.int()?;
        let guard = if self.is_keyword("when") {
            self.next();
            let feature = self.ident("a feature name")?;
            self.expect(Tok::Eq, "`=`")?;
            let value = self.value()?;
            Some((feature, value))
        } else {
            None
        };
        self.expect(Tok::LBrace, "`{`")?;
        let root = self.node()?;
        self.expect(Tok::RBrace, "`}`")?;
        Ok(TreeDecl {
            name,
            priority,
            guard,
            root,
        })
    }

    fn node(&mut self) -> PResult<NodeAst> {
        if self.is_keyword("cond") {
            let start = self.next().span;
            let variable = self.ident("a context variable name")?;
            self.expect(Tok::LBrace, "`{`")?;
            let mut branches = Vec::new();
            loop {
                if self.is_keyword("case") {
                    self.next();
                    let guard = self.guard()?;
                    self.expect(Tok::Arrow, "`->`")?;
                    branches.push((guard, self.node()?));
                } else if self.is_keyword("default") {
                    let span = self.next().span;
                    self.expect(Tok::Arrow, "`->`")?;
                    branches.push((GuardAst::Default(span), self.node()?));
                    break;
                } else if branches.is_empty() {
                    return self.fail("`case`");
                } else {
                    break;
                }
            }
            self.expect(Tok::RBrace, "`}`")?;
            let span = Span {
                length: variable.span.offset + variable.span.length - start.offset,
                ..start
            };
            Ok(NodeAst::Cond {
                variable,
                branches,
                span,
            })
        } else if self.is_keyword("action") {
            let span = self.next().span;
            self.expect(Tok::LBrace, "`{`")?;
            let mut assignments = Vec::new();
            while self.peek().tok != Tok::RBrace {
                let feature = self.ident("a feature name")?;
                self.expect(Tok::Eq, "`=`")?;
                let value = self.value()?;
                assignments.push((feature, value));
                if self.peek().tok != Tok::Comma {
                    break;
                }
                self.next();
            }
            self.expect(Tok::RBrace, "`}`")?;
            Ok(NodeAst::Action { assignments, span })
        } else {
            self.fail("`cond` or `action`")
        }
    }

    fn guard(&mut self) -> PResult<GuardAst> {
        let start = self.peek().span;
        match self.peek().tok.clone() {
            Tok::LBracket | Tok::LParen => {
                let lo_inc = self.next().tok == Tok::LBracket;
                let lo = self.int()?;
                self.expect(Tok::Comma, "`,`")?;
                let hi = self.int()?;
                let hi_inc = match self.peek().tok {
                    Tok::RBracket => true,
                    Tok::RParen => false,
                    _ => return self.fail("`]` or `)`"),
                };
                self.next();
                Ok(GuardAst::Interval {
                    lo,
                    hi,
                    lo_inc,
                    hi_inc,
                    span: self.span_since(start),
                })
            }
            Tok::Time(start_t) => {
                self.next();
                self.expect(Tok::DotDot, "`..` in a time window")?;
                let end = match self.peek().tok {
                    Tok::Time(t) => {
                        self.next();
                        t
                    }
                    _ => return self.fail("a time (HH:MM)"),
                };
                Ok(GuardAst::Window {
                    start: start_t,
                    end,
                    span: self.span_since(start),
                })
            }
            _ => self.value().map(GuardAst::Value),
        }
    }

    fn value(&mut self) -> PResult<LitAt> {
        let token = self.peek().clone();
        let lit = match token.tok {
            Tok::Ident(s) => match s.as_str() {
                "null" => Lit::Null,
                "true" => Lit::Bool(true),
                "false" => Lit::Bool(false),
                _ => Lit::Ident(s),
            },
            Tok::Int(v) => Lit::Int(v),
            Tok::Color(c) => Lit::Color(c),
            Tok::Str(s) => Lit::Str(s),
            Tok::Ref(r) => Lit::Ref(r),
            _ => return self.fail("a value"),
        };
        self.next();
        Ok(LitAt { lit, span: token.span })
    }
}

#[derive(Default)]
struct Resolver {
    diags: Vec<Diagnostic>,
    contexts: HashMap<String, Domain>,
    features: HashMap<String, Span>,
}

impl Resolver {
    fn err(&mut self, code: DiagnosticCode, span: Span, message: String) {
        self.diags.push(Diagnostic::error(code, message, span));
    }

    fn document(&mut self, ast: Ast) -> (RuleDocument, SourceMap) {
        let mut variables = Vec::new();
        for decl in ast.contexts {
            if self.contexts.contains_key(&decl.name.text) {
                self.err(
                    DiagnosticCode::DuplicateName,
                    decl.name.span,
                    format!("context variable `{}` is declared twice", decl.name.text),
                );
                continue;
            }
            let domain = match decl.domain {
                DomainAst::Bool => Ok(Domain::Bool),
                DomainAst::Time => Ok(Domain::Time),
                DomainAst::Color => Ok(Domain::Color),
                DomainAst::Int(lo, hi) => Domain::int(lo, hi),
                DomainAst::Enum(values) => {
                    Domain::enumeration(values.iter().map(|n| n.text.clone()))
                }
            };
            match domain {
                Ok(domain) => {
                    self.contexts.insert(decl.name.text.clone(), domain.clone());
                    if let Ok(var) = ContextVariable::new(decl.name.text, decl.category, domain) {
                        variables.push(var);
                    }
                }
                Err(e) => self.err(DiagnosticCode::TypeMismatch, decl.domain_span, e.to_string()),
            }
        }
        let mut features = Vec::new();
        for name in ast.features {
            if self.features.contains_key(&name.text) {
                self.err(
                    DiagnosticCode::DuplicateName,
                    name.span,
                    format!("feature `{}` is declared twice", name.text),
                );
                continue;
            }
            self.features.insert(name.text.clone(), name.span);
            if let Ok(f) = Feature::new(name.text) {
                features.push(f);
            }
        }

        let mut trees = Vec::new();
        let mut source_map = SourceMap::default();
        let mut seen_trees: BTreeMap<String, Span> = BTreeMap::new();
        for decl in ast.trees {
            if seen_trees.contains_key(&decl.name.text) {
                self.err(
                    DiagnosticCode::DuplicateName,
                    decl.name.span,
                    format!("tree `{}` is declared twice", decl.name.text),
                );
                continue;
            }
            seen_trees.insert(decl.name.text.clone(), decl.name.span);
            let mut spans = TreeSpans {
                name: decl.name.span,
                ..TreeSpans::default()
            };
            let guard = decl.guard.and_then(|(feature, value)| self.tree_guard(feature, value));
            let root = self.node(decl.root, &NodePath::default(), &mut spans);
            if let Some(root) = root {
                trees.push(AdaptionTree {
                    name: decl.name.text.clone(),
                    priority: decl.priority,
                    guard,
                    root,
                });
            }
            source_map.trees.insert(decl.name.text, spans);
        }

        let schema = ContextSchema::new(variables).unwrap_or_default();
        (
            RuleDocument {
                schema,
                features,
                trees,
            },
            source_map,
        )
    }

    fn feature(&mut self, name: &Name) -> Option<Feature> {
        if !self.features.contains_key(&name.text) {
            self.err(
                DiagnosticCode::UndeclaredIdentifier,
                name.span,
                format!("undeclared feature `{}`", name.text),
            );
            return None;
        }
        Feature::new(name.text.clone()).ok()
    }

    fn tree_guard(&mut self, feature: Name, value: LitAt) -> Option<TreeGuard> {
        let feature = self.feature(&feature)?;
        match self.action_value(value)? {
            ValueExpr::Literal(value) => Some(TreeGuard { feature, value }),
            ValueExpr::Context(_) => None,
        }
    }

    fn action_value(&mut self, value: LitAt) -> Option<ValueExpr> {
        Some(ValueExpr::Literal(match value.lit {
            Lit::Ident(s) => match Rgb::named(&s) {
                Some(c) => ActionValue::Color(c),
                None => ActionValue::Token(s),
            },
            Lit::Int(v) => ActionValue::Int(v),
            Lit::Color(c) => ActionValue::Color(c),
            Lit::Null => ActionValue::Null,
            Lit::Bool(b) => ActionValue::Bool(b),
            Lit::Str(s) => ActionValue::Text(s),
            Lit::Ref(name) => {
                if !self.contexts.contains_key(&name) {
                    self.err(
                        DiagnosticCode::UndeclaredIdentifier,
                        value.span,
                        format!("undeclared context variable `{name}`"),
                    );
                    return None;
                }
                return Some(ValueExpr::Context(name));
            }
        }))
    }

    fn node(&mut self, node: NodeAst, path: &NodePath, spans: &mut TreeSpans) -> Option<Node> {
        match node {
            NodeAst::Action { assignments, span } => {
                spans.nodes.insert(path.clone(), span);
                let mut actions = ActionTemplate::new();
                let mut ok = true;
                for (name, value) in assignments {
                    let Some(feature) = self.feature(&name) else {
                        ok = false;
                        continue;
                    };
                    if actions.get(feature.as_str()).is_some() {
                        self.err(
                            DiagnosticCode::DuplicateName,
                            name.span,
                            format!("`{}` is assigned twice in one action", name.text),
                        );
                        ok = false;
                        continue;
                    }
                    match self.action_value(value) {
                        Some(v) => {
                            actions.insert(feature, v);
                        }
                        None => ok = false,
                    }
                }
                ok.then(|| Node::leaf(actions))
            }
            NodeAst::Cond {
                variable,
                branches,
                span,
            } => {
                spans.nodes.insert(path.clone(), span);
                let domain = self.contexts.get(&variable.text).cloned();
                if domain.is_none() {
                    self.err(
                        DiagnosticCode::UndeclaredIdentifier,
                        variable.span,
                        format!("undeclared context variable `{}`", variable.text),
                    );
                }
                let count = branches.len();
                let mut built = Vec::with_capacity(count);
                for (i, (guard, child)) in branches.into_iter().enumerate() {
                    spans.guards.insert((path.clone(), i), guard.span());
                    let guard = domain.as_ref().and_then(|d| self.guard(guard, d, &variable.text));
                    let child = self.node(child, &path.child(i), spans);
                    if let (Some(g), Some(c)) = (guard, child) {
                        built.push(Branch::new(g, c));
                    }
                }
                if built.len() != count {
                    return None;
                }
                match ConditionNode::new(variable.text, built) {
                    Ok(c) => Some(Node::Condition(c)),
                    Err(e) => {
                        self.err(DiagnosticCode::InvalidStructure, span, e.to_string());
                        None
                    }
                }
            }
        }
    }

    fn guard(&mut self, guard: GuardAst, domain: &Domain, variable: &str) -> Option<Guard> {
        let span = guard.span();
        let built = match guard {
            GuardAst::Default(_) => Ok(Guard::Default),
            GuardAst::Interval { lo, hi, lo_inc, hi_inc, .. } => Interval::new(lo, hi, lo_inc, hi_inc)
                .map(Guard::Interval)
                .map_err(|e| e.to_string()),
            GuardAst::Window { start, end, .. } => {
                TimeWindow::new(start, end).map(Guard::Window).map_err(|e| e.to_string())
            }
            GuardAst::Value(v) => match (v.lit, domain) {
                (Lit::Bool(b), Domain::Enum(_)) => Ok(Guard::Equals(ContextValue::Token(b.to_string()))),
                (Lit::Null, Domain::Enum(_)) => Ok(Guard::Equals(ContextValue::Token("null".into()))),
                (Lit::Bool(b), _) => Ok(Guard::Equals(ContextValue::Bool(b))),
                (Lit::Ident(s), Domain::Color) => match Rgb::named(&s) {
                    Some(c) => Ok(Guard::Equals(ContextValue::Color(c))),
                    None => Err(format!("`{s}` is not a color")),
                },
                (Lit::Ident(s), _) => Ok(Guard::Equals(ContextValue::Token(s))),
                (Lit::Color(c), _) => Ok(Guard::Equals(ContextValue::Color(c))),
                (Lit::Int(i), _) => Ok(Guard::Equals(ContextValue::Int(i))),
                (Lit::Null, _) => Err("`null` cannot be used as a guard".into()),
                (Lit::Str(_), _) => Err("text cannot be used as a guard".into()),
                (Lit::Ref(_), _) => Err("context references cannot be used as a guard".into()),
            },
        };
        match built.and_then(|g| g.check_domain(domain).map(|_| g)) {
            Ok(g) => Some(g),
            Err(message) => {
                self.err(DiagnosticCode::TypeMismatch, span, format!("`{variable}`: {message}"));
                None
            }
        }
    }
}
