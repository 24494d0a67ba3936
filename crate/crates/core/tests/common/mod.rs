//! Shared test support: random trees and rule documents, brute-force
//! enumeration, and independent oracles for the game and the bundled rules.
#![allow(dead_code)]

use adaptree_core::model::{ActionTemplate, ActionValue, Category, ContextSchema, ContextSnapshot, ContextValue, ContextVariable, Domain, TimeOfDay};
use adaptree_core::tree::{AdaptionTree, Branch, Guard, Interval, Node, TimeWindow};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn small_schema(with_time: bool) -> ContextSchema {
    let mut vars = vec![
        ContextVariable::new("b", Category::Physical, Domain::Bool).unwrap(),
        ContextVariable::new("e", Category::Logical, Domain::enumeration(["red", "green", "blue"]).unwrap()).unwrap(),
        ContextVariable::new("i", Category::Logical, Domain::int(-3, 9).unwrap()).unwrap(),
    ];
    if with_time {
        vars.push(ContextVariable::new("t", Category::Physical, Domain::Time).unwrap());
    }
    ContextSchema::new(vars).unwrap()
}

pub const FEATURES: [&str; 3] = ["f", "g", "h"];

fn random_leaf<R: Rng>(rng: &mut R, features: &[&str]) -> Node {
    let mut t = ActionTemplate::new();
    for f in features {
        if rng.random_bool(0.8) || t.is_empty() {
            let v = match rng.random_range(0..4) {
                0 => ActionValue::Null,
                1 => ActionValue::Int(rng.random_range(-5..5)),
                2 => ActionValue::Color(adaptree_core::Rgb(rng.random(), 0, 0)),
                _ => ActionValue::token(["x", "y", "z"][rng.random_range(0..3)]),
            };
            t = t.literal(f, v);
        }
    }
    Node::leaf(t)
}

/// Guards that partition the domain exactly (the last piece may be a
/// default branch).
fn partition_guards<R: Rng>(rng: &mut R, domain: &Domain) -> Vec<Guard> {
    let mut guards = match domain {
        Domain::Bool => vec![Guard::Equals(ContextValue::Bool(true)), Guard::Equals(ContextValue::Bool(false))],
        Domain::Enum(values) => {
            let mut vs = values.clone();
            vs.shuffle(rng);
            vs.into_iter().map(|v| Guard::Equals(ContextValue::Token(v))).collect()
        }
        Domain::Int { lo, hi } => {
            let pieces = rng.random_range(2..=4usize);
            let mut cuts: Vec<i64> = (0..pieces - 1).map(|_| rng.random_range(*lo + 1..=*hi)).collect();
            cuts.sort();
            cuts.dedup();
            let mut bounds = vec![*lo];
            bounds.extend(cuts);
            bounds.push(*hi + 1);
            bounds
                .windows(2)
                .map(|w| {
                    let (a, b) = (w[0], w[1] - 1);
                    // Same integer set, written with random endpoint styles.
                    let (lo, lo_inc) = if rng.random_bool(0.5) { (a, true) } else { (a - 1, false) };
                    let (hi, hi_inc) = if rng.random_bool(0.5) { (b, true) } else { (b + 1, false) };
                    Guard::Interval(Interval::new(lo, hi, lo_inc, hi_inc).unwrap())
                })
                .collect()
        }
        Domain::Time => {
            let pieces = rng.random_range(2..=3usize);
            let mut cuts: Vec<u16> = (0..pieces).map(|_| rng.random_range(0..1440)).collect();
            cuts.sort();
            cuts.dedup();
            if cuts.len() < 2 {
                cuts.push((cuts[0] + 720) % 1440);
                cuts.sort();
            }
            let t = |m: u16| TimeOfDay::from_minutes(m).unwrap();
            (0..cuts.len())
                .map(|k| {
                    let start = cuts[k];
                    let end = cuts[(k + 1) % cuts.len()];
                    Guard::Window(TimeWindow::new(t(start), t(end)).unwrap())
                })
                .collect()
        }
        Domain::Color => vec![Guard::Equals(ContextValue::Color(adaptree_core::Rgb::BLACK)), Guard::Default],
    };
    if guards.len() > 2 && rng.random_bool(0.3) {
        guards.pop();
        guards.push(Guard::Default);
    }
    guards
}

/// Arbitrary, possibly overlapping or incomplete guards.
fn loose_guards<R: Rng>(rng: &mut R, domain: &Domain) -> Vec<Guard> {
    let n = rng.random_range(2..=3);
    let mut guards: Vec<Guard> = (0..n)
        .map(|_| match domain {
            Domain::Bool => Guard::Equals(ContextValue::Bool(rng.random())),
            Domain::Enum(values) => Guard::Equals(ContextValue::Token(values[rng.random_range(0..values.len())].clone())),
            Domain::Int { lo, hi } => {
                let a = rng.random_range(*lo - 2..=*hi);
                let b = rng.random_range(a..=*hi + 2);
                Guard::Interval(Interval::closed(a, b).unwrap())
            }
            Domain::Time => {
                let a = rng.random_range(0..1440u16);
                let b = (a + rng.random_range(1..1440u16)) % 1440;
                Guard::Window(
                    TimeWindow::new(TimeOfDay::from_minutes(a).unwrap(), TimeOfDay::from_minutes(b).unwrap()).unwrap(),
                )
            }
            Domain::Color => Guard::Equals(ContextValue::Color(adaptree_core::Rgb::WHITE)),
        })
        .collect();
    if rng.random_bool(0.3) {
        guards.push(Guard::Default);
    }
    guards
}

fn random_node<R: Rng>(rng: &mut R, schema: &ContextSchema, features: &[&str], depth: usize, complete: bool) -> Node {
    if depth == 0 || rng.random_bool(0.25) {
        return random_leaf(rng, features);
    }
    let vars = schema.variables();
    let var = &vars[rng.random_range(0..vars.len())];
    let guards = if complete {
        partition_guards(rng, &var.domain)
    } else {
        loose_guards(rng, &var.domain)
    };
    let branches = guards
        .into_iter()
        .map(|g| Branch::new(g, random_node(rng, schema, features, depth - 1, complete)))
        .collect();
    Node::cond(var.name.clone(), branches).unwrap()
}

/// A random tree. With `complete`, every condition node partitions its
/// variable's domain, so the tree passes validation except for
/// unreachable-branch warnings caused by nested re-tests.
pub fn random_tree<R: Rng>(rng: &mut R, schema: &ContextSchema, name: &str, features: &[&str], complete: bool) -> AdaptionTree {
    let depth = rng.random_range(1..=4);
    AdaptionTree::new(name, 1, random_node(rng, schema, features, depth, complete))
}

/// Every snapshot over `vars`, in odometer order.
pub fn for_each_snapshot(vars: &[ContextVariable], visit: impl FnMut(&ContextSnapshot)) {
    for_each_snapshot_from(ContextSnapshot::new(), vars, visit)
}

/// Like [`for_each_snapshot`], with the variables outside `vars` taken
/// from `base`.
pub fn for_each_snapshot_from(mut snap: ContextSnapshot, vars: &[ContextVariable], mut visit: impl FnMut(&ContextSnapshot)) {
    let sizes: Vec<u64> = vars.iter().map(|v| v.domain.size()).collect();
    let mut index = vec![0u64; vars.len()];
    for (v, &i) in vars.iter().zip(&index) {
        snap.insert(v.name.clone(), v.domain.value_at(i).unwrap());
    }
    loop {
        visit(&snap);
        let mut k = vars.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            index[k] += 1;
            if index[k] < sizes[k] {
                *snap.get_mut(&vars[k].name).unwrap() = vars[k].domain.value_at(index[k]).unwrap();
                break;
            }
            index[k] = 0;
            *snap.get_mut(&vars[k].name).unwrap() = vars[k].domain.value_at(0).unwrap();
        }
    }
}

/// Schema variables tested by any of `trees`, in schema order.
pub fn tested_vars(schema: &ContextSchema, trees: &[&AdaptionTree]) -> Vec<ContextVariable> {
    schema
        .variables()
        .iter()
        .filter(|v| trees.iter().any(|t| t.tested_variables().contains(&v.name.as_str())))
        .cloned()
        .collect()
}

/// Per-level operand constraints restated as a predicate over a finished question.
/// Returns the first violated constraint.
pub fn constraint_violation(q: &adaptree_core::game::Question) -> Option<&'static str> {
    use adaptree_core::game::Operator::*;
    let within = |v: i64, lo: i64, hi: i64| lo <= v && v <= hi;
    let (lo, hi) = match (q.level.get(), q.operator) {
        (1, Add | Sub) => (0, 10),
        (1, _) => return Some("operator not available at level 1"),
        (2, Add | Sub) => (0, 50),
        (2, Mul | Div) => (0, 10),
        (3, Mul) => (-10, 10),
        (3, _) => (-100, 100),
        _ => return Some("level outside 1..=3"),
    };
    if !within(q.left, lo, hi) || !within(q.right, lo, hi) {
        return Some("operand out of range");
    }
    if q.operator == Sub && q.level.get() < 3 && q.left <= q.right {
        return Some("minuend not greater than subtrahend");
    }
    if q.operator == Div {
        if q.right == 0 {
            return Some("zero divisor");
        }
        if q.left % q.right != 0 {
            return Some("quotient not an integer");
        }
    }
    let exact = match q.operator {
        Add => q.left + q.right,
        Sub => q.left - q.right,
        Mul => q.left * q.right,
        Div => q.left / q.right,
    };
    (exact != q.answer).then_some("wrong answer")
}

/// Time period by clock reading: 06:00 through 17:00 day, 17:01 through
/// 19:00 sunset, night otherwise.
pub fn period_oracle(t: TimeOfDay) -> &'static str {
    let hm = (t.hour(), t.minute());
    if (6, 0) <= hm && hm <= (17, 0) {
        "day"
    } else if (17, 1) <= hm && hm <= (19, 0) {
        "sunset"
    } else {
        "night"
    }
}

/// The four theme rules: first use gives the default theme, otherwise the
/// last unit's accuracy band decides.
pub fn theme_oracle(first_time: bool, accuracy: i64) -> &'static str {
    if first_time || accuracy <= 60 {
        "default"
    } else if accuracy < 90 {
        "preferred_color"
    } else {
        "weather_time"
    }
}

fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,6}".prop_filter("keyword", |s| {
        !matches!(
            s.as_str(),
            "null" | "true" | "false" | "black" | "white" | "default" | "case" | "cond" | "action"
                | "context" | "feature" | "tree" | "priority" | "when" | "physical" | "logical"
        )
    })
}

#[derive(Debug, Clone)]
enum Var {
    Bool,
    Enum(Vec<String>),
    Int(i64, i64),
    Time,
    Color,
}

fn var_kind() -> impl Strategy<Value = Var> {
    prop_oneof![
        Just(Var::Bool),
        proptest::collection::btree_set(ident(), 1..4).prop_map(|s| Var::Enum(s.into_iter().collect())),
        (-50i64..50, 0i64..100).prop_map(|(lo, w)| Var::Int(lo, lo + w)),
        Just(Var::Time),
        Just(Var::Color),
    ]
}

fn guard_text(kind: &Var, seed: u32) -> String {
    match kind {
        Var::Bool => (seed % 2 == 0).to_string(),
        Var::Enum(vs) => vs[seed as usize % vs.len()].clone(),
        Var::Int(lo, hi) => {
            let a = lo + (seed as i64 % (hi - lo + 1));
            let b = a + (seed as i64 % 7);
            match seed % 3 {
                0 => format!("[{a},{b}]"),
                1 => format!("({},{b}]", a - 1),
                _ => format!("[{a},{})", b + 1),
            }
        }
        Var::Time => {
            let s = seed % 1440;
            let e = (s + 1 + seed % 600) % 1440;
            format!("{:02}:{:02}..{:02}:{:02}", s / 60, s % 60, e / 60, e % 60)
        }
        Var::Color => format!("#{:06X}", seed & 0xFF_FFFF),
    }
}

fn value_text(seed: u32, vars: &[(String, Var)]) -> String {
    match seed % 6 {
        0 => "null".into(),
        1 => format!("tok{}", seed % 5),
        2 => format!("#{:06X}", seed & 0xFF_FFFF),
        3 => format!("{}", seed as i64 - 1000),
        4 => format!("\"s{}\\\\\\\"\"", seed % 3),
        _ => format!("${}", vars[seed as usize % vars.len()].0),
    }
}

fn build_node(out: &mut String, vars: &[(String, Var)], features: &[String], seeds: &[u32], pos: &mut usize, depth: usize) {
    let mut next = || {
        *pos += 1;
        seeds[*pos % seeds.len()]
    };
    let s = next();
    if depth >= 2 || s % 3 == 0 {
        let n = (next() as usize % features.len()) + 1;
        let items: Vec<String> = features[..n]
            .iter()
            .map(|f| format!("{f} = {}", value_text(next(), vars)))
            .collect();
        out.push_str(&format!("action {{ {} }}\n", items.join(", ")));
        return;
    }
    let (name, kind) = &vars[next() as usize % vars.len()];
    out.push_str(&format!("cond {name} {{\n"));
    let g = next();
    out.push_str(&format!("case {} -> ", guard_text(kind, g)));
    build_node(out, vars, features, seeds, pos, depth + 1);
    out.push_str("default -> ");
    build_node(out, vars, features, seeds, pos, depth + 1);
    out.push_str("}\n");
}

/// Source text of a random well-formed rule document.
pub fn document() -> impl Strategy<Value = String> {
    (
        proptest::collection::btree_map(ident(), (var_kind(), any::<bool>()), 1..4),
        proptest::collection::btree_set(ident().prop_map(|s| format!("f_{s}")), 1..4),
        proptest::collection::vec(any::<u32>(), 8..40),
        1usize..4,
    )
        .prop_map(|(vars, features, seeds, trees)| {
            let vars: Vec<(String, Var, bool)> = vars.into_iter().map(|(n, (k, p))| (n, k, p)).collect();
            let features: Vec<String> = features.into_iter().collect();
            let mut out = String::new();
            for (n, k, physical) in &vars {
                let domain = match k {
                    Var::Bool => "bool".to_string(),
                    Var::Enum(vs) => format!("enum({})", vs.join(", ")),
                    Var::Int(lo, hi) => format!("int[{lo}, {hi}]"),
                    Var::Time => "time".into(),
                    Var::Color => "color".into(),
                };
                out.push_str(&format!("context {n}: {domain}{}\n", if *physical { " physical" } else { "" }));
            }
            for f in &features {
                out.push_str(&format!("feature {f}\n"));
            }
            let plain: Vec<(String, Var)> = vars.into_iter().map(|(n, k, _)| (n, k)).collect();
            let mut pos = 0;
            for t in 0..trees {
                let guard = if t > 0 { format!(" when {} = x", features[0]) } else { String::new() };
                out.push_str(&format!("tree t{t} priority {}{guard} {{\n", seeds[t] % 10));
                build_node(&mut out, &plain, &features, &seeds, &mut pos, 0);
                out.push_str("}\n");
            }
            out
        })
}
