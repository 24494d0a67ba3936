//! Python bindings: rule files, evaluation, the distributive check and the
//! game's question generator.

use std::collections::BTreeMap;

use adaptree_core::dsl::{parse_with_source_map, RuleDocument};
use adaptree_core::game::{generate_question, Level};
use adaptree_core::simulation::{simulate as run_simulation, to_csv, SimulationConfig};
use adaptree_core::tree::{
    check_distributive as check, evaluate, evaluate_chain, extract_rules, to_decision_table, to_region_table,
    AdaptionFunction, AdaptionTree, DistributiveOutcome,
};
use adaptree_core::{bundled, ActionValue, ContextSnapshot};
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A parsed and validated rule file.
#[pyclass(frozen, module = "adaptree")]
struct RuleSet {
    doc: RuleDocument,
}

impl RuleSet {
    fn tree(&self, name: &str) -> PyResult<&AdaptionTree> {
        self.doc
            .tree(name)
            .ok_or_else(|| PyKeyError::new_err(format!("no tree named `{name}`")))
    }

    fn snapshot(&self, context: BTreeMap<String, String>) -> PyResult<ContextSnapshot> {
        let mut snapshot = ContextSnapshot::new();
        for (name, text) in context {
            let var = self
                .doc
                .schema
                .get(&name)
                .ok_or_else(|| PyKeyError::new_err(format!("unknown context variable `{name}`")))?;
            let value = var.domain.parse_value(&text).map_err(|e| value_error(format!("{name}: {e}")))?;
            snapshot.insert(name, value);
        }
        Ok(snapshot)
    }
}

#[pymethods]
impl RuleSet {
    /// Raises `ValueError` listing every parse or validation error.
    #[new]
    fn new(source: &str) -> PyResult<Self> {
        let (doc, map) = parse_with_source_map(source)
            .map_err(|diags| value_error(diags.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")))?;
        let errors: Vec<String> = doc
            .validate(Some(&map))
            .iter()
            .filter(|d| d.is_error())
            .map(ToString::to_string)
            .collect();
        if !errors.is_empty() {
            return Err(value_error(errors.join("\n")));
        }
        Ok(RuleSet { doc })
    }

    /// The rules driving the arithmetic game.
    #[staticmethod]
    fn game() -> Self {
        RuleSet { doc: bundled::arith_game() }
    }

    #[getter]
    fn trees(&self) -> Vec<String> {
        self.doc.trees.iter().map(|t| t.name.clone()).collect()
    }

    /// Warnings reported for an otherwise valid file.
    fn warnings(&self) -> Vec<String> {
        self.doc.validate(None).iter().map(ToString::to_string).collect()
    }

    /// Evaluates one tree, or the whole priority chain when `tree` is
    /// omitted. Context values are given as text (`true`, `42`, `18:30`,
    /// `#FFAA00`, `snowy`); `null` actions come back as `None`.
    #[pyo3(signature = (context, tree=None))]
    fn evaluate(&self, context: BTreeMap<String, String>, tree: Option<&str>) -> PyResult<BTreeMap<String, Option<String>>> {
        let snapshot = self.snapshot(context)?;
        let actions = match tree {
            Some(name) => evaluate(self.tree(name)?, &snapshot),
            None => evaluate_chain(&self.doc.trees, &snapshot),
        }
        .map_err(value_error)?;
        Ok(actions
            .iter()
            .map(|(f, v)| {
                let text = match v {
                    ActionValue::Null => None,
                    ActionValue::Token(t) | ActionValue::Text(t) => Some(t.clone()),
                    other => Some(other.to_string()),
                };
                (f.to_string(), text)
            })
            .collect())
    }

    /// One `IF … THEN …` line per root-to-leaf path.
    #[pyo3(signature = (tree=None))]
    fn rules(&self, tree: Option<&str>) -> PyResult<Vec<String>> {
        let trees = match tree {
            Some(name) => vec![self.tree(name)?],
            None => self.doc.trees.iter().collect(),
        };
        Ok(trees.into_iter().flat_map(extract_rules).map(|r| r.to_string()).collect())
    }

    /// Decision table of `tree` as CSV.
    #[pyo3(signature = (tree, compress=false, regions=false))]
    fn table(&self, tree: &str, compress: bool, regions: bool) -> PyResult<String> {
        let t = self.tree(tree)?;
        let table = if regions {
            to_region_table(t, &self.doc.schema)
        } else {
            to_decision_table(t, &self.doc.schema)
        }
        .map_err(value_error)?;
        Ok(if compress { table.compressed() } else { table }.to_csv())
    }

    fn __repr__(&self) -> String {
        format!("RuleSet(trees={:?})", self.trees())
    }
}

/// Returns `None` when the trees of `parts` together equal `tree` of
/// `full` (its only tree by default), otherwise a counterexample snapshot.
#[pyfunction]
#[pyo3(signature = (full, parts, tree=None))]
fn check_distributive(full: &RuleSet, parts: &RuleSet, tree: Option<&str>) -> PyResult<Option<BTreeMap<String, String>>> {
    let full_tree = match (tree, full.doc.trees.as_slice()) {
        (Some(name), _) => full.tree(name)?,
        (None, [only]) => only,
        (None, _) => return Err(value_error("the full rule set holds several trees; pass `tree`")),
    };
    let function = |t: &AdaptionTree| AdaptionFunction::from_tree(t.clone()).map_err(value_error);
    let parts = parts.doc.trees.iter().map(function).collect::<PyResult<Vec<_>>>()?;
    match check(&function(full_tree)?, &parts, &full.doc.schema).map_err(value_error)? {
        DistributiveOutcome::Holds { .. } => Ok(None),
        DistributiveOutcome::Fails(cx) => Ok(Some(cx.snapshot.iter().map(|(k, v)| (k.clone(), v.to_string())).collect())),
    }
}

/// A question for `level` drawn from a generator seeded with `seed`, as
/// `(left, operator, right, answer)`.
#[pyfunction]
fn question(level: i64, seed: u64) -> PyResult<(i64, char, i64, i64)> {
    let level = Level::new(level).map_err(value_error)?;
    let q = generate_question(level, &mut ChaCha8Rng::seed_from_u64(seed));
    Ok((q.left, q.operator.symbol(), q.right, q.answer))
}

/// Per-unit CSV of scripted players run through the game rules.
#[pyfunction]
#[pyo3(signature = (users, seed, units=10))]
fn simulate(users: usize, seed: u64, units: usize) -> PyResult<String> {
    run_simulation(&bundled::arith_game(), SimulationConfig { users, seed, units })
        .map(|rows| to_csv(&rows))
        .map_err(value_error)
}

#[pymodule]
fn adaptree(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<RuleSet>()?;
    m.add_function(wrap_pyfunction!(check_distributive, m)?)?;
    m.add_function(wrap_pyfunction!(question, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
