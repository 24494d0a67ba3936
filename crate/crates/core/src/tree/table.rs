use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use super::eval::{evaluate_leaf, EvalError};
use super::regions::regions;
use super::AdaptionTree;
use crate::model::{
    ActionSet, ActionTemplate, ContextSchema, ContextSnapshot, ContextVariable, Domain, Feature,
};

/// Largest cross-product expanded before giving up.
pub const DEFAULT_ROW_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("domain too large: {rows} combinations exceed the limit of {limit}")]
    DomainTooLarge { rows: u128, limit: u64 },
    #[error("`{0}` is tested by the tree but not declared in the schema")]
    UnknownVariable(String),
}

/// Inclusive range of domain indices matched by one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    pub lo: u64,
    pub hi: u64,
}

impl Cell {
    fn render(&self, domain: &Domain) -> String {
        let show = |i| domain.value_at(i).map(|v| v.to_string()).unwrap_or_default();
        if self.lo == self.hi {
            show(self.lo)
        } else {
            format!("{}..={}", show(self.lo), show(self.hi))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowOutcome {
    Action(ActionTemplate),
    /// No path of the tree accepts this combination.
    Unreachable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub cells: Vec<Cell>,
    pub outcome: RowOutcome,
}

/// Exhaustive rule table over the variables a tree tests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionTable {
    pub schema: Vec<ContextVariable>,
    pub rows: Vec<TableRow>,
    /// Rows are disjoint and sorted by their cells' lower bounds, which
    /// allows binary search.
    ordered: bool,
}

pub fn to_decision_table(tree: &AdaptionTree, schema: &ContextSchema) -> Result<DecisionTable, TableError> {
    to_decision_table_with_limit(tree, schema, DEFAULT_ROW_LIMIT)
}

/// Expands `tree` into one row per combination of the tested variables'
/// domain values (in schema order). Variables the tree never tests do not
/// get a column; `$name` references stay symbolic in the row actions.
pub fn to_decision_table_with_limit(
    tree: &AdaptionTree,
    schema: &ContextSchema,
    limit: u64,
) -> Result<DecisionTable, TableError> {
    let columns = tested_columns(tree, schema)?;
    let cells = columns
        .iter()
        .map(|c| (0..c.domain.size()).map(|i| (i, i)).collect())
        .collect();
    build(tree, columns, cells, limit)
}

/// Like [`to_decision_table`], but each cell is a maximal run of values
/// that no guard of the tree distinguishes. Every combination of domain
/// values still matches exactly one row, with far fewer rows for wide
/// integer and time domains.
pub fn to_region_table(tree: &AdaptionTree, schema: &ContextSchema) -> Result<DecisionTable, TableError> {
    let columns = tested_columns(tree, schema)?;
    let cells = regions(&[tree], &columns);
    build(tree, columns, cells, DEFAULT_ROW_LIMIT)
}

fn tested_columns(tree: &AdaptionTree, schema: &ContextSchema) -> Result<Vec<ContextVariable>, TableError> {
    let tested = tree.tested_variables();
    if let Some(unknown) = tested.iter().find(|v| schema.get(v).is_none()) {
        return Err(TableError::UnknownVariable(unknown.to_string()));
    }
    Ok(schema
        .variables()
        .iter()
        .filter(|v| tested.contains(&v.name.as_str()))
        .cloned()
        .collect())
}

fn build(
    tree: &AdaptionTree,
    columns: Vec<ContextVariable>,
    cells: Vec<Vec<(u64, u64)>>,
    limit: u64,
) -> Result<DecisionTable, TableError> {
    let rows: u128 = cells.iter().map(|c| c.len() as u128).product();
    if rows > limit as u128 {
        return Err(TableError::DomainTooLarge { rows, limit });
    }
    let sizes: Vec<u64> = cells.iter().map(|c| c.len() as u64).collect();
    let mut index = vec![0u64; columns.len()];
    let mut out = Vec::with_capacity(rows as usize);
    loop {
        let snapshot: ContextSnapshot = columns
            .iter()
            .zip(&index)
            .zip(&cells)
            .map(|((c, &k), runs)| {
                let value = c.domain.value_at(runs[k as usize].0).expect("index in domain");
                (c.name.clone(), value)
            })
            .collect();
        let outcome = match evaluate_leaf(tree, &snapshot) {
            Ok(leaf) => RowOutcome::Action(leaf.actions.clone()),
            Err(_) => RowOutcome::Unreachable,
        };
        out.push(TableRow {
            cells: index
                .iter()
                .zip(&cells)
                .map(|(&k, runs)| {
                    let (lo, hi) = runs[k as usize];
                    Cell { lo, hi }
                })
                .collect(),
            outcome,
        });
        if !advance(&mut index, &sizes) {
            break;
        }
    }
    Ok(DecisionTable {
        schema: columns,
        rows: out,
        ordered: true,
    })
}

/// Odometer increment, last column fastest. Returns false after the final
/// combination.
pub(crate) fn advance(index: &mut [u64], sizes: &[u64]) -> bool {
    for k in (0..index.len()).rev() {
        index[k] += 1;
        if index[k] < sizes[k] {
            return true;
        }
        index[k] = 0;
    }
    false
}

/// Looks up the first row whose cells all contain the snapshot's values.
pub fn evaluate_table(table: &DecisionTable, snapshot: &ContextSnapshot) -> Result<ActionSet, EvalError> {
    let mut indices = Vec::with_capacity(table.schema.len());
    for var in &table.schema {
        let value = snapshot
            .get(&var.name)
            .ok_or_else(|| EvalError::MissingContext(var.name.clone()))?;
        match var.domain.index_of(value) {
            Some(i) => indices.push(i),
            None => return Err(EvalError::NoMatchingRow),
        }
    }
    let contains = |row: &TableRow| row.cells.iter().zip(&indices).all(|(c, &i)| c.lo <= i && i <= c.hi);
    let direct = if table.ordered {
        let pos = table
            .rows
            .partition_point(|row| row.cells.iter().map(|c| c.lo).le(indices.iter().copied()));
        pos.checked_sub(1)
            .and_then(|p| table.rows.get(p).filter(|row| contains(row)).map(|row| (p, row)))
    } else {
        None
    };
    let (pos, row) = match direct {
        Some(hit) => hit,
        None => table
            .rows
            .iter()
            .enumerate()
            .find(|(_, row)| contains(row))
            .ok_or(EvalError::NoMatchingRow)?,
    };
    match &row.outcome {
        RowOutcome::Action(template) => template.resolve(snapshot).map_err(EvalError::MissingContext),
        RowOutcome::Unreachable => Err(EvalError::UnreachableRow(pos)),
    }
}

impl DecisionTable {
    /// Merges consecutive rows that differ only in a contiguous run of the
    /// last column (integer and time columns only) and share an outcome.
    pub fn compressed(&self) -> DecisionTable {
        let mergeable = matches!(
            self.schema.last().map(|c| &c.domain),
            Some(Domain::Int { .. } | Domain::Time)
        );
        if !mergeable {
            return self.clone();
        }
        let last = self.schema.len() - 1;
        let mut rows: Vec<TableRow> = Vec::new();
        for row in &self.rows {
            if let Some(prev) = rows.last_mut() {
                if prev.outcome == row.outcome
                    && prev.cells[..last] == row.cells[..last]
                    && prev.cells[last].hi + 1 == row.cells[last].lo
                {
                    prev.cells[last].hi = row.cells[last].hi;
                    continue;
                }
            }
            rows.push(row.clone());
        }
        DecisionTable {
            schema: self.schema.clone(),
            rows,
            ordered: self.ordered,
        }
    }

    /// CSV with one column per tested variable followed by one column per
    /// assigned feature. Unreachable rows show `UNREACHABLE` in every
    /// feature column.
    pub fn to_csv(&self) -> String {
        let features: BTreeSet<&Feature> = self
            .rows
            .iter()
            .filter_map(|r| match &r.outcome {
                RowOutcome::Action(a) => Some(a.features()),
                RowOutcome::Unreachable => None,
            })
            .flatten()
            .collect();
        let mut out = String::new();
        let header: Vec<String> = self
            .schema
            .iter()
            .map(|c| c.name.clone())
            .chain(features.iter().map(|f| f.to_string()))
            .collect();
        writeln!(out, "{}", csv_line(&header)).unwrap();
        for row in &self.rows {
            let mut fields: Vec<String> = row
                .cells
                .iter()
                .zip(&self.schema)
                .map(|(cell, c)| cell.render(&c.domain))
                .collect();
            for f in &features {
                fields.push(match &row.outcome {
                    RowOutcome::Action(a) => a.get(f.as_str()).map(|v| v.to_string()).unwrap_or_default(),
                    RowOutcome::Unreachable => "UNREACHABLE".into(),
                });
            }
            writeln!(out, "{}", csv_line(&fields)).unwrap();
        }
        out
    }
}

fn csv_line(fields: &[String]) -> String {
    fields
        .iter()
        .map(|f| {
            if f.contains([',', '"', '\n']) {
                format!("\"{}\"", f.replace('"', "\"\""))
            } else {
                f.clone()
            }
        })
        .collect::<Vec<_>>()
        .join(",")
}
