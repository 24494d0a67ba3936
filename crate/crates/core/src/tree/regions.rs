use std::collections::BTreeSet;

use super::ranges::guard_set;
use super::{AdaptionTree, Node};
use crate::model::ContextVariable;

/// Splits each column's domain into maximal index runs that no guard of
/// `trees` tells apart. Every value in a run takes the same path through
/// every tree, so one representative per run stands for all of them.
pub(crate) fn regions(trees: &[&AdaptionTree], columns: &[ContextVariable]) -> Vec<Vec<(u64, u64)>> {
    columns
        .iter()
        .map(|column| {
            let size = column.domain.size();
            let mut cuts: BTreeSet<u64> = BTreeSet::from([0]);
            for tree in trees {
                tree.root.walk(&mut |node| {
                    let Node::Condition(c) = node else { return };
                    if c.variable() != column.name {
                        return;
                    }
                    for b in c.branches() {
                        let Some(set) = guard_set(&b.guard, &column.domain) else { continue };
                        for &(lo, hi) in set.ranges() {
                            cuts.insert(lo);
                            if hi + 1 < size {
                                cuts.insert(hi + 1);
                            }
                        }
                    }
                });
            }
            let starts: Vec<u64> = cuts.into_iter().filter(|&c| c < size).collect();
            starts
                .iter()
                .enumerate()
                .map(|(k, &lo)| (lo, starts.get(k + 1).map_or(size - 1, |next| next - 1)))
                .collect()
        })
        .collect()
}
