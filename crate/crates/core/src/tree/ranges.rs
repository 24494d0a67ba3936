use std::fmt;

use super::Guard;
use crate::model::{Domain, MINUTES_PER_DAY};

const DAY: u64 = MINUTES_PER_DAY as u64;

/// Sorted, non-overlapping, non-adjacent inclusive ranges over a domain's
/// index space.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RangeSet(Vec<(u64, u64)>);

impl RangeSet {
    pub fn empty() -> Self {
        RangeSet(Vec::new())
    }

    pub fn full(size: u64) -> Self {
        if size == 0 {
            RangeSet::empty()
        } else {
            RangeSet(vec![(0, size - 1)])
        }
    }

    pub fn single(lo: u64, hi: u64) -> Self {
        RangeSet::from_ranges(vec![(lo, hi)])
    }

    pub fn from_ranges(mut ranges: Vec<(u64, u64)>) -> Self {
        ranges.retain(|(lo, hi)| lo <= hi);
        ranges.sort_unstable();
        let mut merged: Vec<(u64, u64)> = Vec::with_capacity(ranges.len());
        for (lo, hi) in ranges {
            match merged.last_mut() {
                Some(last) if lo <= last.1.saturating_add(1) => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        RangeSet(merged)
    }

    pub fn ranges(&self) -> &[(u64, u64)] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self) -> u64 {
        self.0.iter().map(|(lo, hi)| hi - lo + 1).sum()
    }

    pub fn contains(&self, i: u64) -> bool {
        self.0.iter().any(|&(lo, hi)| lo <= i && i <= hi)
    }

    pub fn union(&self, other: &RangeSet) -> RangeSet {
        RangeSet::from_ranges(self.0.iter().chain(other.0.iter()).copied().collect())
    }

    pub fn intersect(&self, other: &RangeSet) -> RangeSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a_lo, a_hi) = self.0[i];
            let (b_lo, b_hi) = other.0[j];
            let lo = a_lo.max(b_lo);
            let hi = a_hi.min(b_hi);
            if lo <= hi {
                out.push((lo, hi));
            }
            if a_hi < b_hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        RangeSet(out)
    }

    pub fn subtract(&self, other: &RangeSet) -> RangeSet {
        let mut out = Vec::new();
        for &(lo, hi) in &self.0 {
            let mut cur = lo;
            let mut open = true;
            for &(b_lo, b_hi) in &other.0 {
                if b_hi < cur || b_lo > hi {
                    continue;
                }
                if b_lo > cur {
                    out.push((cur, b_lo - 1));
                }
                if b_hi >= hi {
                    open = false;
                    break;
                }
                cur = b_hi + 1;
            }
            if open {
                out.push((cur, hi));
            }
        }
        RangeSet(out)
    }

    pub fn is_subset(&self, other: &RangeSet) -> bool {
        self.subtract(other).is_empty()
    }

    /// Renders the ranges in domain terms, e.g. `91..100` or `true`.
    pub fn describe(&self, domain: &Domain) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|&(lo, hi)| {
                let a = domain.value_at(lo).map(|v| v.to_string()).unwrap_or_default();
                if lo == hi {
                    a
                } else {
                    let b = domain.value_at(hi).map(|v| v.to_string()).unwrap_or_default();
                    match domain {
                        Domain::Enum(_) | Domain::Bool => (lo..=hi)
                            .filter_map(|i| domain.value_at(i))
                            .map(|v| v.to_string())
                            .collect::<Vec<_>>()
                            .join(", "),
                        _ => format!("{a}..{b}"),
                    }
                }
            })
            .collect();
        parts.join(", ")
    }
}

impl fmt::Display for RangeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Index set accepted by a non-default guard within `domain`. Returns
/// `None` when the guard kind does not fit the domain.
pub(crate) fn guard_set(guard: &Guard, domain: &Domain) -> Option<RangeSet> {
    guard.check_domain(domain).ok()?;
    Some(match guard {
        Guard::Equals(v) => match domain.index_of(v) {
            Some(i) => RangeSet::single(i, i),
            None => RangeSet::empty(),
        },
        Guard::Interval(iv) => {
            let Domain::Int { lo, hi } = domain else { return None };
            match iv.bounds() {
                Some((a, b)) => {
                    let a = a.max(*lo);
                    let b = b.min(*hi);
                    if a > b {
                        RangeSet::empty()
                    } else {
                        RangeSet::single((a as i128 - *lo as i128) as u64, (b as i128 - *lo as i128) as u64)
                    }
                }
                None => RangeSet::empty(),
            }
        }
        Guard::Window(w) => {
            let start = w.start.minutes() as u64;
            let end = w.end.minutes() as u64;
            if w.wraps_midnight() {
                let mut ranges = vec![(start, DAY - 1)];
                if end > 0 {
                    ranges.push((0, end - 1));
                }
                RangeSet::from_ranges(ranges)
            } else {
                RangeSet::single(start, end - 1)
            }
        }
        Guard::Default => RangeSet::full(domain.size()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(set: &RangeSet, n: u64) -> Vec<bool> {
        (0..n).map(|i| set.contains(i)).collect()
    }

    fn arb_set() -> impl Strategy<Value = RangeSet> {
        proptest::collection::vec((0u64..40, 0u64..8), 0..5)
            .prop_map(|v| RangeSet::from_ranges(v.into_iter().map(|(lo, w)| (lo, lo + w)).collect()))
    }

    proptest! {
        #[test]
        fn set_ops_match_pointwise(a in arb_set(), b in arb_set()) {
            let n = 50;
            let (pa, pb) = (brute(&a, n), brute(&b, n));
            let u = brute(&a.union(&b), n);
            let i = brute(&a.intersect(&b), n);
            let d = brute(&a.subtract(&b), n);
            for k in 0..n as usize {
                prop_assert_eq!(u[k], pa[k] || pb[k]);
                prop_assert_eq!(i[k], pa[k] && pb[k]);
                prop_assert_eq!(d[k], pa[k] && !pb[k]);
            }
            prop_assert_eq!(a.count(), pa.iter().filter(|x| **x).count() as u64);
        }
    }

    #[test]
    fn wrapping_window_set() {
        use crate::model::TimeOfDay;
        use crate::tree::TimeWindow;
        let w = TimeWindow::new("19:01".parse::<TimeOfDay>().unwrap(), "06:00".parse().unwrap()).unwrap();
        let set = guard_set(&Guard::Window(w), &Domain::Time).unwrap();
        assert_eq!(set.ranges(), &[(0, 359), (1141, 1439)]);
        let w = TimeWindow::new("19:01".parse::<TimeOfDay>().unwrap(), "00:00".parse().unwrap()).unwrap();
        let set = guard_set(&Guard::Window(w), &Domain::Time).unwrap();
        assert_eq!(set.ranges(), &[(1141, 1439)]);
    }
}
