use std::cmp::Ordering;
use std::collections::btree_map::{self, BTreeMap};
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Position `(i, n)`: inner coordinate `i` of outer block `n`, both 1-based.
///
/// Ordered by block first, then inner coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MixedIndex {
    pub i: usize,
    pub n: u64,
}

impl MixedIndex {
    pub const fn new(i: usize, n: u64) -> Self {
        MixedIndex { i, n }
    }
}

impl Ord for MixedIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.n, self.i).cmp(&(other.n, other.i))
    }
}

impl PartialOrd for MixedIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MixedIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i, self.n)
    }
}

/// Finitely supported coefficient map over mixed indices.
///
/// Zero coefficients are never stored, so `support` is exactly the key set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    entries: BTreeMap<MixedIndex, f64>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unit(i: usize, n: u64) -> Self {
        let mut v = Self::new();
        v.set(MixedIndex::new(i, n), 1.0);
        v
    }

    /// Builds a vector from `(index, coefficient)` pairs, summing repeats.
    pub fn from_entries<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (MixedIndex, f64)>,
    {
        let mut v = Self::new();
        for (idx, c) in entries {
            v.add_at(idx, c);
        }
        v
    }

    pub fn get(&self, idx: MixedIndex) -> f64 {
        self.entries.get(&idx).copied().unwrap_or(0.0)
    }

    /// Overwrites a coefficient; writing zero removes the entry.
    pub fn set(&mut self, idx: MixedIndex, value: f64) {
        if value == 0.0 {
            self.entries.remove(&idx);
        } else {
            self.entries.insert(idx, value);
        }
    }

    pub fn add_at(&mut self, idx: MixedIndex, value: f64) {
        let next = self.get(idx) + value;
        self.set(idx, next);
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (MixedIndex, f64)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    pub fn support(&self) -> impl Iterator<Item = MixedIndex> + '_ {
        self.entries.keys().copied()
    }

    pub fn support_set(&self) -> BTreeSet<MixedIndex> {
        self.entries.keys().copied().collect()
    }

    pub fn scaled(&self, c: f64) -> SparseVector {
        if c == 0.0 {
            return SparseVector::new();
        }
        SparseVector::from_entries(self.iter().map(|(k, v)| (k, c * v)))
    }

    /// `self + c · other`.
    pub fn add_scaled(&mut self, c: f64, other: &SparseVector) {
        for (k, v) in other.iter() {
            self.add_at(k, c * v);
        }
    }

    pub fn plus(&self, other: &SparseVector) -> SparseVector {
        let mut out = self.clone();
        out.add_scaled(1.0, other);
        out
    }

    pub fn minus(&self, other: &SparseVector) -> SparseVector {
        let mut out = self.clone();
        out.add_scaled(-1.0, other);
        out
    }

    /// Coordinatewise pairing `Σ self(k) · other(k)`.
    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.iter().map(|(k, v)| v * large.get(k)).sum()
    }

    /// Largest coefficientwise difference, over the union of supports.
    pub fn max_abs_diff(&self, other: &SparseVector) -> f64 {
        let a = self.iter().map(|(k, v)| (v - other.get(k)).abs());
        let b = other.iter().map(|(k, v)| (v - self.get(k)).abs());
        a.chain(b).fold(0.0, f64::max)
    }

    /// Restriction to the index set `keep`.
    pub fn project(&self, keep: &BTreeSet<MixedIndex>) -> SparseVector {
        self.project_with(|idx| keep.contains(&idx))
    }

    pub fn project_with<F: FnMut(MixedIndex) -> bool>(&self, mut keep: F) -> SparseVector {
        SparseVector {
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| keep(**k))
                .map(|(k, v)| (*k, *v))
                .collect(),
        }
    }
}

impl FromIterator<(MixedIndex, f64)> for SparseVector {
    fn from_iter<T: IntoIterator<Item = (MixedIndex, f64)>>(iter: T) -> Self {
        SparseVector::from_entries(iter)
    }
}

impl<'a> IntoIterator for &'a SparseVector {
    type Item = (&'a MixedIndex, &'a f64);
    type IntoIter = btree_map::Iter<'a, MixedIndex, f64>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

/// Coordinate projection `P_S v`.
pub fn project(v: &SparseVector, keep: &BTreeSet<MixedIndex>) -> SparseVector {
    v.project(keep)
}
