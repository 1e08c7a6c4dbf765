use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::scalar::{max_of, min_of, Scalar};

/// Analytic boundedness metadata of the full sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound<T> {
    Known(T),
    Unbounded,
    Unknown,
}

/// Finite prefix s_1..s_N of a real sequence. Indices are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequencePrefix<T> {
    values: Vec<T>,
    pub bound: Bound<T>,
    pub limit: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl<T: Scalar> SequencePrefix<T> {
    pub fn new(values: Vec<T>) -> Self {
        SequencePrefix { values, bound: Bound::Unknown, limit: None, label: None }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> T) -> Self {
        SequencePrefix::new((1..=n).map(f).collect())
    }

    pub fn with_bound(mut self, b: Bound<T>) -> Self {
        self.bound = b;
        self
    }

    pub fn with_limit(mut self, a: T) -> Self {
        self.limit = Some(a);
        self
    }

    pub fn with_label(mut self, l: impl Into<String>) -> Self {
        self.label = Some(l.into());
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// s_n for 1 ≤ n ≤ N.
    pub fn get(&self, n: usize) -> T {
        self.values[n - 1]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn require_len(&self, n: usize) -> Result<()> {
        if self.values.is_empty() {
            return input("empty sequence prefix");
        }
        if self.values.len() < n {
            return input(format!("sequence has length {} < scale N = {}", self.values.len(), n));
        }
        if self.values.iter().any(|v| v.is_nan()) {
            return input("sequence contains NaN");
        }
        Ok(())
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self.bound, Bound::Unbounded)
    }

    pub fn sup_abs(&self) -> T {
        match self.bound {
            Bound::Known(b) => b,
            _ => max_of(self.values.iter().map(|v| v.abs())).unwrap_or(T::zero()),
        }
    }

    pub fn max(&self) -> T {
        max_of(self.values.iter().copied()).unwrap_or(T::zero())
    }

    pub fn min(&self) -> T {
        min_of(self.values.iter().copied()).unwrap_or(T::zero())
    }

    pub fn truncated(&self, n: usize) -> Self {
        let mut out = self.clone();
        out.values.truncate(n);
        out
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        SequencePrefix::new(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn neg(&self) -> Self {
        let mut out = self.map(|v| -v);
        out.limit = self.limit.map(|a| -a);
        out.bound = self.bound;
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.len().min(other.len());
        SequencePrefix::new((0..n).map(|k| self.values[k] + other.values[k]).collect())
    }

    /// Distinct values in increasing order.
    pub fn distinct_values(&self) -> Vec<T> {
        let mut v = self.values.clone();
        v.sort_by(crate::scalar::total_cmp);
        v.dedup();
        v
    }

    /// The finite range when it has at most `cap` values.
    pub fn finite_range(&self, cap: usize) -> Option<Vec<T>> {
        let mut vals: Vec<T> = Vec::new();
        for &v in &self.values {
            if !vals.contains(&v) {
                if vals.len() == cap {
                    return None;
                }
                vals.push(v);
            }
        }
        vals.sort_by(crate::scalar::total_cmp);
        Some(vals)
    }
}

/// Subset of ℕ, as a mask over a prefix or a predicate.
#[derive(Clone)]
pub enum IndexSet {
    /// `mask[k-1]` is membership of k; indices beyond the mask are outside.
    Mask(Vec<bool>),
    Predicate { label: String, pred: Arc<dyn Fn(usize) -> bool + Send + Sync> },
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexSet::Mask(m) => write!(f, "IndexSet::Mask({} of {})", m.iter().filter(|b| **b).count(), m.len()),
            IndexSet::Predicate { label, .. } => write!(f, "IndexSet::Predicate({label})"),
        }
    }
}

impl IndexSet {
    pub fn from_indices(indices: impl IntoIterator<Item = usize>, n: usize) -> Self {
        let mut m = vec![false; n];
        for k in indices {
            if k >= 1 && k <= n {
                m[k - 1] = true;
            }
        }
        IndexSet::Mask(m)
    }

    pub fn predicate(label: impl Into<String>, f: impl Fn(usize) -> bool + Send + Sync + 'static) -> Self {
        IndexSet::Predicate { label: label.into(), pred: Arc::new(f) }
    }

    pub fn all() -> Self {
        IndexSet::predicate("all", |_| true)
    }

    pub fn empty() -> Self {
        IndexSet::Mask(Vec::new())
    }

    pub fn squares() -> Self {
        IndexSet::predicate("squares", is_square)
    }

    pub fn evens() -> Self {
        IndexSet::predicate("evens", |k| k % 2 == 0)
    }

    pub fn contains(&self, k: usize) -> bool {
        match self {
            IndexSet::Mask(m) => k >= 1 && k <= m.len() && m[k - 1],
            IndexSet::Predicate { pred, .. } => k >= 1 && pred(k),
        }
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        (1..=n).map(|k| self.contains(k)).collect()
    }

    pub fn indices(&self, n: usize) -> Vec<usize> {
        (1..=n).filter(|&k| self.contains(k)).collect()
    }

    pub fn count(&self, n: usize) -> usize {
        (1..=n).filter(|&k| self.contains(k)).count()
    }

    pub fn complement(&self, n: usize) -> Self {
        IndexSet::Mask((1..=n).map(|k| !self.contains(k)).collect())
    }

    pub fn union(&self, other: &Self, n: usize) -> Self {
        IndexSet::Mask((1..=n).map(|k| self.contains(k) || other.contains(k)).collect())
    }
}

pub fn is_square(k: usize) -> bool {
    let r = (k as f64).sqrt().round() as usize;
    r * r == k
}

pub fn indicator<T: Scalar>(mask: &[bool]) -> Vec<T> {
    mask.iter().map(|&b| if b { T::one() } else { T::zero() }).collect()
}
