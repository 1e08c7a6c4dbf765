use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::{MatrixRef, SummabilityMatrix};
use crate::scalar::Scalar;

/// a_nk = 1/n for k ≤ n.
#[derive(Clone, Copy, Debug, Default)]
pub struct Cesaro;

impl<T: Scalar> SummabilityMatrix<T> for Cesaro {
    fn label(&self) -> String {
        "cesaro".into()
    }

    fn row(&self, n: usize, cutoff: usize) -> Vec<(usize, T)> {
        let w = T::one() / T::of_usize(n);
        (1..=n.min(cutoff)).map(|k| (k, w)).collect()
    }

    fn tail_bound(&self, n: usize, cutoff: usize) -> T {
        if cutoff >= n {
            T::zero()
        } else {
            T::of_usize(n - cutoff) / T::of_usize(n)
        }
    }

    fn support_end(&self, n: usize) -> Option<usize> {
        Some(n)
    }

    fn is_nonnegative(&self) -> bool {
        true
    }

    fn is_lower_triangular(&self) -> bool {
        true
    }

    fn entry(&self, n: usize, k: usize) -> T {
        if k >= 1 && k <= n {
            T::one() / T::of_usize(n)
        } else {
            T::zero()
        }
    }

    fn row_sum(&self, n: usize, cutoff: usize) -> T {
        T::of_usize(n.min(cutoff)) / T::of_usize(n)
    }

    fn row_abs_sum(&self, n: usize, cutoff: usize) -> T {
        <Self as SummabilityMatrix<T>>::row_sum(self, n, cutoff)
    }

    fn apply_rows(&self, x: &[T], rows: usize) -> Vec<T> {
        let mut out = Vec::with_capacity(rows);
        let mut acc = T::zero();
        for n in 1..=rows {
            if n <= x.len() {
                acc += x[n - 1];
            }
            out.push(acc / T::of_usize(n));
        }
        out
    }

    fn uniform_window(&self, n: usize) -> Option<(usize, usize, T)> {
        Some((1, n, T::one() / T::of_usize(n)))
    }
}

/// a_nk = δ_nk.
#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl<T: Scalar> SummabilityMatrix<T> for Identity {
    fn label(&self) -> String {
        "identity".into()
    }

    fn row(&self, n: usize, cutoff: usize) -> Vec<(usize, T)> {
        if n <= cutoff {
            vec![(n, T::one())]
        } else {
            Vec::new()
        }
    }

    fn tail_bound(&self, n: usize, cutoff: usize) -> T {
        if cutoff >= n {
            T::zero()
        } else {
            T::one()
        }
    }

    fn support_end(&self, n: usize) -> Option<usize> {
        Some(n)
    }

    fn is_nonnegative(&self) -> bool {
        true
    }

    fn is_lower_triangular(&self) -> bool {
        true
    }

    fn apply_rows(&self, x: &[T], rows: usize) -> Vec<T> {
        (1..=rows).map(|n| if n <= x.len() { x[n - 1] } else { T::zero() }).collect()
    }

    fn uniform_window(&self, n: usize) -> Option<(usize, usize, T)> {
        Some((n, n, T::one()))
    }
}

/// c·A.
pub struct Scaled<T: Scalar> {
    pub inner: MatrixRef<T>,
    pub factor: T,
}

impl<T: Scalar> SummabilityMatrix<T> for Scaled<T> {
    fn label(&self) -> String {
        format!("{}*{}", self.factor, self.inner.label())
    }

    fn row(&self, n: usize, cutoff: usize) -> Vec<(usize, T)> {
        self.inner.row(n, cutoff).into_iter().map(|(k, a)| (k, a * self.factor)).collect()
    }

    fn tail_bound(&self, n: usize, cutoff: usize) -> T {
        self.inner.tail_bound(n, cutoff) * self.factor.abs()
    }

    fn support_end(&self, n: usize) -> Option<usize> {
        self.inner.support_end(n)
    }

    fn is_nonnegative(&self) -> bool {
        self.inner.is_nonnegative() && self.factor >= T::zero()
    }

    fn is_lower_triangular(&self) -> bool {
        self.inner.is_lower_triangular()
    }

    fn row_sum(&self, n: usize, cutoff: usize) -> T {
        self.inner.row_sum(n, cutoff) * self.factor
    }

    fn row_abs_sum(&self, n: usize, cutoff: usize) -> T {
        self.inner.row_abs_sum(n, cutoff) * self.factor.abs()
    }

    fn apply_rows(&self, x: &[T], rows: usize) -> Vec<T> {
        self.inner.apply_rows(x, rows).into_iter().map(|v| v * self.factor).collect()
    }

    fn evaluable_rows(&self, len: usize) -> usize {
        self.inner.evaluable_rows(len)
    }
}

type EntryFn<T> = Arc<dyn Fn(usize, usize) -> T + Send + Sync>;
type SupportFn = Arc<dyn Fn(usize) -> Option<usize> + Send + Sync>;
type StartFn = Arc<dyn Fn(usize) -> usize + Send + Sync>;
type TailFn<T> = Arc<dyn Fn(usize, usize) -> T + Send + Sync>;

/// Matrix given entrywise by a closure, with declared support and tail.
#[derive(Clone)]
pub struct RowFn<T: Scalar> {
    label: String,
    entry: EntryFn<T>,
    start: StartFn,
    support: SupportFn,
    tail: TailFn<T>,
    nonnegative: bool,
    lower: bool,
}

impl<T: Scalar> RowFn<T> {
    /// Finitely supported rows: entries vanish for k > support(n).
    pub fn finite(
        label: impl Into<String>,
        entry: impl Fn(usize, usize) -> T + Send + Sync + 'static,
        support: impl Fn(usize) -> usize + Send + Sync + 'static,
        nonnegative: bool,
    ) -> Self {
        let support = Arc::new(support);
        let s2 = support.clone();
        let entry: EntryFn<T> = Arc::new(entry);
        let e2 = entry.clone();
        RowFn {
            label: label.into(),
            entry,
            start: Arc::new(|_| 1),
            support: Arc::new(move |n| Some(s2(n))),
            tail: Arc::new(move |n, c| {
                let end = support(n);
                (c + 1..=end).fold(T::zero(), |acc, k| acc + e2(n, k).abs())
            }),
            nonnegative,
            lower: false,
        }
        .detect_lower()
    }

    pub fn lower_triangular(label: impl Into<String>, entry: impl Fn(usize, usize) -> T + Send + Sync + 'static, nonnegative: bool) -> Self {
        let mut m = RowFn::finite(label, move |n, k| if k <= n { entry(n, k) } else { T::zero() }, |n| n, nonnegative);
        m.lower = true;
        m
    }

    /// a_nn = d(n), zero elsewhere.
    pub fn diagonal(label: impl Into<String>, d: impl Fn(usize) -> T + Send + Sync + 'static) -> Self {
        RowFn::banded(label, move |n, k| if n == k { d(n) } else { T::zero() }, |n| n, |n| n, false)
    }

    /// Rows supported on start(n)..=end(n).
    pub fn banded(
        label: impl Into<String>,
        entry: impl Fn(usize, usize) -> T + Send + Sync + 'static,
        start: impl Fn(usize) -> usize + Send + Sync + 'static,
        end: impl Fn(usize) -> usize + Send + Sync + 'static,
        nonnegative: bool,
    ) -> Self {
        let entry: EntryFn<T> = Arc::new(entry);
        let e2 = entry.clone();
        let end = Arc::new(end);
        let end2 = end.clone();
        let start: StartFn = Arc::new(start);
        let start2 = start.clone();
        RowFn {
            label: label.into(),
            entry,
            start,
            support: Arc::new(move |n| Some(end2(n))),
            tail: Arc::new(move |n, c| (start2(n).max(c + 1)..=end(n)).fold(T::zero(), |acc, k| acc + e2(n, k).abs())),
            nonnegative,
            lower: false,
        }
        .detect_lower()
    }

    /// Rows with infinite support: `entry` for all k and a closed-form tail Σ_{k>c}|a_nk|.
    pub fn infinite(
        label: impl Into<String>,
        entry: impl Fn(usize, usize) -> T + Send + Sync + 'static,
        tail: impl Fn(usize, usize) -> T + Send + Sync + 'static,
        nonnegative: bool,
    ) -> Self {
        RowFn {
            label: label.into(),
            entry: Arc::new(entry),
            start: Arc::new(|_| 1),
            support: Arc::new(|_| None),
            tail: Arc::new(tail),
            nonnegative,
            lower: false,
        }
    }

    /// b_nk = 2^{-k} in every row.
    pub fn geometric_rows() -> Self {
        RowFn::infinite(
            "geometric rows",
            |_, k| T::of(0.5).powi(k as i32),
            |_, c| T::of(0.5).powi(c as i32),
            true,
        )
    }

    pub fn with_nonnegative(mut self, flag: bool) -> Self {
        self.nonnegative = flag;
        self
    }

    fn detect_lower(mut self) -> Self {
        self.lower = (1..=64).all(|n| (self.support)(n).is_some_and(|e| e <= n));
        self
    }
}

impl<T: Scalar> SummabilityMatrix<T> for RowFn<T> {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn row(&self, n: usize, cutoff: usize) -> Vec<(usize, T)> {
        let end = (self.support)(n).map_or(cutoff, |e| e.min(cutoff));
        ((self.start)(n)..=end).map(|k| (k, (self.entry)(n, k))).filter(|(_, a)| *a != T::zero()).collect()
    }

    fn tail_bound(&self, n: usize, cutoff: usize) -> T {
        (self.tail)(n, cutoff)
    }

    fn support_end(&self, n: usize) -> Option<usize> {
        (self.support)(n)
    }

    fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    fn is_lower_triangular(&self) -> bool {
        self.lower
    }

    fn entry(&self, n: usize, k: usize) -> T {
        match (self.support)(n) {
            Some(e) if k > e || k < (self.start)(n) => T::zero(),
            _ => (self.entry)(n, k),
        }
    }
}

/// Explicit finitely supported rows, e.g. loaded from CSV.
#[derive(Clone, Debug)]
pub struct SparseRows<T> {
    label: String,
    rows: BTreeMap<usize, Vec<(usize, T)>>,
    nonnegative: bool,
    lower: bool,
}

impl<T: Scalar> SparseRows<T> {
    pub fn new(label: impl Into<String>, triples: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        let mut rows: BTreeMap<usize, Vec<(usize, T)>> = BTreeMap::new();
        for (n, k, a) in triples {
            if n == 0 || k == 0 {
                return Err(Error::Input(format!("matrix indices are 1-based, got ({n},{k})")));
            }
            if !a.is_finite() {
                return Err(Error::Input(format!("non-finite entry at ({n},{k})")));
            }
            rows.entry(n).or_default().push((k, a));
        }
        for r in rows.values_mut() {
            r.sort_by_key(|e| e.0);
            r.dedup_by(|a, b| {
                if a.0 == b.0 {
                    b.1 += a.1;
                    true
                } else {
                    false
                }
            });
        }
        let nonnegative = rows.values().flatten().all(|e| e.1 >= T::zero());
        let lower = rows.iter().all(|(n, r)| r.iter().all(|e| e.0 <= *n));
        Ok(SparseRows { label: label.into(), rows, nonnegative, lower })
    }

    /// CSV with rows `n,k,value`; a header line is skipped if it does not parse.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
        let mut triples = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(format!("line {}: {e}", line + 1)))?;
            if rec.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected 3 fields n,k,value", line + 1)));
            }
            let parsed = (rec[0].parse::<usize>(), rec[1].parse::<usize>(), rec[2].parse::<f64>());
            match parsed {
                (Ok(n), Ok(k), Ok(v)) => triples.push((n, k, T::of(v))),
                _ if line == 0 => continue,
                _ => return Err(Error::Parse(format!("line {}: cannot parse {:?}", line + 1, rec))),
            }
        }
        let label = path.file_name().map(|f| f.to_string_lossy().to_string()).unwrap_or_else(|| "csv".into());
        SparseRows::new(label, triples)
    }

    pub fn max_row(&self) -> usize {
        self.rows.keys().next_back().copied().unwrap_or(0)
    }
}

impl<T: Scalar> SummabilityMatrix<T> for SparseRows<T> {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn row(&self, n: usize, cutoff: usize) -> Vec<(usize, T)> {
        self.rows.get(&n).map(|r| r.iter().copied().filter(|e| e.0 <= cutoff).collect()).unwrap_or_default()
    }

    fn tail_bound(&self, n: usize, cutoff: usize) -> T {
        self.rows.get(&n).map(|r| r.iter().filter(|e| e.0 > cutoff).map(|e| e.1.abs()).sum()).unwrap_or(T::zero())
    }

    fn support_end(&self, n: usize) -> Option<usize> {
        Some(self.rows.get(&n).and_then(|r| r.last()).map_or(0, |e| e.0))
    }

    fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    fn is_lower_triangular(&self) -> bool {
        self.lower
    }

    fn evaluable_rows(&self, len: usize) -> usize {
        // rows beyond the file are zero rows
        let mut n = len;
        while n > 0 && self.support_end(n).is_some_and(|e| e > len) {
            n -= 1;
        }
        n
    }
}

/// b_nk^(i) = a_{n,k−i} for k > i, 0 otherwise.
pub struct Shifted<T: Scalar> {
    pub inner: MatrixRef<T>,
    pub shift: usize,
}

impl<T: Scalar> SummabilityMatrix<T> for Shifted<T> {
    fn label(&self) -> String {
        format!("{}>>{}", self.inner.label(), self.shift)
    }

    fn row(&self, n: usize, cutoff: usize) -> Vec<(usize, T)> {
        if cutoff <= self.shift {
            return Vec::new();
        }
        self.inner.row(n, cutoff - self.shift).into_iter().map(|(k, a)| (k + self.shift, a)).collect()
    }

    fn tail_bound(&self, n: usize, cutoff: usize) -> T {
        self.inner.tail_bound(n, cutoff.saturating_sub(self.shift))
    }

    fn support_end(&self, n: usize) -> Option<usize> {
        self.inner.support_end(n).map(|e| e + self.shift)
    }

    fn is_nonnegative(&self) -> bool {
        self.inner.is_nonnegative()
    }

    fn entry(&self, n: usize, k: usize) -> T {
        if k <= self.shift {
            T::zero()
        } else {
            self.inner.entry(n, k - self.shift)
        }
    }

    fn row_sum(&self, n: usize, cutoff: usize) -> T {
        if cutoff <= self.shift {
            T::zero()
        } else {
            self.inner.row_sum(n, cutoff - self.shift)
        }
    }

    fn row_abs_sum(&self, n: usize, cutoff: usize) -> T {
        if cutoff <= self.shift {
            T::zero()
        } else {
            self.inner.row_abs_sum(n, cutoff - self.shift)
        }
    }

    fn apply_rows(&self, x: &[T], rows: usize) -> Vec<T> {
        let tail = if self.shift < x.len() { &x[self.shift..] } else { &[] };
        self.inner.apply_rows(tail, rows)
    }

    fn uniform_window(&self, n: usize) -> Option<(usize, usize, T)> {
        self.inner.uniform_window(n).map(|(a, b, w)| (a + self.shift, b + self.shift, w))
    }

    fn evaluable_rows(&self, len: usize) -> usize {
        self.inner.evaluable_rows(len.saturating_sub(self.shift))
    }
}

/// A + D.
pub struct Perturbed<T: Scalar> {
    pub base: MatrixRef<T>,
    pub delta: MatrixRef<T>,
}

impl<T: Scalar> SummabilityMatrix<T> for Perturbed<T> {
    fn label(&self) -> String {
        format!("{}+{}", self.base.label(), self.delta.label())
    }

    fn row(&self, n: usize, cutoff: usize) -> Vec<(usize, T)> {
        merge_rows(&self.base.row(n, cutoff), &self.delta.row(n, cutoff), |a, b| a + b)
    }

    fn tail_bound(&self, n: usize, cutoff: usize) -> T {
        self.base.tail_bound(n, cutoff) + self.delta.tail_bound(n, cutoff)
    }

    fn support_end(&self, n: usize) -> Option<usize> {
        match (self.base.support_end(n), self.delta.support_end(n)) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        }
    }

    fn is_nonnegative(&self) -> bool {
        self.base.is_nonnegative() && self.delta.is_nonnegative()
    }

    fn is_lower_triangular(&self) -> bool {
        self.base.is_lower_triangular() && self.delta.is_lower_triangular()
    }

    fn apply_rows(&self, x: &[T], rows: usize) -> Vec<T> {
        let a = self.base.apply_rows(x, rows);
        let b = self.delta.apply_rows(x, rows);
        a.into_iter().zip(b).map(|(p, q)| p + q).collect()
    }
}

/// Union of the supports of two sorted sparse rows, combining entries with `f`.
pub fn merge_rows<T: Scalar>(a: &[(usize, T)], b: &[(usize, T)], f: impl Fn(T, T) -> T) -> Vec<(usize, T)> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len().max(b.len()));
    while i < a.len() || j < b.len() {
        let ka = a.get(i).map_or(usize::MAX, |e| e.0);
        let kb = b.get(j).map_or(usize::MAX, |e| e.0);
        if ka == kb {
            out.push((ka, f(a[i].1, b[j].1)));
            i += 1;
            j += 1;
        } else if ka < kb {
            out.push((ka, f(a[i].1, T::zero())));
            i += 1;
        } else {
            out.push((kb, f(T::zero(), b[j].1)));
            j += 1;
        }
    }
    out
}
