//! Summability matrices, matrix families and their structural conditions.

mod checks;
pub mod config;
mod family;
mod kinds;

use std::sync::Arc;

use num_complex::Complex;

pub use checks::{
    check_condition_plus, check_consistency_conditions, check_toeplitz_regularity, families_agree, ConsistencyReport,
    ToeplitzReport,
};
pub use family::{build_shift_family, derived_ideal, Envelope, MatrixFamily};
pub use kinds::{merge_rows, Cesaro, Identity, Perturbed, RowFn, Scaled, Shifted, SparseRows};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sequence::SequencePrefix;

/// Row-generated infinite matrix (a_nk), n, k ≥ 1.
pub trait SummabilityMatrix<T: Scalar>: Send + Sync {
    fn label(&self) -> String;

    /// Nonzero entries (k, a_nk) with k ≤ cutoff, sorted by k.
    fn row(&self, n: usize, cutoff: usize) -> Vec<(usize, T)>;

    /// Upper bound on Σ_{k>cutoff} |a_nk|; non-increasing in cutoff.
    fn tail_bound(&self, n: usize, cutoff: usize) -> T;

    /// Last possibly nonzero column of row n; `None` for rows with infinite support.
    fn support_end(&self, n: usize) -> Option<usize>;

    fn is_nonnegative(&self) -> bool;

    fn is_lower_triangular(&self) -> bool {
        false
    }

    fn entry(&self, n: usize, k: usize) -> T {
        self.row(n, k).last().filter(|e| e.0 == k).map_or(T::zero(), |e| e.1)
    }

    fn row_sum(&self, n: usize, cutoff: usize) -> T {
        self.row(n, cutoff).iter().map(|e| e.1).sum()
    }

    fn row_abs_sum(&self, n: usize, cutoff: usize) -> T {
        self.row(n, cutoff).iter().map(|e| e.1.abs()).sum()
    }

    /// (Ax)_n for n = 1..=rows using x_k = x[k-1], k ≤ x.len().
    fn apply_rows(&self, x: &[T], rows: usize) -> Vec<T> {
        (1..=rows).map(|n| self.row(n, x.len()).iter().map(|&(k, a)| a * x[k - 1]).sum()).collect()
    }

    /// `(start, end, w)` when row n equals w·χ_[start, end].
    fn uniform_window(&self, _n: usize) -> Option<(usize, usize, T)> {
        None
    }

    /// Number of leading rows whose support lies within 1..=len (rows with infinite
    /// support count, their truncation being covered by `tail_bound`).
    fn evaluable_rows(&self, len: usize) -> usize {
        let mut n = len;
        while n > 0 && self.support_end(n).is_some_and(|e| e > len) {
            n -= 1;
        }
        n
    }
}

pub type MatrixRef<T> = Arc<dyn SummabilityMatrix<T>>;

/// Σ_{k ≤ N} a_nk s_k and the tail error bound tail_bound(n, N)·sup|s|.
pub fn transform<T: Scalar>(s: &SequencePrefix<T>, a: &dyn SummabilityMatrix<T>, n: usize) -> Result<(T, T)> {
    if s.is_empty() {
        return Err(Error::Input("empty sequence prefix".into()));
    }
    let len = s.len();
    let tail = a.tail_bound(n, len);
    if tail > T::zero() && !s.is_bounded() {
        return Err(Error::Capability(format!("row {n} of {} has mass beyond N = {len} and s is unbounded", a.label())));
    }
    let value = a.row(n, len).iter().map(|&(k, w)| w * s.get(k)).sum();
    Ok((value, tail * s.sup_abs()))
}

/// Transform of a complex sequence by a real matrix.
pub fn transform_complex<T: Scalar>(s: &[Complex<T>], a: &dyn SummabilityMatrix<T>, n: usize) -> (Complex<T>, T) {
    let row = a.row(n, s.len());
    let value = row.iter().fold(Complex::new(T::zero(), T::zero()), |acc, &(k, w)| acc + s[k - 1] * w);
    let sup = s.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    (value, a.tail_bound(n, s.len()) * sup)
}
