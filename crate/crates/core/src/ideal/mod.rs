//! Ideals on ℕ and convergence along them.

mod base;
mod ops;

use std::fmt;
use std::sync::Arc;

pub use base::{FilterBase, LevelStat};
pub use ops::{
    ideal_cluster_points, ideal_limit, ideal_liminf, ideal_limsup, is_ideal_bounded, is_ideal_cauchy,
    uniform_ideal_limit, uniform_ideal_limit_ext,
};

use crate::error::{Error, Result};
use crate::matrix::MatrixFamily;
use crate::scalar::{ExtendedReal, Scalar};
use crate::scale::Scale;
use crate::sequence::{indicator, IndexSet};
use crate::verdict::{Status, Verdict};

/// Residual margin above the null threshold required to call a set a non-member of a
/// derived ideal.
pub const NON_MEMBER_MARGIN: f64 = 1e-3;

/// An ideal on ℕ: the finite sets, an ideal given by a filter base, or J_{B,I}.
#[derive(Clone)]
pub enum IdealHandle<T: Scalar> {
    Finite,
    Based(FilterBase),
    Derived(Arc<DerivedIdeal<T>>),
}

/// J_{B,I}: sets K with sup_i Σ_k b_nk^(i) χ_K(k) → 0 along I.
pub struct DerivedIdeal<T: Scalar> {
    pub family: MatrixFamily<T>,
    pub inner: IdealHandle<T>,
    /// Index i₀ that passed condition (+).
    pub witness: usize,
}

impl<T: Scalar> fmt::Debug for IdealHandle<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IdealHandle({})", self.label())
    }
}

#[derive(Clone, Debug)]
pub struct Membership<T> {
    /// `HoldsAtScale` for members, `FailsAtScale` for non-members.
    pub status: Status,
    pub residual: T,
    pub witnesses: Vec<usize>,
}

impl<T> Membership<T> {
    pub fn is_member(&self) -> bool {
        self.status == Status::HoldsAtScale
    }

    pub fn is_non_member(&self) -> bool {
        self.status == Status::FailsAtScale
    }
}

impl<T: Scalar> Membership<T> {
    /// Membership as a verdict: holds for members, fails for non-members.
    pub fn verdict(&self, scale: &Scale<T>) -> Verdict<T> {
        match self.status {
            Status::HoldsAtScale => Verdict::holds(ExtendedReal::Finite(self.residual), self.residual, scale),
            Status::FailsAtScale => Verdict::fails(ExtendedReal::Finite(self.residual), self.residual, scale, self.witnesses.clone()),
            Status::Inconclusive => {
                let mut v = Verdict::inconclusive(scale, "membership undecided within the margin");
                v.estimate = ExtendedReal::Finite(self.residual);
                v.residual = self.residual;
                v
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct NullTest<T> {
    pub residual: T,
    pub holds: bool,
    pub witnesses: Vec<usize>,
}

impl<T: Scalar> NullTest<T> {
    pub fn verdict(&self, estimate: T, scale: &Scale<T>) -> Verdict<T> {
        Verdict::from_test(self.holds, ExtendedReal::Finite(estimate), self.residual, scale, self.witnesses.clone())
    }
}

fn last_k(mask: &[bool], k: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (1..=mask.len()).rev().filter(|&n| mask[n - 1]).take(k).collect();
    out.reverse();
    out
}

impl<T: Scalar> IdealHandle<T> {
    pub fn finite() -> Self {
        IdealHandle::Finite
    }

    pub fn based(base: FilterBase) -> Self {
        IdealHandle::Based(base)
    }

    pub fn label(&self) -> String {
        match self {
            IdealHandle::Finite => "I_f".into(),
            IdealHandle::Based(b) => format!("based({})", b.label()),
            IdealHandle::Derived(d) => format!("J({}, {})", d.family.label, d.inner.label()),
        }
    }

    /// The filter base, when the ideal is given by one.
    pub fn base(&self) -> Option<FilterBase> {
        match self {
            IdealHandle::Finite => Some(FilterBase::Tails),
            IdealHandle::Based(b) => Some(b.clone()),
            IdealHandle::Derived(_) => None,
        }
    }

    pub fn derived(&self) -> Option<&DerivedIdeal<T>> {
        match self {
            IdealHandle::Derived(d) => Some(d),
            _ => None,
        }
    }

    /// Membership of K ∩ [1..len] given as a mask.
    pub fn membership(&self, mask: &[bool], scale: &Scale<T>) -> Result<Membership<T>> {
        let len = mask.len();
        match self {
            IdealHandle::Derived(d) => {
                let h = d.family.horizon(len);
                if h == 0 {
                    return Err(Error::Capability(format!("no evaluable rows of {} within N = {len}", d.family.label)));
                }
                let x: Vec<T> = indicator(mask);
                let v = d.family.sup_apply(&x, h);
                let (r, _) = d.inner.null_residual(&v, &scale.clone().with_n(h))?;
                let thr = scale.null_threshold();
                let status = if r <= thr {
                    Status::HoldsAtScale
                } else if r > thr + T::of(NON_MEMBER_MARGIN) {
                    Status::FailsAtScale
                } else {
                    Status::Inconclusive
                };
                let witnesses = if status == Status::FailsAtScale { last_k(mask, 16) } else { Vec::new() };
                Ok(Membership { status, residual: r, witnesses })
            }
            _ => {
                let base = self.base().expect("based ideal");
                let levels = base.levels(len, scale);
                let absorbed = levels.iter().any(|&m| (1..=len).all(|n| !(mask[n - 1] && base.in_complement(m, n))));
                if absorbed {
                    Ok(Membership { status: Status::HoldsAtScale, residual: T::zero(), witnesses: Vec::new() })
                } else {
                    let deepest = *levels.last().unwrap_or(&0);
                    let w: Vec<usize> =
                        (1..=len).filter(|&n| mask[n - 1] && base.in_complement(deepest, n)).take(16).collect();
                    Ok(Membership { status: Status::FailsAtScale, residual: T::one(), witnesses: w })
                }
            }
        }
    }

    pub fn contains(&self, set: &IndexSet, scale: &Scale<T>) -> Result<Membership<T>> {
        self.membership(&set.mask(scale.n), scale)
    }

    /// Plain membership rule used by threshold sweeps: residual ≤ threshold.
    fn member_plain(&self, mask: &[bool], scale: &Scale<T>) -> Result<bool> {
        let m = self.membership(mask, scale)?;
        Ok(m.residual <= scale.null_threshold())
    }

    /// How far a nonnegative sequence is from being null along the ideal, with witness rows.
    pub fn null_residual(&self, v: &[T], scale: &Scale<T>) -> Result<(T, Vec<usize>)> {
        match self {
            IdealHandle::Derived(_) => {
                let r = self.limsup(v, scale)?.to_scalar();
                let thr = scale.null_threshold();
                let w: Vec<usize> = (1..=v.len()).rev().filter(|&n| v[n - 1] > thr).take(16).collect();
                Ok((r, w))
            }
            _ => {
                let base = self.base().expect("based ideal");
                let (r, level, _) = base
                    .min_of_max(v, scale)
                    .ok_or_else(|| Error::Inconclusive(format!("all filter sets of {} empty on the window", base.label())))?;
                let thr = scale.null_threshold();
                let w: Vec<usize> =
                    (1..=v.len()).filter(|&n| base.in_complement(level, n) && v[n - 1] > thr).take(16).collect();
                Ok((r, w))
            }
        }
    }

    pub fn null_test(&self, v: &[T], scale: &Scale<T>) -> Result<NullTest<T>> {
        let (residual, witnesses) = self.null_residual(v, scale)?;
        Ok(NullTest { residual, holds: residual <= scale.null_threshold(), witnesses })
    }

    /// I-limsup over the prefix `u`.
    pub fn limsup(&self, u: &[T], scale: &Scale<T>) -> Result<ExtendedReal<T>> {
        match self {
            IdealHandle::Derived(_) => self.sweep(u, scale, true),
            _ => {
                let base = self.base().expect("based ideal");
                base.min_of_max(u, scale)
                    .map(|(v, _, _)| ExtendedReal::from_scalar(v))
                    .ok_or_else(|| Error::Inconclusive("all filter sets empty on the window".into()))
            }
        }
    }

    pub fn liminf(&self, u: &[T], scale: &Scale<T>) -> Result<ExtendedReal<T>> {
        match self {
            IdealHandle::Derived(_) => self.sweep(u, scale, false),
            _ => {
                let base = self.base().expect("based ideal");
                base.max_of_min(u, scale)
                    .map(|(v, _, _)| ExtendedReal::from_scalar(v))
                    .ok_or_else(|| Error::Inconclusive("all filter sets empty on the window".into()))
            }
        }
    }

    /// limsup: smallest distinct value d with {u > d} a member; liminf: largest d with
    /// {u < d} a member. Membership is monotone in d, so a binary search suffices.
    fn sweep(&self, u: &[T], scale: &Scale<T>, upper: bool) -> Result<ExtendedReal<T>> {
        let mut d: Vec<T> = u.iter().copied().filter(|x| !x.is_nan()).collect();
        if d.is_empty() {
            return Err(Error::Inconclusive("no values to sweep".into()));
        }
        d.sort_by(crate::scalar::total_cmp);
        d.dedup();
        let r = d.len();
        if upper {
            // smallest j with member({u > d_j}); j = r-1 gives the empty set
            let (mut lo, mut hi) = (0usize, r - 1);
            while lo < hi {
                let mid = (lo + hi) / 2;
                let mask: Vec<bool> = u.iter().map(|&x| x > d[mid]).collect();
                if self.member_plain(&mask, scale)? {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            Ok(ExtendedReal::from_scalar(d[lo]))
        } else {
            // largest j with member({u < d_j}); j = 0 gives the empty set
            let (mut lo, mut hi) = (0usize, r - 1);
            while lo < hi {
                let mid = (lo + hi).div_ceil(2);
                let mask: Vec<bool> = u.iter().map(|&x| x < d[mid]).collect();
                if self.member_plain(&mask, scale)? {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            Ok(ExtendedReal::from_scalar(d[lo]))
        }
    }

    /// Singletons are members (based ideals) or every column of every member tends to 0
    /// along the inner ideal (derived ideals, first 128 columns).
    pub fn is_admissible(&self, scale: &Scale<T>) -> Result<Verdict<T>> {
        let n = scale.n;
        match self {
            IdealHandle::Derived(d) => {
                let h = d.family.horizon(n);
                let cols = 128.min(n / 4).max(1);
                let inner_scale = scale.clone().with_n(h);
                let mut worst = T::zero();
                let mut wit = Vec::new();
                for (i, m) in d.family.members().iter().enumerate() {
                    let mut colmax = vec![T::zero(); h];
                    for (row, slot) in colmax.iter_mut().enumerate() {
                        for (_, a) in m.row(row + 1, cols) {
                            *slot = slot.max(a.abs());
                        }
                    }
                    let t = d.inner.null_test(&colmax, &inner_scale)?;
                    if t.residual > worst {
                        worst = t.residual;
                        wit = vec![i];
                    }
                }
                let ok = worst <= scale.null_threshold();
                Ok(Verdict::from_test(ok, ExtendedReal::Finite(worst), worst, scale, wit))
            }
            _ => {
                let base = self.base().expect("based ideal");
                let probe = n.min(64);
                let levels = base.levels(n, scale);
                let bad: Vec<usize> =
                    (1..=probe).filter(|&k| !levels.iter().any(|&m| base.in_base(m, k))).collect();
                let r = if bad.is_empty() { T::zero() } else { T::one() };
                Ok(Verdict::from_test(bad.is_empty(), ExtendedReal::Finite(r), r, scale, bad))
            }
        }
    }

    /// Members of the ideal used as probes when checking I ⊆ J.
    pub fn sample_members(&self, scale: &Scale<T>) -> Vec<Vec<bool>> {
        let n = scale.n;
        match self {
            IdealHandle::Derived(_) => Vec::new(),
            IdealHandle::Finite | IdealHandle::Based(FilterBase::Tails) => {
                vec![(1..=n).map(|k| k <= 1).collect(), (1..=n).map(|k| k <= scale.m_max).collect()]
            }
            IdealHandle::Based(FilterBase::TailsAvoiding(a)) => {
                vec![a.mask(n), (1..=n).map(|k| k <= scale.m_max || a.contains(k)).collect()]
            }
            IdealHandle::Based(b) => vec![(1..=n).map(|k| b.in_base(1, k)).collect()],
        }
    }
}

/// Inner ideal configuration as read from JSON.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IdealSpec {
    /// Finite sets.
    Finite,
    /// Sets contained in the squares up to a finite set.
    AvoidSquares,
    AvoidEvens,
    /// Sets contained in the listed indices up to a finite set.
    AvoidIndices { indices: Vec<usize> },
}

impl IdealSpec {
    pub fn ideal<T: Scalar>(&self) -> IdealHandle<T> {
        match self {
            IdealSpec::Finite => IdealHandle::Finite,
            IdealSpec::AvoidSquares => IdealHandle::Based(FilterBase::TailsAvoiding(IndexSet::squares())),
            IdealSpec::AvoidEvens => IdealHandle::Based(FilterBase::TailsAvoiding(IndexSet::evens())),
            IdealSpec::AvoidIndices { indices } => {
                let n = indices.iter().copied().max().unwrap_or(0);
                IdealHandle::Based(FilterBase::TailsAvoiding(IndexSet::from_indices(indices.iter().copied(), n)))
            }
        }
    }
}
