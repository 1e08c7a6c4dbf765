use std::fmt;
use std::sync::Arc;

use crate::scalar::Scalar;
use crate::scale::Scale;
use crate::sequence::IndexSet;

/// Decreasing filter sets C_m = ℕ∖B_m of a countably based ideal.
#[derive(Clone)]
pub enum FilterBase {
    /// B_m = {1..m}; generates the ideal of finite sets.
    Tails,
    /// B_m = {1..m} ∪ A for a fixed set A.
    TailsAvoiding(IndexSet),
    /// `complement(m, n)` decides n ∈ C_m.
    Custom { label: String, complement: Arc<dyn Fn(usize, usize) -> bool + Send + Sync> },
}

impl fmt::Debug for FilterBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FilterBase({})", self.label())
    }
}

/// Max and min of a sequence over one filter set.
#[derive(Clone, Copy, Debug)]
pub struct LevelStat<T> {
    pub level: usize,
    pub max: (T, usize),
    pub min: (T, usize),
}

impl FilterBase {
    pub fn custom(label: impl Into<String>, f: impl Fn(usize, usize) -> bool + Send + Sync + 'static) -> Self {
        FilterBase::Custom { label: label.into(), complement: Arc::new(f) }
    }

    pub fn label(&self) -> String {
        match self {
            FilterBase::Tails => "tails".into(),
            FilterBase::TailsAvoiding(a) => format!("tails avoiding {a:?}"),
            FilterBase::Custom { label, .. } => label.clone(),
        }
    }

    /// n ∈ C_m.
    pub fn in_complement(&self, m: usize, n: usize) -> bool {
        match self {
            FilterBase::Tails => n > m,
            FilterBase::TailsAvoiding(a) => n > m && !a.contains(n),
            FilterBase::Custom { complement, .. } => complement(m, n),
        }
    }

    pub fn in_base(&self, m: usize, n: usize) -> bool {
        !self.in_complement(m, n)
    }

    fn is_tail_shaped(&self) -> bool {
        matches!(self, FilterBase::Tails | FilterBase::TailsAvoiding(_))
    }

    /// Probed levels for a prefix of length `len`, increasing.
    pub fn levels<T: Scalar>(&self, len: usize, scale: &Scale<T>) -> Vec<usize> {
        if self.is_tail_shaped() {
            let deepest = scale.deepest_level(len);
            let mut out: Vec<usize> = (0..=scale.m_max).map(|j| j * deepest / scale.m_max).collect();
            out.dedup();
            out
        } else {
            (1..=scale.m_max).collect()
        }
    }

    pub fn deepest<T: Scalar>(&self, len: usize, scale: &Scale<T>) -> usize {
        *self.levels(len, scale).last().unwrap_or(&0)
    }

    pub fn complement_mask(&self, m: usize, len: usize) -> Vec<bool> {
        (1..=len).map(|n| self.in_complement(m, n)).collect()
    }

    /// Per-level max/min of `v` (v[n-1] = v_n) over C_m ∩ [1..len]. Levels with an empty
    /// window are skipped.
    pub fn level_stats<T: Scalar>(&self, v: &[T], scale: &Scale<T>) -> Vec<LevelStat<T>> {
        let len = v.len();
        let levels = self.levels(len, scale);
        match self {
            FilterBase::Tails => {
                // suffix extremes
                let mut smax = vec![(T::neg_infinity(), 0usize); len + 1];
                let mut smin = vec![(T::infinity(), 0usize); len + 1];
                for n in (1..=len).rev() {
                    let x = v[n - 1];
                    smax[n - 1] = if x >= smax[n].0 { (x, n) } else { smax[n] };
                    smin[n - 1] = if x <= smin[n].0 { (x, n) } else { smin[n] };
                }
                levels
                    .into_iter()
                    .filter(|&m| m < len)
                    .map(|m| LevelStat { level: m, max: smax[m], min: smin[m] })
                    .collect()
            }
            _ => levels
                .into_iter()
                .filter_map(|m| {
                    let mut st: Option<LevelStat<T>> = None;
                    for n in 1..=len {
                        if !self.in_complement(m, n) {
                            continue;
                        }
                        let x = v[n - 1];
                        match st.as_mut() {
                            None => st = Some(LevelStat { level: m, max: (x, n), min: (x, n) }),
                            Some(s) => {
                                if x > s.max.0 {
                                    s.max = (x, n);
                                }
                                if x < s.min.0 {
                                    s.min = (x, n);
                                }
                            }
                        }
                    }
                    st
                })
                .collect(),
        }
    }

    /// min over levels of max over C_m; returns (value, level, argmax).
    pub fn min_of_max<T: Scalar>(&self, v: &[T], scale: &Scale<T>) -> Option<(T, usize, usize)> {
        self.level_stats(v, scale)
            .into_iter()
            .fold(None, |acc: Option<(T, usize, usize)>, s| match acc {
                Some(a) if a.0 <= s.max.0 => Some(a),
                _ => Some((s.max.0, s.level, s.max.1)),
            })
    }

    /// max over levels of min over C_m; returns (value, level, argmin).
    pub fn max_of_min<T: Scalar>(&self, v: &[T], scale: &Scale<T>) -> Option<(T, usize, usize)> {
        self.level_stats(v, scale)
            .into_iter()
            .fold(None, |acc: Option<(T, usize, usize)>, s| match acc {
                Some(a) if a.0 >= s.min.0 => Some(a),
                _ => Some((s.min.0, s.level, s.min.1)),
            })
    }

    /// Indices of C_level ∩ [1..len] as a list.
    pub fn window(&self, level: usize, len: usize) -> Vec<usize> {
        (1..=len).filter(|&n| self.in_complement(level, n)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tails_levels_reach_half() {
        let s: Scale<f64> = Scale::new(10_000);
        let l = FilterBase::Tails.levels(10_000, &s);
        assert_eq!(l[0], 0);
        assert_eq!(*l.last().unwrap(), 5_000);
        assert_eq!(l.len(), 33);
    }

    #[test]
    fn complements_decrease() {
        let s: Scale<f64> = Scale::new(200);
        let bases = vec![
            FilterBase::Tails,
            FilterBase::TailsAvoiding(IndexSet::squares()),
            FilterBase::custom("odd tails", |m, n| n > 2 * m && n % 2 == 1),
        ];
        for b in bases {
            let levels = b.levels(200, &s);
            for w in levels.windows(2) {
                for n in 1..=200 {
                    if b.in_complement(w[1], n) {
                        assert!(b.in_complement(w[0], n), "{} level {} n {}", b.label(), w[1], n);
                    }
                }
            }
        }
    }

    #[test]
    fn tails_stats_match_scan() {
        let s: Scale<f64> = Scale::new(50).with_m_max(5);
        let v: Vec<f64> = (1..=50).map(|n| ((n * 37) % 11) as f64).collect();
        let fast = FilterBase::Tails.level_stats(&v, &s);
        for st in fast {
            let w: Vec<f64> = (st.level + 1..=50).map(|n| v[n - 1]).collect();
            let mx = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mn = w.iter().cloned().fold(f64::INFINITY, f64::min);
            assert_eq!(st.max.0, mx);
            assert_eq!(st.min.0, mn);
        }
    }
}
