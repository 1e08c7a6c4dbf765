use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::scalar::{max_of, min_of, Scalar};

/// Truncation parameters every verdict is qualified by.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de>"))]
pub struct Scale<T> {
    pub n: usize,
    pub i_max: usize,
    pub m_max: usize,
    pub eps_list: Vec<T>,
    pub tol: T,
    /// Fraction of the prefix kept in the deepest tail window.
    pub window_fraction: T,
    /// Overrides `min(eps_list)` as the threshold of null tests.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null_tol: Option<T>,
}

impl<T: Scalar> Default for Scale<T> {
    fn default() -> Self {
        Scale::new(10_000)
    }
}

impl<T: Scalar> Scale<T> {
    pub fn new(n: usize) -> Self {
        Scale {
            n,
            i_max: 64,
            m_max: 32,
            eps_list: default_eps_list(n),
            tol: T::of(1e-6),
            window_fraction: T::of(0.5),
            null_tol: None,
        }
    }

    pub fn with_i_max(mut self, i_max: usize) -> Self {
        self.i_max = i_max;
        self
    }

    pub fn with_m_max(mut self, m_max: usize) -> Self {
        self.m_max = m_max;
        self
    }

    pub fn with_eps(mut self, eps: Vec<T>) -> Self {
        self.eps_list = eps;
        self
    }

    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_null_tol(mut self, t: T) -> Self {
        self.null_tol = Some(t);
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return input("scale N must be positive");
        }
        if self.m_max == 0 {
            return input("m_max must be positive");
        }
        if self.eps_list.is_empty() || self.eps_list.iter().any(|e| !(*e > T::zero())) {
            return input("eps_list must be non-empty and positive");
        }
        if !(self.window_fraction > T::zero() && self.window_fraction <= T::one()) {
            return input("window_fraction must lie in (0, 1]");
        }
        if !(self.tol >= T::zero()) {
            return input("tol must be nonnegative");
        }
        Ok(())
    }

    pub fn min_eps(&self) -> T {
        min_of(self.eps_list.iter().copied()).unwrap_or(T::one())
    }

    pub fn max_eps(&self) -> T {
        max_of(self.eps_list.iter().copied()).unwrap_or(T::one())
    }

    /// Threshold below which a nonnegative sequence counts as null on a window.
    pub fn null_threshold(&self) -> T {
        self.null_tol.unwrap_or_else(|| self.min_eps())
    }

    /// Largest index outside the deepest tail window for a prefix of length `len`.
    pub fn deepest_level(&self, len: usize) -> usize {
        let keep = (self.window_fraction * T::of_usize(len)).floor().to_usize().unwrap_or(0);
        len - keep.min(len)
    }
}

/// Powers of two from 1 down to the last one not below N^(-1/3).
pub fn default_eps_list<T: Scalar>(n: usize) -> Vec<T> {
    let floor = (n.max(1) as f64).powf(-1.0 / 3.0);
    let mut out = vec![T::one()];
    let mut e = 0.5;
    while e >= floor {
        out.push(T::of(e));
        e *= 0.5;
    }
    out
}
