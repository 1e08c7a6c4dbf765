use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ideal::{DerivedIdeal, IdealHandle};
use crate::matrix::{MatrixRef, Shifted};
use crate::scalar::Scalar;

/// Indexed family (B_i)_{i ∈ S} with S a finite list or ℕ₀ truncated at i_max.
#[derive(Clone)]
pub struct MatrixFamily<T: Scalar> {
    members: Vec<MatrixRef<T>>,
    pub label: String,
    nonnegative: bool,
    plus_witness: Option<usize>,
    pub index_note: String,
}

/// Pointwise sup and inf over members, rows 1..=rows.
#[derive(Clone, Debug)]
pub struct Envelope<T> {
    pub sup: Vec<T>,
    pub inf: Vec<T>,
    pub arg_sup: Vec<usize>,
    pub arg_inf: Vec<usize>,
}

impl<T: Scalar> MatrixFamily<T> {
    pub fn new(label: impl Into<String>, members: Vec<MatrixRef<T>>) -> Self {
        let nonnegative = !members.is_empty() && members.iter().all(|m| m.is_nonnegative());
        let n = members.len();
        MatrixFamily {
            members,
            label: label.into(),
            nonnegative,
            plus_witness: None,
            index_note: format!("finite index set of size {n}"),
        }
    }

    pub fn single(m: MatrixRef<T>) -> Self {
        let label = m.label();
        MatrixFamily::new(label, vec![m])
    }

    pub fn members(&self) -> &[MatrixRef<T>] {
        &self.members
    }

    pub fn member(&self, i: usize) -> &MatrixRef<T> {
        &self.members[i]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    pub fn plus_witness(&self) -> Option<usize> {
        self.plus_witness
    }

    pub(crate) fn set_plus_witness(&mut self, i: Option<usize>) {
        self.plus_witness = i;
    }

    pub fn is_lower_triangular(&self) -> bool {
        self.members.iter().all(|m| m.is_lower_triangular())
    }

    /// Rows evaluable for every member from a prefix of length `len`.
    pub fn horizon(&self, len: usize) -> usize {
        self.members.iter().map(|m| m.evaluable_rows(len)).min().unwrap_or(0)
    }

    /// Folds per-member row vectors into sup/inf envelopes.
    pub fn fold(&self, rows: usize, mut f: impl FnMut(usize, &MatrixRef<T>) -> Vec<T>) -> Envelope<T> {
        let mut env = Envelope {
            sup: vec![T::neg_infinity(); rows],
            inf: vec![T::infinity(); rows],
            arg_sup: vec![0; rows],
            arg_inf: vec![0; rows],
        };
        for (i, m) in self.members.iter().enumerate() {
            let v = f(i, m);
            for n in 0..rows {
                let x = v[n];
                if x > env.sup[n] || i == 0 {
                    env.sup[n] = x;
                    env.arg_sup[n] = i;
                }
                if x < env.inf[n] || i == 0 {
                    env.inf[n] = x;
                    env.arg_inf[n] = i;
                }
            }
        }
        env
    }

    pub fn envelope(&self, x: &[T], rows: usize) -> Envelope<T> {
        self.fold(rows, |_, m| m.apply_rows(x, rows))
    }

    /// sup_i (B_i x)_n for n = 1..=rows.
    pub fn sup_apply(&self, x: &[T], rows: usize) -> Vec<T> {
        self.envelope(x, rows).sup
    }

    pub fn row_sums(&self, len: usize, rows: usize) -> Envelope<T> {
        let ones = vec![T::one(); len];
        self.envelope(&ones, rows)
    }

    pub fn abs_row_sums(&self, len: usize, rows: usize) -> Envelope<T> {
        if self.nonnegative {
            return self.row_sums(len, rows);
        }
        self.fold(rows, |_, m| (1..=rows).map(|n| m.row_abs_sum(n, len)).collect())
    }

    /// Largest truncation mass beyond `len` over members and rows 1..=rows.
    pub fn max_tail(&self, rows: usize, len: usize) -> T {
        let mut t = T::zero();
        for m in &self.members {
            if m.support_end(1).is_some() && (1..=rows).all(|n| m.support_end(n).is_some_and(|e| e <= len)) {
                continue;
            }
            for n in 1..=rows {
                t = t.max(m.tail_bound(n, len));
            }
        }
        t
    }

    /// Samples entries of the first rows and returns false on a negative one.
    pub fn verify_nonnegative(&self, rows: usize, cutoff: usize) -> bool {
        self.members.iter().all(|m| (1..=rows).all(|n| m.row(n, cutoff).iter().all(|e| e.1 >= T::zero())))
    }
}

/// Members b^(i)_nk = a_{n,k−i}, i = 0..=i_max.
pub fn build_shift_family<T: Scalar>(a: MatrixRef<T>, i_max: usize) -> MatrixFamily<T> {
    let label = format!("shifts of {} (i <= {i_max})", a.label());
    let members: Vec<MatrixRef<T>> =
        (0..=i_max).map(|i| Arc::new(Shifted { inner: a.clone(), shift: i }) as MatrixRef<T>).collect();
    let mut f = MatrixFamily::new(label, members);
    f.index_note = format!("N0 truncated at i_max = {i_max}");
    f
}

/// J_{B,I}. Refused unless the family is nonnegative and condition (+) has been verified.
pub fn derived_ideal<T: Scalar>(family: &MatrixFamily<T>, inner: &IdealHandle<T>) -> Result<IdealHandle<T>> {
    if !family.is_nonnegative() || !family.verify_nonnegative(16, 64) {
        return Err(Error::Refused(format!("{} is not nonnegative", family.label)));
    }
    let witness = family
        .plus_witness()
        .ok_or_else(|| Error::Refused(format!("condition (+) not verified for {}; N might belong to the ideal", family.label)))?;
    Ok(IdealHandle::Derived(Arc::new(DerivedIdeal { family: family.clone(), inner: inner.clone(), witness })))
}
