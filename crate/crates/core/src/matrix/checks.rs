use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::ideal::IdealHandle;
use crate::matrix::{merge_rows, MatrixFamily, SummabilityMatrix};
use crate::scalar::{ExtendedReal, Scalar};
use crate::scale::Scale;
use crate::sequence::SequencePrefix;
use crate::verdict::Verdict;

const PLUS_FLOOR: f64 = 1e-9;

/// Toeplitz conditions (i) bounded absolute row sums, (ii) row sums → 1, (iii) columns → 0.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ToeplitzReport<T> {
    pub bounded: Verdict<T>,
    pub row_sums: Verdict<T>,
    pub columns: Verdict<T>,
    pub sup_abs_row_sum: T,
    pub column_budget: usize,
}

impl<T: Scalar> ToeplitzReport<T> {
    pub fn all_hold(&self) -> bool {
        self.bounded.holds_at_scale() && self.row_sums.holds_at_scale() && self.columns.holds_at_scale()
    }

    /// Names of the conditions that do not hold.
    pub fn failing(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.bounded.holds_at_scale() {
            out.push("i");
        }
        if !self.row_sums.holds_at_scale() {
            out.push("ii");
        }
        if !self.columns.holds_at_scale() {
            out.push("iii");
        }
        out
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConsistencyReport<T> {
    /// sup of absolute row sums over rows outside the chosen ideal set.
    pub bounded_rows: Verdict<T>,
    pub m_bound: T,
    pub probes_vanish: Verdict<T>,
    pub row_sums: Verdict<T>,
}

impl<T: Scalar> ConsistencyReport<T> {
    pub fn all_hold(&self) -> bool {
        self.bounded_rows.holds_at_scale() && self.probes_vanish.holds_at_scale() && self.row_sums.holds_at_scale()
    }
}

fn abs_row_sums<T: Scalar>(m: &dyn SummabilityMatrix<T>, len: usize, rows: usize) -> Vec<T> {
    if m.is_nonnegative() {
        return m.apply_rows(&vec![T::one(); len], rows);
    }
    (1..=rows).map(|n| m.row_abs_sum(n, len)).collect()
}

/// Condition (+): some candidate i₀ has inf_n Σ_k |b_nk^(i₀)| ≥ 1e-9 over the horizon.
/// Records the witness on the family when it passes.
pub fn check_condition_plus<T: Scalar>(family: &mut MatrixFamily<T>, candidates: &[usize], scale: &Scale<T>) -> Verdict<T> {
    let h = family.horizon(scale.n);
    if h == 0 {
        family.set_plus_witness(None);
        return Verdict::inconclusive(scale, "no evaluable rows");
    }
    let floor = T::of(PLUS_FLOOR);
    let mut best: Option<(T, usize, usize)> = None;
    for &i in candidates.iter().filter(|&&i| i < family.len()) {
        let sums = abs_row_sums(family.member(i).as_ref(), scale.n, h);
        let (arg, inf) = sums.iter().enumerate().fold((0, T::infinity()), |acc, (j, &v)| if v < acc.1 { (j, v) } else { acc });
        if inf >= floor {
            family.set_plus_witness(Some(i));
            return Verdict::holds(ExtendedReal::Finite(inf), T::zero(), scale)
                .with_note(format!("witness i0 = {i}"));
        }
        if best.is_none_or(|b| inf > b.0) {
            best = Some((inf, i, arg + 1));
        }
    }
    family.set_plus_witness(None);
    match best {
        Some((inf, _, row)) => Verdict::fails(ExtendedReal::Finite(inf), floor - inf, scale, vec![row]),
        None => Verdict::inconclusive(scale, "no candidate index within the family"),
    }
}

fn window_estimate<T: Scalar>(v: &[T], scale: &Scale<T>) -> T {
    let i = IdealHandle::<T>::Finite;
    match (i.limsup(v, scale).ok().and_then(|x| x.finite()), i.liminf(v, scale).ok().and_then(|x| x.finite())) {
        (Some(h), Some(l)) => (h + l) * T::of(0.5),
        _ => T::nan(),
    }
}

/// Toeplitz conditions evaluated on rows 1..=N.
pub fn check_toeplitz_regularity<T: Scalar>(a: &dyn SummabilityMatrix<T>, scale: &Scale<T>) -> Result<ToeplitzReport<T>> {
    scale.validate()?;
    let n = scale.n;
    let ends: Vec<usize> = (1..=n).map(|r| a.support_end(r).unwrap_or(n)).collect();
    let mut abs = Vec::with_capacity(n);
    let mut sums = Vec::with_capacity(n);
    let mut tails = Vec::with_capacity(n);
    for r in 1..=n {
        let end = ends[r - 1];
        let t = if a.support_end(r).is_none() { a.tail_bound(r, n) } else { T::zero() };
        abs.push(a.row_abs_sum(r, end) + t);
        sums.push(a.row_sum(r, end));
        tails.push(t);
    }

    let half = n / 2;
    let (first, last) = abs.split_at(half.max(1).min(n));
    let m_first = first.iter().fold(T::zero(), |m, &x| m.max(x));
    let m_last = last.iter().fold(T::zero(), |m, &x| m.max(x));
    let sup = m_first.max(m_last);
    let growing = m_last > m_first * (T::one() + scale.tol) + scale.tol;
    let arg = (1..=n).rev().max_by(|&x, &y| crate::scalar::total_cmp(&abs[x - 1], &abs[y - 1])).unwrap_or(1);
    let bounded = Verdict::from_test(!growing, ExtendedReal::Finite(sup), (m_last - m_first).max(T::zero()), scale, vec![arg])
        .with_note(format!("max abs row sum {m_first} on first half, {m_last} on second half"));

    let dev: Vec<T> = sums.iter().zip(&tails).map(|(&s, &t)| (s - T::one()).abs() + t).collect();
    let row_sums = IdealHandle::Finite.null_test(&dev, scale)?.verdict(window_estimate(&sums, scale), scale);

    let cols = 128.min(n / 4).max(1);
    let colmax: Vec<T> =
        (1..=n).map(|r| a.row(r, cols).iter().fold(T::zero(), |m, e| m.max(e.1.abs()))).collect();
    let columns = IdealHandle::Finite.null_test(&colmax, scale)?.verdict(T::zero(), scale);

    Ok(ToeplitzReport { bounded, row_sums, columns, sup_abs_row_sum: sup, column_budget: cols })
}

/// Consistency conditions for a based ideal I: bounded absolute row sums outside the
/// deepest probed base set, vanishing mass on probe sets, row sums tending to 1.
pub fn check_consistency_conditions<T: Scalar>(
    family: &MatrixFamily<T>,
    ideal: &IdealHandle<T>,
    probes: &[SequencePrefix<T>],
    scale: &Scale<T>,
) -> Result<ConsistencyReport<T>> {
    scale.validate()?;
    let base = ideal
        .base()
        .ok_or_else(|| Error::Capability("consistency conditions need an ideal given by a filter base".into()))?;
    let len = scale.n;
    let h = family.horizon(len);
    if h == 0 {
        return Err(Error::Capability(format!("no evaluable rows of {} within N = {len}", family.label)));
    }
    let rs = scale.clone().with_n(h);
    let deepest = base.deepest(h, &rs);

    let abs = family.abs_row_sums(len, h);
    let mut m = T::zero();
    let mut arg = 1;
    for r in 1..=h {
        if base.in_complement(deepest, r) && abs.sup[r - 1] > m {
            m = abs.sup[r - 1];
            arg = r;
        }
    }
    let m = m + family.max_tail(h, len);
    let bounded_rows = Verdict::from_test(m.is_finite(), ExtendedReal::Finite(m), T::zero(), scale, vec![arg]);

    let mut probes_vanish = Verdict::holds(ExtendedReal::Finite(T::zero()), T::zero(), scale);
    if probes.is_empty() {
        probes_vanish = probes_vanish.with_note("vacuous: no probes supplied");
    }
    for (j, p) in probes.iter().enumerate() {
        p.require_len(len)?;
        let x = &p.values()[..len];
        let support: Vec<bool> = x.iter().map(|v| *v != T::zero()).collect();
        if !ideal.membership(&support, scale)?.is_member() {
            return input(format!("probe {j} is not supported on a member of {}", ideal.label()));
        }
        let env = family.envelope(x, h);
        let w: Vec<T> = env.sup.iter().zip(&env.inf).map(|(a, b)| a.abs().max(b.abs())).collect();
        let v = ideal.null_test(&w, &rs)?.verdict(T::zero(), scale);
        if !v.holds_at_scale() || v.residual > probes_vanish.residual {
            let fail = !v.holds_at_scale();
            probes_vanish = v.with_note(format!("worst probe {j}"));
            if fail {
                break;
            }
        }
    }

    let sums = family.row_sums(len, h);
    let w: Vec<T> = sums.sup.iter().zip(&sums.inf).map(|(a, b)| (*a - T::one()).abs().max((*b - T::one()).abs())).collect();
    let row_sums = ideal.null_test(&w, &rs)?.verdict(T::one(), scale);

    Ok(ConsistencyReport { bounded_rows, m_bound: m, probes_vanish, row_sums })
}

/// sup_i Σ_k |a_nk^(i) − b_nk^(i)| → 0 along I.
pub fn families_agree<T: Scalar>(
    a: &MatrixFamily<T>,
    b: &MatrixFamily<T>,
    ideal: &IdealHandle<T>,
    scale: &Scale<T>,
) -> Result<Verdict<T>> {
    scale.validate()?;
    if a.len() != b.len() {
        return input(format!("index sets differ: {} vs {} members", a.len(), b.len()));
    }
    let len = scale.n;
    let h = a.horizon(len).min(b.horizon(len));
    if h == 0 {
        return Err(Error::Capability("no evaluable rows".into()));
    }
    let rs = scale.clone().with_n(h);
    let rows: Vec<usize> = match ideal.base() {
        Some(base) => {
            let d = base.deepest(h, &rs);
            (1..=h).filter(|&r| base.in_complement(d, r)).collect()
        }
        None => (1..=h).collect(),
    };
    let mut w = vec![T::zero(); h];
    for (ma, mb) in a.members().iter().zip(b.members()) {
        for &r in &rows {
            let end = ma.support_end(r).unwrap_or(len).max(mb.support_end(r).unwrap_or(len)).min(len);
            let tail = ma.tail_bound(r, end) + mb.tail_bound(r, end);
            let d = merge_rows(&ma.row(r, end), &mb.row(r, end), |x, y| x - y).iter().fold(T::zero(), |acc, e| acc + e.1.abs());
            w[r - 1] = w[r - 1].max(d + tail);
        }
    }
    Ok(ideal.null_test(&w, &rs)?.verdict(T::zero(), scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{build_shift_family, Cesaro, Identity, MatrixRef, Perturbed, RowFn, Scaled};
    use std::sync::Arc;

    fn cesaro() -> MatrixRef<f64> {
        Arc::new(Cesaro)
    }

    #[test]
    fn plus_examples() {
        let s: Scale<f64> = Scale::new(500);
        let mut f = build_shift_family(cesaro(), 8);
        let v = check_condition_plus(&mut f, &[0], &s);
        assert!(v.holds_at_scale());
        assert!((v.estimate.to_scalar() - 1.0).abs() < 1e-12);
        assert_eq!(f.plus_witness(), Some(0));

        let zero: MatrixRef<f64> = Arc::new(Scaled { inner: cesaro(), factor: 0.0 });
        let mut z = MatrixFamily::single(zero);
        assert!(check_condition_plus(&mut z, &[0], &s).fails_at_scale());
        assert_eq!(z.plus_witness(), None);

        let mut id = MatrixFamily::single(Arc::new(Identity) as MatrixRef<f64>);
        let v = check_condition_plus(&mut id, &[0], &s);
        assert!(v.holds_at_scale());
        assert_eq!(v.estimate.to_scalar(), 1.0);
    }

    #[test]
    fn toeplitz_fixtures() {
        let s: Scale<f64> = Scale::new(2000);
        let r = check_toeplitz_regularity(&Cesaro, &s).unwrap();
        assert!(r.all_hold(), "{r:?}");

        let grow: RowFn<f64> = RowFn::diagonal("diag n", |n| n as f64);
        let r = check_toeplitz_regularity(&grow, &s).unwrap();
        assert!(r.bounded.fails_at_scale());
        assert!(r.row_sums.fails_at_scale());
        assert!(r.columns.holds_at_scale());

        let two = Scaled { inner: cesaro(), factor: 2.0 };
        let r = check_toeplitz_regularity(&two, &s).unwrap();
        assert_eq!(r.failing(), vec!["ii"]);

        let bidiag: RowFn<f64> = RowFn::banded(
            "bidiag",
            |n, k| if k == n { (n + 1) as f64 } else if k == n + 1 { -(n as f64) } else { 0.0 },
            |n| n,
            |n| n + 1,
            false,
        );
        let r = check_toeplitz_regularity(&bidiag, &s).unwrap();
        assert_eq!(r.failing(), vec!["i"], "{r:?}");
    }

    #[test]
    fn consistency_examples() {
        let s: Scale<f64> = Scale::new(2000).with_i_max(16);
        let f = build_shift_family(cesaro(), 16);
        let probe = SequencePrefix::from_fn(2000, |k| if k <= 10 { 1.0 } else { 0.0 });
        let r = check_consistency_conditions(&f, &IdealHandle::Finite, &[probe], &s).unwrap();
        assert!(r.all_hold(), "{r:?}");
        assert!((r.m_bound - 1.0).abs() < 1e-12);
        // horizon 1984, window (992, 1984]
        assert!((r.probes_vanish.residual - 10.0 / 993.0).abs() < 1e-12);

        let r = check_consistency_conditions(&f, &IdealHandle::Finite, &[], &s).unwrap();
        assert!(r.probes_vanish.holds_at_scale());
        assert!(r.probes_vanish.notes.iter().any(|n| n.contains("vacuous")));

        let two = MatrixFamily::single(Arc::new(Scaled { inner: cesaro(), factor: 2.0 }) as MatrixRef<f64>);
        let r = check_consistency_conditions(&two, &IdealHandle::Finite, &[], &s).unwrap();
        assert!(r.row_sums.fails_at_scale());

        let evens = SequencePrefix::from_fn(2000, |k| (k % 2 == 0) as u8 as f64);
        assert!(matches!(check_consistency_conditions(&f, &IdealHandle::Finite, &[evens], &s), Err(Error::Input(_))));
    }

    #[test]
    fn agreement_examples() {
        let s: Scale<f64> = Scale::new(1000).with_i_max(4);
        let a = build_shift_family(cesaro(), 4);
        assert_eq!(families_agree(&a, &a, &IdealHandle::Finite, &s).unwrap().residual, 0.0);

        let pert: MatrixRef<f64> = Arc::new(Perturbed {
            base: cesaro(),
            delta: Arc::new(RowFn::diagonal("1/n^2", |n| 1.0 / (n * n) as f64)),
        });
        let b = build_shift_family(pert, 4);
        let v = families_agree(&a, &b, &IdealHandle::Finite, &s).unwrap();
        assert!(v.holds_at_scale());
        // horizon 996, window (498, 996]
        assert!((v.residual - 1.0 / (499.0 * 499.0)).abs() < 1e-15);

        let twice = build_shift_family(Arc::new(Scaled { inner: cesaro(), factor: 2.0 }) as MatrixRef<f64>, 4);
        let v = families_agree(&a, &twice, &IdealHandle::Finite, &s).unwrap();
        assert!(v.fails_at_scale());
        assert!((v.residual - 1.0).abs() < 1e-12);

        let short = build_shift_family(cesaro(), 2);
        assert!(matches!(families_agree(&a, &short, &IdealHandle::Finite, &s), Err(Error::Input(_))));
    }
}
