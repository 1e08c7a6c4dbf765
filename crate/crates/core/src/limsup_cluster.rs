//! Ideal limsup under matrix action, the limsup criterion for statistical convergence and
//! cluster points with respect to derived ideals.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::ideal::IdealHandle;
use crate::matrix::{check_condition_plus, derived_ideal, MatrixFamily, MatrixRef};
use crate::orlicz::{lower_envelope, GaugeFamily};
use crate::scalar::{ExtendedReal, Scalar};
use crate::scale::Scale;
use crate::sequence::{indicator, IndexSet, SequencePrefix};
use crate::summability::{b_summable, statistically_convergent, ConvergenceRequest};
use crate::verdict::{TheoremReport, Verdict};

/// Margin that makes the strict inequality "< 1" of the cluster criterion decidable.
pub const CLUSTER_MARGIN: f64 = 1e-6;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LimsupReport<T> {
    pub report: TheoremReport<T>,
    /// I-limsup As and J-limsup s.
    pub lhs: ExtendedReal<T>,
    pub rhs: ExtendedReal<T>,
    /// I-liminf As and J-liminf s.
    pub lhs_inf: ExtendedReal<T>,
    pub rhs_inf: ExtendedReal<T>,
}

/// Default sets known to lie in J: a finite set, the squares and the powers of two.
pub fn default_probes(n: usize) -> Vec<(String, Vec<bool>)> {
    let pow2 = IndexSet::predicate("powers of two", |k| k.is_power_of_two());
    vec![
        ("finite set {1..10}".to_string(), (1..=n).map(|k| k <= 10).collect()),
        ("squares".to_string(), IndexSet::squares().mask(n)),
        ("powers of two".to_string(), pow2.mask(n)),
    ]
}

fn rel_gap<T: Scalar>(hi: ExtendedReal<T>, lo: ExtendedReal<T>) -> T {
    match (hi.finite(), lo.finite()) {
        (Some(h), Some(l)) => h - l,
        _ => match (hi, lo) {
            (ExtendedReal::NegInf, _) | (_, ExtendedReal::PosInf) => T::neg_infinity(),
            _ => T::infinity(),
        },
    }
}

/// I-limsup As ≤ J-limsup s and the liminf mirror. Signed matrices are accepted.
pub fn matrix_limsup_inequality<T: Scalar>(
    a: MatrixRef<T>,
    i_ideal: &IdealHandle<T>,
    j_ideal: &IdealHandle<T>,
    s: &SequencePrefix<T>,
    scale: &Scale<T>,
) -> Result<LimsupReport<T>> {
    scale.validate()?;
    s.require_len(scale.n)?;
    if !s.is_bounded() {
        return input("the limsup inequality is stated for bounded sequences");
    }
    let len = scale.n;
    let x = &s.values()[..len];
    let fam = MatrixFamily::single(a.clone());
    let h = fam.horizon(len);
    if h == 0 {
        return Err(Error::Capability(format!("no evaluable rows of {} within N = {len}", a.label())));
    }
    let rs = scale.clone().with_n(h);
    let mut report = TheoremReport::new("matrix limsup inequality");

    let abs: Vec<T> = (1..=h).map(|n| a.row_abs_sum(n, len) + a.tail_bound(n, len)).collect();
    let worst = abs.iter().fold(T::zero(), |m, &v| m.max(v));
    let bad: Vec<usize> = (1..=h).filter(|&n| !abs[n - 1].is_finite()).collect();
    report.push("absolute row sums finite", Verdict::from_test(bad.is_empty(), ExtendedReal::Finite(worst), T::zero(), scale, bad));

    let dev: Vec<T> = (1..=h).map(|n| (abs[n - 1] - T::one()).abs().max((a.row_sum(n, len) - T::one()).abs())).collect();
    report.push("row sums and absolute row sums tend to 1", i_ideal.null_test(&dev, &rs)?.verdict(T::one(), scale));

    let mut worst = T::zero();
    let mut failed = None;
    for (name, mask) in default_probes(len) {
        if !j_ideal.membership(&mask, scale)?.is_member() {
            report.notes.push(format!("probe {name} is not in J at this scale and was skipped"));
            continue;
        }
        let w: Vec<T> = (1..=h).map(|n| a.row(n, len).iter().filter(|e| mask[e.0 - 1]).map(|e| e.1.abs()).sum()).collect();
        let t = i_ideal.null_test(&w, &rs)?;
        worst = worst.max(t.residual);
        if !t.holds && failed.is_none() {
            failed = Some(t.verdict(T::zero(), scale).with_note(format!("mass on {name} does not vanish")));
        }
    }
    report.push("members of J carry vanishing mass", failed.unwrap_or_else(|| Verdict::holds(ExtendedReal::Finite(T::zero()), worst, scale)));

    let ax = a.apply_rows(x, h);
    let lhs = i_ideal.limsup(&ax, &rs)?;
    let rhs = j_ideal.limsup(x, scale)?;
    let lhs_inf = i_ideal.liminf(&ax, &rs)?;
    let rhs_inf = j_ideal.liminf(x, scale)?;
    let err = a.tail_bound(h, len) * s.sup_abs();
    let excess = rel_gap(lhs, rhs).max(rel_gap(rhs_inf, lhs_inf)) - err;
    report.quantity("excess", excess);
    if let Some(v) = lhs.finite() {
        report.quantity("lhs", v);
    }
    if let Some(v) = rhs.finite() {
        report.quantity("rhs", v);
    }

    if report.hypotheses_hold() {
        let relaxable = matches!(i_ideal, IdealHandle::Derived(_)) || matches!(j_ideal, IdealHandle::Derived(_));
        let verdict = if excess <= scale.tol {
            Verdict::holds(lhs, excess.max(T::zero()), scale)
        } else if relaxable && excess <= scale.min_eps() {
            Verdict::holds(lhs, excess, scale).with_note("excess within the scale resolution of the derived ideal")
        } else {
            let w = (1..=h).rev().max_by(|&p, &q| crate::scalar::total_cmp(&ax[p - 1], &ax[q - 1])).unwrap_or(h);
            Verdict::fails(lhs, excess, scale, vec![w])
        };
        report.conclude(verdict);
    } else {
        report.notes.push(format!("no claim: {} failed", report.failed_hypotheses().join(", ")));
    }
    Ok(LimsupReport { report, lhs, rhs, lhs_inf, rhs_inf })
}

/// J_{B,I} after verifying condition (+).
pub fn checked_derived_ideal<T: Scalar>(family: &MatrixFamily<T>, ideal: &IdealHandle<T>, scale: &Scale<T>) -> Result<(MatrixFamily<T>, IdealHandle<T>)> {
    let mut fam = family.clone();
    let candidates: Vec<usize> = (0..fam.len()).collect();
    let plus = check_condition_plus(&mut fam, &candidates, scale);
    if !plus.holds_at_scale() {
        return Err(Error::Refused(format!("condition (+) fails for {}", fam.label)));
    }
    let j = derived_ideal(&fam, ideal)?;
    Ok((fam, j))
}

pub(crate) fn uniform_row_sums<T: Scalar>(family: &MatrixFamily<T>, ideal: &IdealHandle<T>, scale: &Scale<T>) -> Result<Verdict<T>> {
    let h = family.horizon(scale.n);
    let sums = family.row_sums(scale.n, h);
    let tail = family.max_tail(h, scale.n);
    let dev: Vec<T> = sums.sup.iter().zip(&sums.inf).map(|(&u, &l)| (u - T::one()).abs().max((l - T::one()).abs()) + tail).collect();
    Ok(ideal.null_test(&dev, &scale.clone().with_n(h))?.verdict(T::one(), scale))
}

/// Summable to a and J-limsup (or J-liminf) equal to a force statistical convergence to a.
pub fn limsup_implies_statistical<T: Scalar>(
    s: &SequencePrefix<T>,
    family: &MatrixFamily<T>,
    ideal: &IdealHandle<T>,
    a: T,
    scale: &Scale<T>,
) -> Result<TheoremReport<T>> {
    scale.validate()?;
    s.require_len(scale.n)?;
    if !family.is_nonnegative() {
        return input(format!("{} has negative entries", family.label));
    }
    let (fam, j) = checked_derived_ideal(family, ideal, scale)?;
    let x = &s.values()[..scale.n];
    let mut report = TheoremReport::new("limsup implies statistical");
    report.push(
        "s bounded",
        Verdict::from_test(s.is_bounded(), ExtendedReal::Finite(s.sup_abs()), T::zero(), scale, vec![1]),
    );
    report.push("row sums tend to 1 uniformly", uniform_row_sums(&fam, ideal, scale)?);
    let req = ConvergenceRequest::new(s.clone(), fam, ideal.clone(), scale.clone()).with_target(a);
    report.push("summable to a", b_summable(&req)?);
    let ls = j.limsup(x, scale)?;
    let li = j.liminf(x, scale)?;
    let near = |v: ExtendedReal<T>| v.finite().map_or(T::infinity(), |v| (v - a).abs());
    let gap = near(ls).min(near(li));
    let arg = (1..=scale.n).rev().max_by(|&p, &q| crate::scalar::total_cmp(&(x[p - 1] - a).abs(), &(x[q - 1] - a).abs())).unwrap_or(1);
    report.push(
        "J-limsup or J-liminf equals a",
        Verdict::from_test(gap <= scale.min_eps(), ls, gap, scale, vec![arg])
            .with_note(format!("J-limsup {ls:?}, J-liminf {li:?}")),
    );
    if report.hypotheses_hold() {
        report.conclude(statistically_convergent(&req)?);
    } else {
        report.notes.push(format!("no claim: {} failed", report.failed_hypotheses().join(", ")));
    }
    Ok(report)
}

/// I-liminf of inf_i Σ_k b_nk^(i) χ_D(s,a,ε)(k) for each ε.
pub fn cluster_criterion<T: Scalar>(
    s: &SequencePrefix<T>,
    family: &MatrixFamily<T>,
    ideal: &IdealHandle<T>,
    a: T,
    eps_list: &[T],
    scale: &Scale<T>,
) -> Result<Vec<(T, ExtendedReal<T>)>> {
    scale.validate()?;
    s.require_len(scale.n)?;
    if !family.is_nonnegative() {
        return input(format!("{} has negative entries", family.label));
    }
    let x = &s.values()[..scale.n];
    let h = family.horizon(scale.n);
    if h == 0 {
        return Err(Error::Capability(format!("no evaluable rows of {} within N = {}", family.label, scale.n)));
    }
    let rs = scale.clone().with_n(h);
    let tail = family.max_tail(h, scale.n);
    eps_list
        .iter()
        .map(|&eps| {
            let mask: Vec<bool> = x.iter().map(|&v| (v - a).abs() >= eps).collect();
            let d: Vec<T> = family.envelope(&indicator::<T>(&mask), h).inf.into_iter().map(|v| v + tail).collect();
            Ok((eps, ideal.liminf(&d, &rs)?))
        })
        .collect()
}

/// a is a J_{B,I}-cluster point iff the criterion is below 1 − margin for every ε.
pub fn jbi_cluster_point<T: Scalar>(
    s: &SequencePrefix<T>,
    family: &MatrixFamily<T>,
    ideal: &IdealHandle<T>,
    a: T,
    eps_list: &[T],
    scale: &Scale<T>,
) -> Result<Verdict<T>> {
    let rows = uniform_row_sums(family, ideal, scale)?;
    let values = cluster_criterion(s, family, ideal, a, eps_list, scale)?;
    let bar = T::one() - T::of(CLUSTER_MARGIN);
    let mut worst = T::neg_infinity();
    for &(eps, v) in &values {
        let v = v.finite().unwrap_or(T::infinity());
        worst = worst.max(v);
        if v >= bar {
            let mut out = Verdict::fails(ExtendedReal::Finite(v), v - bar, scale, vec![scale.n])
                .with_note(format!("criterion {v} at eps = {eps}"));
            if !rows.holds_at_scale() {
                out = out.with_note("row sums do not tend to 1 uniformly; the criterion is not a characterization here");
            }
            return Ok(out);
        }
    }
    let mut out = Verdict::holds(ExtendedReal::Finite(worst), worst, scale);
    if !rows.holds_at_scale() {
        out = out.with_note("row sums do not tend to 1 uniformly; the criterion is not a characterization here");
    }
    Ok(out)
}

/// Gauge version: a positive lower envelope and I-liminf inf_i Σ b F(|s_k − a|) = 0 make
/// a a J_{B,I}-cluster point.
pub fn cluster_gauge_sufficient<T: Scalar>(
    s: &SequencePrefix<T>,
    family: &MatrixFamily<T>,
    gauges: &GaugeFamily<T>,
    ideal: &IdealHandle<T>,
    a: T,
    scale: &Scale<T>,
) -> Result<TheoremReport<T>> {
    scale.validate()?;
    s.require_len(scale.n)?;
    if !family.is_nonnegative() {
        return input(format!("{} has negative entries", family.label));
    }
    let mut report = TheoremReport::new("gauge cluster criterion");
    for &eps in &scale.eps_list {
        let lo = lower_envelope(gauges, eps, scale)?;
        if lo.degenerate {
            return Err(Error::Refused(format!("lower envelope of {} vanishes at t = {eps}", gauges.label)));
        }
    }
    report.push("lower envelope positive", Verdict::holds(ExtendedReal::Finite(T::zero()), T::zero(), scale));
    let x = &s.values()[..scale.n];
    let h = family.horizon(scale.n);
    if h == 0 {
        return Err(Error::Capability(format!("no evaluable rows of {} within N = {}", family.label, scale.n)));
    }
    let rs = scale.clone().with_n(h);
    let env = family.fold(h, |i, m| {
        let y: Vec<T> = x.iter().enumerate().map(|(k, &v)| gauges.eval(k + 1, i, (v - a).abs())).collect();
        m.apply_rows(&y, h)
    });
    let li = ideal.liminf(&env.inf, &rs)?;
    let v = li.finite().unwrap_or(T::infinity());
    report.quantity("liminf", v);
    let arg = (1..=h).rev().max_by(|&p, &q| crate::scalar::total_cmp(&env.inf[p - 1], &env.inf[q - 1])).unwrap_or(h);
    report.push("gauge liminf vanishes", Verdict::from_test(v <= scale.null_threshold(), li, v, scale, vec![arg]));
    if report.hypotheses_hold() {
        report.conclude(jbi_cluster_point(s, family, ideal, a, &scale.eps_list, scale)?);
    } else {
        report.notes.push(format!("no claim: {} failed", report.failed_hypotheses().join(", ")));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Cesaro;
    use crate::sequence::is_square;
    use crate::verdict::Status;
    use std::sync::Arc;

    fn cesaro() -> MatrixFamily<f64> {
        MatrixFamily::single(Arc::new(Cesaro))
    }

    fn alternating(n: usize) -> SequencePrefix<f64> {
        SequencePrefix::from_fn(n, |k| if k % 2 == 0 { 1.0 } else { -1.0 })
    }

    fn squares(n: usize) -> SequencePrefix<f64> {
        SequencePrefix::from_fn(n, |k| if is_square(k) { 1.0 } else { 0.0 })
    }

    #[test]
    fn limsup_inequality_examples() {
        let sc: Scale<f64> = Scale::new(1000).with_tol(1e-9);
        let f = IdealHandle::Finite;
        let r = matrix_limsup_inequality(Arc::new(Cesaro), &f, &f, &alternating(1000), &sc).unwrap();
        assert_eq!(r.rhs, ExtendedReal::Finite(1.0));
        assert_eq!(r.rhs_inf, ExtendedReal::Finite(-1.0));
        // means over (500, 1000] are 0 or -1/n
        assert!(r.lhs.to_scalar().abs() <= 1.0 / 501.0 + 1e-15);
        assert_eq!(r.report.status(), Status::HoldsAtScale);

        let c = SequencePrefix::from_fn(1000, |_| 0.7);
        let r = matrix_limsup_inequality(Arc::new(Cesaro), &f, &f, &c, &sc).unwrap();
        assert!((r.lhs.to_scalar() - 0.7).abs() < 1e-12 && r.rhs == ExtendedReal::Finite(0.7));
        assert_eq!(r.report.status(), Status::HoldsAtScale);
    }

    #[test]
    fn limsup_inequality_derived_rhs() {
        let n = 4000;
        let sc: Scale<f64> = Scale::new(n);
        let (_, j) = checked_derived_ideal(&cesaro(), &IdealHandle::Finite, &sc).unwrap();
        let r = matrix_limsup_inequality(Arc::new(Cesaro), &IdealHandle::Finite, &j, &squares(n), &sc).unwrap();
        assert_eq!(r.rhs, ExtendedReal::Finite(0.0));
        // Cesàro means of the squares over the window are at most sqrt(n)/n
        assert!(r.lhs.to_scalar() <= (2001f64).sqrt() / 2001.0 + 1e-12);
        assert_eq!(r.report.status(), Status::HoldsAtScale, "{:?}", r.report);
    }

    #[test]
    fn limsup_statistical_examples() {
        let n = 4000;
        let sc: Scale<f64> = Scale::new(n);
        let r = limsup_implies_statistical(&squares(n), &cesaro(), &IdealHandle::Finite, 0.0, &sc).unwrap();
        assert!(r.hypotheses_hold(), "{:?}", r.failed_hypotheses());
        assert_eq!(r.status(), Status::HoldsAtScale);

        let r = limsup_implies_statistical(&alternating(n), &cesaro(), &IdealHandle::Finite, 0.0, &sc).unwrap();
        assert_eq!(r.failed_hypotheses(), vec!["J-limsup or J-liminf equals a"]);
        assert!(r.conclusion.is_none());

        let c = SequencePrefix::from_fn(n, |_| 2.5);
        let r = limsup_implies_statistical(&c, &cesaro(), &IdealHandle::Finite, 2.5, &sc).unwrap();
        assert_eq!(r.status(), Status::HoldsAtScale);
    }

    #[test]
    fn cluster_examples() {
        let n = 2000;
        let sc: Scale<f64> = Scale::new(n);
        let eps = vec![0.5, 0.1];
        let f = IdealHandle::Finite;
        let vals = cluster_criterion(&alternating(n), &cesaro(), &f, 1.0, &eps, &sc).unwrap();
        for (_, v) in &vals {
            // densities of the odd numbers over (1000, 2000]: min is 1000/2000 at even n
            assert!((v.to_scalar() - 0.5).abs() < 1e-3);
        }
        assert!(jbi_cluster_point(&alternating(n), &cesaro(), &f, 1.0, &eps, &sc).unwrap().holds_at_scale());
        let c = SequencePrefix::from_fn(n, |_| 3.0);
        let v = jbi_cluster_point(&c, &cesaro(), &f, 3.0, &eps, &sc).unwrap();
        assert!(v.holds_at_scale() && v.residual == 0.0);
        let v = jbi_cluster_point(&c, &cesaro(), &f, 4.0, &eps, &sc).unwrap();
        assert!(v.fails_at_scale());
        assert_eq!(v.estimate, ExtendedReal::Finite(1.0));
    }

    #[test]
    fn gauge_cluster_examples() {
        let n = 4000;
        let sc: Scale<f64> = Scale::new(n);
        let id = GaugeFamily::identity();
        let f = IdealHandle::Finite;
        let evens = SequencePrefix::from_fn(n, |k| if k % 2 == 0 { 0.0 } else { 1.0 });
        let r = cluster_gauge_sufficient(&evens, &cesaro(), &id, &f, 0.0, &sc).unwrap();
        assert!(r.conclusion.is_none());
        assert!((r.quantities["liminf"] - 0.5).abs() < 1e-3);
        assert!(jbi_cluster_point(&evens, &cesaro(), &f, 0.0, &sc.eps_list, &sc).unwrap().holds_at_scale());

        let r = cluster_gauge_sufficient(&squares(n), &cesaro(), &id, &f, 0.0, &sc).unwrap();
        assert_eq!(r.status(), Status::HoldsAtScale);
        let c = SequencePrefix::from_fn(n, |_| 1.5);
        let r = cluster_gauge_sufficient(&c, &cesaro(), &id, &f, 1.5, &sc).unwrap();
        assert_eq!(r.quantities["liminf"], 0.0);
        assert_eq!(r.status(), Status::HoldsAtScale);
    }
}
