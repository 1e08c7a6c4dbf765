//! The three convergence modes along a matrix family and an ideal, the σ-variance
//! characterization, almost convergence, the decomposition construction and the
//! Tauberian checker.

mod decompose;
mod tauberian;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use decompose::{check_base_condition, decompose_statistical, BaseConditionReport, DecompositionResult, Stage};
pub use tauberian::{tauberian_check, TauberianFns};

use crate::error::{input, Error, Result};
use crate::ideal::IdealHandle;
use crate::matrix::{build_shift_family, transform, Cesaro, Envelope, MatrixFamily, MatrixRef, SummabilityMatrix};
use crate::orlicz::{equicontinuity_delta, lower_envelope, upper_envelope, GaugeFamily};
use crate::scalar::{ExtendedNonneg, ExtendedReal, Scalar};
use crate::scale::Scale;
use crate::sequence::{indicator, Bound, IndexSet, SequencePrefix};
use crate::verdict::{TheoremReport, Verdict};

/// Distinct values up to which finite-range fast paths are used.
pub const FINITE_RANGE_CAP: usize = 16;
/// Budget on stored row entries summed directly by the σ evaluation.
pub const DIRECT_SUM_BUDGET: usize = 200_000_000;

/// Input of every convergence test: s, the family (B_i), the ideal I, optional gauges,
/// optional target a and the scale.
#[derive(Clone)]
pub struct ConvergenceRequest<T: Scalar> {
    pub s: SequencePrefix<T>,
    pub family: MatrixFamily<T>,
    pub ideal: IdealHandle<T>,
    pub gauges: Option<GaugeFamily<T>>,
    pub target: Option<T>,
    pub scale: Scale<T>,
}

impl<T: Scalar> ConvergenceRequest<T> {
    pub fn new(s: SequencePrefix<T>, family: MatrixFamily<T>, ideal: IdealHandle<T>, scale: Scale<T>) -> Self {
        ConvergenceRequest { s, family, ideal, gauges: None, target: None, scale }
    }

    pub fn with_gauges(mut self, g: GaugeFamily<T>) -> Self {
        self.gauges = Some(g);
        self
    }

    pub fn with_target(mut self, a: T) -> Self {
        self.target = Some(a);
        self
    }

    fn prefix(&self) -> Result<&[T]> {
        self.scale.validate()?;
        self.s.require_len(self.scale.n)?;
        Ok(&self.s.values()[..self.scale.n])
    }

    /// Rows evaluable for every member.
    pub fn rows(&self) -> Result<usize> {
        let h = self.family.horizon(self.scale.n);
        if h == 0 {
            return Err(Error::Capability(format!("no row of {} is evaluable within N = {}", self.family.label, self.scale.n)));
        }
        Ok(h)
    }

    /// Scale for null tests over the evaluable rows.
    pub fn row_scale(&self) -> Result<Scale<T>> {
        Ok(self.scale.clone().with_n(self.rows()?))
    }

    fn require_nonnegative(&self) -> Result<()> {
        if !self.family.is_nonnegative() || !self.family.verify_nonnegative(16, 64.min(self.scale.n)) {
            return input(format!("{} has negative entries; this mode needs a nonnegative family", self.family.label));
        }
        Ok(())
    }

    fn tail(&self, rows: usize) -> T {
        self.family.max_tail(rows, self.scale.n)
    }

    fn gauges_or_identity(&self) -> GaugeFamily<T> {
        self.gauges.clone().unwrap_or_else(GaugeFamily::identity)
    }
}

/// Transform envelopes sup_i/inf_i (B_i s)(n) and the truncation error bound.
pub fn transform_envelope<T: Scalar>(req: &ConvergenceRequest<T>) -> Result<(Envelope<T>, T)> {
    let x = req.prefix()?;
    let h = req.rows()?;
    let tail = req.tail(h);
    if tail > req.scale.tol && !req.s.is_bounded() {
        return Err(Error::Capability(format!("rows of {} have mass {tail} beyond N and s is unbounded", req.family.label)));
    }
    Ok((req.family.envelope(x, h), tail * req.s.sup_abs()))
}

/// Definition (i): (B_i s)(n) → a along I uniformly in i. Without a target, a is the
/// midpoint of I-liminf inf_i and I-limsup sup_i of the transforms.
pub fn b_summable<T: Scalar>(req: &ConvergenceRequest<T>) -> Result<Verdict<T>> {
    let (env, err) = transform_envelope(req)?;
    let rs = req.row_scale()?;
    let a = match req.target {
        Some(a) => a,
        None => {
            let hi = req.ideal.limsup(&env.sup, &rs)?;
            let lo = req.ideal.liminf(&env.inf, &rs)?;
            match (hi.finite(), lo.finite()) {
                (Some(h), Some(l)) => {
                    let mid = (h + l) * T::of(0.5);
                    if h - l > req.scale.min_eps() {
                        let w = worst_rows(&env.sup, mid, 2);
                        return Ok(Verdict::fails(ExtendedReal::Finite(mid), (h - l) * T::of(0.5), &req.scale, w)
                            .with_note(format!("transforms spread over [{l}, {h}]")));
                    }
                    mid
                }
                _ => return Ok(Verdict::inconclusive(&req.scale, "transform envelope not finite")),
            }
        }
    };
    let w: Vec<T> = env.sup.iter().zip(&env.inf).map(|(&u, &l)| (u - a).abs().max((l - a).abs()) + err).collect();
    Ok(req.ideal.null_test(&w, &rs)?.verdict(a, &req.scale))
}

fn worst_rows<T: Scalar>(v: &[T], a: T, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (1..=v.len()).collect();
    idx.sort_by(|&x, &y| crate::scalar::total_cmp(&(v[y - 1] - a).abs(), &(v[x - 1] - a).abs()));
    idx.truncate(k);
    idx
}

/// sup_i Σ_k b_nk^(i) F_k^(i)(|s_k − a|) for every evaluable row n, in [0, ∞].
pub fn strong_series<T: Scalar>(req: &ConvergenceRequest<T>, a: T) -> Result<Vec<T>> {
    req.require_nonnegative()?;
    let x = req.prefix()?;
    let h = req.rows()?;
    let g = req.gauges.as_ref().ok_or_else(|| Error::Input("strong summability needs a gauge family".into()))?;
    let dev: Vec<T> = x.iter().map(|&v| (v - a).abs()).collect();
    let gauged = |i: usize| -> Vec<T> {
        dev.iter().enumerate().map(|(k, &d)| finite_or_inf(g.eval(k + 1, i, d))).collect()
    };
    let shared = if g.i_uniform { Some(gauged(0)) } else { None };
    let tail = req.tail(h);
    let env = req.family.fold(h, |i, m| {
        let owned;
        let y = match &shared {
            Some(y) => y,
            None => {
                owned = gauged(i);
                &owned
            }
        };
        let mut out = m.apply_rows(y, h);
        if tail > T::zero() {
            let bound = if req.s.is_bounded() { y.iter().fold(T::zero(), |acc, &v| acc.max(v)) } else { T::infinity() };
            for v in out.iter_mut() {
                *v += tail * bound;
            }
        }
        out
    });
    Ok(env.sup.into_iter().map(finite_or_inf).collect())
}

fn finite_or_inf<T: Scalar>(v: T) -> T {
    if v.is_nan() {
        T::infinity()
    } else {
        v
    }
}

/// Definition (ii): strong summability to a with respect to the gauges.
pub fn strong_summable<T: Scalar>(req: &ConvergenceRequest<T>, a: T) -> Result<Verdict<T>> {
    let u = strong_series(req, a)?;
    let rs = req.row_scale()?;
    let t = req.ideal.null_test(&u, &rs)?;
    let mut v = t.verdict(a, &req.scale);
    if u.iter().any(|x| x.is_infinite()) {
        v = v.with_note("some rows are +inf");
    }
    Ok(v)
}

/// D(s, a, ε) = {k ≤ N : |s_k − a| ≥ ε}.
pub fn exceptional_set<T: Scalar>(s: &SequencePrefix<T>, a: T, eps: T) -> Result<IndexSet> {
    if !(eps > T::zero()) {
        return input("eps must be positive");
    }
    let n = s.len();
    Ok(IndexSet::Mask((1..=n).map(|k| (s.get(k) - a).abs() >= eps).collect()))
}

/// sup_i Σ_k b_nk^(i) χ_K(k) over the evaluable rows, plus the truncation bound.
pub fn weighted_density<T: Scalar>(family: &MatrixFamily<T>, mask: &[bool], rows: usize) -> Vec<T> {
    let x: Vec<T> = indicator(mask);
    let tail = family.max_tail(rows, mask.len());
    let mut v = family.sup_apply(&x, rows);
    if tail > T::zero() {
        v.iter_mut().for_each(|d| *d += tail);
    }
    v
}

/// sup_i Σ_k b_nk^(i) χ_D(s,a,ε)(k) over the evaluable rows.
pub fn density_series<T: Scalar>(req: &ConvergenceRequest<T>, a: T, eps: T) -> Result<Vec<T>> {
    req.require_nonnegative()?;
    let x = req.prefix()?;
    let h = req.rows()?;
    let mask: Vec<bool> = x.iter().map(|&v| (v - a).abs() >= eps).collect();
    Ok(weighted_density(&req.family, &mask, h))
}

/// Weighted median of s under the last evaluable row of the first member.
pub fn statistical_limit_estimate<T: Scalar>(req: &ConvergenceRequest<T>) -> Result<T> {
    let x = req.prefix()?;
    let h = req.rows()?;
    let i = req.family.plus_witness().unwrap_or(0);
    let mut row: Vec<(T, T)> = req.family.member(i).row(h, x.len()).into_iter().map(|(k, w)| (x[k - 1], w)).collect();
    if row.is_empty() {
        return Err(Error::Capability("last evaluable row is empty".into()));
    }
    row.sort_by(|p, q| crate::scalar::total_cmp(&p.0, &q.0));
    let total: T = row.iter().map(|p| p.1).sum();
    let mut acc = T::zero();
    for &(v, w) in &row {
        acc += w;
        if acc + acc >= total {
            return Ok(v);
        }
    }
    Ok(row[row.len() - 1].0)
}

/// Definition (iii): for every ε in the scale's list the weighted density of D(s,a,ε)
/// tends to 0 along I uniformly in i.
pub fn statistically_convergent<T: Scalar>(req: &ConvergenceRequest<T>) -> Result<Verdict<T>> {
    req.require_nonnegative()?;
    let a = match req.target {
        Some(a) => a,
        None => statistical_limit_estimate(req)?,
    };
    let rs = req.row_scale()?;
    let mut worst = T::zero();
    for &eps in &req.scale.eps_list {
        let d = density_series(req, a, eps)?;
        let t = req.ideal.null_test(&d, &rs)?;
        if !t.holds {
            return Ok(Verdict::fails(ExtendedReal::Finite(a), t.residual, &req.scale, t.witnesses)
                .with_note(format!("weighted density of D(s, a, {eps}) does not vanish")));
        }
        worst = worst.max(t.residual);
    }
    Ok(Verdict::holds(ExtendedReal::Finite(a), worst, &req.scale))
}

/// σ_ni = Σ_k b_nk^(i) F_ki(|s_k − (B_i s)(n)|).
pub fn sigma_variance<T: Scalar>(
    s: &SequencePrefix<T>,
    member: &dyn SummabilityMatrix<T>,
    gauges: &GaugeFamily<T>,
    n: usize,
    i: usize,
) -> Result<ExtendedNonneg<T>> {
    if !member.is_nonnegative() {
        return input("sigma variance needs a nonnegative matrix");
    }
    let (t, err) = transform(s, member, n)?;
    let mut acc = T::zero();
    for (k, b) in member.row(n, s.len()) {
        acc += b * gauges.eval(k, i, (s.get(k) - t).abs());
    }
    if member.tail_bound(n, s.len()) > T::zero() {
        let r = s.sup_abs() + t.abs() + err;
        acc += member.tail_bound(n, s.len()) * crate::scalar::max_of((1..=s.len()).map(|k| gauges.eval(k, i, r))).unwrap_or(T::zero());
    }
    Ok(ExtendedNonneg::from_scalar(finite_or_inf(acc)))
}

/// sup_i σ_ni over the evaluable rows.
pub fn sigma_series<T: Scalar>(req: &ConvergenceRequest<T>) -> Result<Vec<T>> {
    req.require_nonnegative()?;
    let x = req.prefix()?;
    let h = req.rows()?;
    let g = req.gauges_or_identity();
    if g.k_uniform {
        if let Some(vals) = req.s.truncated(req.scale.n).finite_range(FINITE_RANGE_CAP) {
            let masks: Vec<Vec<T>> = vals.iter().map(|&v| x.iter().map(|&y| if y == v { T::one() } else { T::zero() }).collect()).collect();
            let tail = req.tail(h);
            let env = req.family.fold(h, |i, m| {
                let w: Vec<Vec<T>> = masks.iter().map(|c| m.apply_rows(c, h)).collect();
                (0..h)
                    .map(|n| {
                        let t: T = vals.iter().zip(&w).map(|(&v, wv)| v * wv[n]).sum();
                        let mut sig: T = vals.iter().zip(&w).map(|(&v, wv)| wv[n] * g.eval(1, i, (v - t).abs())).sum();
                        if tail > T::zero() {
                            let r = req.s.sup_abs() + t.abs() + tail * req.s.sup_abs();
                            sig += tail * g.eval(1, i, r);
                        }
                        sig
                    })
                    .collect()
            });
            return Ok(env.sup);
        }
    }
    let work: usize = req.family.members().iter().map(|m| (1..=h).map(|n| m.support_end(n).unwrap_or(x.len()).min(x.len())).sum::<usize>()).sum();
    if work > DIRECT_SUM_BUDGET {
        let n = ((DIRECT_SUM_BUDGET as f64 / work as f64).sqrt() * req.scale.n as f64) as usize;
        return Err(Error::Capability(format!("sigma needs {work} row entries; try N <= {n}")));
    }
    let env = req.family.fold(h, |i, m| {
        (1..=h).map(|n| sigma_variance(&req.s.truncated(x.len()), m.as_ref(), &g, n, i).map(|e| e.to_scalar()).unwrap_or(T::infinity())).collect()
    });
    Ok(env.sup)
}

/// Outcome of the σ-variance characterization: both sides and whether they agree.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VarianceReport<T> {
    pub report: TheoremReport<T>,
    pub summable: Verdict<T>,
    pub sigma: Verdict<T>,
    pub statistical: Verdict<T>,
    pub agree: bool,
}

/// s is statistically convergent to a iff it is summable to a and σ_ni → 0; both sides
/// are evaluated and compared.
pub fn variance_characterization<T: Scalar>(req: &ConvergenceRequest<T>, a: T) -> Result<VarianceReport<T>> {
    req.require_nonnegative()?;
    let x = req.prefix()?;
    let rs = req.row_scale()?;
    let h = rs.n;
    let g = req.gauges_or_identity();
    let mut report = TheoremReport::new("variance characterization");
    let bounded = req.s.is_bounded() && x.iter().all(|v| v.is_finite());
    let r = req.s.sup_abs() + a.abs();
    report.push(
        "s bounded",
        Verdict::from_test(bounded, ExtendedReal::Finite(req.s.sup_abs()), T::zero(), &req.scale, vec![1]),
    );
    let lo = lower_envelope(&g, req.scale.min_eps(), &req.scale)?;
    report.push(
        "lower envelope positive",
        Verdict::from_test(!lo.degenerate, ExtendedReal::Finite(lo.value), T::zero(), &req.scale, vec![lo.k]),
    );
    let hi = upper_envelope(&g, r.max(req.scale.min_eps()), &req.scale)?;
    report.push(
        "upper envelope finite",
        Verdict::from_test(!hi.degenerate, ExtendedReal::Finite(hi.value), T::zero(), &req.scale, vec![hi.k]),
    );
    let eq = equicontinuity_delta(&g, req.scale.min_eps(), &req.scale);
    report.push(
        "equicontinuous at 0",
        match &eq {
            Ok(d) => Verdict::holds(ExtendedReal::Finite(d.delta), T::zero(), &req.scale),
            Err(e) => Verdict::inconclusive(&req.scale, e.to_string()),
        },
    );
    let sums = req.family.row_sums(x.len(), h);
    let dev: Vec<T> = sums.sup.iter().zip(&sums.inf).map(|(&u, &l)| (u - T::one()).abs().max((l - T::one()).abs())).collect();
    report.push("row sums tend to 1", req.ideal.null_test(&dev, &rs)?.verdict(T::one(), &req.scale));

    let summable = b_summable(&req.clone().with_target(a))?;
    let sig = sigma_series(&ConvergenceRequest { gauges: Some(g), ..req.clone() })?;
    let sigma = req.ideal.null_test(&sig, &rs)?.verdict(T::zero(), &req.scale);
    let statistical = statistically_convergent(&req.clone().with_target(a))?;
    let left = summable.holds_at_scale() && sigma.holds_at_scale();
    let right = statistical.holds_at_scale();
    let agree = left == right;
    report.quantity("sigma_residual", sigma.residual);
    report.quantity("summable_residual", summable.residual);
    report.quantity("statistical_residual", statistical.residual);
    if report.hypotheses_hold() {
        let residual = summable.residual.max(sigma.residual);
        let w: Vec<usize> = summable.witnesses.iter().chain(&sigma.witnesses).copied().collect();
        let mut c = Verdict::from_test(left, ExtendedReal::Finite(a), residual, &req.scale, w);
        if !agree {
            c = c.with_note("statistical side disagrees at this scale");
        }
        report.conclude(c);
    } else {
        report.notes.push(format!("no claim: {} failed", report.failed_hypotheses().join(", ")));
    }
    Ok(VarianceReport { report, summable, sigma, statistical, agree })
}

/// Almost convergence: summability by the Cesàro shift family with i ≤ N/2 under I_f.
pub fn almost_convergence<T: Scalar>(s: &SequencePrefix<T>, scale: &Scale<T>) -> Result<Verdict<T>> {
    if matches!(s.bound, Bound::Unbounded) {
        return input("almost convergence is defined for bounded sequences");
    }
    s.require_len(scale.n)?;
    let i_max = scale.n / 2;
    let family = build_shift_family(Arc::new(Cesaro) as MatrixRef<T>, i_max);
    let sc = scale.clone().with_i_max(i_max);
    let req = ConvergenceRequest::new(s.clone(), family, IdealHandle::Finite, sc);
    b_summable(&req)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verdict::Status;
    use crate::matrix::{check_condition_plus, derived_ideal};
    use crate::sequence::is_square;

    fn cesaro() -> MatrixFamily<f64> {
        MatrixFamily::single(Arc::new(Cesaro) as MatrixRef<f64>)
    }

    fn squares(n: usize) -> SequencePrefix<f64> {
        SequencePrefix::from_fn(n, |k| if is_square(k) { 1.0 } else { 0.0 })
    }

    fn periodic(n: usize) -> SequencePrefix<f64> {
        SequencePrefix::from_fn(n, |k| (k % 2) as f64)
    }

    fn alternating(n: usize) -> SequencePrefix<f64> {
        SequencePrefix::from_fn(n, |k| if k % 2 == 0 { 1.0 } else { -1.0 })
    }

    fn req(s: SequencePrefix<f64>, f: MatrixFamily<f64>, n: usize) -> ConvergenceRequest<f64> {
        ConvergenceRequest::new(s, f, IdealHandle::Finite, Scale::new(n).with_i_max(16))
    }

    #[test]
    fn summable_examples() {
        let n = 4000;
        let shifts = build_shift_family(Arc::new(Cesaro) as MatrixRef<f64>, 16);
        let v = b_summable(&req(periodic(n), shifts.clone(), n)).unwrap();
        assert!(v.holds_at_scale());
        assert!((v.estimate.to_scalar() - 0.5).abs() < 1e-3);
        let v = b_summable(&req(SequencePrefix::from_fn(n, |_| 0.3), shifts, n)).unwrap();
        assert!((v.estimate.to_scalar() - 0.3).abs() < 1e-12);
        let v = b_summable(&req(squares(n), cesaro(), n)).unwrap();
        assert!(v.holds_at_scale());
        // midpoint of the window extremes of floor(sqrt(m))/m over (2000, 4000]
        let lo = (2001..=4000).map(|m| (m as f64).sqrt().floor() / m as f64).fold(f64::MAX, f64::min);
        let hi = (2001..=4000).map(|m| (m as f64).sqrt().floor() / m as f64).fold(f64::MIN, f64::max);
        assert!((v.estimate.to_scalar() - (lo + hi) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn strong_examples() {
        let n = 4000;
        let r = req(squares(n), cesaro(), n).with_gauges(GaugeFamily::identity());
        let u = strong_series(&r, 0.0).unwrap();
        for m in [1usize, 10, 100, 1000] {
            assert!((u[m - 1] - (m as f64).sqrt().floor() / m as f64).abs() < 1e-12);
        }
        assert!(strong_summable(&r, 0.0).unwrap().holds_at_scale());
        let c = req(SequencePrefix::from_fn(n, |_| 0.7), cesaro(), n).with_gauges(GaugeFamily::identity());
        assert!(strong_series(&c, 0.7).unwrap().iter().all(|&x| x == 0.0));
        let e = req(SequencePrefix::from_fn(n, |k| (k % 2 == 0) as u8 as f64), cesaro(), n).with_gauges(GaugeFamily::identity());
        let v = strong_summable(&e, 0.0).unwrap();
        assert!(v.fails_at_scale());
        assert!((u_last(&e) - 0.5).abs() < 1e-12);
        assert!(strong_summable(&req(squares(n), cesaro(), n), 0.0).is_err());
    }

    fn u_last(r: &ConvergenceRequest<f64>) -> f64 {
        *strong_series(r, 0.0).unwrap().last().unwrap()
    }

    #[test]
    fn statistical_examples() {
        let n = 4000;
        let v = statistically_convergent(&req(squares(n), cesaro(), n).with_target(0.0)).unwrap();
        assert!(v.holds_at_scale());
        let v = statistically_convergent(&req(squares(n), cesaro(), n)).unwrap();
        assert_eq!(v.estimate.to_scalar(), 0.0);
        let v = statistically_convergent(&req(SequencePrefix::from_fn(n, |_| 2.0), cesaro(), n).with_target(2.0)).unwrap();
        assert!(v.holds_at_scale());
        assert_eq!(v.residual, 0.0);
        let r = req(alternating(n), cesaro(), n).with_target(0.0);
        let v = statistically_convergent(&r).unwrap();
        assert!(v.fails_at_scale());
        let d = density_series(&r, 0.0, 0.5).unwrap();
        assert!(d.iter().all(|&x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn negative_entries_rejected() {
        let signed = MatrixFamily::single(Arc::new(crate::matrix::Scaled { inner: Arc::new(Cesaro), factor: -1.0 }) as MatrixRef<f64>);
        let r = req(squares(100), signed, 100).with_target(0.0);
        assert!(matches!(statistically_convergent(&r), Err(Error::Input(_))));
    }

    #[test]
    fn exceptional_examples() {
        let s = squares(100);
        assert_eq!(exceptional_set(&s, 0.0, 0.5).unwrap().indices(100), (1..=10).map(|r| r * r).collect::<Vec<_>>());
        assert!(exceptional_set(&SequencePrefix::from_fn(50, |_| 3.0), 3.0, 0.1).unwrap().indices(50).is_empty());
        let h = SequencePrefix::from_fn(100, |k| 1.0 / k as f64);
        assert_eq!(exceptional_set(&h, 0.0, 0.1).unwrap().indices(100), (1..=10).collect::<Vec<_>>());
    }

    #[test]
    fn sigma_examples() {
        let id = GaugeFamily::identity();
        let c = SequencePrefix::from_fn(100, |_| 4.0);
        assert!(sigma_variance(&c, &Cesaro, &id, 50, 0).unwrap().to_scalar() < 1e-13);
        let p = periodic(100);
        assert!((sigma_variance(&p, &Cesaro, &id, 4, 0).unwrap().to_scalar() - 0.5).abs() < 1e-15);
        let sq = squares(100);
        // brute force: mean of |s_k − d| with d = 10/100
        let d = 0.1;
        let brute: f64 = (1..=100).map(|k| (sq.get(k) - d).abs()).sum::<f64>() / 100.0;
        let v = sigma_variance(&sq, &Cesaro, &id, 100, 0).unwrap().to_scalar();
        assert!((v - brute).abs() < 1e-15);
        assert!((v - 0.18).abs() < 1e-12);
        let series = sigma_series(&req(sq.clone(), cesaro(), 100)).unwrap();
        assert!((series[99] - 0.18).abs() < 1e-12);
        let direct: Vec<f64> = (1..=100).map(|n| sigma_variance(&sq, &Cesaro, &id, n, 0).unwrap().to_scalar()).collect();
        for (a, b) in series.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn variance_examples() {
        let n = 4000;
        let r = variance_characterization(&req(squares(n), cesaro(), n), 0.0).unwrap();
        assert!(r.agree && r.statistical.holds_at_scale() && r.report.status() == Status::HoldsAtScale);
        let r = variance_characterization(&req(alternating(n), cesaro(), n), 0.0).unwrap();
        assert!(r.agree);
        assert!(r.statistical.fails_at_scale() && r.sigma.fails_at_scale());
        let r = variance_characterization(&req(SequencePrefix::from_fn(n, |_| 1.5), cesaro(), n), 1.5).unwrap();
        assert!(r.agree && r.report.status() == Status::HoldsAtScale);
    }

    #[test]
    fn almost_examples() {
        let n = 2000;
        let s: Scale<f64> = Scale::new(n);
        let v = almost_convergence(&periodic(n), &s).unwrap();
        assert!(v.holds_at_scale());
        assert!((v.estimate.to_scalar() - 0.5).abs() < 1e-3);
        let v = almost_convergence(&SequencePrefix::from_fn(n, |_| -0.25), &s).unwrap();
        assert!((v.estimate.to_scalar() + 0.25).abs() < 1e-12);
        let v = almost_convergence(&squares(n), &s).unwrap();
        assert!(v.holds_at_scale());
        // brute force sup over shifts of window densities on the tail rows
        let sq: Vec<f64> = (1..=n).map(|k| is_square(k) as u8 as f64).collect();
        let mut hi: f64 = 0.0;
        for m in (n / 4 + 1)..=(n / 2) {
            for i in 0..=(n / 2) {
                let c: f64 = sq[i..i + m].iter().sum();
                hi = hi.max(c / m as f64);
            }
        }
        assert!(v.estimate.to_scalar() <= hi);
        assert_eq!(v.scale.i_max, n / 2);
        let unb = SequencePrefix::from_fn(n, |k| k as f64).with_bound(Bound::Unbounded);
        assert!(almost_convergence(&unb, &s).is_err());
    }

    #[test]
    fn derived_ideal_target() {
        let n = 2000;
        let s: Scale<f64> = Scale::new(n);
        let mut f = cesaro();
        check_condition_plus(&mut f, &[0], &s);
        let j = derived_ideal(&f, &IdealHandle::Finite).unwrap();
        let r = ConvergenceRequest::new(squares(n), cesaro(), j, s);
        assert!(b_summable(&r).unwrap().holds_at_scale());
    }
}
