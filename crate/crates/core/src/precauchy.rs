//! Statistically pre-Cauchy sequences along a matrix family, the subsequence criterion,
//! the dichotomy lemma and the nowhere-dense cluster set criterion.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::ideal::{FilterBase, IdealHandle};
use crate::limsup_cluster::{checked_derived_ideal, uniform_row_sums};
use crate::matrix::{merge_rows, MatrixFamily, MatrixRef};
use crate::orlicz::PairGauge;
use crate::scalar::{total_cmp, ExtendedNonneg, ExtendedReal, Scalar};
use crate::scale::Scale;
use crate::sequence::{indicator, IndexSet, SequencePrefix};
use crate::summability::{statistical_limit_estimate, statistically_convergent, ConvergenceRequest, DIRECT_SUM_BUDGET, FINITE_RANGE_CAP};
use crate::verdict::{Status, TheoremReport, Verdict};

/// Consecutive basis pairs checked for slow row variation.
pub const BASIS_PAIRS: usize = 256;
/// Grid points for the cluster set when the range is not finite.
pub const CLUSTER_GRID: usize = 101;

/// D(s, ε) = {(k, l) : |s_k − s_l| ≥ ε}.
#[derive(Clone, Copy, Debug)]
pub struct PairExceptionalSet<'a, T> {
    pub s: &'a [T],
    pub eps: T,
}

impl<T: Scalar> PairExceptionalSet<'_, T> {
    pub fn contains(&self, k: usize, l: usize) -> bool {
        (self.s[k - 1] - self.s[l - 1]).abs() >= self.eps
    }
}

struct Fenwick {
    t: Vec<usize>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick { t: vec![0; n + 1] }
    }

    fn add(&mut self, i: usize) {
        let mut i = i + 1;
        while i < self.t.len() {
            self.t[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Count of positions < i.
    fn prefix(&self, i: usize) -> usize {
        let (mut i, mut s) = (i, 0);
        while i > 0 {
            s += self.t[i];
            i &= i - 1;
        }
        s
    }
}

fn prefix<'a, T: Scalar>(s: &'a SequencePrefix<T>, scale: &Scale<T>) -> Result<&'a [T]> {
    scale.validate()?;
    s.require_len(scale.n)?;
    Ok(&s.values()[..scale.n])
}

fn require_finite_rows<T: Scalar>(family: &MatrixFamily<T>, h: usize) -> Result<()> {
    if family.members().iter().any(|m| (1..=h).any(|n| m.support_end(n).is_none())) {
        return Err(Error::Capability(format!("{} has rows with infinite support; double sums need finite rows", family.label)));
    }
    Ok(())
}

fn horizon<T: Scalar>(family: &MatrixFamily<T>, len: usize) -> Result<usize> {
    if !family.is_nonnegative() {
        return input(format!("{} has negative entries", family.label));
    }
    let h = family.horizon(len);
    if h == 0 {
        return Err(Error::Capability(format!("no evaluable rows of {} within N = {len}", family.label)));
    }
    require_finite_rows(family, h)?;
    Ok(h)
}

fn budget_error(work: f64, n: usize) -> Error {
    let m = ((DIRECT_SUM_BUDGET as f64 / work).sqrt() * n as f64) as usize;
    Error::Capability(format!("pair sums need about {work:.3e} operations; try N <= {m}"))
}

/// Per value v and member i, W_v^(i)(n) = Σ_k b_nk^(i) χ_{s_k = v}.
fn value_weights<T: Scalar>(family: &MatrixFamily<T>, x: &[T], vals: &[T], h: usize) -> Vec<Vec<Vec<T>>> {
    family
        .members()
        .iter()
        .map(|m| {
            vals.iter()
                .map(|&v| {
                    let mask: Vec<bool> = x.iter().map(|&y| y == v).collect();
                    m.apply_rows(&indicator::<T>(&mask), h)
                })
                .collect()
        })
        .collect()
}

fn window_pairs<T: Scalar>(m: &MatrixRef<T>, x: &[T], eps: T, h: usize) -> Option<Vec<T>> {
    let (start, end1, _) = m.uniform_window(1)?;
    for n in 2..=h {
        let (st, en, _) = m.uniform_window(n)?;
        if st != start || en != end1 + n - 1 {
            return None;
        }
    }
    let mut uniq: Vec<T> = x.to_vec();
    uniq.sort_by(total_cmp);
    uniq.dedup();
    let mut fw = Fenwick::new(uniq.len());
    let mut count = 0usize;
    let mut pairs = 0u64;
    let mut out = Vec::with_capacity(h);
    let add = |v: T, fw: &mut Fenwick, count: &mut usize| -> u64 {
        let lo = uniq.partition_point(|&u| u <= v - eps);
        let hi = uniq.partition_point(|&u| u < v + eps);
        let near = fw.prefix(hi) - fw.prefix(lo);
        let far = (*count - near) as u64;
        fw.add(uniq.partition_point(|&u| u < v));
        *count += 1;
        2 * far
    };
    for k in start..=end1 {
        pairs += add(x[k - 1], &mut fw, &mut count);
    }
    for n in 1..=h {
        if n > 1 {
            pairs += add(x[end1 + n - 2], &mut fw, &mut count);
        }
        let w = m.uniform_window(n).map_or(T::zero(), |t| t.2);
        out.push(w * w * T::of(pairs as f64));
    }
    Some(out)
}

struct SortedRow<T> {
    vals: Vec<T>,
    cum: Vec<T>,
}

impl<T: Scalar> SortedRow<T> {
    fn new(row: &[(usize, T)], x: &[T]) -> Self {
        let mut p: Vec<(T, T)> = row.iter().map(|&(k, b)| (x[k - 1], b)).collect();
        p.sort_by(|a, b| total_cmp(&a.0, &b.0));
        let mut cum = Vec::with_capacity(p.len() + 1);
        cum.push(T::zero());
        let mut acc = T::zero();
        for q in &p {
            acc += q.1;
            cum.push(acc);
        }
        SortedRow { vals: p.into_iter().map(|q| q.0).collect(), cum }
    }

    /// Mass at values v' with |v' − v| ≥ ε.
    fn far(&self, v: T, eps: T) -> T {
        let lo = self.vals.partition_point(|&u| u <= v - eps);
        let hi = self.vals.partition_point(|&u| u < v + eps);
        self.cum[self.vals.len()] - (self.cum[hi] - self.cum[lo])
    }
}

/// sup_i Σ_k Σ_l b_nk^(i) b_nl^(i) χ_D(s,ε)(k,l) for n ≤ horizon, or sup over pairs (i, j)
/// with mixed rows when `plus` is set.
pub fn pair_mass_series<T: Scalar>(s: &SequencePrefix<T>, family: &MatrixFamily<T>, eps: T, plus: bool, scale: &Scale<T>) -> Result<Vec<T>> {
    let x = prefix(s, scale)?;
    let h = horizon(family, x.len())?;
    let members = family.members();
    let sz = members.len();
    if let Some(vals) = s.truncated(x.len()).finite_range(FINITE_RANGE_CAP) {
        let w = value_weights(family, x, &vals, h);
        let nv = vals.len();
        let far: Vec<Vec<bool>> = vals.iter().map(|&v| vals.iter().map(|&u| (u - v).abs() >= eps).collect()).collect();
        let mut out = vec![T::zero(); h];
        for n in 0..h {
            // G_v^(j) = Σ_{w far from v} W_w^(j)
            let g: Vec<Vec<T>> = (0..sz).map(|j| (0..nv).map(|v| (0..nv).filter(|&u| far[v][u]).map(|u| w[j][u][n]).sum()).collect()).collect();
            let mut best = T::zero();
            for i in 0..sz {
                let js = if plus { 0..sz } else { i..i + 1 };
                for j in js {
                    let u: T = (0..nv).map(|v| w[i][v][n] * g[j][v]).sum();
                    best = best.max(u);
                }
            }
            out[n] = best;
        }
        return Ok(out);
    }
    if !plus {
        let mut out = vec![T::zero(); h];
        let mut work = 0f64;
        let mut slow = Vec::new();
        for (i, m) in members.iter().enumerate() {
            match window_pairs(m, x, eps, h) {
                Some(v) => out.iter_mut().zip(v).for_each(|(o, u)| *o = o.max(u)),
                None => {
                    work += (1..=h).map(|n| m.support_end(n).unwrap_or(x.len()).min(x.len()) as f64).sum::<f64>() * (x.len() as f64).log2().max(1.0);
                    slow.push(i);
                }
            }
        }
        if work > DIRECT_SUM_BUDGET as f64 {
            return Err(budget_error(work, x.len()));
        }
        for i in slow {
            for n in 1..=h {
                let row = members[i].row(n, x.len());
                let sr = SortedRow::new(&row, x);
                let u: T = row.iter().map(|&(k, b)| b * sr.far(x[k - 1], eps)).sum();
                out[n - 1] = out[n - 1].max(u);
            }
        }
        return Ok(out);
    }
    let work: f64 = (1..=h).map(|n| members.iter().map(|m| m.support_end(n).unwrap_or(x.len()).min(x.len()) as f64).sum::<f64>()).sum::<f64>() * sz as f64;
    if work > DIRECT_SUM_BUDGET as f64 {
        return Err(budget_error(work, x.len()));
    }
    let mut out = vec![T::zero(); h];
    for n in 1..=h {
        let rows: Vec<Vec<(usize, T)>> = members.iter().map(|m| m.row(n, x.len())).collect();
        let sorted: Vec<SortedRow<T>> = rows.iter().map(|r| SortedRow::new(r, x)).collect();
        let mut best = T::zero();
        for ri in &rows {
            for sj in &sorted {
                let u: T = ri.iter().map(|&(k, b)| b * sj.far(x[k - 1], eps)).sum();
                best = best.max(u);
            }
        }
        out[n - 1] = best;
    }
    Ok(out)
}

fn pre_cauchy_impl<T: Scalar>(s: &SequencePrefix<T>, family: &MatrixFamily<T>, ideal: &IdealHandle<T>, eps_list: &[T], plus: bool, scale: &Scale<T>) -> Result<Verdict<T>> {
    let mut worst = T::zero();
    for &eps in eps_list {
        let u = pair_mass_series(s, family, eps, plus, scale)?;
        let rs = scale.clone().with_n(u.len());
        let t = ideal.null_test(&u, &rs)?;
        if !t.holds {
            return Ok(Verdict::fails(ExtendedReal::Finite(T::zero()), t.residual, scale, t.witnesses)
                .with_note(format!("pair mass of D(s, {eps}) does not vanish")));
        }
        worst = worst.max(t.residual);
    }
    let mut v = Verdict::holds(ExtendedReal::Finite(T::zero()), worst, scale);
    if family.len() > 1 {
        v = v.with_note(format!("uniform over members i <= {} only", family.len() - 1));
    }
    Ok(v)
}

/// Pair masses of D(s, ε) tend to 0 along I uniformly in i, for every ε.
pub fn pre_cauchy<T: Scalar>(s: &SequencePrefix<T>, family: &MatrixFamily<T>, ideal: &IdealHandle<T>, eps_list: &[T], scale: &Scale<T>) -> Result<Verdict<T>> {
    pre_cauchy_impl(s, family, ideal, eps_list, false, scale)
}

/// Mixed-row variant, uniform in pairs (i, j).
pub fn pre_cauchy_plus<T: Scalar>(s: &SequencePrefix<T>, family: &MatrixFamily<T>, ideal: &IdealHandle<T>, eps_list: &[T], scale: &Scale<T>) -> Result<Verdict<T>> {
    pre_cauchy_impl(s, family, ideal, eps_list, true, scale)
}

/// Σ_k Σ_l b_nk^(i) b_nl^(j) F_kl(|s_k − s_l|) with j = i unless given.
pub fn gauge_pre_cauchy_sum<T: Scalar>(
    s: &SequencePrefix<T>,
    family: &MatrixFamily<T>,
    gauges: &PairGauge<T>,
    n: usize,
    i: usize,
    j: Option<usize>,
) -> Result<ExtendedNonneg<T>> {
    if !family.is_nonnegative() {
        return input(format!("{} has negative entries", family.label));
    }
    let j = j.unwrap_or(i);
    if i >= family.len() || j >= family.len() {
        return input(format!("member index out of range for {}", family.label));
    }
    let x = s.values();
    let (a, b) = (family.member(i), family.member(j));
    if a.support_end(n).is_none() || b.support_end(n).is_none() {
        return Err(Error::Capability("double sums need rows with finite support".into()));
    }
    let (ra, rb) = (a.row(n, x.len()), b.row(n, x.len()));
    let mut acc = T::zero();
    for &(k, p) in &ra {
        for &(l, q) in &rb {
            acc += p * q * gauges.eval(k, l, i, j, (x[k - 1] - x[l - 1]).abs());
        }
    }
    Ok(ExtendedNonneg::from_scalar(acc))
}

/// sup_i of the gauge double sum over the evaluable rows.
pub fn gauge_pre_cauchy_series<T: Scalar>(s: &SequencePrefix<T>, family: &MatrixFamily<T>, gauges: &PairGauge<T>, scale: &Scale<T>) -> Result<Vec<T>> {
    let x = prefix(s, scale)?;
    let h = horizon(family, x.len())?;
    if let (Some(g), Some(vals)) = (gauges.as_uniform(), s.truncated(x.len()).finite_range(FINITE_RANGE_CAP)) {
        let w = value_weights(family, x, &vals, h);
        let f: Vec<Vec<T>> = vals.iter().map(|&v| vals.iter().map(|&u| g.eval((u - v).abs())).collect()).collect();
        return Ok((0..h)
            .map(|n| {
                (0..family.len())
                    .map(|i| {
                        let wi = &w[i];
                        (0..vals.len()).map(|v| (0..vals.len()).map(|u| wi[v][n] * wi[u][n] * f[v][u]).sum::<T>()).sum::<T>()
                    })
                    .fold(T::zero(), |m, u| m.max(u))
            })
            .collect());
    }
    let work: f64 = family.members().iter().map(|m| (1..=h).map(|n| (m.support_end(n).unwrap_or(x.len()).min(x.len()) as f64).powi(2)).sum::<f64>()).sum();
    if work > DIRECT_SUM_BUDGET as f64 {
        return Err(budget_error(work, x.len()));
    }
    let sp = s.truncated(x.len());
    (1..=h)
        .map(|n| {
            let mut best = T::zero();
            for i in 0..family.len() {
                best = best.max(gauge_pre_cauchy_sum(&sp, family, gauges, n, i, None)?.to_scalar());
            }
            Ok(best)
        })
        .collect()
}

fn row_sum_bound<T: Scalar>(family: &MatrixFamily<T>, scale: &Scale<T>) -> (T, usize) {
    let h = family.horizon(scale.n);
    let sums = family.row_sums(scale.n, h);
    let tail = family.max_tail(h, scale.n);
    let (mut m, mut arg) = (T::zero(), 1);
    for (n, &v) in sums.sup.iter().enumerate() {
        if v + tail > m {
            m = v + tail;
            arg = n + 1;
        }
    }
    (m, arg)
}

fn inf_density<T: Scalar>(family: &MatrixFamily<T>, mask: &[bool], h: usize) -> Vec<T> {
    family.envelope(&indicator::<T>(mask), h).inf
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubsequenceReport<T> {
    pub report: TheoremReport<T>,
    /// I-liminf of inf_i Σ_k b_nk^(i) χ_W(k).
    pub w: T,
    pub tau: T,
    /// I-liminf of inf_i Σ_k b_nk^(i) χ_A(k), A = {k ∈ W : |s_k − a| < ε/2}.
    pub r: T,
    /// Rows n ≤ horizon in E (pair mass at ε/2 at least τ) and F (density of A below r − τ).
    pub e_rows: Vec<usize>,
    pub f_rows: Vec<usize>,
}

/// A pre-Cauchy sequence that converges to a along a set W of positive lower density is
/// statistically convergent to a.
pub fn subsequence_convergence<T: Scalar>(
    s: &SequencePrefix<T>,
    family: &MatrixFamily<T>,
    ideal: &IdealHandle<T>,
    a: T,
    w_set: &IndexSet,
    scale: &Scale<T>,
) -> Result<SubsequenceReport<T>> {
    let x = prefix(s, scale)?;
    let len = x.len();
    let h = horizon(family, len)?;
    let rs = scale.clone().with_n(h);
    let (fam, j) = checked_derived_ideal(family, ideal, scale)?;
    let mut report = TheoremReport::new("pre-Cauchy subsequence criterion");

    let mut contained = Verdict::holds(ExtendedReal::Finite(T::zero()), T::zero(), scale);
    for probe in ideal.sample_members(scale) {
        let m = j.membership(&probe, scale)?;
        if !m.is_member() {
            contained = m.verdict(scale).with_note("a sampled member of I is not in J");
            break;
        }
        contained.residual = contained.residual.max(m.residual);
    }
    report.push("I contained in J", contained);
    let (m, arg) = row_sum_bound(&fam, scale);
    report.quantity("row_sum_bound", m);
    report.push("row sums bounded", Verdict::from_test(m.is_finite(), ExtendedReal::Finite(m), T::zero(), scale, vec![arg]));
    report.push("pre-Cauchy", pre_cauchy(s, &fam, ideal, &scale.eps_list, scale)?);

    let wm = w_set.mask(len);
    let mut sub = Verdict::holds(ExtendedReal::Finite(a), T::zero(), scale);
    for &eps in &scale.eps_list {
        let mask: Vec<bool> = (0..len).map(|k| wm[k] && (x[k] - a).abs() >= eps).collect();
        let mb = ideal.membership(&mask, scale)?;
        if !mb.is_member() {
            sub = mb.verdict(scale).with_note(format!("subsequence leaves the ε = {eps} band on a set outside I"));
            break;
        }
        sub.residual = sub.residual.max(mb.residual);
    }
    report.push("subsequence tends to a", sub);

    let dw = inf_density(&fam, &wm, h);
    let w = ideal.liminf(&dw, &rs)?.finite().unwrap_or(T::zero());
    report.quantity("w", w);
    let arg = (1..=h).rev().min_by(|&p, &q| total_cmp(&dw[p - 1], &dw[q - 1])).unwrap_or(h);
    report.push("w positive", Verdict::from_test(w > scale.null_threshold(), ExtendedReal::Finite(w), w, scale, vec![arg]));

    let eps = scale.min_eps();
    let delta = scale.min_eps();
    let tau = delta * w / (T::one() + delta);
    let am: Vec<bool> = (0..len).map(|k| wm[k] && (x[k] - a).abs() < eps / T::of(2.0)).collect();
    let da = inf_density(&fam, &am, h);
    let r = ideal.liminf(&da, &rs)?.finite().unwrap_or(T::zero());
    let u = pair_mass_series(s, &fam, eps / T::of(2.0), false, scale)?;
    let e_rows: Vec<usize> = (1..=h).filter(|&n| u[n - 1] >= tau).collect();
    let f_rows: Vec<usize> = (1..=h).filter(|&n| da[n - 1] < r - tau).collect();
    report.quantity("tau", tau);
    report.quantity("r", r);

    if report.hypotheses_hold() {
        let req = ConvergenceRequest::new(s.clone(), fam, ideal.clone(), scale.clone()).with_target(a);
        report.conclude(statistically_convergent(&req)?);
    } else {
        report.notes.push(format!("no claim: {} failed", report.failed_hypotheses().join(", ")));
    }
    Ok(SubsequenceReport { report, w, tau, r, e_rows, f_rows })
}

fn basis_variation<T: Scalar>(family: &MatrixFamily<T>, base: &FilterBase, scale: &Scale<T>) -> Result<Verdict<T>> {
    let len = scale.n;
    let h = family.horizon(len);
    let rs = scale.clone().with_n(h);
    let deepest = base.deepest(h, &rs);
    let idx: Vec<usize> = (1..=h).filter(|&n| base.in_complement(deepest, n)).collect();
    let from = idx.len().saturating_sub(BASIS_PAIRS + 1);
    let third = T::one() / T::of(3.0);
    let mut worst = T::zero();
    for p in idx[from..].windows(2) {
        let (n0, n1) = (p[0], p[1]);
        let mut best = T::infinity();
        for m in family.members() {
            let d: T = merge_rows(&m.row(n0, len), &m.row(n1, len), |u, v| (u - v).abs()).iter().map(|e| e.1).sum();
            let d = d + m.tail_bound(n0, len) + m.tail_bound(n1, len);
            best = best.min(d);
            if best < third {
                break;
            }
        }
        if best >= third {
            return Err(Error::Refused(format!("rows {n0} and {n1} differ by {best} >= 1/3 in l1 for every member")));
        }
        worst = worst.max(best);
    }
    let mut v = Verdict::holds(ExtendedReal::Finite(worst), worst, scale);
    if family.len() > 1 {
        v = v.with_note(format!("infimum over members i <= {} only", family.len() - 1));
    }
    Ok(v)
}

fn general_hypotheses<T: Scalar>(report: &mut TheoremReport<T>, family: &MatrixFamily<T>, ideal: &IdealHandle<T>, scale: &Scale<T>) -> Result<FilterBase> {
    let base = ideal
        .base()
        .ok_or_else(|| Error::Capability("the dichotomy needs an ideal given by a filter base".into()))?;
    report.push("ideal admissible", ideal.is_admissible(scale)?);
    let h = family.horizon(scale.n);
    let rs = scale.clone().with_n(h);
    let deepest = base.deepest(h, &rs);
    let sums = family.row_sums(scale.n, h);
    let tail = family.max_tail(h, scale.n);
    let (mut m, mut arg) = (T::zero(), h);
    for n in (1..=h).filter(|&n| base.in_complement(deepest, n)) {
        if sums.sup[n - 1] + tail > m {
            m = sums.sup[n - 1] + tail;
            arg = n;
        }
    }
    report.quantity("row_sum_bound", m);
    report.push("row sums bounded off an ideal set", Verdict::from_test(m.is_finite(), ExtendedReal::Finite(m), T::zero(), scale, vec![arg]));
    report.push("row sums tend to 1 uniformly", uniform_row_sums(family, ideal, scale)?);
    report.push("basis rows vary slowly", basis_variation(family, &base, scale)?);
    Ok(base)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DichotomyReport<T> {
    pub report: TheoremReport<T>,
    /// "X" when {s ≤ α} ∈ J, "Y" when {s ≥ β} ∈ J.
    pub via: Option<String>,
    pub x_member: Verdict<T>,
    pub y_member: Verdict<T>,
}

/// If the values in (α, β) form a set in J, then {s ≤ α} or {s ≥ β} is in J.
pub fn dichotomy_check<T: Scalar>(
    s: &SequencePrefix<T>,
    family: &MatrixFamily<T>,
    ideal: &IdealHandle<T>,
    alpha: T,
    beta: T,
    scale: &Scale<T>,
) -> Result<DichotomyReport<T>> {
    if alpha >= beta {
        return input("the dichotomy needs alpha < beta");
    }
    let x = prefix(s, scale)?;
    horizon(family, x.len())?;
    let (fam, j) = checked_derived_ideal(family, ideal, scale)?;
    let mut report = TheoremReport::new("pre-Cauchy dichotomy");
    general_hypotheses(&mut report, &fam, ideal, scale)?;
    let hm: Vec<bool> = x.iter().map(|&v| v > alpha && v < beta).collect();
    report.push("values in (alpha, beta) form a set in J", j.membership(&hm, scale)?.verdict(scale));
    report.push("pre-Cauchy plus", pre_cauchy_plus(s, &fam, ideal, &scale.eps_list, scale)?);

    let xm: Vec<bool> = x.iter().map(|&v| v <= alpha).collect();
    let ym: Vec<bool> = x.iter().map(|&v| v >= beta).collect();
    let x_member = j.membership(&xm, scale)?.verdict(scale);
    let y_member = j.membership(&ym, scale)?.verdict(scale);
    let via = if x_member.holds_at_scale() {
        Some("X".to_string())
    } else if y_member.holds_at_scale() {
        Some("Y".to_string())
    } else {
        None
    };
    if report.hypotheses_hold() {
        let c = match &via {
            Some(v) => {
                let m = if v == "X" { &x_member } else { &y_member };
                Verdict::holds(m.estimate, m.residual, scale).with_note(format!("satisfied via {v}"))
            }
            None if x_member.fails_at_scale() && y_member.fails_at_scale() => {
                let w: Vec<usize> = x_member.witnesses.iter().chain(&y_member.witnesses).copied().collect();
                Verdict::fails(x_member.estimate, x_member.residual.min(y_member.residual), scale, w)
            }
            None => Verdict::inconclusive(scale, "membership of X and Y undecided"),
        };
        report.conclude(c);
    } else {
        report.notes.push(format!("no claim: {} failed", report.failed_hypotheses().join(", ")));
    }
    Ok(DichotomyReport { report, via, x_member, y_member })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterConclusion<T> {
    pub report: TheoremReport<T>,
    /// Grid points found to be J-cluster points, with the grid radius.
    pub cluster_points: Vec<T>,
    pub radius: T,
    pub limit: Option<T>,
}

/// A J-bounded pre-Cauchy-plus sequence whose J-cluster set is nowhere dense is
/// statistically convergent. Finite-range sequences use their values as the grid.
pub fn nowhere_dense_cluster_conclusion<T: Scalar>(
    s: &SequencePrefix<T>,
    family: &MatrixFamily<T>,
    ideal: &IdealHandle<T>,
    scale: &Scale<T>,
) -> Result<ClusterConclusion<T>> {
    let x = prefix(s, scale)?;
    horizon(family, x.len())?;
    let (fam, j) = checked_derived_ideal(family, ideal, scale)?;
    let mut report = TheoremReport::new("nowhere dense cluster set");
    general_hypotheses(&mut report, &fam, ideal, scale)?;
    let ls = j.limsup(x, scale)?;
    let li = j.liminf(x, scale)?;
    report.push(
        "J-bounded",
        Verdict::from_test(ls.is_finite() && li.is_finite(), ls, T::zero(), scale, vec![x.len()]),
    );
    report.push("pre-Cauchy plus", pre_cauchy_plus(s, &fam, ideal, &scale.eps_list, scale)?);

    let finite = s.truncated(x.len()).finite_range(FINITE_RANGE_CAP);
    let (grid, radius) = match &finite {
        Some(vals) => {
            let gap = vals.windows(2).map(|p| p[1] - p[0]).fold(T::infinity(), |m, d| m.min(d));
            (vals.clone(), if gap.is_finite() { gap / T::of(2.0) } else { T::one() })
        }
        None => {
            let (lo, hi) = (s.truncated(x.len()).min(), s.truncated(x.len()).max());
            let step = (hi - lo) / T::of_usize(CLUSTER_GRID - 1);
            ((0..CLUSTER_GRID).map(|g| lo + step * T::of_usize(g)).collect(), step / T::of(2.0))
        }
    };
    let mut inside = Vec::with_capacity(grid.len());
    let mut undecided = 0;
    for &g in &grid {
        let near: Vec<bool> = x.iter().map(|&v| (v - g).abs() < radius).collect();
        let m = j.membership(&near, scale)?;
        if m.status == Status::Inconclusive {
            undecided += 1;
        }
        inside.push(!m.is_member());
    }
    let cluster_points: Vec<T> = grid.iter().zip(&inside).filter(|p| *p.1).map(|p| *p.0).collect();
    let mut run = 0;
    let mut longest = 0;
    for &b in &inside {
        run = if b { run + 1 } else { 0 };
        longest = longest.max(run);
    }
    if undecided > 0 {
        report.notes.push(format!("{undecided} grid points had undecided membership and were counted as cluster points"));
    }
    report.quantity("cluster_points", T::of_usize(cluster_points.len()));
    let dense = finite.is_none() && longest > 2;
    report.push(
        "cluster set nowhere dense on the grid",
        if dense {
            Verdict::inconclusive(scale, format!("{longest} adjacent grid points are cluster points; grid too coarse to certify"))
        } else {
            Verdict::holds(ExtendedReal::Finite(T::of_usize(longest)), T::zero(), scale)
        },
    );

    let mut limit = None;
    if report.hypotheses_hold() {
        let req = ConvergenceRequest::new(s.clone(), fam, ideal.clone(), scale.clone());
        let mut cands = cluster_points.clone();
        cands.push(statistical_limit_estimate(&req)?);
        let mut last = None;
        for a in cands {
            let v = statistically_convergent(&req.clone().with_target(a))?;
            if v.holds_at_scale() {
                limit = Some(a);
                last = Some(v);
                break;
            }
            last = Some(v);
        }
        report.conclude(last.unwrap_or_else(|| Verdict::inconclusive(scale, "no candidate limit")));
    } else {
        report.notes.push(format!("no claim: {} failed", report.failed_hypotheses().join(", ")));
    }
    Ok(ClusterConclusion { report, cluster_points, radius, limit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{build_shift_family, Cesaro, RowFn};
    use crate::orlicz::{identity_gauge, power_gauge};
    use crate::sequence::is_square;
    use std::sync::Arc;

    fn cesaro() -> MatrixFamily<f64> {
        MatrixFamily::single(Arc::new(Cesaro))
    }

    fn squares(n: usize) -> SequencePrefix<f64> {
        SequencePrefix::from_fn(n, |k| if is_square(k) { 1.0 } else { 0.0 })
    }

    fn alternating(n: usize) -> SequencePrefix<f64> {
        SequencePrefix::from_fn(n, |k| if k % 2 == 0 { 1.0 } else { -1.0 })
    }

    /// Brute-force double sum for the Cesàro row n.
    fn brute(x: &[f64], n: usize, eps: f64) -> f64 {
        let mut c = 0usize;
        for k in 0..n {
            for l in 0..n {
                if (x[k] - x[l]).abs() >= eps {
                    c += 1;
                }
            }
        }
        c as f64 / (n * n) as f64
    }

    #[test]
    fn pair_exceptional_set() {
        let x = [0.0, 1.0, 0.2];
        let d = PairExceptionalSet { s: &x, eps: 0.5 };
        assert!(d.contains(1, 2) && d.contains(2, 1) && !d.contains(1, 3));
        let d = PairExceptionalSet { s: &x, eps: 1.5 };
        assert!((1..=3).all(|k| (1..=3).all(|l| !d.contains(k, l))));
    }

    #[test]
    fn pair_mass_matches_brute_force() {
        let sq = squares(100);
        let sc: Scale<f64> = Scale::new(100);
        let u = pair_mass_series(&sq, &cesaro(), 0.5, false, &sc).unwrap();
        assert!((u[99] - 0.18).abs() < 1e-12);
        assert!((u[99] - brute(sq.values(), 100, 0.5)).abs() < 1e-12);
        // generic paths: windowed and sorted rows on a sequence with many values
        let r = SequencePrefix::from_fn(300, |k| ((k * 37) % 101) as f64 / 101.0);
        let sc: Scale<f64> = Scale::new(300);
        let u = pair_mass_series(&r, &cesaro(), 0.3, false, &sc).unwrap();
        let banded: MatrixRef<f64> = Arc::new(RowFn::banded("cesaro copy", |n, _| 1.0 / n as f64, |_| 1, |n| n, true));
        let v = pair_mass_series(&r, &MatrixFamily::single(banded), 0.3, false, &sc).unwrap();
        let w = pair_mass_series(&r, &cesaro(), 0.3, true, &sc).unwrap();
        for n in [1, 2, 17, 150, 300] {
            let b = brute(r.values(), n, 0.3);
            assert!((u[n - 1] - b).abs() < 1e-12, "n = {n}");
            assert!((v[n - 1] - b).abs() < 1e-12, "n = {n}");
            assert!((w[n - 1] - b).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn pre_cauchy_examples() {
        let n = 4000;
        let sc: Scale<f64> = Scale::new(n);
        let f = IdealHandle::Finite;
        assert!(pre_cauchy(&squares(n), &cesaro(), &f, &sc.eps_list, &sc).unwrap().holds_at_scale());
        let c = SequencePrefix::from_fn(n, |_| 1.0);
        let u = pair_mass_series(&c, &cesaro(), 0.1, false, &sc).unwrap();
        assert!(u.iter().all(|&v| v == 0.0));
        let alt = alternating(n);
        let u = pair_mass_series(&alt, &cesaro(), 0.5, false, &sc).unwrap();
        assert!((u[n - 1] - 0.5).abs() < 1e-12);
        assert!(pre_cauchy(&alt, &cesaro(), &f, &sc.eps_list, &sc).unwrap().fails_at_scale());
    }

    #[test]
    fn pre_cauchy_plus_examples() {
        let n = 2000;
        let sc: Scale<f64> = Scale::new(n);
        let f = IdealHandle::Finite;
        let a = pre_cauchy(&squares(n), &cesaro(), &f, &sc.eps_list, &sc).unwrap();
        let b = pre_cauchy_plus(&squares(n), &cesaro(), &f, &sc.eps_list, &sc).unwrap();
        assert_eq!(a.status, b.status);
        assert_eq!(a.residual, b.residual);
        let shifts = build_shift_family(Arc::new(Cesaro) as MatrixRef<f64>, 16);
        let sc16 = sc.clone().with_i_max(16);
        assert!(pre_cauchy_plus(&squares(n), &shifts, &f, &sc16.eps_list, &sc16).unwrap().holds_at_scale());
        assert!(pre_cauchy_plus(&alternating(n), &shifts, &f, &sc16.eps_list, &sc16).unwrap().fails_at_scale());
    }

    #[test]
    fn gauge_sum_examples() {
        let id = PairGauge::uniform(identity_gauge());
        let v = gauge_pre_cauchy_sum(&squares(100), &cesaro(), &id, 100, 0, None).unwrap();
        assert!((v.to_scalar() - 0.18).abs() < 1e-12);
        let c = SequencePrefix::from_fn(50, |_| 2.0);
        assert_eq!(gauge_pre_cauchy_sum(&c, &cesaro(), &id, 50, 0, None).unwrap().to_scalar(), 0.0);
        let sq = PairGauge::uniform(power_gauge(2.0).unwrap());
        let v = gauge_pre_cauchy_sum(&alternating(100), &cesaro(), &sq, 100, 0, None).unwrap();
        assert!((v.to_scalar() - 2.0).abs() < 1e-12);
        let sc: Scale<f64> = Scale::new(100);
        let series = gauge_pre_cauchy_series(&alternating(100), &cesaro(), &sq, &sc).unwrap();
        assert!((series[99] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn subsequence_examples() {
        let n = 4000;
        let sc: Scale<f64> = Scale::new(n);
        let f = IdealHandle::Finite;
        let nonsq = IndexSet::predicate("non-squares", |k| !is_square(k));
        let r = subsequence_convergence(&squares(n), &cesaro(), &f, 0.0, &nonsq, &sc).unwrap();
        assert!(r.report.hypotheses_hold(), "{:?}", r.report.failed_hypotheses());
        // lower density of the non-squares over (2000, 4000]
        let oracle = (2001..=4000).map(|m| 1.0 - (m as f64).sqrt().floor() / m as f64).fold(1.0, f64::min);
        assert!((r.w - oracle).abs() < 1e-12 && r.w > 0.9);
        assert_eq!(r.report.status(), Status::HoldsAtScale);

        let r = subsequence_convergence(&alternating(n), &cesaro(), &f, 1.0, &IndexSet::evens(), &sc).unwrap();
        assert!((r.w - 0.5).abs() < 1e-3);
        assert_eq!(r.report.failed_hypotheses(), vec!["pre-Cauchy"]);
        assert!(r.report.conclusion.is_none());

        let c = SequencePrefix::from_fn(n, |_| 0.25);
        let r = subsequence_convergence(&c, &cesaro(), &f, 0.25, &IndexSet::all(), &sc).unwrap();
        assert_eq!(r.w, 1.0);
        assert_eq!(r.report.status(), Status::HoldsAtScale);
    }

    #[test]
    fn dichotomy_examples() {
        let n = 4000;
        let sc: Scale<f64> = Scale::new(n);
        let f = IdealHandle::Finite;
        let r = dichotomy_check(&squares(n), &cesaro(), &f, 0.25, 0.75, &sc).unwrap();
        assert!(r.report.hypotheses_hold(), "{:?}", r.report.failed_hypotheses());
        assert_eq!(r.via.as_deref(), Some("Y"));
        assert!(r.x_member.fails_at_scale());

        let half = SequencePrefix::from_fn(n, |k| (k % 2) as f64);
        let r = dichotomy_check(&half, &cesaro(), &f, 0.25, 0.75, &sc).unwrap();
        assert_eq!(r.report.failed_hypotheses(), vec!["pre-Cauchy plus"]);
        assert!(r.report.conclusion.is_none());

        let c = SequencePrefix::from_fn(n, |_| 0.9);
        let r = dichotomy_check(&c, &cesaro(), &f, 0.25, 0.75, &sc).unwrap();
        assert_eq!(r.via.as_deref(), Some("X"));
        assert!(r.y_member.fails_at_scale());
        assert_eq!(r.report.status(), Status::HoldsAtScale);
    }

    #[test]
    fn slow_variation_refusal() {
        let id: MatrixRef<f64> = Arc::new(crate::matrix::Identity);
        let sc: Scale<f64> = Scale::new(200);
        let e = dichotomy_check(&squares(200), &MatrixFamily::single(id), &IdealHandle::Finite, 0.25, 0.75, &sc).unwrap_err();
        assert!(matches!(e, Error::Refused(_)));
    }

    #[test]
    fn nowhere_dense_examples() {
        let n = 4000;
        let sc: Scale<f64> = Scale::new(n);
        let f = IdealHandle::Finite;
        let r = nowhere_dense_cluster_conclusion(&squares(n), &cesaro(), &f, &sc).unwrap();
        assert_eq!(r.cluster_points, vec![0.0]);
        assert_eq!(r.limit, Some(0.0));
        assert_eq!(r.report.status(), Status::HoldsAtScale);

        let dom = SequencePrefix::from_fn(n, |k| if is_square(k) { 5.0 } else if k.is_power_of_two() { 7.0 } else { 2.0 });
        let r = nowhere_dense_cluster_conclusion(&dom, &cesaro(), &f, &sc).unwrap();
        assert_eq!(r.limit, Some(2.0));

        let c = SequencePrefix::from_fn(n, |_| -1.5);
        let r = nowhere_dense_cluster_conclusion(&c, &cesaro(), &f, &sc).unwrap();
        assert_eq!(r.cluster_points, vec![-1.5]);
        assert_eq!(r.limit, Some(-1.5));
    }
}
