use serde::{Deserialize, Serialize};

use super::weighted_density;
use crate::error::{Error, Result};
use crate::ideal::{ideal_limit, FilterBase, IdealHandle};
use crate::matrix::{check_condition_plus, derived_ideal, MatrixFamily};
use crate::scalar::{ExtendedReal, Scalar};
use crate::scale::Scale;
use crate::sequence::{IndexSet, SequencePrefix};
use crate::verdict::{Status, Verdict};

/// Per-level values sup_i sup_{n ∈ B_m} Σ_k b_nk^(i) χ_{ℕ∖B_m}(k).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BaseConditionReport<T> {
    pub values: Vec<(usize, T)>,
    pub verdict: Verdict<T>,
}

/// One step m of the construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Stage<T> {
    pub m: usize,
    pub eps: T,
    /// |A_m ∩ [1..N]|.
    pub a_count: usize,
    /// |E_m| and max E_m (0 when empty).
    pub e_count: usize,
    pub e_max: usize,
    pub absorbed: bool,
    pub p: Option<usize>,
    /// M_{p_m}: F_m = B_{M_{p_m}}.
    pub level: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionResult<T> {
    pub t: SequencePrefix<T>,
    /// C = {k : s_k ≠ t_k}.
    pub disagreement: Vec<usize>,
    pub stages: Vec<Stage<T>>,
    /// (p, M_p, off-base mass of the rows in B_{M_p}).
    pub levels: Vec<(usize, usize, T)>,
    /// Last stage whose witness set was absorbed by the base.
    pub m_stop: usize,
    /// |F_1|, the first threshold of the trace.
    pub first_threshold: usize,
    /// Indices k beyond every F_m; they use m(k) = m_stop + 1.
    pub beyond_last: usize,
    pub limit: Verdict<T>,
    pub membership: Verdict<T>,
    pub status: Status,
    pub notes: Vec<String>,
}

impl<T: Scalar> DecompositionResult<T> {
    pub fn disagreement_set(&self) -> IndexSet {
        IndexSet::from_indices(self.disagreement.iter().copied(), self.t.len())
    }
}

fn level_value<T: Scalar>(family: &MatrixFamily<T>, base: &FilterBase, m: usize, len: usize, rows: usize) -> T {
    if matches!(base, FilterBase::Tails) && family.is_lower_triangular() {
        return T::zero();
    }
    let mut worst = T::zero();
    for member in family.members() {
        for n in (1..=rows).filter(|&n| base.in_base(m, n)) {
            let v: T = member.row(n, len).iter().filter(|e| base.in_complement(m, e.0)).map(|e| e.1).sum();
            worst = worst.max(v + member.tail_bound(n, len));
        }
    }
    worst
}

/// Off-base mass on levels m = 1..=m_max; holds when the values over the last quarter
/// of the levels are at most min ε.
pub fn check_base_condition<T: Scalar>(
    family: &MatrixFamily<T>,
    base: &FilterBase,
    scale: &Scale<T>,
) -> Result<BaseConditionReport<T>> {
    scale.validate()?;
    if !family.is_nonnegative() {
        return Err(Error::Input(format!("{} has negative entries", family.label)));
    }
    let len = scale.n;
    let h = family.horizon(len);
    let values: Vec<(usize, T)> = (1..=scale.m_max).map(|m| (m, level_value(family, base, m, len, h))).collect();
    let from = scale.m_max - scale.m_max / 4;
    let (late, arg) = values[from - 1..].iter().fold((T::zero(), from), |acc, &(m, v)| if v > acc.0 { (v, m) } else { acc });
    let last = values.last().map_or(T::zero(), |p| p.1);
    let verdict = Verdict::from_test(late <= scale.min_eps(), ExtendedReal::Finite(last), late, scale, vec![arg]);
    Ok(BaseConditionReport { values, verdict })
}

fn candidate_levels<T: Scalar>(base: &FilterBase, rows: usize, scale: &Scale<T>) -> Vec<usize> {
    match base {
        FilterBase::Custom { .. } => (1..=scale.m_max).collect(),
        _ => {
            let deepest = base.deepest(rows, &scale.clone().with_n(rows));
            let mut out: Vec<usize> = (1..=deepest.min(64)).collect();
            let mut m = 64.0f64;
            while (m as usize) < deepest {
                m *= 1.25;
                out.push((m as usize).min(deepest));
            }
            out.dedup();
            out
        }
    }
}

/// Runs the construction of the decomposition theorem: t is I-convergent to a and
/// agrees with s off a set in J_{B,I}.
pub fn decompose_statistical<T: Scalar>(
    s: &SequencePrefix<T>,
    family: &MatrixFamily<T>,
    ideal: &IdealHandle<T>,
    a: T,
    scale: &Scale<T>,
) -> Result<DecompositionResult<T>> {
    scale.validate()?;
    s.require_len(scale.n)?;
    let len = scale.n;
    let x = &s.values()[..len];
    let base = ideal
        .base()
        .ok_or_else(|| Error::Capability("decomposition needs an ideal given by a filter base".into()))?;
    if !ideal.is_admissible(scale)?.holds_at_scale() {
        return Err(Error::Refused(format!("{} is not admissible at this scale", ideal.label())));
    }
    let mut fam = family.clone();
    let candidates: Vec<usize> = (0..fam.len()).collect();
    if !check_condition_plus(&mut fam, &candidates, scale).holds_at_scale() {
        return Err(Error::Refused("condition (+) fails for the family".into()));
    }
    let j = derived_ideal(&fam, ideal)?;
    for probe in ideal.sample_members(scale) {
        if !j.membership(&probe, scale)?.is_member() {
            return Err(Error::Refused("a member of I is not in J at this scale".into()));
        }
    }
    let bc = check_base_condition(&fam, &base, scale)?;
    if !bc.verdict.holds_at_scale() {
        return Err(Error::Refused(format!("base condition fails: late level value {}", bc.verdict.residual)));
    }

    let h = fam.horizon(len);
    let cands = candidate_levels(&base, h, scale);
    let mut levels: Vec<(usize, usize, T)> = Vec::new();
    let mut cursor = 0usize;
    // M_p: the next candidate past M_{p-1} whose off-base mass is at most 2^-p
    let mut next_level = |levels: &mut Vec<(usize, usize, T)>| -> bool {
        let p = levels.len() + 1;
        let target = T::of(0.5f64.powi(p as i32));
        while cursor < cands.len() {
            let m = cands[cursor];
            cursor += 1;
            let v = level_value(&fam, &base, m, len, h);
            if v <= target {
                levels.push((p, m, v));
                return true;
            }
        }
        false
    };

    let a_mask = |m: usize| -> Vec<bool> {
        let eps = T::of(0.5f64.powi(m as i32));
        x.iter().map(|&v| (v - a).abs() >= eps).collect()
    };
    let mut stages: Vec<Stage<T>> = Vec::new();
    let mut f_levels: Vec<usize> = Vec::new();
    let mut p_prev = 0usize;
    for m in 1..=scale.m_max {
        let eps = T::of(0.5f64.powi(m as i32));
        let am = a_mask(m);
        let dens = weighted_density(&fam, &am, h);
        let e: Vec<usize> = (1..=h).filter(|&n| dens[n - 1] >= eps).collect();
        let mut stage = Stage {
            m,
            eps,
            a_count: am.iter().filter(|b| **b).count(),
            e_count: e.len(),
            e_max: e.last().copied().unwrap_or(0),
            absorbed: false,
            p: None,
            level: None,
        };
        let mut p = p_prev + 1;
        loop {
            while levels.len() < p {
                if !next_level(&mut levels) {
                    break;
                }
            }
            if levels.len() < p {
                break;
            }
            let lvl = levels[p - 1].1;
            if e.iter().all(|&n| base.in_base(lvl, n)) {
                stage.absorbed = true;
                stage.p = Some(p);
                stage.level = Some(lvl);
                break;
            }
            p += 1;
        }
        let absorbed = stage.absorbed;
        stages.push(stage);
        if !absorbed {
            break;
        }
        p_prev = p;
        f_levels.push(levels[p - 1].1);
    }
    let m_stop = f_levels.len();

    let mut notes = vec![format!("witness sets E_m are uniform over i <= {} only", fam.len().saturating_sub(1))];
    let a_masks: Vec<Vec<bool>> = (1..=m_stop + 1).map(a_mask).collect();
    let mut t = x.to_vec();
    let mut disagreement = Vec::new();
    let mut beyond = 0;
    for k in 1..=len {
        let mk = f_levels.iter().position(|&l| base.in_base(l, k)).map_or_else(
            || {
                beyond += 1;
                m_stop + 1
            },
            |p| p + 1,
        );
        if a_masks[mk - 1][k - 1] {
            t[k - 1] = a;
            if x[k - 1] != a {
                disagreement.push(k);
            }
        }
    }
    if beyond > 0 {
        notes.push(format!("{beyond} indices lie beyond F_{m_stop} and use m(k) = {}", m_stop + 1));
    }
    let t = SequencePrefix::new(t);
    let limit = ideal_limit(&t, ideal, scale)?;
    let mask: Vec<bool> = (1..=len).map(|k| disagreement.binary_search(&k).is_ok()).collect();
    let mb = j.membership(&mask, scale)?;
    let membership = mb.verdict(scale);
    let limit_ok = limit.holds_at_scale() && (limit.estimate.to_scalar() - a).abs() <= scale.min_eps();
    let status = if m_stop == 0 {
        notes.push("no witness set was absorbed by the base".into());
        Status::Inconclusive
    } else if limit_ok && membership.holds_at_scale() {
        Status::HoldsAtScale
    } else if limit.fails_at_scale() || membership.fails_at_scale() {
        Status::FailsAtScale
    } else {
        Status::Inconclusive
    };
    let first_threshold = f_levels.first().copied().unwrap_or(0);
    Ok(DecompositionResult {
        t,
        disagreement,
        stages,
        levels,
        m_stop,
        first_threshold,
        beyond_last: beyond,
        limit,
        membership,
        status,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{Cesaro, Identity, MatrixRef, RowFn};
    use crate::sequence::is_square;
    use std::sync::Arc;

    fn single(m: MatrixRef<f64>) -> MatrixFamily<f64> {
        MatrixFamily::single(m)
    }

    #[test]
    fn base_condition_examples() {
        let s: Scale<f64> = Scale::new(200);
        let r = check_base_condition(&single(Arc::new(Cesaro)), &FilterBase::Tails, &s).unwrap();
        assert!(r.values.iter().all(|p| p.1 == 0.0));
        let r = check_base_condition(&single(Arc::new(Identity)), &FilterBase::Tails, &s).unwrap();
        assert!(r.values.iter().all(|p| p.1 == 0.0) && r.verdict.holds_at_scale());
        let g: MatrixRef<f64> = Arc::new(RowFn::geometric_rows());
        let r = check_base_condition(&single(g), &FilterBase::Tails, &s).unwrap();
        for &(m, v) in &r.values {
            assert!((v - 0.5f64.powi(m as i32)).abs() < 1e-15, "m = {m}: {v}");
        }
        assert!(r.verdict.holds_at_scale());
    }

    /// Brute-force oracle for E_m under the Cesàro matrix.
    fn e_max_oracle(s: &[f64], eps: f64) -> usize {
        let mut count = 0.0;
        let mut last = 0;
        for n in 1..=s.len() {
            if s[n - 1].abs() >= eps {
                count += 1.0;
            }
            if count / n as f64 >= eps {
                last = n;
            }
        }
        last
    }

    #[test]
    fn squares_decomposition() {
        let n = 10_000;
        let s = SequencePrefix::from_fn(n, |k| if is_square(k) { 1.0 } else { 0.0 });
        let sc: Scale<f64> = Scale::new(n);
        let r = decompose_statistical(&s, &single(Arc::new(Cesaro)), &IdealHandle::Finite, 0.0, &sc).unwrap();
        for st in &r.stages {
            assert_eq!(st.e_max, e_max_oracle(s.values(), st.eps), "stage {}", st.m);
        }
        assert_eq!(r.m_stop, 6);
        assert_eq!(r.stages[5].e_max, 4096);
        assert!(r.t.values().iter().all(|&v| v == 0.0));
        assert_eq!(r.disagreement, (1..=100).map(|j| j * j).collect::<Vec<_>>());
        assert_eq!(r.status, Status::HoldsAtScale);
        assert!(r.first_threshold >= 4);
    }

    #[test]
    fn convergent_input_changes_finitely() {
        let n = 4000;
        let s = SequencePrefix::from_fn(n, |k| 1.0 / k as f64);
        let sc: Scale<f64> = Scale::new(n);
        let r = decompose_statistical(&s, &single(Arc::new(Cesaro)), &IdealHandle::Finite, 0.0, &sc).unwrap();
        assert!(!r.disagreement.is_empty());
        let last = *r.disagreement.last().unwrap();
        assert!(last <= 1 << (r.m_stop + 1));
        for k in last + 1..=n {
            assert_eq!(r.t.get(k), s.get(k));
        }
        assert_eq!(r.status, Status::HoldsAtScale);
    }

    #[test]
    fn constant_is_untouched() {
        let n = 1000;
        let s = SequencePrefix::from_fn(n, |_| 0.4);
        let r = decompose_statistical(&s, &single(Arc::new(Cesaro)), &IdealHandle::Finite, 0.4, &Scale::new(n)).unwrap();
        assert!(r.disagreement.is_empty());
        assert_eq!(r.t, s);
    }
}
