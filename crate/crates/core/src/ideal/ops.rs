use crate::error::{input, Error, Result};
use crate::ideal::IdealHandle;
use crate::scalar::{ExtendedNonneg, ExtendedReal, Scalar};
use crate::scale::Scale;
use crate::sequence::SequencePrefix;
use crate::verdict::{Status, Verdict};

fn prefix<'a, T: Scalar>(u: &'a SequencePrefix<T>, scale: &Scale<T>) -> Result<&'a [T]> {
    scale.validate()?;
    u.require_len(scale.n)?;
    Ok(&u.values()[..scale.n])
}

fn last_index_of<T: Scalar>(v: &[T], x: T) -> Option<usize> {
    (1..=v.len()).rev().find(|&n| v[n - 1] == x)
}

/// I-limit test. The estimate is the midpoint of [I-liminf, I-limsup] when their gap is
/// at most min ε.
pub fn ideal_limit<T: Scalar>(u: &SequencePrefix<T>, ideal: &IdealHandle<T>, scale: &Scale<T>) -> Result<Verdict<T>> {
    let v = prefix(u, scale)?;
    let ls = ideal.limsup(v, scale)?;
    let li = ideal.liminf(v, scale)?;
    let (hi, lo) = match (ls.finite(), li.finite()) {
        (Some(h), Some(l)) => (h, l),
        _ => {
            let w: Vec<usize> = (1..=v.len()).rev().filter(|&n| v[n - 1].is_infinite()).take(4).collect();
            return Ok(Verdict::fails(ls, T::infinity(), scale, w).with_note("infinite I-limsup or I-liminf"));
        }
    };
    let gap = hi - lo;
    let half = T::of(0.5);
    if gap > scale.min_eps() {
        let w: Vec<usize> = [last_index_of(v, hi), last_index_of(v, lo)].into_iter().flatten().collect();
        return Ok(Verdict::fails(ExtendedReal::Finite((hi + lo) * half), gap * half, scale, w)
            .with_note(format!("I-limsup {hi} and I-liminf {lo} differ by more than min eps")));
    }
    let a = (hi + lo) * half;
    let dev: Vec<T> = v.iter().map(|&x| (x - a).abs()).collect();
    match ideal {
        IdealHandle::Derived(_) => {
            let mut residual = T::zero();
            for &eps in &scale.eps_list {
                let mask: Vec<bool> = dev.iter().map(|&d| d >= eps).collect();
                let m = ideal.membership(&mask, scale)?;
                residual = residual.max(m.residual);
                match m.status {
                    Status::HoldsAtScale => {}
                    Status::FailsAtScale => {
                        return Ok(Verdict::fails(ExtendedReal::Finite(a), m.residual, scale, m.witnesses)
                            .with_note(format!("exceptional set for eps = {eps} is not in the ideal")))
                    }
                    Status::Inconclusive => {
                        let mut vd = Verdict::inconclusive(scale, format!("membership undecided for eps = {eps}"));
                        vd.estimate = ExtendedReal::Finite(a);
                        vd.residual = m.residual;
                        return Ok(vd);
                    }
                }
            }
            Ok(Verdict::holds(ExtendedReal::Finite(a), residual, scale))
        }
        _ => {
            let base = ideal.base().expect("based");
            let (r, level, _) =
                base.min_of_max(&dev, scale).ok_or_else(|| Error::Inconclusive("all filter sets empty".into()))?;
            let eps = scale.min_eps();
            let w: Vec<usize> = (1..=v.len()).filter(|&n| base.in_complement(level, n) && dev[n - 1] > eps).take(16).collect();
            Ok(Verdict::from_test(r <= eps, ExtendedReal::Finite(a), r, scale, w))
        }
    }
}

pub fn ideal_limsup<T: Scalar>(u: &SequencePrefix<T>, ideal: &IdealHandle<T>, scale: &Scale<T>) -> Result<ExtendedReal<T>> {
    ideal.limsup(prefix(u, scale)?, scale)
}

pub fn ideal_liminf<T: Scalar>(u: &SequencePrefix<T>, ideal: &IdealHandle<T>, scale: &Scale<T>) -> Result<ExtendedReal<T>> {
    ideal.liminf(prefix(u, scale)?, scale)
}

/// Holds iff {n ≤ N : |u_n| > K} belongs to the ideal at scale.
pub fn is_ideal_bounded<T: Scalar>(u: &SequencePrefix<T>, ideal: &IdealHandle<T>, k: T, scale: &Scale<T>) -> Result<Verdict<T>> {
    if !(k > T::zero()) {
        return input("bound K must be positive");
    }
    let v = prefix(u, scale)?;
    let mask: Vec<bool> = v.iter().map(|x| x.abs() > k).collect();
    let m = ideal.membership(&mask, scale)?;
    Ok(match m.status {
        Status::Inconclusive => Verdict::inconclusive(scale, "membership of the exceptional set undecided"),
        s => Verdict::from_test(s == Status::HoldsAtScale, ExtendedReal::Finite(k), m.residual, scale, m.witnesses),
    })
}

/// Searches k with {n : |u_n − u_k| ≥ ε} in the ideal; candidates are tried by distance
/// of u_k from the I-limsup/liminf midpoint.
pub fn is_ideal_cauchy<T: Scalar>(u: &SequencePrefix<T>, ideal: &IdealHandle<T>, eps: T, scale: &Scale<T>) -> Result<Verdict<T>> {
    if !(eps > T::zero()) {
        return input("eps must be positive");
    }
    let v = prefix(u, scale)?;
    let centre = match (ideal.limsup(v, scale)?.finite(), ideal.liminf(v, scale)?.finite()) {
        (Some(h), Some(l)) => (h + l) * T::of(0.5),
        _ => v[v.len() - 1],
    };
    let mut order: Vec<usize> = (1..=v.len()).collect();
    order.sort_by(|&a, &b| crate::scalar::total_cmp(&(v[a - 1] - centre).abs(), &(v[b - 1] - centre).abs()).then(b.cmp(&a)));
    let mut tried: Vec<T> = Vec::new();
    let mut best: Option<(T, Vec<usize>)> = None;
    for k in order {
        let x = v[k - 1];
        if tried.contains(&x) {
            continue;
        }
        tried.push(x);
        let mask: Vec<bool> = v.iter().map(|&y| (y - x).abs() >= eps).collect();
        let m = ideal.membership(&mask, scale)?;
        if m.is_member() {
            return Ok(Verdict::from_test(true, ExtendedReal::Finite(x), m.residual, scale, vec![k]));
        }
        if best.as_ref().is_none_or(|b| m.residual < b.0) {
            let w = if m.witnesses.is_empty() { vec![k] } else { m.witnesses.clone() };
            best = Some((m.residual, w));
        }
        if tried.len() >= 32 {
            break;
        }
    }
    let (r, w) = best.unwrap_or((T::infinity(), vec![1]));
    Ok(Verdict::fails(ExtendedReal::Finite(centre), r, scale, w))
}

/// Grid points a whose ε-neighbourhood index set is not in the ideal.
pub fn ideal_cluster_points<T: Scalar>(
    u: &SequencePrefix<T>,
    ideal: &IdealHandle<T>,
    grid: &[T],
    eps: T,
    scale: &Scale<T>,
) -> Result<Vec<T>> {
    if grid.is_empty() {
        return input("cluster grid is empty");
    }
    if !(eps > T::zero()) {
        return input("eps must be positive");
    }
    let v = prefix(u, scale)?;
    let mut out = Vec::new();
    for &a in grid {
        let mask: Vec<bool> = v.iter().map(|&x| (x - a).abs() < eps).collect();
        if ideal.membership(&mask, scale)?.is_non_member() {
            out.push(a);
        }
    }
    Ok(out)
}

/// sup_i |U_i(n) − g_i| → 0 along the ideal.
pub fn uniform_ideal_limit<T: Scalar>(us: &[Vec<T>], g: &[T], ideal: &IdealHandle<T>, scale: &Scale<T>) -> Result<Verdict<T>> {
    scale.validate()?;
    check_shapes(us.len(), g.len(), us.iter().map(|u| u.len()), scale.n)?;
    let w: Vec<T> =
        (0..scale.n).map(|n| us.iter().zip(g).fold(T::zero(), |acc, (u, &gi)| acc.max((u[n] - gi).abs()))).collect();
    let t = ideal.null_test(&w, scale)?;
    Ok(t.verdict(T::zero(), scale))
}

/// Uniform limit for [0,∞]-valued families under the generalized metric.
pub fn uniform_ideal_limit_ext<T: Scalar>(
    us: &[Vec<ExtendedNonneg<T>>],
    g: &[ExtendedNonneg<T>],
    ideal: &IdealHandle<T>,
    scale: &Scale<T>,
) -> Result<Verdict<T>> {
    scale.validate()?;
    check_shapes(us.len(), g.len(), us.iter().map(|u| u.len()), scale.n)?;
    let w: Vec<T> = (0..scale.n)
        .map(|n| us.iter().zip(g).fold(T::zero(), |acc, (u, &gi)| acc.max(u[n].dist(gi).to_scalar())))
        .collect();
    let t = ideal.null_test(&w, scale)?;
    Ok(t.verdict(T::zero(), scale))
}

fn check_shapes(members: usize, targets: usize, lens: impl Iterator<Item = usize>, n: usize) -> Result<()> {
    if members == 0 {
        return input("empty family");
    }
    if members != targets {
        return input(format!("{members} members but {targets} targets"));
    }
    let lens: Vec<usize> = lens.collect();
    if lens.iter().any(|&l| l != lens[0]) {
        return input("family members have mismatched lengths");
    }
    if lens[0] < n {
        return input(format!("members have length {} < N = {n}", lens[0]));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::FilterBase;
    use crate::matrix::{check_condition_plus, derived_ideal, Cesaro, MatrixFamily};
    use crate::sequence::is_square;
    use std::sync::Arc;

    fn jc(scale: &Scale<f64>) -> IdealHandle<f64> {
        let mut f = MatrixFamily::single(Arc::new(Cesaro));
        check_condition_plus(&mut f, &[0], scale);
        derived_ideal(&f, &IdealHandle::Finite).unwrap()
    }

    fn squares(n: usize) -> SequencePrefix<f64> {
        SequencePrefix::from_fn(n, |k| if is_square(k) { 1.0 } else { 0.0 })
    }

    fn alternating(n: usize) -> SequencePrefix<f64> {
        SequencePrefix::from_fn(n, |k| if k % 2 == 0 { 1.0 } else { -1.0 })
    }

    #[test]
    fn limit_examples() {
        let s = Scale::new(10_000);
        let v = ideal_limit(&SequencePrefix::from_fn(10_000, |n| 1.0 / n as f64), &IdealHandle::Finite, &s).unwrap();
        assert!(v.holds_at_scale());
        assert!(v.estimate.finite().unwrap().abs() < 1e-3);

        let v = ideal_limit(&squares(10_000), &jc(&s), &s).unwrap();
        assert!(v.holds_at_scale());
        assert_eq!(v.estimate, ExtendedReal::Finite(0.0));

        let v = ideal_limit(&alternating(10_000), &IdealHandle::Finite, &s).unwrap();
        assert!(v.fails_at_scale());
        assert!(!v.witnesses.is_empty());
    }

    #[test]
    fn squares_density_oracle_at_100() {
        // brute-force prefix density of squares
        let d = (1..=100).filter(|&k| is_square(k)).count() as f64 / 100.0;
        assert_eq!(d, 0.1);
        let s = Scale::new(100);
        assert!(ideal_limit(&squares(100), &jc(&s), &s).unwrap().holds_at_scale());
    }

    #[test]
    fn limsup_examples() {
        let s = Scale::new(10_000);
        let alt = alternating(10_000);
        assert_eq!(ideal_limsup(&alt, &IdealHandle::Finite, &s).unwrap(), ExtendedReal::Finite(1.0));
        assert_eq!(ideal_liminf(&alt, &IdealHandle::Finite, &s).unwrap(), ExtendedReal::Finite(-1.0));
        assert_eq!(ideal_limsup(&squares(10_000), &jc(&s), &s).unwrap(), ExtendedReal::Finite(0.0));
        let c = SequencePrefix::from_fn(10_000, |_| 2.5);
        assert_eq!(ideal_limsup(&c, &IdealHandle::Finite, &s).unwrap(), ExtendedReal::Finite(2.5));
        assert_eq!(ideal_limsup(&c, &jc(&s), &s).unwrap(), ExtendedReal::Finite(2.5));
    }

    #[test]
    fn bounded_examples() {
        let s = Scale::new(10_000);
        let u = SequencePrefix::from_fn(10_000, |k| if is_square(k) { k as f64 } else { 0.0 });
        assert!(is_ideal_bounded(&u, &jc(&s), 1.0, &s).unwrap().holds_at_scale());
        let lin = SequencePrefix::from_fn(10_000, |k| k as f64);
        assert!(is_ideal_bounded(&lin, &IdealHandle::Finite, 50.0, &s).unwrap().fails_at_scale());
        let b = alternating(10_000);
        assert!(is_ideal_bounded(&b, &IdealHandle::Finite, 1.0, &s).unwrap().holds_at_scale());
        assert!(is_ideal_bounded(&b, &IdealHandle::Finite, 0.0, &s).is_err());
    }

    #[test]
    fn cauchy_examples() {
        let s = Scale::new(10_000);
        let v = is_ideal_cauchy(&SequencePrefix::from_fn(10_000, |n| 1.0 / n as f64), &IdealHandle::Finite, 0.1, &s).unwrap();
        assert!(v.holds_at_scale());
        assert!(v.witnesses[0] > 100);
        let v = is_ideal_cauchy(&squares(10_000), &jc(&s), 0.5, &s).unwrap();
        assert!(v.holds_at_scale());
        assert!(!is_square(v.witnesses[0]));
        let v = is_ideal_cauchy(&alternating(10_000), &IdealHandle::Finite, 0.5, &s).unwrap();
        assert!(v.fails_at_scale());
    }

    #[test]
    fn cluster_examples() {
        let s = Scale::new(10_000);
        let j = jc(&s);
        let c = ideal_cluster_points(&alternating(10_000), &j, &[-1.0, 0.0, 1.0], 0.1, &s).unwrap();
        assert_eq!(c, vec![-1.0, 1.0]);
        let k = SequencePrefix::from_fn(10_000, |_| 0.3);
        assert_eq!(ideal_cluster_points(&k, &j, &[0.0, 0.3, 1.0], 0.1, &s).unwrap(), vec![0.3]);
        assert_eq!(ideal_cluster_points(&squares(10_000), &j, &[0.0, 1.0], 0.1, &s).unwrap(), vec![0.0]);
        assert!(ideal_cluster_points(&k, &j, &[], 0.1, &s).is_err());
    }

    #[test]
    fn uniform_examples() {
        let n = 10_000;
        let s = Scale::new(n);
        let us: Vec<Vec<f64>> = (0..=64).map(|i| (1..=n).map(|k| 1.0 / (k + i) as f64).collect()).collect();
        assert!(uniform_ideal_limit(&us, &vec![0.0; 65], &IdealHandle::Finite, &s).unwrap().holds_at_scale());

        let us: Vec<Vec<f64>> = (0..=10).map(|i| (1..=n).map(|k| i as f64 / (k + i) as f64).collect()).collect();
        let v = uniform_ideal_limit(&us, &[0.0; 11], &IdealHandle::Finite, &s).unwrap();
        assert!(v.holds_at_scale());
        // deepest window starts at N/2 + 1
        assert_eq!(v.residual, 10.0 / (n / 2 + 1 + 10) as f64);

        let us: Vec<Vec<f64>> = (0..=n).map(|i| (1..=n).map(|k| if k == i { 1.0 } else { 0.0 }).collect()).collect();
        assert!(uniform_ideal_limit(&us, &vec![0.0; n + 1], &IdealHandle::Finite, &s).unwrap().fails_at_scale());

        assert!(uniform_ideal_limit(&[vec![0.0; 5], vec![0.0; 6]], &[0.0, 0.0], &IdealHandle::Finite, &Scale::new(5)).is_err());
    }

    #[test]
    fn uniform_extended_values() {
        let s = Scale::new(20);
        let inf = ExtendedNonneg::<f64>::Infinite;
        let us = vec![vec![inf; 20]];
        assert!(uniform_ideal_limit_ext(&us, &[inf], &IdealHandle::Finite, &s).unwrap().holds_at_scale());
        assert!(uniform_ideal_limit_ext(&us, &[ExtendedNonneg::zero()], &IdealHandle::Finite, &s).unwrap().fails_at_scale());
    }

    #[test]
    fn tails_avoiding_absorbs_the_set() {
        let s = Scale::new(1_000);
        let i = IdealHandle::<f64>::Based(FilterBase::TailsAvoiding(crate::sequence::IndexSet::squares()));
        let v = ideal_limit(&squares(1_000), &i, &s).unwrap();
        assert!(v.holds_at_scale());
        assert_eq!(v.estimate, ExtendedReal::Finite(0.0));
    }
}
