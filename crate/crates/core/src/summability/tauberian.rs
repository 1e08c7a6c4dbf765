use std::sync::Arc;

use super::{statistically_convergent, ConvergenceRequest};
use crate::error::{input, Result};
use crate::ideal::{ideal_limit, IdealHandle};
use crate::matrix::{MatrixFamily, MatrixRef};
use crate::scalar::{ExtendedReal, Scalar};
use crate::scale::Scale;
use crate::sequence::SequencePrefix;
use crate::verdict::{TheoremReport, Verdict};

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Growth allowed between the variation ratios of (N/4, N/2] and (N/2, N].
pub const VARIATION_GROWTH: f64 = 1.5;
/// Points per axis of the coupling grid.
pub const COUPLING_GRID: usize = 64;

/// φ, ψ and h of the Tauberian condition.
#[derive(Clone)]
pub struct TauberianFns<T> {
    pub phi: ScalarFn<T>,
    pub psi: ScalarFn<T>,
    pub h: ScalarFn<T>,
}

impl<T: Scalar> TauberianFns<T> {
    pub fn new(
        phi: impl Fn(T) -> T + Send + Sync + 'static,
        psi: impl Fn(T) -> T + Send + Sync + 'static,
        h: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        TauberianFns { phi: Arc::new(phi), psi: Arc::new(psi), h: Arc::new(h) }
    }

    /// φ(x) = ψ(x) = 1/x, h(x) = x/(1+x).
    pub fn canonical() -> Self {
        TauberianFns::new(|x: T| x.recip(), |x: T| x.recip(), |x: T| x / (T::one() + x))
    }
}

fn grid<T: Scalar>(points: usize) -> Vec<T> {
    let (lo, hi) = (1e-3f64.ln(), 1e6f64.ln());
    (0..points).map(|j| T::of((lo + (hi - lo) * j as f64 / (points - 1) as f64).exp())).collect()
}

fn rel_tol<T: Scalar>(v: T) -> T {
    T::of(1e-9).max(T::epsilon() * T::of(64.0)) * T::one().max(v.abs())
}

fn sample_rows(n: usize) -> Vec<usize> {
    let mut rows: Vec<usize> = (1..=n.min(256)).collect();
    let mut r = 256.0f64;
    while (r as usize) < n {
        r *= 1.05;
        rows.push((r as usize).min(n));
    }
    rows.dedup();
    rows
}

/// Checks every hypothesis of the Tauberian theorem at scale; when all hold and s is
/// statistically convergent to a, ordinary (I-) convergence is asserted and verified.
pub fn tauberian_check<T: Scalar>(
    s: &SequencePrefix<T>,
    a_mat: MatrixRef<T>,
    ideal: &IdealHandle<T>,
    fns: &TauberianFns<T>,
    target: Option<T>,
    scale: &Scale<T>,
) -> Result<TheoremReport<T>> {
    scale.validate()?;
    s.require_len(scale.n)?;
    let n = scale.n;
    let x = &s.values()[..n];
    let mut report = TheoremReport::new("tauberian");
    if !a_mat.is_lower_triangular() {
        return input(format!("{} is not lower triangular", a_mat.label()));
    }
    report.push("ideal admissible", ideal.is_admissible(scale)?);

    let dev: Vec<T> = (1..=n).map(|r| (a_mat.row_sum(r, r) - T::one()).abs()).collect();
    report.push("row sums tend to 1", ideal.null_test(&dev, scale)?.verdict(T::one(), scale));
    let cols = 128.min(n / 4).max(1);
    let colmax: Vec<T> = (1..=n).map(|r| a_mat.row(r, cols).iter().fold(T::zero(), |m, e| m.max(e.1.abs()))).collect();
    report.push("columns tend to 0", ideal.null_test(&colmax, scale)?.verdict(T::zero(), scale));

    // min_{k<=n} a_nk >= psi(n)
    let mut worst = T::infinity();
    let mut bad = Vec::new();
    for r in sample_rows(n) {
        let row = a_mat.row(r, r);
        let lo = if row.len() < r { T::zero() } else { row.iter().fold(T::infinity(), |m, e| m.min(e.1)) };
        let p = (fns.psi)(T::of_usize(r));
        let slack = lo - p;
        worst = worst.min(slack);
        if slack < -rel_tol(p) {
            bad.push(r);
        }
    }
    report.push("minimum entry dominates psi", Verdict::from_test(bad.is_empty(), ExtendedReal::Finite(worst), (-worst).max(T::zero()), scale, bad));

    let g: Vec<T> = grid(COUPLING_GRID * 4);
    let mut bad = Vec::new();
    for (j, w) in g.windows(2).enumerate() {
        let (p, q) = ((fns.phi)(w[0]), (fns.phi)(w[1]));
        if q > p + rel_tol(p) || !q.is_finite() {
            bad.push(j + 1);
        }
    }
    report.push("phi decreasing", Verdict::from_test(bad.is_empty(), ExtendedReal::Finite(T::zero()), T::zero(), scale, bad));

    // h(x_n) -> 0 forces x_n -> 0: h positive and bounded away from 0 beyond each point
    let mut bad = Vec::new();
    let mut run = T::infinity();
    for (j, &t) in g.iter().enumerate().rev() {
        run = run.min((fns.h)(t));
        if run.is_nan() || run <= T::zero() {
            bad.push(j + 1);
        }
    }
    report.push("h detects null sequences", Verdict::from_test(bad.is_empty(), ExtendedReal::Finite(T::zero()), T::zero(), scale, bad));

    let cg: Vec<T> = grid(COUPLING_GRID);
    let mut worst = T::zero();
    let mut bad = Vec::new();
    for (jx, &u) in cg.iter().enumerate() {
        for &v in &cg {
            let lhs = u * (fns.psi)(u + v);
            let rhs = (fns.h)(u * (fns.phi)(v));
            let gap = rhs - lhs;
            worst = worst.max(gap);
            if gap > rel_tol(rhs) {
                bad.push(jx + 1);
            }
        }
    }
    bad.dedup();
    report.push("coupling inequality", Verdict::from_test(bad.is_empty(), ExtendedReal::Finite(worst), worst.max(T::zero()), scale, bad));

    // |s_n - s_{n+1}| = O(phi(n)): ratio maxima over the last two dyadic blocks
    let ratio: Vec<T> = (1..n).map(|k| (x[k - 1] - x[k]).abs() / (fns.phi)(T::of_usize(k))).collect();
    let block = |lo: usize, hi: usize| -> (T, usize) {
        (lo.max(1)..hi.min(n - 1) + 1).fold((T::zero(), lo.max(1)), |acc, k| if ratio[k - 1] > acc.0 { (ratio[k - 1], k) } else { acc })
    };
    let (early, _) = block(n / 4 + 1, n / 2);
    let (late, arg) = block(n / 2 + 1, n - 1);
    let c = ratio.iter().skip(n / 4).fold(T::zero(), |m, &r| m.max(r));
    report.quantity("variation_constant", c);
    let ok = late.is_finite() && late <= early * T::of(VARIATION_GROWTH) + rel_tol(early);
    report.push(
        "variation is O(phi)",
        Verdict::from_test(ok, ExtendedReal::Finite(c), (late - early * T::of(VARIATION_GROWTH)).max(T::zero()), scale, vec![arg + 1])
            .with_note(format!("max ratio {early} on (N/4, N/2], {late} on (N/2, N]")),
    );

    let mut req = ConvergenceRequest::new(s.clone(), MatrixFamily::single(a_mat), ideal.clone(), scale.clone());
    req.target = target;
    let stat = statistically_convergent(&req)?;
    let a = stat.estimate.finite().unwrap_or(T::zero());
    report.quantity("a", a);
    report.push("A-statistically convergent", stat);

    if report.hypotheses_hold() {
        let lim = ideal_limit(s, ideal, scale)?;
        let close = lim.estimate.finite().is_some_and(|e| (e - a).abs() <= scale.min_eps());
        let mut c = if close || !lim.holds_at_scale() { lim } else { Verdict::fails(lim.estimate, lim.residual, scale, vec![n]) };
        c = c.with_note("ordinary convergence to a verified directly");
        report.conclude(c);
    } else {
        report.notes.push(format!("no claim: {} failed", report.failed_hypotheses().join(", ")));
    }
    Ok(report)
}
