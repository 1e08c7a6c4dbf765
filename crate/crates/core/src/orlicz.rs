//! Orlicz functions, moduli and families of them.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::scalar::Scalar;
use crate::scale::Scale;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeKind {
    /// Convex and unbounded.
    Orlicz,
    /// Subadditive.
    Modulus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GaugeDescriptor {
    Power { p: f64 },
    Table { points: Vec<(f64, f64)> },
    ExpMinusOne,
    Custom { label: String },
}

type GaugeFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// F: [0,∞) → [0,∞) with F(t) = 0 iff t = 0.
#[derive(Clone)]
pub struct GaugeFunction<T: Scalar> {
    eval: GaugeFn<T>,
    pub kind: GaugeKind,
    pub descriptor: GaugeDescriptor,
}

impl<T: Scalar> fmt::Debug for GaugeFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GaugeFunction({:?}, {:?})", self.kind, self.descriptor)
    }
}

pub const SAMPLE_LO: f64 = 1e-6;
pub const SAMPLE_HI: f64 = 1e3;
pub const GRID_POINTS: usize = 256;
const LAW_SAMPLES: usize = 1000;
const UNBOUNDED_AT: f64 = 1e6;
const UNBOUNDED_ABOVE: f64 = 1e3;

/// 256 geometric points over [1e-6, 1e3].
pub fn sample_grid<T: Scalar>() -> Vec<T> {
    let (lo, hi) = (SAMPLE_LO.ln(), SAMPLE_HI.ln());
    (0..GRID_POINTS).map(|j| T::of((lo + (hi - lo) * j as f64 / (GRID_POINTS - 1) as f64).exp())).collect()
}

fn law_tol<T: Scalar>(scale_of: T) -> T {
    let rel = T::of(1e-12).max(T::epsilon() * T::of(64.0));
    rel * scale_of.abs().max(T::one())
}

fn log_uniform<T: Scalar>(rng: &mut ChaCha8Rng) -> T {
    let (lo, hi) = (SAMPLE_LO.ln(), SAMPLE_HI.ln());
    T::of(rng.gen_range(lo..hi).exp())
}

impl<T: Scalar> GaugeFunction<T> {
    /// Wraps an evaluator after checking the laws of `kind` on samples.
    pub fn new(
        eval: impl Fn(T) -> T + Send + Sync + 'static,
        kind: GaugeKind,
        descriptor: GaugeDescriptor,
    ) -> Result<Self> {
        let g = GaugeFunction { eval: Arc::new(eval), kind, descriptor };
        g.validate(0)?;
        Ok(g)
    }

    fn unchecked(eval: impl Fn(T) -> T + Send + Sync + 'static, kind: GaugeKind, descriptor: GaugeDescriptor) -> Self {
        GaugeFunction { eval: Arc::new(eval), kind, descriptor }
    }

    pub fn eval(&self, t: T) -> T {
        (self.eval)(t)
    }

    /// Checks F(0) = 0, positivity and monotonicity on the sample grid, then the kind's
    /// law on 1000 seeded random pairs or triples.
    pub fn validate(&self, seed: u64) -> Result<()> {
        let f = |t: T| self.eval(t);
        if f(T::zero()) != T::zero() {
            return input(format!("F(0) = {} for {:?}", f(T::zero()), self.descriptor));
        }
        let grid = sample_grid::<T>();
        let mut prev = T::zero();
        for &t in &grid {
            let v = f(t);
            if !(v > T::zero()) {
                return input(format!("F({t}) = {v} is not positive"));
            }
            if v < prev - law_tol(prev) {
                return input(format!("F decreases before t = {t}"));
            }
            prev = v;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self.kind {
            GaugeKind::Orlicz => {
                for _ in 0..LAW_SAMPLES {
                    let (a, b): (T, T) = (log_uniform(&mut rng), log_uniform(&mut rng));
                    let mid = f((a + b) * T::of(0.5));
                    let chord = (f(a) + f(b)) * T::of(0.5);
                    if mid > chord + law_tol(chord) {
                        return input(format!("midpoint convexity fails at ({a}, {b})"));
                    }
                }
                let far = f(T::of(UNBOUNDED_AT));
                if !(far > T::of(UNBOUNDED_ABOVE)) {
                    return input(format!("F({UNBOUNDED_AT}) = {far} does not look unbounded"));
                }
            }
            GaugeKind::Modulus => {
                for _ in 0..LAW_SAMPLES {
                    let (a, b): (T, T) = (log_uniform(&mut rng), log_uniform(&mut rng));
                    let lhs = f(a + b);
                    let rhs = f(a) + f(b);
                    if lhs > rhs + law_tol(rhs) {
                        return input(format!("subadditivity fails at ({a}, {b})"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// F_p(t) = t^p; an Orlicz function for p ≥ 1, a modulus for p ≤ 1.
pub fn power_gauge<T: Scalar>(p: T) -> Result<GaugeFunction<T>> {
    if !(p > T::zero()) || !p.is_finite() {
        return input(format!("power gauge needs p > 0, got {p}"));
    }
    let kind = if p >= T::one() { GaugeKind::Orlicz } else { GaugeKind::Modulus };
    let d = GaugeDescriptor::Power { p: p.as_f64() };
    if p == T::one() {
        return Ok(GaugeFunction::unchecked(|t| t, kind, d));
    }
    Ok(GaugeFunction::unchecked(move |t: T| t.powf(p), kind, d))
}

pub fn identity_gauge<T: Scalar>() -> GaugeFunction<T> {
    GaugeFunction::unchecked(|t| t, GaugeKind::Orlicz, GaugeDescriptor::Power { p: 1.0 })
}

pub fn exp_minus_one<T: Scalar>() -> GaugeFunction<T> {
    GaugeFunction::unchecked(|t: T| t.exp_m1(), GaugeKind::Orlicz, GaugeDescriptor::ExpMinusOne)
}

/// Piecewise linear interpolation of (t, F(t)) points starting at (0, 0), extended
/// beyond the last point with the last slope. Orlicz when slopes never decrease,
/// a modulus when they never increase.
pub fn table_gauge<T: Scalar>(points: &[(f64, f64)]) -> Result<GaugeFunction<T>> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    if pts.first().is_none_or(|p| p.0 != 0.0) {
        pts.insert(0, (0.0, 0.0));
    }
    if pts.len() < 2 {
        return input("table gauge needs at least one point besides the origin");
    }
    if pts[0].1 != 0.0 {
        return input("table gauge must vanish at 0");
    }
    let slopes: Vec<f64> = pts
        .windows(2)
        .map(|w| if w[1].0 > w[0].0 { Ok((w[1].1 - w[0].1) / (w[1].0 - w[0].0)) } else { Err(()) })
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Input("table abscissae must increase".into()))?;
    if slopes.iter().any(|&s| !(s > 0.0)) {
        return input("table gauge must be strictly increasing");
    }
    let kind = if slopes.windows(2).all(|w| w[1] >= w[0]) {
        GaugeKind::Orlicz
    } else if slopes.windows(2).all(|w| w[1] <= w[0]) {
        GaugeKind::Modulus
    } else {
        return input("table slopes are neither non-decreasing nor non-increasing");
    };
    let d = GaugeDescriptor::Table { points: pts.clone() };
    let last_slope = *slopes.last().unwrap_or(&1.0);
    let pts_t: Vec<(T, T)> = pts.iter().map(|&(a, b)| (T::of(a), T::of(b))).collect();
    let eval = move |t: T| {
        let j = pts_t.partition_point(|p| p.0 <= t);
        if j >= pts_t.len() {
            let (a, b) = pts_t[pts_t.len() - 1];
            return b + (t - a) * T::of(last_slope);
        }
        let (a0, b0) = pts_t[j - 1];
        let (a1, b1) = pts_t[j];
        b0 + (b1 - b0) * (t - a0) / (a1 - a0)
    };
    GaugeFunction::new(eval, kind, d)
}

/// max over the grid of F(2t)/F(t) and the t attaining it.
pub fn delta2_constant<T: Scalar>(f: &GaugeFunction<T>, grid: &[T]) -> Result<(T, T)> {
    let mut best = (T::neg_infinity(), T::zero());
    for &t in grid {
        if !(t > T::zero()) {
            return input("delta2 grid must be positive");
        }
        let v = f.eval(t);
        if !(v > T::zero()) {
            return input(format!("F({t}) = 0 for t > 0"));
        }
        let r = f.eval(t + t) / v;
        if r > best.0 {
            best = (r, t);
        }
    }
    if grid.is_empty() {
        return input("empty delta2 grid");
    }
    Ok(best)
}

type FamilyFn<T> = Arc<dyn Fn(usize, usize, T) -> T + Send + Sync>;

/// F_k^(i) for k ≥ 1 and family index i.
#[derive(Clone)]
pub struct GaugeFamily<T: Scalar> {
    f: FamilyFn<T>,
    pub label: String,
    pub kind: GaugeKind,
    /// Members do not depend on k.
    pub k_uniform: bool,
    /// Members do not depend on i.
    pub i_uniform: bool,
    /// A single gauge used for every (k, i).
    uniform: Option<GaugeFunction<T>>,
}

impl<T: Scalar> fmt::Debug for GaugeFamily<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GaugeFamily({})", self.label)
    }
}

/// p_ki = p_min + (p_max − p_min)·((7k + 3i) mod 11)/10, which hits both ends.
pub fn mixed_exponent(k: usize, i: usize, p_min: f64, p_max: f64) -> f64 {
    p_min + (p_max - p_min) * ((7 * k + 3 * i) % 11) as f64 / 10.0
}

impl<T: Scalar> GaugeFamily<T> {
    pub fn uniform(g: GaugeFunction<T>) -> Self {
        let g2 = g.clone();
        GaugeFamily {
            f: Arc::new(move |_, _, t| g2.eval(t)),
            label: format!("{:?}", g.descriptor),
            kind: g.kind,
            k_uniform: true,
            i_uniform: true,
            uniform: Some(g),
        }
    }

    pub fn identity() -> Self {
        GaugeFamily::uniform(identity_gauge())
    }

    pub fn from_fn(
        label: impl Into<String>,
        kind: GaugeKind,
        k_uniform: bool,
        i_uniform: bool,
        f: impl Fn(usize, usize, T) -> T + Send + Sync + 'static,
    ) -> Self {
        GaugeFamily { f: Arc::new(f), label: label.into(), kind, k_uniform, i_uniform, uniform: None }
    }

    /// t^{p(k,i)} with every exponent in [p_min, p_max] ⊂ [1, ∞).
    pub fn mixed_power(p_min: f64, p_max: f64) -> Result<Self> {
        if !(p_min >= 1.0 && p_max >= p_min && p_max.is_finite()) {
            return input(format!("mixed power family needs 1 <= p_min <= p_max, got [{p_min}, {p_max}]"));
        }
        Ok(GaugeFamily::from_fn(format!("t^p, p in [{p_min}, {p_max}]"), GaugeKind::Orlicz, false, false, move |k, i, t: T| {
            t.powf(T::of(mixed_exponent(k, i, p_min, p_max)))
        }))
    }

    pub fn eval(&self, k: usize, i: usize, t: T) -> T {
        (self.f)(k, i, t)
    }

    pub fn as_uniform(&self) -> Option<&GaugeFunction<T>> {
        self.uniform.as_ref()
    }

    pub fn member(&self, k: usize, i: usize) -> GaugeFunction<T> {
        if let Some(g) = &self.uniform {
            return g.clone();
        }
        let f = self.f.clone();
        GaugeFunction::unchecked(
            move |t| f(k, i, t),
            self.kind,
            GaugeDescriptor::Custom { label: format!("{} at k = {k}, i = {i}", self.label) },
        )
    }

    /// (k, i) pairs over which envelopes are taken at this scale.
    pub fn sample_indices(&self, scale: &Scale<T>) -> Vec<(usize, usize)> {
        let ks = if self.k_uniform { vec![1] } else { k_samples(scale.n) };
        let is: Vec<usize> = if self.i_uniform { vec![0] } else { (0..=scale.i_max).collect() };
        ks.iter().flat_map(|&k| is.iter().map(move |&i| (k, i))).collect()
    }

    /// Validates every sampled member.
    pub fn validate(&self, scale: &Scale<T>) -> Result<()> {
        for (j, (k, i)) in self.sample_indices(scale).into_iter().enumerate() {
            self.member(k, i).validate(j as u64).map_err(|e| Error::Input(format!("member (k = {k}, i = {i}): {e}")))?;
        }
        Ok(())
    }
}

/// k = 1..=64, a geometric ladder up to n, and n itself.
pub fn k_samples(n: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = (1..=n.min(64)).collect();
    let mut k = 64.0f64;
    while (k as usize) < n {
        ks.push(k as usize);
        k *= 1.25;
    }
    ks.push(n.max(1));
    ks.sort_unstable();
    ks.dedup();
    ks
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnvelopeValue<T> {
    pub value: T,
    pub k: usize,
    pub i: usize,
    /// Extremum attained at the largest sampled k: the infinite-family value may lie beyond.
    pub at_scale_boundary: bool,
    /// Value within tol of 0 (lower) or not finite (upper).
    pub degenerate: bool,
}

fn envelope<T: Scalar>(fam: &GaugeFamily<T>, t: T, scale: &Scale<T>, upper: bool) -> Result<EnvelopeValue<T>> {
    if !(t > T::zero()) {
        return input("envelope needs t > 0");
    }
    let idx = fam.sample_indices(scale);
    let kmax = idx.iter().map(|p| p.0).max().unwrap_or(1);
    let mut best: Option<(T, usize, usize)> = None;
    for (k, i) in idx {
        let v = fam.eval(k, i, t);
        let better = match best {
            None => true,
            Some((b, _, _)) => (upper && v > b) || (!upper && v < b),
        };
        if better {
            best = Some((v, k, i));
        }
    }
    let (value, k, i) = best.ok_or_else(|| Error::Input("empty gauge family".into()))?;
    let degenerate = if upper { !value.is_finite() } else { value <= scale.tol };
    Ok(EnvelopeValue { value, k, i, at_scale_boundary: !fam.k_uniform && k == kmax && kmax > 1, degenerate })
}

/// L(t) = inf_{k,i} F_k^(i)(t) over sampled indices.
pub fn lower_envelope<T: Scalar>(fam: &GaugeFamily<T>, t: T, scale: &Scale<T>) -> Result<EnvelopeValue<T>> {
    envelope(fam, t, scale, false)
}

/// h(t) = sup_{k,i} F_k^(i)(t) over sampled indices.
pub fn upper_envelope<T: Scalar>(fam: &GaugeFamily<T>, t: T, scale: &Scale<T>) -> Result<EnvelopeValue<T>> {
    envelope(fam, t, scale, true)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquiDelta<T> {
    pub delta: T,
    /// The binding member has the largest sampled k.
    pub scale_dependent: bool,
}

/// Largest δ with sup_{k,i} F_k^(i)(δ) ≤ τ: the last admissible grid point refined by
/// bisection towards the next one.
pub fn equicontinuity_delta<T: Scalar>(fam: &GaugeFamily<T>, tau: T, scale: &Scale<T>) -> Result<EquiDelta<T>> {
    if !(tau > T::zero()) {
        return input("tau must be positive");
    }
    let g = |d: T| upper_envelope(fam, d, scale);
    let grid = sample_grid::<T>();
    let mut last = None;
    for (j, &d) in grid.iter().enumerate() {
        if g(d)?.value <= tau {
            last = Some(j);
        } else {
            break;
        }
    }
    let j = last.ok_or_else(|| Error::Refused(format!("no delta >= {SAMPLE_LO} keeps the family below {tau}")))?;
    let mut lo = grid[j];
    if j + 1 < grid.len() {
        let mut hi = grid[j + 1];
        for _ in 0..60 {
            let mid = (lo + hi) * T::of(0.5);
            if g(mid)?.value <= tau {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let e = g(lo + lo * T::of(1e-9))?;
    Ok(EquiDelta { delta: lo, scale_dependent: e.at_scale_boundary })
}

type PairFn<T> = Arc<dyn Fn(usize, usize, usize, usize, T) -> T + Send + Sync>;

/// Double-index gauges F_kl^(i) (j = i) or F_kl^(ij).
#[derive(Clone)]
pub struct PairGauge<T: Scalar> {
    f: PairFn<T>,
    pub label: String,
    uniform: Option<GaugeFunction<T>>,
}

impl<T: Scalar> PairGauge<T> {
    pub fn uniform(g: GaugeFunction<T>) -> Self {
        let g2 = g.clone();
        PairGauge { f: Arc::new(move |_, _, _, _, t| g2.eval(t)), label: format!("{:?}", g.descriptor), uniform: Some(g) }
    }

    pub fn from_fn(label: impl Into<String>, f: impl Fn(usize, usize, usize, usize, T) -> T + Send + Sync + 'static) -> Self {
        PairGauge { f: Arc::new(f), label: label.into(), uniform: None }
    }

    pub fn eval(&self, k: usize, l: usize, i: usize, j: usize, t: T) -> T {
        (self.f)(k, l, i, j, t)
    }

    pub fn as_uniform(&self) -> Option<&GaugeFunction<T>> {
        self.uniform.as_ref()
    }
}

/// Gauge configuration as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GaugeSpec {
    Power { p: f64 },
    Table { points: Vec<(f64, f64)> },
    MixedPower { p_min: f64, p_max: f64 },
    ExpMinusOne,
}

impl GaugeSpec {
    pub fn family<T: Scalar>(&self) -> Result<GaugeFamily<T>> {
        match self {
            GaugeSpec::Power { p } => Ok(GaugeFamily::uniform(power_gauge(T::of(*p))?)),
            GaugeSpec::Table { points } => Ok(GaugeFamily::uniform(table_gauge(points)?)),
            GaugeSpec::MixedPower { p_min, p_max } => GaugeFamily::mixed_power(*p_min, *p_max),
            GaugeSpec::ExpMinusOne => Ok(GaugeFamily::uniform(exp_minus_one())),
        }
    }
}
