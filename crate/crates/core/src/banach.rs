//! Finite-dimensional normed spaces, their dual balls, and the sup-limsup checks over
//! boundaries of the dual ball.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{input, Error, Result};
use crate::ideal::IdealHandle;
use crate::matrix::MatrixFamily;
use crate::orlicz::{equicontinuity_delta, lower_envelope, upper_envelope, GaugeFamily};
use crate::scalar::{ExtendedReal, Scalar};
use crate::scale::Scale;
use crate::sequence::SequencePrefix;
use crate::summability::{b_summable, statistically_convergent, strong_summable, ConvergenceRequest};
use crate::verdict::{Status, TheoremReport, Verdict};

/// Hull membership tolerance (l1 distance of the best convex combination).
pub const HULL_TOL: f64 = 1e-9;
const DEDUP_TOL: f64 = 1e-9;
const MAX_CUBE_DIM: usize = 16;

fn exponent_de<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum P {
        Num(f64),
        Name(String),
    }
    match P::deserialize(d)? {
        P::Num(p) => Ok(p),
        P::Name(s) if matches!(s.as_str(), "inf" | "infinity") => Ok(f64::INFINITY),
        P::Name(s) => Err(D::Error::custom(format!("unknown exponent {s:?}"))),
    }
}

fn exponent_ser<S: Serializer>(p: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if p.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*p)
    }
}

/// Space configuration as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceSpec {
    /// Unit ball given by the vertices of a symmetric polytope.
    Polytope { vertices: Vec<Vec<f64>> },
    Pnorm {
        #[serde(deserialize_with = "exponent_de", serialize_with = "exponent_ser")]
        p: f64,
        d: usize,
    },
}

#[derive(Clone, Debug)]
pub enum Norm<T> {
    Polytope { vertices: Vec<Vec<T>> },
    PNorm { p: T },
}

/// ℝ^d with a polytope norm or a p-norm, and the extreme points of its dual ball when the
/// dual ball is a polytope.
#[derive(Clone, Debug)]
pub struct FiniteDimSpace<T: Scalar> {
    d: usize,
    norm: Norm<T>,
    dual_extreme: Option<Vec<Vec<T>>>,
    label: String,
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn tiny<T: Scalar>() -> T {
    T::of(1e-12).max(T::epsilon() * T::of(64.0))
}

/// Solves a·y = b by elimination with partial pivoting; `None` when singular.
fn solve<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let d = b.len();
    for c in 0..d {
        let p = (c..d).max_by(|&i, &j| crate::scalar::total_cmp(&a[i][c].abs(), &a[j][c].abs()))?;
        if !(a[p][c].abs() > T::of(1e-10)) {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..d {
            let f = a[r][c] / a[c][c];
            for k in c..d {
                let t = a[c][k];
                a[r][k] -= f * t;
            }
            let t = b[c];
            b[r] -= f * t;
        }
    }
    let mut y = vec![T::zero(); d];
    for c in (0..d).rev() {
        let s: T = (c + 1..d).map(|k| a[c][k] * y[k]).sum();
        y[c] = (b[c] - s) / a[c][c];
    }
    Some(y)
}

fn rank<T: Scalar>(rows: &[Vec<T>], d: usize) -> usize {
    let mut m: Vec<Vec<T>> = rows.to_vec();
    let mut r = 0;
    for c in 0..d {
        let Some(p) = (r..m.len()).max_by(|&i, &j| crate::scalar::total_cmp(&m[i][c].abs(), &m[j][c].abs())) else {
            break;
        };
        if !(m[p][c].abs() > T::of(1e-9)) {
            continue;
        }
        m.swap(r, p);
        for i in r + 1..m.len() {
            let f = m[i][c] / m[r][c];
            for k in c..d {
                let t = m[r][k];
                m[i][k] -= f * t;
            }
        }
        r += 1;
    }
    r
}

fn combinations(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return;
    }
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn close<T: Scalar>(a: &[T], b: &[T], tol: T) -> bool {
    a.iter().zip(b).all(|(&x, &y)| (x - y).abs() <= tol)
}

impl<T: Scalar> FiniteDimSpace<T> {
    /// Unit ball conv(vertices); the list must be symmetric and span ℝ^d.
    pub fn polytope(vertices: Vec<Vec<T>>) -> Result<Self> {
        let d = vertices.first().map_or(0, |v| v.len());
        if d == 0 {
            return input("polytope needs at least one nonempty vertex");
        }
        if let Some(j) = vertices.iter().position(|v| v.len() != d || v.iter().any(|x| !x.is_finite())) {
            return input(format!("vertex {} has the wrong dimension or a non-finite coordinate", j + 1));
        }
        let tol = T::of(DEDUP_TOL);
        for (j, v) in vertices.iter().enumerate() {
            let neg: Vec<T> = v.iter().map(|&x| -x).collect();
            if !vertices.iter().any(|w| close(w, &neg, tol)) {
                return input(format!("unit ball not symmetric: -v missing for vertex {}", j + 1));
            }
        }
        if rank(&vertices, d) < d {
            return input(format!("unit ball is not full-dimensional in dimension {d}"));
        }
        let dual = polar_vertices(&vertices, d);
        let one_tol = tiny::<T>() * T::of(16.0);
        for (j, e) in dual.iter().enumerate() {
            let m = vertices.iter().map(|v| dot(e, v)).fold(T::neg_infinity(), T::max);
            if (m - T::one()).abs() > one_tol {
                return Err(Error::Capability(format!("dual extreme point {} has support value {m}", j + 1)));
            }
        }
        let label = format!("polytope({} vertices, d = {d})", vertices.len());
        Ok(FiniteDimSpace { d, norm: Norm::Polytope { vertices }, dual_extreme: Some(dual), label })
    }

    /// ℓ^p on ℝ^d, p ∈ [1, ∞]. The polytopal cases p = 1 and p = ∞ are stored as polytopes.
    pub fn pnorm(p: T, d: usize) -> Result<Self> {
        if d == 0 {
            return input("dimension must be positive");
        }
        if p.is_nan() || p < T::one() {
            return input(format!("p-norm needs p >= 1, got {p}"));
        }
        if p == T::one() {
            return Self::l1(d);
        }
        if p.is_infinite() {
            return Self::linf(d);
        }
        Ok(FiniteDimSpace { d, norm: Norm::PNorm { p }, dual_extreme: None, label: format!("l{p}(d = {d})") })
    }

    pub fn l1(d: usize) -> Result<Self> {
        let mut v = Vec::new();
        for i in 0..d {
            for s in [T::one(), -T::one()] {
                let mut e = vec![T::zero(); d];
                e[i] = s;
                v.push(e);
            }
        }
        let mut sp = Self::polytope(v)?;
        sp.label = format!("l1(d = {d})");
        Ok(sp)
    }

    pub fn linf(d: usize) -> Result<Self> {
        if d > MAX_CUBE_DIM {
            return input(format!("cube vertex list too large for d = {d}"));
        }
        let v = (0..1usize << d)
            .map(|mask| (0..d).map(|i| if mask >> i & 1 == 1 { -T::one() } else { T::one() }).collect())
            .collect();
        let mut sp = Self::polytope(v)?;
        sp.label = format!("linf(d = {d})");
        Ok(sp)
    }

    pub fn euclidean(d: usize) -> Result<Self> {
        Self::pnorm(T::of(2.0), d)
    }

    /// Symmetric polytope spanned by `max_vertices / 2` random points of [-1, 1]^d and their
    /// negatives.
    pub fn random_symmetric_polytope(d: usize, max_vertices: usize, rng: &mut impl Rng) -> Result<Self> {
        let pairs = max_vertices / 2;
        if pairs < d {
            return input(format!("{max_vertices} vertices cannot span dimension {d}"));
        }
        loop {
            let pts: Vec<Vec<T>> = (0..pairs).map(|_| (0..d).map(|_| T::of(rng.gen_range(-1.0..1.0))).collect()).collect();
            if rank(&pts, d) < d {
                continue;
            }
            let mut v = pts.clone();
            v.extend(pts.iter().map(|p| p.iter().map(|&x| -x).collect::<Vec<T>>()));
            return Self::polytope(v);
        }
    }

    pub fn from_spec(spec: &SpaceSpec) -> Result<Self> {
        match spec {
            SpaceSpec::Polytope { vertices } => Self::polytope(vertices.iter().map(|v| v.iter().map(|&x| T::of(x)).collect()).collect()),
            SpaceSpec::Pnorm { p, d } => Self::pnorm(T::of(*p), *d),
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn norm_kind(&self) -> &Norm<T> {
        &self.norm
    }

    pub fn is_polytopal(&self) -> bool {
        self.dual_extreme.is_some()
    }

    pub fn dual_extreme_points(&self) -> Option<&[Vec<T>]> {
        self.dual_extreme.as_deref()
    }

    fn conjugate(p: T) -> T {
        p / (p - T::one())
    }

    pub fn norm(&self, x: &[T]) -> T {
        match (&self.norm, &self.dual_extreme) {
            (Norm::Polytope { .. }, Some(ext)) => ext.iter().map(|e| dot(e, x)).fold(T::zero(), T::max),
            (Norm::PNorm { p }, _) => pnorm_value(x, *p),
            _ => unreachable!("polytope without dual"),
        }
    }

    pub fn dual_norm(&self, y: &[T]) -> T {
        match &self.norm {
            Norm::Polytope { vertices } => vertices.iter().map(|v| dot(y, v)).fold(T::zero(), T::max),
            Norm::PNorm { p } => pnorm_value(y, Self::conjugate(*p)),
        }
    }

    pub fn in_dual_ball(&self, y: &[T], tol: T) -> bool {
        y.len() == self.d && self.dual_norm(y) <= T::one() + tol
    }
}

fn pnorm_value<T: Scalar>(x: &[T], p: T) -> T {
    if p.is_infinite() {
        return x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    }
    let m = x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if m == T::zero() {
        return m;
    }
    m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<T>().powf(p.recip())
}

/// Vertices of {y : ⟨y, v⟩ ≤ 1 for every vertex v}: solutions of d-subsets of the tight
/// equations that satisfy all the others.
fn polar_vertices<T: Scalar>(vertices: &[Vec<T>], d: usize) -> Vec<Vec<T>> {
    let tol = T::of(DEDUP_TOL);
    let mut out: Vec<Vec<T>> = Vec::new();
    combinations(vertices.len(), d, |idx| {
        let a: Vec<Vec<T>> = idx.iter().map(|&j| vertices[j].clone()).collect();
        if let Some(y) = solve(a, vec![T::one(); d]) {
            if vertices.iter().all(|v| dot(&y, v) <= T::one() + tol) && !out.iter().any(|e| close(e, &y, tol)) {
                out.push(y);
            }
        }
    });
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SupportFunctional<T> {
    pub e: Vec<T>,
    /// ⟨e, x⟩.
    pub value: T,
    /// x was 0; `e` is an arbitrary dual unit vector.
    pub degenerate: bool,
}

/// A norming functional for x taken from the extreme points of the dual ball.
pub fn support_functional<T: Scalar>(space: &FiniteDimSpace<T>, x: &[T]) -> Result<SupportFunctional<T>> {
    if x.len() != space.d {
        return input(format!("vector of length {} in a space of dimension {}", x.len(), space.d));
    }
    let degenerate = x.iter().all(|v| *v == T::zero());
    let e = match (&space.norm, &space.dual_extreme) {
        (_, Some(ext)) => {
            let mut best = 0;
            for (j, e) in ext.iter().enumerate() {
                if dot(e, x) > dot(&ext[best], x) {
                    best = j;
                }
            }
            ext[best].clone()
        }
        (Norm::PNorm { p }, None) => {
            if degenerate {
                let mut e = vec![T::zero(); space.d];
                e[0] = T::one();
                e
            } else {
                let n = pnorm_value(x, *p);
                x.iter().map(|&v| v.signum() * (v.abs() / n).powf(*p - T::one())).collect()
            }
        }
        _ => unreachable!("polytope without dual"),
    };
    let value = dot(&e, x);
    Ok(SupportFunctional { e, value, degenerate })
}

pub fn positive_part<T: Scalar>(t: T) -> T {
    t.max(T::zero())
}

/// Prefix x_1..x_N of a bounded sequence in ℝ^d.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VectorSequencePrefix<T> {
    xs: Vec<Vec<T>>,
    d: usize,
}

impl<T: Scalar> VectorSequencePrefix<T> {
    pub fn new(xs: Vec<Vec<T>>) -> Result<Self> {
        let d = xs.first().map_or(0, |v| v.len());
        if d == 0 {
            return input("vector sequence needs at least one nonempty vector");
        }
        if let Some(j) = xs.iter().position(|v| v.len() != d) {
            return input(format!("x_{} has dimension {}, expected {d}", j + 1, xs[j].len()));
        }
        if let Some(j) = xs.iter().position(|v| v.iter().any(|x| !x.is_finite())) {
            return input(format!("x_{} is not finite", j + 1));
        }
        Ok(VectorSequencePrefix { xs, d })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> Vec<T>) -> Result<Self> {
        Self::new((1..=n).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// x_n, 1-based.
    pub fn get(&self, n: usize) -> &[T] {
        &self.xs[n - 1]
    }

    pub fn vectors(&self) -> &[Vec<T>] {
        &self.xs
    }

    /// R = max ‖x_n‖.
    pub fn bound(&self, space: &FiniteDimSpace<T>) -> T {
        self.xs.iter().map(|x| space.norm(x)).fold(T::zero(), T::max)
    }

    /// The scalar sequence ⟨y, x_n⟩.
    pub fn pairing(&self, y: &[T]) -> SequencePrefix<T> {
        SequencePrefix::new(self.xs.iter().map(|x| dot(y, x)).collect())
    }
}

enum MemberRows<T> {
    /// Row n is w_n·χ[start, end1 + n − 1].
    Growing { start: usize, end1: usize, weights: Vec<T> },
    Explicit(Vec<Vec<(usize, T)>>),
}

/// Counts and sums of inserted values indexed by rank.
struct RankTree<T> {
    count: Vec<T>,
    sum: Vec<T>,
    total: (T, T),
}

impl<T: Scalar> RankTree<T> {
    fn new(n: usize) -> Self {
        RankTree { count: vec![T::zero(); n + 1], sum: vec![T::zero(); n + 1], total: (T::zero(), T::zero()) }
    }

    fn insert(&mut self, rank: usize, v: T) {
        self.total = (self.total.0 + T::one(), self.total.1 + v);
        let mut i = rank + 1;
        while i < self.count.len() {
            self.count[i] += T::one();
            self.sum[i] += v;
            i += i & i.wrapping_neg();
        }
    }

    /// (count, sum) over ranks ≥ r.
    fn above(&self, r: usize) -> (T, T) {
        let (mut i, mut c, mut s) = (r, T::zero(), T::zero());
        while i > 0 {
            c += self.count[i];
            s += self.sum[i];
            i &= i - 1;
        }
        (self.total.0 - c, self.total.1 - s)
    }

    /// Root of w·Σ (v − c)⁺ = η over the inserted values; `sorted` holds all values by rank.
    fn level(&self, sorted: &[T], w: T, eta: T) -> T {
        if !(self.total.0 > T::zero()) || !(w > T::zero()) {
            return T::neg_infinity();
        }
        let target = eta / w;
        let g = |r: usize| {
            let (c, s) = self.above(r + 1);
            s - sorted[r] * c
        };
        // smallest rank r with φ(sorted[r]) ≤ η
        let (mut lo, mut hi) = (0usize, sorted.len() - 1);
        if g(hi) > target {
            hi = sorted.len();
        }
        while lo < hi {
            let mid = (lo + hi) / 2;
            if g(mid) <= target {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let (c, s) = self.above(lo);
        if !(c > T::zero()) {
            return sorted[lo.min(sorted.len() - 1)];
        }
        (s - target) / c
    }
}

/// Finite-scale J_{B,I}-limsup in positive-part form: per row n the level c_n solving
/// sup_i Σ_k b_nk^(i) (u_k − c_n)⁺ = η, then η + I-limsup of (c_n). The shift by η makes
/// the value exact on constants when row sums are 1. Convex in u.
pub struct DerivedLimsup<T: Scalar> {
    members: Vec<MemberRows<T>>,
    ideal: IdealHandle<T>,
    row_scale: Scale<T>,
    eta: T,
    len: usize,
    h: usize,
}

fn growing_window<T: Scalar>(m: &crate::matrix::MatrixRef<T>, h: usize) -> Option<MemberRows<T>> {
    let (start, end1, _) = m.uniform_window(1)?;
    let mut weights = Vec::with_capacity(h);
    for n in 1..=h {
        let (st, en, w) = m.uniform_window(n)?;
        if st != start || en != end1 + n - 1 || start == 0 {
            return None;
        }
        weights.push(w);
    }
    Some(MemberRows::Growing { start, end1, weights })
}

impl<T: Scalar> DerivedLimsup<T> {
    /// η is the scale's null threshold.
    pub fn new(family: &MatrixFamily<T>, ideal: &IdealHandle<T>, scale: &Scale<T>) -> Result<Self> {
        if !family.is_nonnegative() {
            return input(format!("{} has negative entries", family.label));
        }
        if ideal.base().is_none() {
            return input("the inner ideal must be given by a countable filter base");
        }
        let len = scale.n;
        let h = family.horizon(len);
        if h == 0 {
            return Err(Error::Capability(format!("no row of {} is evaluable within N = {len}", family.label)));
        }
        let members = family
            .members()
            .iter()
            .map(|m| {
                growing_window(m, h).unwrap_or_else(|| {
                    MemberRows::Explicit((1..=h).map(|n| m.row(n, len).into_iter().filter(|e| e.1 > T::zero()).collect()).collect())
                })
            })
            .collect();
        let eta = scale.null_threshold().max(tiny());
        Ok(DerivedLimsup { members, ideal: ideal.clone(), row_scale: scale.clone().with_n(h), eta, len, h })
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    pub fn rows(&self) -> usize {
        self.h
    }

    /// Per-row levels c_n.
    pub fn levels(&self, u: &[T]) -> Vec<T> {
        let u = &u[..self.len.min(u.len())];
        let mut out = vec![T::neg_infinity(); self.h];
        let mut ranked: Option<(Vec<T>, Vec<usize>)> = None;
        for m in &self.members {
            match m {
                MemberRows::Explicit(rows) => {
                    let mut warm = None;
                    for (n, entries) in rows.iter().enumerate() {
                        let c = row_level(entries, u, self.eta, warm);
                        warm = c.is_finite().then_some(c);
                        out[n] = out[n].max(c);
                    }
                }
                MemberRows::Growing { start, end1, weights } => {
                    let (sorted, rank) = ranked.get_or_insert_with(|| {
                        let mut idx: Vec<usize> = (0..u.len()).collect();
                        idx.sort_by(|&a, &b| crate::scalar::total_cmp(&u[a], &u[b]));
                        let mut rank = vec![0; u.len()];
                        for (r, &k) in idx.iter().enumerate() {
                            rank[k] = r;
                        }
                        (idx.iter().map(|&k| u[k]).collect(), rank)
                    });
                    let mut tree = RankTree::new(u.len());
                    for k in *start..*end1 {
                        tree.insert(rank[k - 1], u[k - 1]);
                    }
                    for (n, &w) in weights.iter().enumerate() {
                        let k = end1 + n;
                        tree.insert(rank[k - 1], u[k - 1]);
                        out[n] = out[n].max(tree.level(sorted, w, self.eta));
                    }
                }
            }
        }
        out
    }

    pub fn value(&self, u: &[T]) -> Result<T> {
        Ok(self.ideal.limsup(&self.levels(u), &self.row_scale)?.to_scalar() + self.eta)
    }

    /// max over rows n ∈ C_m and members i of Σ_k b_nk^(i) (u_k − c)⁺.
    pub fn filter_set_mass(&self, u: &[T], c: T, m: usize) -> Result<T> {
        let base = self.ideal.base().expect("based ideal");
        let mut worst = T::zero();
        for member in &self.members {
            for n in (1..=self.h).filter(|&n| base.in_complement(m, n)) {
                let v: T = match member {
                    MemberRows::Explicit(rows) => rows[n - 1].iter().map(|&(k, b)| b * positive_part(u[k - 1] - c)).sum(),
                    MemberRows::Growing { start, end1, weights } => {
                        weights[n - 1] * (*start..end1 + n).map(|k| positive_part(u[k - 1] - c)).sum::<T>()
                    }
                };
                worst = worst.max(v);
            }
        }
        Ok(worst)
    }
}

/// Root of c ↦ Σ b (u_k − c)⁺ − η; Newton from the left converges monotonically on this
/// convex piecewise-linear function.
fn row_level<T: Scalar>(entries: &[(usize, T)], u: &[T], eta: T, start: Option<T>) -> T {
    let eval = |c: T| {
        entries.iter().fold((T::zero(), T::zero()), |(f, s), &(k, b)| {
            let t = u[k - 1] - c;
            if t > T::zero() {
                (f + b * t, s + b)
            } else {
                (f, s)
            }
        })
    };
    let mass: T = entries.iter().map(|e| e.1).sum();
    if !(mass > T::zero()) {
        return T::neg_infinity();
    }
    let lo = entries.iter().map(|e| u[e.0 - 1]).fold(T::infinity(), T::min) - eta / mass;
    let mut c = match start {
        Some(c0) => {
            let (f, s) = eval(c0);
            if f >= eta {
                c0
            } else if s > T::zero() {
                c0 - (eta - f) / s
            } else {
                lo
            }
        }
        None => lo,
    };
    for _ in 0..256 {
        let (f, s) = eval(c);
        let excess = f - eta;
        if excess <= T::epsilon() * T::of(8.0) * eta.max(T::one()) || !(s > T::zero()) {
            break;
        }
        let next = c + excess / s;
        if next <= c {
            break;
        }
        c = next;
    }
    c
}

/// Samples from the dual ball: every extreme point when polytopal, then alternating
/// boundary and interior points until `count` are drawn.
pub fn sample_dual_ball<T: Scalar>(space: &FiniteDimSpace<T>, count: usize, seed: u64) -> Vec<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<T>> = space.dual_extreme.clone().unwrap_or_default();
    let mut boundary = true;
    while out.len() < count {
        let g = random_direction(space.d, &mut rng);
        let n = space.dual_norm(&g);
        let r = if boundary { T::one() } else { T::of(rng.gen::<f64>().powf(1.0 / space.d as f64)) };
        out.push(g.iter().map(|&x| x / n * r).collect());
        boundary = !boundary;
    }
    out
}

/// Points on the dual unit sphere.
pub fn sample_dual_sphere<T: Scalar>(space: &FiniteDimSpace<T>, count: usize, seed: u64) -> Vec<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let g = random_direction(space.d, &mut rng);
            let n = space.dual_norm(&g);
            g.iter().map(|&x| x / n).collect()
        })
        .collect()
}

/// Uniform direction by rejection from the cube.
fn random_direction<T: Scalar>(d: usize, rng: &mut impl Rng) -> Vec<T> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r2: f64 = g.iter().map(|x| x * x).sum();
        if r2 > 1e-12 && r2 <= 1.0 {
            return g.into_iter().map(T::of).collect();
        }
    }
}

/// l1 distance from `target` to conv(points), via a feasibility LP with slack.
pub fn hull_distance<T: Scalar>(points: &[Vec<T>], target: &[T]) -> f64 {
    if points.is_empty() {
        return f64::INFINITY;
    }
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let lambda: Vec<_> = points.iter().map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let slack: Vec<_> = target.iter().map(|_| (lp.add_var(1.0, (0.0, f64::INFINITY)), lp.add_var(1.0, (0.0, f64::INFINITY)))).collect();
    for (c, &t) in target.iter().enumerate() {
        let mut expr: Vec<_> = lambda.iter().zip(points).map(|(&v, p)| (v, p[c].as_f64())).collect();
        expr.push((slack[c].0, 1.0));
        expr.push((slack[c].1, -1.0));
        lp.add_constraint(expr, ComparisonOp::Eq, t.as_f64());
    }
    lp.add_constraint(lambda.iter().map(|&v| (v, 1.0)).collect::<Vec<_>>(), ComparisonOp::Eq, 1.0);
    lp.solve().map_or(f64::INFINITY, |s| s.objective().max(0.0))
}

/// Checks that conv of ∪ conv(H_m) contains the extreme points of the dual ball (sampled
/// sphere points when the dual ball is smooth). `decomposition` lists index sets into `h`,
/// increasing with union `h`.
pub fn i_generation_check<T: Scalar>(
    space: &FiniteDimSpace<T>,
    h: &[Vec<T>],
    decomposition: &[Vec<usize>],
    sample_budget: usize,
    seed: u64,
    scale: &Scale<T>,
) -> Result<Verdict<T>> {
    if decomposition.is_empty() {
        return input("decomposition needs at least one set");
    }
    if let Some(v) = h.iter().position(|v| v.len() != space.d) {
        return input(format!("functional {} has the wrong dimension", v + 1));
    }
    for (m, set) in decomposition.iter().enumerate() {
        if let Some(&j) = set.iter().find(|&&j| j >= h.len()) {
            return input(format!("H_{} refers to functional {} of {}", m + 1, j + 1, h.len()));
        }
        if m > 0 && !decomposition[m - 1].iter().all(|j| set.contains(j)) {
            return input(format!("H_{} is not contained in H_{}", m, m + 1));
        }
    }
    if (0..h.len()).any(|j| !decomposition.last().unwrap().contains(&j)) {
        return input("the decomposition does not exhaust H");
    }
    let mut union: Vec<usize> = decomposition.iter().flatten().copied().collect();
    union.sort_unstable();
    union.dedup();
    let pts: Vec<Vec<T>> = union.iter().map(|&j| h[j].clone()).collect();
    let targets = match space.dual_extreme_points() {
        Some(ext) => ext.to_vec(),
        None => sample_dual_sphere(space, sample_budget.max(1), seed),
    };
    let mut worst = 0.0f64;
    let mut outside = Vec::new();
    for (j, t) in targets.iter().enumerate() {
        let dist = hull_distance(&pts, t);
        worst = worst.max(dist);
        if dist > HULL_TOL {
            outside.push(j + 1);
        }
    }
    let est = ExtendedReal::Finite(T::of(worst.min(f64::MAX)));
    let v = if outside.is_empty() {
        Verdict::holds(est, T::of(worst), scale)
    } else {
        Verdict::fails(est, T::of(worst.min(f64::MAX)), scale, outside.clone())
            .with_note(format!("{} of {} extreme points lie outside the hull", outside.len(), targets.len()))
    };
    Ok(v)
}

/// Inputs shared by the sup-limsup check and the transfer results.
pub struct DualSetup<'a, T: Scalar> {
    pub space: &'a FiniteDimSpace<T>,
    /// Candidate boundary H ⊆ dual ball.
    pub h: &'a [Vec<T>],
    pub xs: &'a VectorSequencePrefix<T>,
    pub family: &'a MatrixFamily<T>,
    pub ideal: &'a IdealHandle<T>,
    pub scale: &'a Scale<T>,
    /// Dual-ball samples for the sup over the whole ball.
    pub samples: usize,
    pub seed: u64,
}

impl<'a, T: Scalar> DualSetup<'a, T> {
    fn validate(&self) -> Result<()> {
        self.scale.validate()?;
        if self.h.is_empty() {
            return input("H is empty");
        }
        if self.xs.dim() != self.space.d {
            return input(format!("sequence dimension {} differs from space dimension {}", self.xs.dim(), self.space.d));
        }
        if self.xs.len() < self.scale.n {
            return input(format!("sequence has {} terms, scale needs {}", self.xs.len(), self.scale.n));
        }
        let tol = self.scale.tol;
        if let Some(j) = self.h.iter().position(|e| !self.space.in_dual_ball(e, tol)) {
            return input(format!("functional {} of H is not in the dual ball (dual norm {})", j + 1, self.space.dual_norm(&self.h[j])));
        }
        Ok(())
    }

    fn whole_h(&self) -> Vec<Vec<usize>> {
        vec![(0..self.h.len()).collect()]
    }

    fn request(&self, y: &[T]) -> ConvergenceRequest<T> {
        ConvergenceRequest::new(self.xs.pairing(y), self.family.clone(), self.ideal.clone(), self.scale.clone())
    }
}

/// Largest absolute row mass over rows of the deepest filter set, plus truncation tails.
fn mass_bound<T: Scalar>(family: &MatrixFamily<T>, ideal: &IdealHandle<T>, scale: &Scale<T>) -> Result<(T, usize)> {
    let base = ideal.base().ok_or_else(|| Error::Input("the inner ideal must be given by a countable filter base".into()))?;
    let h = family.horizon(scale.n);
    let rs = scale.clone().with_n(h);
    let deepest = base.deepest(h, &rs);
    let sums = family.abs_row_sums(scale.n, h);
    let tail = family.max_tail(h, scale.n);
    let (mut m, mut arg) = (T::zero(), h.max(1));
    for n in (1..=h).filter(|&n| base.in_complement(deepest, n)) {
        if sums.sup[n - 1] + tail > m {
            m = sums.sup[n - 1] + tail;
            arg = n;
        }
    }
    Ok((m, arg))
}

fn mass_hypothesis<T: Scalar>(family: &MatrixFamily<T>, ideal: &IdealHandle<T>, scale: &Scale<T>) -> Result<(Verdict<T>, T)> {
    let (m, arg) = mass_bound(family, ideal, scale)?;
    Ok((Verdict::from_test(m.is_finite(), ExtendedReal::from_scalar(m), T::zero(), scale, vec![arg]), m))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimonsReport<T> {
    /// max over H of the finite-scale J-limsup of ⟨e, x_n⟩.
    pub sup_h: T,
    /// max over the dual-ball samples.
    pub sup_ball: T,
    /// sup_ball − sup_h.
    pub gap: T,
    /// 1-based index into H of the maximiser.
    pub arg_h: usize,
    pub samples: usize,
    pub eta: T,
    pub mass_bound: T,
    pub verdict: Verdict<T>,
}

/// Compares the sup over H of the J_{B,I}-limsup of ⟨e, x_n⟩ with its sup over sampled
/// points of the dual ball; holds when the ball exceeds H by at most the tolerance.
pub fn simons_sup_check<T: Scalar>(setup: &DualSetup<'_, T>) -> Result<SimonsReport<T>> {
    setup.validate()?;
    let (mv, m) = mass_hypothesis(setup.family, setup.ideal, setup.scale)?;
    if !mv.holds_at_scale() {
        return input(format!("row masses of {} are unbounded off the ideal", setup.family.label));
    }
    let f = DerivedLimsup::new(setup.family, setup.ideal, setup.scale)?;
    let n = setup.scale.n;
    let values = |y: &[T]| -> Result<T> {
        let u: Vec<T> = setup.xs.vectors()[..n].iter().map(|x| dot(y, x)).collect();
        f.value(&u)
    };
    let (mut sup_h, mut arg_h) = (T::neg_infinity(), 1);
    for (j, e) in setup.h.iter().enumerate() {
        let v = values(e)?;
        if v > sup_h {
            sup_h = v;
            arg_h = j + 1;
        }
    }
    let samples = sample_dual_ball(setup.space, setup.samples, setup.seed);
    let (mut sup_ball, mut arg_ball) = (T::neg_infinity(), 1);
    for (j, y) in samples.iter().enumerate() {
        let v = values(y)?;
        if v > sup_ball {
            sup_ball = v;
            arg_ball = j + 1;
        }
    }
    let gap = sup_ball - sup_h;
    let verdict = Verdict::from_test(gap <= setup.scale.tol, ExtendedReal::Finite(sup_h), gap.max(T::zero()), setup.scale, vec![arg_ball])
        .with_note(format!("{} dual-ball samples, eta = {}", samples.len(), f.eta()));
    Ok(SimonsReport { sup_h, sup_ball, gap, arg_h, samples: samples.len(), eta: f.eta(), mass_bound: m, verdict })
}

/// One verdict for a list of per-functional verdicts; witnesses are 1-based functional indices.
pub fn combine_verdicts<T: Scalar>(vs: &[Verdict<T>], scale: &Scale<T>) -> Verdict<T> {
    let worst = vs.iter().map(|v| v.residual).fold(T::zero(), T::max);
    let failed: Vec<usize> = vs.iter().enumerate().filter(|(_, v)| v.fails_at_scale()).map(|(j, _)| j + 1).collect();
    if !failed.is_empty() {
        let count = failed.len();
        return Verdict::fails(ExtendedReal::Finite(worst), worst, scale, failed).with_note(format!("{count} of {} functionals fail", vs.len()));
    }
    let open = vs.iter().filter(|v| v.status == Status::Inconclusive).count();
    if open > 0 {
        return Verdict::inconclusive(scale, format!("{open} of {} functionals undecided", vs.len()));
    }
    Verdict::holds(ExtendedReal::Finite(worst), worst, scale)
}

fn per_functional<T: Scalar>(
    setup: &DualSetup<'_, T>,
    ys: &[Vec<T>],
    x: &[T],
    test: impl Fn(ConvergenceRequest<T>, T) -> Result<Verdict<T>>,
) -> Result<Verdict<T>> {
    let vs = ys
        .iter()
        .map(|y| {
            let a = dot(y, x);
            test(setup.request(y).with_target(a), a)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(combine_verdicts(&vs, setup.scale))
}

fn check_point<T: Scalar>(setup: &DualSetup<'_, T>, x: &[T]) -> Result<()> {
    if x.len() != setup.space.d || x.iter().any(|v| !v.is_finite()) {
        return input(format!("limit point must be a finite vector of dimension {}", setup.space.d));
    }
    Ok(())
}

/// Weak statistical convergence: from the functionals in H to sampled functionals of the
/// whole dual ball. With `gauges`, the strong-summability half is checked as well.
pub fn weak_stat_transfer<T: Scalar>(setup: &DualSetup<'_, T>, x: &[T], gauges: Option<&GaugeFamily<T>>) -> Result<TheoremReport<T>> {
    setup.validate()?;
    check_point(setup, x)?;
    let scale = setup.scale;
    let mut report = TheoremReport::new("weak statistical transfer");
    report.push("H (I)-generates the dual ball", i_generation_check(setup.space, setup.h, &setup.whole_h(), setup.samples, setup.seed, scale)?);
    report.push("statistically convergent on H", per_functional(setup, setup.h, x, |r, _| statistically_convergent(&r))?);
    if let Some(g) = gauges {
        gauge_hypotheses(&mut report, g, scale)?;
        report.push("strongly summable on H", per_functional(setup, setup.h, x, |r, a| strong_summable(&r.with_gauges(g.clone()), a))?);
    }
    let ys = sample_dual_ball(setup.space, setup.samples, setup.seed);
    report.quantity("functionals_checked", T::of_usize(ys.len()));
    if !report.hypotheses_hold() {
        report.notes.push(format!("no claim: {} failed", report.failed_hypotheses().join(", ")));
        return Ok(report);
    }
    let mut c = per_functional(setup, &ys, x, |r, _| statistically_convergent(&r))?;
    if let Some(g) = gauges {
        let strong = per_functional(setup, &ys, x, |r, a| strong_summable(&r.with_gauges(g.clone()), a))?;
        c = combine_verdicts(&[c, strong], scale);
    }
    report.conclude(c.with_note("checked on sampled functionals of the dual ball"));
    Ok(report)
}

fn gauge_hypotheses<T: Scalar>(report: &mut TheoremReport<T>, g: &GaugeFamily<T>, scale: &Scale<T>) -> Result<()> {
    let mut low = T::infinity();
    let mut high = T::zero();
    let mut bad_low = Vec::new();
    let mut bad_high = Vec::new();
    for (j, &t) in scale.eps_list.iter().enumerate() {
        let lo = lower_envelope(g, t, scale)?;
        let hi = upper_envelope(g, t, scale)?;
        low = low.min(lo.value);
        high = high.max(hi.value);
        if lo.degenerate || !(lo.value > T::zero()) {
            bad_low.push(j + 1);
        }
        if !hi.value.is_finite() {
            bad_high.push(j + 1);
        }
    }
    report.push("gauge lower envelope positive", Verdict::from_test(bad_low.is_empty(), ExtendedReal::Finite(low), T::zero(), scale, bad_low));
    report.push("gauge upper envelope finite", Verdict::from_test(bad_high.is_empty(), ExtendedReal::from_scalar(high), T::zero(), scale, bad_high));
    let eq = equicontinuity_delta(g, scale.min_eps(), scale)?;
    report.push(
        "gauges equicontinuous at 0",
        Verdict::from_test(eq.delta > T::zero(), ExtendedReal::Finite(eq.delta), T::zero(), scale, vec![1]),
    );
    Ok(())
}

/// B^I-summability of ⟨e, x_n⟩ to ⟨e, x⟩ transferred from H to sampled functionals of the
/// dual ball. Signed families are allowed.
pub fn bi_summable_transfer<T: Scalar>(setup: &DualSetup<'_, T>, x: &[T]) -> Result<TheoremReport<T>> {
    setup.validate()?;
    check_point(setup, x)?;
    let scale = setup.scale;
    let mut report = TheoremReport::new("summability transfer");
    report.push("H (I)-generates the dual ball", i_generation_check(setup.space, setup.h, &setup.whole_h(), setup.samples, setup.seed, scale)?);
    let (mv, m) = mass_hypothesis(setup.family, setup.ideal, scale)?;
    report.quantity("mass_bound", m);
    report.push("absolute row sums bounded off an ideal set", mv);
    report.push("B^I-summable on H", per_functional(setup, setup.h, x, |r, _| b_summable(&r))?);
    let ys = sample_dual_ball(setup.space, setup.samples, setup.seed);
    report.quantity("functionals_checked", T::of_usize(ys.len()));
    if !report.hypotheses_hold() {
        report.notes.push(format!("no claim: {} failed", report.failed_hypotheses().join(", ")));
        return Ok(report);
    }
    let c = per_functional(setup, &ys, x, |r, _| b_summable(&r))?;
    report.conclude(c.with_note("checked on sampled functionals of the dual ball"));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{build_shift_family, Cesaro};
    use crate::sequence::is_square;
    use std::sync::Arc;

    fn cesaro() -> MatrixFamily<f64> {
        MatrixFamily::single(Arc::new(Cesaro))
    }

    fn sorted(mut v: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn duals_of_standard_norms() {
        let sq = FiniteDimSpace::<f64>::linf(2).unwrap();
        assert_eq!(sorted(sq.dual_extreme_points().unwrap().to_vec()), vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![0.0, 1.0], vec![1.0, 0.0]]);
        let l1 = FiniteDimSpace::<f64>::l1(3).unwrap();
        assert_eq!(l1.dual_extreme_points().unwrap().len(), 8);
        for e in l1.dual_extreme_points().unwrap() {
            assert!(e.iter().all(|x| (x.abs() - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn rejects_asymmetric_or_flat_polytopes() {
        assert!(FiniteDimSpace::<f64>::polytope(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]]).is_err());
        assert!(FiniteDimSpace::<f64>::polytope(vec![vec![1.0, 1.0], vec![-1.0, -1.0]]).is_err());
        assert!(FiniteDimSpace::<f64>::pnorm(0.5, 2).is_err());
    }

    #[test]
    fn random_polytope_dual_supports_at_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 2..=4 {
            let sp = FiniteDimSpace::<f64>::random_symmetric_polytope(d, 12, &mut rng).unwrap();
            let Norm::Polytope { vertices } = sp.norm_kind() else { panic!() };
            for e in sp.dual_extreme_points().unwrap() {
                let m = vertices.iter().map(|v| dot(e, v)).fold(f64::MIN, f64::max);
                assert!((m - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn support_functional_examples() {
        let sq = FiniteDimSpace::<f64>::linf(2).unwrap();
        let s = support_functional(&sq, &[3.0, -1.0]).unwrap();
        assert_eq!(s.e, vec![1.0, 0.0]);
        assert_eq!(s.value, 3.0);

        let eu = FiniteDimSpace::<f64>::euclidean(3).unwrap();
        let s = support_functional(&eu, &[3.0, 0.0, 4.0]).unwrap();
        assert!(close(&s.e, &[0.6, 0.0, 0.8], 1e-15));
        assert!((s.value - 5.0).abs() < 1e-12);

        let l1 = FiniteDimSpace::<f64>::l1(3).unwrap();
        let s = support_functional(&l1, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.e[0], 1.0);
        assert!(s.e.iter().all(|x| x.abs() == 1.0));
        assert_eq!(s.value, 1.0);

        assert!(support_functional(&eu, &[0.0, 0.0, 0.0]).unwrap().degenerate);
    }

    #[test]
    fn positive_part_values() {
        assert_eq!(positive_part(2.0), 2.0);
        assert_eq!(positive_part(-3.0), 0.0);
        assert_eq!(positive_part(0.0), 0.0);
    }

    #[test]
    fn spec_json_roundtrip() {
        let s: SpaceSpec = serde_json::from_str(r#"{"kind":"pnorm","p":"inf","d":3}"#).unwrap();
        assert_eq!(s, SpaceSpec::Pnorm { p: f64::INFINITY, d: 3 });
        let sp = FiniteDimSpace::<f64>::from_spec(&s).unwrap();
        assert_eq!(sp.dual_extreme_points().unwrap().len(), 6);
        let back: SpaceSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        let p: SpaceSpec = serde_json::from_str(r#"{"kind":"polytope","vertices":[[1,0],[-1,0],[0,1],[0,-1]]}"#).unwrap();
        assert_eq!(FiniteDimSpace::<f64>::from_spec(&p).unwrap().dual_extreme_points().unwrap().len(), 4);
    }

    #[test]
    fn row_level_matches_direct_root() {
        let u = [1.0, -1.0, 1.0, -1.0];
        let row: Vec<(usize, f64)> = (1..=4).map(|k| (k, 0.25)).collect();
        // (1/2)(1 - c) = 0.25 on [-1, 1]
        assert!((row_level(&row, &u, 0.25, None) - 0.5).abs() < 1e-15);
        assert!((row_level(&row, &u, 0.25, Some(0.9)) - 0.5).abs() < 1e-15);
        assert!((row_level(&row, &u, 0.25, Some(-3.0)) - 0.5).abs() < 1e-15);
        // below every value: 1 - 0.75 ... (0 - c) = eta
        assert!((row_level(&row, &[0.0; 4], 0.1, None) + 0.1).abs() < 1e-15);
    }

    #[test]
    fn window_path_matches_explicit_rows() {
        let fam = cesaro();
        let scale = Scale::new(300);
        let f = DerivedLimsup::new(&fam, &IdealHandle::finite(), &scale).unwrap();
        assert!(matches!(f.members[0], MemberRows::Growing { .. }));
        let u: Vec<f64> = (1..=300).map(|k| ((k * 37) % 11) as f64 / 5.0 - 1.0 + if k % 7 == 0 { 0.5 } else { 0.0 }).collect();
        let fast = f.levels(&u);
        for n in [1usize, 2, 17, 150, 299, 300] {
            let row: Vec<(usize, f64)> = (1..=n).map(|k| (k, 1.0 / n as f64)).collect();
            let slow = row_level(&row, &u, f.eta(), None);
            assert!((fast[n - 1] - slow).abs() < 1e-12, "row {n}: {} vs {slow}", fast[n - 1]);
        }
    }

    fn setup<'a>(
        space: &'a FiniteDimSpace<f64>,
        h: &'a [Vec<f64>],
        xs: &'a VectorSequencePrefix<f64>,
        family: &'a MatrixFamily<f64>,
        scale: &'a Scale<f64>,
    ) -> DualSetup<'a, f64> {
        static FINITE: std::sync::OnceLock<IdealHandle<f64>> = std::sync::OnceLock::new();
        DualSetup { space, h, xs, family, ideal: FINITE.get_or_init(IdealHandle::finite), scale, samples: 10_000, seed: 3 }
    }

    #[test]
    fn simons_alternating_plane() {
        let sp = FiniteDimSpace::<f64>::linf(2).unwrap();
        let h = sp.dual_extreme_points().unwrap().to_vec();
        let xs = VectorSequencePrefix::from_fn(400, |n| vec![if n % 2 == 0 { 1.0 } else { -1.0 }, 0.5]).unwrap();
        let fam = cesaro();
        let scale = Scale::new(400).with_null_tol(1e-6);
        let r = simons_sup_check(&setup(&sp, &h, &xs, &fam, &scale)).unwrap();
        assert!((r.sup_h - 1.0).abs() < 1e-5, "{}", r.sup_h);
        assert_eq!(h[r.arg_h - 1][0].abs(), 1.0);
        assert!(r.sup_ball <= 1.0 + 1e-12);
        assert!(r.gap <= 1e-6);
        assert!(r.verdict.holds_at_scale());
    }

    #[test]
    fn simons_constant_and_null() {
        let sp = FiniteDimSpace::<f64>::l1(3).unwrap();
        let h = sp.dual_extreme_points().unwrap().to_vec();
        let fam = cesaro();
        let scale = Scale::new(200);
        let x = vec![0.5, -1.0, 0.25];
        let xs = VectorSequencePrefix::from_fn(200, |_| x.clone()).unwrap();
        let r = simons_sup_check(&setup(&sp, &h, &xs, &fam, &scale)).unwrap();
        assert!((r.sup_h - sp.norm(&x)).abs() < 1e-6);
        assert!((r.sup_ball - sp.norm(&x)).abs() < 1e-6);
        let xs = VectorSequencePrefix::from_fn(200, |n| x.iter().map(|v| v * 0.5f64.powi(n as i32)).collect()).unwrap();
        let r = simons_sup_check(&setup(&sp, &h, &xs, &fam, &scale)).unwrap();
        assert!(r.sup_h.abs() < 0.02 && r.sup_ball.abs() < 0.02, "{} {}", r.sup_h, r.sup_ball);
        assert!(r.gap <= 1e-6);
    }

    #[test]
    fn simons_rejects_outside_functional() {
        let sp = FiniteDimSpace::<f64>::linf(2).unwrap();
        let h = vec![vec![1.0, 1.0]];
        let xs = VectorSequencePrefix::from_fn(50, |_| vec![1.0, 0.0]).unwrap();
        let fam = cesaro();
        let scale = Scale::new(50);
        assert!(matches!(simons_sup_check(&setup(&sp, &h, &xs, &fam, &scale)), Err(Error::Input(_))));
    }

    #[test]
    fn i_generation_fixtures() {
        let sp = FiniteDimSpace::<f64>::linf(2).unwrap();
        let scale = Scale::new(100);
        let ext = sp.dual_extreme_points().unwrap().to_vec();
        let v = i_generation_check(&sp, &ext, &[vec![0], vec![0, 1], vec![0, 1, 2, 3]], 0, 1, &scale).unwrap();
        assert!(v.holds_at_scale());
        let half = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let v = i_generation_check(&sp, &half, &[vec![0, 1]], 0, 1, &scale).unwrap();
        assert!(v.fails_at_scale());
        let minus_e1 = ext.iter().position(|e| e == &vec![-1.0, 0.0]).unwrap() + 1;
        assert!(v.witnesses.contains(&minus_e1));
        assert!(i_generation_check(&sp, &ext, &[vec![1, 2], vec![0]], 0, 1, &scale).is_err());
    }

    #[test]
    fn weak_transfer_examples() {
        let sp = FiniteDimSpace::<f64>::euclidean(2).unwrap();
        let h = sample_dual_sphere(&sp, 24, 5);
        let (x, v) = (vec![0.3, -0.2], vec![1.0, 2.0]);
        let fam = cesaro();
        let scale = Scale::new(4000);
        let xs = VectorSequencePrefix::from_fn(4000, |n| {
            let w = if is_square(n) { 1.0 } else { 0.0 };
            vec![x[0] + w * v[0], x[1] + w * v[1]]
        })
        .unwrap();
        let mut st = setup(&sp, &h, &xs, &fam, &scale);
        st.samples = 32;
        let r = weak_stat_transfer(&st, &x, None).unwrap();
        // finitely many functionals never generate a smooth dual ball
        assert!(r.hypothesis("H (I)-generates the dual ball").unwrap().fails_at_scale());
        assert!(r.hypothesis("statistically convergent on H").unwrap().holds_at_scale());
        let xs2 = VectorSequencePrefix::from_fn(4000, |n| {
            let s = if n % 2 == 0 { 1.0 } else { -1.0 };
            vec![x[0] + s * v[0], x[1] + s * v[1]]
        })
        .unwrap();
        let st2 = DualSetup { xs: &xs2, ..st };
        let r2 = weak_stat_transfer(&st2, &x, None).unwrap();
        assert!(r2.failed_hypotheses().contains(&"statistically convergent on H"));
        assert!(r2.conclusion.is_none());
    }

    #[test]
    fn weak_transfer_on_polytope() {
        let sp = FiniteDimSpace::<f64>::l1(2).unwrap();
        let h = sp.dual_extreme_points().unwrap().to_vec();
        let x = vec![0.3, -0.2];
        let fam = cesaro();
        let scale = Scale::new(4000);
        let xs = VectorSequencePrefix::from_fn(4000, |n| if is_square(n) { vec![1.3, 1.8] } else { x.clone() }).unwrap();
        let mut st = setup(&sp, &h, &xs, &fam, &scale);
        st.samples = 32;
        let r = weak_stat_transfer(&st, &x, None).unwrap();
        assert!(r.hypotheses_hold(), "{:?}", r.failed_hypotheses());
        assert_eq!(r.status(), Status::HoldsAtScale);
        let g = GaugeFamily::identity();
        let r = weak_stat_transfer(&st, &x, Some(&g)).unwrap();
        assert_eq!(r.status(), Status::HoldsAtScale, "{:?}", r.failed_hypotheses());
    }

    #[test]
    fn almost_convergence_transfers() {
        let sp = FiniteDimSpace::<f64>::linf(2).unwrap();
        let h = sp.dual_extreme_points().unwrap().to_vec();
        let n = 2000;
        let scale = Scale::new(n).with_i_max(32);
        let fam = build_shift_family(Arc::new(Cesaro), 32);
        let xs = VectorSequencePrefix::from_fn(n, |k| vec![(k % 2) as f64, 1.0]).unwrap();
        let mut st = setup(&sp, &h, &xs, &fam, &scale);
        st.samples = 16;
        let r = bi_summable_transfer(&st, &[0.5, 1.0]).unwrap();
        assert_eq!(r.status(), Status::HoldsAtScale, "{:?}", r.failed_hypotheses());
        let r = bi_summable_transfer(&st, &[0.5, 0.0]).unwrap();
        assert!(r.failed_hypotheses().contains(&"B^I-summable on H"));
        assert!(r.conclusion.is_none());
    }

    #[test]
    fn filter_sets_are_convex() {
        let sp = FiniteDimSpace::<f64>::linf(2).unwrap();
        let xs = VectorSequencePrefix::from_fn(300, |n| vec![((n * 7) % 5) as f64 / 4.0 - 0.5, (n % 3) as f64 - 1.0]).unwrap();
        let f = DerivedLimsup::new(&cesaro(), &IdealHandle::finite(), &Scale::new(300)).unwrap();
        let ys = sample_dual_ball(&sp, 64, 9);
        let c = 0.2;
        let mass = |y: &[f64]| f.filter_set_mass(&xs.pairing(y).into_values(), c, 150).unwrap();
        let eps = 0.3;
        for w in ys.windows(2) {
            if mass(&w[0]) <= eps && mass(&w[1]) <= eps {
                let mid: Vec<f64> = w[0].iter().zip(&w[1]).map(|(a, b)| 0.5 * (a + b)).collect();
                assert!(mass(&mid) <= eps + 1e-12);
            }
        }
    }
}
